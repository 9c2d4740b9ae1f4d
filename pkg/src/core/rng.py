import math
from typing import Sequence

import numpy as np

from src.exceptions import DomainError


MAX_UINT64 = 0xFFFFFFFFFFFFFFFF

JUMP = [0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C]


def rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MAX_UINT64


def splitmix64(state: int) -> tuple[int, int]:
    """
    One SplitMix64 step.

    :param state: The current 64-bit state.
    :type state: int
    :return: The advanced state and the mixed output.
    :rtype: tuple[int, int]
    """
    state = (state + 0x9E3779B97F4A7C15) & MAX_UINT64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MAX_UINT64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MAX_UINT64
    return state, z ^ (z >> 31)


class Xoshiro256StarStar:
    """
    xoshiro256** seeded from a single integer through SplitMix64.

    Every random quantity in the package is a function of one integer seed: scalar
    draws come from this stream directly, bulk array draws from a numpy generator
    keyed by the next output of this stream.
    """

    def __init__(self, seed: int):
        self.seed = seed
        state = seed & MAX_UINT64
        self.s = [0] * 4
        for i in range(4):
            state, self.s[i] = splitmix64(state)

    @classmethod
    def from_state(cls, state: Sequence[int], seed: int = 0) -> "Xoshiro256StarStar":
        """
        Generator resuming from four raw 64-bit state words, bypassing SplitMix64 seeding.

        :param state: The state words; not all zero.
        :type state: Sequence[int]
        :param seed: Seed recorded on the generator.
        :type seed: int
        :return: The generator.
        :rtype: Xoshiro256StarStar
        """
        words = [int(w) & MAX_UINT64 for w in state]
        if len(words) != 4 or not any(words):
            raise DomainError("xoshiro256** needs four state words, not all zero")
        rng = cls.__new__(cls)
        rng.seed = seed
        rng.s = words
        return rng

    def next_u64(self) -> int:
        s = self.s
        result = (rotl((s[1] * 5) & MAX_UINT64, 7) * 9) & MAX_UINT64
        t = (s[1] << 17) & MAX_UINT64

        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]

        s[2] ^= t
        s[3] = rotl(s[3], 45)

        return result

    def random(self) -> float:
        """
        Uniform double in [0, 1) built from the top 53 bits.
        """
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self) -> float:
        # Box-Muller; 1 - u keeps the logarithm finite
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gamma(self, shape: float) -> float:
        """
        Marsaglia-Tsang gamma variate with unit scale.

        :param shape: Shape parameter, strictly positive.
        :type shape: float
        :return: One Gamma(shape, 1) draw.
        :rtype: float
        """
        if shape < 1.0:
            u = 1.0 - self.random()
            return self.gamma(shape + 1.0) * u ** (1.0 / shape)

        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = 1.0 - self.random()
            if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
                return d * v

    def jumped(self) -> "Xoshiro256StarStar":
        """
        Return an independent copy advanced by 2**128 steps. The receiver is left untouched.
        """
        other = Xoshiro256StarStar.from_state(self.s, self.seed)

        s = [0, 0, 0, 0]
        for word in JUMP:
            for b in range(64):
                if word & (1 << b):
                    for k in range(4):
                        s[k] ^= other.s[k]
                other.next_u64()
        other.s = s
        return other

    def numpy_generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.next_u64()))
