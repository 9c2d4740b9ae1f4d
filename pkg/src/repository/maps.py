import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.core.models import MapDescriptor, Mat2, Point2, Window, spectral_norm
from src.core.rng import Xoshiro256StarStar
from src.exceptions import DomainError, NonFiniteResult, UnknownMap


logger = logging.getLogger(__name__)

SQRT3_4 = math.sqrt(3.0) / 4.0


def _const(x, value: float):
    return np.zeros_like(x, dtype=float) + value


def _sech2(t):
    return 1.0 - np.tanh(t) ** 2


_MAPS: list[MapDescriptor] = [
    MapDescriptor(
        id="f1",
        rule=lambda x, y: (0.7 * x, 0.6 * y ** 2 - 0.4),
        jacobian=lambda x, y: (_const(x, 0.7), _const(x, 0.0), _const(x, 0.0), 1.2 * y),
        formula="(0.7x, 0.6y^2 - 0.4)",
        description="quadratic contraction in the y-axis",
    ),
    MapDescriptor(
        id="f2",
        rule=lambda x, y: (0.5 * x + 0.25, 0.8 * y ** 2 - 0.3),
        jacobian=lambda x, y: (_const(x, 0.5), _const(x, 0.0), _const(x, 0.0), 1.6 * y),
        formula="(0.5x + 0.25, 0.8y^2 - 0.3)",
        description="squaring in the y component",
    ),
    MapDescriptor(
        id="f3",
        rule=lambda x, y: (0.9 * np.sin(y) + 0.1 * x, 0.9 * np.sin(x)),
        jacobian=lambda x, y: (_const(x, 0.1), 0.9 * np.cos(y), 0.9 * np.cos(x), _const(x, 0.0)),
        formula="(0.9 sin y + 0.1x, 0.9 sin x)",
        description="sine terms coupling the two axes",
    ),
    MapDescriptor(
        id="f4",
        rule=lambda x, y: (0.7 * np.sin(2 * x) - 0.3 * y, 0.7 * np.cos(2 * y) + 0.3 * x),
        jacobian=lambda x, y: (1.4 * np.cos(2 * x), _const(x, -0.3), _const(x, 0.3), -1.4 * np.sin(2 * y)),
        formula="(0.7 sin 2x - 0.3y, 0.7 cos 2y + 0.3x)",
        description="volatile oscillatory member",
    ),
    MapDescriptor(
        id="f5",
        rule=lambda x, y: (0.4 * x ** 2 - 0.5 * y - 0.5, 0.6 * y + 0.25 * x ** 2 - 0.4),
        jacobian=lambda x, y: (0.8 * x, _const(x, -0.5), 0.5 * x, _const(x, 0.6)),
        formula="(0.4x^2 - 0.5y - 0.5, 0.6y + 0.25x^2 - 0.4)",
        description="interactions between x^2 and y",
    ),
    MapDescriptor(
        id="f6",
        rule=lambda x, y: (0.6 * (x + y), 0.9 * np.tanh(x - y)),
        jacobian=lambda x, y: (_const(x, 0.6), _const(x, 0.6), 0.9 * _sech2(x - y), -0.9 * _sech2(x - y)),
        formula="(0.6(x + y), 0.9 tanh(x - y))",
        description="diagonal stretching with a hyperbolic fold",
    ),
    MapDescriptor(
        id="f7",
        rule=lambda x, y: (0.5 * np.sinh(x) - 0.3 * y, 0.8 * np.sin(2 * y) + 0.2 * x),
        jacobian=lambda x, y: (0.5 * np.cosh(x), _const(x, -0.3), _const(x, 0.2), 1.6 * np.cos(2 * y)),
        formula="(0.5 sinh x - 0.3y, 0.8 sin 2y + 0.2x)",
        description="hyperbolic-sine member",
    ),
    MapDescriptor(
        id="f8",
        rule=lambda x, y: (np.sin(x * y) - np.cos(y), np.sin(y ** 2 + x)),
        jacobian=lambda x, y: (
            y * np.cos(x * y),
            x * np.cos(x * y) + np.sin(y),
            np.cos(y ** 2 + x),
            2 * y * np.cos(y ** 2 + x),
        ),
        formula="(sin(xy) - cos y, sin(y^2 + x))",
        description="strong local oscillations",
    ),
    MapDescriptor(
        id="f9",
        rule=lambda x, y: (0.9 * np.cos(2 * y) + 0.2 * x, 0.9 * np.sin(3 * x) - 0.2 * y),
        jacobian=lambda x, y: (_const(x, 0.2), -1.8 * np.sin(2 * y), 2.7 * np.cos(3 * x), _const(x, -0.2)),
        formula="(0.9 cos 2y + 0.2x, 0.9 sin 3x - 0.2y)",
        description="trigonometric member",
    ),
    MapDescriptor(
        id="f10",
        rule=lambda x, y: (0.5 * (x ** 2 - y ** 2) + 0.2, x * y),
        jacobian=lambda x, y: (x, -y, y, x),
        formula="(0.5(x^2 - y^2) + 0.2, xy)",
        description="radial geometry via squared terms",
    ),
    MapDescriptor(
        id="f11",
        rule=lambda x, y: (0.9 * np.sin(3 * x) + 0.1 * y, 0.9 * np.tanh(x + y)),
        jacobian=lambda x, y: (2.7 * np.cos(3 * x), _const(x, 0.1), 0.9 * _sech2(x + y), 0.9 * _sech2(x + y)),
        formula="(0.9 sin 3x + 0.1y, 0.9 tanh(x + y))",
        description="contains sin(3x) and tanh(x + y)",
    ),
    MapDescriptor(
        id="f12",
        rule=lambda x, y: (0.9 * np.sin(x) * np.cos(y), 0.9 * np.sin(y) * np.cos(x)),
        jacobian=lambda x, y: (
            0.9 * np.cos(x) * np.cos(y),
            -0.9 * np.sin(x) * np.sin(y),
            -0.9 * np.sin(x) * np.sin(y),
            0.9 * np.cos(x) * np.cos(y),
        ),
        formula="(0.9 sin x cos y, 0.9 sin y cos x)",
        description="multiplicative sinusoidal interactions",
    ),
    MapDescriptor(
        id="sier1",
        rule=lambda x, y: (x / 2, y / 2),
        jacobian=lambda x, y: (_const(x, 0.5), _const(x, 0.0), _const(x, 0.0), _const(x, 0.5)),
        formula="(x/2, y/2)",
        description="scale the unit triangle by 1/2 toward (0, 0)",
        is_affine=True,
    ),
    MapDescriptor(
        id="sier2",
        rule=lambda x, y: (x / 2 + 0.5, y / 2),
        jacobian=lambda x, y: (_const(x, 0.5), _const(x, 0.0), _const(x, 0.0), _const(x, 0.5)),
        formula="(x/2 + 1/2, y/2)",
        description="scale the unit triangle by 1/2 toward (1, 0)",
        is_affine=True,
    ),
    MapDescriptor(
        id="sier3",
        rule=lambda x, y: (x / 2 + 0.25, y / 2 + SQRT3_4),
        jacobian=lambda x, y: (_const(x, 0.5), _const(x, 0.0), _const(x, 0.0), _const(x, 0.5)),
        formula="(x/2 + 1/4, y/2 + sqrt(3)/4)",
        description="scale the unit triangle by 1/2 toward the apex",
        is_affine=True,
    ),
    MapDescriptor(
        id="sier_nl",
        rule=lambda x, y: (np.sin(np.pi * x) * y, np.cos(np.pi * y) * x),
        jacobian=lambda x, y: (
            np.pi * np.cos(np.pi * x) * y,
            np.sin(np.pi * x),
            np.cos(np.pi * y),
            -np.pi * np.sin(np.pi * y) * x,
        ),
        formula="(sin(pi x) y, cos(pi y) x)",
        description="nonlinear extension of the Sierpinski system",
    ),
]

REGISTRY: dict[str, MapDescriptor] = {m.id: m for m in _MAPS}


def lookup(map_id: str) -> MapDescriptor:
    """
    Retrieve a registered map by its id.

    :param map_id: One of f1..f12, sier1, sier2, sier3, sier_nl.
    :type map_id: str
    :return: The immutable descriptor.
    :rtype: MapDescriptor
    """
    try:
        return REGISTRY[map_id]
    except KeyError:
        raise UnknownMap(map_id) from None


def catalog() -> list[MapDescriptor]:
    return list(REGISTRY.values())


def render_catalog() -> str:
    """
    Markdown table of every registered map.

    :return: The catalog document.
    :rtype: str
    """
    lines = [
        "# Map catalog",
        "",
        "| id | closed form | constraint | affine |",
        "|---|---|---|---|",
    ]
    for m in catalog():
        lines.append(f"| {m.id} | `{m.formula}` | {m.description} | {'yes' if m.is_affine else 'no'} |")
    return "\n".join(lines) + "\n"


def make_affine(map_id: str, matrix: Sequence[Sequence[float]], offset: Sequence[float] = (0.0, 0.0)) -> MapDescriptor:
    """
    Build an unregistered affine map p -> A p + b.

    :param map_id: Name of the new map.
    :type map_id: str
    :param matrix: Row-major 2x2 linear part.
    :type matrix: Sequence[Sequence[float]]
    :param offset: Translation part.
    :type offset: Sequence[float]
    :return: The descriptor, with a constant analytic Jacobian.
    :rtype: MapDescriptor
    """
    (a11, a12), (a21, a22) = matrix
    bx, by = offset
    return MapDescriptor(
        id=map_id,
        rule=lambda x, y: (a11 * x + a12 * y + bx, a21 * x + a22 * y + by),
        jacobian=lambda x, y: (_const(x, a11), _const(x, a12), _const(x, a21), _const(x, a22)),
        formula=f"([{a11}, {a12}; {a21}, {a22}] p + ({bx}, {by}))",
        description="affine map",
        is_affine=True,
    )


def make_similitude(map_id: str, ratio: float, angle: float = 0.0, offset: Sequence[float] = (0.0, 0.0)) -> MapDescriptor:
    c, s = math.cos(angle), math.sin(angle)
    descriptor = make_affine(map_id, ((ratio * c, -ratio * s), (ratio * s, ratio * c)), offset)
    return MapDescriptor(
        id=map_id,
        rule=descriptor.rule,
        jacobian=descriptor.jacobian,
        formula=f"{ratio} R({angle}) p + ({offset[0]}, {offset[1]})",
        description=f"similitude with ratio {ratio}",
        is_affine=True,
    )


def _check_finite(map_id: str, *values) -> None:
    if not all(np.isfinite(v).all() for v in values):
        raise NonFiniteResult(f"Map '{map_id}' produced a non-finite value")


def apply_rule(m: MapDescriptor, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate a map on coordinate arrays, refusing non-finite output.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = m.rule(x, y)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_finite(m.id, u, v)
    return u, v


def eval_map(m: MapDescriptor, p: Sequence[float]) -> Point2:
    """
    Image of one point.

    :param m: The map.
    :type m: MapDescriptor
    :param p: A finite point.
    :type p: Sequence[float]
    :return: f(p).
    :rtype: Point2
    """
    u, v = apply_rule(m, np.float64(p[0]), np.float64(p[1]))
    return Point2(float(u), float(v))


def finite_difference_jacobian(m: MapDescriptor, x, y) -> tuple[np.ndarray, ...]:
    """
    Central differences with step 1e-6 * max(1, |coordinate|), elementwise over arrays.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hx = 1e-6 * np.maximum(1.0, np.abs(x))
    hy = 1e-6 * np.maximum(1.0, np.abs(y))
    up_x, vp_x = apply_rule(m, x + hx, y)
    um_x, vm_x = apply_rule(m, x - hx, y)
    up_y, vp_y = apply_rule(m, x, y + hy)
    um_y, vm_y = apply_rule(m, x, y - hy)
    return (
        (up_x - um_x) / (2 * hx),
        (up_y - um_y) / (2 * hy),
        (vp_x - vm_x) / (2 * hx),
        (vp_y - vm_y) / (2 * hy),
    )


def jacobian_entries(m: MapDescriptor, x, y) -> tuple[np.ndarray, ...]:
    """
    Jacobian entries (a11, a12, a21, a22) over coordinate arrays, analytic when available.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.jacobian is None:
        entries = finite_difference_jacobian(m, x, y)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            entries = tuple(np.broadcast_to(np.asarray(e, dtype=float), x.shape) for e in m.jacobian(x, y))
    _check_finite(m.id, *entries)
    return entries


def jacobian_at(m: MapDescriptor, p: Sequence[float]) -> Mat2:
    """
    Jacobian of a map at one point.

    :param m: The map.
    :type m: MapDescriptor
    :param p: A finite point.
    :type p: Sequence[float]
    :return: Row-major Jacobian.
    :rtype: Mat2
    """
    entries = jacobian_entries(m, np.float64(p[0]), np.float64(p[1]))
    return Mat2(*(float(e) for e in entries))


def sample_window(window: Window, n: int, generator: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    xmin, xmax, ymin, ymax = window.checked()
    return generator.uniform(xmin, xmax, n), generator.uniform(ymin, ymax, n)


def estimate_lipschitz(m: MapDescriptor, window: Sequence[float], n_pairs: int, seed: int,
                       generator: Optional[np.random.Generator] = None) -> float:
    """
    Empirical lower bound on the Lipschitz constant of a map over a window: the
    largest stretch seen over sampled point pairs and sampled Jacobian norms.

    :param m: The map.
    :type m: MapDescriptor
    :param window: Axis-aligned box (xmin, xmax, ymin, ymax).
    :type window: Sequence[float]
    :param n_pairs: Number of pairs and of Jacobian samples.
    :type n_pairs: int
    :param seed: Seed of the sampling stream.
    :type seed: int
    :return: The largest observed stretch.
    :rtype: float
    """
    if n_pairs < 1:
        raise DomainError(f"n_pairs must be at least 1, got {n_pairs}")
    window = Window(*window).checked()
    if m.is_affine:
        # constant Jacobian: its norm is the exact constant
        centre = ((window.xmin + window.xmax) / 2, (window.ymin + window.ymax) / 2)
        return float(jacobian_at(m, centre).spectral_norm())
    if generator is None:
        generator = Xoshiro256StarStar(seed).numpy_generator()

    ax, ay = sample_window(window, n_pairs, generator)
    bx, by = sample_window(window, n_pairs, generator)
    fax, fay = apply_rule(m, ax, ay)
    fbx, fby = apply_rule(m, bx, by)
    gap = np.hypot(ax - bx, ay - by)
    keep = gap > 1e-9 * math.hypot(window.xmax - window.xmin, window.ymax - window.ymin)
    stretch = np.hypot(fax - fbx, fay - fby)[keep] / gap[keep]

    cx, cy = sample_window(window, n_pairs, generator)
    norms = spectral_norm(*jacobian_entries(m, cx, cy))

    best = float(max(stretch.max(initial=0.0), norms.max(initial=0.0)))
    logger.debug("Lipschitz estimate for %s over %s: %.6g", m.id, tuple(window), best)
    return best
