from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    default_iterations: int = 100_000
    default_burn_in: int = 1_000
    default_x0: tuple[float, float] = (0.1, 0.1)
    divergence_radius: float = 100.0

    resample_cap: int = 4_096
    sliced_projections: int = 128
    exact_uniform_limit: int = 1_024
    exact_weighted_limit: int = 512
    invariance_tol: float = 1e-6
    invariance_max_steps: int = 64

    box_levels: int = 12
    correlation_max_pairs: int = 2_000_000

    stability_orbit_length: int = 20_000
    stability_grid: int = 32
    lipschitz_samples: int = 2_000
    reference_window: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)

    density_resolution: int = 512
    scatter_size: int = 800

    case_study_iterations: int = 100_000
    case_study_burn_in: int = 100
    case_study_seed: int = 42

    config_dir: str = "configs"
    output_dir: str = "output"
    workers: int = 1
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", env_prefix="RNIFS_")


settings = Settings()
