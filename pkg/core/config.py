from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CMA_",
        case_sensitive=False,
    )

    # --- Arithmetic ---
    characteristic: int = 32003

    # --- Windows and lengths ---
    window_extra: int = 2  # default window is dim A + window_extra
    minimalize_margin: int = 2  # extra terms computed past the window before minimalizing
    ding_index_nmax: int = 4

    # --- Isomorphism search ---
    iso_betti_length: int = 3
    iso_search_attempts: int = 200
    iso_search_seed: int = 20240611

    # --- Debug cross-checks ---
    omega_rank_crosscheck: bool = False

    # --- Reports ---
    json_indent: int = 2

    # --- App ---
    app_title: str = "Cohen-Macaulay Approximation Engine"
    app_version: str = "1.0.0"
    log_level: str = "INFO"


settings = Settings()
