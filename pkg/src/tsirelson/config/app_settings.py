"""Application-level settings for tsirelson."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """Settings for norm computation, oracles and experiments."""

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore",
        populate_by_name=True,
    )

    app_name: str = Field(
        default="tsirelson",
        alias="TSIRELSON_APP_NAME",
        description="Tool name embedded in every output file.",
    )

    # Numerics
    tol: float = Field(
        default=1e-9,
        alias="TSIRELSON_TOL",
        gt=0.0,
        description="Absolute-plus-relative tolerance for membership and inequality checks.",
    )
    seed: int = Field(
        default=0,
        alias="TSIRELSON_SEED",
        ge=0,
        description="Root seed for every random stream of an invocation.",
    )

    # Budgets
    support_budget: int = Field(
        default=2000,
        alias="TSIRELSON_SUPPORT_BUDGET",
        gt=0,
        description="Largest support evaluated per combination in experiments.",
    )
    classical_cell_budget: int = Field(
        default=60_000_000,
        alias="TSIRELSON_CLASSICAL_CELL_BUDGET",
        gt=0,
        description="Largest number of interval-table cells the classical DP may allocate.",
    )
    classical_oracle_max_support: int = Field(
        default=8,
        alias="TSIRELSON_CLASSICAL_ORACLE_MAX_SUPPORT",
        gt=0,
        description="Support guard for the norming-set enumeration oracle.",
    )
    modified_oracle_max_support: int = Field(
        default=6,
        alias="TSIRELSON_MODIFIED_ORACLE_MAX_SUPPORT",
        gt=0,
        description="Support guard for the disjoint-partition recursion oracle.",
    )
    enumeration_cap: int = Field(
        default=200_000,
        alias="TSIRELSON_ENUMERATION_CAP",
        gt=0,
        description="Pattern cap for norming-set enumeration before truncating.",
    )

    # Execution
    workers: int = Field(
        default=1,
        alias="TSIRELSON_WORKERS",
        ge=1,
        description="Worker processes for experiment trials (1 runs in a thread).",
    )
    log_level: str = Field(
        default="WARNING",
        alias="TSIRELSON_LOG_LEVEL",
        description="Logging level for the CLI (DEBUG, INFO, WARNING, ERROR).",
    )

    # Development/testing settings
    use_mock_norms: bool = Field(
        default=False,
        alias="TSIRELSON_USE_MOCK_NORMS",
        description="Toggle to inject the mock norm service for fast pipeline plumbing runs.",
    )


settings = AppSettings()
