"""Models for the comparison checks, the averaging construction and the
stabilization experiment."""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from tsirelson.models.vectors import GridVector


class BlockSequence(BaseModel):
    """Nonzero grid vectors with ``supp x_1 < supp x_2 < ...``."""

    model_config = ConfigDict(frozen=True)

    vectors: list[GridVector]

    @model_validator(mode="after")
    def _check_blocks(self) -> BlockSequence:
        previous: int | None = None
        for position, vector in enumerate(self.vectors):
            if not vector.entries:
                raise ValueError(f"block {position} is zero")
            if previous is not None and vector.support[0] <= previous:
                raise ValueError(f"block {position} does not follow block {position - 1}")
            previous = vector.support[-1]
        return self

    def __len__(self) -> int:
        return len(self.vectors)


class LevelProfile(BaseModel):
    """Per-vector J_m masses ``||J_m x_n||_p^p`` and the common targets ``b_m``."""

    masses: list[list[float]]
    targets: list[float]
    eps: float
    admitted: list[int] = Field(default_factory=list)


class ApproximResult(BaseModel):
    """Output of the averaging construction.

    ``outputs[n]`` is the assembled ``y_n = y_{n,0} + ... + y_{n,M-1}`` and
    ``components[n][k]`` its k-th scaled block sum.
    """

    outputs: list[GridVector]
    components: list[list[GridVector]]
    profile: LevelProfile
    l: int
    block_lengths: list[int]
    required: int
    coefficients: list[list[float]]
    output_masses: list[list[float]]
    component_masses: list[list[list[float]]]


class ComparisonResult(BaseModel):
    """One comparison inequality evaluated on a single grid vector."""

    holds: bool
    pairing: float
    norm_value: float
    bound: float
    witness: GridVector | None = None
    heavy_part: float | None = None
    light_part: float | None = None


class Envelope(BaseModel):
    model_config = ConfigDict(frozen=True)

    low: float
    high: float

    def contains(self, value: float, tol: float = 1e-9) -> bool:
        return self.low - tol <= value <= self.high + tol


class TrialRecord(BaseModel):
    """Raw norms of one combination; every flag is derived from them."""

    trial: int
    coefficients: list[float]
    lp_norm: float
    classical: float | None
    modified: float
    level_factor: float
    log_factor: float
    comparison_envelope: Envelope
    intermediate_envelope: Envelope
    final_envelope: Envelope
    grid_mass_min: float
    grid_mass_max: float
    grid_mass_envelope: Envelope
    tol: float = 1e-9

    @computed_field  # type: ignore[prop-decorator]
    @property
    def comparison_ratio(self) -> float:
        return self.level_factor * self.modified / self.lp_norm

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rho(self) -> float:
        return self.log_factor * self.modified / self.lp_norm

    @computed_field  # type: ignore[prop-decorator]
    @property
    def within_comparison(self) -> bool:
        return self.comparison_envelope.contains(self.comparison_ratio, self.tol)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def within_intermediate(self) -> bool:
        return self.intermediate_envelope.contains(self.comparison_ratio, self.tol)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def within_bounds(self) -> bool:
        return self.final_envelope.contains(self.rho, self.tol)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def grid_masses_ok(self) -> bool:
        return self.grid_mass_envelope.contains(
            self.grid_mass_min, self.tol
        ) and self.grid_mass_envelope.contains(self.grid_mass_max, self.tol)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sandwich_ok(self) -> bool:
        upper = self.modified <= self.lp_norm + self.tol
        if self.classical is None:
            return upper
        return self.classical <= self.modified + self.tol and upper

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return (
            self.within_comparison
            and self.within_intermediate
            and self.within_bounds
            and self.grid_masses_ok
            and self.sandwich_ok
        )


class StabReport(BaseModel):
    params: dict[str, Any]
    config: dict[str, Any] = Field(default_factory=dict)
    construction: dict[str, Any] = Field(default_factory=dict)
    trials: list[TrialRecord] = Field(default_factory=list)
    lambda_bound: float

    @computed_field  # type: ignore[prop-decorator]
    @property
    def min_rho(self) -> float:
        return min((t.rho for t in self.trials), default=math.nan)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def max_rho(self) -> float:
        return max((t.rho for t in self.trials), default=math.nan)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def lambda_hat(self) -> float:
        if not self.trials:
            return math.nan
        return self.max_rho / self.min_rho

    @computed_field  # type: ignore[prop-decorator]
    @property
    def lambda_within_bound(self) -> bool:
        return bool(self.trials) and self.lambda_hat <= self.lambda_bound

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return self.lambda_within_bound and all(t.passed for t in self.trials)


class RunConfig(BaseModel):
    """Effective settings of one CLI invocation, echoed into its output."""

    params_path: str | None = None
    tol: float = 1e-9
    seed: int = 0
    outputs: dict[str, str] = Field(default_factory=dict)
    support_budget: int = 2000
    classical_cell_budget: int = 60_000_000
    workers: int = 1
    verbosity: str = "WARNING"
    rng: str = "numpy.random.SeedSequence(seed).spawn(trials) -> PCG64 per trial"


class SuiteResult(BaseModel):
    name: str
    label: str
    cases: int
    failures: int = 0
    failing_case: dict[str, Any] | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return self.failures == 0


class SelftestReport(BaseModel):
    suites: list[SuiteResult] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)
