"""Parameter bundle shared by every norm and construction."""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

IDENTITY_RTOL = 1e-12


def _close(a: float, b: float, rtol: float = IDENTITY_RTOL) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)


class ParamsInput(BaseModel):
    """The user-facing params file: ``{"p": 2.0, "r": 4}``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    p: float
    r: int


class Params(BaseModel):
    """Exponents, branching factor and the derived grid bases.

    ``t = r^{1/q}`` scales the norming functionals, ``s = r^{1/p}`` is its
    primal counterpart and ``alpha`` is the finer grid base with
    ``alpha^M = s``.
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=1.0)
    q: float = Field(gt=1.0)
    r: int = Field(ge=2)
    t: float = Field(gt=1.0)
    s: float = Field(gt=1.0)
    M: int = Field(ge=1)
    alpha: float = Field(gt=1.0)

    @model_validator(mode="after")
    def _check_identities(self) -> "Params":
        if not math.isfinite(self.p):
            raise ValueError("p must be finite")
        if not _close(1.0 / self.p + 1.0 / self.q, 1.0):
            raise ValueError("1/p + 1/q must equal 1")
        if not _close(self.t**self.q, float(self.r)):
            raise ValueError("t^q must equal r")
        if not _close(self.s**self.p, float(self.r)):
            raise ValueError("s^p must equal r")
        if not _close(self.t * self.s, float(self.r)):
            raise ValueError("t*s must equal r")
        if not _close(self.alpha**self.M, self.s):
            raise ValueError("alpha^M must equal s")
        # 2 <= alpha^p <= 4, i.e. 2^M <= r <= 4^M
        lo, hi = 2.0 ** (1.0 / self.p), 4.0 ** (1.0 / self.p)
        if not (lo * (1 - IDENTITY_RTOL) <= self.alpha <= hi * (1 + IDENTITY_RTOL)):
            raise ValueError("alpha must lie in [2^(1/p), 4^(1/p)]")
        return self

    @property
    def inv_t(self) -> float:
        return 1.0 / self.t

    def echo(self) -> dict[str, float | int]:
        """Plain dict embedded in output files."""
        return self.model_dump()
