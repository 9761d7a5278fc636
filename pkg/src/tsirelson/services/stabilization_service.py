"""Comparison checks, the averaging construction and the stabilization experiment."""

import asyncio
import logging
import math
from collections import OrderedDict
from concurrent.futures import Executor, ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from tsirelson.errors import (
    BudgetExceededError,
    ConstructionError,
    InsufficientInputError,
    ValidationError,
)
from tsirelson.models import (
    ApproximResult,
    BlockSequence,
    ComparisonResult,
    Envelope,
    GridBase,
    GridVector,
    LevelProfile,
    Params,
    SparseVector,
    StabReport,
    TrialRecord,
)
from tsirelson.protocols import (
    CertificateServiceProtocol,
    ClassicalNormProtocol,
    ModifiedNormProtocol,
    StabilizationServiceProtocol,
)
from tsirelson.services.certificate_service import CertificateService
from tsirelson.services.classical_norm_service import ClassicalNormService
from tsirelson.services.modified_norm_service import ModifiedNormService
from tsirelson.services.vector_ops import grid_sum, j_m_split, lp_norm, quantize_to_grid

logger = logging.getLogger(__name__)


def level_masses(x: GridVector, params: Params) -> list[float]:
    """``||J_m x||_p^p`` for ``m = 0..M-1``."""
    return [part.power_sum(params.p) for part in j_m_split(x, params)]


def block_lengths(l: int, params: Params) -> list[int]:
    """``[alpha^{(Ml+k)p}] = [r^l * r^{k/M}]`` for ``k = 0..M-1``."""
    lengths = []
    for k in range(params.M):
        value = params.r**l * params.r ** (k / params.M)
        nearest = round(value)
        # r^{k/M} is an integer power of r only at k = 0
        lengths.append(nearest if abs(value - nearest) <= 1e-9 * value else math.floor(value))
    return lengths


def averaging_depth(eps: float, r: int) -> int:
    """Smallest ``l`` with ``r^l >= 1/eps``."""
    l = 0
    while r**l * eps < 1.0:
        l += 1
    return l


class StabilizationService(StabilizationServiceProtocol):
    """Desk-scale two-sided estimates of the modified norm on block subspaces."""

    def __init__(
        self,
        classical: ClassicalNormProtocol | None = None,
        modified: ModifiedNormProtocol | None = None,
        certificates: CertificateServiceProtocol | None = None,
        tol: float = 1e-9,
        support_budget: int = 2000,
        workers: int = 1,
    ) -> None:
        self._classical = classical or ClassicalNormService()
        self._modified = modified or ModifiedNormService(tol=tol)
        self._certificates = certificates or CertificateService()
        self._tol = tol
        self._support_budget = support_budget
        self._workers = workers

    # Comparison bounds

    def check_comparing1(self, x: GridVector, params: Params) -> ComparisonResult:
        """``||x||_p^p <= |x|_{p,r}`` on the s-grid unit ball, witnessed by
        ``y(i) = sign(x(i)) |x(i)|^{p/q}``."""
        if x.base != GridBase.S:
            raise ValidationError("comparison needs an s-grid vector", base=x.base.value)
        mass = sum((Fraction(params.r) ** e for _, e in x.entries.values()), Fraction(0))
        if mass > 1:
            raise ValidationError("vector is outside the s-grid unit ball", mass=float(mass))

        witness = GridVector(base=GridBase.T, base_value=params.t, entries=dict(x.entries))
        if not self._certificates.kM_membership(witness, params):
            raise ConstructionError("comparison witness left the disjoint norming set")
        # s^e * t^e = r^e, so the pairing is the exact p-mass
        pairing = float(mass)
        value = self._modified.modified_norm(x.to_sparse(), params, self._tol).value
        holds = value >= pairing - self._tol * (1.0 + pairing)
        return ComparisonResult(
            holds=holds, pairing=pairing, norm_value=value, bound=pairing, witness=witness
        )

    def check_comparing2(self, x: GridVector, params: Params) -> ComparisonResult:
        """``|x|_{p,r} <= 1 + ||x||_p^p / t`` for any s-grid vector."""
        if x.base != GridBase.S:
            raise ValidationError("comparison needs an s-grid vector", base=x.base.value)
        sparse = x.to_sparse()
        result = self._modified.modified_norm(sparse, params, self._tol)
        p_mass = x.power_sum(params.p)
        bound = 1.0 + p_mass / params.t

        # split of the pairing for the optimal functional
        heavy, light = [], []
        for index, level in result.witness.levels.items():
            x_power = abs(sparse.entries[index]) ** params.p
            y_power = float(Fraction(params.r) ** (-level))
            if x_power <= y_power:
                heavy.append(y_power)
            else:
                light.append(x_power / params.t)
        holds = result.value <= bound + self._tol
        return ComparisonResult(
            holds=holds,
            pairing=result.value,
            norm_value=result.value,
            bound=bound,
            heavy_part=math.fsum(heavy),
            light_part=math.fsum(light),
        )

    # Averaging construction

    def required_count(self, eps: float, params: Params, count: int = 1) -> int:
        return count * sum(block_lengths(averaging_depth(eps, params.r), params))

    def approxim_construct(
        self, seq: BlockSequence, eps: float, params: Params, count: int = 1
    ) -> ApproximResult:
        """Average level-matched blocks into ``count`` vectors whose J_m parts
        all have p-norm in ``[alpha^{-3}, 1]``."""
        if not eps > 0.0:
            raise ValidationError("eps must be positive", eps=eps)
        if count < 1:
            raise ValidationError("count must be at least 1", count=count)

        alpha, tol = params.alpha, self._tol
        for n, vector in enumerate(seq.vectors):
            norm = vector.power_sum(params.p) ** (1.0 / params.p)
            if not alpha**-2 * (1 - tol) <= norm <= alpha**-1 * (1 + tol):
                raise ValidationError(
                    f"block {n} has p-norm {norm} outside [alpha^-2, alpha^-1]", n=n, norm=norm
                )

        l = averaging_depth(eps, params.r)
        lengths = block_lengths(l, params)
        required = count * sum(lengths)
        if len(seq) < required:
            raise InsufficientInputError(
                f"need {required} input blocks, got {len(seq)}", required=required, available=len(seq)
            )

        masses = [level_masses(vector, params) for vector in seq.vectors]
        admitted = self._largest_bin(masses, eps)
        if len(admitted) < required:
            raise InsufficientInputError(
                f"largest profile bin holds {len(admitted)} blocks, need {required}",
                required=required,
                available=len(admitted),
            )
        targets = [max(masses[n][m] for n in admitted) for m in range(params.M)]
        profile = LevelProfile(masses=masses, targets=targets, eps=eps, admitted=admitted)
        logger.info(f"Averaging with l={l}, block lengths {lengths}, {len(admitted)} admitted blocks")

        coefficients = [
            [
                lengths[k] / alpha ** ((params.M * l + k) * params.p) * targets[(m + k) % params.M]
                for m in range(params.M)
            ]
            for k in range(params.M)
        ]

        outputs, components, output_masses, component_masses = [], [], [], []
        cursor = 0
        for n in range(count):
            parts = []
            for k in range(params.M):
                chosen = [seq.vectors[i] for i in admitted[cursor : cursor + lengths[k]]]
                cursor += lengths[k]
                parts.append(grid_sum(chosen).shifted(-(params.M * l + k)))
            assembled = grid_sum(parts)
            part_masses = [level_masses(part, params) for part in parts]
            self._check_averages(n, part_masses, coefficients, eps, params)
            assembled_masses = level_masses(assembled, params)
            self._check_assembled(n, assembled_masses, eps, params)
            outputs.append(assembled)
            components.append(parts)
            output_masses.append(assembled_masses)
            component_masses.append(part_masses)

        return ApproximResult(
            outputs=outputs,
            components=components,
            profile=profile,
            l=l,
            block_lengths=lengths,
            required=required,
            coefficients=coefficients,
            output_masses=output_masses,
            component_masses=component_masses,
        )

    @staticmethod
    def _largest_bin(masses: list[list[float]], eps: float) -> list[int]:
        bins: OrderedDict[tuple[int, ...], list[int]] = OrderedDict()
        for n, row in enumerate(masses):
            bins.setdefault(tuple(math.floor(mass / eps) for mass in row), []).append(n)
        # max keeps the first of equally large bins
        return max(bins.values(), key=len)

    def _check_averages(
        self,
        n: int,
        part_masses: list[list[float]],
        coefficients: list[list[float]],
        eps: float,
        params: Params,
    ) -> None:
        tol = self._tol
        for k, row in enumerate(part_masses):
            for m, mass in enumerate(row):
                gap = coefficients[k][m] - mass
                if not -tol <= gap < eps + tol:
                    raise ConstructionError(
                        f"average {k} misses its target on level {m} by {gap}", n=n, k=k, m=m
                    )
        lower = (1 - eps) * params.alpha ** (-2 * params.p)
        upper = params.alpha ** (-params.p) + params.M * eps
        for m in range(params.M):
            total = math.fsum(coefficients[k][m] for k in range(params.M))
            if not lower - tol <= total < upper + tol:
                raise ConstructionError(f"target sum on level {m} is {total}", n=n, m=m)

    def _check_assembled(self, n: int, masses: list[float], eps: float, params: Params) -> None:
        alpha, p, tol = params.alpha, params.p, self._tol
        lower = (1 - eps) * alpha ** (-2 * p) - params.M * eps
        upper = alpha ** (-p) + params.M * eps
        for m, mass in enumerate(masses):
            if not lower - tol < mass < upper + tol:
                raise ConstructionError(
                    f"level {m} mass {mass} left the averaging window", n=n, m=m
                )
            norm = mass ** (1.0 / p)
            if not alpha**-3 - tol <= norm <= 1.0 + tol:
                raise ConstructionError(
                    f"||J_{m} y_{n}||_p = {norm} is outside [alpha^-3, 1]; eps too large",
                    n=n,
                    m=m,
                    eps=eps,
                )

    # Two-sided estimate

    def envelopes(self, params: Params) -> dict[str, Envelope]:
        alpha, p, q = params.alpha, params.p, params.q
        return {
            "comparison": Envelope(low=alpha ** (-4 * p), high=6 * (p + q) * alpha**4),
            "intermediate": Envelope(low=alpha ** (-4 * p - 2), high=6 * (p + q) * alpha**6),
            "final": Envelope(low=4.0**-6, high=3 * 4.0**7 * (p + q)),
            "grid_mass": Envelope(low=alpha**-4, high=1.0),
        }

    def stab_verify(
        self, seq: BlockSequence, coeffs: Sequence[float], params: Params, trial: int = 0
    ) -> TrialRecord:
        """Evaluate both norms of ``sum a_n x_n`` and record the ratios."""
        alpha, tol = params.alpha, self._tol
        if len(coeffs) != len(seq):
            raise ValidationError("one coefficient per block is required")
        for n, vector in enumerate(seq.vectors):
            for m, mass in enumerate(level_masses(vector, params)):
                norm = mass ** (1.0 / params.p)
                if not alpha**-3 - tol <= norm <= 1.0 + tol:
                    raise ValidationError(
                        f"||J_{m} x_{n}||_p = {norm} violates [alpha^-3, 1]", n=n, m=m
                    )

        if any(a == 0 for a in coeffs):
            raise ValidationError("coefficients must be nonzero")
        scale = math.fsum(abs(a) ** params.p for a in coeffs) ** (1.0 / params.p)
        weights = [abs(a) / scale for a in coeffs]

        # grid approximant sum alpha^{-k_n} x_n with alpha^{-k} <= a < alpha^{1-k}
        shifts = []
        for a in weights:
            k = math.ceil(-math.log(a, alpha))
            while alpha**-k > a:
                k += 1
            while alpha ** (1 - k) <= a:
                k -= 1
            shifts.append(k)
        approximant = grid_sum([x.shifted(-k) for x, k in zip(seq.vectors, shifts)])
        grid_norms = [mass ** (1.0 / params.p) for mass in level_masses(approximant, params)]

        combination = SparseVector(
            entries={
                i: a * x.coefficient(i) for a, x in zip(weights, seq.vectors) for i in x.entries
            }
        )
        if len(combination) > self._support_budget:
            raise BudgetExceededError(
                f"combination support {len(combination)} exceeds budget {self._support_budget}",
                budget=self._support_budget,
            )
        lp = lp_norm(combination, params.p)
        try:
            classical: float | None = self._classical.classical_norm(
                combination, params, with_witness=False
            ).value
        except BudgetExceededError as e:
            logger.warning(f"Skipping classical norm in trial {trial}: {e.detail}")
            classical = None
        modified = self._modified.modified_norm(combination, params, tol).value

        bounds = self.envelopes(params)
        return TrialRecord(
            trial=trial,
            coefficients=weights,
            lp_norm=lp,
            classical=classical,
            modified=modified,
            level_factor=params.M ** (1.0 / params.p),
            log_factor=math.log2(params.r) ** (1.0 / params.p),
            comparison_envelope=bounds["comparison"],
            intermediate_envelope=bounds["intermediate"],
            final_envelope=bounds["final"],
            grid_mass_min=min(grid_norms),
            grid_mass_max=max(grid_norms),
            grid_mass_envelope=bounds["grid_mass"],
            tol=tol,
        )

    # Pipeline

    def prepare_blocks(self, basis: Sequence[SparseVector], params: Params) -> BlockSequence:
        """Scale each block to p-norm ``alpha^{-3/2}`` and round onto the alpha grid."""
        target = params.alpha**-1.5
        quantized = []
        for n, u in enumerate(basis):
            norm = lp_norm(u, params.p)
            if norm == 0.0:
                raise ValidationError(f"basis block {n} is zero", n=n)
            scaled = SparseVector(entries={i: v * target / norm for i, v in u.items()})
            quantized.append(quantize_to_grid(scaled, params.alpha, GridBase.ALPHA))
        try:
            return BlockSequence(vectors=quantized)
        except ValueError as e:
            raise ValidationError(f"basis is not a block sequence: {e}") from e

    def draw_coefficients(self, seed: int, trials: int, size: int, p: float) -> list[list[float]]:
        """``a_n = (g_n / sum g)^{1/p}`` with one independent stream per trial."""
        streams = np.random.SeedSequence(seed).spawn(trials)
        draws = []
        for stream in streams:
            g = 1.0 - np.random.default_rng(stream).random(size)
            draws.append([float(v) for v in (g / g.sum()) ** (1.0 / p)])
        return draws

    async def run_pipeline(
        self,
        basis: Sequence[SparseVector],
        params: Params,
        trials: int,
        seed: int,
        eps: float,
        blocks: int = 2,
        config: dict[str, Any] | None = None,
    ) -> StabReport:
        """Quantize, average, then evaluate ``trials`` random combinations."""
        if trials < 1:
            raise ValidationError("trials must be at least 1", trials=trials)

        sequence = self.prepare_blocks(basis, params)
        construction = self.approxim_construct(sequence, eps, params, count=blocks)
        averaged = BlockSequence(vectors=construction.outputs)
        support = sum(len(y) for y in averaged.vectors)
        if support > self._support_budget:
            raise BudgetExceededError(
                f"averaged support {support} exceeds budget {self._support_budget}",
                support=support,
                budget=self._support_budget,
            )
        logger.info(f"Running {trials} trials over {len(averaged)} blocks, support {support}")

        draws = self.draw_coefficients(seed, trials, len(averaged), params.p)
        loop = asyncio.get_running_loop()
        executor: Executor | None = (
            ProcessPoolExecutor(max_workers=self._workers) if self._workers > 1 else None
        )
        try:
            records = await asyncio.gather(
                *(
                    loop.run_in_executor(executor, self.stab_verify, averaged, draw, params, trial)
                    for trial, draw in enumerate(draws)
                )
            )
        finally:
            if executor is not None:
                executor.shutdown()

        p, q = params.p, params.q
        return StabReport(
            params=params.echo(),
            config=config or {},
            construction={
                "eps": eps,
                "l": construction.l,
                "block_lengths": construction.block_lengths,
                "required": construction.required,
                "admitted": len(construction.profile.admitted),
                "targets": construction.profile.targets,
                "output_masses": construction.output_masses,
                "blocks": len(averaged),
                "support": support,
                "quantization": "alpha^{-1/2}|u(i)| <= |x(i)| <= alpha^{1/2}|u(i)|",
            },
            trials=list(records),
            lambda_bound=3 * 4.0**13 * (p + q),
        )


def generate_basis(kind: str, count: int, seed: int = 0, width: int = 3) -> list[SparseVector]:
    """Block bases for experiments.

    ``unit`` gives ``e_1, e_2, ...``; ``random`` repeats one seeded magnitude
    pattern of ``width`` coordinates with fresh random signs per copy.
    """
    if count < 1:
        raise ValidationError("basis needs at least one block", count=count)
    if kind == "unit":
        return [SparseVector(entries={n: 1.0}) for n in range(1, count + 1)]
    if kind == "random":
        rng = np.random.default_rng(seed)
        pattern = rng.uniform(0.5, 1.5, size=width)
        basis = []
        for n in range(count):
            signs = rng.choice([-1.0, 1.0], size=width)
            basis.append(
                SparseVector(
                    entries={n * width + k + 1: float(signs[k] * pattern[k]) for k in range(width)}
                )
            )
        return basis
    raise ValidationError(f"unknown basis generator '{kind}'", kind=kind)


# Type check
_: StabilizationServiceProtocol = StabilizationService()
