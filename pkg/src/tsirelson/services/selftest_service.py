"""Reduced-size invariant suites run by ``tsirelson selftest``."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from tsirelson.errors import TsirelsonError, ValidationError
from tsirelson.models import (
    BlockSequence,
    CertificateMode,
    GridBase,
    GridVector,
    Params,
    SelftestReport,
    SparseVector,
    SuiteResult,
)
from tsirelson.protocols import (
    CertificateServiceProtocol,
    ClassicalNormProtocol,
    ModifiedNormProtocol,
    SelftestServiceProtocol,
)
from tsirelson.services.artifact_io import vector_to_json
from tsirelson.services.certificate_service import CertificateService, kraft_sum
from tsirelson.services.classical_norm_service import ClassicalNormService
from tsirelson.services.modified_norm_service import ModifiedNormService
from tsirelson.services.samplers import (
    random_exponent_seq,
    random_member,
    random_non_member,
    random_s_grid,
    random_vector,
)
from tsirelson.services.stabilization_service import StabilizationService, generate_basis
from tsirelson.services.vector_ops import (
    base_value,
    derive_params,
    dual_pair,
    exponent_limit,
    grid_from_sparse,
    grid_to_sparse,
    j_m_split,
    lp_norm,
    quantize_to_grid,
    restrict,
    spread,
    spread_grid,
)

logger = logging.getLogger(__name__)

PARAM_GRID = [(2.0, 2), (2.0, 4), (1.5, 3), (3.0, 2)]


@dataclass
class _Tally:
    name: str
    label: str
    cases: int = 0
    failures: int = 0
    failing_case: dict[str, Any] | None = field(default=None)

    def check(self, ok: bool, case: Callable[[], dict[str, Any]]) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.failing_case is None:
                self.failing_case = case()

    def result(self) -> SuiteResult:
        return SuiteResult(
            name=self.name,
            label=self.label,
            cases=self.cases,
            failures=self.failures,
            failing_case=self.failing_case,
        )


class SelftestService(SelftestServiceProtocol):
    """Runs every invariant suite on seeded random inputs."""

    SUITES: dict[str, tuple[str, int]] = {
        "core": ("parameter identities, level split, grid rounding", 100),
        "classical-oracle": ("successive norm vs norming-set oracle", 25),
        "modified-oracle": ("disjoint norm vs partition oracle", 25),
        "sandwich": ("sup <= classical <= modified <= l_p, modified <= 3 classical", 100),
        "kraft-certificates": ("disjoint-set certificate round-trip", 100),
        "phi-certificates": ("weight functional and successive certificates", 100),
        "comparison": ("s-grid comparison inequalities", 100),
        "approximation": ("level-matched averaging bounds", 1),
        "stabilization": ("two-sided estimate and envelopes", 20),
        "kraft-enumeration": ("disjoint set equals bounded enumeration on small supports", 4),
        "closure": ("spreading and restriction closure of both norming sets", 20),
        "invariance": ("permutation, sign and spreading invariance of the norms", 100),
        "restriction": ("norms never grow under restriction", 100),
        "grid-roundtrip": ("grid to float to grid up to exponent 512", 50),
    }

    def __init__(
        self,
        classical: ClassicalNormProtocol,
        modified: ModifiedNormProtocol,
        certificates: CertificateServiceProtocol,
        stabilization: StabilizationService,
        tol: float = 1e-9,
    ) -> None:
        self._classical = classical
        self._modified = modified
        self._certificates = certificates
        self._stabilization = stabilization
        self._tol = tol

    def run(self, suites: list[str] | None = None, n: int | None = None, seed: int = 0) -> SelftestReport:
        names = suites or list(self.SUITES)
        unknown = [name for name in names if name not in self.SUITES]
        if unknown:
            raise ValidationError(f"unknown suite(s): {', '.join(unknown)}", known=list(self.SUITES))

        streams = dict(zip(self.SUITES, np.random.SeedSequence(seed).spawn(len(self.SUITES))))
        report = SelftestReport()
        for name in names:
            label, default_n = self.SUITES[name]
            tally = _Tally(name=name, label=label)
            rng = np.random.default_rng(streams[name])
            runner = getattr(self, "_suite_" + name.replace("-", "_"))
            try:
                runner(tally, rng, n if n is not None else default_n)
            except TsirelsonError as e:
                tally.check(False, lambda e=e: {"error": e.code, "message": e.detail})
            logger.info(f"Suite {name}: {tally.cases} cases, {tally.failures} failures")
            report.suites.append(tally.result())
        return report

    @staticmethod
    def _params() -> list[Params]:
        return [derive_params(p, r) for p, r in PARAM_GRID]

    def _suite_core(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for p in (1.25, 1.5, 2.0, 3.0, 4.0):
            for r in range(2, 65):
                try:
                    params = derive_params(p, r)
                    ok = 2 ** (1 / p) <= params.alpha * (1 + 1e-12) and params.alpha <= 4 ** (1 / p) * (1 + 1e-12)
                except ValidationError:
                    ok = False
                tally.check(ok, lambda p=p, r=r: {"p": p, "r": r})

        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            size = int(rng.integers(1, 20))
            indices = rng.choice(np.arange(1, 60), size=size, replace=False)
            x = GridVector(
                base=GridBase.ALPHA,
                base_value=params.alpha,
                entries={int(i): (int(rng.choice([-1, 1])), int(rng.integers(-8, 9))) for i in indices},
            )
            parts = j_m_split(x, params)
            supports = [set(part.support) for part in parts]
            union = set().union(*supports)
            total = math.fsum(part.power_sum(params.p) for part in parts)
            whole = x.power_sum(params.p)
            ok = (
                union == set(x.support)
                and sum(len(s) for s in supports) == len(x)
                and abs(total - whole) <= 1e-12 * whole
            )
            tally.check(ok, lambda x=x, params=params: {"params": params.echo(), "vector": vector_to_json(x)})

            sample = random_vector(rng, 10, params)
            grid = quantize_to_grid(sample, params.alpha)
            half = params.alpha**0.5 * (1 + 1e-12)
            ok = all(
                1 / half <= params.alpha ** grid.entries[i][1] / abs(v) <= half for i, v in sample.items()
            )
            tally.check(ok, lambda s=sample: {"vector": vector_to_json(s)})

    def _suite_classical_oracle(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for params in self._params():
            for _ in range(n):
                x = random_vector(rng, 6, params)
                result = self._classical.classical_norm(x, params)
                oracle = self._classical.classical_norm_oracle(x, params).value
                witness_ok = True
                if result.witness is not None:
                    replay = result.witness.evaluate(dict(zip(x.support, x.abs_values())), params.inv_t)
                    witness_ok = abs(replay - result.value) <= 1e-12 * result.value
                tally.check(
                    abs(result.value - oracle) <= 1e-6 * (1 + oracle) and witness_ok,
                    lambda x=x, params=params, v=result.value, o=oracle: {
                        "params": params.echo(),
                        "vector": vector_to_json(x),
                        "dp": v,
                        "oracle": o,
                    },
                )

    def _suite_modified_oracle(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for params in self._params():
            for _ in range(n):
                x = random_vector(rng, 5, params)
                result = self._modified.modified_norm(x, params, self._tol)
                oracle = self._modified.modified_norm_oracle(x, params).value
                functional = SparseVector(
                    entries={
                        i: math.copysign(params.t**-j, x.entries[i])
                        for i, j in result.witness.levels.items()
                    }
                )
                pairing = dual_pair(x, functional)
                ok = (
                    abs(result.value - oracle) <= 1e-6 * (1 + oracle)
                    and result.witness.is_kraft_feasible(params.r)
                    and abs(pairing - result.value) <= 1e-12 * result.value
                )
                tally.check(
                    ok,
                    lambda x=x, params=params, v=result.value, o=oracle: {
                        "params": params.echo(),
                        "vector": vector_to_json(x),
                        "optimizer": v,
                        "oracle": o,
                    },
                )

    def _suite_sandwich(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        slack = 1e-9
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            x = random_vector(rng, 40, params)
            classical = self._classical.classical_norm(x, params, with_witness=False).value
            modified = self._modified.modified_norm(x, params, self._tol).value
            lp = lp_norm(x, params.p)
            sup = lp_norm(x, math.inf)
            ok = (
                sup <= classical + slack
                and classical <= modified + slack
                and modified <= lp + slack
                and modified <= 3 * classical + slack
            )
            tally.check(
                ok,
                lambda x=x, params=params, c=classical, m=modified: {
                    "params": params.echo(),
                    "vector": vector_to_json(x),
                    "classical": c,
                    "modified": m,
                },
            )

    def _suite_kraft_certificates(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            y = random_member(rng, params)
            certificate = self._certificates.build_kM_certificate(y, params)
            replay = self._certificates.verify_certificate(certificate, params)
            ok = certificate.mode == CertificateMode.DISJOINT and replay.entries == y.entries
            tally.check(ok, lambda y=y, params=params: {"params": params.echo(), "vector": vector_to_json(y)})

            bad = random_non_member(rng, params)
            rejected = not self._certificates.kM_membership(bad, params)
            try:
                self._certificates.build_kM_certificate(bad, params)
            except ValidationError:
                pass
            else:
                rejected = False
            tally.check(rejected, lambda y=bad, params=params: {"params": params.echo(), "vector": vector_to_json(y)})

    def _suite_phi_certificates(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            m = random_exponent_seq(rng, params.r)
            certificate = self._certificates.build_K_certificate(m, params)
            replay = self._certificates.verify_certificate(certificate, params)
            target = self._certificates.v_map(m, params)
            tally.check(replay.entries == target.entries, lambda m=m, params=params: {"params": params.echo(), "m": m.m})

            bound = 2 * kraft_sum(target, params.r)
            tally.check(
                self._certificates.phi_exact(m, params) <= bound,
                lambda m=m, params=params: {"params": params.echo(), "m": m.m},
            )

            if len(m) >= 3:
                i = int(rng.integers(1, len(m) - 1))
                whole = self._certificates.phi_exact(m, params)
                parts = self._certificates.phi_exact(m.window(0, i + 1), params) + self._certificates.phi_exact(
                    m.window(i, len(m)), params
                )
                tally.check(whole == parts, lambda m=m, i=i: {"m": m.m, "split": i})

            y = random_member(rng, params, max_support=12, max_level=5)
            split = self._certificates.three_split(y, params)
            pieces_ok = True
            combined: dict[int, tuple[int, int]] = {}
            for piece, piece_certificate in zip(split.pieces, split.certificates):
                combined.update(piece.entries)
                if piece_certificate is None:
                    pieces_ok = pieces_ok and not piece.entries
                    continue
                replayed = self._certificates.verify_certificate(piece_certificate, params)
                pieces_ok = pieces_ok and replayed.entries == piece.entries
                pieces_ok = pieces_ok and piece_certificate.mode == CertificateMode.SUCCESSIVE
            tally.check(
                pieces_ok and combined == y.entries,
                lambda y=y, params=params: {"params": params.echo(), "vector": vector_to_json(y)},
            )

    def _suite_comparison(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            x = random_s_grid(rng, params, unit_ball=True)
            first = self._stabilization.check_comparing1(x, params)
            tally.check(first.holds, lambda x=x, params=params: {"params": params.echo(), "vector": vector_to_json(x)})

            x = random_s_grid(rng, params, unit_ball=False)
            second = self._stabilization.check_comparing2(x, params)
            tally.check(second.holds, lambda x=x, params=params: {"params": params.echo(), "vector": vector_to_json(x)})

    def _suite_approximation(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        # at eps = 0.01 each output already consumes up to 768 blocks
        count = max(1, min(n, 4))
        for eps in (0.1, 0.01):
            for r in (2, 4):
                for p in (1.5, 2.0, 3.0):
                    params = derive_params(p, r)
                    needed = self._stabilization.required_count(eps, params, count=count)
                    sequence = self._stabilization.prepare_blocks(generate_basis("unit", needed), params)
                    result = self._stabilization.approxim_construct(sequence, eps, params, count=count)
                    low = params.alpha**-3 - self._tol
                    ok = all(
                        low <= mass ** (1 / params.p) <= 1 + self._tol
                        for row in result.output_masses
                        for mass in row
                    )
                    tally.check(ok, lambda p=p, r=r, eps=eps: {"p": p, "r": r, "eps": eps})

    def _suite_stabilization(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        params = derive_params(2.0, 4)
        eps = 0.1
        needed = self._stabilization.required_count(eps, params, count=2)
        sequence = self._stabilization.prepare_blocks(generate_basis("unit", needed), params)
        result = self._stabilization.approxim_construct(sequence, eps, params, count=2)
        averaged = BlockSequence(vectors=result.outputs)
        draws = self._stabilization.draw_coefficients(int(rng.integers(2**31)), n, len(averaged), params.p)
        rhos = []
        for trial, draw in enumerate(draws):
            record = self._stabilization.stab_verify(averaged, draw, params, trial)
            rhos.append(record.rho)
            tally.check(record.passed, lambda d=draw: {"params": params.echo(), "coefficients": d})
        lambda_hat = max(rhos) / min(rhos)
        bound = 3 * 4**13 * (params.p + params.q)
        tally.check(lambda_hat <= bound, lambda: {"lambda_hat": lambda_hat, "bound": bound})

    def _suite_kraft_enumeration(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        support = list(range(1, max(1, min(n, 4)) + 1))
        depth = 3
        for r in sorted({r for _, r in PARAM_GRID if r <= 3}):
            params = derive_params(2.0, r)
            enumeration = self._certificates.enumerate_K(support, depth, CertificateMode.DISJOINT, params)
            tally.check(not enumeration.truncated, lambda r=r: {"r": r, "truncated": True})
            enumerated = {tuple(y.entries.items()) for y in enumeration.vectors}

            members = 0
            for size in range(1, len(support) + 1):
                for subset in itertools.combinations(support, size):
                    for levels in itertools.product(range(depth + 1), repeat=size):
                        for signs in itertools.product((1, -1), repeat=size):
                            y = GridVector(
                                base=GridBase.T,
                                base_value=params.t,
                                entries={i: (sign, -level) for i, sign, level in zip(subset, signs, levels)},
                            )
                            member = self._certificates.kM_membership(y, params)
                            members += member
                            tally.check(
                                member == (tuple(y.entries.items()) in enumerated),
                                lambda y=y, params=params, member=member: {
                                    "params": params.echo(),
                                    "vector": vector_to_json(y),
                                    "member": member,
                                },
                            )
            tally.check(
                members == len(enumerated),
                lambda r=r, m=members, e=len(enumerated): {"r": r, "members": m, "enumerated": e},
            )

    def _suite_closure(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        params = derive_params(2.0, 2)
        base_support = [1, 2, 3]
        depth = 2
        for mode in CertificateMode:
            members = self._certificates.enumerate_K(base_support, depth, mode, params).vectors
            reference = {tuple(y.entries.items()) for y in members}

            for y in members:
                keep = [i for i in y.support if rng.random() < 0.5] or y.support[:1]
                restricted = y.with_entries({i: y.entries[i] for i in keep})
                tally.check(
                    tuple(restricted.entries.items()) in reference,
                    lambda y=y, keep=keep, mode=mode: {"mode": mode.value, "vector": vector_to_json(y), "keep": keep},
                )

            for _ in range(n):
                targets = sorted(int(i) for i in rng.choice(np.arange(1, 40), size=len(base_support), replace=False))
                mapping = dict(zip(base_support, targets))
                image = self._certificates.enumerate_K(targets, depth, mode, params).vectors
                spread_members = {
                    tuple(spread_grid(y, [mapping[i] for i in y.support]).entries.items()) for y in members
                }
                tally.check(
                    spread_members == {tuple(y.entries.items()) for y in image},
                    lambda targets=targets, mode=mode: {"mode": mode.value, "targets": targets},
                )

    def _suite_invariance(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            x = random_vector(rng, 30, params)
            values = list(x.entries.values())
            order = rng.permutation(len(values))
            signs = rng.choice([-1.0, 1.0], size=len(values))
            shuffled = SparseVector.from_values([float(signs[k]) * values[int(order[k])] for k in range(len(values))])
            modified = self._modified.modified_norm(x, params, self._tol).value
            permuted = self._modified.modified_norm(shuffled, params, self._tol).value
            tally.check(
                abs(modified - permuted) <= 1e-12 * (1 + modified),
                lambda x=x, y=shuffled, params=params: {
                    "params": params.echo(),
                    "vector": vector_to_json(x),
                    "permuted": vector_to_json(y),
                },
            )

            targets = sorted(int(i) for i in rng.choice(np.arange(1, 200), size=len(x), replace=False))
            moved = spread(SparseVector(entries={i: abs(v) for i, v in x.items()}), targets)
            classical = self._classical.classical_norm(x, params, with_witness=False).value
            spread_value = self._classical.classical_norm(moved, params, with_witness=False).value
            tally.check(
                abs(classical - spread_value) <= 1e-12 * (1 + classical),
                lambda x=x, targets=targets, params=params: {
                    "params": params.echo(),
                    "vector": vector_to_json(x),
                    "targets": targets,
                },
            )

    def _suite_restriction(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        slack = 1e-12
        for _ in range(n):
            params = self._params()[int(rng.integers(len(PARAM_GRID)))]
            x = random_vector(rng, 30, params)
            subset = [i for i in x.support if rng.random() < 0.5]
            y = restrict(x, subset)
            ok = (
                self._classical.classical_norm(y, params, with_witness=False).value
                <= self._classical.classical_norm(x, params, with_witness=False).value + slack
                and self._modified.modified_norm(y, params, self._tol).value
                <= self._modified.modified_norm(x, params, self._tol).value + slack
            )
            tally.check(
                ok,
                lambda x=x, subset=subset, params=params: {
                    "params": params.echo(),
                    "vector": vector_to_json(x),
                    "subset": subset,
                },
            )

    def _suite_grid_roundtrip(self, tally: _Tally, rng: np.random.Generator, n: int) -> None:
        for params in self._params():
            for base in GridBase:
                value = base_value(params, base)
                limit = min(512, exponent_limit(value))
                for _ in range(n):
                    size = int(rng.integers(1, 12))
                    exponents = [int(e) for e in rng.integers(-limit, limit + 1, size=size)]
                    exponents[0] = limit if rng.random() < 0.5 else -limit
                    x = GridVector(
                        base=base,
                        base_value=value,
                        entries={
                            k + 1: (1 if rng.random() < 0.5 else -1, e) for k, e in enumerate(exponents)
                        },
                    )
                    back = grid_from_sparse(grid_to_sparse(x), params, base)
                    tally.check(
                        back.entries == x.entries,
                        lambda x=x, params=params: {"params": params.echo(), "vector": vector_to_json(x)},
                    )


# Type check
_: SelftestServiceProtocol = SelftestService(
    ClassicalNormService(), ModifiedNormService(), CertificateService(), StabilizationService()
)
