"""Optimal protocol construction and evaluation.

Given a bipartite covariance, the canonical choice keeps the modes
carrying the strongest cross correlations: D projects onto the top
singular subspace of the off-diagonal block Y, and V is the polar
factor of the compressed Y.  For states whose Alice (or Bob) diagonal
block vanishes this choice provably maximizes the product p*f, which is
the figure of merit used throughout (the hashing rate is a monotone
function of f at fixed p, but much harder to optimize directly).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import polar_decompose, random_orthogonal, svd, RANK_RTOL
from .states import (
    BipartiteSplit,
    CovarianceMatrix,
    RealProjectionPair,
    ValidationError,
    blocks,
    protocol_quantities,
)

__all__ = [
    "ProtocolChoice",
    "DistillationReport",
    "SuboptimalSample",
    "InsufficientRankError",
    "optimal_choice",
    "optimal_pf_bound",
    "hashing_rate",
    "run_protocol",
    "scan_m",
    "sample_suboptimal",
]


class InsufficientRankError(ValidationError):
    """The off-diagonal block has too few nonzero singular values for m."""


@dataclass(frozen=True)
class ProtocolChoice:
    """One protocol instance: target size m, projections and isometry."""

    m: int
    d: RealProjectionPair
    v: np.ndarray
    lambdas: np.ndarray
    warnings: tuple[str, ...] = ()


@dataclass
class DistillationReport:
    """Outcome of one protocol run."""

    m: int
    p: float
    f: float | None
    pf: float
    rate: float | None
    lambdas: list[float]
    distillable: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "p": self.p,
            "f": self.f,
            "pf": self.pf,
            "rate": self.rate,
            "lambdas": list(self.lambdas),
            "distillable": self.distillable,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def optimal_choice(
    s: CovarianceMatrix | np.ndarray,
    split: BipartiteSplit,
    m: int,
    *,
    rank_rtol: float = RANK_RTOL,
) -> ProtocolChoice:
    """Canonical (D, V) for target size m from the SVD of the Y block.

    D_B projects onto the top-2m right singular vectors of Y, D_A is its
    image under the polar isometry of Y, and V is the polar factor of
    the compressed block D_A Y D_B.  Requires the 2m-th singular value
    to be strictly positive; a degenerate value at the cut makes the
    subspace basis-dependent, which is reported as a warning.
    """
    if m < 2:
        raise ValidationError("protocol needs m >= 2")
    split.check_even()
    if 2 * m > len(split.a):
        raise InsufficientRankError(
            f"m = {m} needs rank 2m = {2 * m} but each side has only {len(split.a)} dimensions"
        )
    y = blocks(s, split).y
    u, sv, vh = svd(y)
    cut = 2 * m
    tol = rank_rtol * sv[0] if sv[0] > 0 else 0.0
    if sv[cut - 1] <= tol:
        raise InsufficientRankError(
            f"insufficient rank: singular value {cut} of Y is {sv[cut - 1]:.3e}"
        )
    warnings = []
    if cut < len(sv) and sv[cut - 1] - sv[cut] <= 1e-10 * sv[0]:
        warnings.append(
            f"degenerate singular value at the cut (lambda_{cut} == lambda_{cut + 1}); "
            "the kept subspace depends on the SVD basis choice"
        )
    ua = u[:, :cut]
    ub = vh[:cut].T
    d = RealProjectionPair(ua @ ua.T, ub @ ub.T)
    v, _ = polar_decompose(ua.T @ y @ ub)
    return ProtocolChoice(m=m, d=d, v=ua @ v @ ub.T, lambdas=sv[:cut].copy(), warnings=tuple(warnings))


def optimal_pf_bound(lambdas) -> float:
    """Largest attainable p*f given the top singular values of Y.

    prod (1 + l_k)/2 + prod (1 - l_k)/2 over the 2m values; attained by
    the canonical choice whenever one diagonal block vanishes.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.size == 0:
        raise ValidationError("need at least one singular value")
    if np.any(lam < -1e-12) or np.any(lam > 1 + 1e-12):
        raise ValidationError("singular values must lie in [0, 1]")
    lam = np.clip(lam, 0.0, 1.0)
    return float(np.prod((1 + lam) / 2) + np.prod((1 - lam) / 2))


def hashing_rate(p: float, f: float) -> float:
    """Distillation rate of the keep-and-hash strategy for qubit pairs.

    R = p * max(0, 1 - H(sigma)) where the isotropic-state entropy gives
    1 + f log2 f + (1 - f) log2((1 - f)/3).  Continuous at f in {0, 1}.
    """
    if not (0.0 <= p <= 1.0) or not (-1e-12 <= f <= 1 + 1e-12):
        raise ValidationError("p and f must lie in [0, 1]")
    f = min(max(f, 0.0), 1.0)

    def xlog2(x: float) -> float:
        return x * math.log2(x) if x > 0.0 else 0.0

    bracket = 1.0 + xlog2(f) + xlog2(1.0 - f) - (1.0 - f) * math.log2(3.0)
    return p * max(0.0, bracket)


def _evaluate(s, split, choice: ProtocolChoice) -> DistillationReport:
    q = protocol_quantities(s, split, choice.d, choice.v)
    warnings = list(choice.warnings)
    bound = optimal_pf_bound(choice.lambdas)
    blk = blocks(s, split)
    x_zero = np.abs(blk.x).max(initial=0.0) < 1e-10
    z_zero = np.abs(blk.z).max(initial=0.0) < 1e-10
    if x_zero or z_zero:
        # with a vanishing diagonal block the product formula is provably
        # optimal and attained, so any deviation is a bug
        if q.pf > bound + 1e-9:
            raise ValidationError(
                f"pf = {q.pf:.12e} exceeds the optimal-protocol bound {bound:.12e}"
            )
        if abs(q.pf - bound) > 1e-9:
            warnings.append(
                f"pf = {q.pf:.12e} misses the bound {bound:.12e} despite a vanishing diagonal block"
            )
    elif q.pf > bound + 1e-9:
        # outside the hypothesis the bound is only a reference point
        warnings.append(
            f"pf = {q.pf:.12e} above the vanishing-block reference {bound:.12e} "
            "(no optimality statement applies)"
        )
    rate = None
    distillable = False
    if q.f is not None:
        distillable = q.f > 1.0 / (2 ** (choice.m - 1))
        if choice.m == 2:
            rate = hashing_rate(q.p, q.f)
    return DistillationReport(
        m=choice.m,
        p=q.p,
        f=q.f,
        pf=q.pf,
        rate=rate,
        lambdas=[float(v) for v in choice.lambdas],
        distillable=bool(distillable),
        warnings=warnings,
    )


def run_protocol(
    s: CovarianceMatrix | np.ndarray, split: BipartiteSplit, m: int
) -> DistillationReport:
    """Build the canonical choice for m and evaluate it.

    When a diagonal block vanishes, pf must attain the product bound:
    exceeding it raises, missing it attaches a warning.  Outside the
    hypothesis the bound is recorded as a reference only.  The hashing
    rate is reported for m = 2 (qubit pairs); for larger m the report
    carries p, f and pf with d = 2^(m-1) implied.
    """
    choice = optimal_choice(s, split, m)
    return _evaluate(s, split, choice)


def scan_m(
    s: CovarianceMatrix | np.ndarray, split: BipartiteSplit, m_max: int
) -> tuple[list[DistillationReport], str | None]:
    """Reports for m = 2..m_max; truncates with a reason when rank runs out."""
    reports = []
    for m in range(2, m_max + 1):
        try:
            reports.append(run_protocol(s, split, m))
        except InsufficientRankError as exc:
            return reports, str(exc)
    return reports, None


@dataclass(frozen=True)
class SuboptimalSample:
    """Best randomly drawn protocol found and where it came from."""

    best_pf: float
    best_p: float
    best_f: float | None
    trial: int
    d: RealProjectionPair
    v: np.ndarray


def sample_suboptimal(
    s: CovarianceMatrix | np.ndarray,
    split: BipartiteSplit,
    m: int,
    trials: int,
    seed: int,
) -> SuboptimalSample:
    """Best pf over random (D, V) draws; deterministic per seed.

    D_A and D_B are spanned by random orthogonal frames, V is a random
    orthogonal pairing between them.  Used as an empirical optimality
    probe against the canonical choice.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    split.check_even()
    ka, kb = len(split.a), len(split.b)
    best: SuboptimalSample | None = None
    streams = np.random.SeedSequence(seed).spawn(trials)
    for t, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        ua = random_orthogonal(ka, rng)[:, : 2 * m]
        ub = random_orthogonal(kb, rng)[:, : 2 * m]
        o = random_orthogonal(2 * m, rng)
        d = RealProjectionPair(ua @ ua.T, ub @ ub.T)
        v = ua @ o @ ub.T
        q = protocol_quantities(s, split, d, v)
        if best is None or q.pf > best.best_pf:
            best = SuboptimalSample(q.pf, q.p, q.f, t, d, v)
    return best
