"""Covariance-matrix data model for fermionic quasifree states.

A state of n modes is encoded by a 2n x 2n complex matrix S, expressed
in a canonical real basis so that complex conjugation J acts entrywise.
Validity means

    S = S^dag,   0 <= S <= 1,   conj(S) = 1 - S,

equivalently S = 1/2 + i*G with G real antisymmetric and ||G|| <= 1/2.
Pure quasifree (Fock) states have idempotent S, called basis projections.

All probability/fidelity formulas reduce to Pfaffians of real
antisymmetric matrices.  Pfaffian signs depend on the orientation of the
basis; throughout this module the orientation is tied to the *target*
maximally entangled state: dividing by the Pfaffian of the target (an
exact +-1) makes every reported quantity basis-independent and
nonnegative where it should be.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import pfaffian, random_orthogonal, svd

STRUCT_ATOL = 1e-10          # structural tolerances (hermiticity, realness, ...)
CROSS_CHECK_ATOL = 1e-8      # agreement between independent formulas

__all__ = [
    "CovarianceMatrix",
    "BipartiteSplit",
    "BlockDecomposition",
    "RealProjectionPair",
    "ValidationReport",
    "ProtocolQuantities",
    "ValidationError",
    "validate",
    "blocks",
    "assemble_covariance",
    "parity_expectation",
    "parity_probability",
    "fock_fidelity",
    "partner_projection",
    "protocol_quantities",
    "twirl_coefficients",
    "output_fidelity",
    "restrict",
    "maximally_entangled_projection",
    "target_orientation",
    "random_covariance",
    "random_basis_projection",
    "load_covariance",
    "save_covariance",
]


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceMatrix:
    """Covariance matrix of a quasifree state in a canonical real basis.

    orientation is the +-1 sign convention for the parity operator of
    this basis; it multiplies parity expectations and probabilities.
    """

    matrix: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
            raise ValidationError(f"covariance must be 2n x 2n, got {m.shape}")
        if self.orientation not in (-1, 1):
            raise ValidationError("orientation must be +1 or -1")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _matrix(s: CovarianceMatrix | np.ndarray) -> np.ndarray:
    return np.asarray(getattr(s, "matrix", s), dtype=complex)


def _orientation(s, override: int | None) -> int:
    if override is not None:
        return int(override)
    return int(getattr(s, "orientation", 1))


@dataclass(frozen=True)
class BipartiteSplit:
    """Bipartition of the 2n basis indices into Alice's and Bob's."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(i) for i in self.a))
        object.__setattr__(self, "b", tuple(int(i) for i in self.b))
        if set(self.a) & set(self.b):
            raise ValidationError("split index sets must be disjoint")

    @classmethod
    def from_alice(cls, a_indices, dim: int) -> "BipartiteSplit":
        a = tuple(int(i) for i in a_indices)
        if any(i < 0 or i >= dim for i in a):
            raise ValidationError("split indices out of range")
        b = tuple(i for i in range(dim) if i not in set(a))
        return cls(a, b)

    @classmethod
    def halves(cls, dim: int) -> "BipartiteSplit":
        """Alice gets the first half of the indices, Bob the rest."""
        if dim % 4 != 0:
            raise ValidationError("equal split needs dim divisible by 4")
        return cls(tuple(range(dim // 2)), tuple(range(dim // 2, dim)))

    def check_even(self):
        if len(self.a) != len(self.b):
            raise ValidationError("protocol operations need |A| = |B|")
        if len(self.a) % 2 != 0:
            raise ValidationError("each party needs an even number of indices")


@dataclass(frozen=True)
class BlockDecomposition:
    """Real blocks of a bipartite covariance: X, Z antisymmetric, Y general.

    S restricted to (A, B) reads S = 1/2 * [[1 + iX, iY], [-iY^T, 1 + iZ]].
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class RealProjectionPair:
    """Real projections (D_A, D_B) selecting the kept modes on each side."""

    d_a: np.ndarray
    d_b: np.ndarray

    def __post_init__(self):
        for name, d in (("d_a", self.d_a), ("d_b", self.d_b)):
            d = np.asarray(d)
            if np.abs(d @ d - d).max() > STRUCT_ATOL:
                raise ValidationError(f"{name} is not idempotent")
            if np.abs(d - d.T.conj()).max() > STRUCT_ATOL:
                raise ValidationError(f"{name} is not selfadjoint")
            if np.iscomplexobj(d) and np.abs(d.imag).max() > STRUCT_ATOL:
                raise ValidationError(f"{name} is not real")
            object.__setattr__(self, name, np.real(d))

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.d_a)))

    @classmethod
    def identity(cls, dim_a: int, dim_b: int) -> "RealProjectionPair":
        return cls(np.eye(dim_a), np.eye(dim_b))


@dataclass
class ValidationReport:
    """Per-invariant diagnostics; passes iff every magnitude is in tolerance."""

    checks: list[tuple[str, float, float]] = field(default_factory=list)

    def add(self, name: str, magnitude: float, tol: float):
        self.checks.append((name, float(magnitude), float(tol)))

    @property
    def passed(self) -> bool:
        return all(mag <= tol for _, mag, tol in self.checks)

    @property
    def violations(self) -> list[tuple[str, float, float]]:
        return [c for c in self.checks if c[1] > c[2]]

    def summary(self) -> str:
        lines = []
        for name, mag, tol in self.checks:
            status = "ok" if mag <= tol else "VIOLATED"
            lines.append(f"{name}: {mag:.3e} (tol {tol:.1e}) {status}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# validity and blocks
# ---------------------------------------------------------------------------


def validate(s: CovarianceMatrix | np.ndarray, atol: float = STRUCT_ATOL) -> ValidationReport:
    """Diagnose covariance validity: reports, never raises."""
    m = _matrix(s)
    n2 = m.shape[0]
    report = ValidationReport()
    report.add("hermitian |S - S^dag|_max", np.abs(m - m.conj().T).max(), atol)
    report.add("reality |conj(S) - (1 - S)|_max", np.abs(m.conj() - (np.eye(n2) - m)).max(), atol)
    try:
        ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
        report.add("spectrum max(0 - ev, ev - 1)", max(0.0, -ev.min(), ev.max() - 1.0), atol)
    except np.linalg.LinAlgError:
        report.add("spectrum (eigensolver failed)", np.inf, atol)
    return report


def require_valid(s: CovarianceMatrix | np.ndarray, atol: float = STRUCT_ATOL):
    report = validate(s, atol)
    if not report.passed:
        bad = "; ".join(f"{n} = {m:.3e}" for n, m, _ in report.violations)
        raise ValidationError(f"invalid covariance matrix: {bad}")


def blocks(s: CovarianceMatrix | np.ndarray, split: BipartiteSplit) -> BlockDecomposition:
    """Real block decomposition X = -i(2 S_AA - 1), Z likewise, Y = -2i S_AB."""
    m = _matrix(s)
    ia, ib = list(split.a), list(split.b)
    x = -1j * (2 * m[np.ix_(ia, ia)] - np.eye(len(ia)))
    z = -1j * (2 * m[np.ix_(ib, ib)] - np.eye(len(ib)))
    y = -2j * m[np.ix_(ia, ib)]
    out = []
    for name, blk in (("X", x), ("Y", y), ("Z", z)):
        res = np.abs(blk.imag).max() if blk.size else 0.0
        if res > STRUCT_ATOL:
            raise ValidationError(
                f"block {name} has imaginary residue {res:.3e}; "
                "the covariance is not in a canonical real basis"
            )
        out.append(blk.real)
    return BlockDecomposition(*out)


def assemble_covariance(
    block: BlockDecomposition, orientation: int = 1
) -> tuple[CovarianceMatrix, BipartiteSplit]:
    """Inverse of `blocks` for the grouped index ordering (all A, then all B)."""
    x, y, z = block.x, block.y, block.z
    na, nb = x.shape[0], z.shape[0]
    g = 0.5 * np.block([[x, y], [-y.T, z]])
    s = 0.5 * np.eye(na + nb) + 1j * g
    return CovarianceMatrix(s, orientation), BipartiteSplit(
        tuple(range(na)), tuple(range(na, na + nb))
    )


def _skew_part(s: CovarianceMatrix | np.ndarray) -> np.ndarray:
    """Real antisymmetric G with S = 1/2 + iG; errors if S is off-basis."""
    m = _matrix(s)
    g = -1j * (m - 0.5 * np.eye(m.shape[0]))
    if np.abs(g.imag).max() > STRUCT_ATOL:
        raise ValidationError("S - 1/2 is not i * (real matrix); wrong basis convention")
    g = g.real
    scale = max(np.abs(g).max(), 1.0)
    if np.abs(g + g.T).max() > STRUCT_ATOL * scale:
        raise ValidationError("S - 1/2 is not antisymmetric under transposition")
    return (g - g.T) / 2


# ---------------------------------------------------------------------------
# parity and fidelity
# ---------------------------------------------------------------------------


def parity_expectation(s: CovarianceMatrix | np.ndarray, orientation: int | None = None) -> float:
    """Expectation of the parity operator: 2^n (-1)^n Pf(-i(S - 1/2)).

    The sign refers to the parity operator built from the basis the
    covariance is expressed in, times the orientation (+-1).
    """
    g = _skew_part(s)
    n = g.shape[0] // 2
    val = _orientation(s, orientation) * (2.0 ** n) * ((-1.0) ** n) * pfaffian(g)
    if abs(val) > 1 + STRUCT_ATOL:
        raise ValidationError(f"parity expectation {val:.6f} outside [-1, 1]")
    return float(np.clip(val, -1.0, 1.0))


def parity_probability(s: CovarianceMatrix | np.ndarray, orientation: int | None = None) -> float:
    """Probability that a joint parity measurement lands in the target sector.

    For 2m modes: p = (1 + orientation * (-4)^m Pf(-i(S - 1/2))) / 2.
    orientation = +1 corresponds to a target maximally entangled state
    whose off-diagonal orthogonal block has determinant +1 in this basis
    (see `target_orientation`); the (-1)^m hidden in (-4)^m accounts for
    the parity sign of such a target.
    """
    g = _skew_part(s)
    if g.shape[0] % 4 != 0:
        raise ValidationError("parity probability needs an even number of modes")
    m = g.shape[0] // 4
    p = (1.0 + _orientation(s, orientation) * ((-4.0) ** m) * pfaffian(g)) / 2.0
    if p < -STRUCT_ATOL or p > 1 + STRUCT_ATOL:
        raise ValidationError(
            f"parity probability {p:.3e} outside [0, 1]: orientation bug or invalid state"
        )
    return float(np.clip(p, 0.0, 1.0))


def fock_fidelity(s: CovarianceMatrix | np.ndarray, e: CovarianceMatrix | np.ndarray) -> float:
    """Fidelity of the state S with the pure state of basis projection E.

    Pf(-i(1 - S - E)) normalized by Pf(-i(1 - 2E)), which is an exact
    +-1 fixing the orientation so that fock_fidelity(E, E) = 1.
    """
    ms, me = _matrix(s), _matrix(e)
    if ms.shape != me.shape:
        raise ValidationError("S and E must have the same dimension")
    n2 = ms.shape[0]
    arg = -1j * (np.eye(n2) - ms - me)
    ref = -1j * (np.eye(n2) - 2 * me)
    for name, mat in (("1 - S - E", arg), ("1 - 2E", ref)):
        if np.abs(mat.imag).max() > 1e-8:
            raise ValidationError(f"-i({name}) has imaginary residue above 1e-8")
    num = pfaffian((arg.real - arg.real.T) / 2)
    den = pfaffian((ref.real - ref.real.T) / 2)
    if abs(abs(den) - 1.0) > 1e-6:
        raise ValidationError("E is not a basis projection (orientation Pfaffian != +-1)")
    fid = num / round(den)
    if fid < -STRUCT_ATOL or fid > 1 + STRUCT_ATOL:
        raise ValidationError(f"fidelity {fid:.3e} outside [0, 1]")
    return float(np.clip(fid, 0.0, 1.0))


def partner_projection(
    e: CovarianceMatrix | np.ndarray, split: BipartiteSplit
) -> CovarianceMatrix:
    """Basis projection differing only by the sign of the off-diagonal block.

    The corresponding pure state is locally indistinguishable from the
    original and carries the same orientation.
    """
    m = _matrix(e).copy()
    ia, ib = list(split.a), list(split.b)
    m[np.ix_(ia, ib)] *= -1
    m[np.ix_(ib, ia)] *= -1
    out = CovarianceMatrix(m, _orientation(e, None))
    if np.abs(m @ m - m).max() > STRUCT_ATOL:
        raise ValidationError("partner projection lost idempotence")
    return out


def maximally_entangled_projection(
    v: np.ndarray, split: BipartiteSplit, dim: int | None = None
) -> CovarianceMatrix:
    """Basis projection of the maximally entangled state with Y-block v.

    v must be real orthogonal on (A, B); the diagonal blocks vanish.
    """
    v = np.asarray(v, dtype=float)
    k = v.shape[0]
    if v.shape != (k, k) or np.abs(v.T @ v - np.eye(k)).max() > STRUCT_ATOL:
        raise ValidationError("Y-block of a maximally entangled state must be orthogonal")
    if dim is None:
        dim = 2 * k
    if len(split.a) != k or len(split.b) != k:
        raise ValidationError("split size does not match the isometry")
    g = np.zeros((dim, dim))
    g[np.ix_(list(split.a), list(split.b))] = v / 2
    g[np.ix_(list(split.b), list(split.a))] = -v.T / 2
    return CovarianceMatrix(0.5 * np.eye(dim) + 1j * g)


def target_orientation(e: CovarianceMatrix | np.ndarray) -> int:
    """Orientation (+-1) of the basis relative to a target basis projection E.

    Equals (-4)^m Pf(-i(E - 1/2)), an exact sign; passing it to
    parity_probability selects the parity sector containing the target.
    """
    g = _skew_part(e)
    m = g.shape[0] // 4
    val = ((-4.0) ** m) * pfaffian(g)
    if abs(abs(val) - 1.0) > 1e-6:
        raise ValidationError("not a maximally entangled basis projection")
    return int(round(val))


# ---------------------------------------------------------------------------
# protocol quantities
# ---------------------------------------------------------------------------


def projection_frame(d: np.ndarray, atol: float = STRUCT_ATOL) -> np.ndarray:
    """Real orthonormal basis of the range of a real projection."""
    d = np.real(np.asarray(d))
    w, vecs = np.linalg.eigh((d + d.T) / 2)
    rank = int(np.sum(w > 0.5))
    frame = vecs[:, w > 0.5]
    if np.abs(w - np.rint(w)).max() > atol:
        raise ValidationError("projection eigenvalues are not 0/1")
    if rank % 2 != 0:
        raise ValidationError("projection rank must be even (whole modes)")
    return frame


@dataclass(frozen=True)
class ProtocolQuantities:
    """Success probability, output fidelity and their product for one run.

    f is None when p vanishes (fidelity undefined, nothing to keep).
    """

    p: float
    f: float | None
    pf: float


def protocol_quantities(
    s: CovarianceMatrix | np.ndarray,
    split: BipartiteSplit,
    d: RealProjectionPair,
    v: np.ndarray,
    *,
    p_floor: float = 1e-12,
) -> ProtocolQuantities:
    """Evaluate one protocol instance (D, V) on the state S.

    p is the parity probability of the restricted state D S D; the
    combined quantity pf = <psi_E, rho psi_E> + <psi_partner, rho
    psi_partner> comes from the two-Pfaffian block formula

        pf = det(V') (-1)^m 2^(-2m) [Pf(M+) + Pf(M-)],
        M+- = [[X', Y' +- V'], [-(Y' +- V')^T, Z']],

    where primes are compressions onto orthonormal frames of Ran D_A/B
    and det(V') fixes the orientation of the target.  Whenever X' or Z'
    vanishes the result is cross-checked against the determinant form
        (|det(Y' + V')| + |det(Y' - V')|) / 2^(2m).
    """
    split.check_even()
    blk = blocks(s, split)
    ua = projection_frame(d.d_a)
    ub = projection_frame(d.d_b)
    r = ua.shape[1]
    if ub.shape[1] != r:
        raise ValidationError("D_A and D_B must have equal rank")
    m = r // 2

    xp = ua.T @ blk.x @ ua
    yp = ua.T @ blk.y @ ub
    zp = ub.T @ blk.z @ ub
    vp = ua.T @ np.real(np.asarray(v)) @ ub
    if np.abs(vp.T @ vp - np.eye(r)).max() > 1e-8:
        raise ValidationError("V is not a partial isometry between Ran D_B and Ran D_A")
    detv = int(round(np.linalg.det(vp)))

    g = 0.5 * np.block([[xp, yp], [-yp.T, zp]])
    p = (1.0 + detv * ((-4.0) ** m) * pfaffian((g - g.T) / 2)) / 2.0
    if p < -STRUCT_ATOL or p > 1 + STRUCT_ATOL:
        raise ValidationError(f"restricted parity probability {p:.3e} outside [0, 1]")
    p = float(np.clip(p, 0.0, 1.0))

    def _half(sign: float) -> float:
        k = yp + sign * vp
        mat = np.block([[xp, k], [-k.T, zp]])
        return pfaffian((mat - mat.T) / 2)

    pf = detv * ((-1.0) ** m) * (_half(+1.0) + _half(-1.0)) / (2.0 ** r)

    if min(np.abs(xp).max(initial=0.0), np.abs(zp).max(initial=0.0)) < STRUCT_ATOL:
        det_form = (
            abs(np.linalg.det(yp + vp)) + abs(np.linalg.det(yp - vp))
        ) / (2.0 ** r)
        if abs(pf - det_form) > CROSS_CHECK_ATOL:
            raise ValidationError(
                f"block-Pfaffian and determinant forms disagree: {pf:.12e} vs {det_form:.12e}"
            )

    if pf < -STRUCT_ATOL:
        raise ValidationError(f"pf = {pf:.3e} negative beyond tolerance")
    pf = float(max(pf, 0.0))
    f = pf / p if p > p_floor else None
    return ProtocolQuantities(p=p, f=f, pf=pf)


# ---------------------------------------------------------------------------
# twirling and output fidelity
# ---------------------------------------------------------------------------


def twirl_coefficients(
    p: float, fid_e: float, fid_partner: float, m: int
) -> tuple[float, float, float, float]:
    """Coefficients (lambda+, lambda-, mu+, mu-) of the twirled state.

    Unique solution of
        p/2       = (lambda+ + lambda-)/2 + mu+ d^2
        (1 - p)/2 = mu- d^2
        fid_e     = lambda+ + mu+
        fid_partner = lambda- + mu+
    with d = 2^(m-1).  The lambdas may legitimately be negative (the
    target projectors overlap the sector projections; the twirled
    state's eigenvalues are fid_e, fid_partner, mu+ and mu-).  Inputs
    whose implied eigenvalues are negative beyond tolerance cannot come
    from a state and are rejected.
    """
    if m < 2:
        raise ValidationError("twirling needs m >= 2 (d >= 2)")
    d2 = float(4 ** (m - 1))
    mu_plus = (p - fid_e - fid_partner) / (2.0 * (d2 - 1.0))
    mu_minus = (1.0 - p) / (2.0 * d2)
    lam_plus = fid_e - mu_plus
    lam_minus = fid_partner - mu_plus
    eigen = (
        ("fidelity on the target", fid_e),
        ("fidelity on the partner", fid_partner),
        ("mu+", mu_plus),
        ("mu-", mu_minus),
    )
    for name, c in eigen:
        if c < -STRUCT_ATOL:
            raise ValidationError(
                f"twirled-state eigenvalue {name} = {c:.3e} negative: inconsistent inputs"
            )
    return (float(lam_plus), float(lam_minus), float(mu_plus), float(mu_minus))


def output_fidelity(fid_e: float, fid_partner: float, p: float, m: int) -> tuple[float, bool]:
    """Fidelity (fid_e + fid_partner)/p of the kept isotropic state.

    Also returns the distillability flag f > 1/d with d = 2^(m-1).
    """
    if p <= 0:
        raise ValidationError("output fidelity undefined at p = 0")
    f = (fid_e + fid_partner) / p
    return float(f), bool(f > 1.0 / (2 ** (m - 1)))


# ---------------------------------------------------------------------------
# restriction and sampling
# ---------------------------------------------------------------------------


def restrict(
    s: CovarianceMatrix | np.ndarray, split: BipartiteSplit, d: RealProjectionPair
) -> tuple[CovarianceMatrix, BipartiteSplit]:
    """Compress S to the range of D = D_A + D_B, keeping the A/B structure.

    Returns the covariance of the restricted quasifree state together
    with the split of the new (grouped) index set.
    """
    m = _matrix(s)
    ua = projection_frame(d.d_a)
    ub = projection_frame(d.d_b)
    ia, ib = list(split.a), list(split.b)
    frame = np.zeros((m.shape[0], ua.shape[1] + ub.shape[1]))
    frame[ia, : ua.shape[1]] = ua
    frame[ib, ua.shape[1]:] = ub
    sr = frame.T @ m @ frame
    out = CovarianceMatrix(sr, _orientation(s, None))
    report = validate(out)
    if not report.passed:
        raise ValidationError("restricted covariance failed validation:\n" + report.summary())
    new_split = BipartiteSplit(
        tuple(range(ua.shape[1])), tuple(range(ua.shape[1], ua.shape[1] + ub.shape[1]))
    )
    return out, new_split


def random_covariance(
    n_modes: int,
    seed: int | np.random.Generator,
    *,
    purity: float | None = None,
) -> CovarianceMatrix:
    """Random valid covariance: S = 1/2 + iG with spectrum scaled into bounds.

    purity in (0, 1] scales the skew part: 1 gives a pure state, small
    values approach the maximally mixed state.  Defaults to a uniform
    draw away from both extremes.
    """
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    g = rng.standard_normal((2 * n_modes, 2 * n_modes))
    g = (g - g.T) / 2
    top = np.linalg.norm(g, 2)
    scale = purity if purity is not None else rng.uniform(0.2, 0.95)
    g *= 0.5 * scale / top
    return CovarianceMatrix(0.5 * np.eye(2 * n_modes) + 1j * g)


def random_basis_projection(n_modes: int, seed: int | np.random.Generator) -> CovarianceMatrix:
    """Random pure-state covariance: E = 1/2 + iG with 2G orthogonal."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    r = random_orthogonal(2 * n_modes, rng)
    jc = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        jc[2 * k, 2 * k + 1] = 1.0
        jc[2 * k + 1, 2 * k] = -1.0
    g = r @ jc @ r.T / 2
    return CovarianceMatrix(0.5 * np.eye(2 * n_modes) + 1j * g)


def random_x_zero_covariance(
    n_modes_per_side: int,
    seed: int | np.random.Generator,
    *,
    min_singular: float = 0.05,
) -> tuple[CovarianceMatrix, BipartiteSplit]:
    """Random valid bipartite covariance with vanishing Alice block X.

    The Y block is kept away from rank deficiency so that protocol
    construction at any admissible m is well posed.
    """
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    k = 2 * n_modes_per_side
    for _ in range(200):
        y = rng.standard_normal((k, k))
        z = rng.standard_normal((k, k))
        z = (z - z.T) / 2
        g = np.block([[np.zeros((k, k)), y], [-y.T, z]]) / 2
        g *= 0.5 * rng.uniform(0.4, 0.95) / np.linalg.norm(g, 2)
        s = CovarianceMatrix(0.5 * np.eye(2 * k) + 1j * g)
        split = BipartiteSplit(tuple(range(k)), tuple(range(k, 2 * k)))
        sv = svd(blocks(s, split).y)[1]
        if sv[-1] > min_singular:
            return s, split
    raise RuntimeError("failed to sample a well-conditioned X = 0 state")


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def save_covariance(
    path: str | Path, s: CovarianceMatrix | np.ndarray, split: BipartiteSplit
):
    """Write the covariance JSON: modes, split_a, entries as [re, im] pairs."""
    m = _matrix(s)
    payload = {
        "modes": m.shape[0] // 2,
        "split_a": list(split.a),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True))


def load_covariance(path: str | Path) -> tuple[CovarianceMatrix, BipartiteSplit]:
    """Read a covariance JSON file; raises ValidationError on malformed data."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    try:
        n = int(payload["modes"])
        split_a = payload["split_a"]
        entries = payload["entries"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"missing covariance file field: {exc}") from exc
    dim = 2 * n
    if len(entries) != dim * dim:
        raise ValidationError(
            f"expected {dim * dim} entries for {n} modes, got {len(entries)}"
        )
    flat = np.array([complex(re, im) for re, im in entries])
    s = CovarianceMatrix(flat.reshape(dim, dim))
    return s, BipartiteSplit.from_alice(split_a, dim)
