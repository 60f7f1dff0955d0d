"""Dense linear-algebra primitives shared by all modules.

The Pfaffian is the workhorse: every probability and fidelity in this
package is a Pfaffian of a real antisymmetric matrix, and its *sign*
carries physical meaning, so we use a sign-exact elimination algorithm
instead of sqrt(det).
"""

from __future__ import annotations

import numpy as np

# Antisymmetry violations above this (relative to the largest entry) are
# treated as data errors rather than roundoff.
ANTISYMMETRY_RTOL = 1e-12

# Singular values below RANK_RTOL * sigma_max are treated as exact zeros.
RANK_RTOL = 1e-12


def check_antisymmetric(a: np.ndarray, rtol: float = ANTISYMMETRY_RTOL) -> np.ndarray:
    """Validate that `a` is square, even-dimensional and antisymmetric.

    Returns the array unchanged.  Raises ValueError on violation; the
    tolerance is relative to the largest entry so that rescaled inputs
    behave identically.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] % 2 != 0:
        raise ValueError(f"Pfaffian requires even dimension, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a + a.T).max() > rtol * scale:
        raise ValueError(
            f"matrix is not antisymmetric: |A + A^T|_max = {np.abs(a + a.T).max():.3e}"
            f" exceeds {rtol:.1e} * |A|_max"
        )
    return a


def pfaffian(a: np.ndarray) -> float | complex:
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Skew-symmetric Parlett-Reid elimination with partial pivoting:
    O(n^3), tracks the sign exactly (row/column swaps flip it, each
    2x2 pivot contributes a factor).  Satisfies Pf(A)^2 = det(A) with
    the sign fixed by the identity ordering of the rows, ie
    Pf([[0, a], [-a, 0]]) = a.
    """
    a = check_antisymmetric(a)
    n = a.shape[0]
    if n == 0:
        return 1.0
    complex_in = np.iscomplexobj(a)
    work = np.array(a, dtype=complex if complex_in else float, copy=True)
    pf = work.dtype.type(1.0)
    for k in range(0, n - 1, 2):
        # Largest element in column k below the diagonal becomes the pivot.
        kp = k + 1 + int(np.argmax(np.abs(work[k + 1:, k])))
        if kp != k + 1:
            work[[k + 1, kp], :] = work[[kp, k + 1], :]
            work[:, [k + 1, kp]] = work[:, [kp, k + 1]]
            pf = -pf
        pivot = work[k, k + 1]
        if pivot == 0.0:
            # Entire column vanishes: the matrix is singular.
            return work.dtype.type(0.0) * pf
        pf = pf * pivot
        if k + 2 < n:
            tau = work[k, k + 2:] / pivot
            col = work[k + 2:, k + 1]
            work[k + 2:, k + 2:] += np.outer(tau, col)
            work[k + 2:, k + 2:] -= np.outer(col, tau)
    return complex(pf) if complex_in else float(pf)


def svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition a = u @ diag(s) @ vh, s decreasing."""
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return np.linalg.svd(a)


def polar_decompose(
    y: np.ndarray, rank_rtol: float = RANK_RTOL
) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition y = v @ p with p = (y^dag y)^(1/2) positive.

    v is the partial isometry vanishing on the kernel of |y|: singular
    values below rank_rtol * sigma_max are treated as zero, so v^dag v
    is the projection onto the row space and v v^dag the projection
    onto the range of y.
    """
    u, s, vh = svd(y)
    cutoff = rank_rtol * s[0] if s.size and s[0] > 0 else 0.0
    r = int(np.sum(s > cutoff))
    v = u[:, :r] @ vh[:r]
    p = (vh.conj().T * s) @ vh
    return v, p


def random_orthogonal(dim: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-random real orthogonal matrix, deterministic per seed.

    QR of a Gaussian matrix with the sign of diag(R) absorbed into Q,
    which makes the distribution exactly Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))
