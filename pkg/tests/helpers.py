"""Test-only oracles, kept independent of the library code paths they check."""

import numpy as np


def pfaffian_combinatorial(a: np.ndarray):
    """Sum over perfect matchings; O(n!!), usable up to dim ~10."""
    a = np.asarray(a)
    n = a.shape[0]
    if n % 2:
        raise ValueError("odd dimension")
    if n == 0:
        return 1.0

    def rec(idx):
        if not idx:
            return 1.0
        first = idx[0]
        total = 0.0
        for pos in range(1, len(idx)):
            rest = idx[1:pos] + idx[pos + 1:]
            total += (-1) ** (pos - 1) * a[first, idx[pos]] * rec(rest)
        return total

    return rec(tuple(range(n)))


def random_antisymmetric(dim: int, rng, complex_entries: bool = False) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    if complex_entries:
        a = a + 1j * rng.standard_normal((dim, dim))
    return (a - a.T) / 2


def dense_sine_toeplitz(L: int, r: int) -> np.ndarray:
    """Entrywise construction of the block-correlation kernel, no FFT."""
    out = np.zeros((L, L))
    for j in range(L):
        for k in range(L):
            q = j - k + r
            if q != 0:
                out[j, k] = np.sin(q * np.pi / 2.0) / (q * np.pi)
    return out


def orthogonal_2x2_grid(steps: int = 2001):
    """All of O(2) on an angle grid: rotations and reflections."""
    for phi in np.linspace(0.0, 2.0 * np.pi, steps):
        c, s = np.cos(phi), np.sin(phi)
        yield np.array([[c, -s], [s, c]])
        yield np.array([[-c, s], [s, c]])
