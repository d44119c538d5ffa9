"""Spectra, the semicircle law, trace norms and Wasserstein distances.

Wasserstein conventions follow the excess-matrix literature: for two sorted
spectra of length ``D`` with differences ``d_j``::

    W1 = (1/D) sum |d_j|                   W2**2 = (1/D**2) sum d_j**2

so that ``D**2 * W2**2 <= ||A - B||_F**2`` (Hoffman-Wielandt).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import DimensionError, check_hermitian

__all__ = [
    "SpectralMeasure",
    "SemicircleLaw",
    "eigenvalues",
    "pool",
    "trace_norm",
    "semicircle",
    "wasserstein_sorted",
    "two_point_w2",
    "two_point_ratio",
    "semicircle_distance",
]


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Uniform atomic measure on sorted eigenvalues."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).reshape(-1)
        if a.size > 1 and np.any(np.diff(a) < 0):
            a = np.sort(a)
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @property
    def dim(self) -> int:
        return self.atoms.size


def eigenvalues(h, *, tol: float = 1e-10) -> SpectralMeasure:
    h = np.asarray(h)
    check_hermitian(h, tol)
    return SpectralMeasure(np.linalg.eigvalsh(h))


def pool(measures) -> SpectralMeasure:
    """Union of several spectra (e.g. across realisations)."""
    return SpectralMeasure(np.concatenate([np.asarray(m.atoms) for m in measures]))


def trace_norm(m) -> float:
    atoms = m.atoms if isinstance(m, SpectralMeasure) else np.asarray(m)
    return float(np.sum(np.abs(atoms)))


@dataclass(frozen=True)
class SemicircleLaw:
    """Wigner semicircle ``W_R(x) = 2 sqrt(R**2 - x**2) / (pi R**2)``."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")

    def pdf(self, x):
        r = self.radius
        x = np.asarray(x, dtype=float)
        return 2.0 / (np.pi * r * r) * np.sqrt(np.clip(r * r - x * x, 0.0, None))

    def cdf(self, x):
        t = np.clip(np.asarray(x, dtype=float) / self.radius, -1.0, 1.0)
        return 0.5 + (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / np.pi

    def quantile(self, u):
        """Inverse cdf.  With ``x = R sin(phi/2)`` the cdf is ``1/2 + (phi + sin phi)/(2 pi)``."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise ValueError("quantile levels must lie in [0, 1]")
        target = 2.0 * np.pi * (u - 0.5)
        lo = np.full(u.shape, -np.pi)
        hi = np.full(u.shape, np.pi)
        # phi + sin(phi) is monotone on [-pi, pi]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = mid + np.sin(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return self.radius * np.sin(0.25 * (lo + hi))

    def mean_abs(self) -> float:
        """``E|x| = 4R/(3 pi)``."""
        return 4.0 * self.radius / (3.0 * np.pi)


def semicircle(vbar: float, dim: int) -> SemicircleLaw:
    """Law of an excess spectrum with mean coefficient variance ``vbar``: ``R = 2 D sqrt(vbar)``."""
    if not vbar > 0:
        raise ValueError("vbar must be positive")
    return SemicircleLaw(2.0 * dim * np.sqrt(vbar))


def _diffs(a: SpectralMeasure, b: SpectralMeasure) -> np.ndarray:
    if a.dim != b.dim:
        raise DimensionError(f"spectra have {a.dim} and {b.dim} atoms")
    return a.atoms - b.atoms


def wasserstein_sorted(a: SpectralMeasure, b: SpectralMeasure) -> tuple[float, float]:
    """``(W1, W2**2)`` between equal-size spectra under the sorted coupling."""
    d = _diffs(a, b)
    n = d.size
    return float(np.sum(np.abs(d)) / n), float(np.sum(d * d) / n**2)


def two_point_w2(a: SpectralMeasure, b: SpectralMeasure) -> float:
    """Paired-atom squared W2 between the two-point (ordered distinct pair) measures.

    Uses the same per-atom weight convention as :func:`wasserstein_sorted`:
    ``(1/(D**2 (D-1))) sum_{j != k} (d_j**2 + d_k**2)``.  The double sum is
    ``2 (D-1) sum d_j**2``, so the value is ``2 W2**2``.
    """
    d = _diffs(a, b)
    n = d.size
    if n < 2:
        raise DimensionError("two-point measure needs at least two atoms")
    sq = d * d
    pair_sum = (n - 1) * 2.0 * np.sum(sq)
    return float(pair_sum / (n * n * (n - 1)))


def two_point_ratio(a: SpectralMeasure, b: SpectralMeasure) -> float:
    """``two_point_w2 / (2 W2**2)``; 1 for distinct spectra, nan when they coincide."""
    _, w2sq = wasserstein_sorted(a, b)
    if w2sq == 0:
        return float("nan")
    return two_point_w2(a, b) / (2.0 * w2sq)


def semicircle_distance(m: SpectralMeasure, law: SemicircleLaw) -> float:
    """W1 to the law by matching atom ``k`` with the quantile at ``(k - 1/2)/n``."""
    n = m.dim
    q = law.quantile((np.arange(1, n + 1) - 0.5) / n)
    return float(np.mean(np.abs(m.atoms - q)))
