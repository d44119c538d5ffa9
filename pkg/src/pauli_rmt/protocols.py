"""Samplers for the tomographic excess ``y`` (and ``Delta rho = synthesize(y)``).

Randomness
----------
Every sampler takes a ``numpy.random.Generator`` or an integer seed.  For
replicated runs :func:`replication_seed` derives an independent 64-bit seed
per replication::

    seed_i = splitmix64(splitmix64(master_seed) XOR i)

and :func:`replication_rng` wraps it in ``Generator(PCG64(seed_i))``.  The
streams therefore depend only on ``(master_seed, i)``, never on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .pauli import pauli_weights, synthesize
from .states import StateModel, setting_distribution

__all__ = [
    "ExcessSample",
    "ShotPlan",
    "AliasTable",
    "splitmix64",
    "replication_seed",
    "replication_rng",
    "sample_naive",
    "sample_naive_many",
    "sample_qwc",
    "sample_qwc_many",
    "sample_surrogate",
    "sample_gue",
    "qwc_settings",
    "qwc_pool",
    "qwc_contributing_shots",
    "fwht",
    "QWC_MAX_QUBITS",
]

QWC_MAX_QUBITS = 10
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def replication_seed(master_seed: int, index: int) -> int:
    return splitmix64(splitmix64(master_seed & _MASK64) ^ (index & _MASK64))


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(replication_seed(master_seed, index)))


def _rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.Generator(np.random.PCG64(int(rng))), int(rng)


@dataclass(frozen=True)
class ShotPlan:
    """Fixed number of shots per measurement setting."""

    shots: int

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ValueError(f"shots must be a positive integer, got {self.shots!r}")


@dataclass(frozen=True, eq=False)
class ExcessSample:
    """One realisation of the excess coefficients.

    ``y`` is scaled so that ``matrix == synthesize(y)``; ``y[0]`` is exactly 0.
    """

    y: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return (self.y.size.bit_length() - 1) // 2

    @cached_property
    def matrix(self) -> np.ndarray:
        return synthesize(self.y)

    @cached_property
    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _finish(y: np.ndarray, **prov) -> ExcessSample:
    y[0] = 0.0
    y.setflags(write=False)
    return ExcessSample(y, prov)


# -- naive ---------------------------------------------------------------


def _naive_probs(state: StateModel) -> np.ndarray:
    return np.clip(0.5 * (1.0 + state.coefficients), 0.0, 1.0)


def sample_naive_many(state: StateModel, plan: ShotPlan, rng, size: int) -> np.ndarray:
    """``size`` independent naive excess vectors, shape ``(size, 4**n)``.

    Each string is measured alone ``S`` times; ``k ~ Binomial(S, (1+c)/2)``
    gives ``x = (2k/S - 1)/D`` and ``y = x - c/D``.
    """
    gen, _ = _rng(rng)
    c = state.coefficients
    d = state.dim
    s = plan.shots
    k = gen.binomial(s, _naive_probs(state), size=(size, c.size))
    y = (2.0 * k / s - 1.0) / d - c / d
    y[:, 0] = 0.0
    return y


def sample_naive(state: StateModel, plan: ShotPlan, rng) -> ExcessSample:
    gen, seed = _rng(rng)
    y = sample_naive_many(state, plan, gen, 1)[0].copy()
    return _finish(y, protocol="naive", shots=plan.shots, seed=seed)


# -- QWC -----------------------------------------------------------------


class AliasTable:
    """Walker/Vose alias table for O(1) draws from a fixed categorical law."""

    def __init__(self, probabilities):
        p = np.asarray(probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0) or p.sum() <= 0:
            raise ValueError("probabilities must be a non-empty non-negative vector")
        n = p.size
        scaled = p * (n / p.sum())
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            lo = small.pop()
            hi = large.pop()
            prob[lo] = scaled[lo]
            alias[lo] = hi
            scaled[hi] -= 1.0 - scaled[lo]
            (small if scaled[hi] < 1.0 else large).append(hi)
        # leftovers are 1 up to round-off
        self.prob = prob
        self.alias = alias

    def __len__(self) -> int:
        return self.prob.size

    def sample(self, rng, size) -> np.ndarray:
        gen, _ = _rng(rng)
        col = gen.integers(0, len(self), size=size)
        keep = gen.random(size) < self.prob[col]
        return np.where(keep, col, self.alias[col])


@lru_cache(maxsize=16)
def _settings(n: int) -> tuple[np.ndarray, np.ndarray]:
    # setting q has site-k letter digit 1 + (q // 3**k) % 3  (X=1, Y=2, Z=3)
    q = np.arange(3**n)
    digits = np.stack([1 + (q // 3**k) % 3 for k in range(n)], axis=1)
    m = np.arange(2**n)
    pool = np.zeros((3**n, 2**n), dtype=np.int64)
    for k in range(n):
        on = ((m >> k) & 1).astype(np.int64)
        pool += np.outer(digits[:, k], on) << (2 * k)
    digits.setflags(write=False)
    pool.setflags(write=False)
    return digits, pool


def qwc_settings(n: int) -> list[str]:
    """Labels of the ``3**n`` full-weight settings in sampler order."""
    digits, _ = _settings(n)
    return ["".join("IXYZ"[d] for d in row[::-1]) for row in digits]


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis.

    ``out[..., m] = sum_b a[..., b] * (-1)**popcount(b & m)``.
    """
    a = np.asarray(a)
    size = a.shape[-1]
    lead = a.shape[:-1]
    out = a.reshape(-1, size)
    h = 1
    while h < size:
        v = out.reshape(out.shape[0], size // (2 * h), 2, h)
        out = np.stack((v[:, :, 0] + v[:, :, 1], v[:, :, 0] - v[:, :, 1]), axis=2)
        out = out.reshape(-1, size)
        h *= 2
    return out.reshape(*lead, size)


def qwc_pool(hist: np.ndarray) -> np.ndarray:
    """Pooled outcome-parity sums per Pauli string.

    ``hist[..., q, b]`` counts outcome ``b`` in setting ``q``.  Entry ``j`` of
    the result sums the outcome parity on ``supp(P_j)`` over every shot of every
    setting ``Q`` with ``P_j | Q``.
    """
    hist = np.asarray(hist)
    n_set, d = hist.shape[-2:]
    n = d.bit_length() - 1
    _, pool = _settings(n)
    lead = hist.shape[:-2]
    par = fwht(hist.reshape(-1, n_set, d)).astype(float)
    reps = par.shape[0]
    offs = (np.arange(reps) * 4**n)[:, None, None]
    sums = np.bincount((pool[None] + offs).ravel(), weights=par.ravel(), minlength=reps * 4**n)
    return sums.reshape(*lead, 4**n)


def qwc_contributing_shots(n: int, shots: int) -> np.ndarray:
    """Shots pooled into each coefficient: ``S * 3**(n - w_j)``."""
    return shots * 3.0 ** (n - pauli_weights(n))


@lru_cache(maxsize=8)
def _alias_tables(state: StateModel) -> tuple[np.ndarray, np.ndarray]:
    n = state.n_qubits
    labels = qwc_settings(n)
    prob = np.empty((len(labels), state.dim))
    alias = np.empty((len(labels), state.dim), dtype=np.int64)
    for q, label in enumerate(labels):
        t = AliasTable(setting_distribution(state, label).probabilities)
        prob[q] = t.prob
        alias[q] = t.alias
    return prob, alias


_DRAW_CHUNK = 1 << 22


def _qwc_histograms(state: StateModel, shots: int, gen: np.random.Generator, size: int):
    prob, alias = _alias_tables(state)
    n_set, d = prob.shape
    rows = size * n_set
    hist = np.empty((rows, d), dtype=np.int64)
    step = max(1, _DRAW_CHUNK // shots)
    for start in range(0, rows, step):
        stop = min(rows, start + step)
        r = np.arange(start, stop) % n_set
        col = gen.integers(0, d, size=(stop - start, shots))
        keep = gen.random((stop - start, shots)) < prob[r[:, None], col]
        out = np.where(keep, col, alias[r[:, None], col])
        flat = (np.arange(stop - start)[:, None] * d + out).ravel()
        hist[start:stop] = np.bincount(flat, minlength=(stop - start) * d).reshape(-1, d)
    return hist.reshape(size, n_set, d)


def sample_qwc_many(state: StateModel, plan: ShotPlan, rng, size: int) -> np.ndarray:
    """``size`` QWC excess vectors, shape ``(size, 4**n)``.

    All ``3**n`` settings get ``S`` shots drawn from their outcome law; every
    coefficient pools every compatible shot.
    """
    n = state.n_qubits
    if n > QWC_MAX_QUBITS:
        raise ValueError(f"QWC enumerates 3**n settings; n={n} exceeds {QWC_MAX_QUBITS}")
    gen, _ = _rng(rng)
    hist = _qwc_histograms(state, plan.shots, gen, size)
    sums = qwc_pool(hist)
    mean = sums / qwc_contributing_shots(n, plan.shots)
    y = (mean - state.coefficients) / state.dim
    y[:, 0] = 0.0
    return y


def sample_qwc(state: StateModel, plan: ShotPlan, rng) -> ExcessSample:
    gen, seed = _rng(rng)
    y = sample_qwc_many(state, plan, gen, 1)[0].copy()
    return _finish(y, protocol="qwc", shots=plan.shots, seed=seed)


# -- Gaussian ------------------------------------------------------------


def sample_surrogate(model, rng) -> ExcessSample:
    """``y ~ N(0, Sigma)`` for a :class:`~pauli_rmt.covariance.CovarianceModel`."""
    gen, seed = _rng(rng)
    root = model.sqrt_factor()
    z = gen.standard_normal(root.shape[-1])
    y = root * z if root.ndim == 1 else root @ z
    return _finish(np.array(y, dtype=float), protocol="surrogate", shots=model.shots, seed=seed)


def sample_gue(dim: int, sigma2: float, rng) -> np.ndarray:
    """GUE matrix: diagonal ``N(0, s2)``, off-diagonal real and imaginary parts ``N(0, s2/2)``."""
    if dim < 1 or sigma2 <= 0:
        raise ValueError("need dim >= 1 and sigma2 > 0")
    gen, _ = _rng(rng)
    g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    # (g + g^H)/2 has off-diagonal parts of variance 1/2 and real diagonal of variance 1
    h = np.sqrt(sigma2) * 0.5 * (g + g.conj().T)
    np.fill_diagonal(h, np.sqrt(sigma2) * gen.standard_normal(dim))
    return h
