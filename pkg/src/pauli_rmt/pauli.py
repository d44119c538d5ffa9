"""Pauli-string algebra and the fast map between coefficient vectors and matrices.

Conventions
-----------
Site ``k`` of an ``n``-qubit string is stored in bit ``k`` of two masks: the
X-part ``x_bits`` and the Z-part ``z_bits`` (``Y`` sets both).  The canonical
index of a string is ``j = sum_k 4**k * digit_k`` with per-site digits
``I=0, X=1, Y=2, Z=3``, so index 0 is the all-identity string.

Matrices are little-endian: site ``k`` acts on bit ``k`` of the computational
basis index.  Text labels are written in tensor-product order, leftmost
character = highest site, so ``PauliString.from_label("XZ").to_matrix()``
equals ``kron(X, Z)``.

A coefficient vector ``a`` of length ``4**n`` always represents
``sum_j a[j] * P_j`` with no ``1/D`` prefactor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PauliString",
    "DimensionError",
    "DomainError",
    "HermiticityError",
    "weight",
    "multiply",
    "compatible",
    "joint_weight",
    "synthesize",
    "analyze",
    "pauli_masks",
    "pauli_weights",
    "index_from_masks",
    "product_phase_exponent",
    "check_hermitian",
]

_LETTERS = "IXYZ"
# digit -> (x, z) and back
_DIGIT_X = (0, 1, 1, 0)
_DIGIT_Z = (0, 0, 1, 1)
_XZ_DIGIT = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASES = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands live on different numbers of qubits or have the wrong size."""


class DomainError(ValueError):
    """Operation undefined for the given operands."""


class HermiticityError(ValueError):
    """Matrix is not Hermitian to the required tolerance."""


@dataclass(frozen=True)
class PauliString:
    """An ``n``-qubit Pauli string without phase."""

    n_qubits: int
    x_bits: int
    z_bits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError("mask has bits set beyond n_qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.upper()
        n = len(label)
        x = z = 0
        for pos, ch in enumerate(label):
            if ch not in _LETTERS:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}")
            site = n - 1 - pos
            d = _LETTERS.index(ch)
            x |= _DIGIT_X[d] << site
            z |= _DIGIT_Z[d] << site
        return cls(n, x, z)

    @classmethod
    def from_index(cls, index: int, n_qubits: int) -> "PauliString":
        if not 0 <= index < 4**n_qubits:
            raise ValueError(f"index {index} out of range for {n_qubits} qubits")
        x = z = 0
        for site in range(n_qubits):
            d = (index >> (2 * site)) & 3
            x |= _DIGIT_X[d] << site
            z |= _DIGIT_Z[d] << site
        return cls(n_qubits, x, z)

    @property
    def index(self) -> int:
        j = 0
        for site in range(self.n_qubits):
            d = _XZ_DIGIT[((self.x_bits >> site) & 1, (self.z_bits >> site) & 1)]
            j |= d << (2 * site)
        return j

    @property
    def support(self) -> int:
        return self.x_bits | self.z_bits

    def letter(self, site: int) -> str:
        return _LETTERS[_XZ_DIGIT[((self.x_bits >> site) & 1, (self.z_bits >> site) & 1)]]

    @property
    def label(self) -> str:
        return "".join(self.letter(s) for s in reversed(range(self.n_qubits)))

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n`` matrix; intended for small oracles only."""
        out = np.ones((1, 1), dtype=complex)
        for ch in self.label:
            out = np.kron(out, _SINGLE[ch])
        return out

    def __str__(self) -> str:
        return self.label


def _check_same(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise DimensionError(f"qubit mismatch: {p.n_qubits} vs {q.n_qubits}")


def weight(p: PauliString) -> int:
    """Number of non-identity sites."""
    return (p.x_bits | p.z_bits).bit_count()


def product_phase_exponent(x1, z1, x2, z2):
    """Exponent ``e`` (mod 4) with ``P1 P2 = i**e * P(x1^x2, z1^z2)``.

    Works elementwise on integer arrays.  Derived from ``P(x, z) = i**(x.z) X^x Z^z``.
    """
    pc = np.bitwise_count if isinstance(x1, np.ndarray) else _popcount
    e = pc(x1 & z1) + pc(x2 & z2) + 2 * pc(z1 & x2) - pc((x1 ^ x2) & (z1 ^ z2))
    return e % 4


def _popcount(v: int) -> int:
    return int(v).bit_count()


def multiply(p: PauliString, q: PauliString) -> tuple[PauliString, complex]:
    """Return ``(r, phase)`` with ``P_p P_q = phase * P_r``."""
    _check_same(p, q)
    e = product_phase_exponent(p.x_bits, p.z_bits, q.x_bits, q.z_bits)
    r = PauliString(p.n_qubits, p.x_bits ^ q.x_bits, p.z_bits ^ q.z_bits)
    return r, _PHASES[e]


def compatible(p: PauliString, q: PauliString) -> bool:
    """True iff the letters agree wherever both strings are non-identity.

    Equivalently, some full-weight setting in ``{X, Y, Z}^n`` measures both.
    """
    _check_same(p, q)
    overlap = p.support & q.support
    return ((p.x_bits ^ q.x_bits) | (p.z_bits ^ q.z_bits)) & overlap == 0


def joint_weight(p: PauliString, q: PauliString) -> int:
    """Size of the union of supports of two compatible strings.

    ``3**(n - joint_weight)`` is the number of full-weight settings that
    measure both strings.
    """
    if not compatible(p, q):
        raise DomainError(f"{p} and {q} are not measured by a common setting")
    return (p.support | q.support).bit_count()


@lru_cache(maxsize=16)
def _masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(4**n, dtype=np.int64)
    x = np.zeros_like(j)
    z = np.zeros_like(j)
    for site in range(n):
        d = (j >> (2 * site)) & 3
        x |= ((d == 1) | (d == 2)).astype(np.int64) << site
        z |= ((d == 2) | (d == 3)).astype(np.int64) << site
    x.setflags(write=False)
    z.setflags(write=False)
    return x, z


def pauli_masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    """X and Z masks of every string, indexed canonically (read-only arrays)."""
    return _masks(n)


@lru_cache(maxsize=16)
def _weights(n: int) -> np.ndarray:
    x, z = _masks(n)
    w = np.bitwise_count(x | z).astype(np.int64)
    w.setflags(write=False)
    return w


def pauli_weights(n: int) -> np.ndarray:
    """Weight of every string, indexed canonically."""
    return _weights(n)


@lru_cache(maxsize=16)
def _mask_to_index(n: int) -> np.ndarray:
    x, z = _masks(n)
    table = np.empty(4**n, dtype=np.int64)
    table[(x << n) | z] = np.arange(4**n)
    table.setflags(write=False)
    return table


def index_from_masks(x, z, n: int):
    """Canonical index of the string with masks ``(x, z)``; vectorised."""
    return _mask_to_index(n)[(np.asarray(x) << n) | np.asarray(z)]


def _n_from_length(length: int) -> int:
    n = (length.bit_length() - 1) // 2
    if n < 1 or 4**n != length:
        raise DimensionError(f"length {length} is not 4**n for n >= 1")
    return n


def synthesize(a) -> np.ndarray:
    """Matrix ``sum_j a[j] P_j`` via ``n`` radix-4 butterfly stages.

    Each stage mixes one site's four Pauli digits into the four entries of a
    2x2 block, so the cost is O(n 4**n) and no Pauli matrix is formed.
    """
    a = np.asarray(a, dtype=float)
    n = _n_from_length(a.size)
    t = a.astype(complex)
    # axis i of the (4,)*n view is site n-1-i; each stage maps digit -> 2r+c.
    for i in range(n):
        v = t.reshape(4**i, 4, 4 ** (n - 1 - i))
        aI, aX, aY, aZ = v[:, 0], v[:, 1], v[:, 2], v[:, 3]
        iy = 1j * aY
        t = np.stack((aI + aZ, aX - iy, aX + iy, aI - aZ), axis=1)
    return _pairs_to_matrix(t, n)


def analyze(h, *, tol: float = 1e-10) -> np.ndarray:
    """Coefficients ``a[j] = Tr(h P_j) / D``; exact inverse of :func:`synthesize`."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError("expected a square matrix")
    n = h.shape[0].bit_length() - 1
    if n < 1 or 2**n != h.shape[0]:
        raise DimensionError(f"dimension {h.shape[0]} is not 2**n")
    check_hermitian(h, tol)
    t = _matrix_to_pairs(h, n)
    for i in range(n):
        v = t.reshape(4**i, 4, 4 ** (n - 1 - i))
        h00, h01, h10, h11 = v[:, 0], v[:, 1], v[:, 2], v[:, 3]
        t = 0.5 * np.stack((h00 + h11, h01 + h10, 1j * (h01 - h10), h00 - h11), axis=1)
    return np.ascontiguousarray(t.real).reshape(-1)


def _pairs_to_matrix(t: np.ndarray, n: int) -> np.ndarray:
    d = 2**n
    # (r_{n-1}, c_{n-1}, ..., r_0, c_0) -> rows then columns
    t = t.reshape((2,) * (2 * n))
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return np.ascontiguousarray(t.transpose(order)).reshape(d, d)


def _matrix_to_pairs(h: np.ndarray, n: int) -> np.ndarray:
    t = h.reshape((2,) * (2 * n))
    order = [ax for site in range(n) for ax in (site, n + site)]
    return np.ascontiguousarray(t.transpose(order)).reshape(-1)


def check_hermitian(h: np.ndarray, tol: float = 1e-10) -> None:
    resid = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if resid > tol:
        raise HermiticityError(f"hermiticity residual {resid:.3g} exceeds {tol:g}")
