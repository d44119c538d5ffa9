"""Ontological states and their Pauli coefficients and outcome laws."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import matrixio
from .pauli import PauliString, analyze, check_hermitian, pauli_masks

__all__ = [
    "StateModel",
    "StateError",
    "SettingDistribution",
    "build_state",
    "pauli_coeffs",
    "purity",
    "density_matrix",
    "setting_distribution",
    "measurement_rotation",
]

PSD_TOL = 1e-8
TRACE_TOL = 1e-10


class StateError(ValueError):
    """Unparseable or aphysical state description."""


@dataclass(frozen=True, eq=False)
class StateModel:
    """A density operator on ``n_qubits`` qubits.

    ``variant`` is one of ``"identity"``, ``"ghz"``, ``"pure"`` or ``"dense"``;
    ``data`` holds the amplitude vector (pure) or density matrix (dense).
    """

    variant: str
    n_qubits: int
    data: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @classmethod
    def identity(cls, n: int) -> "StateModel":
        return cls("identity", n, name="identity")

    @classmethod
    def ghz(cls, n: int) -> "StateModel":
        return cls("ghz", n, name="ghz")

    @classmethod
    def pure(cls, amplitudes, name: str = "pure") -> "StateModel":
        psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = psi.size.bit_length() - 1
        if n < 1 or psi.size != 2**n:
            raise StateError(f"amplitude vector length {psi.size} is not 2**n")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-12:
            raise StateError(f"amplitudes have norm {norm!r}, expected 1")
        psi = psi.copy()
        psi.setflags(write=False)
        return cls("pure", n, psi, name=name)

    @classmethod
    def dense(cls, rho, name: str = "dense") -> "StateModel":
        rho = np.array(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError("density matrix must be square")
        n = rho.shape[0].bit_length() - 1
        if n < 1 or rho.shape[0] != 2**n:
            raise StateError(f"dimension {rho.shape[0]} is not 2**n")
        try:
            check_hermitian(rho, 1e-10)
        except ValueError as exc:
            raise StateError(str(exc)) from None
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} differs from 1")
        evals, evecs = np.linalg.eigh(rho)
        if evals[0] < -PSD_TOL:
            raise StateError(f"minimum eigenvalue {evals[0]:.3g} is below -{PSD_TOL:g}")
        if evals[0] < 0:
            evals = np.clip(evals, 0.0, None)
            evals /= evals.sum()
            rho = (evecs * evals) @ evecs.conj().T
        rho.setflags(write=False)
        return cls("dense", n, rho, name=name)

    @cached_property
    def coefficients(self) -> np.ndarray:
        c = _coefficients(self)
        c.setflags(write=False)
        return c


def build_state(spec: str, n_qubits: int) -> StateModel:
    """Parse ``identity``, ``ghz``, ``random-pure(seed)`` or ``dense(path)``."""
    text = spec.strip()
    if n_qubits < 1:
        raise StateError("n_qubits must be positive")
    low = text.lower()
    if low == "identity":
        return StateModel.identity(n_qubits)
    if low == "ghz":
        return StateModel.ghz(n_qubits)
    m = re.fullmatch(r"random-pure\((\d+)\)", low)
    if m:
        rng = np.random.default_rng(int(m.group(1)))
        psi = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
        return StateModel.pure(psi / np.linalg.norm(psi), name=f"random-pure{m.group(1)}")
    m = re.fullmatch(r"dense\((.+)\)", text, flags=re.IGNORECASE)
    if m:
        path = Path(m.group(1))
        rho, header = matrixio.read_matrix(path)
        state = StateModel.dense(rho, name=path.stem)
        if state.n_qubits != n_qubits:
            raise StateError(f"{path} holds {state.n_qubits} qubits, expected {n_qubits}")
        return state
    raise StateError(f"unrecognised state descriptor {spec!r}")


def density_matrix(s: StateModel) -> np.ndarray:
    d = s.dim
    if s.variant == "identity":
        return np.eye(d, dtype=complex) / d
    if s.variant == "ghz":
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = rho[0, -1] = rho[-1, 0] = rho[-1, -1] = 0.5
        return rho
    if s.variant == "pure":
        return np.outer(s.data, s.data.conj())
    return np.array(s.data)


def _coefficients(s: StateModel) -> np.ndarray:
    n = s.n_qubits
    if s.variant == "identity":
        c = np.zeros(4**n)
        c[0] = 1.0
        return c
    if s.variant == "ghz":
        return _ghz_coefficients(n)
    return analyze(density_matrix(s)) * s.dim


def _ghz_coefficients(n: int) -> np.ndarray:
    x, z = pauli_masks(n)
    full = (1 << n) - 1
    c = np.zeros(4**n)
    # diagonal strings: <0|P|0> + <1|P|1> over 2
    zonly = x == 0
    c[zonly] = (np.bitwise_count(z[zonly]) % 2 == 0).astype(float)
    # all-{X,Y} strings: Re(i**nY)
    flip = x == full
    ny = np.bitwise_count(z[flip])
    c[flip] = np.where(ny % 2 == 0, np.where(ny % 4 == 0, 1.0, -1.0), 0.0)
    return c


def pauli_coeffs(s: StateModel) -> np.ndarray:
    """All ``c_j = Tr(rho P_j)``; ``c_0 = 1``."""
    return np.array(s.coefficients)


def purity(s: StateModel) -> float:
    if s.variant == "identity":
        return 1.0 / s.dim
    if s.variant in ("ghz", "pure"):
        return 1.0
    rho = s.data
    return float(np.real(np.vdot(rho, rho)))


@dataclass(frozen=True, eq=False)
class SettingDistribution:
    """Outcome law of one full-weight setting.

    ``probabilities[b]`` is the chance of outcome bitstring ``b``, where bit
    ``k`` set means site ``k`` returned ``-1``.
    """

    setting: PauliString
    probabilities: np.ndarray


_ROT = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),
    "Z": np.eye(2, dtype=complex),
}


def measurement_rotation(letter: str) -> np.ndarray:
    """Unitary taking the ``+1``/``-1`` eigenvectors of ``letter`` to ``|0>``/``|1>``."""
    return _ROT[letter]


def _apply_sites(t: np.ndarray, mats: list[np.ndarray], n: int, offset: int = 0) -> np.ndarray:
    # t carries 2-dim axes; axis offset+i is site n-1-i
    for i in range(n):
        u = mats[n - 1 - i]
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [offset + i])), 0, offset + i)
    return t


def setting_distribution(s: StateModel, setting) -> SettingDistribution:
    """Probabilities of every outcome bitstring when each site is measured in ``setting``."""
    if isinstance(setting, str):
        setting = PauliString.from_label(setting)
    n = s.n_qubits
    if setting.n_qubits != n:
        raise StateError("setting and state have different qubit counts")
    if (setting.x_bits | setting.z_bits) != (1 << n) - 1:
        raise StateError(f"setting {setting} is not full weight")
    d = s.dim
    mats = [measurement_rotation(setting.letter(k)) for k in range(n)]
    if s.variant == "identity":
        p = np.full(d, 1.0 / d)
    elif s.variant in ("ghz", "pure"):
        if s.variant == "ghz":
            # rotated |0..0> + |1..1>, each a product vector
            a0 = np.ones(1, dtype=complex)
            a1 = np.ones(1, dtype=complex)
            for k in reversed(range(n)):
                a0 = np.kron(a0, mats[k][:, 0])
                a1 = np.kron(a1, mats[k][:, 1])
            amp = (a0 + a1) / np.sqrt(2)
        else:
            t = s.data.reshape((2,) * n)
            amp = _apply_sites(t, mats, n).reshape(d)
        p = np.abs(amp) ** 2
    else:
        t = s.data.reshape((2,) * (2 * n))
        t = _apply_sites(t, mats, n, 0)
        t = _apply_sites(t, [m.conj() for m in mats], n, n)
        p = np.real(np.diagonal(t.reshape(d, d))).copy()
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return SettingDistribution(setting, p)
