"""Analytic covariance of the excess coefficients and its eigenvalue statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import index_from_masks, pauli_masks, pauli_weights, product_phase_exponent
from .states import StateModel, purity

__all__ = [
    "CovarianceModel",
    "ModelError",
    "CapabilityError",
    "VarStats",
    "naive_variances",
    "qwc_variances",
    "qwc_sigma",
    "trial_ratio",
    "var_stats",
    "closed_form_vbar",
    "DENSE_MAX_QUBITS",
    "EIG_MAX_SIZE",
]

DENSE_MAX_QUBITS = 7
EIG_MAX_SIZE = 4096
_NEG_TOL = 1e-10


class ModelError(ValueError):
    """Covariance matrix is indefinite beyond round-off."""


class CapabilityError(ValueError):
    """Requested object is too large to store."""


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Covariance of ``y``: either a diagonal ``v`` or a dense ``Sigma``."""

    kind: str  # "diagonal" | "dense"
    n_qubits: int
    shots: int
    values: np.ndarray  # v (diagonal) or Sigma (dense)

    def __post_init__(self):
        if self.kind == "diagonal":
            if np.any(self.values < 0):
                raise ModelError("negative variance in diagonal model")
        elif self.kind == "dense":
            m = self.values
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ModelError("dense covariance must be square")
            if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
                raise ModelError("dense covariance is not symmetric")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def diagonal(self) -> np.ndarray:
        return self.values if self.kind == "diagonal" else np.diag(self.values).copy()

    def to_dense(self) -> np.ndarray:
        return np.diag(self.values) if self.kind == "diagonal" else self.values

    def sqrt_factor(self) -> np.ndarray:
        """``L`` with ``L L^T = Sigma`` (a vector of standard deviations when diagonal)."""
        cached = self.__dict__.get("_root")
        if cached is not None:
            return cached
        if self.kind == "diagonal":
            root = np.sqrt(self.values)
        else:
            evals, evecs = np.linalg.eigh(self.values)
            scale = max(np.max(np.abs(evals), initial=0.0), 1e-300)
            if evals[0] < -_NEG_TOL * scale:
                raise ModelError(f"covariance has eigenvalue {evals[0]:.3g} (< -1e-10 |Sigma|)")
            root = evecs * np.sqrt(np.clip(evals, 0.0, None))
        object.__setattr__(self, "_root", root)
        return root


def naive_variances(state: StateModel, shots: int) -> CovarianceModel:
    """``v_j = (1 - c_j**2) / (S D**2)`` with ``v_0 = 0``."""
    c = state.coefficients
    v = np.clip(1.0 - c**2, 0.0, None) / (shots * state.dim**2)
    v[0] = 0.0
    return CovarianceModel("diagonal", state.n_qubits, shots, v)


def qwc_variances(state: StateModel, shots: int) -> CovarianceModel:
    """Diagonal of the QWC covariance: ``(1 - c_j**2) / (S 3**(n - w_j) D**2)``."""
    n = state.n_qubits
    c = state.coefficients
    v = np.clip(1.0 - c**2, 0.0, None) / (shots * 3.0 ** (n - pauli_weights(n)) * state.dim**2)
    v[0] = 0.0
    return CovarianceModel("diagonal", n, shots, v)


def trial_ratio(i: int, j: int, n: int, shots: int) -> float:
    """Shared-shot ratio ``M_ij / (M_i M_j)`` for strings ``i`` and ``j``."""
    x, z = pauli_masks(n)
    w = pauli_weights(n)
    k = _trial_ratio(x[i], z[i], w[i], x[j], z[j], w[j], n)
    return float(k) / shots


def _trial_ratio(xi, zi, wi, xj, zj, wj, n):
    si, sj = xi | zi, xj | zj
    clash = ((xi ^ xj) | (zi ^ zj)) & si & sj
    union = np.bitwise_count(np.asarray(si | sj)).astype(np.int64)
    k = 3.0 ** (np.asarray(wi) + np.asarray(wj) - union - n)
    return np.where(clash == 0, k, 0.0)


def qwc_sigma(state: StateModel, shots: int, *, block: int = 256) -> CovarianceModel:
    """QWC covariance ``Sigma_ij = k_ij [Tr(rho P_i P_j) - c_i c_j] / D**2``.

    The maximally mixed state has ``Tr(rho P_i P_j) = delta_ij``, so its
    covariance is returned as an exact diagonal model without the dense
    ``4**n x 4**n`` allocation.  Everything else is dense and limited to
    ``n <= DENSE_MAX_QUBITS``.
    """
    n = state.n_qubits
    if state.variant == "identity":
        return qwc_variances(state, shots)
    if n > DENSE_MAX_QUBITS:
        raise CapabilityError(f"dense Sigma needs n <= {DENSE_MAX_QUBITS}, got {n}")
    size = 4**n
    c = state.coefficients
    x, z = pauli_masks(n)
    w = pauli_weights(n)
    d2 = float(state.dim**2)
    sigma = np.empty((size, size))
    for start in range(0, size, block):
        rows = slice(start, min(size, start + block))
        xi, zi, wi = x[rows, None], z[rows, None], w[rows, None]
        k = _trial_ratio(xi, zi, wi, x[None], z[None], w[None], n)
        shared = k != 0
        expo = product_phase_exponent(xi, zi, x[None], z[None])
        # compatible strings agree on their overlap, so P_i P_j = +P_r
        if np.any(expo[shared] != 0):
            raise AssertionError("compatible Pauli pair with non-trivial product phase")
        prod = c[index_from_masks(xi ^ x[None], zi ^ z[None], n)]
        sigma[rows] = k * (prod - c[rows, None] * c[None]) / (shots * d2)
    sigma[0, :] = 0.0
    sigma[:, 0] = 0.0
    sigma = 0.5 * (sigma + sigma.T)
    return CovarianceModel("dense", n, shots, sigma)


@dataclass(frozen=True)
class VarStats:
    """Eigenvalue moments of a covariance model.

    ``bound_ratio = D * var_v / vbar`` governs how closely the excess spectrum
    follows the GUE.  ``exact`` is False only when ``var_v`` is an upper bound.
    """

    vbar: float
    var_v: float
    bound_ratio: float
    exact: bool = True
    method: str = "moments"


def _moments(v: np.ndarray, d2: float) -> tuple[float, float]:
    vbar = float(np.sum(v) / d2)
    var = float(np.sum((v - vbar) ** 2) / d2)
    return vbar, var


def var_stats(model: CovarianceModel) -> VarStats:
    """``vbar = sum(v)/D**2``, ``var[v] = sum((v - vbar)**2)/D**2`` over eigenvalues ``v``.

    Dense models up to ``EIG_MAX_SIZE`` are diagonalised.  Larger ones use the
    trace identities ``sum v = Tr Sigma`` and ``sum v**2 = ||Sigma||_F**2``,
    which give the same moments without an eigensolver.
    """
    d = 2**model.n_qubits
    d2 = float(d * d)
    if model.kind == "diagonal":
        vbar, var = _moments(model.values, d2)
        method = "diagonal"
    elif model.size <= EIG_MAX_SIZE:
        vbar, var = _moments(np.linalg.eigvalsh(model.values), d2)
        method = "eigvalsh"
    else:
        vbar = float(np.trace(model.values) / d2)
        var = float(np.sum(model.values**2) / d2 - vbar**2)
        var = max(var, 0.0)
        method = "trace-identity"
    var = max(var, 0.0)
    ratio = d * var / vbar if vbar > 0 else 0.0
    return VarStats(vbar, var, ratio, True, method)


def closed_form_vbar(protocol: str, state: StateModel, shots: int) -> float:
    """Exact mean covariance eigenvalue for ``"naive"`` or ``"qwc"``."""
    d = state.dim
    if protocol == "naive":
        return (d**2 - d * purity(state)) / (shots * d**4)
    if protocol == "qwc":
        n = state.n_qubits
        c = state.coefficients
        w = pauli_weights(n)
        total = np.sum((1.0 - c**2) * 3.0**w)
        return float(total / (shots * d**4 * 3.0**n))
    raise ValueError(f"unknown protocol {protocol!r}")
