"""Closed-form error predictions, sample complexity, and rephysicalisation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import binomtest

from .covariance import closed_form_vbar
from .pauli import HermiticityError, check_hermitian
from .states import StateModel

__all__ = [
    "Prediction",
    "ComplexityEstimate",
    "FailureEstimate",
    "predict",
    "predict_gue",
    "leading_vbar",
    "markov_shots",
    "empirical_failure_prob",
    "water_fill",
    "rephysicalize",
    "rephys_excess",
    "TRACE_TOL",
]

TRACE_TOL = 1e-8


@dataclass(frozen=True)
class Prediction:
    """Semicircle prediction for the trace-norm error.

    ``mean = 4 D R / (3 pi)`` and ``var = R**2 / pi**2``.
    """

    protocol: str
    n_qubits: int
    shots: int
    radius: float
    mean_trace_norm: float
    var_trace_norm: float
    mode: str = "exact"

    def to_dict(self) -> dict:
        return asdict(self)


def _from_radius(protocol, n, shots, radius, mode) -> Prediction:
    d = 2**n
    return Prediction(
        protocol, n, shots, radius, 4.0 * d * radius / (3.0 * math.pi), radius**2 / math.pi**2, mode
    )


def leading_vbar(protocol: str, n: int, shots: int) -> float:
    """Leading-order ``vbar``: ``1/(S D**2)`` (naive) or ``(5/24)**n / S`` (QWC)."""
    if protocol == "naive":
        return 1.0 / (shots * 4**n)
    if protocol == "qwc":
        return (5.0 / 24.0) ** n / shots
    raise ValueError(f"unknown protocol {protocol!r}")


def predict(protocol: str, state: StateModel | None, n_qubits: int, shots: int, mode: str = "exact") -> Prediction:
    """Mean and variance of ``||Delta rho||_Tr``.

    ``mode="exact"`` takes ``R = 2 D sqrt(vbar)`` with the state's exact
    ``vbar``; ``mode="leading"`` uses the state-independent leading order,
    ``R = 2/sqrt(S)`` (naive) or ``R = 2 (5/6)**(n/2) / sqrt(S)`` (QWC).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    d = 2**n_qubits
    if mode == "exact":
        if state is None:
            raise ValueError("exact mode needs a state")
        if state.n_qubits != n_qubits:
            raise ValueError("state and n_qubits disagree")
        vbar = closed_form_vbar(protocol, state, shots)
    elif mode == "leading":
        vbar = leading_vbar(protocol, n_qubits, shots)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _from_radius(protocol, n_qubits, shots, 2.0 * d * math.sqrt(vbar), mode)


def predict_gue(dim: int, sigma2: float) -> Prediction:
    """Prediction for a GUE matrix with per-entry variance ``sigma2`` (``R = 2 sigma sqrt(D)``)."""
    n = dim.bit_length() - 1
    return _from_radius("gue", n, 0, 2.0 * math.sqrt(sigma2 * dim), "exact")


@dataclass(frozen=True)
class ComplexityEstimate:
    shots_per_setting: float
    total_copies: float
    epsilon: float
    failure_prob: float
    n_qubits: int


def markov_shots(epsilon: float, p: float, n_qubits: int) -> ComplexityEstimate:
    """Shots per QWC setting so that Markov's inequality caps ``P[err >= eps]`` at ``p``.

    ``S = (8 / (3 pi eps p))**2 (10/3)**n`` and ``total = 3**n S``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < p < 1:
        raise ValueError("failure probability must lie in (0, 1)")
    s = (8.0 / (3.0 * math.pi * epsilon * p)) ** 2 * (10.0 / 3.0) ** n_qubits
    return ComplexityEstimate(s, 3.0**n_qubits * s, epsilon, p, n_qubits)


@dataclass(frozen=True)
class FailureEstimate:
    probability: float
    ci_low: float
    ci_high: float
    markov_bound: float
    pz_floor: float
    epsilon: float
    replications: int

    def to_dict(self) -> dict:
        return asdict(self)


def empirical_failure_prob(trace_norms, epsilon: float, *, confidence: float = 0.95,
                           mean: float | None = None, var: float | None = None) -> FailureEstimate:
    """Fraction of replications with error ``>= epsilon`` and its bracketing bounds.

    The Markov cap ``E/eps`` and the Paley-Zygmund floor
    ``(1 - eps/E)**2 / (1 + var/E**2)`` use the sample moments unless
    ``mean``/``var`` are given.
    """
    x = np.asarray(trace_norms, dtype=float)
    n = x.size
    if n < 30:
        raise ValueError(f"need at least 30 replications, got {n}")
    k = int(np.sum(x >= epsilon))
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    e = float(np.mean(x)) if mean is None else mean
    v = float(np.var(x, ddof=1)) if var is None else var
    markov = 1.0 if epsilon <= 0 else min(1.0, e / epsilon)
    floor = 0.0 if epsilon >= e else (1.0 - epsilon / e) ** 2 / (1.0 + v / e**2)
    return FailureEstimate(k / n, float(ci.low), float(ci.high), markov, floor, float(epsilon), n)


def water_fill(eigs) -> np.ndarray:
    """Truncate-and-shift a unit-trace spectrum onto the probability simplex.

    Ascending pass: the smallest remaining eigenvalue is zeroed while it stays
    negative after receiving its share of the accumulated negative mass; the
    accumulated mass is then spread uniformly over the survivors.  Output keeps
    the input order.
    """
    mu = np.asarray(eigs, dtype=float)
    order = np.argsort(mu, kind="stable")
    out = np.zeros_like(mu)
    acc = 0.0
    n = mu.size
    i = 0
    while i < n and mu[order[i]] + acc / (n - i) < 0:
        acc += mu[order[i]]
        i += 1
    if i < n:
        out[order[i:]] = mu[order[i:]] + acc / (n - i)
    return out


def _check_estimate(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    check_hermitian(h, 1e-10)
    tr = np.trace(h).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise HermiticityError(f"trace {tr!r} deviates from 1 by more than {TRACE_TOL:g}")
    return 0.5 * (h + h.conj().T)


def _project(h):
    h = _check_estimate(h)
    evals, evecs = np.linalg.eigh(h)
    return h, evals, water_fill(evals), evecs


def rephysicalize(h) -> np.ndarray:
    """Closest physical state in the eigenbasis of ``h`` (truncate-and-shift)."""
    h, evals, fixed, evecs = _project(h)
    if evals[0] >= 0:
        return h
    return (evecs * fixed) @ evecs.conj().T


def rephys_excess(h) -> float:
    """``||Pi(h) - h||_Tr``, computed in the shared eigenbasis."""
    _, evals, fixed, _ = _project(h)
    return float(np.sum(np.abs(fixed - evals)))
