"""Seeded, replicated experiments with aggregation and persistence."""

from __future__ import annotations

import csv
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .analytics import predict, predict_gue, rephys_excess, rephysicalize
from .covariance import DENSE_MAX_QUBITS, closed_form_vbar, naive_variances, qwc_sigma
from .protocols import (
    ShotPlan,
    replication_rng,
    replication_seed,
    sample_gue,
    sample_naive,
    sample_qwc,
    sample_surrogate,
)
from .spectral import SpectralMeasure, semicircle_distance, SemicircleLaw, trace_norm
from .states import build_state, density_matrix

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "Aggregate",
    "ConfigError",
    "PersistError",
    "aggregate",
    "run_experiment",
    "persist",
    "load_json",
    "load_csv",
    "default_filename",
    "QWC_SHOT_MAX_QUBITS",
]

PROTOCOLS = ("naive", "qwc", "surrogate", "gue")
OUTPUTS = ("trace_norms", "spectra", "covariance", "rephys")
QWC_SHOT_MAX_QUBITS = 6


class ConfigError(ValueError):
    """Invalid or out-of-guard experiment configuration."""


class PersistError(OSError):
    """Reading or writing a result file failed."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One replicated experiment.

    ``protocol`` is ``naive`` or ``qwc`` (with ``mode`` ``shots`` or
    ``surrogate``), ``surrogate`` (Gaussian with the covariance of ``base``),
    or ``gue`` (GUE with per-entry variance ``sigma2``, defaulting to
    ``vbar * D`` of ``base``).  QWC shot sampling is limited to
    ``QWC_SHOT_MAX_QUBITS`` unless ``allow_large``; beyond it the default mode
    is the surrogate.
    """

    state: str
    protocol: str
    n_qubits: int
    shots: int = 10_000
    replications: int = 100
    master_seed: int = 0
    outputs: tuple = ("trace_norms",)
    mode: str | None = None
    sigma2: float | None = None
    base: str = "naive"
    allow_large: bool = False

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.n_qubits < 1:
            raise ConfigError("n_qubits must be >= 1")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.mode not in (None, "shots", "surrogate"):
            raise ConfigError(f"mode must be shots or surrogate, got {self.mode!r}")
        if self.base not in ("naive", "qwc"):
            raise ConfigError("base must be naive or qwc")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ConfigError(f"unknown outputs {sorted(bad)}")
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")
        if self.sampling == "qwc-shots" and self.n_qubits > QWC_SHOT_MAX_QUBITS and not self.allow_large:
            raise ConfigError(
                f"QWC shot sampling above N={QWC_SHOT_MAX_QUBITS} needs allow_large"
            )
        if "rephys" in self.outputs and self.sampling.startswith("gue"):
            raise ConfigError("GUE samples are not traceless; rephys is undefined")

    @property
    def sampling(self) -> str:
        """Resolved sampler: ``naive-shots``, ``qwc-dense`` ... or ``gue``."""
        if self.protocol == "gue":
            return "gue"
        if self.protocol == "surrogate":
            proto, mode = self.base, "surrogate"
        else:
            proto = self.protocol
            mode = self.mode
            if mode is None:
                mode = "surrogate" if proto == "qwc" and self.n_qubits > QWC_SHOT_MAX_QUBITS else "shots"
        if mode == "shots":
            return f"{proto}-shots"
        if proto == "naive":
            return "naive-diagonal"
        return "qwc-dense" if self.n_qubits <= DENSE_MAX_QUBITS else "gue-vbar"

    @property
    def predicted_protocol(self) -> str:
        if self.protocol in ("naive", "qwc"):
            return self.protocol
        return self.base

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


class Aggregate(NamedTuple):
    mean: float
    se_mean: float
    variance: float
    se_variance: float | None


def aggregate(values) -> Aggregate:
    """Mean, its standard error, unbiased variance, and a jackknife SE of the variance.

    Sums run in the given order with ``math.fsum``.
    """
    x = [float(v) for v in values]
    n = len(x)
    if n < 2:
        raise ValueError("aggregate needs at least 2 values")
    mean = math.fsum(x) / n
    dev = [v - mean for v in x]
    ss = math.fsum(e * e for e in dev)
    var = ss / (n - 1)
    se_mean = math.sqrt(var / n)
    if n < 3:
        return Aggregate(mean, se_mean, var, None)
    # leave-one-out sum of squares: ss - e_i**2 * n / (n - 1)
    loo = [max(ss - e * e * n / (n - 1), 0.0) / (n - 2) for e in dev]
    loo_mean = math.fsum(loo) / n
    se_var = math.sqrt((n - 1) / n * math.fsum((v - loo_mean) ** 2 for v in loo))
    return Aggregate(mean, se_mean, var, se_var)


@dataclass(eq=True)
class ExperimentResult:
    config: ExperimentConfig
    sampling: str
    seeds: list
    trace_norms: list
    min_eigenvalues: list
    max_eigenvalues: list
    mean: float | None = None
    se_mean: float | None = None
    variance: float | None = None
    se_variance: float | None = None
    prediction: dict | None = None
    prediction_leading: dict | None = None
    rephys_excess: list | None = None
    rephys_error: list | None = None
    bound_checks: dict = field(default_factory=dict)
    covariance_stats: dict | None = None
    spectrum_histogram: dict | None = None

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["config"] = self.config.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        d = dict(d)
        d["config"] = ExperimentConfig.from_dict(d["config"])
        return cls(**d)


# -- execution -----------------------------------------------------------


@lru_cache(maxsize=8)
def _context(config: ExperimentConfig):
    # rebuilt once per process; configs are hashable
    kind = config.sampling
    n = config.n_qubits
    d = 2**n
    if kind == "gue" and config.sigma2 is not None:
        state = None
    else:
        state = build_state(config.state, n)
    plan = ShotPlan(config.shots)
    if kind == "naive-shots":
        draw = lambda rng: sample_naive(state, plan, rng).matrix
    elif kind == "qwc-shots":
        draw = lambda rng: sample_qwc(state, plan, rng).matrix
    elif kind == "naive-diagonal":
        model = naive_variances(state, config.shots)
        draw = lambda rng: sample_surrogate(model, rng).matrix
    elif kind == "qwc-dense":
        model = qwc_sigma(state, config.shots)
        draw = lambda rng: sample_surrogate(model, rng).matrix
    else:
        if config.sigma2 is not None:
            s2 = config.sigma2
        else:
            proto = "qwc" if kind == "gue-vbar" else config.base
            s2 = closed_form_vbar(proto, state, config.shots) * d
        draw = lambda rng: sample_gue(d, s2, rng)
    rho = density_matrix(state) if "rephys" in config.outputs else None
    return state, draw, rho


def _replicate(config: ExperimentConfig, index: int) -> dict:
    _, draw, rho = _context(config)
    rng = replication_rng(config.master_seed, index)
    delta = draw(rng)
    evals = np.linalg.eigvalsh(delta)
    out = {
        "seed": replication_seed(config.master_seed, index),
        "trace_norm": float(np.sum(np.abs(evals))),
        "min": float(evals[0]),
        "max": float(evals[-1]),
    }
    if rho is not None:
        est = rho + delta
        out["rephys_excess"] = rephys_excess(est)
        projected = rephysicalize(est)
        out["rephys_error"] = float(np.sum(np.abs(np.linalg.eigvalsh(projected - rho))))
    if "spectra" in config.outputs:
        out["spectrum"] = evals
    return out


def _job(args):
    return _replicate(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run all replications (optionally in worker processes) and aggregate in index order."""
    jobs = [(config, i) for i in range(config.replications)]
    if workers > 1 and config.replications > 1:
        chunk = max(1, config.replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_job, jobs, chunksize=chunk))
    else:
        reps = [_job(j) for j in jobs]

    norms = [r["trace_norm"] for r in reps]
    result = ExperimentResult(
        config=config,
        sampling=config.sampling,
        seeds=[r["seed"] for r in reps],
        trace_norms=norms,
        min_eigenvalues=[r["min"] for r in reps],
        max_eigenvalues=[r["max"] for r in reps],
    )
    if len(norms) >= 2:
        agg = aggregate(norms)
        result.mean, result.se_mean, result.variance, result.se_variance = agg
    else:
        result.mean = norms[0]

    pred = _prediction(config)
    result.prediction = pred.to_dict() if pred is not None else None
    if config.protocol != "gue":
        result.prediction_leading = predict(
            config.predicted_protocol, None, config.n_qubits, config.shots, mode="leading"
        ).to_dict()

    if "rephys" in config.outputs:
        result.rephys_excess = [r["rephys_excess"] for r in reps]
        result.rephys_error = [r["rephys_error"] for r in reps]
        two_r = 2.0 * pred.radius
        mean_before = math.fsum(norms) / len(norms)
        mean_after = math.fsum(result.rephys_error) / len(norms)
        result.bound_checks = {
            "two_radius": two_r,
            "rephys_within_2R": sum(v <= two_r for v in result.rephys_excess),
            "replications": len(norms),
            "mean_error_before": mean_before,
            "mean_error_after": mean_after,
            "relative_change": (mean_after - mean_before) / mean_before,
        }
    if "covariance" in config.outputs and config.sampling != "gue":
        result.covariance_stats = _covariance_stats(config)
    if "spectra" in config.outputs and pred is not None:
        pooled = SpectralMeasure(np.concatenate([r["spectrum"] for r in reps]))
        law = SemicircleLaw(pred.radius)
        edges = np.linspace(-1.5 * law.radius, 1.5 * law.radius, 61)
        counts, _ = np.histogram(pooled.atoms, bins=edges)
        result.spectrum_histogram = {
            "edges": edges.tolist(),
            "counts": counts.tolist(),
            "semicircle_radius": law.radius,
            "semicircle_w1": semicircle_distance(pooled, law),
        }
    return result


def _prediction(config: ExperimentConfig):
    kind = config.sampling
    if kind == "gue" and config.sigma2 is not None:
        return predict_gue(2**config.n_qubits, config.sigma2)
    state = build_state(config.state, config.n_qubits)
    return predict(config.predicted_protocol, state, config.n_qubits, config.shots)


def _covariance_stats(config: ExperimentConfig) -> dict:
    from .covariance import var_stats

    state = build_state(config.state, config.n_qubits)
    if config.predicted_protocol == "naive":
        model = naive_variances(state, config.shots)
    else:
        model = qwc_sigma(state, config.shots)
    return asdict(var_stats(model))


# -- persistence ---------------------------------------------------------


def _slug(text: str) -> str:
    m = re.fullmatch(r"dense\((.+)\)", text, flags=re.IGNORECASE)
    if m:
        text = "dense-" + Path(m.group(1)).stem
    return re.sub(r"[^A-Za-z0-9_-]+", "", text) or "state"


def default_filename(config: ExperimentConfig, fmt: str) -> str:
    return f"{config.protocol}_{_slug(config.state)}_N{config.n_qubits}_S{config.shots}_seed{config.master_seed}.{fmt}"


_CSV_FIELDS = ["replication_index", "seed", "trace_norm", "min_eigenvalue", "max_eigenvalue"]


def persist(result: ExperimentResult, path, fmt: str = "json") -> Path:
    """Write ``result`` as JSON (everything) or CSV (one row per replication)."""
    path = Path(path)
    try:
        if fmt == "json":
            path.write_text(json.dumps(result.to_dict(), indent=2) + "\n")
        elif fmt == "csv":
            header = list(_CSV_FIELDS)
            if result.rephys_excess is not None:
                header.append("rephys_excess")
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                for i, seed in enumerate(result.seeds):
                    row = [i, seed] + [
                        f"{v:.17g}"
                        for v in (result.trace_norms[i], result.min_eigenvalues[i], result.max_eigenvalues[i])
                    ]
                    if result.rephys_excess is not None:
                        row.append(f"{result.rephys_excess[i]:.17g}")
                    w.writerow(row)
        else:
            raise ValueError(f"format must be csv or json, got {fmt!r}")
    except OSError as exc:
        raise PersistError(f"{path}: {exc.strerror or exc}") from exc
    return path


def load_json(path) -> ExperimentResult:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise PersistError(f"{path}: {exc.strerror or exc}") from exc
    return ExperimentResult.from_dict(data)


def load_csv(path) -> dict:
    """Columns of a CSV result as lists (ints for index/seed, floats otherwise)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise PersistError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        return {}
    cols = {k: [r[k] for r in rows] for k in rows[0]}
    return {k: [int(v) for v in vs] if k in ("replication_index", "seed") else [float(v) for v in vs]
            for k, vs in cols.items()}
