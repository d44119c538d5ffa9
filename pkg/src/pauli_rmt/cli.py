"""Command-line entry point: ``pauli-rmt <subcommand> ...``.

Exit status is 0 on success, 1 on a usage or validation error and 2 on an I/O
error.  Simulation files go to ``--out`` or, if that is omitted, to the
directory named by ``$PAULI_RMT_OUTDIR`` (default: the working directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import matrixio
from .analytics import empirical_failure_prob, markov_shots, predict, rephys_excess, rephysicalize
from .covariance import naive_variances, qwc_sigma, var_stats
from .experiments import ExperimentConfig, default_filename, load_csv, load_json, persist, run_experiment
from .experiments import _context as _experiment_context
from .spectral import SemicircleLaw, trace_norm
from .states import build_state, density_matrix

OUTDIR_ENV = "PAULI_RMT_OUTDIR"
OVERLAY_POINTS = 256


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _common(p, *, protocols=("naive", "qwc"), reps=False, seed=False, mode=False):
    p.add_argument("--protocol", choices=protocols, default=protocols[0], help="tomography protocol")
    p.add_argument("--state", default="identity",
                   help="identity | ghz | random-pure(SEED) | dense(PATH)  (default: identity)")
    p.add_argument("-N", "--qubits", type=int, required=True, help="number of qubits")
    p.add_argument("-S", "--shots", type=int, default=10_000, help="shots per setting (default: 10000)")
    if reps:
        p.add_argument("-R", "--reps", type=int, default=100, help="replications (default: 100)")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    if mode:
        p.add_argument("--mode", choices=("shots", "surrogate"), default=None,
                       help="shot-level or Gaussian-surrogate sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauli-rmt", description="Random-matrix analysis of Pauli state tomography.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="replicated experiment, persisted as CSV or JSON")
    _common(p, protocols=("naive", "qwc", "surrogate", "gue"), reps=True, seed=True, mode=True)
    p.add_argument("--base", choices=("naive", "qwc"), default="naive",
                   help="covariance source for surrogate/gue (default: naive)")
    p.add_argument("--sigma2", type=float, default=None, help="GUE per-entry variance")
    p.add_argument("--rephys", action="store_true", help="also record rephysicalisation excess")
    p.add_argument("--spectra", action="store_true", help="attach a pooled spectrum histogram")
    p.add_argument("--covariance", action="store_true", help="attach covariance eigenvalue statistics")
    p.add_argument("--allow-large", action="store_true", help="lift the QWC shot-level qubit guard")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", type=Path, default=None, help="output file or directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes (default: 1)")

    p = sub.add_parser("predict", help="closed-form mean and variance of the trace-norm error")
    _common(p)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("spectrum", help="eigenvalues of one realisation plus a semicircle overlay")
    _common(p, reps=False, seed=True, mode=True)
    p.add_argument("--out", type=Path, default=None, help="eigenvalue file (default: stdout)")
    p.add_argument("--overlay", type=Path, default=None, help="semicircle (x, W(x)) file")
    p.add_argument("--save-matrix", type=Path, default=None,
                   help="write the estimate rho + Delta rho in the matrix file format")

    p = sub.add_parser("covariance", help="covariance eigenvalue statistics")
    _common(p)
    p.add_argument("--dump", type=Path, default=None, help="write Sigma in the matrix file format")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("complexity", help="Markov shot count and empirical failure probability")
    p.add_argument("--epsilon", type=float, required=True, help="trace-distance target")
    p.add_argument("--fail-prob", type=float, required=True, help="allowed failure probability")
    p.add_argument("-N", "--qubits", type=int, required=True, help="number of qubits")
    p.add_argument("--results", type=Path, default=None, help="simulate output (JSON or CSV)")

    p = sub.add_parser("rephys", help="rephysicalise an estimate and report the excess")
    p.add_argument("--matrix", type=Path, default=None, help="estimate in the matrix file format")
    _common(p, seed=True, mode=True)
    p.add_argument("--out", type=Path, default=None, help="write the projected state")
    return parser


def _fmt(v) -> str:
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def _print_pairs(pairs: dict) -> None:
    width = max(len(k) for k in pairs)
    for k, v in pairs.items():
        print(f"{k:<{width}}  {_fmt(v)}")


def _cmd_simulate(a) -> int:
    outputs = ["trace_norms"]
    outputs += [name for name in ("rephys", "spectra", "covariance") if getattr(a, name)]
    config = ExperimentConfig(
        state=a.state, protocol=a.protocol, n_qubits=a.qubits, shots=a.shots, replications=a.reps,
        master_seed=a.seed, outputs=tuple(outputs), mode=a.mode, sigma2=a.sigma2, base=a.base,
        allow_large=a.allow_large,
    )
    result = run_experiment(config, workers=max(1, a.threads))
    out = a.out if a.out is not None else Path(os.environ.get(OUTDIR_ENV, "."))
    if out.is_dir():
        out = out / default_filename(config, a.format)
    persist(result, out, a.format)
    summary = {"file": str(out), "sampling": result.sampling, "replications": config.replications,
               "mean_trace_norm": result.mean}
    if result.se_mean is not None:
        summary["se_mean"] = result.se_mean
        summary["variance"] = result.variance
    if result.prediction:
        summary["predicted_mean"] = result.prediction["mean_trace_norm"]
        summary["predicted_variance"] = result.prediction["var_trace_norm"]
    _print_pairs(summary)
    return 0


def _cmd_predict(a) -> int:
    state = build_state(a.state, a.qubits)
    d = 2**a.qubits
    rows = {}
    for mode in ("exact", "leading"):
        p = predict(a.protocol, state, a.qubits, a.shots, mode=mode)
        rows[mode] = {
            "radius": p.radius,
            "mean_trace_norm": p.mean_trace_norm,
            "mean_over_2N": p.mean_trace_norm / d,
            "var_trace_norm": p.var_trace_norm,
        }
    if a.format == "json":
        print(json.dumps({"protocol": a.protocol, "state": a.state, "n_qubits": a.qubits,
                          "shots": a.shots, **rows}, indent=2))
        return 0
    print(f"protocol {a.protocol}  state {a.state}  N {a.qubits}  S {a.shots}")
    for mode, vals in rows.items():
        print(f"[{mode}]")
        _print_pairs(vals)
    return 0


def _single_config(a) -> ExperimentConfig:
    return ExperimentConfig(state=a.state, protocol=a.protocol, n_qubits=a.qubits, shots=a.shots,
                            replications=1, master_seed=a.seed, mode=a.mode)


def _one_realization(a):
    from .protocols import replication_rng

    config = _single_config(a)
    state, draw, _ = _experiment_context(config)
    delta = draw(replication_rng(config.master_seed, 0))
    return state, delta


def _cmd_spectrum(a) -> int:
    state, delta = _one_realization(a)
    evals = np.linalg.eigvalsh(delta)
    law = SemicircleLaw(predict(a.protocol, state, a.qubits, a.shots).radius)
    xs = np.linspace(-law.radius, law.radius, OVERLAY_POINTS)
    overlay = "".join(f"{x:.17g} {w:.17g}\n" for x, w in zip(xs, law.pdf(xs)))
    if a.out is not None:
        matrixio.write_spectrum(a.out, evals)
    if a.overlay is not None:
        a.overlay.write_text(overlay)
    if a.out is None:
        sys.stdout.write("# eigenvalues\n" + "".join(f"{v:.17g}\n" for v in evals))
        if a.overlay is None:
            sys.stdout.write(f"# semicircle radius {law.radius:.17g}: x W(x)\n" + overlay)
    else:
        _print_pairs({"eigenvalues": str(a.out), "radius": law.radius, "trace_norm": trace_norm(evals)})
    if a.save_matrix is not None:
        est = density_matrix(state) + delta
        matrixio.write_matrix(a.save_matrix, est, a.qubits, kind="estimate",
                              comment=f"{a.protocol} {a.state} S={a.shots} seed={a.seed}")
    return 0


def _cmd_covariance(a) -> int:
    state = build_state(a.state, a.qubits)
    model = naive_variances(state, a.shots) if a.protocol == "naive" else qwc_sigma(state, a.shots)
    stats = var_stats(model)
    vals = {"kind": model.kind, "vbar": stats.vbar, "var_v": stats.var_v,
            "bound_ratio": stats.bound_ratio, "method": stats.method}
    if a.dump is not None:
        matrixio.write_matrix(a.dump, model.to_dense(), a.qubits, kind="covariance",
                              comment=f"{a.protocol} {a.state} S={a.shots}")
    if a.format == "json":
        print(json.dumps(vals, indent=2))
    else:
        _print_pairs(vals)
    return 0


def _cmd_complexity(a) -> int:
    est = markov_shots(a.epsilon, a.fail_prob, a.qubits)
    vals = {"shots_per_setting": est.shots_per_setting, "settings": 3**a.qubits,
            "total_copies": est.total_copies}
    if a.results is not None:
        if a.results.suffix == ".csv":
            norms = load_csv(a.results)["trace_norm"]
        else:
            norms = load_json(a.results).trace_norms
        fail = empirical_failure_prob(norms, a.epsilon)
        vals.update({"empirical_failure_prob": fail.probability, "ci_low": fail.ci_low,
                     "ci_high": fail.ci_high, "markov_bound": fail.markov_bound,
                     "paley_zygmund_floor": fail.pz_floor})
    _print_pairs(vals)
    return 0


def _cmd_rephys(a) -> int:
    if a.matrix is not None:
        est, header = matrixio.read_matrix(a.matrix)
        n = header["n_qubits"]
        vals = {}
    else:
        state, delta = _one_realization(a)
        n = a.qubits
        est = density_matrix(state) + delta
        radius = predict(a.protocol, state, a.qubits, a.shots).radius
        vals = {"two_radius": 2 * radius}
    projected = rephysicalize(est)
    vals = {"excess": rephys_excess(est), **vals,
            "min_eigenvalue_before": float(np.linalg.eigvalsh(est)[0])}
    if a.matrix is None:
        rho = density_matrix(state)
        vals["error_before"] = trace_norm(np.linalg.eigvalsh(est - rho))
        vals["error_after"] = trace_norm(np.linalg.eigvalsh(projected - rho))
    if a.out is not None:
        matrixio.write_matrix(a.out, projected, n, kind="density", comment="rephysicalised estimate")
    _print_pairs(vals)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "predict": _cmd_predict,
    "spectrum": _cmd_spectrum,
    "covariance": _cmd_covariance,
    "complexity": _cmd_complexity,
    "rephys": _cmd_rephys,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["rephys"] and "--matrix" in argv and not {"-N", "--qubits"} & set(argv):
        argv += ["-N", "1"]  # qubit count comes from the matrix file
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except OSError as exc:
        sys.stderr.write(f"pauli-rmt: I/O error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"pauli-rmt: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
