"""Plain-text matrix files.

Layout::

    # free-form comment lines
    n_qubits 2
    dim 4
    kind density
    <re> <im> <re> <im> ...      one line per row, ``dim`` complex pairs

Numbers are written with 17 significant digits so a read returns the exact
doubles that were written.  ``kind`` is a free token (``density``,
``estimate``, ``covariance``, ...); ``dim`` may be ``2**n`` or ``4**n``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_matrix", "read_matrix", "write_spectrum", "read_spectrum"]


def write_matrix(path, matrix, n_qubits: int, kind: str = "density", comment: str = "") -> None:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    lines = [f"# {line}" for line in comment.splitlines()]
    lines += [f"n_qubits {n_qubits}", f"dim {m.shape[0]}", f"kind {kind}"]
    for row in m:
        lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> tuple[np.ndarray, dict]:
    """Return ``(matrix, header)``; header maps ``n_qubits``, ``dim``, ``kind``."""
    path = Path(path)
    header: dict = {}
    rows = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key = line.split(None, 1)[0]
            if key in ("n_qubits", "dim", "kind"):
                value = line.split(None, 1)[1].strip()
                header[key] = value if key == "kind" else int(value)
                continue
            try:
                vals = [float(tok) for tok in line.split()]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed matrix row") from None
            rows.append(vals)
    if "dim" not in header or "n_qubits" not in header:
        raise ValueError(f"{path}: missing n_qubits/dim header")
    d = header["dim"]
    if len(rows) != d or any(len(r) != 2 * d for r in rows):
        raise ValueError(f"{path}: expected {d} rows of {2 * d} numbers")
    arr = np.array(rows, dtype=float)
    return arr[:, 0::2] + 1j * arr[:, 1::2], header


def write_spectrum(path, eigenvalues) -> None:
    """One eigenvalue per line."""
    Path(path).write_text("".join(f"{v:.17g}\n" for v in eigenvalues))


def read_spectrum(path) -> np.ndarray:
    return np.array([float(t) for t in Path(path).read_text().split()])
