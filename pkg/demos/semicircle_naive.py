"""
Excess spectra of naive Pauli tomography
========================================

Every Pauli string is measured on its own with S shots.  The resulting error
matrix behaves like a GUE matrix, so its eigenvalues pile up on a Wigner
semicircle of radius 2/sqrt(S).
"""

import numpy as np

from pauli_rmt.protocols import ShotPlan, replication_rng, sample_naive
from pauli_rmt.spectral import SemicircleLaw, SpectralMeasure, semicircle_distance
from pauli_rmt.states import build_state

n_qubits, shots, reps = 6, 10_000, 50
state = build_state("identity", n_qubits)

############################################################
# Draw a few excess matrices and pool their eigenvalues

spectra = [sample_naive(state, ShotPlan(shots), replication_rng(0, i)).spectrum for i in range(reps)]
pooled = SpectralMeasure(np.concatenate(spectra))
law = SemicircleLaw(2 / np.sqrt(shots))
print(f"{pooled.dim} eigenvalues, W1 to the semicircle = {semicircle_distance(pooled, law) / law.radius:.4f} R")

############################################################
# A text histogram against the semicircle density

edges = np.linspace(-1.2 * law.radius, 1.2 * law.radius, 25)
counts, _ = np.histogram(pooled.atoms, bins=edges)
width = edges[1] - edges[0]
centres = 0.5 * (edges[1:] + edges[:-1])
expected = law.pdf(centres) * width * pooled.dim
for c, k, e in zip(centres, counts, expected):
    print(f"{c:+.4f} {'#' * int(60 * k / counts.max()):<60} {k:5d} ({e:7.1f})")
