"""
Projecting a noisy GHZ estimate back onto the state space
=========================================================

A tomographic estimate rho + delta is Hermitian with unit trace but usually
has negative eigenvalues.  Truncating them and spreading the deficit over the
remaining eigenvalues gives the Frobenius-closest density matrix.
"""

import numpy as np

from pauli_rmt.analytics import predict, rephys_excess, rephysicalize
from pauli_rmt.protocols import ShotPlan, replication_rng, sample_qwc
from pauli_rmt.spectral import trace_norm
from pauli_rmt.states import StateModel, density_matrix

n_qubits, shots = 5, 10_000
state = StateModel.ghz(n_qubits)
rho = density_matrix(state)
radius = predict("qwc", state, n_qubits, shots).radius

############################################################
# One realisation, before and after

for i in range(5):
    est = rho + sample_qwc(state, ShotPlan(shots), replication_rng(3, i)).matrix
    fixed = rephysicalize(est)
    before = trace_norm(np.linalg.eigvalsh(est - rho))
    after = trace_norm(np.linalg.eigvalsh(fixed - rho))
    print(f"rep {i}: min eig {np.linalg.eigvalsh(est)[0]:+.4f}  excess {rephys_excess(est):.4f}  "
          f"error {before:.4f} -> {after:.4f}   (2R = {2 * radius:.4f})")
