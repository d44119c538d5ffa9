"""Slow, independent reference computations used only by the tests.

Nothing here imports the package's transform, eigensolver or sampling code;
each oracle is built from dense matrices or brute-force enumeration.
"""

import itertools

import numpy as np

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def label_of(j, n):
    """Label of canonical index ``j`` (base-4 digit ``k`` is site ``k``; leftmost char is site n-1)."""
    digits = [(j // 4**k) % 4 for k in range(n)]
    return "".join("IXYZ"[d] for d in reversed(digits))


def index_of(label):
    n = len(label)
    return sum("IXYZ".index(ch) * 4 ** (n - 1 - i) for i, ch in enumerate(label))


def dense_pauli(label):
    m = np.ones((1, 1), dtype=complex)
    for ch in label:
        m = np.kron(m, SINGLE[ch])
    return m


def dense_basis(n):
    return [dense_pauli(label_of(j, n)) for j in range(4**n)]


def dense_synthesize(a, n):
    return sum(aj * p for aj, p in zip(a, dense_basis(n)))


def dense_coefficients(rho, n):
    # Tr(rho P) = sum of rho * P^T, one string at a time to bound memory
    return np.array([np.sum(rho * dense_pauli(label_of(j, n)).T).real for j in range(4**n)])


def dense_product(p, q):
    """(label, phase) of ``P Q`` found by matching against the dense basis."""
    n = len(p)
    m = dense_pauli(p) @ dense_pauli(q)
    for j in range(4**n):
        lab = label_of(j, n)
        ph = np.trace(dense_pauli(lab).conj().T @ m) / 2**n
        if abs(ph) > 0.5:
            return lab, complex(np.round(ph.real) + 1j * np.round(ph.imag))
    raise AssertionError("product not in Pauli group")


def ghz_density(n):
    d = 2**n
    psi = np.zeros(d, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def outcome_probs(rho, setting):
    """Born probabilities from dense spectral projectors.

    Outcome bit ``k`` set means site ``k`` (character ``n-1-k`` of the label)
    gave -1.
    """
    n = len(setting)
    probs = np.empty(2**n)
    for b in range(2**n):
        proj = np.ones((1, 1), dtype=complex)
        for i, ch in enumerate(setting):
            site = n - 1 - i
            sign = -1 if (b >> site) & 1 else 1
            proj = np.kron(proj, 0.5 * (SINGLE["I"] + sign * SINGLE[ch]))
        probs[b] = np.trace(rho @ proj).real
    return probs


def measures(setting, label):
    """True if full-weight ``setting`` measures every non-identity letter of ``label``."""
    return all(p == "I" or p == q for p, q in zip(label, setting))


def count_settings(n, labels):
    """Number of full-weight settings that measure every string in ``labels``."""
    return sum(
        all(measures("".join(s), lab) for lab in labels)
        for s in itertools.product("XYZ", repeat=n)
    )


def brute_trial_ratio(li, lj, shots):
    """``M_ij / (M_i M_j)`` by enumerating the ``3**n`` settings."""
    n = len(li)
    mi = shots * count_settings(n, [li])
    mj = shots * count_settings(n, [lj])
    mij = shots * count_settings(n, [li, lj])
    return mij / (mi * mj)


def jacobi_eigvalsh(h, tol=1e-14, sweeps=100):
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi on its real embedding.

    ``[[A, -B], [B, A]]`` has every eigenvalue of ``A + iB`` twice; one copy of
    each pair is returned.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    m = np.block([[h.real, -h.imag], [h.imag, h.real]])
    size = 2 * d
    for _ in range(sweeps):
        off = np.linalg.norm(m - np.diag(np.diag(m)))
        if off < tol * max(1.0, np.linalg.norm(m)):
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                if abs(m[p, q]) < 1e-300:
                    continue
                theta = 0.5 * (m[q, q] - m[p, p]) / m[p, q]
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(size)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
    ev = np.sort(np.diag(m))
    return ev[0::2]


def min_w2_sq(a, b):
    """Minimum over all couplings of ``sum (a_i - b_pi(i))**2 / D**2``."""
    d = len(a)
    return min(
        sum((a[i] - b[p[i]]) ** 2 for i in range(d)) for p in itertools.permutations(range(d))
    ) / d**2


def simplex_projection(mu):
    """Euclidean projection of a vector onto the probability simplex (sort-and-threshold)."""
    u = np.sort(mu)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - (css - 1) / k > 0)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(mu - theta, 0.0)


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def random_density(rng, d, rank=None):
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
