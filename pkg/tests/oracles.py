"""Independent closed forms and brute-force helpers used as test oracles.

These deliberately avoid the library's accumulation paths: products are
re-associated, restricted maps come from the generators' closed forms, and
suprema over spheres are taken by dense deterministic sampling.
"""

import numpy as np

from hkdicho import vector_norm, vector_norms


def shear_projectors(a_values, n):
    a = a_values[n]
    P = np.array([[1.0, a], [0.0, 0.0]])
    return P, np.eye(2) - P


def shear_cocycle(a_values, h_values, k_values, m, n, variant):
    """Closed-form transition for the two shear systems.

    variant "dichotomy": c (h_n/h_m P_n + k_m/k_n Q_m)
    variant "growth":    c (h_m/h_n P_n + k_n/k_m Q_m)
    with c = (1 + log a_n) / (1 + log a_m).
    """
    Pn, _ = shear_projectors(a_values, n)
    _, Qm = shear_projectors(a_values, m)
    c = (1.0 + np.log(a_values[n])) / (1.0 + np.log(a_values[m]))
    if variant == "dichotomy":
        return c * (h_values[n] / h_values[m] * Pn
                    + k_values[m] / k_values[n] * Qm)
    if variant == "growth":
        return c * (h_values[m] / h_values[n] * Pn
                    + k_values[n] / k_values[m] * Qm)
    raise ValueError(variant)


def product_oracle(matrices, m, n):
    """A_{m-1} ... A_n by left-to-right multiplication (independent order)."""
    out = np.eye(matrices.shape[1])
    for j in range(n, m):
        out = matrices[j] @ out
    return out


def dense_sphere_gain(M, kind, mode, count=20000, seed=99):
    """Brute-force sup/inf of |Mx|/|x| over dense random directions."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((count, M.shape[1]))
    nx = vector_norms(X, kind)
    ratios = vector_norms(X @ M.T, kind) / nx
    return float(ratios.max() if mode == "sup" else ratios.min())


def rotation(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def tame_random_system(rng, d, window):
    """Rotations times mild diagonal scalings: products stay well scaled,
    so re-association error stays near machine precision."""
    A = np.empty((window, d, d))
    for j in range(window):
        scales = rng.uniform(0.95, 1.05, size=d)
        A[j] = rotation(rng, d) @ np.diag(scales) @ rotation(rng, d)
    return A
