"""The |1|-graded Lie algebra so(2,n+1): matrix realization, grading,
brackets, the homology codifferential, and the analyzer for algebra elements
squaring to -id.

Conventions.  The scalar product on R^{2,n+1} is
``<x,y> = x_- y_+ + x_+ y_- + (x_1..x_{n+1}) Jmat t(y_1..y_{n+1})`` with
``Jmat = diag(-1, 1, ..., 1)``; coordinates are ordered (x_-, x_1..x_{n+1},
x_+), so matrices are (n+3) x (n+3) with the grade blocks

    grade -1 (vector m):    M[1:n+2, 0] = m,       M[n+2, 1:n+2] = -m^t Jmat
    grade  0 (A, a):        M[0,0] = -a, M[1:n+2,1:n+2] = A, M[n+2,n+2] = a
    grade +1 (covector l):  M[0, 1:n+2] = l,       M[1:n+2, n+2] = -Jmat l^t

Dual bases for the codifferential: ``xi_i`` are the standard grade(-1)
generators and ``eta_i`` the grade(+1) elements with natural pairing
``l(m) = delta_ij``.  (The Killing form is proportional to ``l(m)`` on these
pairs; we absorb the constant into the normalization of ``eta_i``, which
rescales the codifferential but leaves its kernel and image untouched.)
"""

from __future__ import annotations

import numpy as np


class AlgebraError(ValueError):
    pass


def jmat(n: int) -> np.ndarray:
    J = np.eye(n + 1)
    J[0, 0] = -1.0
    return J


def so_gram(n: int) -> np.ndarray:
    """Gram matrix of <.,.> in the (x_-, x, x_+) coordinate order."""
    G = np.zeros((n + 3, n + 3))
    G[0, -1] = G[-1, 0] = 1.0
    G[1:-1, 1:-1] = jmat(n)
    return G


def in_so(M: np.ndarray, tol: float = 1e-12) -> bool:
    n = M.shape[0] - 3
    G = so_gram(n)
    return bool(np.max(np.abs(M.T @ G + G @ M)) <= tol * max(1.0, np.max(np.abs(M))))


def grade_minus1(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    n = len(m) - 1
    M = np.zeros((n + 3, n + 3))
    M[1 : n + 2, 0] = m
    M[n + 2, 1 : n + 2] = -(m @ jmat(n))
    return M


def grade_zero(A: np.ndarray, a: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    n = A.shape[0] - 1
    M = np.zeros((n + 3, n + 3))
    M[0, 0] = -a
    M[1 : n + 2, 1 : n + 2] = A
    M[n + 2, n + 2] = a
    return M


def grade_plus1(l: np.ndarray) -> np.ndarray:
    l = np.asarray(l, dtype=float)
    n = len(l) - 1
    M = np.zeros((n + 3, n + 3))
    M[0, 1 : n + 2] = l
    M[1 : n + 2, n + 2] = -(jmat(n) @ l)
    return M


def triple_of(M: np.ndarray):
    """Extract (m, A, a, l) from the block pattern."""
    n = M.shape[0] - 3
    m = M[1 : n + 2, 0].copy()
    l = M[0, 1 : n + 2].copy()
    A = M[1 : n + 2, 1 : n + 2].copy()
    a = float(M[n + 2, n + 2])
    return m, A, a, l


def from_triple(m, A, a, l) -> np.ndarray:
    return grade_minus1(m) + grade_zero(A, a) + grade_plus1(l)


def grade_project(M: np.ndarray, k: int) -> np.ndarray:
    if k not in (-1, 0, 1):
        raise AlgebraError(f"invalid grade {k}")
    m, A, a, l = triple_of(M)
    if k == -1:
        return grade_minus1(m)
    if k == 0:
        return grade_zero(A, a)
    return grade_plus1(l)


def bracket(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    if M1.shape != M2.shape:
        raise AlgebraError("dimension mismatch")
    return M1 @ M2 - M2 @ M1


# ---------------------------------------------------------------------------
# Homology cochains and the codifferential
# ---------------------------------------------------------------------------


class HomologyCochain:
    """Antisymmetric multilinear map from k copies of g_{-1} to g.

    Stored as an array of so-matrices indexed by the standard g_{-1} basis:
    degree 1 -> shape (n+1, n+3, n+3); degree 2 -> (n+1, n+1, n+3, n+3)
    antisymmetric in the first two axes.
    """

    def __init__(self, degree: int, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if degree not in (1, 2):
            raise AlgebraError("degree must be 1 or 2")
        if degree == 2 and np.max(np.abs(values + values.transpose(1, 0, 2, 3))) > 1e-10 * max(
            1.0, np.max(np.abs(values))
        ):
            raise AlgebraError("degree-2 cochain must be antisymmetric")
        self.degree = degree
        self.values = values

    @property
    def n(self):
        return self.values.shape[-1] - 3


def _eta_matrices(n: int):
    return [grade_plus1(np.eye(n + 1)[i]) for i in range(n + 1)]


def kostant_codifferential(phi: HomologyCochain):
    """The standard-complex differential: degree k -> k-1.

    Degree 1: returns the single so-matrix sum_i [eta_i, phi(xi_i)].
    Degree 2: returns the degree-1 cochain xi -> sum_i [eta_i, phi(xi_i, xi)].
    """
    n = phi.n
    etas = _eta_matrices(n)
    if phi.degree == 1:
        out = np.zeros_like(phi.values[0])
        for i in range(n + 1):
            out += bracket(etas[i], phi.values[i])
        return out
    vals = np.zeros_like(phi.values[0])
    for k in range(n + 1):
        for i in range(n + 1):
            vals[k] += bracket(etas[i], phi.values[i, k])
    return HomologyCochain(1, vals)


# ---------------------------------------------------------------------------
# Elements squaring to -id (Lemma on complex algebra elements)
# ---------------------------------------------------------------------------


def analyze_complex_element(beta: np.ndarray, tol: float = 1e-8) -> dict:
    """Check the structural consequences of beta^2 = -id for beta in so(2,n+1).

    Returns a report with the extracted (m, A, a, l), lightlike flags for m
    and Jmat l^t, the eigen relations A m = a m and l A = a l, and the
    residual of (A|_W)^2 = -id on the Jmat-orthocomplement W of
    span{m, Jmat l^t}.
    """
    n = beta.shape[0] - 3
    sq = beta @ beta + np.eye(n + 3)
    sq_norm = float(np.max(np.abs(sq)))
    if sq_norm > tol:
        raise AlgebraError(f"beta^2 != -id (residual {sq_norm:.3e})")
    m, A, a, l = triple_of(beta)
    J = jmat(n)
    w = J @ l

    from scipy.linalg import null_space

    constraints = np.vstack([m @ J, l])
    W = null_space(constraints)
    AW = A @ W
    # A preserves W; measure the full residual of A^2 + id on W
    res_W = float(np.max(np.abs(A @ AW + W))) if W.size else 0.0

    report = {
        "m": m,
        "l": l,
        "A": A,
        "a": a,
        "square_residual": sq_norm,
        "m_norm": float(np.linalg.norm(m)),
        "l_norm": float(np.linalg.norm(l)),
        "m_lightlike": float(abs(m @ J @ m)),
        "l_lightlike": float(abs(w @ J @ w)),
        "eigen_m": float(np.max(np.abs(A @ m - a * m))),
        "eigen_l": float(np.max(np.abs(l @ A - a * l))),
        "W_restriction_square": res_W,
    }
    report["pass"] = all(
        report[k] <= 1e-9
        for k in ("m_lightlike", "l_lightlike", "eigen_m", "eigen_l", "W_restriction_square")
    ) and min(report["m_norm"], report["l_norm"]) >= 1e-3
    return report


def canonical_beta(n: int) -> np.ndarray:
    """A canonical element of so(2,n+1) with beta^2 = -id (n odd).

    The grade(-1) vector is the lightlike direction e_0 + e_1, the grade(+1)
    covector is dual to it with l(m) = -1, and A acts as the standard
    symplectic rotation on the remaining n-1 spacelike directions.
    """
    if n % 2 == 0:
        raise AlgebraError("complex elements need n odd (even middle dimension)")
    m = np.zeros(n + 1)
    m[0] = m[1] = 1.0
    w = np.zeros(n + 1)
    w[0], w[1] = 0.5, -0.5
    l = w @ jmat(n)
    A = np.zeros((n + 1, n + 1))
    for i in range(2, n + 1, 2):
        A[i + 1, i] = 1.0
        A[i, i + 1] = -1.0
    beta = from_triple(m, A, 0.0, l)
    assert np.max(np.abs(beta @ beta + np.eye(n + 3))) < 1e-12
    return beta


def random_so_matrix(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Random element of so(2,n+1): G-antisymmetrize a random matrix."""
    G = so_gram(n)
    X = rng.standard_normal((n + 3, n + 3)) * scale
    # M in so iff GM antisymmetric; G is involutive here (G @ G = id)
    return G @ (G @ X - (G @ X).T) / 2.0


def random_complex_element(rng: np.random.Generator, n: int, eps: float = 0.3) -> np.ndarray:
    """Conjugate the canonical seed by exp(eps * random so-element)."""
    from scipy.linalg import expm

    g = expm(random_so_matrix(rng, n, eps))
    return g @ canonical_beta(n) @ np.linalg.inv(g)
