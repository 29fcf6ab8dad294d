"""Primal-dual interior-point solver for the Lovász theta SDP.

Primal:  max <J, X>  s.t.  tr X = 1,  X_ij = 0 for ij in E,  X psd.
Dual:    min t       s.t.  Z = t I - J - sum_e y_e (E_ij + E_ji) psd.

HKM search direction with a Mehrotra predictor-corrector step.  Both bounds
returned by :func:`solve_theta` are re-derived from exactly feasible points,
so ``upper - lower`` is a valid certificate on the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import SolverDiverged


@dataclass
class ThetaSolution:
    lower: float
    upper: float
    iterations: int
    X: np.ndarray
    t: float
    y: np.ndarray


def _max_step(S: np.ndarray, dS: np.ndarray) -> float:
    """Largest ``a <= 1`` keeping ``S + a dS`` positive definite (up to a factor 0.95)."""
    L = linalg.cholesky(S, lower=True)
    Li = linalg.solve_triangular(L, np.eye(len(S)), lower=True)
    lam = linalg.eigvalsh(Li @ dS @ Li.T)[0]
    if lam >= 0:
        return 1.0
    return min(1.0, 0.95 / -lam)


def _certify(adj_i, adj_j, n, X, t, y):
    J = np.ones((n, n))
    Z = t * np.eye(n) - J
    Z[adj_i, adj_j] -= y
    Z[adj_j, adj_i] -= y
    shift = max(0.0, -linalg.eigvalsh(Z)[0])
    upper = t + shift

    Xp = (X + X.T) / 2
    Xp[adj_i, adj_j] = 0.0
    Xp[adj_j, adj_i] = 0.0
    lam = linalg.eigvalsh(Xp)[0]
    if lam < 0:
        Xp = Xp - lam * np.eye(n)
    lower = float(Xp.sum() / np.trace(Xp))
    return lower, upper


def solve_theta(adjacency: np.ndarray, tol: float = 1e-9, max_iter: int = 200) -> ThetaSolution:
    adj = np.asarray(adjacency, dtype=bool)
    n = len(adj)
    if n == 1:
        return ThetaSolution(1.0, 1.0, 0, np.ones((1, 1)), 1.0, np.zeros(0))
    ei, ej = np.nonzero(np.triu(adj, 1))
    m = 1 + len(ei)
    C = -np.ones((n, n))
    b = np.zeros(m)
    b[0] = 1.0

    def A_op(Y):
        return np.concatenate(([np.trace(Y)], 2.0 * Y[ei, ej]))

    def At_op(v):
        Y = v[0] * np.eye(n)
        Y[ei, ej] += v[1:]
        Y[ej, ei] += v[1:]
        return Y

    X = np.eye(n) / n
    y = np.zeros(m)
    y[0] = -(n + 1.0)
    Z = C - At_op(y)

    for it in range(1, max_iter + 1):
        Zi = linalg.inv(Z)
        Zi = (Zi + Zi.T) / 2
        Rp = b - A_op(X)
        Rd = C - Z - At_op(y)
        mu = np.vdot(X, Z) / n
        pobj = -np.vdot(C, X)
        dobj = -y[0]
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if rel_gap < tol and np.abs(Rp).max() < tol and np.abs(Rd).max() < tol:
            lower, upper = _certify(ei, ej, n, X, -y[0], y[1:])
            return ThetaSolution(lower, upper, it, X, -y[0], y[1:])

        # Schur complement M_kl = tr(A_k X A_l Z^{-1})
        XZi = X @ Zi
        M = np.empty((m, m))
        M[0, 0] = np.trace(XZi)
        row0 = XZi[ej, ei] + XZi[ei, ej]
        M[0, 1:] = row0
        M[1:, 0] = row0
        if len(ei):
            M[1:, 1:] = (
                X[np.ix_(ej, ei)] * Zi[np.ix_(ei, ej)]
                + X[np.ix_(ej, ej)] * Zi[np.ix_(ei, ei)]
                + X[np.ix_(ei, ei)] * Zi[np.ix_(ej, ej)]
                + X[np.ix_(ei, ej)] * Zi[np.ix_(ej, ei)]
            )
        M = (M + M.T) / 2
        try:
            cho = linalg.cho_factor(M)
        except linalg.LinAlgError:
            cho = None

        def solve_M(r):
            if cho is not None:
                return linalg.cho_solve(cho, r)
            return linalg.lstsq(M, r)[0]

        def direction(sigma_mu, corr):
            extra = X @ Rd @ Zi
            rhs_mat = sigma_mu * Zi - X - extra
            if corr is not None:
                rhs_mat = rhs_mat - corr
            dy = solve_M(Rp - A_op((rhs_mat + rhs_mat.T) / 2))
            dZ = Rd - At_op(dy)
            dX = rhs_mat + X @ At_op(dy) @ Zi
            dX = (dX + dX.T) / 2
            return dX, dy, dZ

        # predictor
        dXa, dya, dZa = direction(0.0, None)
        ap = _max_step(X, dXa)
        ad = _max_step(Z, dZa)
        mu_aff = np.vdot(X + ap * dXa, Z + ad * dZa) / n
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        # corrector
        dX, dy, dZ = direction(sigma * mu, dXa @ dZa @ Zi)
        ap = _max_step(X, dX)
        ad = _max_step(Z, dZ)
        X = X + ap * dX
        X = (X + X.T) / 2
        y = y + ad * dy
        Z = Z + ad * dZ
        Z = (Z + Z.T) / 2

    raise SolverDiverged(f"theta SDP did not converge in {max_iter} iterations")
