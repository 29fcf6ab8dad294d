"""Probabilistic refinements ``F(G, P)`` of spectral points.

For the fractional clique cover number the refinement is the graph entropy
of the complement,

    F(G, P) = min_{a in VP} sum_x P(x) log2(1 / a_x),

where ``VP`` is the convex corner spanned by clique indicator vectors of
``G``.  It is computed by away-step conditional gradient; the Frank-Wolfe
duality gap certifies the returned value.  For any spectral point the
refinement can also be estimated from type-class subgraphs of strong powers
(:func:`typegraph_estimate`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .exceptions import DomainError, EmptySubset, InputError, OracleFailure, SizeCapExceeded
from .graphs import CLIQUE_CAP, POWER_CAP, Graph, StrongPower, clique_matrix, maximal_cliques
from .probability import _as_probs, eta, round_to_type, type_class
from .spectral import SpectralPointId, clique_number, evaluate, frac_clique_cover

LN2 = math.log(2.0)
FW_TOL = 1e-5
FW_MAX_ITER = 100_000
TUPLE_CAP = 10**6
TINY_MASS = 1e-20


class NonConvergenceWarning(RuntimeWarning):
    pass


class ConvexCorner:
    """Clique polytope given by its extreme points.

    Parameters
    ----------
    columns : ndarray, shape (dimension, n_atoms)
        0/1 indicator vectors of (maximal) cliques.
    """

    def __init__(self, columns: np.ndarray) -> None:
        cols = np.asarray(columns, dtype=float)
        if cols.ndim != 2 or cols.shape[1] == 0:
            raise InputError("a convex corner needs at least one extreme point")
        self.columns = cols

    @classmethod
    def from_graph(cls, g: Graph, cap: int = CLIQUE_CAP) -> "ConvexCorner":
        return cls(clique_matrix(len(g), maximal_cliques(g, cap=cap)))

    @classmethod
    def from_product(cls, gs: Sequence[Graph], cap: int = CLIQUE_CAP, tuple_cap: int = TUPLE_CAP) -> "ConvexCorner":
        """Corner of a strong product.

        Every clique of a strong product lies in a product of cliques of the
        factors, so products of maximal cliques are the extreme points that
        matter for maximizing nonnegative weights.
        """
        mats = [clique_matrix(len(g), maximal_cliques(g, cap=cap)) for g in gs]
        n_tuples = math.prod(m.shape[1] for m in mats)
        if n_tuples > tuple_cap:
            raise SizeCapExceeded(f"{n_tuples} clique tuples exceed cap {tuple_cap}")
        return cls(reduce(np.kron, mats))

    @property
    def dimension(self) -> int:
        return self.columns.shape[0]

    def oracle(self, weights) -> tuple[int, np.ndarray]:
        """Extreme point maximizing ``<weights, a>``: ``(atom index, indicator)``."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.dimension,):
            raise OracleFailure("weight vector has the wrong dimension")
        scores = w @ self.columns
        j = int(np.argmax(scores))
        return j, self.columns[:, j]

    def restrict(self, rows: np.ndarray) -> "ConvexCorner":
        """Projection onto the coordinates ``rows`` with duplicate atoms removed."""
        sub = self.columns[rows]
        _, keep = np.unique(sub.T, axis=0, return_index=True)
        return ConvexCorner(sub[:, np.sort(keep)])


@dataclass
class RefinementValue:
    """Certified value of ``min_{a in corner} sum_x P(x) log2(1/a_x)``.

    ``value`` is attained at ``witness`` and exceeds the true minimum by at
    most ``certified_gap``.
    """

    value: float
    certified_gap: float
    witness: np.ndarray
    atom_weights: np.ndarray = field(repr=False)
    iterations: int = 0
    converged: bool = True

    @property
    def lower(self) -> float:
        return self.value - self.certified_gap

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "certified_gap": self.certified_gap,
            "witness": self.witness.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _line_search(p, a, d, gmax):
    """Minimize ``-sum p log(a + t d)`` over ``t in [0, gmax]`` (bracketed Newton)."""

    def deriv(t):
        v = a + t * d
        r = d / v
        return -(p * r).sum(), (p * r * r).sum()

    g_hi, _ = deriv(gmax) if np.all(a + gmax * d > 0) else (np.inf, 0.0)
    if g_hi <= 0:
        return gmax
    lo, hi = 0.0, gmax
    t = 0.0
    for _ in range(200):
        g, h = deriv(t)
        if g > 0:
            hi = t
        else:
            lo = t
        if hi - lo <= 1e-12 * gmax:
            break
        step = t - g / h if h > 0 else np.inf
        t = step if lo < step < hi else 0.5 * (lo + hi)
        # make sure the point stays strictly inside the domain
        while np.any(a + t * d <= 0):
            t = 0.5 * (t + lo)
    return t


def _fw_gap(sub: np.ndarray, q: np.ndarray, a: np.ndarray) -> float:
    """Frank-Wolfe duality gap at ``a`` (an upper bound on suboptimality, bits)."""
    return float(((q / a) @ sub).max() - q.sum()) / LN2


def minimize_corner_entropy(
    corner: ConvexCorner, p, tol: float = FW_TOL, max_iter: int = FW_MAX_ITER
) -> RefinementValue:
    """Away-step Frank-Wolfe for ``min_a sum_x p_x log2(1/a_x)`` over ``corner``.

    Letters of mass below ``TINY_MASS`` are left out of the iteration; the
    final point is mixed with the barycenter of the atoms so that it covers
    them, and value and gap are recomputed on the full support.
    """
    probs = _as_probs(p).reshape(-1)
    if probs.shape != (corner.dimension,):
        raise InputError("distribution and corner dimension differ")
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
        raise InputError("not a probability vector")
    support = np.flatnonzero(probs > 0)
    full = corner.columns[support]
    if np.any(full.sum(axis=1) == 0):
        raise OracleFailure("a support coordinate is not covered by any extreme point")
    q_full = probs[support]
    main = q_full >= TINY_MASS
    sub, q = full[main], q_full[main]
    n_atoms = sub.shape[1]
    qsum = q.sum()

    lam = np.full(n_atoms, 1.0 / n_atoms)
    a = sub @ lam
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        scores = (q / a) @ sub
        s = int(np.argmax(scores))
        gap = (scores[s] - qsum) / LN2
        if gap <= tol:
            break
        active = np.flatnonzero(lam > 0)
        v = active[np.argmin(scores[active])]
        away_gap = (qsum - scores[v]) / LN2
        if gap >= away_gap or len(active) == 1:
            d = sub[:, s] - a
            t = _line_search(q, a, d, 1.0)
            lam *= 1.0 - t
            lam[s] += t
        else:
            d = a - sub[:, v]
            gmax = lam[v] / (1.0 - lam[v])
            t = _line_search(q, a, d, gmax)
            lam *= 1.0 + t
            lam[v] -= t
            # drop the atom only if the rest still covers the support
            if t >= gmax * (1 - 1e-12) and np.all(sub @ np.where(np.arange(n_atoms) == v, 0.0, lam) > 0):
                lam[v] = 0.0
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
        a = sub @ lam
    if not main.all():
        eps = min(1e-3, math.sqrt(n_atoms * q_full[~main].sum()))
        lam = (1.0 - eps) * lam + eps / n_atoms
        gap = _fw_gap(full, q_full, full @ lam)
    a = full @ lam
    converged = gap <= tol
    if not converged:
        warnings.warn(
            f"Frank-Wolfe stopped at gap {gap:.3g} after {it} iterations", NonConvergenceWarning
        )
    value = float(-(q_full * np.log2(a)).sum()) + 0.0
    witness = corner.columns @ lam
    return RefinementValue(value, float(max(gap, 0.0)), witness, lam, it, bool(converged))


def graph_entropy_refinement(g: Graph, p, tol: float = FW_TOL, max_iter: int = FW_MAX_ITER) -> RefinementValue:
    """``F(G, P)`` for the fractional clique cover number (graph entropy of the complement)."""
    probs = _as_probs(p).reshape(-1)
    if probs.shape != (len(g),):
        raise InputError("distribution must be indexed by the vertices of g")
    return minimize_corner_entropy(ConvexCorner.from_graph(g), probs, tol=tol, max_iter=max_iter)


def refinement_on_product(
    gs: Sequence[Graph], p, tol: float = FW_TOL, max_iter: int = FW_MAX_ITER, tuple_cap: int = TUPLE_CAP
) -> RefinementValue:
    """``F(G_1 ⊠ ... ⊠ G_k, P)`` for a joint law ``P`` on the product alphabet.

    ``p`` may be given flat (lexicographic word order) or as a ``k``-way array.
    """
    size = math.prod(len(g) for g in gs)
    probs = _as_probs(p).reshape(-1)
    if probs.shape != (size,):
        raise InputError(f"joint distribution must have {size} entries")
    corner = ConvexCorner.from_product(gs, tuple_cap=tuple_cap)
    return minimize_corner_entropy(corner, probs, tol=tol, max_iter=max_iter)


def power_refinement(g: Graph, p, k: int, **kwargs) -> RefinementValue:
    """``F(G^{⊠k}, P)`` for a law ``P`` on words of length ``k``."""
    return refinement_on_product([g] * k, p, **kwargs)


def typegraph_estimate(point, g: Graph, p, n: int, cap: int = POWER_CAP, method: str = "symmetric") -> float:
    """``(1/n) log2 f(G^{⊠n}[T])`` on the type class ``T`` of the rounded ``n``-type of ``p``.

    Coordinate permutations act transitively on ``T`` and preserve
    confusability, so the type graph is vertex-transitive and its fractional
    clique cover number is ``|T| / omega``.  ``method="symmetric"`` uses this
    (only the clique number is searched); ``method="lp"`` solves the clique
    cover LP directly.
    """
    point = SpectralPointId.parse(point)
    counts = round_to_type(p, n)
    words = type_class(counts, cap=cap)
    sub = StrongPower(g, n).induced(words, cap=cap)
    if point is SpectralPointId.FRAC_CLIQUE_COVER:
        if method == "symmetric":
            value = len(sub) / clique_number(sub, cap=cap)
        elif method == "lp":
            value = frac_clique_cover(sub, cap=cap).value
        else:
            raise InputError(f"unknown method {method!r}")
    else:
        value = evaluate(point, sub)
    return math.log2(value) / n


def induced_subgraph_lower_bound(f_value, g: Graph, p, subset) -> float:
    """Lower bound ``F(G,P) - (1 - P(S)) log2|V(G)| - 1`` on ``log2 f(G[S])``.

    ``f_value`` is ``F(G, P)`` for the spectral point of interest; pass
    ``None`` to use the fractional clique cover refinement.
    """
    s = list(subset)
    if not s:
        raise EmptySubset("subset must be nonempty")
    probs = _as_probs(p).reshape(-1)
    if f_value is None:
        f_value = graph_entropy_refinement(g, probs).value
    mass = float(probs[s].sum())
    return f_value - (1.0 - mass) * math.log2(len(g)) - 1.0


def same_marginal_continuity_bound(g: Graph, delta: float, point=SpectralPointId.FRAC_CLIQUE_COVER, f_value=None) -> float:
    """``delta * log2 f(G) + 2 eta(delta)``."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    if f_value is None:
        f_value = evaluate(point, g)
    return delta * math.log2(f_value) + 2.0 * eta(delta)
