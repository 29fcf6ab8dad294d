"""Ornstein (d-bar) distance and the continuity estimates for F.

The d-bar distance between two laws on ``X^n`` is the Wasserstein-1
distance for the normalized Hamming metric.  It is computed exactly as a
transportation LP; optimality is certified by dual potentials.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .exceptions import InputError, LengthMismatch, SizeCapExceeded, SolverError
from .graphs import Graph, all_words
from .markov import MarkovSource, marginal
from .probability import _as_probs, eta
from .refinement import power_refinement, refinement_on_product
from .spectral import SpectralPointId, evaluate

TRANSPORT_CAP = 10**6


def hamming_distance(x, y) -> float:
    """Fraction of coordinates where ``x`` and ``y`` differ."""
    a = getattr(x, "letters", x)
    b = getattr(y, "letters", y)
    if len(a) != len(b):
        raise LengthMismatch(f"words of lengths {len(a)} and {len(b)}")
    if len(a) == 0:
        raise InputError("empty words")
    return sum(u != v for u, v in zip(a, b)) / len(a)


def hamming_cost(words_x: np.ndarray, words_y: np.ndarray) -> np.ndarray:
    return (words_x[:, None, :] != words_y[None, :, :]).mean(axis=2)


@dataclass
class Coupling:
    """Optimal coupling restricted to the supports of the two laws.

    ``mass[i, j]`` couples word ``rows[i]`` with word ``cols[j]`` (indices in
    lexicographic order of ``X^n``).
    """

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    cost: float
    dual_bound: float
    u: np.ndarray
    v: np.ndarray

    @property
    def certified_gap(self) -> float:
        return max(self.cost - self.dual_bound, 0.0)

    def triples(self, tol: float = 0.0):
        i, j = np.nonzero(self.mass > tol)
        for a, b in zip(i.tolist(), j.tolist()):
            yield int(self.rows[a]), int(self.cols[b]), float(self.mass[a, b])

    def to_csv(self, labels=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "mass"])
        for a, b, m in self.triples():
            if labels is not None:
                a, b = labels[a], labels[b]
            writer.writerow([a, b, repr(m)])
        return buf.getvalue()


def ornstein_distance(p, q, alphabet_size: int, n: int, cap: int = TRANSPORT_CAP) -> Coupling:
    """Exact ``W_1`` distance under normalized Hamming cost between laws on ``X^n``."""
    p = _as_probs(p).reshape(-1)
    q = _as_probs(q).reshape(-1)
    size = alphabet_size**n
    if p.shape != (size,) or q.shape != (size,):
        raise InputError(f"both laws must have {size} entries")
    rows = np.flatnonzero(p > 0)
    cols = np.flatnonzero(q > 0)
    if len(rows) * len(cols) > cap:
        raise SizeCapExceeded(f"{len(rows) * len(cols)} coupling variables exceed cap {cap}")
    words = all_words(alphabet_size, n)
    C = hamming_cost(words[rows], words[cols])
    r, c = len(rows), len(cols)
    # equality constraints: row sums = p, column sums = q
    ri = np.repeat(np.arange(r), c)
    cj = np.tile(np.arange(c), r)
    var = np.arange(r * c)
    A = sparse.csr_matrix(
        (np.ones(2 * r * c), (np.concatenate([ri, r + cj]), np.concatenate([var, var]))),
        shape=(r + c, r * c),
    )
    b = np.concatenate([p[rows], q[cols]])
    res = linprog(
        C.reshape(-1),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise SolverError(f"transport LP failed: {res.message}")
    mass = np.clip(res.x, 0.0, None).reshape(r, c)
    cost = float((mass * C).sum())
    u = res.eqlin.marginals[:r]
    v_raw = res.eqlin.marginals[r:]
    # tighten v so that u_i + v_j <= C_ij holds exactly
    v = np.minimum(v_raw, (C - u[:, None]).min(axis=0))
    dual_bound = float(p[rows] @ u + q[cols] @ v)
    return Coupling(rows, cols, mass, cost, dual_bound, u, v)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(_as_probs(p) - _as_probs(q)).sum())


def dbar_sequence(src1: MarkovSource, src2: MarkovSource, n_max: int) -> list[float]:
    """``d-bar(mu_{1..n}, nu_{1..n})`` for ``n = 1 .. n_max``."""
    if src1.n_states != src2.n_states:
        raise InputError("sources must share an alphabet")
    d = src1.n_states
    return [ornstein_distance(marginal(src1, n), marginal(src2, n), d, n).cost for n in range(1, n_max + 1)]


@dataclass
class ContinuityReport:
    lhs: float
    bound: float
    slack: float
    distance: float

    @property
    def margin(self) -> float:
        return self.bound + self.slack - self.lhs

    @property
    def ok(self) -> bool:
        return self.margin >= 0

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "bound": self.bound,
            "slack": self.slack,
            "distance": self.distance,
            "margin": self.margin,
            "ok": self.ok,
        }


def _log_f(g: Graph, point, f_value) -> float:
    if f_value is None:
        f_value = evaluate(point, g)
    return math.log2(f_value)


def continuity_check(
    g: Graph, p, q, n: int, point=SpectralPointId.FRAC_CLIQUE_COVER, f_value=None, tol: float = 1e-7
) -> ContinuityReport:
    """Check ``|F(G^n,P)/n - F(G^n,Q)/n| <= dbar log2 f(G) + 2 eta(dbar)``.

    ``F`` is the fractional clique cover refinement; the slack is three
    times the larger certified solve gap, divided by ``n``.
    """
    fp = power_refinement(g, p, n, tol=tol)
    fq = power_refinement(g, q, n, tol=tol)
    dbar = min(ornstein_distance(p, q, len(g), n).cost, 1.0)
    bound = dbar * _log_f(g, point, f_value) + 2.0 * eta(dbar)
    lhs = abs(fp.value - fq.value) / n
    slack = 3.0 * max(fp.certified_gap, fq.certified_gap) / n
    return ContinuityReport(lhs, bound, slack, dbar)


def same_marginal_check(
    g: Graph, h: Graph, p, q, point=SpectralPointId.FRAC_CLIQUE_COVER, f_value=None, tol: float = 1e-7
) -> ContinuityReport:
    """Check ``|F(G⊠H,P) - F(G⊠H,Q)| <= delta log2 f(G) + 2 eta(delta)`` when ``P_H = Q_H``.

    ``delta`` is the total variation distance of ``P`` and ``Q``.
    """
    pm = _as_probs(p).reshape(len(g), len(h))
    qm = _as_probs(q).reshape(len(g), len(h))
    if not np.allclose(pm.sum(axis=0), qm.sum(axis=0), atol=1e-12):
        raise InputError("the two laws must share their marginal on the second factor")
    fp = refinement_on_product([g, h], pm, tol=tol)
    fq = refinement_on_product([g, h], qm, tol=tol)
    delta = min(total_variation(pm, qm), 1.0)
    bound = delta * _log_f(g, point, f_value) + 2.0 * eta(delta)
    lhs = abs(fp.value - fq.value)
    slack = 3.0 * max(fp.certified_gap, fq.certified_gap)
    return ContinuityReport(lhs, bound, slack, delta)
