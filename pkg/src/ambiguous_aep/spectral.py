"""Evaluators for spectral points of confusability graphs.

``theta`` (Lovász number) and ``fcc`` (fractional clique cover number) are
points of the asymptotic spectrum: additive under disjoint union,
multiplicative under the strong product, monotone under cohomomorphisms and
equal to ``d`` on the edgeless graph with ``d`` vertices.  The independence
number ``alpha`` is offered as a capacity lower bound only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ._theta_sdp import solve_theta
from .exceptions import InputError, SizeCapExceeded, SolverError
from .graphs import CLIQUE_CAP, Graph, _bitsets, _bits, complement, maximal_cliques

ALPHA_CAP = 64
THETA_CAP = 200
COVER_CAP = 40


class SpectralPointId(str, enum.Enum):
    ALPHA = "alpha"
    LOVASZ = "theta"
    FRAC_CLIQUE_COVER = "fcc"

    @classmethod
    def parse(cls, value) -> "SpectralPointId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"unknown spectral point {value!r}; use alpha, theta or fcc") from None


@dataclass
class SolveReport:
    """Value of a solve together with its certified additive gap."""

    value: float
    certified_gap: float
    iterations: int
    solver: str

    def to_dict(self) -> dict:
        return asdict(self)


# -- independence number -----------------------------------------------------
def _max_clique_size(nbr: list[int], n: int) -> int:
    """Branch and bound maximum clique on bitset adjacency (greedy colouring bound)."""
    best = 0

    def colour_sort(p: int) -> list[tuple[int, int]]:
        # greedy sequential colouring; returns (vertex, colour) in colour order
        out = []
        colour = 0
        uncoloured = p
        while uncoloured:
            colour += 1
            avail = uncoloured
            while avail:
                v = (avail & -avail).bit_length() - 1
                avail &= ~nbr[v] & ~(1 << v)
                uncoloured &= ~(1 << v)
                out.append((v, colour))
        return out

    def expand(size: int, p: int) -> None:
        nonlocal best
        order = colour_sort(p)
        for v, colour in reversed(order):
            if size + colour <= best:
                return
            new_p = p & nbr[v]
            if new_p:
                expand(size + 1, new_p)
            elif size + 1 > best:
                best = size + 1
            p &= ~(1 << v)

    if n:
        expand(0, (1 << n) - 1)
    return best


def clique_number(g: Graph, cap: int = ALPHA_CAP) -> int:
    if len(g) > cap:
        raise SizeCapExceeded(f"{len(g)} vertices exceed exact search cap {cap}")
    return _max_clique_size(_bitsets(g), len(g))


def alpha(g: Graph, cap: int = ALPHA_CAP) -> int:
    """Exact independence number by branch and bound."""
    return clique_number(complement(g), cap=cap)


# -- Lovász number -----------------------------------------------------------
def lovasz_theta(g: Graph, cap: int = THETA_CAP) -> SolveReport:
    if len(g) > cap:
        raise SizeCapExceeded(f"{len(g)} vertices exceed theta cap {cap}")
    if len(g) == 0:
        raise InputError("theta of the empty graph is undefined")
    sol = solve_theta(g.adjacency)
    gap = max(sol.upper - sol.lower, 0.0)
    return SolveReport(float(sol.upper + sol.lower) / 2, float(gap), sol.iterations, "hkm-ipm")


# -- fractional clique cover -------------------------------------------------
@dataclass
class CoverLP:
    value: float
    certified_gap: float
    cliques: list[tuple[int, ...]]
    weights: np.ndarray  # primal weight per clique
    dual: np.ndarray  # fractional independent set weight per vertex
    iterations: int


def solve_cover_lp(n_vertices: int, cliques, vertex_weights=None) -> CoverLP:
    """``min sum_C y_C`` s.t. each vertex ``x`` is covered ``>= b_x`` times.

    ``b`` defaults to all ones.  The dual is a fractional independent set
    (``w >= 0`` with weight at most 1 on every clique).  Both solutions are
    rescaled to exact feasibility before the gap is reported.
    """
    rows = np.concatenate([np.asarray(c, dtype=np.int64) for c in cliques])
    cols = np.repeat(np.arange(len(cliques)), [len(c) for c in cliques])
    M = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_vertices, len(cliques)))
    b = np.ones(n_vertices) if vertex_weights is None else np.asarray(vertex_weights, dtype=float)
    res = linprog(
        np.ones(len(cliques)),
        A_ub=-M,
        b_ub=-b,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise SolverError(f"clique cover LP failed: {res.message}")
    y = np.clip(res.x, 0, None)
    cover = M @ y
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, cover / b, np.inf)
    scale = 1.0 / min(1.0, ratio.min()) if ratio.min() > 0 else np.inf
    upper = float(y.sum() * scale)
    w = np.clip(-res.ineqlin.marginals, 0, None)
    load = (M.T @ w).max() if len(cliques) else 0.0
    w = w / max(1.0, load)
    lower = float(b @ w)
    return CoverLP(
        value=float(res.fun),
        certified_gap=max(upper - lower, 0.0),
        cliques=list(cliques),
        weights=y,
        dual=w,
        iterations=int(res.nit),
    )


def frac_clique_cover(g: Graph, cap: int = CLIQUE_CAP) -> SolveReport:
    if len(g) == 0:
        raise InputError("fractional clique cover of the empty graph is undefined")
    lp = solve_cover_lp(len(g), maximal_cliques(g, cap=cap))
    return SolveReport(lp.value, lp.certified_gap, lp.iterations, "highs-lp")


# -- clique cover number -------------------------------------------------------
def _colourable(nbr: list[int], n: int, k: int) -> bool:
    """DSATUR-ordered backtracking k-colouring test."""
    colour = [-1] * n
    forbidden = [0] * n  # bitmask of colours used by neighbours

    def pick() -> int:
        best, key = -1, None
        for v in range(n):
            if colour[v] < 0:
                cand = (bin(forbidden[v]).count("1"), nbr[v].bit_count(), -v)
                if key is None or cand > key:
                    best, key = v, cand
        return best

    def assign(depth: int, used: int) -> bool:
        if depth == n:
            return True
        v = pick()
        # symmetry breaking: only one fresh colour is tried
        for c in range(min(k, used + 1)):
            if forbidden[v] >> c & 1:
                continue
            colour[v] = c
            touched = []
            for u in _bits(nbr[v]):
                if colour[u] < 0 and not forbidden[u] >> c & 1:
                    forbidden[u] |= 1 << c
                    touched.append(u)
            if assign(depth + 1, max(used, c + 1)):
                return True
            for u in touched:
                forbidden[u] &= ~(1 << c)
            colour[v] = -1
        return False

    return assign(0, 0)


def clique_cover_number(g: Graph, cap: int = COVER_CAP) -> int:
    """Exact minimum number of cliques covering the vertices of ``g``."""
    if len(g) > cap:
        raise SizeCapExceeded(f"{len(g)} vertices exceed clique cover cap {cap}")
    if len(g) == 0:
        return 0
    h = complement(g)
    nbr = _bitsets(h)
    lower = max(math.ceil(frac_clique_cover(g).value - 1e-7), 1)
    k = lower
    while not _colourable(nbr, len(g), k):
        k += 1
    return k


# -- dispatch ----------------------------------------------------------------
def evaluate_report(point, g: Graph, cap: int | None = None) -> SolveReport:
    """Evaluate a spectral point; ``cap`` overrides the per-solver vertex cap."""
    point = SpectralPointId.parse(point)
    if point is SpectralPointId.ALPHA:
        return SolveReport(float(alpha(g, cap=cap or ALPHA_CAP)), 0.0, 0, "branch-and-bound")
    if point is SpectralPointId.LOVASZ:
        return lovasz_theta(g, cap=cap or THETA_CAP)
    return frac_clique_cover(g, cap=cap or CLIQUE_CAP)


def evaluate(point, g: Graph, cap: int | None = None) -> float:
    return evaluate_report(point, g, cap).value
