"""F-rate brackets for Markov sources and typical-subset minimization.

For a stationary source ``mu`` and block length ``k`` write
``a_k = F(G^{⊠k}, mu_{1..k})`` with ``F`` the fractional clique cover
refinement.  ``a_k / k`` decreases to the F-rate and, for a Markov source,
``a_k / k - I(1:2)/k`` is a lower bound on it.  The AEP side is the
minimum of ``(1/n) log2 f(G^{⊠n}[S])`` over word sets of mass at least ``c``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import Sequence

import numpy as np

from .exceptions import InfeasibleMass, InputError, SizeCapExceeded
from .graphs import POWER_CAP, Graph, StrongPower, all_words, maximal_cliques
from .markov import MarkovSource, block_entropy, entropy_rate, marginal
from .probability import _as_probs, second_order_type
from .refinement import FW_TOL, RefinementValue, power_refinement
from .spectral import SpectralPointId, alpha, frac_clique_cover, lovasz_theta

EXACT_CAP = 18
EVAL_BUDGET = 400
CORNER_ENTRY_CAP = 5 * 10**7


# -- F sequences -------------------------------------------------------------
def block_refinement(g: Graph, src: MarkovSource, k: int, tol: float = FW_TOL) -> RefinementValue:
    """``F(G^{⊠k}, mu_{1..k})``, cached on the source."""
    if len(g) != src.n_states:
        raise InputError("graph and source alphabets differ in size")
    key = ("F", hash(g), k, tol)
    if key not in src._cache:
        n_cliques = _clique_count(g)
        entries = len(g) ** k * n_cliques**k
        if entries > CORNER_ENTRY_CAP:
            raise SizeCapExceeded(f"product corner with {entries} entries exceeds cap {CORNER_ENTRY_CAP}")
        src._cache[key] = power_refinement(g, marginal(src, k), k, tol=tol)
    return src._cache[key]


def _clique_count(g: Graph) -> int:
    return len(maximal_cliques(g))


def frate_upper_sequence(g: Graph, src: MarkovSource, k_max: int, tol: float = FW_TOL) -> list[float]:
    """``a_k / k`` for ``k = 1 .. k_max``."""
    return [block_refinement(g, src, k, tol).value / k for k in range(1, k_max + 1)]


def frate_lower_sequence(g: Graph, src: MarkovSource, k_max: int, tol: float = FW_TOL) -> list[float]:
    """``H_rate - b_k / k`` with ``b_k = H(mu_{1..k}) - a_k >= 0``."""
    rate = entropy_rate(src)
    out = []
    for k in range(1, k_max + 1):
        b_k = block_entropy(src, k) - block_refinement(g, src, k, tol).value
        out.append(rate - b_k / k)
    return out


@dataclass
class FRateBracket:
    """``[upper - I(1:2)/k, upper]`` with ``upper = F(G^{⊠k}, mu_{1..k}) / k``."""

    k: int
    upper: float
    lower: float
    certified_gap: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "upper": self.upper,
            "lower": self.lower,
            "gap": self.gap,
            "certified_gap": self.certified_gap,
        }


def markov_aep_bracket(g: Graph, src: MarkovSource, k: int, tol: float = FW_TOL) -> FRateBracket:
    if k < 1:
        raise InputError("block length must be positive")
    fv = block_refinement(g, src, k, tol)
    upper = fv.value / k
    lower = upper - src.mutual_information() / k
    return FRateBracket(k, upper, lower, fv.certified_gap / k)


# -- typical-subset minimization ---------------------------------------------
class SubsetKind(str, enum.Enum):
    EXACT = "exact-min"
    HEURISTIC = "heuristic-upper"
    ANALYTIC = "analytic-lower"


@dataclass
class SubsetCertificate:
    """A word set with its mass and ``log2 f`` of the induced subgraph.

    ``subset`` holds word indices (lexicographic order of ``V(G)^n``); it is
    ``None`` for analytic lower bounds.
    """

    subset: tuple[int, ...] | None
    mass: float
    f_value: float
    kind: SubsetKind
    n: int = 1

    @property
    def normalized(self) -> float:
        return self.f_value / self.n

    def to_dict(self) -> dict:
        return {
            "subset": None if self.subset is None else list(self.subset),
            "mass": self.mass,
            "f_value": self.f_value,
            "normalized": self.normalized,
            "kind": self.kind.value,
            "n": self.n,
        }


class _Evaluator:
    """Memoized ``log2 f`` of induced subgraphs of a strong power."""

    def __init__(self, g: Graph, n: int, point: SpectralPointId, cap: int) -> None:
        self.power = StrongPower(g, n)
        self.words = all_words(len(g), n)
        self.point = point
        self.cap = cap
        self.memo: dict[frozenset, float] = {}
        self.calls = 0

    def __call__(self, subset) -> float:
        key = frozenset(int(i) for i in subset)
        if key not in self.memo:
            self.calls += 1
            self.memo[key] = self._compute(sorted(key))
        return self.memo[key]

    def _compute(self, subset: list[int]) -> float:
        if not subset:
            raise InputError("empty subset")
        sub = self.power.induced(self.words[subset], cap=self.cap)
        m = len(sub)
        n_edges = sub.n_edges
        if n_edges == m * (m - 1) // 2:
            return 0.0
        if n_edges == 0:
            return math.log2(m)
        if self.point is SpectralPointId.ALPHA:
            value = float(alpha(sub, cap=self.cap))
        elif self.point is SpectralPointId.LOVASZ:
            value = lovasz_theta(sub, cap=self.cap).value
        else:
            value = frac_clique_cover(sub, cap=self.cap).value
        return math.log2(value)

    def lower(self, subset) -> float:
        """``log2 alpha``, a lower bound for every implemented point."""
        sub = self.power.induced(self.words[sorted(subset)], cap=self.cap)
        return math.log2(alpha(sub, cap=self.cap)) if len(sub) else 0.0


def _infer_length(size: int, d: int) -> int:
    n = max(1, round(math.log(size) / math.log(d))) if d > 1 else 1
    if d**n != size:
        raise InputError(f"a law with {size} entries is not indexed by words over {d} letters")
    return n


def _check_c(c: float) -> None:
    if not 0.0 < c < 1.0:
        raise InputError(f"mass threshold must lie in (0, 1), got {c}")


def _prefix_by_probability(probs: np.ndarray, order: np.ndarray, c: float) -> np.ndarray:
    cum = np.cumsum(probs[order])
    k = int(np.searchsorted(cum, c - 1e-12)) + 1
    return order[: min(k, len(order))]


def _probability_order(probs: np.ndarray) -> np.ndarray:
    # descending probability, ties by word index
    support = np.flatnonzero(probs > 0)
    return support[np.lexsort((support, -probs[support]))]


def min_subset(
    g: Graph,
    mu_n,
    c: float,
    point=SpectralPointId.FRAC_CLIQUE_COVER,
    mode: str = "auto",
    cap: int = POWER_CAP,
    exact_cap: int = EXACT_CAP,
    budget: int = EVAL_BUDGET,
) -> SubsetCertificate:
    """Minimize ``log2 f(G^{⊠n}[S])`` over word sets ``S`` with ``mu_n(S) >= c``.

    Parameters
    ----------
    mu_n : array_like
        Law on ``V(G)^n`` in lexicographic word order.
    mode : {"auto", "exact", "heuristic"}
        ``"auto"`` is exact whenever the support has at most ``exact_cap``
        words (or the graph is complete or edgeless) and heuristic otherwise.

    Returns
    -------
    SubsetCertificate
        ``kind`` tells whether the value is a proven minimum or an upper
        bound on it.
    """
    _check_c(c)
    point = SpectralPointId.parse(point)
    probs = _as_probs(mu_n).reshape(-1)
    n = _infer_length(len(probs), len(g))
    if probs.sum() < c - 1e-12:
        raise InfeasibleMass(f"total mass {probs.sum()} is below {c}")
    order = _probability_order(probs)

    # f is 1 on complete graphs and the vertex count on edgeless ones
    if g.n_edges == len(g) * (len(g) - 1) // 2 or g.n_edges == 0:
        chosen = _prefix_by_probability(probs, order, c)
        value = 0.0 if g.n_edges else math.log2(len(chosen))
        return SubsetCertificate(tuple(sorted(int(w) for w in chosen)), float(probs[chosen].sum()), value, SubsetKind.EXACT, n)

    if mode == "auto":
        mode = "exact" if len(order) <= exact_cap else "heuristic"
    ev = _Evaluator(g, n, point, cap)
    if mode == "exact":
        if len(order) > exact_cap:
            raise SizeCapExceeded(f"{len(order)} words exceed the exact search cap {exact_cap}")
        subset, value = _exact_search(probs, order, c, ev)
        kind = SubsetKind.EXACT
    elif mode == "heuristic":
        subset, value = _heuristic_search(probs, order, c, ev, n, len(g), budget)
        kind = SubsetKind.HEURISTIC
    else:
        raise InputError(f"unknown mode {mode!r}")
    return SubsetCertificate(tuple(sorted(int(w) for w in subset)), float(probs[list(subset)].sum()), value, kind, n)


def _exact_search(probs, order, c, ev):
    """Branch and bound over inclusion-minimal feasible sets.

    Words are decided in descending probability.  A branch is cut when the
    undecided mass cannot reach ``c`` or when ``log2 alpha`` of the words
    already taken is no better than the incumbent (``f`` only grows under
    inclusion).
    """
    p = probs[order]
    tail = np.concatenate([np.cumsum(p[::-1])[::-1], [0.0]])
    best_val = ev(_prefix_by_probability(probs, order, c))
    best_set = list(_prefix_by_probability(probs, order, c))
    target = c - 1e-12

    def rec(i: int, taken: list[int], mass: float) -> None:
        nonlocal best_val, best_set
        if mass >= target:
            val = ev([order[j] for j in taken])
            if val < best_val - 1e-12:
                best_val, best_set = val, [order[j] for j in taken]
            return
        if i == len(order) or mass + tail[i] < target:
            return
        if len(taken) >= 2 and ev.lower([order[j] for j in taken]) >= best_val - 1e-12:
            return
        rec(i + 1, taken + [i], mass + p[i])
        rec(i + 1, taken, mass)

    rec(0, [], 0.0)
    return best_set, best_val


def _heuristic_search(probs, order, c, ev, n, d, budget):
    """Best of probability greedy, second-order-class greedy and 2-swap search."""
    target = c - 1e-12
    candidates = []
    greedy = list(_prefix_by_probability(probs, order, c))
    candidates.append((ev(greedy), greedy))

    # whole second-order type classes, richest per-word probability first,
    # each step choosing among the next few classes the one with least f
    words = ev.words
    if n > 1:
        label = {w: second_order_type(words[w], d) for w in order.tolist()}
        key = lambda w: (label[w].counts, label[w].first, label[w].last)  # noqa: E731
    else:
        key = lambda w: w  # noqa: E731
    classes = [list(grp) for _, grp in groupby(sorted(order.tolist(), key=key), key=key)]
    classes.sort(key=lambda cl: (-probs[cl[0]], cl[0]))
    chosen: list[int] = []
    mass = 0.0
    pool = list(range(len(classes)))
    while mass < target and pool and ev.calls < budget:
        window = pool[:4]
        scored = [(ev(chosen + classes[j]), -probs[classes[j]].sum(), j) for j in window]
        _, _, j = min(scored)
        chosen = chosen + classes[j]
        mass += probs[classes[j]].sum()
        pool.remove(j)
    if mass >= target:
        # drop words that are not needed, least likely first
        for w in sorted(chosen, key=lambda w: (probs[w], -w)):
            if mass - probs[w] >= target:
                chosen.remove(w)
                mass -= probs[w]
        candidates.append((ev(chosen), chosen))

    value, best = min(candidates, key=lambda t: (t[0], len(t[1])))
    best = list(best)

    # 2-swap: replace one taken word by one outside word of no smaller mass deficit
    improved = True
    while improved and ev.calls < budget:
        improved = False
        mass = probs[best].sum()
        outside = [w for w in order.tolist() if w not in set(best)][:16]
        for x in sorted(best, key=lambda w: probs[w]):
            for y in [None] + outside:
                new_mass = mass - probs[x] + (probs[y] if y is not None else 0.0)
                if new_mass < target:
                    continue
                trial = [w for w in best if w != x] + ([y] if y is not None else [])
                if not trial:
                    continue
                val = ev(trial)
                if val < value - 1e-12:
                    value, best, improved = val, trial, True
                    break
                if ev.calls >= budget:
                    break
            if improved or ev.calls >= budget:
                break
    return best, value


def analytic_lower_bound(g: Graph, src: MarkovSource, n: int, c: float, point=SpectralPointId.FRAC_CLIQUE_COVER, tol: float = FW_TOL) -> SubsetCertificate:
    """``(1/n) F(G^{⊠n}, mu_n) - (1-c) log2|V| - 1/n``, floored at 0 (times ``n`` in ``f_value``).

    Valid for the fractional clique cover number; for other points only the
    trivial bound ``f >= 1`` is used.
    """
    point = SpectralPointId.parse(point)
    value = 0.0
    if point is SpectralPointId.FRAC_CLIQUE_COVER:
        fv = block_refinement(g, src, n, tol)
        value = max(0.0, fv.lower - (1 - c) * n * math.log2(len(g)) - 1.0)
    return SubsetCertificate(None, c, value, SubsetKind.ANALYTIC, n)


# -- scans -------------------------------------------------------------------
SCAN_HEADER = ["n", "c", "spectral_point", "heuristic_value", "lower_bound", "bracket_lower", "bracket_upper", "mass"]


@dataclass
class ScanRow:
    n: int
    c: float
    spectral_point: str
    heuristic_value: float
    lower_bound: float
    bracket_lower: float
    bracket_upper: float
    mass: float
    kind: str = SubsetKind.HEURISTIC.value
    bracket_k: int = 1

    def values(self) -> list:
        return [getattr(self, name) for name in SCAN_HEADER]


@dataclass
class ScanReport:
    rows: list[ScanRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SCAN_HEADER)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row.values()])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": SCAN_HEADER, "rows": [row.__dict__ for row in self.rows]}, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def aep_scan(
    g: Graph,
    src: MarkovSource,
    point=SpectralPointId.FRAC_CLIQUE_COVER,
    n_max: int = 6,
    c_list: Sequence[float] = (0.3, 0.5, 0.8),
    k_max: int = 4,
    cap: int = POWER_CAP,
    tol: float = FW_TOL,
) -> ScanReport:
    """Normalized min-subset values against the analytic bound and the F-rate bracket.

    Rows are ordered by ``(n, c)``.  The bracket of each row uses block
    length ``min(n, k_max)``; it brackets the fractional clique cover F-rate,
    which dominates the F-rate of the other points.
    """
    point = SpectralPointId.parse(point)
    report = ScanReport()
    for n in range(1, n_max + 1):
        mu = marginal(src, n)
        bracket = markov_aep_bracket(g, src, min(n, k_max), tol)
        for c in sorted(c_list):
            cert = min_subset(g, mu, c, point, cap=cap)
            low = analytic_lower_bound(g, src, n, c, point, tol)
            b_low = bracket.lower if point is SpectralPointId.FRAC_CLIQUE_COVER else 0.0
            report.rows.append(
                ScanRow(n, float(c), point.value, cert.normalized, low.normalized, b_low, bracket.upper, cert.mass, cert.kind.value, bracket.k)
            )
    return report


@dataclass
class BlockInequality:
    n: int
    m: int
    a_n: float
    a_m: float
    log_f: float

    @property
    def margin(self) -> float:
        return self.a_m + (self.n - self.m) * self.log_f - self.a_n

    @property
    def ok(self) -> bool:
        return self.margin >= -1e-9


def block_inequality_check(
    g: Graph, src: MarkovSource, point, n: int, m: int, c: float = 0.5, cap: int = POWER_CAP
) -> BlockInequality:
    """Check ``a_n <= a_m + (n - m) log2 f(G)`` on computed min-subset values."""
    if not 1 <= m <= n:
        raise InputError("need 1 <= m <= n")
    point = SpectralPointId.parse(point)
    a_n = min_subset(g, marginal(src, n), c, point, cap=cap).f_value
    a_m = min_subset(g, marginal(src, m), c, point, cap=cap).f_value
    ev = _Evaluator(g, 1, point, cap)
    log_f = ev(range(len(g)))
    return BlockInequality(n, m, a_n, a_m, log_f)
