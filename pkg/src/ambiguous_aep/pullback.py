"""Pullback graphs along observation maps and the hidden-Markov reduction.

For ``phi: Z -> V(G)`` the pullback ``phi^*(G)`` makes two hidden states
confusable when their observations are confusable or equal.  Spectral
points, refinements and typical-subset minima then agree on both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import InputError
from .frate import FRateBracket, SubsetCertificate, markov_aep_bracket, min_subset
from .graphs import Graph, all_words, induced_subgraph, is_cohomomorphism, load_graph, strong_product
from .markov import MarkovSource, build_chain, marginal
from .probability import _as_probs, entropy
from .refinement import FW_TOL, graph_entropy_refinement
from .spectral import SpectralPointId, evaluate_report


@dataclass(frozen=True)
class Observation:
    """Observation map ``phi`` from hidden states onto the vertices of ``graph``."""

    hidden: tuple[str, ...]
    graph: Graph
    phi: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.hidden) != len(self.phi):
            raise InputError("every hidden state needs an image")
        if len(set(self.hidden)) != len(self.hidden):
            raise InputError("hidden state labels must be distinct")
        if any(not 0 <= x < len(self.graph) for x in self.phi):
            raise InputError("observation map points outside the graph")

    @classmethod
    def from_map(cls, hidden: Sequence[str], graph: Graph, mapping: dict) -> "Observation":
        try:
            phi = tuple(graph.index(str(mapping[str(z)])) for z in hidden)
        except KeyError as exc:
            raise InputError(f"no image for hidden state {exc.args[0]!r}") from None
        return cls(tuple(str(z) for z in hidden), graph, phi)

    @property
    def n_hidden(self) -> int:
        return len(self.hidden)

    def to_dict(self) -> dict:
        labels = self.graph.labels
        return {
            "hidden": list(self.hidden),
            "map": {z: labels[x] for z, x in zip(self.hidden, self.phi)},
            "graph": self.graph.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "Observation":
        g = data["graph"]
        if isinstance(g, str):
            graph = load_graph((base or Path(".")) / g)
        else:
            graph = Graph.from_dict(g)
        return cls.from_map(data["hidden"], graph, data["map"])


def load_observation(path) -> Observation:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        return Observation.from_dict(data, base=path.parent)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read observation file {path}: {exc}") from exc


def save_observation(obs: Observation, path) -> None:
    Path(path).write_text(json.dumps(obs.to_dict(), indent=2) + "\n")


def pullback(obs: Observation) -> Graph:
    """Graph on hidden states: ``z1 ~ z2`` iff ``phi(z1) ~= phi(z2)``."""
    conf = obs.graph.confusability()
    phi = np.asarray(obs.phi, dtype=np.int64)
    adj = conf[np.ix_(phi, phi)].copy()
    np.fill_diagonal(adj, False)
    return Graph(obs.hidden, adj)


def is_pullback_cohomomorphism(obs: Observation) -> bool:
    """``phi`` maps distinguishable hidden pairs to distinguishable pairs."""
    return is_cohomomorphism(pullback(obs), obs.graph, obs.phi)


def product_observation(obs1: Observation, obs2: Observation) -> Observation:
    """``phi_1 x phi_2`` onto ``G_1 ⊠ G_2``."""
    g = strong_product(obs1.graph, obs2.graph)
    m = len(obs2.graph)
    hidden = tuple(f"({a},{b})" for a in obs1.hidden for b in obs2.hidden)
    phi = tuple(x * m + y for x in obs1.phi for y in obs2.phi)
    return Observation(hidden, g, phi)


def pullback_product_check(obs1: Observation, obs2: Observation) -> bool:
    """Bit-for-bit equality of ``phi_1^*(G_1) ⊠ phi_2^*(G_2)`` and ``(phi_1 x phi_2)^*(G_1 ⊠ G_2)``."""
    left = strong_product(pullback(obs1), pullback(obs2))
    right = pullback(product_observation(obs1, obs2))
    return left.labels == right.labels and bool(np.array_equal(left.adjacency, right.adjacency))


@dataclass
class IdentityCheck:
    left: float
    right: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.tolerance - abs(self.left - self.right)

    @property
    def equal(self) -> bool:
        return self.margin >= 0

    def to_dict(self) -> dict:
        return {"left": self.left, "right": self.right, "equal": self.equal, "margin": self.margin, **self.details}


def pullback_f_identity(obs: Observation, t: Sequence[int], point=SpectralPointId.FRAC_CLIQUE_COVER, tol: float = 1e-6) -> IdentityCheck:
    """``f(phi^*(G)[T])`` against ``f(G[phi(T)])``."""
    t = sorted(set(int(z) for z in t))
    image = sorted({obs.phi[z] for z in t})
    left = evaluate_report(point, induced_subgraph(pullback(obs), t))
    right = evaluate_report(point, induced_subgraph(obs.graph, image))
    slack = tol + left.certified_gap + right.certified_gap
    return IdentityCheck(left.value, right.value, slack)


def pushforward(obs: Observation, p, n: int = 1) -> np.ndarray:
    """Law of ``phi^n(Z_1..Z_n)`` on ``V(G)^n`` for a law ``p`` on ``Z^n``."""
    probs = _as_probs(p).reshape(-1)
    if probs.shape != (obs.n_hidden**n,):
        raise InputError(f"law on hidden words of length {n} must have {obs.n_hidden ** n} entries")
    return np.bincount(observed_word_index(obs, n), weights=probs, minlength=len(obs.graph) ** n)


def observed_word_index(obs: Observation, n: int) -> np.ndarray:
    """Observed word index of every hidden word of length ``n``."""
    words = all_words(obs.n_hidden, n)
    images = np.asarray(obs.phi, dtype=np.int64)[words]
    weights = len(obs.graph) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return images @ weights


def pullback_refinement_identity(obs: Observation, p, tol: float = FW_TOL) -> IdentityCheck:
    """``F(phi^*(G), P)`` against ``F(G, phi_*(P))``, equal within the two certified gaps."""
    left = graph_entropy_refinement(pullback(obs), p, tol=tol)
    right = graph_entropy_refinement(obs.graph, pushforward(obs, p), tol=tol)
    slack = 2.0 * max(left.certified_gap, right.certified_gap) + 1e-9
    return IdentityCheck(left.value, right.value, slack, {"gap_left": left.certified_gap, "gap_right": right.certified_gap})


def pullback_min_subset_identity(
    obs: Observation, mu_n, c: float, point=SpectralPointId.FRAC_CLIQUE_COVER, mode: str = "exact"
) -> tuple[SubsetCertificate, SubsetCertificate]:
    """Exact minima on the hidden side and on the observed side (pushforward law)."""
    probs = _as_probs(mu_n).reshape(-1)
    n = round(math.log(len(probs)) / math.log(obs.n_hidden)) if obs.n_hidden > 1 else 1
    hidden = min_subset(pullback(obs), probs, c, point, mode=mode)
    observed = min_subset(obs.graph, pushforward(obs, probs, n), c, point, mode=mode)
    return hidden, observed


# -- hidden Markov sources ------------------------------------------------------
def enlarge_emissions(src: MarkovSource, emission, graph: Graph) -> tuple[MarkovSource, Observation]:
    """Chain on pairs ``(z, x)`` so that a random emission becomes a function.

    ``emission[z, x]`` is the probability of observing vertex ``x`` of
    ``graph`` in hidden state ``z``; the new chain moves
    ``(z, x) -> (z', x')`` with probability ``W(z'|z) E(x'|z')``.
    """
    E = np.asarray(emission, dtype=float)
    if E.shape != (src.n_states, len(graph)):
        raise InputError("emission matrix must be hidden states x observed letters")
    if np.any(E < 0) or np.any(np.abs(E.sum(axis=1) - 1) > 1e-12):
        raise InputError("emission rows must be probability vectors")
    d, m = E.shape
    W = np.broadcast_to(src.W[:, None, :, None] * E[None, None, :, :], (d, m, d, m)).reshape(d * m, d * m)
    hidden = tuple(f"({z},{x})" for z in src.alphabet for x in graph.labels)
    chain = build_chain(W, hidden)
    obs = Observation(hidden, graph, tuple(x for _ in range(d) for x in range(m)))
    return chain, obs


def _joint_with_first(obs: Observation, src: MarkovSource, k: int) -> np.ndarray:
    """Joint law of ``(Z_1, X_1..X_k)`` as a ``|Z| x |V|^k`` matrix."""
    mu = marginal(src, k)
    z1 = np.arange(obs.n_hidden**k) // obs.n_hidden ** (k - 1)
    idx = z1 * len(obs.graph) ** k + observed_word_index(obs, k)
    return np.bincount(idx, weights=mu, minlength=obs.n_hidden * len(obs.graph) ** k).reshape(obs.n_hidden, -1)


def observed_block_entropy(obs: Observation, src: MarkovSource, k: int) -> float:
    return entropy(pushforward(obs, marginal(src, k), k)) if k else 0.0


def hmm_entropy_bracket(obs: Observation, src: MarkovSource, k: int) -> tuple[float, float]:
    """``[H(X_k | X_1..X_{k-1}, Z_1), H(X_k | X_1..X_{k-1})]`` of the observed process."""
    upper = observed_block_entropy(obs, src, k) - observed_block_entropy(obs, src, k - 1)
    joint_k = entropy(_joint_with_first(obs, src, k))
    joint_prev = entropy(_joint_with_first(obs, src, k - 1)) if k > 1 else entropy(src.pi)
    return joint_k - joint_prev, upper


@dataclass
class CrosscheckRow:
    k: int
    frate: FRateBracket
    push_entropy: float
    hmm_lower: float
    hmm_upper: float
    overlap: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "frate_lower": self.frate.lower,
            "frate_upper": self.frate.upper,
            "certified_gap": self.frate.certified_gap,
            "pushforward_entropy_rate": self.push_entropy,
            "hmm_lower": self.hmm_lower,
            "hmm_upper": self.hmm_upper,
            "overlap": self.overlap,
        }


def hmm_frate_crosscheck(obs: Observation, src: MarkovSource, k_max: int, tol: float = FW_TOL) -> list[CrosscheckRow]:
    """F-rate bracket of ``(phi^*(G), mu)`` against the entropy-rate bracket of the observed process.

    The observed graph must be edgeless, so the F-rate is the entropy rate of
    the observed process.  ``push_entropy`` is ``H(phi_*(mu_{1..k})) / k``,
    an independent evaluation of the upper end of the F bracket.
    """
    if obs.graph.n_edges:
        raise InputError("the cross-check needs an edgeless observed graph")
    if obs.n_hidden != src.n_states:
        raise InputError("observation and chain disagree on the hidden alphabet")
    g = pullback(obs)
    rows = []
    for k in range(1, k_max + 1):
        bracket = markov_aep_bracket(g, src, k, tol)
        lo, hi = hmm_entropy_bracket(obs, src, k)
        slack = bracket.certified_gap + 1e-9
        overlap = bracket.lower <= hi + slack and lo <= bracket.upper + slack
        rows.append(CrosscheckRow(k, bracket, observed_block_entropy(obs, src, k) / k, lo, hi, overlap))
    return rows
