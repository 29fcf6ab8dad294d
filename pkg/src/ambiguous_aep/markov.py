"""Stationary Markov sources: stationary law, marginals, blocking, sampling."""

from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .exceptions import InputError, InvalidStochasticMatrix, NotIrreducible, SizeCapExceeded, SupportMismatch
from .probability import (
    ENUM_CAP,
    PairDist,
    conditional_entropy,
    conditional_kl,
    entropy,
    mutual_information,
    second_order_type,
)

STOCHASTIC_TOL = 1e-12


class PeriodWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class MarkovSource:
    """Stationary Markov chain with transition matrix ``W[a, b] = W(b|a)``.

    Build instances with :func:`build_chain`; ``pi`` is the stationary law
    and ``period`` the period of the chain on the support of ``pi``.
    """

    alphabet: tuple[str, ...]
    W: np.ndarray
    pi: np.ndarray
    period: int = 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_states(self) -> int:
        return len(self.alphabet)

    @property
    def pair_dist(self) -> PairDist:
        """Law of two consecutive letters, ``P(a, b) = pi(a) W(b|a)``."""
        return PairDist(self.alphabet, self.pi[:, None] * self.W)

    @property
    def pair_matrix(self) -> np.ndarray:
        return self.pi[:, None] * self.W

    def mutual_information(self) -> float:
        """``I(1:2)_P`` between consecutive letters."""
        return mutual_information(self.pair_matrix)

    def to_dict(self) -> dict:
        return {"states": list(self.alphabet), "W": self.W.tolist()}


def _validate_stochastic(W: np.ndarray) -> None:
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
        raise InvalidStochasticMatrix("transition matrix must be square and nonempty")
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise InvalidStochasticMatrix("transition probabilities must be nonnegative")
    if np.any(np.abs(W.sum(axis=1) - 1.0) > STOCHASTIC_TOL * W.shape[0]):
        raise InvalidStochasticMatrix("rows of the transition matrix must sum to 1")


def _period(W: np.ndarray, states: np.ndarray) -> int:
    """gcd of cycle lengths inside a strongly connected class (BFS level differences)."""
    allowed = set(states.tolist())
    root = int(states[0])
    level = {root: 0}
    queue = deque([root])
    g = 0
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(W[u] > 0).tolist():
            if v not in allowed:
                continue
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g) or 1


def build_chain(W, alphabet: Sequence[str] | None = None) -> MarkovSource:
    """Validate ``W`` and attach its unique stationary distribution and period.

    Raises
    ------
    InvalidStochasticMatrix
        If ``W`` is not row-stochastic.
    NotIrreducible
        If ``W`` has more than one closed communicating class.
    """
    W = np.array(W, dtype=float)
    _validate_stochastic(W)
    d = len(W)
    alphabet = tuple(str(a) for a in (alphabet if alphabet is not None else range(d)))
    if len(alphabet) != d:
        raise InputError("alphabet size does not match the transition matrix")

    n_comp, labels = connected_components(W > 0, directed=True, connection="strong")
    closed = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        outside = np.setdiff1d(np.arange(d), members)
        if not np.any(W[np.ix_(members, outside)] > 0):
            closed.append(members)
    if len(closed) != 1:
        raise NotIrreducible(f"chain has {len(closed)} closed communicating classes")
    cls = closed[0]

    # (W^T - I) pi = 0 on the closed class, plus normalization
    sub = W[np.ix_(cls, cls)]
    A = np.vstack([sub.T - np.eye(len(cls)), np.ones(len(cls))])
    rhs = np.zeros(len(cls) + 1)
    rhs[-1] = 1.0
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    pi = np.zeros(d)
    pi[cls] = np.clip(sol, 0.0, None)
    pi /= pi.sum()
    pi.setflags(write=False)
    W.setflags(write=False)
    return MarkovSource(alphabet, W, pi, _period(W, cls))


def iid_source(p, alphabet: Sequence[str] | None = None) -> MarkovSource:
    """Memoryless source as a chain whose rows all equal ``p``."""
    p = np.asarray(p, dtype=float)
    return build_chain(np.tile(p, (len(p), 1)), alphabet)


def load_chain(path) -> MarkovSource:
    try:
        data = json.loads(Path(path).read_text())
        return build_chain(data["W"], data.get("states"))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read chain file {path}: {exc}") from exc


def save_chain(src: MarkovSource, path) -> None:
    Path(path).write_text(json.dumps(src.to_dict(), indent=2) + "\n")


# -- probabilities -------------------------------------------------------------
def _letters(src: MarkovSource, x) -> tuple[int, ...]:
    letters = getattr(x, "letters", x)
    if isinstance(letters, str):
        index = {a: i for i, a in enumerate(src.alphabet)}
        return tuple(index[c] for c in letters)
    return tuple(int(a) for a in letters)


def string_probability(src: MarkovSource, x) -> float:
    """``pi(x_1) prod_i W(x_{i+1}|x_i)``; a string label, letter indices or a VertexWord."""
    letters = _letters(src, x)
    if not letters:
        raise InputError("empty word")
    prob = src.pi[letters[0]]
    for a, b in zip(letters[:-1], letters[1:]):
        prob *= src.W[a, b]
    return float(prob)


def string_probability_from_type(src: MarkovSource, x) -> float:
    """The same probability through the second-order type of ``x``.

    ``P_1(x_1) 2^{-(n-1)[H(2|1)_Q + D(Q_{2|1} || W)]}``, or 0 when ``x`` uses
    a forbidden transition.
    """
    letters = _letters(src, x)
    if len(letters) == 1:
        return float(src.pi[letters[0]])
    q = second_order_type(letters, src.n_states)
    Q = q.matrix
    try:
        div = conditional_kl(Q, src.W)
    except SupportMismatch:
        return 0.0
    exponent = (len(letters) - 1) * (conditional_entropy(Q) + div)
    return float(src.pi[letters[0]] * 2.0 ** (-exponent))


def marginal(src: MarkovSource, n: int, cap: int = ENUM_CAP) -> np.ndarray:
    """Law of ``(X_1, ..., X_n)`` as a flat vector in lexicographic word order."""
    if n < 1:
        raise InputError("marginal length must be positive")
    d = src.n_states
    if d**n > cap:
        raise SizeCapExceeded(f"|X|^n = {d ** n} exceeds enumeration cap {cap}")
    key = ("marginal", n)
    if key not in src._cache:
        p = np.array(src.pi, dtype=float)
        for _ in range(n - 1):
            p = (p.reshape(-1, d)[:, :, None] * src.W[None]).reshape(-1)
        p.setflags(write=False)
        src._cache[key] = p
    return src._cache[key]


def block_entropy(src: MarkovSource, n: int) -> float:
    """``H(X_1 ... X_n)`` in closed form: ``H(pi) + (n-1) * entropy_rate``."""
    return entropy(src.pi) + (n - 1) * entropy_rate(src)


def entropy_rate(src: MarkovSource) -> float:
    """``sum_a pi(a) H(W(.|a))`` in bits per letter."""
    return float(sum(src.pi[a] * entropy(src.W[a]) for a in range(src.n_states) if src.pi[a] > 0))


# -- blocking ------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BlockSource:
    """A chain read in non-overlapping blocks of ``k`` letters."""

    base: MarkovSource
    k: int
    chain: MarkovSource

    @property
    def pair_matrix(self) -> np.ndarray:
        """Law of two consecutive blocks, ``(X_1..X_k, X_{k+1}..X_{2k})``."""
        d = self.chain.n_states
        return marginal(self.base, 2 * self.k).reshape(d, d)

    def mutual_information(self) -> float:
        return mutual_information(self.pair_matrix)


def block(src: MarkovSource, k: int, cap: int = ENUM_CAP) -> BlockSource:
    """Block chain over ``X^k``; warns when ``k`` shares a factor with the period."""
    if k < 1:
        raise InputError("block length must be positive")
    if k == 1:
        return BlockSource(src, 1, src)
    d = src.n_states
    if d ** (2 * k) > cap:
        raise SizeCapExceeded(f"block pair alphabet {d ** (2 * k)} exceeds cap {cap}")
    if math.gcd(k, src.period) > 1:
        warnings.warn(
            f"block length {k} is not coprime to the period {src.period}; "
            "the block chain need not be irreducible",
            PeriodWarning,
        )
    # W_k(v|u) = W(v_1|u_k) * prod_i W(v_{i+1}|v_i)
    inner = marginal_conditional_paths(src, k)
    last = np.arange(d**k) % d
    Wk = src.W[last][:, np.arange(d**k) // d ** (k - 1)] * inner[None, :]
    pi_k = marginal(src, k)
    alphabet = tuple(word_label_simple(src.alphabet, w, k) for w in range(d**k))
    Wk.setflags(write=False)
    return BlockSource(src, k, MarkovSource(alphabet, Wk, np.asarray(pi_k), src.period // math.gcd(k, src.period)))


def marginal_conditional_paths(src: MarkovSource, k: int) -> np.ndarray:
    """``prod_i W(v_{i+1}|v_i)`` for every word ``v`` of length ``k``."""
    d = src.n_states
    p = np.ones(d)
    for _ in range(k - 1):
        p = (p.reshape(-1, d)[:, :, None] * src.W[None]).reshape(-1)
    return p


def word_label_simple(alphabet: Sequence[str], index: int, k: int) -> str:
    d = len(alphabet)
    letters = []
    for _ in range(k):
        index, r = divmod(index, d)
        letters.append(r)
    parts = [alphabet[a] for a in reversed(letters)]
    return "".join(parts) if all(len(s) == 1 for s in parts) else ",".join(parts)


# -- sampling ------------------------------------------------------------------
def sample(src: MarkovSource, n: int, seed=None, start: int | None = None) -> np.ndarray:
    """Draw ``X_1 ... X_n`` (letter indices); ``start`` fixes ``X_1``."""
    if n < 1:
        raise InputError("sample length must be positive")
    rng = np.random.default_rng(seed)
    d = src.n_states
    cum = np.cumsum(src.W, axis=1)
    out = np.empty(n, dtype=np.int64)
    out[0] = rng.choice(d, p=src.pi) if start is None else start
    u = rng.random(n - 1)
    for i in range(1, n):
        out[i] = min(int(np.searchsorted(cum[out[i - 1]], u[i - 1], side="right")), d - 1)
    return out


def format_word(src: MarkovSource, letters) -> str:
    labels = [src.alphabet[a] for a in letters]
    return "".join(labels) if all(len(s) == 1 for s in labels) else " ".join(labels)
