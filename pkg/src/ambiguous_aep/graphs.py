"""Finite simple graphs over labeled alphabets.

Edges join *confusable* letters.  Two letters ``g`` and ``h`` are written
``g ~ h`` (confusable-or-equal) when they are adjacent or identical; the
strong product and the pullback are both defined through this relation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import EmptySubset, InputError, SizeCapExceeded

POWER_CAP = 4096
CLIQUE_CAP = 128


class Graph:
    """Immutable simple graph with string vertex labels.

    Parameters
    ----------
    vertices : sequence of str
        Distinct vertex labels; their order fixes the vertex indices.
    adjacency : array_like
        Square symmetric boolean matrix with a zero diagonal.
    """

    __slots__ = ("_labels", "_adj", "_index")

    def __init__(self, vertices: Sequence[str], adjacency) -> None:
        labels = tuple(str(v) for v in vertices)
        adj = np.array(adjacency, dtype=bool)
        if adj.shape != (len(labels), len(labels)):
            raise InputError(
                f"adjacency shape {adj.shape} does not match {len(labels)} vertices"
            )
        if len(set(labels)) != len(labels):
            raise InputError("vertex labels must be unique")
        if np.any(np.diag(adj)):
            raise InputError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise InputError("adjacency must be symmetric")
        adj.setflags(write=False)
        self._labels = labels
        self._adj = adj
        self._index = {v: i for i, v in enumerate(labels)}

    @classmethod
    def from_edges(cls, vertices: Sequence[str], edges: Iterable[tuple]) -> "Graph":
        vertices = [str(v) for v in vertices]
        index = {v: i for i, v in enumerate(vertices)}
        adj = np.zeros((len(vertices), len(vertices)), dtype=bool)
        for u, v in edges:
            try:
                i, j = index[str(u)], index[str(v)]
            except KeyError as exc:
                raise InputError(f"edge endpoint {exc.args[0]!r} is not a vertex") from None
            if i == j:
                raise InputError(f"self-loop at {u!r}")
            if adj[i, j]:
                raise InputError(f"duplicate edge {u!r}-{v!r}")
            adj[i, j] = adj[j, i] = True
        return cls(vertices, adj)

    # -- basic accessors -------------------------------------------------
    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    @property
    def n_vertices(self) -> int:
        return len(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def index(self, label: str) -> int:
        return self._index[label]

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self._adj, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def n_edges(self) -> int:
        return int(self._adj.sum()) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self._adj[i])

    def confusable(self, i: int, j: int) -> bool:
        """``True`` when vertices ``i`` and ``j`` are adjacent or equal."""
        return i == j or bool(self._adj[i, j])

    def confusability(self) -> np.ndarray:
        """Adjacency plus identity: the matrix of the ``~`` relation."""
        return self._adj | np.eye(len(self), dtype=bool)

    def is_clique(self, subset: Iterable[int]) -> bool:
        s = list(subset)
        sub = self._adj[np.ix_(s, s)]
        return bool(np.all(sub | np.eye(len(s), dtype=bool)))

    def is_independent(self, subset: Iterable[int]) -> bool:
        s = list(subset)
        return not bool(self._adj[np.ix_(s, s)].any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._labels == other._labels and np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return hash((self._labels, self._adj.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n_vertices={len(self)}, n_edges={self.n_edges})"

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": list(self._labels),
            "edges": [[self._labels[i], self._labels[j]] for i, j in self.edges()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        try:
            return cls.from_edges(data["vertices"], [tuple(e) for e in data["edges"]])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed graph description: {exc}") from exc


def load_graph(path) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    return Graph.from_dict(data)


def save_graph(graph: Graph, path) -> None:
    Path(path).write_text(json.dumps(graph.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class VertexWord:
    """A string ``x_1 ... x_n`` of vertex indices of ``graph``."""

    graph: Graph
    letters: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.letters) < 1:
            raise InputError("a word has at least one letter")
        d = len(self.graph)
        if any(not 0 <= a < d for a in self.letters):
            raise InputError("word letter outside the vertex range")

    @classmethod
    def from_labels(cls, graph: Graph, labels: Iterable[str]) -> "VertexWord":
        return cls(graph, tuple(graph.index(v) for v in labels))

    def __len__(self) -> int:
        return len(self.letters)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.graph.labels[a] for a in self.letters)


# -- standard families -------------------------------------------------------
def _default_labels(d: int) -> list[str]:
    return [str(i) for i in range(d)]


def complete_graph(d: int) -> Graph:
    return Graph(_default_labels(d), ~np.eye(d, dtype=bool))


def edgeless_graph(d: int) -> Graph:
    return Graph(_default_labels(d), np.zeros((d, d), dtype=bool))


def cycle_graph(d: int) -> Graph:
    if d < 3:
        raise InputError("a cycle needs at least 3 vertices")
    return Graph.from_edges(_default_labels(d), [(i, (i + 1) % d) for i in range(d)])


def random_graph(d: int, p: float, rng: np.random.Generator) -> Graph:
    upper = np.triu(rng.random((d, d)) < p, 1)
    return Graph(_default_labels(d), upper | upper.T)


# -- constructions -----------------------------------------------------------
def complement(g: Graph) -> Graph:
    return Graph(g.labels, ~g.adjacency & ~np.eye(len(g), dtype=bool))


def _pair_label(u: str, v: str) -> str:
    return f"({u},{v})"


def strong_product(g: Graph, h: Graph) -> Graph:
    """Strong product; vertex ``(i, j)`` has index ``i * |V(h)| + j``."""
    conf = np.kron(g.confusability(), h.confusability())
    np.fill_diagonal(conf, False)
    labels = [_pair_label(u, v) for u in g.labels for v in h.labels]
    return Graph(labels, conf)


def costrong_product(g: Graph, h: Graph) -> Graph:
    """Costrong (disjunctive) product: adjacent iff adjacent in some coordinate."""
    ga = np.kron(g.adjacency, np.ones((len(h), len(h)), dtype=bool))
    ha = np.kron(np.ones((len(g), len(g)), dtype=bool), h.adjacency)
    labels = [_pair_label(u, v) for u in g.labels for v in h.labels]
    return Graph(labels, ga | ha)


def disjoint_union(g: Graph, h: Graph) -> Graph:
    d = len(g) + len(h)
    adj = np.zeros((d, d), dtype=bool)
    adj[: len(g), : len(g)] = g.adjacency
    adj[len(g):, len(g):] = h.adjacency
    labels = [f"0:{v}" for v in g.labels] + [f"1:{v}" for v in h.labels]
    return Graph(labels, adj)


def induced_subgraph(g: Graph, subset: Iterable[int]) -> Graph:
    s = list(subset)
    if not s:
        raise EmptySubset("induced subgraph of an empty vertex set")
    if len(set(s)) != len(s):
        raise InputError("subset contains repeated vertices")
    return Graph([g.labels[i] for i in s], g.adjacency[np.ix_(s, s)])


def word_label(graph: Graph, letters: Sequence[int]) -> str:
    parts = [graph.labels[a] for a in letters]
    if all(len(p) == 1 for p in parts):
        return "".join(parts)
    return ",".join(parts)


def all_words(d: int, n: int) -> np.ndarray:
    """All length-``n`` words over ``range(d)`` in lexicographic order, shape ``(d**n, n)``."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((d,) * n).reshape(n, -1).T
    return grids.astype(np.int64)


def word_to_index(letters: Sequence[int], d: int) -> int:
    idx = 0
    for a in letters:
        idx = idx * d + int(a)
    return idx


def index_to_word(idx: int, d: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        idx, r = divmod(idx, d)
        out.append(r)
    return tuple(reversed(out))


def strong_power(g: Graph, n: int, cap: int = POWER_CAP) -> Graph:
    """Materialized ``n``-fold strong power; vertex index = lexicographic word rank."""
    if n < 1:
        raise InputError("strong power exponent must be positive")
    size = len(g) ** n
    if size > cap:
        raise SizeCapExceeded(f"|V|^n = {size} exceeds cap {cap}")
    conf = np.ones((1, 1), dtype=bool)
    base = g.confusability()
    for _ in range(n):
        conf = np.kron(conf, base)
    np.fill_diagonal(conf, False)
    labels = [word_label(g, w) for w in all_words(len(g), n)]
    return Graph(labels, conf)


class StrongPower:
    """Lazy view of ``g^{⊠n}`` answering confusability queries on words.

    Used when the power is too large to materialize; only induced subgraphs
    on explicit word lists are ever built.
    """

    def __init__(self, g: Graph, n: int) -> None:
        if n < 1:
            raise InputError("strong power exponent must be positive")
        self.base = g
        self.n = n
        self._conf = g.confusability()

    @property
    def n_vertices(self) -> int:
        return len(self.base) ** self.n

    def confusable(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return all(self._conf[a, b] for a, b in zip(x, y))

    def induced(self, words, cap: int = POWER_CAP) -> Graph:
        words = np.asarray(words, dtype=np.int64).reshape(-1, self.n)
        if len(words) == 0:
            raise EmptySubset("induced subgraph of an empty word set")
        if len(words) > cap:
            raise SizeCapExceeded(f"{len(words)} words exceed cap {cap}")
        conf = np.ones((len(words), len(words)), dtype=bool)
        for t in range(self.n):
            col = words[:, t]
            conf &= self._conf[np.ix_(col, col)]
        np.fill_diagonal(conf, False)
        labels = [word_label(self.base, w) for w in words.tolist()]
        return Graph(labels, conf)


def is_cohomomorphism(g: Graph, h: Graph, mapping: Sequence[int]) -> bool:
    """Whether ``mapping`` sends distinguishable pairs of ``g`` to distinguishable pairs of ``h``.

    Equivalently, ``mapping`` is a graph homomorphism between the complements.
    """
    m = np.asarray(mapping, dtype=np.int64)
    if m.shape != (len(g),) or (len(g) and (m.min() < 0 or m.max() >= len(h))):
        raise InputError("mapping must send every vertex of g to a vertex of h")
    distinct_g = ~g.confusability()
    image_conf = h.confusability()[np.ix_(m, m)]
    return not bool(np.any(distinct_g & image_conf))


# -- cliques -------------------------------------------------------------------
def _bitsets(g: Graph) -> list[int]:
    out = []
    for row in g.adjacency:
        mask = 0
        for j in np.flatnonzero(row).tolist():
            mask |= 1 << j
        out.append(mask)
    return out


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def maximal_cliques(g: Graph, cap: int = CLIQUE_CAP) -> list[tuple[int, ...]]:
    """All inclusion-maximal cliques, sorted, via pivoting Bron–Kerbosch.

    Raises
    ------
    SizeCapExceeded
        If the graph has more than ``cap`` vertices.
    """
    if len(g) > cap:
        raise SizeCapExceeded(f"{len(g)} vertices exceed clique cap {cap}")
    nbr = _bitsets(g)
    found: list[tuple[int, ...]] = []
    stack = [(0, (1 << len(g)) - 1, 0)]
    while stack:
        r, p, x = stack.pop()
        if not p:
            if not x:
                found.append(tuple(_bits(r)))
            continue
        # pivot maximizing |P ∩ N(u)|, lowest index on ties
        pivot = max(_bits(p | x), key=lambda u: ((p & nbr[u]).bit_count(), -u))
        for v in _bits(p & ~nbr[pivot]):
            bit = 1 << v
            stack.append((r | bit, p & nbr[v], x & nbr[v]))
            p &= ~bit
            x |= bit
    return sorted(found)


def clique_matrix(n_vertices: int, cliques: Sequence[Sequence[int]]) -> np.ndarray:
    """Vertex-by-clique incidence matrix (float)."""
    m = np.zeros((n_vertices, len(cliques)))
    for k, c in enumerate(cliques):
        m[list(c), k] = 1.0
    return m


def is_isomorphic(g: Graph, h: Graph) -> bool:
    """Brute-force isomorphism test for tiny graphs (test helper)."""
    return find_isomorphism(g, h) is not None


def find_isomorphism(g: Graph, h: Graph):
    if len(g) != len(h) or g.n_edges != h.n_edges:
        return None
    if sorted(g.adjacency.sum(0)) != sorted(h.adjacency.sum(0)):
        return None
    a, b = g.adjacency, h.adjacency
    for perm in itertools.permutations(range(len(g))):
        p = list(perm)
        if np.array_equal(a, b[np.ix_(p, p)]):
            return p
    return None
