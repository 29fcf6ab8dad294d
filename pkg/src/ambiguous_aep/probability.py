"""Finite distributions, entropies, first- and second-order types.

All information quantities are in bits.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, log2
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import DomainError, InputError, SizeCapExceeded, SupportMismatch, WordTooShort
from .graphs import VertexWord, all_words

NORM_TOL = 1e-12
ENUM_CAP = 2**20


def _as_probs(p) -> np.ndarray:
    if isinstance(p, (Dist, PairDist)):
        return p.probs
    return np.asarray(p, dtype=float)


@dataclass(frozen=True, eq=False)
class Dist:
    """Probability vector on a labeled alphabet."""

    alphabet: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float).reshape(-1)
        object.__setattr__(self, "alphabet", tuple(str(a) for a in self.alphabet))
        if probs.shape != (len(self.alphabet),):
            raise InputError("alphabet and probability vector lengths differ")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL * max(1, len(probs)):
            raise InputError("probabilities must be nonnegative and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, alphabet: Sequence[str]) -> "Dist":
        return cls(tuple(alphabet), np.full(len(alphabet), 1.0 / len(alphabet)))

    def __len__(self) -> int:
        return len(self.alphabet)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.probs, other.probs)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Dist":
        try:
            return cls(tuple(data["alphabet"]), np.asarray(data["probs"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed distribution: {exc}") from exc


@dataclass(frozen=True, eq=False)
class PairDist:
    """Distribution on ordered pairs ``X x X`` stored as a row-major matrix."""

    alphabet: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        object.__setattr__(self, "alphabet", tuple(str(a) for a in self.alphabet))
        d = len(self.alphabet)
        if probs.shape != (d, d):
            raise InputError("pair distribution must be a |X| x |X| matrix")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL * max(1, probs.size):
            raise InputError("pair probabilities must be nonnegative and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def first_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def second_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def conditional(self) -> np.ndarray:
        """Row-conditional matrix ``Q(b|a)``; rows of zero mass are left zero."""
        rows = self.first_marginal
        out = np.zeros_like(self.probs)
        nz = rows > 0
        out[nz] = self.probs[nz] / rows[nz, None]
        return out

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "PairDist":
        try:
            return cls(tuple(data["alphabet"]), np.asarray(data["probs"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed pair distribution: {exc}") from exc


def load_dist(path) -> Dist:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read distribution file {path}: {exc}") from exc
    return Dist.from_dict(data)


# -- entropies -------------------------------------------------------------
def entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    q = _as_probs(p).reshape(-1)
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


def binary_entropy(t: float) -> float:
    return entropy([t, 1.0 - t])


def mutual_information(p) -> float:
    """``I(1:2) = H(P_1) + H(P_2) - H(P)`` for a pair distribution."""
    m = _as_probs(p)
    if m.ndim != 2:
        raise InputError("mutual information needs a pair distribution matrix")
    value = entropy(m.sum(axis=1)) + entropy(m.sum(axis=0)) - entropy(m)
    return max(value, 0.0)


def conditional_entropy(p) -> float:
    """``H(2|1)`` of a pair distribution matrix."""
    m = _as_probs(p)
    return entropy(m) - entropy(m.sum(axis=1))


def conditional_kl(q, w) -> float:
    """Conditional relative entropy ``D(Q_{2|1} || W)`` averaged over ``Q_1``.

    Raises
    ------
    SupportMismatch
        If ``q`` charges a pair ``(a, b)`` with ``w[a, b] == 0``.
    """
    qm = _as_probs(q)
    wm = np.asarray(w, dtype=float)
    if qm.shape != wm.shape:
        raise InputError("pair distribution and transition matrix shapes differ")
    pos = qm > 0
    if np.any(pos & (wm <= 0)):
        raise SupportMismatch("pair distribution charges a forbidden transition")
    q1 = qm.sum(axis=1, keepdims=True)
    cond = np.divide(qm, q1, out=np.zeros_like(qm), where=q1 > 0)
    value = float((qm[pos] * (np.log2(cond[pos]) - np.log2(wm[pos]))).sum())
    return max(value, 0.0)


def eta(t: float) -> float:
    """``(1 + t) h(1 / (1 + t))`` on ``[0, 1]``; ``eta(0) = 0``, ``eta(1) = 2``."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"eta is defined on [0, 1], got {t}")
    if t == 0.0:
        return 0.0
    return (1.0 + t) * binary_entropy(1.0 / (1.0 + t))


# -- first-order types -------------------------------------------------------
def round_to_type(p, n: int) -> np.ndarray:
    """Integer counts of an ``n``-type close to ``p`` (largest remainder).

    Ties in the remainders go to the lower index.  The returned counts sum
    to ``n``; divide by ``n`` for the type itself.
    """
    if n < 1:
        raise InputError("type length must be positive")
    q = _as_probs(p).reshape(-1)
    scaled = q * n
    counts = np.floor(scaled + 1e-12).astype(np.int64)
    rem = scaled - counts
    short = n - int(counts.sum())
    order = sorted(range(len(q)), key=lambda i: (-round(rem[i], 12), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def type_class_size(counts: Sequence[int]) -> int:
    out = factorial(int(sum(counts)))
    for c in counts:
        out //= factorial(int(c))
    return out


def type_class(counts: Sequence[int], cap: int = ENUM_CAP) -> np.ndarray:
    """All words (rows of letter indices, lexicographic) with the given letter counts."""
    counts = [int(c) for c in counts]
    size = type_class_size(counts)
    if size > cap:
        raise SizeCapExceeded(f"type class of size {size} exceeds cap {cap}")
    n = sum(counts)
    out: list[tuple[int, ...]] = []
    word = [0] * n
    remaining = list(counts)

    def extend(pos: int) -> None:
        if pos == n:
            out.append(tuple(word))
            return
        for a, r in enumerate(remaining):
            if r:
                remaining[a] -= 1
                word[pos] = a
                extend(pos + 1)
                remaining[a] += 1

    extend(0)
    return np.array(out, dtype=np.int64).reshape(len(out), n)


# -- second-order types ------------------------------------------------------
@dataclass(frozen=True)
class SecondOrderType:
    """Transition counts of a word with its first and last letters.

    ``counts[a, b]`` is the number of positions ``i`` with ``x_i = a`` and
    ``x_{i+1} = b``; the pair distribution is ``counts / (n - 1)``.
    """

    counts: tuple[tuple[int, ...], ...]
    first: int
    last: int
    length: int

    def __post_init__(self) -> None:
        c = np.array(self.counts, dtype=np.int64)
        if c.sum() != self.length - 1 or np.any(c < 0):
            raise InputError("transition counts must be nonnegative and sum to n - 1")
        balance = c.sum(axis=1) - c.sum(axis=0)
        expected = np.zeros(len(c), dtype=np.int64)
        expected[self.first] += 1
        expected[self.last] -= 1
        if not np.array_equal(balance, expected):
            raise InputError("transition counts are not realizable (flow balance fails)")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / (self.length - 1)

    def fraction(self, a: int, b: int) -> Fraction:
        return Fraction(self.counts[a][b], self.length - 1)

    def first_order_counts(self) -> np.ndarray:
        """Letter counts of any word in the class (row sums plus the last letter)."""
        c = np.array(self.counts, dtype=np.int64).sum(axis=1)
        c[self.last] += 1
        return c


def _letters(x) -> tuple[tuple[int, ...], int]:
    if isinstance(x, VertexWord):
        return x.letters, len(x.graph)
    letters = tuple(int(a) for a in x)
    return letters, (max(letters) + 1 if letters else 0)


def second_order_type(x, alphabet_size: int | None = None) -> SecondOrderType:
    letters, d = _letters(x)
    if alphabet_size is not None:
        d = alphabet_size
    n = len(letters)
    if n < 2:
        raise WordTooShort("second-order types need words of length at least 2")
    c = np.zeros((d, d), dtype=np.int64)
    for a, b in zip(letters[:-1], letters[1:]):
        c[a, b] += 1
    return SecondOrderType(tuple(map(tuple, c.tolist())), letters[0], letters[-1], n)


def enumerate_second_order_classes(d: int, n: int, cap: int = ENUM_CAP) -> dict:
    """Partition ``range(d)^n`` into second-order type classes.

    Returns a dict ``SecondOrderType -> array of words`` (rows, lexicographic).
    """
    if d**n > cap:
        raise SizeCapExceeded(f"|X|^n = {d ** n} exceeds enumeration cap {cap}")
    words = all_words(d, n)
    if n == 1:
        raise WordTooShort("second-order types need words of length at least 2")
    groups: dict = defaultdict(list)
    for w in words.tolist():
        groups[second_order_type(w, d)].append(w)
    return {k: np.array(v, dtype=np.int64) for k, v in groups.items()}
