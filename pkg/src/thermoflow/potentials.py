"""Locally constant potentials and cycle optimization.

A potential of window ``k`` reads coordinates ``0 .. k-1`` of a point.  Most
numerical work happens on an *edge presentation*: for window ``k`` we pass to
the ``max(1, k-1)``-block shift, on which the potential becomes a weight on
edges.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import config
from .errors import (
    IncompatibleRecoding,
    InvalidPotential,
    NonpositiveDenominator,
    NotIrreducible,
    ValidationError,
    WindowMismatch,
)
from .shift import (
    Sft,
    SymbolicPoint,
    admissible_words,
    block_parent,
    block_word,
    canonical_cycle,
    higher_block,
    is_irreducible,
)


@dataclass(frozen=True, eq=False)
class Potential:
    """A locally constant function given by its values on admissible words."""

    window: int
    table: Mapping[tuple, float]

    def __post_init__(self):
        if self.window < 1:
            raise InvalidPotential("window must be positive")
        table = {}
        for word, value in self.table.items():
            word = tuple(word)
            if len(word) != self.window:
                raise InvalidPotential(f"word {word} does not have length {self.window}")
            value = float(value) if not _is_exact(value) else value
            if not math.isfinite(value):
                raise InvalidPotential(f"value at {word} is not finite")
            table[word] = value
        object.__setattr__(self, "table", table)

    def __call__(self, word):
        try:
            return self.table[tuple(word[: self.window])]
        except KeyError:
            raise WindowMismatch(f"no value for word {tuple(word[: self.window])}") from None

    def __eq__(self, other):
        return (
            isinstance(other, Potential)
            and self.window == other.window
            and self.table == other.table
        )

    __hash__ = None

    @classmethod
    def constant(cls, g: Sft, c, window: int = 1):
        return cls(window, {w: c for w in admissible_words(g, window)})

    @classmethod
    def from_symbols(cls, g: Sft, values):
        """Window-1 potential from a ``state -> value`` mapping or a sequence in state order."""
        if not isinstance(values, Mapping):
            values = dict(zip(g.states, values))
        return cls(1, {(s,): values[s] for s in g.states})

    @classmethod
    def from_function(cls, g: Sft, window: int, fn: Callable):
        return cls(window, {w: fn(w) for w in admissible_words(g, window)})

    def check(self, g: Sft) -> None:
        expected = set(admissible_words(g, self.window))
        if set(self.table) != expected:
            missing = sorted(expected - set(self.table), key=str)
            extra = sorted(set(self.table) - expected, key=str)
            raise InvalidPotential(
                f"table does not cover the admissible {self.window}-words"
                f" (missing {missing[:3]}, unexpected {extra[:3]})"
            )

    def extend(self, g: Sft, window: int) -> "Potential":
        """The same function read through a longer window."""
        if window < self.window:
            raise WindowMismatch("cannot shrink a window")
        if window == self.window:
            return self
        return Potential(window, {w: self(w) for w in admissible_words(g, window)})

    def values(self):
        return np.fromiter(self.table.values(), dtype=float)

    def min(self):
        return min(self.table.values())

    def max(self):
        return max(self.table.values())


def _is_exact(value):
    from fractions import Fraction

    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def combine(g: Sft, fn, *potentials) -> Potential:
    """Pointwise ``fn(f1(x), f2(x), ...)`` on the common window."""
    window = max(p.window for p in potentials)
    return Potential(
        window, {w: fn(*(p(w) for p in potentials)) for w in admissible_words(g, window)}
    )


def add(g, f, h):
    return combine(g, lambda a, b: a + b, f, h)


def sub(g, f, h):
    return combine(g, lambda a, b: a - b, f, h)


def scale(g, f, c):
    return combine(g, lambda a: c * a, f)


def shift_constant(g, f, c):
    return combine(g, lambda a: a + c, f)


def coboundary(g: Sft, eta) -> Potential:
    """``η∘σ − η`` for a window-1 transfer function ``η`` (mapping or Potential)."""
    if isinstance(eta, Potential):
        if eta.window != 1:
            raise WindowMismatch("transfer function must have window 1")
        eta = {w[0]: v for w, v in eta.table.items()}
    return Potential(2, {w: eta[w[1]] - eta[w[0]] for w in admissible_words(g, 2)})


def evaluate(f: Potential, x: SymbolicPoint):
    return f(x.word(0, f.window))


def birkhoff_sum(f: Potential, x: SymbolicPoint, n: int):
    """``Σ_{i<n} f(σⁱ x)``."""
    if n < 0:
        raise ValidationError("n must be nonnegative")
    total = 0
    for i in range(n):
        total += f(x.word(i, f.window))
    return total


def word_sum(f: Potential, word) -> float:
    """Birkhoff sum of ``f`` along a finite word (all full windows inside it)."""
    word = tuple(word)
    return sum(f(word[i : i + f.window]) for i in range(len(word) - f.window + 1))


def recode_window(f: Potential, target: Sft) -> Potential:
    """Transport ``f`` to a window-1 potential on a block presentation ``target``."""
    _, n = block_parent(target)
    if n < f.window:
        raise IncompatibleRecoding(
            f"window-{f.window} potential needs at least a {f.window}-block presentation"
        )
    table = {}
    for h in target.states:
        word = block_word(target, h)
        key = word[: f.window]
        if key not in f.table:
            raise IncompatibleRecoding(f"block {word} has no value in the table")
        table[(h,)] = f.table[key]
    return Potential(1, table)


# -- edge presentations -------------------------------------------------------


@dataclass(frozen=True)
class EdgePresentation:
    """A block presentation ``graph`` of ``base`` whose edges carry base words of length ``n + 1``."""

    base: Sft
    graph: Sft
    n: int
    src: np.ndarray
    dst: np.ndarray
    words: tuple

    def matrix(self, f: Potential, fill=-np.inf):
        """Edge weights of ``f`` as a square matrix, ``fill`` off the edge set."""
        if f.window > self.n + 1:
            raise WindowMismatch(
                f"window {f.window} exceeds the {self.n + 1}-words carried by edges"
            )
        m = np.full((len(self.graph), len(self.graph)), fill, dtype=float)
        m[self.src, self.dst] = [float(f(w)) for w in self.words]
        return m

    def project_cycle(self, cycle_idx) -> tuple:
        """Base cycle read off an index cycle of ``graph``."""
        states = self.graph.states
        return canonical_cycle(self.base, tuple(self.word_of(states[i])[0] for i in cycle_idx))

    def word_of(self, state) -> tuple:
        """The base word of length ``n`` represented by a state of ``graph``."""
        return state if self.n > 1 else (state,)


@functools.lru_cache(maxsize=128)
def edge_presentation(g: Sft, window: int = 1) -> EdgePresentation:
    n = max(1, window - 1)
    h, _ = higher_block(g, n)
    src, dst, words = [], [], []
    for a, b in sorted(h.edges, key=lambda e: (h.index[e[0]], h.index[e[1]])):
        src.append(h.index[a])
        dst.append(h.index[b])
        words.append((a, b) if n == 1 else a + (b[-1],))
    return EdgePresentation(g, h, n, np.array(src, dtype=int), np.array(dst, dtype=int), tuple(words))


# -- cycle optimization -------------------------------------------------------


def _karp(w: np.ndarray) -> float:
    """Maximum cycle mean of a strongly connected weighted digraph (``-inf`` = no edge)."""
    n = w.shape[0]
    d = np.full((n + 1, n), -np.inf)
    d[0, 0] = 0.0
    for k in range(n):
        d[k + 1] = np.max(d[k][:, None] + w, axis=0)
    best = -np.inf
    with np.errstate(invalid="ignore"):
        for v in range(n):
            if d[n, v] == -np.inf:
                continue
            ks = np.arange(n)
            ok = d[:n, v] > -np.inf
            vals = (d[n, v] - d[:n, v][ok]) / (n - ks[ok])
            best = max(best, vals.min())
    return float(best)


def _cycle_mean(w, cyc):
    return sum(w[cyc[i], cyc[(i + 1) % len(cyc)]] for i in range(len(cyc))) / len(cyc)


def _critical_cycle(w: np.ndarray, lam: float, order_key):
    """A cycle of mean ``lam`` found among tight edges of the reduced weights."""
    n = w.shape[0]
    red = w - lam
    scale = 1.0 + np.max(np.abs(w[np.isfinite(w)]))
    for tol in (1e-12, 1e-10, 1e-8, 1e-6):
        pi = np.zeros(n)
        for _ in range(n + 1):
            pi = np.maximum(pi, np.max(pi[:, None] + red, axis=0))
        tight = (pi[:, None] + red) >= pi[None, :] - tol * scale
        best = None
        for s in sorted(range(n), key=order_key):
            cyc = _shortest_tight_cycle(tight, s)
            if cyc is None:
                continue
            mean = _cycle_mean(w, cyc)
            if mean >= lam - 1e-12 * scale:
                return cyc
            if best is None or mean > best[0]:
                best = (mean, cyc)
    return best[1] if best else None


def _shortest_tight_cycle(tight, s):
    prev = {s: None}
    queue = [s]
    for u in queue:
        for v in np.flatnonzero(tight[u]):
            v = int(v)
            if v == s:
                path = [u]
                while path[-1] != s:
                    path.append(prev[path[-1]])
                return path[::-1]
            if v not in prev:
                prev[v] = u
                queue.append(v)
    return None


def _require_irreducible(g):
    if not is_irreducible(g):
        raise NotIrreducible("the shift is not irreducible")


def _max_mean(ep: EdgePresentation, w: np.ndarray):
    lam = _karp(w)
    cyc = _critical_cycle(w, lam, order_key=lambda i: i)
    return lam, cyc


def max_mean_cycle(g: Sft, f: Potential):
    """Largest average of ``f`` over a periodic orbit, with a cycle attaining it.

    Returns
    -------
    value : float
        ``max_μ ∫ f dμ`` over shift-invariant measures.
    cycle : tuple
        A base cycle attaining ``value``, smallest-state first.
    """
    _require_irreducible(g)
    ep = edge_presentation(g, f.window)
    w = ep.matrix(f)
    lam, cyc = _max_mean(ep, w)
    return lam, ep.project_cycle(cyc)


def max_ratio_cycle(g: Sft, num: Potential, den: Potential):
    """Largest ratio ``Σnum / Σden`` over cycles, with a witness cycle.

    Bisection on ``λ`` with the sign of ``max_mean_cycle(num − λ·den)``; the
    returned value is the exact ratio of the witness found at the lower end.
    """
    _require_irreducible(g)
    window = max(num.window, den.window)
    ep = edge_presentation(g, window)
    wn = ep.matrix(num)
    wd = ep.matrix(den)
    finite = np.isfinite(wd)
    if np.any(wd[finite] <= 0):
        raise NonpositiveDenominator("denominator must be strictly positive")
    wn = np.where(finite, wn, 0.0)
    wd = np.where(finite, wd, 0.0)
    ratios = wn[finite] / wd[finite]
    lo, hi = float(ratios.min()), float(ratios.max())
    tol = config.get().ratio
    for _ in range(200):
        if hi - lo <= 1e-2 * tol:
            break
        mid = 0.5 * (lo + hi)
        if _karp(np.where(finite, wn - mid * wd, -np.inf)) >= 0:
            lo = mid
        else:
            hi = mid
    w = np.where(finite, wn - lo * wd, -np.inf)
    _, cyc = _max_mean(ep, w)
    edges = [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]
    value = sum(wn[e] for e in edges) / sum(wd[e] for e in edges)
    return float(value), ep.project_cycle(cyc)


def max_birkhoff_average(g: Sft, f: Potential, T: int) -> float:
    """``max_x (1/T) Σ_{i<T} f(σⁱ x)`` by max-plus dynamic programming over paths."""
    if T < 1:
        raise ValidationError("T must be positive")
    ep = edge_presentation(g, f.window)
    w = ep.matrix(f)
    v = np.zeros(len(ep.graph))
    for _ in range(T):
        v = np.max(w + v[None, :], axis=1)
    return float(v.max() / T)


def is_cohomologous_to_constant(g: Sft, f: Potential):
    """The constant ``c`` if ``f`` has cycle average ``c`` on every cycle, else ``None``.

    Builds a transfer function along a spanning tree of the edge presentation
    and checks every remaining edge, which amounts to testing a basis of
    fundamental cycles.
    """
    _require_irreducible(g)
    ep = edge_presentation(g, f.window)
    w = ep.matrix(f)
    c, _ = _max_mean(ep, w)
    n = len(ep.graph)
    eta = [None] * n
    eta[0] = 0.0
    adj = [[] for _ in range(n)]
    for a, b in zip(ep.src, ep.dst):
        adj[a].append((b, w[a, b] - c, 1))
        adj[b].append((a, w[a, b] - c, -1))
    queue = [0]
    for u in queue:
        for v, red, sign in adj[u]:
            if eta[v] is None:
                eta[v] = eta[u] + sign * red
                queue.append(v)
    tol = config.get().cohomology
    for a, b in zip(ep.src, ep.dst):
        if abs(w[a, b] - c - (eta[b] - eta[a])) > tol:
            return None
    return float(c)
