"""Two-sided subshifts of finite type on finite graphs.

A shift is described by a directed graph; its points are the bi-infinite
paths.  Points are kept eventually periodic in both directions so that every
coordinate, and every orbit computation built on top of it, is exact.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DuplicateState,
    InadmissibleWord,
    NotIrreducible,
    StrandedState,
    UnknownState,
    ValidationError,
)

Word = tuple


@dataclass(frozen=True)
class Sft:
    """A subshift of finite type given by its graph.

    Parameters
    ----------
    states : sequence of hashable
        State identifiers; their order fixes every tie-break in the library.
    edges : iterable of pairs
        Allowed transitions ``(from, to)``.
    """

    states: tuple
    edges: frozenset
    # (parent, n) when this graph is the n-block presentation of ``parent``
    block_of: tuple | None = field(default=None, compare=False, repr=False)

    def __init__(self, states: Sequence[Hashable], edges, block_of=None):
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "edges", frozenset((u, v) for u, v in edges))
        object.__setattr__(self, "block_of", block_of)
        validate_sft(self)

    @functools.cached_property
    def index(self):
        return {s: i for i, s in enumerate(self.states)}

    @functools.cached_property
    def successors(self):
        out = {s: [] for s in self.states}
        for u, v in self.edges:
            out[u].append(v)
        return {s: sorted(vs, key=self.index.__getitem__) for s, vs in out.items()}

    @functools.cached_property
    def predecessors(self):
        out = {s: [] for s in self.states}
        for u, v in self.edges:
            out[v].append(u)
        return {s: sorted(us, key=self.index.__getitem__) for s, us in out.items()}

    @functools.cached_property
    def adjacency(self):
        a = np.zeros((len(self.states), len(self.states)))
        for u, v in self.edges:
            a[self.index[u], self.index[v]] = 1.0
        return a

    def __len__(self):
        return len(self.states)

    def is_edge(self, u, v):
        return (u, v) in self.edges

    def is_admissible(self, word) -> bool:
        return all(s in self.index for s in word) and all(
            (a, b) in self.edges for a, b in zip(word, word[1:])
        )

    def is_cycle(self, word) -> bool:
        return len(word) > 0 and self.is_admissible(tuple(word) + (word[0],))

    def sort_key(self, word):
        return tuple(self.index[s] for s in word)


def validate_sft(g: Sft) -> None:
    """Raise if ``g`` has a repeated state, an unknown endpoint or a stranded state."""
    seen = set()
    for s in g.states:
        if s in seen:
            raise DuplicateState(s)
        seen.add(s)
    outgoing, incoming = set(), set()
    for u, v in g.edges:
        for s in (u, v):
            if s not in seen:
                raise UnknownState(s)
        outgoing.add(u)
        incoming.add(v)
    for s in g.states:
        if s not in outgoing:
            raise StrandedState(s, "outgoing")
        if s not in incoming:
            raise StrandedState(s, "incoming")


def strong_components(g: Sft):
    """Strongly connected components that carry at least one cycle.

    Returned as lists of states in state order, the components themselves
    ordered by their first state.
    """
    n, labels = connected_components(g.adjacency, directed=True, connection="strong")
    comps = [[] for _ in range(n)]
    for s, lab in zip(g.states, labels):
        comps[lab].append(s)
    out = []
    for comp in comps:
        members = set(comp)
        if any(v in members for u in comp for v in g.successors[u]):
            out.append(comp)
    return sorted(out, key=lambda c: g.index[c[0]])


def is_irreducible(g: Sft) -> bool:
    n, _ = connected_components(g.adjacency, directed=True, connection="strong")
    return n == 1


def period(g: Sft) -> int:
    """Gcd of the cycle lengths of an irreducible graph."""
    if not is_irreducible(g):
        raise NotIrreducible("period is defined for irreducible shifts only")
    # BFS levels: the period is the gcd of level(u) + 1 - level(v) over edges
    root = g.states[0]
    level = {root: 0}
    queue = [root]
    for u in queue:
        for v in g.successors[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    d = 0
    for u, v in g.edges:
        d = math.gcd(d, abs(level[u] + 1 - level[v]))
    return d


def is_aperiodic(g: Sft) -> bool:
    return period(g) == 1


@functools.lru_cache(maxsize=256)
def admissible_words(g: Sft, n: int) -> tuple:
    """All admissible words of length ``n`` in lexicographic state order."""
    if n <= 0:
        return ((),)
    words = [(s,) for s in g.states]
    for _ in range(n - 1):
        words = [w + (v,) for w in words for v in g.successors[w[-1]]]
    return tuple(words)


def higher_block(g: Sft, n: int):
    """The ``n``-block presentation of ``g`` and the conjugacy between them.

    States of the new graph are the admissible ``n``-words (as tuples); an
    edge joins two words that overlap in ``n - 1`` symbols.  For ``n == 1``
    the graph is returned unchanged.
    """
    if n < 1:
        raise ValidationError("block length must be positive")
    if n == 1:
        return g, BlockMap(g, g, 1)
    words = admissible_words(g, n)
    edges = [(w, w[1:] + (v,)) for w in words for v in g.successors[w[-1]]]
    h = Sft(words, edges, block_of=(g, n))
    return h, BlockMap(g, h, n)


def block_parent(h: Sft):
    """``(base, n)`` for a block presentation, ``(h, 1)`` otherwise."""
    return h.block_of if h.block_of is not None else (h, 1)


def block_word(h: Sft, state) -> tuple:
    """The base word represented by a state of ``h``."""
    return state if h.block_of is not None else (state,)


@dataclass(frozen=True)
class BlockMap:
    """Relabeling between a shift and its ``n``-block presentation."""

    base: Sft
    blocks: Sft
    n: int

    def forward(self, x: "SymbolicPoint") -> "SymbolicPoint":
        if self.n == 1:
            return x
        n = self.n
        lo, hi = x.tail_bounds()
        return point_from_coordinates(
            lambda i: tuple(x[i + j] for j in range(n)),
            lo - n + 1,
            hi,
            len(x.past_cycle),
            len(x.future_cycle),
        )

    def inverse(self, y: "SymbolicPoint") -> "SymbolicPoint":
        if self.n == 1:
            return y
        lo, hi = y.tail_bounds()
        return point_from_coordinates(
            lambda i: y[i][0], lo, hi, len(y.past_cycle), len(y.future_cycle)
        )


def enumerate_cycles(g: Sft, max_len: int) -> list:
    """Simple cycles of length at most ``max_len``.

    Each cycle starts at its smallest state; the list is sorted by length and
    then lexicographically in state order.
    """
    out = []
    idx = g.index

    def extend(path, on_path):
        head = path[0]
        for v in g.successors[path[-1]]:
            if v == head:
                out.append(tuple(path))
            elif idx[v] > idx[head] and v not in on_path and len(path) < max_len:
                path.append(v)
                on_path.add(v)
                extend(path, on_path)
                on_path.discard(v)
                path.pop()

    for s in g.states:
        extend([s], {s})
    out.sort(key=lambda c: (len(c), g.sort_key(c)))
    return out


def canonical_cycle(g: Sft, cycle) -> tuple:
    """Rotate a cycle so that it starts at its smallest state (first such rotation)."""
    cycle = tuple(cycle)
    rotations = [cycle[i:] + cycle[:i] for i in range(len(cycle))]
    return min(rotations, key=g.sort_key)


def primitive_root(cycle) -> tuple:
    cycle = tuple(cycle)
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle[:p] * (n // p) == cycle:
            return cycle[:p]
    return cycle


@dataclass(frozen=True, eq=False)
class SymbolicPoint:
    """An eventually periodic bi-infinite sequence.

    The sequence reads ``... past past core future future ...`` and coordinate
    0 sits at position ``origin_index`` of ``core`` (which may lie outside the
    core, in a periodic tail).
    """

    past_cycle: tuple
    core: tuple
    future_cycle: tuple
    origin_index: int = 0

    def __post_init__(self):
        for name in ("past_cycle", "core", "future_cycle"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.past_cycle or not self.future_cycle:
            raise InadmissibleWord("periodic tails must be nonempty")

    @classmethod
    def periodic(cls, cycle, shift=0):
        """The periodic point ``...cycle cycle...`` with coordinate 0 at ``cycle[shift]``."""
        cycle = tuple(cycle)
        return cls(cycle, (), cycle, shift)

    def __getitem__(self, i: int):
        j = i + self.origin_index
        if j < 0:
            return self.past_cycle[j % len(self.past_cycle)]
        if j < len(self.core):
            return self.core[j]
        return self.future_cycle[(j - len(self.core)) % len(self.future_cycle)]

    def word(self, start: int, length: int) -> tuple:
        return tuple(self[start + k] for k in range(length))

    def tail_bounds(self):
        """``(lo, hi)``: coordinates below ``lo`` follow the past cycle, from ``hi`` on the future one."""
        return -self.origin_index, len(self.core) - self.origin_index

    def comparison_window(self, other: "SymbolicPoint"):
        """A coordinate range on which agreement implies equality."""
        lo1, hi1 = self.tail_bounds()
        lo2, hi2 = other.tail_bounds()
        lp = math.lcm(len(self.past_cycle), len(other.past_cycle))
        lf = math.lcm(len(self.future_cycle), len(other.future_cycle))
        return min(lo1, lo2) - lp, max(hi1, hi2) + lf

    def __eq__(self, other):
        if not isinstance(other, SymbolicPoint):
            return NotImplemented
        lo, hi = self.comparison_window(other)
        return all(self[i] == other[i] for i in range(lo, hi))

    __hash__ = None

    def is_periodic(self) -> bool:
        p = len(primitive_root(self.future_cycle))
        lo, hi = self.comparison_window(self)
        return all(self[i] == self[i + p] for i in range(lo - p, hi + p))

    def __repr__(self):
        return (
            f"SymbolicPoint(past={self.past_cycle}, core={self.core}, "
            f"future={self.future_cycle}, origin={self.origin_index})"
        )


def check_point(g: Sft, x: SymbolicPoint) -> None:
    """Raise :class:`InadmissibleWord` unless ``x`` is a path in ``g``."""
    if not g.is_cycle(x.past_cycle):
        raise InadmissibleWord(f"past cycle {x.past_cycle} is not a cycle")
    if not g.is_cycle(x.future_cycle):
        raise InadmissibleWord(f"future cycle {x.future_cycle} is not a cycle")
    seq = (x.past_cycle[-1],) + x.core + (x.future_cycle[0],)
    if not g.is_admissible(seq):
        raise InadmissibleWord(f"core {x.core} does not join its tails")


def point_from_coordinates(coord, lo: int, hi: int, past_period: int, future_period: int):
    """Build a point from a coordinate function.

    ``coord(i)`` must be ``past_period``-periodic for ``i < lo`` and
    ``future_period``-periodic for ``i >= hi``.
    """
    lo = min(lo, hi)
    past = tuple(coord(i) for i in range(lo - past_period, lo))
    core = tuple(coord(i) for i in range(lo, hi))
    future = tuple(coord(i) for i in range(hi, hi + future_period))
    return SymbolicPoint(past, core, future, -lo)


def shift_point(x: SymbolicPoint, n: int) -> SymbolicPoint:
    """``σⁿ(x)``: coordinate ``i`` of the result is coordinate ``i + n`` of ``x``."""
    origin = x.origin_index + n
    if not x.core and x.past_cycle == x.future_cycle:
        # a periodic point: keep the origin inside one period
        origin %= len(x.future_cycle)
    return SymbolicPoint(x.past_cycle, x.core, x.future_cycle, origin)


def compact(x: SymbolicPoint) -> SymbolicPoint:
    """Same point with primitive tails and a minimal core window."""
    past = primitive_root(x.past_cycle)
    future = primitive_root(x.future_cycle)
    lo, hi = x.tail_bounds()
    # move the core ends inward while they already agree with the tails
    while hi > lo and x[hi - 1] == x[hi - 1 + len(future)]:
        hi -= 1
    while lo < hi and x[lo] == x[lo - len(past)]:
        lo += 1
    return point_from_coordinates(x.__getitem__, lo, hi, len(past), len(future))


def shift_distance(x: SymbolicPoint, y: SymbolicPoint) -> float:
    """``exp(-min{|n| : x_n != y_n})``, zero for equal points."""
    lo, hi = x.comparison_window(y)
    bound = max(abs(lo), abs(hi)) + 1
    for n in range(bound + 1):
        if x[n] != y[n] or x[-n] != y[-n]:
            return math.exp(-n)
    return 0.0


def agreement_radius(x: SymbolicPoint, y: SymbolicPoint) -> int | None:
    """Largest ``N`` with ``x_n == y_n`` for ``|n| <= N``; ``None`` if the points agree everywhere, -1 if ``x_0 != y_0``."""
    lo, hi = x.comparison_window(y)
    bound = max(abs(lo), abs(hi)) + 1
    for n in range(bound + 1):
        if x[n] != y[n] or x[-n] != y[-n]:
            return n - 1
    return None


def random_cycle(g: Sft, rng, start=None, min_len=1):
    """A random closed walk through ``start``, returned as a word starting at ``start``."""
    start = g.states[rng.integers(len(g))] if start is None else start
    walk = [start]
    while True:
        succ = g.successors[walk[-1]]
        walk.append(succ[rng.integers(len(succ))])
        if len(walk) > min_len:
            break
    back = _shortest_path(g, walk[-1], start)
    if back is None:
        raise NotIrreducible("cannot close a walk in a reducible graph")
    return tuple(walk + back[1:])[:-1]


def _shortest_path(g: Sft, a, b):
    prev = {a: None}
    queue = [a]
    for u in queue:
        if u == b:
            break
        for v in g.successors[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if b not in prev:
        return None
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def random_point(g: Sft, rng, core=None, core_at=0, tail_len=(0, 4)):
    """A random admissible eventually periodic point of an irreducible shift.

    If ``core`` is given, coordinates ``core_at, core_at + 1, ...`` spell it.
    """
    if core is None:
        core = (g.states[rng.integers(len(g))],)
    core = tuple(core)
    if not g.is_admissible(core):
        raise InadmissibleWord(f"{core} is not admissible")
    body = list(core)
    for _ in range(rng.integers(*tail_len)):
        succ = g.successors[body[-1]]
        body.append(succ[rng.integers(len(succ))])
    lead = 0
    for _ in range(rng.integers(*tail_len)):
        pred = g.predecessors[body[0]]
        body.insert(0, pred[rng.integers(len(pred))])
        lead += 1
    succ = g.successors[body[-1]]
    future = random_cycle(g, rng, start=succ[rng.integers(len(succ))])
    pred = g.predecessors[body[0]]
    p = pred[rng.integers(len(pred))]
    past = random_cycle(g, rng, start=p)
    past = past[1:] + past[:1]
    return SymbolicPoint(past, tuple(body), future, lead - core_at)
