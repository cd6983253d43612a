"""Sliding block codes between shifts and the suspension flows built on them.

A block code of window ``k`` sends ``x`` to ``y`` with ``y_i = Φ(x_i … x_{i+k-1})``.
Everything here works on the ``k``-block presentation of the source, where
the code becomes a labeling of states.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import config
from .errors import InvalidCode, NotFiniteToOne, RoofNotFiberConstant
from .potentials import Potential
from .shift import (
    Sft,
    SymbolicPoint,
    admissible_words,
    higher_block,
    is_irreducible,
    point_from_coordinates,
)
from .suspension import FiberPotential, FlowPoint, SuspensionFlow, flow_equilibrium, flow_pressure

_MAX_ROOF_WINDOW_GROWTH = 6


@dataclass(frozen=True, eq=False)
class BlockCode:
    """A sliding block code ``source -> target`` given by its table on ``window``-words."""

    window: int
    map: dict
    source: Sft
    target: Sft

    def __post_init__(self):
        if self.window < 1:
            raise InvalidCode("window must be positive")
        table = _checked_table(self.source, self.window, self.map)
        object.__setattr__(self, "map", table)
        for w, v in table.items():
            if v not in self.target.index:
                raise InvalidCode(f"image {v!r} of {w} is not a target state")
        for w in admissible_words(self.source, self.window + 1):
            a, b = table[w[:-1]], table[w[1:]]
            if not self.target.is_edge(a, b):
                raise InvalidCode(f"image of {w} is the forbidden transition {a!r} -> {b!r}")

    @classmethod
    def onto_image(cls, source: Sft, window: int, table: dict) -> "BlockCode":
        """The code with its target taken to be the graph of image transitions.

        The image can be a proper subshift of that graph; see :func:`is_onto`.
        """
        if window < 1:
            raise InvalidCode("window must be positive")
        table = _checked_table(source, window, table)
        states = _stable_order(table.values())
        edges = {(table[w[:-1]], table[w[1:]]) for w in admissible_words(source, window + 1)}
        edges = sorted(edges, key=lambda e: (states.index(e[0]), states.index(e[1])))
        return cls(window, table, source, Sft(states, edges))

    @classmethod
    def identity(cls, g: Sft) -> "BlockCode":
        return cls(1, {(s,): s for s in g.states}, g, g)

    def image_word(self, word) -> tuple:
        word = tuple(word)
        k = self.window
        return tuple(self.map[word[i : i + k]] for i in range(len(word) - k + 1))

    def apply(self, x: SymbolicPoint) -> SymbolicPoint:
        lo, hi = x.tail_bounds()
        k = self.window
        return point_from_coordinates(
            lambda i: self.map[x.word(i, k)], lo - k + 1, hi, len(x.past_cycle), len(x.future_cycle)
        )

    def labeled_graph(self):
        """``(H, label)``: the ``window``-block presentation and the state labeling."""
        h, _ = higher_block(self.source, self.window)
        if self.window == 1:
            return h, {s: self.map[(s,)] for s in h.states}
        return h, {s: self.map[s] for s in h.states}


def _checked_table(source: Sft, window: int, table) -> dict:
    table = {tuple(w): v for w, v in table.items()}
    expected = set(admissible_words(source, window))
    if set(table) != expected:
        wrong = sorted(expected ^ set(table), key=str)[:3]
        raise InvalidCode(f"code table does not match the admissible {window}-words (e.g. {wrong})")
    return table


def _stable_order(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    try:
        return sorted(seen)
    except TypeError:
        return seen


def is_onto(code: BlockCode) -> bool:
    """Whether every target word is the image of a source word.

    Tracks, along each target word, the set of source states that can end a
    preimage (a subset construction on the labeled presentation).
    """
    h, label = code.labeled_graph()
    start = [(a, frozenset(s for s in h.states if label[s] == a)) for a in code.target.states]
    seen = set(start)
    queue = list(start)
    for a, subset in queue:
        if not subset:
            return False
        for b in code.target.successors[a]:
            nxt = (b, frozenset(v for u in subset for v in h.successors[u] if label[v] == b))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return True


def pushforward_roof(code: BlockCode, roof: Potential) -> Potential:
    """The target roof ``R′`` with ``R = R′∘π``, on the shortest forward window that works."""
    k, w = code.window, roof.window
    for wt in range(1, w + _MAX_ROOF_WINDOW_GROWTH + 1):
        length = max(w, wt + k - 1)
        table, ok = {}, True
        for u in admissible_words(code.source, length):
            key = code.image_word(u)[:wt]
            value = roof(u)
            if key in table and table[key] != value:
                ok = False
                break
            table[key] = value
        if ok:
            missing = set(admissible_words(code.target, wt)) - set(table)
            if missing:
                raise InvalidCode(f"code is not onto: {sorted(missing, key=str)[0]} has no preimage")
            return Potential(wt, table)
    raise RoofNotFiberConstant("the roof is not constant on the fibers of the code")


def apply_code(code: BlockCode, flow_src: SuspensionFlow):
    """The factor flow and the point map ``(x, s) ↦ (π(x), s)``.

    The factor preserves time, so the source roof must be a function of the
    image sequence.
    """
    if flow_src.base != code.source:
        raise InvalidCode("the flow is not built over the source of the code")
    if not is_onto(code):
        raise InvalidCode("the code does not map onto its target")
    target = SuspensionFlow(code.target, pushforward_roof(code, flow_src.roof))

    def point_map(p: FlowPoint) -> FlowPoint:
        return FlowPoint(code.apply(p.base_point), p.fiber)

    return target, point_map


# -- finite-to-one ------------------------------------------------------------


def _pair_reach(h: Sft, label, starts, forward=True):
    """Label-matched pairs of states reachable from ``starts``."""
    nbrs = h.successors if forward else h.predecessors
    seen = set(starts)
    queue = list(starts)
    for a, b in queue:
        for a2 in nbrs[a]:
            for b2 in nbrs[b]:
                if label[a2] == label[b2] and (a2, b2) not in seen:
                    seen.add((a2, b2))
                    queue.append((a2, b2))
    return seen


def has_diamond(code: BlockCode) -> bool:
    """Two distinct source paths with the same image and the same end states."""
    h, label = code.labeled_graph()
    diagonal = [(s, s) for s in h.states]
    out = {p for p in _pair_reach(h, label, diagonal) if p[0] != p[1]}
    back = {p for p in _pair_reach(h, label, diagonal, forward=False) if p[0] != p[1]}
    return bool(out & back)


def is_right_resolving(code: BlockCode) -> bool:
    h, label = code.labeled_graph()
    return all(len({label[v] for v in h.successors[s]}) == len(h.successors[s]) for s in h.states)


def code_degree(code: BlockCode, max_len: int = 8) -> int:
    """Fiber degree: the least number of source states seen at one position over preimages of a word."""
    h, label = code.labeled_graph()
    best = len(h)
    for n in range(1, max_len + 1):
        for w in admissible_words(code.target, n):
            fwd = [{s for s in h.states if label[s] == w[0]}]
            for c in w[1:]:
                fwd.append({v for u in fwd[-1] for v in h.successors[u] if label[v] == c})
            if not fwd[-1]:
                continue
            sets = [fwd[-1]]
            for i in range(n - 2, -1, -1):
                sets.append({u for u in fwd[i] if any(v in sets[-1] for v in h.successors[u])})
            best = min(best, min(len(s) for s in sets))
            if best == 1:
                return 1
    return best


def check_finite_to_one(code: BlockCode):
    """``(finite_to_one, degree)``; the degree is ``None`` when the code is not finite-to-one."""
    if has_diamond(code):
        return False, None
    if not is_irreducible(code.source):
        return True, None
    return True, code_degree(code)


# -- pressure transport -------------------------------------------------------


def pullback(code: BlockCode, f) -> FiberPotential:
    """``f∘π`` as a fiber potential over the source."""
    terms = []
    for d, p in f.terms:
        length = p.window + code.window - 1
        table = {u: p(code.image_word(u)) for u in admissible_words(code.source, length)}
        terms.append((d, Potential(length, table)))
    return FiberPotential(tuple(terms))


def pushforward_cylinder(code: BlockCode, nu, word) -> float:
    """``ν(π⁻¹[word])`` for a base measure ``ν`` of the source."""
    word = tuple(word)
    return float(
        sum(
            nu.cylinder(u)
            for u in admissible_words(code.source, len(word) + code.window - 1)
            if code.image_word(u) == word
        )
    )


@dataclass(frozen=True)
class PressureReport:
    pressure_source: float
    pressure_target: float
    max_cylinder_discrepancy: float
    degree: int | None

    @property
    def pressure_gap(self) -> float:
        return abs(self.pressure_source - self.pressure_target)

    @property
    def passed(self) -> bool:
        tol = config.get()
        return self.pressure_gap <= tol.bowen and self.max_cylinder_discrepancy <= tol.cylinder


def pressure_preservation(code: BlockCode, flow_src: SuspensionFlow, f_target, max_len: int = 6) -> PressureReport:
    """Compare the pressure of ``f`` on the factor with that of ``f∘π`` upstairs.

    Also pushes the source equilibrium base measure forward and compares it
    with the target equilibrium on cylinders of length up to ``max_len``.
    """
    ok, degree = check_finite_to_one(code)
    if not ok:
        raise NotFiniteToOne("the code has a diamond")
    target, _ = apply_code(code, flow_src)
    lifted = pullback(code, f_target)
    p_src = flow_pressure(flow_src, lifted)
    p_tgt = flow_pressure(target, f_target)
    nu_src = flow_equilibrium(flow_src, lifted).base_measure
    nu_tgt = flow_equilibrium(target, f_target).base_measure
    disc = 0.0
    for n in range(1, max_len + 1):
        for w in admissible_words(code.target, n):
            disc = max(disc, abs(pushforward_cylinder(code, nu_src, w) - nu_tgt.cylinder(w)))
    return PressureReport(p_src, p_tgt, disc, degree)
