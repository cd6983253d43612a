"""Pseudo-orbits, shadowing, closing and local product structure for suspension flows.

Distances between flow points use

    d((x, s), (y, u)) = d_shift(x, y) + |s − u|

minimized over the ways of writing each point one roof earlier or later, so
that points on either side of a roof crossing are close.  This metric is
equivalent to the Bowen-Walters metric; the constructions below only need
that closeness forces agreement of base coordinates on a long window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    DeltaTooLarge,
    HorizonTooShort,
    InvalidPseudoOrbit,
    NotAperiodic,
    NotIrreducible,
    ToleranceBreach,
    ValidationError,
)
from .potentials import is_cohomologous_to_constant
from .shift import (
    SymbolicPoint,
    agreement_radius,
    compact,
    is_aperiodic,
    is_irreducible,
    point_from_coordinates,
    shift_distance,
    shift_point,
)
from .suspension import FlowPoint, SuspensionFlow, _walk, flow_evaluate

METRIC_NAME = "d_shift + |fiber difference|, minimized over one-roof realignments"


def _representations(flow: SuspensionFlow, p: FlowPoint):
    """``(offset, base, fiber)`` for ``p`` written over ``σ⁻¹x``, ``x`` and ``σx``."""
    x, s = p.base_point, p.fiber
    return [
        (-1, shift_point(x, -1), s + flow.roof_at(x, -1)),
        (0, x, s),
        (1, shift_point(x, 1), s - flow.roof_at(x, 0)),
    ]


def flow_distance(flow: SuspensionFlow, p: FlowPoint, q: FlowPoint) -> float:
    """Distance between two flow points (see the module docstring)."""
    pairs = [(x, q.base_point, abs(s - q.fiber)) for _, x, s in _representations(flow, p)]
    pairs += [(p.base_point, y, abs(p.fiber - u)) for _, y, u in _representations(flow, q)]
    pairs.sort(key=lambda c: c[2])
    best = math.inf
    for x, y, gap in pairs:
        # the shift term is at most 1, so only the fiber gap can rule a pair out
        if gap >= best:
            break
        best = min(best, shift_distance(x, y) + gap)
    return float(best)


def tracing_window(flow: SuspensionFlow, epsilon: float) -> int:
    """``N(ε) = ceil(−log ε) + window(R)``: symbolic agreement needed for ``ε``-closeness."""
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    return max(0, math.ceil(-math.log(epsilon) - 1e-12)) + flow.roof.window


def expansivity_certificate(flow: SuspensionFlow, epsilon: float) -> float:
    """A ``δ`` such that ``δ``-close points agree symbolically on ``|n| <= N(ε)``.

    ``δ = min(ε, e^{−N}) · R_min / (2 R_max)``; conservative, not optimal.
    """
    n = tracing_window(flow, epsilon)
    ratio = float(flow.roof_min) / float(flow.roof_max)
    return min(epsilon, math.exp(-n)) * ratio / 2


def _align(flow: SuspensionFlow, end: FlowPoint, nxt: FlowPoint, required: int):
    """Best realignment of ``end`` onto ``nxt``: ``(offset, fiber jump)``.

    Raises :class:`DeltaTooLarge` when no realignment agrees on ``|n| <= required``.
    """
    best, widest = None, -1
    for offset, x, s in _representations(flow, end):
        radius = agreement_radius(x, nxt.base_point)
        radius = math.inf if radius is None else radius
        widest = max(widest, radius)
        if radius >= required and (best is None or abs(nxt.fiber - s) < abs(best[1])):
            best = (offset, nxt.fiber - s)
    if best is None:
        raise DeltaTooLarge(required, int(widest))
    return best


# -- pseudo-orbits ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """Orbit segments ``(point_k, duration_k)`` with jumps of size at most ``delta``.

    When ``periodic`` is set, ``entries`` is one period and the last segment
    jumps back to the first point.
    """

    entries: tuple
    delta: float
    t_min: float
    periodic: bool = False
    flow: SuspensionFlow | None = field(default=None, repr=False)

    def __post_init__(self):
        entries = tuple((p, d) for p, d in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise InvalidPseudoOrbit("a pseudo-orbit needs at least one entry")
        for k, (_, d) in enumerate(entries):
            if not d >= self.t_min or not d > 0:
                raise InvalidPseudoOrbit(f"duration {d} of entry {k} is below t_min {self.t_min}")
        if self.flow is not None:
            for k, jump in enumerate(self.jumps(self.flow)):
                if jump > self.delta:
                    raise InvalidPseudoOrbit(f"jump {jump:.3g} after entry {k} exceeds delta {self.delta:.3g}")

    def pairs(self):
        """Consecutive ``(k, end of segment k, start of segment k+1)``."""
        n = len(self.entries)
        stop = n if self.periodic else n - 1
        return [(k, self.entries[k], self.entries[(k + 1) % n][0]) for k in range(stop)]

    def jumps(self, flow: SuspensionFlow):
        return [flow_distance(flow, flow_evaluate(flow, p, d), q) for _, (p, d), q in self.pairs()]

    @property
    def breakpoints(self):
        """Pseudo-orbit times ``s_k`` at which the entries start."""
        out, total = [0.0], 0.0
        for _, d in self.entries:
            total += d
            out.append(total)
        return out


@dataclass(frozen=True, eq=False)
class TraceCertificate:
    """A true orbit ``ε``-tracing a pseudo-orbit.

    ``reparam_breakpoints`` lists ``(s_k, ρ(s_k))``; ``ρ`` is linear in between.
    """

    traced_point: FlowPoint
    reparam_breakpoints: tuple
    epsilon: float
    max_distance: float
    metric: str = METRIC_NAME

    def __post_init__(self):
        bps = self.reparam_breakpoints
        if bps[0] != (0.0, 0.0):
            raise ToleranceBreach("reparametrization must fix 0")
        if any(not (1 - self.epsilon < s < 1 + self.epsilon) for s in self.slopes):
            raise ToleranceBreach("reparametrization slope leaves (1 − ε, 1 + ε)")
        if self.max_distance > self.epsilon:
            raise ToleranceBreach(f"tracing distance {self.max_distance:.3g} exceeds ε = {self.epsilon:.3g}")

    @property
    def slopes(self):
        b = self.reparam_breakpoints
        return [(r1 - r0) / (s1 - s0) for (s0, r0), (s1, r1) in zip(b, b[1:])]

    def rho(self, s: float) -> float:
        """The reparametrization, extended with slope 1 outside the breakpoints."""
        b = self.reparam_breakpoints
        if s <= b[0][0]:
            return s
        for (s0, r0), (s1, r1) in zip(b, b[1:]):
            if s <= s1:
                return r0 + (s - s0) * (r1 - r0) / (s1 - s0)
        return b[-1][1] + (s - b[-1][0])


def _segment_times(flow: SuspensionFlow, p: FlowPoint, duration: float):
    """Times in ``[0, duration]`` at which the orbit of ``p`` crosses the roof."""
    out = []
    x, s = p.base_point, p.fiber
    t, n = flow.roof_at(x, 0) - s, 0
    while t < duration:
        out.append(float(t))
        n += 1
        t += flow.roof_at(x, n)
    return out


def _sample_times(flow, p, duration, slope, traced, start):
    """Crossing times of both orbits, with one-sided neighbours and midpoints."""
    cuts = {0.0, float(duration)}
    cuts.update(_segment_times(flow, p, duration))
    for c in _segment_times(flow, flow_evaluate(flow, traced, start), duration * slope):
        cuts.add(c / slope)
    cuts = sorted(c for c in cuts if 0 <= c <= duration)
    out = set()
    for a, b in zip(cuts, cuts[1:]):
        h = min(1e-9, (b - a) / 4)
        out.update((a, a + h, 0.5 * (a + b), b - h))
    out.add(cuts[0])
    return sorted(t for t in out if t < duration or duration == 0)


def shadow(flow: SuspensionFlow, po: PseudoOrbit, epsilon: float) -> TraceCertificate:
    """A true orbit ``ε``-tracing ``po``, with its reparametrization.

    Base words of consecutive segments are spliced where they agree, and each
    fiber jump is spread linearly over its segment.

    Raises
    ------
    DeltaTooLarge
        If consecutive segments agree on fewer than ``N(ε)`` symbols.
    HorizonTooShort
        If a segment crosses no roof, or is too short to absorb its jump
        with a slope inside ``(1 − ε, 1 + ε)``.
    """
    need = tracing_window(flow, epsilon)
    entries = po.entries
    counts, jumps = [], []
    for k, (p, d), q in po.pairs():
        n, _ = _walk(flow, p.base_point, p.fiber + d)
        offset, jump = _align(flow, flow_evaluate(flow, p, d), q, need)
        counts.append(n + offset)
        jumps.append(jump)
    if not po.periodic:
        counts.append(None)
        jumps.append(0.0)
    if any(c is not None and c < 1 for c in counts):
        raise HorizonTooShort("a pseudo-orbit segment crosses no roof")

    starts = [0]
    for c in counts[:-1]:
        starts.append(starts[-1] + c)
    points = [p.base_point for p, _ in entries]
    if po.periodic:
        word = sum((points[k].word(0, counts[k]) for k in range(len(entries))), ())
        z = SymbolicPoint.periodic(word)
    else:
        def coord(i):
            k = max(j for j, c in enumerate(starts) if c <= i) if i >= 0 else 0
            return points[k][i - starts[k]]

        lo = points[0].tail_bounds()[0]
        hi = starts[-1] + max(points[-1].tail_bounds()[1], 0)
        z = point_from_coordinates(coord, lo, hi, len(points[0].past_cycle), len(points[-1].future_cycle))
    traced = FlowPoint(z, entries[0][0].fiber)

    bps = [(0.0, 0.0)]
    for (_, d), jump in zip(entries, jumps):
        s, r = bps[-1]
        bps.append((s + float(d), r + float(d) + float(jump)))
    slopes = [(r1 - r0) / (s1 - s0) for (s0, r0), (s1, r1) in zip(bps, bps[1:])]
    if any(abs(sl - 1) >= epsilon for sl in slopes):
        raise HorizonTooShort("segments are too short to absorb the jumps")

    worst = 0.0
    for k, (p, d) in enumerate(entries):
        s0, r0 = bps[k]
        a, b, last = flow_evaluate(flow, traced, r0), p, 0.0
        for u in _sample_times(flow, p, d, slopes[k], traced, r0):
            a = flow_evaluate(flow, a, (u - last) * slopes[k])
            b = flow_evaluate(flow, b, u - last)
            last = u
            worst = max(worst, flow_distance(flow, a, b))
    return TraceCertificate(traced, tuple(bps), epsilon, worst)


def close_periodic(flow: SuspensionFlow, p: FlowPoint, t: float, epsilon: float):
    """A periodic orbit ``ε``-shadowing the orbit segment of ``p`` over ``[0, t]``.

    Returns ``(y, ell)`` with ``θ^ell(y) = y`` exactly and ``|ell − t| <= δ``.
    """
    need = tracing_window(flow, epsilon)
    n, _ = _walk(flow, p.base_point, p.fiber + t)
    offset, _ = _align(flow, flow_evaluate(flow, p, t), p, need)
    m = n + offset
    if m < 1:
        raise HorizonTooShort(f"the orbit segment of length {t:g} crosses no roof")
    word = p.base_point.word(0, m)
    y = FlowPoint(compact(SymbolicPoint.periodic(word)), p.fiber)
    return y, cycle_roof_sum(flow, word)


def cycle_roof_sum(flow: SuspensionFlow, cycle) -> float:
    """Sum of the roof along one period of a cycle."""
    x = SymbolicPoint.periodic(cycle)
    return sum(flow.roof_at(x, i) for i in range(len(cycle)))


def bracket(flow: SuspensionFlow, x: FlowPoint, y: FlowPoint, epsilon: float):
    """The local product ``[x, y]``: future of ``x``, past and fiber of ``y``.

    Returns ``(z, tau)`` with ``z`` on the strong unstable set of ``y`` and on
    the strong stable set of ``θ^tau(x)``.
    """
    need = tracing_window(flow, epsilon)
    best, widest = None, -1
    for _, u, s in _representations(flow, y):
        radius = agreement_radius(x.base_point, u)
        radius = math.inf if radius is None else radius
        widest = max(widest, radius)
        if radius >= need and 0 <= s and (best is None or abs(s - x.fiber) < abs(best[1] - x.fiber)):
            best = (u, s)
    if best is None:
        raise DeltaTooLarge(need, int(widest))
    u, s = best
    v = x.base_point
    lo = min(v.tail_bounds()[0], u.tail_bounds()[0], 0)
    hi = max(v.tail_bounds()[1], u.tail_bounds()[1], 0)
    z = point_from_coordinates(
        lambda i: v[i] if i >= 0 else u[i], lo, hi, len(u.past_cycle), len(v.future_cycle)
    )
    return FlowPoint(z, s), s - x.fiber


# -- the dichotomy ------------------------------------------------------------


@dataclass(frozen=True)
class Mixing:
    """The suspension flow is topologically mixing."""


@dataclass(frozen=True)
class ConstantSuspension:
    """The roof is cohomologous to the constant ``c``: the flow is a constant-time suspension."""

    c: float


def suspension_dichotomy(flow: SuspensionFlow):
    """:class:`ConstantSuspension` if the roof is cohomologous to a constant, else :class:`Mixing`."""
    if not is_irreducible(flow.base):
        raise NotIrreducible("the base shift is not irreducible")
    if not is_aperiodic(flow.base):
        raise NotAperiodic("the base shift is not aperiodic")
    c = is_cohomologous_to_constant(flow.base, flow.roof)
    return Mixing() if c is None else ConstantSuspension(c)
