"""Time changes of suspension flows and the synchronization of equilibrium states.

A positive rate ``r`` on the suspension space defines a new flow whose
orbits are the old ones traversed with speed ``1/r``: the new time ``t``
corresponds to the old time ``ℓ(y, t)`` with ``t = ∫₀^ℓ r(φˢ y) ds``.  For a
suspension flow this is again a suspension flow, over the same base, with
roof ``R′ = Δr``.

Synchronizing a potential ``f`` at horizon ``t`` means choosing
``r = P − (1/t)∫₀ᵗ f∘φˢ ds``: the measure of maximal entropy of the new flow
is the equilibrium state of ``f``, and the new flow has entropy 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from . import config
from .errors import (
    InvalidPotential,
    NonpositiveRate,
    NotHyperbolicAtHorizon,
    ToleranceBreach,
    ValidationError,
    WindowExplosion,
)
from .potentials import Potential, max_ratio_cycle
from .shift import Sft, admissible_words
from .suspension import (
    FiberPotential,
    FlowMeasure,
    FlowPoint,
    Piece,
    PiecewisePotential,
    SuspensionFlow,
    delta,
    flow_entropy,
    flow_equilibrium,
    flow_evaluate,
    flow_integral,
    flow_mme,
    flow_pressure,
    orbit_integral,
    orbit_pieces,
    orbit_pieces_backward,
    piece_integral,
    piece_minimum,
)
from .thermo import integrate


def rate_minimum(flow: SuspensionFlow, rate) -> float:
    """Exact minimum of a piecewise polynomial rate over the suspension space."""
    window = max(rate.window, flow.roof.window)
    return min(
        piece_minimum(piece)
        for word in admissible_words(flow.base, window)
        for piece in rate.pieces(word, flow.roof(word))
    )


def _require_positive(flow, rate):
    low = rate_minimum(flow, rate)
    if not low > 0:
        raise NonpositiveRate(f"rate attains {low:.6g}")


@dataclass(frozen=True, eq=False)
class TimeChangeSpec:
    """A time change of ``source`` by ``rate``; for a synchronization also its horizon and pressure."""

    source: SuspensionFlow
    rate: object
    t_horizon: float = 1.0
    pressure_const: float = 0.0
    window: int = 1

    def __post_init__(self):
        if not self.t_horizon > 0:
            raise ValidationError("t_horizon must be positive")
        _require_positive(self.source, self.rate)


# -- the time change on orbits ------------------------------------------------


def _inverter(piece: Piece, from_right=False):
    """Map ``target ↦ x`` with ``∫_a^x fn = target`` (``∫_x^b fn`` if ``from_right``) on a positive piece."""
    fn, a, b = piece.fn, piece.a, piece.b
    if isinstance(fn, Polynomial):
        if fn.degree() == 0:
            c = float(fn.coef[0])
            return (lambda y: b - y / c) if from_right else (lambda y: a + y / c)
        anti = fn.integ()
        ref = anti(b) if from_right else anti(a)
        sign = -1.0 if from_right else 1.0

        def gap(x, y):
            return sign * (anti(x) - ref) - y
    else:
        def gap(x, y):
            lo, hi = (x, b) if from_right else (a, x)
            return piece_integral(piece, lo, hi) - y

    xtol = config.get().segment_root

    def solve(y):
        ga, gb = gap(a, y), gap(b, y)
        if ga == 0:
            return a
        if gb == 0:
            return b
        if ga * gb > 0:
            return a if abs(ga) < abs(gb) else b
        return brentq(gap, a, b, args=(y,), xtol=xtol, rtol=4 * np.finfo(float).eps)

    return solve


def _solve_in_piece(piece: Piece, target, from_right=False):
    if piece_minimum(piece) <= 0:
        raise NonpositiveRate("rate is not positive along the orbit")
    return _inverter(piece, from_right)(target)


def ell(flow: SuspensionFlow, rate, p: FlowPoint, t) -> float:
    """The old time ``ℓ`` with ``∫₀^ℓ r(φˢ p) ds = t``."""
    if t == 0:
        return 0.0
    acc, elapsed = 0.0, 0.0
    if t > 0:
        for _, piece in orbit_pieces(flow, rate, p):
            part = piece_integral(piece)
            if acc + part >= t:
                x = _solve_in_piece(piece, t - acc)
                return elapsed + (x - piece.a)
            if piece_minimum(piece) <= 0:
                raise NonpositiveRate("rate is not positive along the orbit")
            acc += part
            elapsed += piece.b - piece.a
    for _, piece in orbit_pieces_backward(flow, rate, p):
        part = piece_integral(piece)
        if acc + part >= -t:
            x = _solve_in_piece(piece, -t - acc, from_right=True)
            return -(elapsed + (piece.b - x))
        if piece_minimum(piece) <= 0:
            raise NonpositiveRate("rate is not positive along the orbit")
        acc += part
        elapsed += piece.b - piece.a


def rate_integral(flow: SuspensionFlow, rate, p: FlowPoint, t) -> float:
    """``k(p, t) = ∫₀ᵗ r(φˢ p) ds``, the inverse of ``t ↦ ℓ(p, t)``."""
    return orbit_integral(flow, rate, p, t)


def time_changed_evaluate(flow: SuspensionFlow, rate, p: FlowPoint, tau) -> FlowPoint:
    """The time-changed flow at time ``tau``, as a point of the original suspension."""
    return flow_evaluate(flow, p, ell(flow, rate, p, tau))


def time_changed_roof(flow: SuspensionFlow, rate) -> SuspensionFlow:
    """The suspension realizing the time change: same base, roof ``Δr``."""
    _require_positive(flow, rate)
    return SuspensionFlow(flow.base, delta(flow, rate))


def transform_measure(flow: SuspensionFlow, rate, mu: FlowMeasure) -> FlowMeasure:
    """The measure ``μ_r`` with density ``r / ∫r dμ``, on the time-changed suspension."""
    nu = mu.base_measure
    return FlowMeasure(nu, integrate(nu, delta(flow, rate)))


class TransportedFunction:
    """``g / r`` written in the fiber coordinate of the time-changed suspension.

    A fiber coordinate ``s′`` of the new suspension corresponds to the old
    coordinate ``s`` with ``∫₀ˢ r = s′``.  With ``g`` omitted this is the
    reciprocal rate ``1 / r``, whose time change undoes the one by ``r``.
    """

    def __init__(self, rate, g=None):
        self.rate = rate
        self.g = g
        self.window = max(rate.window, g.window if g is not None else 1)

    def _old_pieces(self, word, new_length):
        if isinstance(self.rate, FiberPotential):
            poly = self.rate.polynomial(word)
            anti = poly.integ()
            hi = 1.0
            while anti(hi) - anti(0) < new_length:
                hi *= 2
            length = brentq(lambda s: anti(s) - anti(0) - new_length, 0.0, hi, xtol=1e-15)
            return (Piece(0.0, length, poly),)
        return self.rate.pieces(word)

    def pieces(self, word, new_length):
        out = []
        start = 0.0
        for piece in self._old_pieces(word, new_length):
            width = piece_integral(piece)
            out.append(Piece(start, start + width, self._transport(word, piece, start)))
            start += width
        return tuple(out)

    def _transport(self, word, piece, start):
        g, rate_fn = self.g, piece.fn
        invert = _inverter(piece)

        def fn(s_new):
            s = invert(s_new - start)
            top = 1.0 if g is None else float(g(word, s))
            return top / float(rate_fn(s))

        return fn


def inverse_time_change(flow_new: SuspensionFlow, rate) -> SuspensionFlow:
    """Undo the time change by ``rate``: time-change ``flow_new`` by ``1/r``."""
    return time_changed_roof(flow_new, TransportedFunction(rate))


# -- hyperbolicity ------------------------------------------------------------


def is_hyperbolic(flow: SuspensionFlow, f):
    """Whether ``P(f) > sup_μ ∫f dμ``, with diagnostics.

    The supremum over invariant measures of the flow is the largest ratio
    ``Σ Δf / Σ R`` over periodic orbits of the base.
    """
    tol = config.get().hyperbolic
    p = flow_pressure(flow, f)
    m, cycle = max_ratio_cycle(flow.base, delta(flow, f), flow.roof)
    h = flow_entropy(flow, flow_equilibrium(flow, f))
    hyperbolic = p > m + tol
    return hyperbolic, {
        "pressure": p,
        "max_average": m,
        "witness_cycle": cycle,
        "equilibrium_entropy": h,
        "entropy_consistent": (h > tol) == hyperbolic,
    }


# -- synchronization ----------------------------------------------------------


def synchronization_window(flow: SuspensionFlow, f, t_horizon) -> int:
    """Base window needed by the synchronized rate at horizon ``t_horizon``."""
    segments = math.ceil(t_horizon / float(flow.roof_min)) + 1
    return segments + max(flow.roof.window, f.window) - 1


def _cumulative_integral(flow: SuspensionFlow, f, word, segments):
    """``τ ↦ ∫₀^τ f`` along the base word, as pieces ``(start, end, polynomial in τ)``."""
    out = []
    offset, acc = 0.0, 0.0
    w = max(flow.roof.window, f.window)
    for j in range(segments):
        sub = word[j : j + w]
        length = float(flow.roof(sub))
        for piece in f.pieces(sub, length):
            if not isinstance(piece.fn, Polynomial):
                raise InvalidPotential("synchronization needs a piecewise polynomial potential")
            anti = piece.fn.integ()
            local = Polynomial([-offset, 1.0])
            poly = anti(local) - anti(piece.a) + acc
            out.append((offset + piece.a, offset + piece.b, poly))
            acc += piece_integral(piece)
        offset += length
    return out


def _locate(pieces, tau):
    for a, b, poly in pieces:
        if tau <= b:
            return poly
    return pieces[-1][2]


def _merge(points, tol):
    points = sorted(points)
    out = [points[0]]
    for x in points[1:]:
        if x - out[-1] > tol:
            out.append(x)
    return out


def synchronized_rate(flow: SuspensionFlow, f, t_horizon, pressure_value):
    """The rate ``r = P − (1/t)∫₀ᵗ f∘φˢ`` as exact polynomial pieces, and its window."""
    tol = config.get()
    m = synchronization_window(flow, f, t_horizon)
    if m > tol.max_block:
        raise WindowExplosion(f"horizon {t_horizon:g} needs a {m}-block recoding (cap {tol.max_block})")
    segments = m - max(flow.roof.window, f.window) + 1
    t = float(t_horizon)
    table = {}
    for word in admissible_words(flow.base, m):
        cum = _cumulative_integral(flow, f, word, segments)
        r0 = float(flow.roof(word))
        cuts = [0.0, r0]
        for a, b, _ in cum:
            for x in (a, b, a - t, b - t):
                if 0 < x < r0:
                    cuts.append(x)
        cuts = _merge(cuts, tol.breakpoint)
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            mid = 0.5 * (a + b)
            ahead = _locate(cum, mid + t)(Polynomial([t, 1.0]))
            here = _locate(cum, mid)
            pieces.append(Piece(a, b, pressure_value - (ahead - here) / t))
        table[word] = tuple(pieces)
    return PiecewisePotential(m, table), m


def synchronize(flow: SuspensionFlow, f, t_horizon=1.0):
    """Synchronize the equilibrium state of ``f`` at horizon ``t_horizon``.

    Returns
    -------
    spec : TimeChangeSpec
        The rate, horizon, pressure and window used.
    synchronized : SuspensionFlow
        The time-changed suspension, roof ``Δr`` of window ``spec.window``.

    Raises
    ------
    NotHyperbolicAtHorizon
        If the horizon average of ``f`` reaches the pressure somewhere.
    WindowExplosion
        If the needed recoding exceeds the block cap.
    """
    p = flow_pressure(flow, f)
    rate, m = synchronized_rate(flow, f, t_horizon, p)
    low = rate_minimum(flow, rate)
    if low <= config.get().hyperbolic:
        raise NotHyperbolicAtHorizon(p - low, p, t_horizon)
    spec = TimeChangeSpec(flow, rate, float(t_horizon), p, m)
    return spec, time_changed_roof(flow, rate)


def find_horizon(flow: SuspensionFlow, f, max_doublings=7):
    """First horizon among ``1, 2, 4, …, 2**max_doublings`` at which ``synchronize`` succeeds."""
    last = None
    for k in range(max_doublings + 1):
        try:
            return synchronize(flow, f, 2.0**k)
        except NotHyperbolicAtHorizon as exc:
            last = exc
        except WindowExplosion:
            break
    if last is None:
        p = flow_pressure(flow, f)
        raise NotHyperbolicAtHorizon(float("nan"), p)
    raise last


# -- end-to-end check ---------------------------------------------------------


@dataclass(frozen=True)
class SynchronizationReport:
    pressure: float
    horizon: float
    window: int
    h_top_synchronized: float
    max_cylinder_discrepancy: float
    density_check_max_error: float

    @property
    def checks(self):
        tol = config.get()
        return {
            "entropy": abs(self.h_top_synchronized - 1.0) <= tol.synchronized_entropy,
            "cylinders": self.max_cylinder_discrepancy <= tol.cylinder,
            "density": self.density_check_max_error <= tol.density,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self):
        return asdict(self)

    def require(self):
        """Raise :class:`ToleranceBreach` unless every check passed."""
        failed = [k for k, ok in self.checks.items() if not ok]
        if failed:
            raise ToleranceBreach(f"synchronization checks failed: {', '.join(failed)}")
        return self


def probe_functions(g: Sft):
    """Fiber functions used to probe the density of the time-changed measure."""
    one = Potential.constant(g, 1.0)
    out = [FiberPotential.of(one), FiberPotential.of(one, 1), FiberPotential.of(one, 2)]
    for s in g.states:
        ind = Potential.from_symbols(g, {v: float(v == s) for v in g.states})
        out.append(FiberPotential.of(ind))
        out.append(FiberPotential(((0, ind), (1, one))))
    return out



def verify_synchronization(flow: SuspensionFlow, f, t_horizon=1.0, max_len=6) -> SynchronizationReport:
    """Check the synchronized flow against independently computed objects.

    Three checks: the synchronized flow has entropy 1; its measure of maximal
    entropy has the same base measure as the equilibrium state of ``f``
    (compared on cylinders up to ``max_len``); and the time-changed measure
    has density ``r / ∫r dμ``, tested by integrating ``g / r`` in the new
    fiber coordinate.
    """
    spec, sync = synchronize(flow, f, t_horizon)
    h_sync, mme = flow_mme(sync)
    eq = flow_equilibrium(flow, f)
    disc = 0.0
    for length in range(1, max_len + 1):
        for word in admissible_words(flow.base, length):
            a = eq.base_measure.cylinder(word)
            b = mme.base_measure.cylinder(word)
            disc = max(disc, abs(a - b))
    mu_r = transform_measure(flow, spec.rate, eq)
    mean_rate = flow_integral(flow, eq, spec.rate)
    err = 0.0
    for g in probe_functions(flow.base) + [f]:
        lhs = flow_integral(sync, mu_r, TransportedFunction(spec.rate, g))
        rhs = flow_integral(flow, eq, g) / mean_rate
        err = max(err, abs(lhs - rhs))
    return SynchronizationReport(spec.pressure_const, spec.t_horizon, spec.window, h_sync, disc, err)
