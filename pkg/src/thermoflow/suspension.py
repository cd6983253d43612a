"""Suspension flows over shifts of finite type.

A point of the suspension is a pair ``(x, s)`` with ``0 <= s < R(x)``; the
flow moves ``s`` at unit speed and jumps to ``(σx, 0)`` at the roof.

Functions on the suspension space ("fiber functions") are described by
*pieces*: for every base word of the function's window, a list of
``Piece(a, b, fn)`` covering ``[0, R)`` where ``fn`` is a function of the
fiber coordinate.  Polynomial pieces are integrated and minimized exactly;
other callables fall back on adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.optimize import brentq

from . import config
from .errors import (
    InvalidPotential,
    NonpositiveRoof,
    NotIrreducible,
    ToleranceBreach,
    ValidationError,
)
from .potentials import Potential, combine, edge_presentation
from .shift import Sft, SymbolicPoint, admissible_words, check_point, is_irreducible, shift_point, strong_components
from .thermo import MarkovMeasure, entropy, equilibrium_measure, integrate

class Piece(NamedTuple):
    """``fn`` on the fiber interval ``[a, b]``."""

    a: float
    b: float
    fn: Callable


def piece_integral(piece: Piece, a=None, b=None):
    """``∫ fn`` over ``[a, b]`` (defaults to the whole piece)."""
    a = piece.a if a is None else a
    b = piece.b if b is None else b
    fn = piece.fn
    if isinstance(fn, Polynomial):
        anti = fn.integ()
        return float(anti(b) - anti(a))
    if b == a:
        return 0.0
    value, _ = quad(fn, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float(value)


def piece_minimum(piece: Piece) -> float:
    """Minimum of ``fn`` on the closed piece: exact for polynomials."""
    fn, a, b = piece.fn, float(piece.a), float(piece.b)
    if isinstance(fn, Polynomial):
        cands = [a, b]
        d = fn.deriv()
        if d.degree() >= 1 or np.any(d.coef != 0):
            for root in d.roots():
                if abs(root.imag) < 1e-12 and a < root.real < b:
                    cands.append(root.real)
        return float(min(fn(c) for c in cands))
    return float(min(fn(s) for s in np.linspace(a, b, 65)))


# -- fiber functions ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiberPotential:
    """``f(v, s) = Σ F_i(v) · s^{d_i}`` with locally constant coefficients ``F_i``.

    ``terms`` is a sequence of ``(degree, Potential)`` pairs.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((int(d), p) for d, p in self.terms)
        if not terms:
            raise InvalidPotential("a fiber potential needs at least one term")
        for d, p in terms:
            if d < 0:
                raise InvalidPotential("degrees must be nonnegative")
            if not isinstance(p, Potential):
                raise InvalidPotential("coefficients must be potentials")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def constant(cls, g: Sft, c):
        return cls(((0, Potential.constant(g, c)),))

    @classmethod
    def of(cls, f: Potential, degree: int = 0):
        """The fiber potential ``f(v) · s^degree``."""
        return cls(((degree, f),))

    @property
    def window(self) -> int:
        return max(p.window for _, p in self.terms)

    def check(self, g: Sft) -> None:
        for _, p in self.terms:
            p.check(g)

    def polynomial(self, word) -> Polynomial:
        coef = np.zeros(max(d for d, _ in self.terms) + 1)
        for d, p in self.terms:
            coef[d] += float(p(word))
        return Polynomial(coef)

    def pieces(self, word, length):
        return (Piece(0.0, length, self.polynomial(word)),)

    def __call__(self, word, s):
        return sum(p(word) * s**d for d, p in self.terms)


@dataclass(frozen=True, eq=False)
class PiecewisePotential:
    """A fiber function given explicitly by pieces for every base word of ``window``."""

    window: int
    table: dict

    def pieces(self, word, length=None):
        return self.table[tuple(word[: self.window])]

    def check(self, g: Sft) -> None:
        if set(self.table) != set(admissible_words(g, self.window)):
            raise InvalidPotential("piece table does not cover the admissible words")

    def __call__(self, word, s):
        for piece in self.pieces(word):
            if s <= piece.b:
                return float(piece.fn(s))
        return float(self.pieces(word)[-1].fn(s))


# -- flows --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SuspensionFlow:
    """The suspension of ``base`` under the positive locally constant ``roof``."""

    base: Sft
    roof: Potential

    def __post_init__(self):
        self.roof.check(self.base)
        bad = [w for w, v in self.roof.table.items() if not v > 0]
        if bad:
            raise NonpositiveRoof(f"roof is not positive on {bad[0]}")

    def roof_at(self, x: SymbolicPoint, n: int = 0):
        """``R(σⁿ x)``."""
        return self.roof(x.word(n, self.roof.window))

    @property
    def roof_min(self):
        return self.roof.min()

    @property
    def roof_max(self):
        return self.roof.max()

    def __eq__(self, other):
        if not isinstance(other, SuspensionFlow):
            return NotImplemented
        return self.base == other.base and self.roof == other.roof

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FlowPoint:
    """A point ``(x, s)`` of the suspension space in canonical form ``0 <= s < R(x)``."""

    base_point: SymbolicPoint
    fiber: float

    def __eq__(self, other):
        if not isinstance(other, FlowPoint):
            return NotImplemented
        return self.base_point == other.base_point and self.fiber == other.fiber

    __hash__ = None


def check_flow_point(flow: SuspensionFlow, p: FlowPoint) -> None:
    check_point(flow.base, p.base_point)
    r = flow.roof_at(p.base_point)
    if not 0 <= p.fiber < r:
        raise ValidationError(f"fiber {p.fiber} is outside [0, {r})")


def _walk(flow: SuspensionFlow, x: SymbolicPoint, s):
    """``(n, s')`` such that ``(x, s)`` is canonically ``(σⁿ x, s')``.

    Whole periods of the tails are skipped in one step, so long times cost
    no more than short ones.
    """
    def roof(n):
        return flow.roof_at(x, n)

    lo, hi = x.tail_bounds()
    n = 0
    if s >= 0:
        while n < hi and s >= roof(n):
            s -= roof(n)
            n += 1
        if s >= roof(n):
            period = len(x.future_cycle)
            total = sum(roof(n + j) for j in range(period))
            k = math.floor(s / total) - 1
            if k > 0:
                s -= k * total
                n += k * period
        while s >= roof(n):
            s -= roof(n)
            n += 1
        return n, s
    edge = lo - flow.roof.window
    while s < 0 and n > edge:
        n -= 1
        s += roof(n)
    if s < 0:
        period = len(x.past_cycle)
        total = sum(roof(n - 1 - j) for j in range(period))
        k = math.floor(-s / total) - 1
        if k > 0:
            s += k * total
            n -= k * period
    while s < 0:
        n -= 1
        s += roof(n)
    return n, s


def flow_evaluate(flow: SuspensionFlow, p: FlowPoint, t) -> FlowPoint:
    """``θᵗ(p)`` in canonical form.

    Exact when the roof values, the fiber and ``t`` are exact rationals.
    """
    if t == 0:
        return p
    n, s = _walk(flow, p.base_point, p.fiber + t)
    return FlowPoint(shift_point(p.base_point, n), s)


def orbit_pieces(flow: SuspensionFlow, fn, p: FlowPoint):
    """Forward pieces of ``fn`` along the orbit of ``p``.

    Yields ``(n, piece)`` where ``piece`` is clipped to start at the fiber of
    ``p`` on the first step.
    """
    x, s0 = p.base_point, p.fiber
    n = 0
    while True:
        word = x.word(n, max(fn.window, flow.roof.window))
        r = flow.roof(word)
        for piece in fn.pieces(word, r):
            if piece.b <= s0:
                continue
            yield n, Piece(max(piece.a, s0), piece.b, piece.fn)
        s0 = 0
        n += 1


def orbit_pieces_backward(flow: SuspensionFlow, fn, p: FlowPoint):
    """Pieces of ``fn`` along the orbit of ``p`` in reverse time order."""
    x, s0 = p.base_point, p.fiber
    n = 0
    while True:
        word = x.word(n, max(fn.window, flow.roof.window))
        r = flow.roof(word) if s0 is None else s0
        for piece in reversed(fn.pieces(word, flow.roof(word))):
            if piece.a >= r:
                continue
            yield n, Piece(piece.a, min(piece.b, r), piece.fn)
        s0 = None
        n -= 1


def orbit_integral(flow: SuspensionFlow, fn, p: FlowPoint, t):
    """``∫₀ᵗ fn(θˢ p) ds`` (negative ``t`` integrates backward with a sign)."""
    if t == 0:
        return 0.0
    total, elapsed = 0.0, 0.0
    if t > 0:
        for _, piece in orbit_pieces(flow, fn, p):
            length = piece.b - piece.a
            if elapsed + length >= t:
                return total + piece_integral(piece, piece.a, piece.a + (t - elapsed))
            total += piece_integral(piece)
            elapsed += length
    for _, piece in orbit_pieces_backward(flow, fn, p):
        length = piece.b - piece.a
        if elapsed + length >= -t:
            return -(total + piece_integral(piece, piece.b - (-t - elapsed), piece.b))
        total += piece_integral(piece)
        elapsed += length


def delta(flow: SuspensionFlow, f) -> Potential:
    """``Δf(v) = ∫₀^{R(v)} f(v, s) ds`` as a locally constant potential."""
    window = max(f.window, flow.roof.window)
    table = {}
    for word in admissible_words(flow.base, window):
        r = flow.roof(word)
        if isinstance(f, FiberPotential):
            value = 0
            for d, p in f.terms:
                c = p(word)
                if isinstance(c, (int, Fraction)) and isinstance(r, (int, Fraction)):
                    value += c * Fraction(r) ** (d + 1) / (d + 1)
                else:
                    value += float(c) * float(r) ** (d + 1) / (d + 1)
        else:
            value = sum(piece_integral(piece) for piece in f.pieces(word, r))
        table[word] = value
    return Potential(window, table)


# -- Bowen equation -----------------------------------------------------------


def _component_weights(g: Sft, num: Potential, den: Potential):
    ep = edge_presentation(g, max(num.window, den.window))
    wn = ep.matrix(num, fill=0.0)
    wd = ep.matrix(den, fill=0.0)
    mask = ep.graph.adjacency > 0
    comps = [np.array([ep.graph.index[s] for s in c]) for c in strong_components(ep.graph)]
    return wn, wd, mask, comps


def _log_radius(w: np.ndarray, mask: np.ndarray, comps) -> float:
    """Largest log Perron root of ``exp(w)`` restricted to ``mask``."""
    best = -np.inf
    for idx in comps:
        sub = w[np.ix_(idx, idx)]
        sm = mask[np.ix_(idx, idx)]
        offset = sub[sm].max()
        m = np.where(sm, np.exp(sub - offset), 0.0)
        rho = max(np.linalg.eigvals(m).real)
        best = max(best, math.log(rho) + offset)
    return float(best)


def bowen_root(g: Sft, num: Potential, den: Potential) -> float:
    """The ``c`` with ``P(σ, num − c·den) = 0`` for a positive ``den``.

    ``c ↦ P(num − c·den)`` is strictly decreasing, so the root is unique;
    it is bracketed from the bounds ``h_top + min/max(num − c·den)`` and
    refined with Brent's method.
    """
    if not is_irreducible(g):
        raise NotIrreducible("the base shift is not irreducible")
    wn, wd, mask, comps = _component_weights(g, num, den)
    zero = np.zeros_like(wn)
    h = _log_radius(zero, mask, comps)

    def pressure_at(c):
        return _log_radius(wn - c * wd, mask, comps)

    a_min, a_max = float(num.min()), float(num.max())
    b_min, b_max = float(den.min()), float(den.max())
    lo = (a_min - h * b_max) / b_min - 1.0
    hi = (a_max + h * b_max) / b_min + 1.0
    # the bounds above straddle the root for den >= 1; widen for small roofs
    while pressure_at(lo) < 0:
        lo -= 2.0 * (hi - lo)
    while pressure_at(hi) > 0:
        hi += 2.0 * (hi - lo)
    tol = config.get()
    c = brentq(pressure_at, lo, hi, xtol=0.1 * tol.bowen_root, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = abs(pressure_at(c))
    if residual > tol.bowen:
        raise ToleranceBreach(f"Bowen residual {residual:.3g} exceeds {tol.bowen:.3g}")
    return float(c)


def flow_pressure(flow: SuspensionFlow, f) -> float:
    """Topological pressure of the flow: the root of ``P(σ, Δf − c·R) = 0``."""
    return bowen_root(flow.base, delta(flow, f), flow.roof)


def topological_entropy(flow: SuspensionFlow) -> float:
    return bowen_root(flow.base, Potential.constant(flow.base, 0.0), flow.roof)


# -- measures -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlowMeasure:
    """An invariant measure of the flow, carried by its base measure.

    The flow measure is ``ν × Lebesgue`` on the region under the roof,
    normalized by ``roof_integral = ∫R dν``.
    """

    base_measure: MarkovMeasure
    roof_integral: float

    def __post_init__(self):
        if not self.roof_integral > 0:
            raise ValidationError("roof integral must be positive")


def lift_measure(flow: SuspensionFlow, nu: MarkovMeasure) -> FlowMeasure:
    return FlowMeasure(nu, integrate(nu, flow.roof))


def project_measure(flow: SuspensionFlow, mu: FlowMeasure) -> MarkovMeasure:
    return mu.base_measure


def flow_entropy(flow: SuspensionFlow, mu: FlowMeasure) -> float:
    """Abramov's formula ``h(ν) / ∫R dν``."""
    return entropy(mu.base_measure) / mu.roof_integral


def flow_integral(flow: SuspensionFlow, mu: FlowMeasure, f) -> float:
    """``∫ f dμ = ∫ Δf dν / ∫ R dν``."""
    return integrate(mu.base_measure, delta(flow, f)) / mu.roof_integral


def flow_equilibrium(flow: SuspensionFlow, f) -> FlowMeasure:
    """The equilibrium state of ``f``, lifted from the equilibrium state of ``Δf − P·R``."""
    c = flow_pressure(flow, f)
    g = flow.base
    pot = combine(g, lambda a, r: float(a) - c * float(r), delta(flow, f), flow.roof)
    return lift_measure(flow, equilibrium_measure(g, pot))


def flow_mme(flow: SuspensionFlow):
    """``(h_top, μ)``: topological entropy and the measure of maximal entropy."""
    h = topological_entropy(flow)
    g = flow.base
    pot = combine(g, lambda r: -h * float(r), flow.roof)
    return h, lift_measure(flow, equilibrium_measure(g, pot))
