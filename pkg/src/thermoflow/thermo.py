"""Pressure and equilibrium states of locally constant potentials on a shift.

Everything goes through the transfer matrix ``M(u, v) = exp f(u, v)`` on an
edge presentation: the pressure is the log of its Perron root, and the
equilibrium state is the Markov measure built from the Perron eigenvectors.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import EmptyShift, NonUniqueEquilibrium, ToleranceBreach, ValidationError
from .potentials import Potential, edge_presentation, scale
from .shift import Sft, admissible_words, strong_components


@dataclass(frozen=True, eq=False)
class TransferData:
    """Perron data of the transfer matrix on one irreducible component.

    ``matrix`` is stored scaled by ``exp(-offset)`` so that large potentials
    do not overflow; the true spectral radius is ``exp(offset) * spectral_radius``.
    """

    matrix: np.ndarray
    offset: float
    spectral_radius: float
    right_eigvec: np.ndarray
    left_eigvec: np.ndarray
    support: np.ndarray

    @property
    def log_radius(self):
        return math.log(self.spectral_radius) + self.offset


def _perron(m: np.ndarray):
    """Perron root and positive eigenvectors of an irreducible nonnegative matrix."""
    vals, vecs = np.linalg.eig(m)
    k = int(np.argmax(vals.real))
    h = np.abs(vecs[:, k].real)
    lvals, lvecs = np.linalg.eig(m.T)
    l = np.abs(lvecs[:, int(np.argmax(lvals.real))].real)
    h /= h.max()
    l /= l.max()
    # Rayleigh-type refinement with both vectors
    lam = float(l @ m @ h / (l @ h))
    return lam, h, l


def transfer_components(g: Sft, f: Potential):
    """Transfer data for each irreducible component of the edge presentation of ``f``."""
    ep = edge_presentation(g, f.window)
    w = ep.matrix(f)
    finite = w[np.isfinite(w)]
    if finite.size == 0:
        raise EmptyShift("no edges")
    offset = float(finite.max())
    m = np.where(np.isfinite(w), np.exp(w - offset), 0.0)
    out = []
    for comp in strong_components(ep.graph):
        idx = np.array([ep.graph.index[s] for s in comp])
        sub = m[np.ix_(idx, idx)]
        lam, h, l = _perron(sub)
        out.append(TransferData(sub, offset, lam, h, l, idx))
    if not out:
        raise EmptyShift("the shift has no cycles")
    return ep, m, out


def pressure(g: Sft, f: Potential) -> float:
    """Topological pressure ``P(σ, f)``: the largest log Perron root over components."""
    _, _, comps = transfer_components(g, f)
    return max(c.log_radius for c in comps)


def topological_entropy(g: Sft) -> float:
    return pressure(g, Potential.constant(g, 0.0))


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """A stationary Markov chain on the states of ``sft``.

    When ``sft`` is the ``block``-block presentation of ``base``, the measure
    lives on ``base`` and ``cylinder`` takes base words.
    """

    sft: Sft
    transition: np.ndarray
    stationary: np.ndarray
    base: Sft | None = None
    block: int = 1

    def __post_init__(self):
        if self.base is None:
            object.__setattr__(self, "base", self.sft)
        p = np.asarray(self.transition, dtype=float)
        pi = np.asarray(self.stationary, dtype=float)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "stationary", pi)
        n = len(self.sft)
        if p.shape != (n, n) or pi.shape != (n,):
            raise ValidationError("shape mismatch between chain and graph")
        tol = config.get().eigen
        if np.any(p < -tol) or np.any(np.abs(p.sum(axis=1) - 1) > tol):
            raise ValidationError("transition matrix is not row-stochastic")
        if abs(pi.sum() - 1) > tol or np.max(np.abs(pi @ p - pi)) > tol:
            raise ValidationError("stationary vector is not stationary")
        if np.any((p > 0) & (self.sft.adjacency == 0)):
            raise ValidationError("transition outside the edge set")

    def word_of(self, state) -> tuple:
        return state if self.block > 1 else (state,)

    def cylinder(self, word) -> float:
        """Measure of the cylinder ``{x : x_0 .. x_{L-1} = word}`` in base symbols."""
        word = tuple(word)
        n, h = self.block, self.sft
        if len(word) <= n:
            return float(
                sum(
                    self.stationary[i]
                    for i, s in enumerate(h.states)
                    if self.word_of(s)[: len(word)] == word
                )
            )
        blocks = [word[i : i + n] for i in range(len(word) - n + 1)]
        key = (lambda b: b) if n > 1 else (lambda b: b[0])
        try:
            idx = [h.index[key(b)] for b in blocks]
        except KeyError:
            return 0.0
        prob = self.stationary[idx[0]]
        for a, b in zip(idx, idx[1:]):
            prob *= self.transition[a, b]
        return float(prob)

    def cylinders(self, length: int) -> dict:
        return {w: self.cylinder(w) for w in admissible_words(self.base, length)}


def markov_measure(h: Sft, transition, base=None, block=1) -> MarkovMeasure:
    """Wrap a transition matrix, computing its stationary vector."""
    p = np.asarray(transition, dtype=float)
    pi = stationary_vector(p)
    return MarkovMeasure(h, p, pi, base, block)


def stationary_vector(p: np.ndarray) -> np.ndarray:
    n = p.shape[0]
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def random_markov_measure(g: Sft, rng, block: int = 1) -> MarkovMeasure:
    """Random positive transitions on the edges of an irreducible shift."""
    ep = edge_presentation(g, block + 1)
    h = ep.graph
    w = h.adjacency * rng.uniform(0.05, 1.0, size=h.adjacency.shape)
    return markov_measure(h, w / w.sum(axis=1, keepdims=True), g, ep.n)


def point_mass_on_cycle(g: Sft, cycle) -> MarkovMeasure:
    """The invariant measure equidistributed on a periodic orbit."""
    cycle = tuple(cycle)
    n = len(g)
    p = np.zeros((n, n))
    pi = np.zeros(n)
    on = set()
    for i, s in enumerate(cycle):
        a, b = g.index[s], g.index[cycle[(i + 1) % len(cycle)]]
        p[a, b] = 1.0
        pi[a] += 1.0 / len(cycle)
        on.add(a)
    if len(on) != len(cycle):
        raise ValidationError("cycle must be simple")
    for s in g.states:
        i = g.index[s]
        if i not in on:
            succ = [g.index[v] for v in g.successors[s]]
            p[i, succ] = 1.0 / len(succ)
    return MarkovMeasure(g, p, pi)


def equilibrium_measure(g: Sft, f: Potential) -> MarkovMeasure:
    """The unique equilibrium state of ``f`` as a Markov measure.

    On a reducible shift the measure is supported on the component of largest
    pressure; a tie raises :class:`NonUniqueEquilibrium`.
    """
    ep, m, comps = transfer_components(g, f)
    tol = config.get().tie
    radii = [c.log_radius for c in comps]
    best = max(radii)
    winners = [c for c, r in zip(comps, radii) if r >= best - tol]
    if len(winners) > 1:
        raise NonUniqueEquilibrium(
            f"{len(winners)} components share the maximal pressure {best:.12g}"
        )
    comp = winners[0]
    h = ep.graph
    n = len(h)
    p = np.zeros((n, n))
    idx = comp.support
    sub = comp.matrix * comp.right_eigvec[None, :] / (comp.spectral_radius * comp.right_eigvec[:, None])
    sub /= sub.sum(axis=1, keepdims=True)
    p[np.ix_(idx, idx)] = sub
    inside = set(idx.tolist())
    for i, s in enumerate(h.states):
        if i not in inside:
            succ = [h.index[v] for v in h.successors[s]]
            p[i, succ] = 1.0 / len(succ)
    pi = np.zeros(n)
    pi_sub = comp.left_eigvec * comp.right_eigvec
    pi_sub /= pi_sub.sum()
    # polish against the normalized chain
    pi_sub = stationary_vector(sub) if np.max(np.abs(pi_sub @ sub - pi_sub)) > 1e-14 else pi_sub
    pi[idx] = pi_sub
    return MarkovMeasure(h, p, pi, g, ep.n)


def entropy(m: MarkovMeasure) -> float:
    """Kolmogorov-Sinai entropy ``−Σ π(u) P(u,v) log P(u,v)``."""
    p = m.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)
    return float(-(m.stationary[:, None] * p * logs).sum())


def integrate(m: MarkovMeasure, f: Potential) -> float:
    """``∫ f dm``."""
    n = m.block
    if f.window <= n + 1:
        ep = edge_presentation(m.base, n + 1)
        vals = np.array([float(f(w)) for w in ep.words])
        weights = m.stationary[ep.src] * m.transition[ep.src, ep.dst]
        return float(weights @ vals)
    # longer windows: sum over cylinders
    return float(sum(m.cylinder(w) * f(w) for w in admissible_words(m.base, f.window)))


def pressure_curve(g: Sft, f: Potential, q_grid) -> list:
    """Samples ``(q, P(σ, q·f))``."""
    return [(float(q), pressure(g, scale(g, f, float(q)))) for q in q_grid]


def curve_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["q", "pressure"])
    for q, p in rows:
        writer.writerow([format_number(q), format_number(p)])
    return buf.getvalue()


def format_number(x) -> str:
    return f"{float(x):#.12g}"


def gibbs_constant(g: Sft, f: Potential) -> float:
    """A constant ``K`` with ``μ[w] / exp(S_w f − |w|·P) ∈ [1/K, K]`` for the equilibrium state.

    ``S_w f`` sums ``f`` over the windows lying inside ``w``.  For window ≤ 2
    the ratio equals ``l(w_0) h(w_last) λ e^{E−S} / (l·h)`` where ``E`` is the
    edge-weight sum, so ``K`` follows from the eigenvector extremes.
    """
    if f.window > 2:
        raise ValidationError("Gibbs bounds are implemented for windows up to 2")
    _, _, comps = transfer_components(g, f)
    if len(comps) != 1:
        raise NonUniqueEquilibrium("Gibbs bounds are computed for irreducible shifts")
    c = comps[0]
    lam = c.spectral_radius * math.exp(c.offset)
    z = float(c.left_eigvec @ c.right_eigvec)
    lo = c.left_eigvec.min() * c.right_eigvec.min() * lam / z
    hi = c.left_eigvec.max() * c.right_eigvec.max() * lam / z
    if f.window == 1:
        lo *= math.exp(-f.max())
        hi *= math.exp(-f.min())
    return float(max(hi, 1.0 / lo))


def check_variational(g: Sft, f: Potential, tol=None) -> float:
    """Residual ``|P − h(eq) − ∫f d eq|``; raises :class:`ToleranceBreach` above ``tol``."""
    tol = config.get().variational if tol is None else tol
    eq = equilibrium_measure(g, f)
    res = abs(pressure(g, f) - entropy(eq) - integrate(eq, f))
    if res > tol:
        raise ToleranceBreach(f"variational residual {res:.3g} exceeds {tol:.3g}")
    return res
