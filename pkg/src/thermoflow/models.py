"""Small reference models and a seeded battery of random flows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .factors import BlockCode
from .potentials import Potential
from .shift import Sft, is_irreducible
from .suspension import FiberPotential, SuspensionFlow


def golden_mean() -> Sft:
    return Sft([0, 1], [(0, 0), (0, 1), (1, 0)])


def full_shift(n: int = 2) -> Sft:
    return Sft(list(range(n)), [(a, b) for a in range(n) for b in range(n)])


def cycle_graph(n: int) -> Sft:
    return Sft(list(range(n)), [(i, (i + 1) % n) for i in range(n)])


def phase_toy():
    """A neutral loop beside a full 2-shift weighted by ``−log 2``.

    ``P(q·F) = max(0, (1 − q) log 2)``, with two equilibrium states at ``q = 1``.
    """
    g = Sft(["n", "a", "b"], [("n", "n"), ("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")])
    f = Potential.from_symbols(g, {"n": 0.0, "a": -math.log(2), "b": -math.log(2)})
    return g, f


def xor_code() -> BlockCode:
    g = full_shift(2)
    return BlockCode(2, {(a, b): (a + b) % 2 for a in range(2) for b in range(2)}, g, g)


def collapse_code() -> BlockCode:
    g = full_shift(2)
    loop = Sft(["*"], [("*", "*")])
    return BlockCode(1, {(0,): "*", (1,): "*"}, g, loop)


def constant_flow(g: Sft, c=1.0) -> SuspensionFlow:
    return SuspensionFlow(g, Potential.constant(g, c))


def golden_flow() -> SuspensionFlow:
    """Golden-mean shift with roof 1 on symbol 0 and 2 on symbol 1."""
    g = golden_mean()
    return SuspensionFlow(g, Potential.from_symbols(g, [1.0, 2.0]))


def random_graph(rng, n_states: int, density: float = 0.5, aperiodic: bool = True) -> Sft:
    """A random irreducible graph (aperiodic by default) on ``n_states`` states."""
    while True:
        adj = rng.random((n_states, n_states)) < density
        edges = [(a, b) for a in range(n_states) for b in range(n_states) if adj[a, b]]
        if not edges:
            continue
        try:
            g = Sft(list(range(n_states)), edges)
        except Exception:
            continue
        if not is_irreducible(g):
            continue
        if aperiodic:
            from .shift import is_aperiodic

            if not is_aperiodic(g):
                continue
        return g


def random_potential(rng, g: Sft, window: int, low=-1.0, high=1.0) -> Potential:
    return Potential.from_function(g, window, lambda w: float(rng.uniform(low, high)))


@dataclass(frozen=True, eq=False)
class BatteryCase:
    name: str
    flow: SuspensionFlow
    f: FiberPotential


def battery(seed: int = 2024, size: int = 24, roof_range=(1.0, 2.0)):
    """Seeded (shift, roof, fiber potential) triples: up to 4 states, windows up to 2.

    Includes the golden-mean examples and a few zero-entropy (single cycle)
    bases, on which no potential is hyperbolic.
    """
    rng = np.random.default_rng(seed)
    gm = golden_mean()
    cases = [
        BatteryCase("golden-unit", constant_flow(gm), FiberPotential.of(Potential.from_symbols(gm, [0.0, -1.0]))),
        BatteryCase("golden-12", golden_flow(), FiberPotential.of(Potential.from_symbols(gm, [0.0, -1.0]))),
        BatteryCase("full2-zero", constant_flow(full_shift(2)), FiberPotential.constant(full_shift(2), 0.0)),
        BatteryCase("cycle3", constant_flow(cycle_graph(3), 1.5), FiberPotential.of(random_potential(rng, cycle_graph(3), 1))),
        BatteryCase(
            "cycle2-window2",
            SuspensionFlow(cycle_graph(2), random_potential(rng, cycle_graph(2), 2, *roof_range)),
            FiberPotential.of(random_potential(rng, cycle_graph(2), 2)),
        ),
    ]
    k = 0
    while len(cases) < size:
        n = int(rng.integers(2, 5))
        g = random_graph(rng, n, density=float(rng.uniform(0.4, 0.8)))
        roof = random_potential(rng, g, int(rng.integers(1, 3)), *roof_range)
        terms = [(0, random_potential(rng, g, int(rng.integers(1, 3)), -0.5, 0.5))]
        if rng.random() < 0.4:
            terms.append((1, random_potential(rng, g, 1, -0.25, 0.25)))
        cases.append(BatteryCase(f"random-{k}", SuspensionFlow(g, roof), FiberPotential(tuple(terms))))
        k += 1
    return cases
