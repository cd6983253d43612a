import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thermoflow.models import cycle_graph, full_shift, golden_mean, random_graph, random_potential
from thermoflow.shift import Sft, SymbolicPoint, random_cycle, random_point
from thermoflow.suspension import FiberPotential, FlowPoint, SuspensionFlow, flow_evaluate
from thermoflow.topo_dyn import PseudoOrbit, cycle_roof_sum, expansivity_certificate, tracing_window

settings.register_profile(
    "thermoflow", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("thermoflow")

#: one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture
def gm():
    return golden_mean()


@pytest.fixture
def full2():
    return full_shift(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_force_cycles(g: Sft, max_len: int):
    """Closed walks of length <= max_len, as tuples of states (not deduplicated)."""
    out = []
    for n in range(1, max_len + 1):
        for word in itertools.product(g.states, repeat=n):
            if all(g.is_edge(word[i], word[(i + 1) % n]) for i in range(n)):
                out.append(word)
    return out


def random_sft(seed, max_states=7):
    r = np.random.default_rng(seed)
    return random_graph(r, int(r.integers(1, max_states + 1)), density=float(r.uniform(0.3, 0.7)), aperiodic=False)


def perturb(flow, p: FlowPoint, radius: int, fiber_noise: float, rng) -> FlowPoint:
    """A point agreeing with ``p`` on ``|n| <= radius``, random beyond, fiber moved by at most ``fiber_noise``."""
    x = p.base_point
    y = random_point(flow.base, rng, core=x.word(-radius, 2 * radius + 1), core_at=-radius)
    roof = float(flow.roof_at(y))
    s = min(max(p.fiber + rng.uniform(-fiber_noise, fiber_noise), 0.0), roof * (1 - 1e-12))
    return FlowPoint(y, s)


def random_pseudo_orbit(flow, epsilon, rng, n_segments=4, periodic=False):
    """A pseudo-orbit with jumps below the expansivity certificate ``δ(ε)``.

    Segments last 6 to 10 roof maxima, long enough to absorb the jumps.
    """
    delta = expansivity_certificate(flow, epsilon)
    radius = tracing_window(flow, epsilon) + 8
    p = FlowPoint(random_point(flow.base, rng), 0.0)
    p = FlowPoint(p.base_point, float(rng.uniform(0, 1)) * float(flow.roof_at(p.base_point)))
    rmax = float(flow.roof_max)
    entries = []
    for _ in range(n_segments):
        d = float(rng.uniform(6, 10)) * rmax
        entries.append((p, d))
        p = perturb(flow, flow_evaluate(flow, p, d), radius, delta / 4, rng)
    if periodic:
        word = random_cycle(flow.base, rng)
        word = word * (radius // len(word) + 1)
        half = cycle_roof_sum(flow, word)
        first = FlowPoint(SymbolicPoint.periodic(word), 0.0)
        mid = perturb(flow, flow_evaluate(flow, first, half), 3 * len(word), delta / 4, rng)
        entries = [(first, half), (mid, half)]
    return PseudoOrbit(tuple(entries), delta, 0.0, periodic, flow)


def almost_closed(flow, epsilon, rng):
    """``(p, t)`` with the orbit of ``p`` returning ``δ(ε)``-close after time ``t``."""
    delta = expansivity_certificate(flow, epsilon)
    radius = tracing_window(flow, epsilon) + 4
    cycle = random_cycle(flow.base, rng)
    reps = int(rng.integers(1, 4))
    pad = 2 * radius // len(cycle) + 2
    word = cycle * (reps + 2 * pad)
    x = random_point(flow.base, rng, core=word, core_at=-pad * len(cycle))
    s = float(rng.uniform(0, 1)) * float(flow.roof_at(x))
    t = cycle_roof_sum(flow, cycle) * reps + float(rng.uniform(-delta, delta)) / 2
    return FlowPoint(x, s), t, cycle, reps


def random_time_change(seed):
    """``(flow, rate, point, rng)``: a random flow with a positive rate.

    The rate is fiber-constant or affine in the fiber coordinate.
    """
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(1, 4)))
    flow = SuspensionFlow(g, random_potential(rng, g, int(rng.integers(1, 3)), 0.5, 2.0))
    terms = [(0, random_potential(rng, g, int(rng.integers(1, 3)), 0.5, 2.0))]
    if rng.random() < 0.5:
        terms.append((1, random_potential(rng, g, 1, 0.0, 0.4)))
    x = random_point(g, rng)
    p = FlowPoint(x, float(rng.uniform(0, 1)) * float(flow.roof_at(x)))
    return flow, FiberPotential(tuple(terms)), p, rng


__all__ = ["ACCEPTANCE", "PHI", "almost_closed", "brute_force_cycles", "perturb", "random_pseudo_orbit", "random_sft", "random_time_change", "cycle_graph", "full_shift", "golden_mean"]
