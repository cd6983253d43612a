import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import PHI
from thermoflow.errors import NonpositiveRoof, NotIrreducible, ValidationError
from thermoflow.models import battery, constant_flow, golden_flow, golden_mean, random_graph, random_potential
from thermoflow.potentials import Potential, combine
from thermoflow.shift import Sft, SymbolicPoint, admissible_words, random_point, shift_point
from thermoflow.suspension import (
    FiberPotential,
    FlowPoint,
    Piece,
    PiecewisePotential,
    SuspensionFlow,
    check_flow_point,
    delta,
    flow_entropy,
    flow_equilibrium,
    flow_evaluate,
    flow_integral,
    flow_mme,
    flow_pressure,
    lift_measure,
    orbit_integral,
    piece_integral,
    piece_minimum,
    project_measure,
)
from thermoflow.thermo import entropy, equilibrium_measure, point_mass_on_cycle, pressure, random_markov_measure

LOG2 = math.log(2)
CASES = battery()


def golden_mme_root():
    def log_radius(c):
        m = np.array([[math.exp(-c), math.exp(-c)], [math.exp(-2 * c), 0.0]])
        return math.log(max(abs(np.linalg.eigvals(m))))

    return brentq(log_radius, 0.01, 2.0, xtol=1e-15)


def test_roof_must_be_positive(gm):
    with pytest.raises(NonpositiveRoof):
        SuspensionFlow(gm, Potential.from_symbols(gm, [1.0, 0.0]))


def test_flow_point_fiber_range():
    flow = golden_flow()
    check_flow_point(flow, FlowPoint(SymbolicPoint.periodic((0, 1), 1), 1.5))
    with pytest.raises(ValidationError):
        check_flow_point(flow, FlowPoint(SymbolicPoint.periodic((0, 1)), 1.0))


def test_flow_evaluate_examples(full2):
    flow = constant_flow(full2)
    x = SymbolicPoint((0,), (0, 1, 1, 0), (1,))
    p = FlowPoint(x, 0.0)
    assert flow_evaluate(flow, p, 0) is p
    q = flow_evaluate(flow, p, 2.5)
    assert q.base_point == shift_point(x, 2) and q.fiber == pytest.approx(0.5)
    g = golden_flow()
    start = FlowPoint(SymbolicPoint.periodic((0, 1)), 0)
    end = flow_evaluate(g, start, 3)
    assert end.base_point == shift_point(start.base_point, 2) and end.fiber == 0


@given(st.integers(0, 10_000), st.fractions(-20, 20, max_denominator=16), st.fractions(-20, 20, max_denominator=16))
def test_flow_cocycle_is_exact(seed, t1, t2):
    g = golden_mean()
    flow = SuspensionFlow(g, Potential.from_symbols(g, [Fraction(1), Fraction(5, 3)]))
    x = random_point(g, np.random.default_rng(seed))
    p = FlowPoint(x, Fraction(1, 7) if x[0] == 0 else Fraction(4, 3))
    lhs = flow_evaluate(flow, p, t1 + t2)
    rhs = flow_evaluate(flow, flow_evaluate(flow, p, t1), t2)
    assert lhs.fiber == rhs.fiber
    assert lhs.base_point.word(-15, 31) == rhs.base_point.word(-15, 31)


def test_long_times_skip_periods():
    flow = golden_flow()
    p = FlowPoint(SymbolicPoint.periodic((0, 1)), 0)
    q = flow_evaluate(flow, p, 3 * 10**6 + 1)
    assert q.base_point[0] == 1 and q.fiber == 0


def test_delta_examples(gm, full2):
    flow = golden_flow()
    assert delta(flow, FiberPotential.constant(gm, 2.0)).table == {(0,): 2.0, (1,): 4.0}
    unit = constant_flow(full2)
    assert set(delta(unit, FiberPotential.of(Potential.constant(full2, 1.0), 1)).values()) == {0.5}
    d = delta(flow, FiberPotential.of(Potential.from_symbols(gm, [0.0, -1.0])))
    assert d.table == {(0,): 0.0, (1,): -2.0}


def test_delta_matches_quadrature_for_callable_pieces(gm):
    flow = golden_flow()
    table = {
        (0,): (Piece(0.0, 1.0, np.cos),),
        (1,): (Piece(0.0, 0.5, np.exp), Piece(0.5, 2.0, lambda s: s**3)),
    }
    d = delta(flow, PiecewisePotential(1, table))
    assert d((0,)) == pytest.approx(math.sin(1.0), abs=1e-12)
    assert d((1,)) == pytest.approx(math.exp(0.5) - 1 + (16 - 0.0625) / 4, abs=1e-12)


def test_piece_helpers():
    from numpy.polynomial import Polynomial

    p = Piece(0.0, 2.0, Polynomial([1.0, -3.0, 1.0]))
    assert piece_integral(p) == pytest.approx(2 - 6 + 8 / 3)
    assert piece_minimum(p) == pytest.approx(1 - 4.5 + 2.25)


def test_flow_pressure_examples(gm, full2):
    zero = FiberPotential.constant(full2, 0.0)
    assert flow_pressure(constant_flow(full2), zero) == pytest.approx(LOG2, abs=1e-11)
    assert flow_pressure(constant_flow(full2, 2.0), zero) == pytest.approx(LOG2 / 2, abs=1e-11)
    f = FiberPotential.of(Potential.from_symbols(gm, [0.0, -1.0]))
    expected = math.log((1 + math.sqrt(1 + 4 * math.exp(-1))) / 2)
    assert flow_pressure(constant_flow(gm), f) == pytest.approx(expected, abs=1e-11)


def test_flow_pressure_needs_irreducible_base():
    g = Sft(["a", "b"], [("a", "a"), ("b", "b")])
    with pytest.raises(NotIrreducible):
        flow_pressure(constant_flow(g), FiberPotential.constant(g, 0.0))


def test_flow_mme_examples(gm, full2):
    h, mu = flow_mme(constant_flow(full2))
    assert h == pytest.approx(LOG2) and mu.base_measure.stationary == pytest.approx([0.5, 0.5])
    h, mu = flow_mme(constant_flow(full2, 2.0))
    assert h == pytest.approx(LOG2 / 2) and mu.base_measure.transition == pytest.approx(0.5)
    h, _ = flow_mme(golden_flow())
    assert h == pytest.approx(golden_mme_root(), abs=1e-11)
    # e^{−h} solves x³ + x − 1 = 0 ... equivalently x + x³ = 1 for x = e^{−h}
    x = math.exp(-h)
    assert x + x**3 == pytest.approx(1.0, abs=1e-11)


def test_flow_mme_against_orbit_counting():
    """Periodic points with roof sum <= T grow like e^{hT}."""
    flow = golden_flow()
    g = flow.base

    def count(t):
        total = 0
        n = 1
        while n <= t:
            for w in admissible_words(g, n):
                if g.is_edge(w[-1], w[0]) and sum(flow.roof((s,)) for s in w) <= t:
                    total += 1
            n += 1
        return total

    h, _ = flow_mme(flow)
    estimate = math.log(count(14) / count(12)) / 2
    assert estimate == pytest.approx(h, rel=0.05)


def test_lift_and_project(gm):
    flow = golden_flow()
    parry = equilibrium_measure(gm, Potential.constant(gm, 0.0))
    mu = lift_measure(flow, parry)
    assert mu.roof_integral == pytest.approx(1 + parry.stationary[1], abs=1e-12)
    assert mu.roof_integral == pytest.approx(1.2763932, abs=1e-7)
    assert project_measure(flow, mu) is parry
    assert lift_measure(flow, project_measure(flow, mu)).roof_integral == mu.roof_integral
    assert lift_measure(flow, point_mass_on_cycle(gm, (0,))).roof_integral == pytest.approx(1.0)
    assert lift_measure(constant_flow(gm, 3.0), parry).roof_integral == pytest.approx(3.0)


def test_flow_entropy_and_integral_examples(gm, full2):
    bern = equilibrium_measure(full2, Potential.constant(full2, 0.0))
    assert flow_entropy(constant_flow(full2), lift_measure(constant_flow(full2), bern)) == pytest.approx(LOG2)
    assert flow_entropy(constant_flow(full2, 2.0), lift_measure(constant_flow(full2, 2.0), bern)) == pytest.approx(LOG2 / 2)
    parry = equilibrium_measure(gm, Potential.constant(gm, 0.0))
    flow = golden_flow()
    assert flow_entropy(flow, lift_measure(flow, parry)) == pytest.approx(math.log(PHI) / (1 + parry.stationary[1]))
    unit = constant_flow(gm)
    mu = lift_measure(unit, parry)
    assert flow_integral(unit, mu, FiberPotential.constant(gm, 1.3)) == pytest.approx(1.3)
    f = FiberPotential.of(Potential.from_symbols(gm, [0.0, -1.0]))
    assert flow_integral(unit, mu, f) == pytest.approx(-parry.stationary[1])


def test_flow_equilibrium_examples(gm, full2):
    mu = flow_equilibrium(constant_flow(full2), FiberPotential.constant(full2, 0.0))
    assert mu.base_measure.stationary == pytest.approx([0.5, 0.5])
    parry = equilibrium_measure(gm, Potential.constant(gm, 0.0))
    for c in (0.0, 2.5):
        mu = flow_equilibrium(constant_flow(gm), FiberPotential.constant(gm, c))
        assert mu.base_measure.transition == pytest.approx(parry.transition, abs=1e-10)


def test_orbit_integral_of_unit_function():
    flow = golden_flow()
    p = FlowPoint(SymbolicPoint.periodic((0, 1)), 0.25)
    one = FiberPotential.constant(flow.base, 1.0)
    assert orbit_integral(flow, one, p, 7.3) == pytest.approx(7.3)
    assert orbit_integral(flow, one, p, -2.2) == pytest.approx(-2.2)
    s = FiberPotential.of(Potential.constant(flow.base, 1.0), 1)
    # ∫ s ds over fiber [0.25, 1) then the full fiber [0, 2) of symbol 1
    assert orbit_integral(flow, s, p, 2.75) == pytest.approx((1 - 0.0625) / 2 + 2.0)


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_bowen_and_variational_identities(case):
    flow, f = case.flow, case.f
    c = flow_pressure(flow, f)
    g = flow.base
    residual = pressure(g, combine(g, lambda a, r: float(a) - c * float(r), delta(flow, f), flow.roof))
    assert abs(residual) <= 1e-9
    mu = flow_equilibrium(flow, f)
    assert abs(flow_entropy(flow, mu) + flow_integral(flow, mu, f) - c) <= 1e-9


@given(st.integers(0, 10_000))
def test_abramov_identity(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(1, 5)))
    flow = SuspensionFlow(g, random_potential(rng, g, int(rng.integers(1, 3)), 0.5, 2.0))
    nu = random_markov_measure(g, rng, int(rng.integers(1, 3)))
    mu = lift_measure(flow, nu)
    assert flow_entropy(flow, mu) * mu.roof_integral == pytest.approx(entropy(nu), abs=1e-10)


@given(st.integers(0, 10_000))
def test_bowen_map_strictly_decreasing(seed):
    case = CASES[seed % len(CASES)]
    flow, f = case.flow, case.f
    g = flow.base
    d = delta(flow, f)
    cs = np.linspace(-2, 2, 9)
    vals = [pressure(g, combine(g, lambda a, r: float(a) - c * float(r), d, flow.roof)) for c in cs]
    rmin = float(flow.roof_min)
    assert all(b - a < -(rmin * (cs[1] - cs[0]) - 1e-12) for a, b in zip(vals, vals[1:]))
