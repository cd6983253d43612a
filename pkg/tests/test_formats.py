import json
from pathlib import Path

import pytest

from thermoflow.errors import InadmissibleWord, InvalidCode, NonpositiveRoof, ParseError, ValidationError
from thermoflow.factors import check_finite_to_one
from thermoflow.formats import (
    dump_fiber_potential,
    dump_flow,
    dump_point,
    dump_potential,
    dump_shift,
    parse_code,
    parse_fiber_potential,
    parse_flow,
    parse_model,
    parse_point,
    parse_potential,
    parse_pseudo_orbit,
    parse_shift,
)
from thermoflow.models import golden_flow, golden_mean, phase_toy
from thermoflow.potentials import Potential
from thermoflow.shift import SymbolicPoint
from thermoflow.suspension import FiberPotential, FlowPoint, SuspensionFlow

MODELS = Path(__file__).resolve().parent.parent / "models"


def test_golden_mean_file():
    g = parse_model(MODELS / "golden_mean.json")
    assert len(g.states) == 2 and len(g.edges) == 3
    assert g == golden_mean()


def test_flow_files():
    flow = parse_model(MODELS / "golden_mean_12_flow.json")
    assert isinstance(flow, SuspensionFlow) and flow == golden_flow()
    assert parse_flow(MODELS / "golden_mean_12_flow.json") == flow
    with pytest.raises(ParseError, match="roof"):
        parse_flow(MODELS / "golden_mean.json")


def test_zero_roof_is_rejected():
    text = '{"states": [0, 1], "edges": [[0, 0], [0, 1], [1, 0]], "roof": {"window": 1, "table": {"0": 1.0, "1": 0.0}}}'
    with pytest.raises(NonpositiveRoof) as info:
        parse_model(text)
    assert isinstance(info.value, ValidationError)


def test_unknown_field_names_field_and_line():
    text = '{\n  "states": [0, 1],\n  "edges": [[0, 1], [1, 0]],\n  "colour": "red"\n}'
    with pytest.raises(ParseError) as info:
        parse_shift(text)
    assert "'colour'" in str(info.value) and "line 4" in str(info.value)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("{not json", "line 1"),
        ('{"states": [0, 1]}', "missing field 'edges'"),
        ('{"states": "ab", "edges": []}', "'states'"),
        ('{"states": [0], "edges": [[0]]}', "'edges'"),
    ],
)
def test_malformed_shift(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_shift(text)


def test_invariant_failures_are_validation_errors():
    with pytest.raises(ValidationError):
        parse_shift('{"states": [0, 1], "edges": [[0, 0], [1, 0]]}')


def test_potential_round_trip():
    g, f = phase_toy()
    assert parse_potential(MODELS / "phase_toy_potential.json", g) == f
    assert parse_potential(json.dumps(dump_potential(f)), g) == f
    with pytest.raises(ParseError, match="unknown state 'z'"):
        parse_potential('{"window": 1, "table": {"z": 1.0}}', g)
    with pytest.raises(ParseError, match="not a number"):
        parse_potential('{"window": 1, "table": {"n": "x"}}', g)
    with pytest.raises(ParseError, match="'window'"):
        parse_potential('{"window": 0, "table": {}}', g)


def test_fiber_potential_forms():
    g = golden_mean()
    plain = parse_fiber_potential(MODELS / "golden_mean_potential.json", g)
    assert plain.terms[0][0] == 0 and plain.terms[0][1] == Potential.from_symbols(g, [0.0, -1.0])
    f = FiberPotential(((0, Potential.from_symbols(g, [0.5, 1.0])), (2, Potential.constant(g, -1.0))))
    back = parse_fiber_potential(json.dumps(dump_fiber_potential(f)), g)
    assert [d for d, _ in back.terms] == [0, 2]
    assert all(a == b for (_, a), (_, b) in zip(back.terms, f.terms))
    with pytest.raises(ParseError, match="'degree'"):
        parse_fiber_potential('[{"degree": -1, "potential": {"window": 1, "table": {"0": 1, "1": 1}}}]', g)


def test_flow_round_trip():
    flow = golden_flow()
    assert parse_flow(json.dumps(dump_flow(flow))) == flow
    assert parse_shift(json.dumps(dump_shift(flow.base))) == flow.base


def test_code_files():
    g = parse_shift(MODELS / "full2.json")
    xor = parse_code(MODELS / "xor_code.json", g)
    assert check_finite_to_one(xor) == (True, 2)
    collapse = parse_code(MODELS / "collapse_code.json", g)
    assert check_finite_to_one(collapse) == (False, None)
    with pytest.raises(InvalidCode):
        parse_code('{"window": 1, "map": {"0": 0}}', g)
    with pytest.raises(ParseError, match="'extra'"):
        parse_code('{"window": 1, "map": {"0": 0, "1": 1}, "extra": 1}', g)


def test_points_and_orbits():
    flow = golden_flow()
    p = FlowPoint(SymbolicPoint((0, 1), (0,), (0, 0, 1), 1), 0.5)
    assert parse_point(json.dumps(dump_point(p)), flow) == p
    with pytest.raises(InadmissibleWord):
        parse_point('{"past": [1], "future": [1]}', flow)
    with pytest.raises(ValidationError, match="fiber"):
        parse_point('{"past": [0], "future": [0], "fiber": 3.0}', flow)
    entries, periodic = parse_pseudo_orbit(MODELS / "golden_pseudo_orbit.json", parse_flow(MODELS / "golden_mean_flow.json"))
    assert periodic and len(entries) == 1 and entries[0][1] == 20.0
    entries, periodic = parse_pseudo_orbit(MODELS / "golden_orbit.json", flow)
    assert not periodic and entries[0][0].fiber == 0.25 and entries[0][1] == 2.98
    with pytest.raises(ParseError, match="'duration'"):
        parse_pseudo_orbit('[{"point": {"past": [0], "future": [0]}, "duration": 0}]', flow)


def test_missing_file():
    with pytest.raises(ParseError, match="cannot read"):
        parse_model(MODELS / "nope.json")
