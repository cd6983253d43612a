"""Command-line front end.

Each command reads model files, runs one operation and writes one artifact
(CSV or JSON) to ``--output_path`` or standard output.  Exit status is 0 on
success, 1 on a validation, parse or precondition error and 2 when a
numerical tolerance is breached.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config
from .errors import NotFiniteToOne, ThermoflowError, ValidationError
from .formats import (
    dump_flow,
    dump_point,
    parse_code,
    parse_fiber_potential,
    parse_model,
    parse_potential,
    parse_pseudo_orbit,
)
from .factors import check_finite_to_one, pressure_preservation
from .potentials import Potential, scale
from .shift import Sft, admissible_words, compact
from .suspension import FiberPotential, FlowPoint, SuspensionFlow, flow_mme, flow_pressure
from .thermo import curve_csv, equilibrium_measure, format_number, pressure, pressure_curve
from .timechange import is_hyperbolic, synchronize, verify_synchronization
from .topo_dyn import (
    ConstantSuspension,
    PseudoOrbit,
    close_periodic,
    expansivity_certificate,
    shadow,
    suspension_dichotomy,
)

COMMANDS = (
    "pressure",
    "equilibrium",
    "flow-pressure",
    "mme",
    "synchronize",
    "verify-b",
    "hyperbolic",
    "phase-curve",
    "shadow",
    "close",
    "dichotomy",
    "factor-check",
)


@dataclass
class RunConfig:
    command: str
    model_path: str
    potential_path: str | None = None
    q: float = 1.0
    t_horizon: float = 1.0
    epsilon: float = 0.1
    q_min: float = 0.0
    q_max: float = 2.0
    steps: int = 41
    max_len: int = 6
    output_path: str | None = None
    code_path: str | None = None
    orbit_path: str | None = None
    tolerance_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        for name in ("q", "q_min", "q_max"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be a finite real number")
        if not self.t_horizon > 0:
            raise ValidationError("t_horizon must be positive")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if self.steps < 2:
            raise ValidationError("steps must be at least 2")
        if self.max_len < 1:
            raise ValidationError("max_len must be at least 1")
        for name in ("model_path", "potential_path", "code_path", "orbit_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"{name} {path!r} does not exist")


# -- helpers ------------------------------------------------------------------


def _num(x) -> float:
    """A float rounded to the 12 significant digits used in all output."""
    return float(format_number(x))


def _report_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in rows:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            value = format_number(value)
        writer.writerow([key, value])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _word_key(word) -> str:
    return "cylinder[" + " ".join(map(str, word)) + "]"


def _shift_of(model) -> Sft:
    return model.base if isinstance(model, SuspensionFlow) else model


def _flow_of(model) -> SuspensionFlow:
    if not isinstance(model, SuspensionFlow):
        raise ValidationError("this command needs a flow model (a shift with a roof)")
    return model


def _base_potential(cfg: RunConfig, g: Sft) -> Potential:
    if cfg.potential_path is None:
        return Potential.constant(g, 0.0)
    return parse_potential(cfg.potential_path, g)


def _fiber_potential(cfg: RunConfig, g: Sft) -> FiberPotential:
    if cfg.potential_path is None:
        return FiberPotential.constant(g, 0.0)
    return parse_fiber_potential(cfg.potential_path, g)


def _scaled(f: FiberPotential, g: Sft, q: float) -> FiberPotential:
    return FiberPotential(tuple((d, scale(g, p, q)) for d, p in f.terms))


def _cylinder_rows(measure, g: Sft, max_len: int):
    return [(_word_key(w), measure.cylinder(w)) for n in range(1, max_len + 1) for w in admissible_words(g, n)]


def _require(path, name):
    if path is None:
        raise ValidationError(f"this command needs --{name}")
    return path


# -- commands -----------------------------------------------------------------


def _cmd_pressure(cfg, model):
    g = _shift_of(model)
    return format_number(pressure(g, scale(g, _base_potential(cfg, g), cfg.q))) + "\n"


def _cmd_equilibrium(cfg, model):
    g = _shift_of(model)
    f = scale(g, _base_potential(cfg, g), cfg.q)
    nu = equilibrium_measure(g, f)
    return _report_csv([("pressure", pressure(g, f))] + _cylinder_rows(nu, g, cfg.max_len))


def _cmd_flow_pressure(cfg, model):
    flow = _flow_of(model)
    f = _scaled(_fiber_potential(cfg, flow.base), flow.base, cfg.q)
    return format_number(flow_pressure(flow, f)) + "\n"


def _cmd_mme(cfg, model):
    flow = _flow_of(model)
    h, mu = flow_mme(flow)
    rows = [("entropy", h), ("mean_roof", mu.roof_integral)]
    return _report_csv(rows + _cylinder_rows(mu.base_measure, flow.base, cfg.max_len))


def _cmd_synchronize(cfg, model):
    flow = _flow_of(model)
    _, synced = synchronize(flow, _fiber_potential(cfg, flow.base), cfg.t_horizon)
    out = dump_flow(synced)
    out["roof"]["table"] = {k: _num(v) for k, v in out["roof"]["table"].items()}
    return _json(out)


def _cmd_verify_b(cfg, model):
    flow = _flow_of(model)
    report = verify_synchronization(flow, _fiber_potential(cfg, flow.base), cfg.t_horizon, cfg.max_len)
    rows = list(report.as_dict().items()) + [(f"check_{k}", v) for k, v in report.checks.items()]
    rows.append(("passed", report.passed))
    return _report_csv(rows), (0 if report.passed else 2)


def _cmd_hyperbolic(cfg, model):
    flow = _flow_of(model)
    verdict, info = is_hyperbolic(flow, _fiber_potential(cfg, flow.base))
    return _report_csv(
        [
            ("hyperbolic", verdict),
            ("pressure", info["pressure"]),
            ("max_average", info["max_average"]),
            ("gap", info["pressure"] - info["max_average"]),
            ("equilibrium_entropy", info["equilibrium_entropy"]),
            ("witness_cycle", " ".join(map(str, info["witness_cycle"]))),
        ]
    )


def _cmd_phase_curve(cfg, model):
    grid = np.linspace(cfg.q_min, cfg.q_max, cfg.steps)
    if isinstance(model, SuspensionFlow):
        f = _fiber_potential(cfg, model.base)
        rows = [(float(q), flow_pressure(model, _scaled(f, model.base, float(q)))) for q in grid]
    else:
        rows = pressure_curve(model, _base_potential(cfg, model), grid)
    return curve_csv(rows)


def _cmd_shadow(cfg, model):
    flow = _flow_of(model)
    entries, periodic = parse_pseudo_orbit(_require(cfg.orbit_path, "orbit_path"), flow)
    delta = expansivity_certificate(flow, cfg.epsilon)
    po = PseudoOrbit(entries, delta, 0.0, periodic, flow)
    cert = shadow(flow, po, cfg.epsilon)
    point = dump_point(FlowPoint(compact(cert.traced_point.base_point), cert.traced_point.fiber))
    point["fiber"] = _num(point["fiber"])
    return _json(
        {
            "traced_point": point,
            "reparam_breakpoints": [[_num(s), _num(r)] for s, r in cert.reparam_breakpoints],
            "max_distance": _num(cert.max_distance),
            "epsilon": _num(cert.epsilon),
            "delta": _num(delta),
            "metric": cert.metric,
        }
    )


def _cmd_close(cfg, model):
    flow = _flow_of(model)
    entries, _ = parse_pseudo_orbit(_require(cfg.orbit_path, "orbit_path"), flow)
    if len(entries) != 1:
        raise ValidationError("close expects a single (point, duration) entry")
    p, t = entries[0]
    y, ell = close_periodic(flow, p, t, cfg.epsilon)
    point = dump_point(y)
    point["fiber"] = _num(point["fiber"])
    return _json({"periodic_point": point, "period": _num(ell), "requested": _num(t)})


def _cmd_dichotomy(cfg, model):
    result = suspension_dichotomy(_flow_of(model))
    if isinstance(result, ConstantSuspension):
        return _report_csv([("class", "ConstantSuspension"), ("c", result.c)])
    return _report_csv([("class", "Mixing")])


def _cmd_factor_check(cfg, model):
    source = _shift_of(model)
    code = parse_code(_require(cfg.code_path, "code_path"), source)
    ok, degree = check_finite_to_one(code)
    if not ok:
        raise NotFiniteToOne("the code has a diamond, so it is not finite-to-one")
    rows = [("finite_to_one", True), ("degree", "" if degree is None else degree)]
    if isinstance(model, SuspensionFlow):
        f = _fiber_potential(cfg, code.target)
        report = pressure_preservation(code, model, f, cfg.max_len)
        rows += [
            ("pressure_source", report.pressure_source),
            ("pressure_target", report.pressure_target),
            ("pressure_gap", report.pressure_gap),
            ("max_cylinder_discrepancy", report.max_cylinder_discrepancy),
            ("passed", report.passed),
        ]
        return _report_csv(rows), (0 if report.passed else 2)
    return _report_csv(rows)


HANDLERS = {
    "pressure": _cmd_pressure,
    "equilibrium": _cmd_equilibrium,
    "flow-pressure": _cmd_flow_pressure,
    "mme": _cmd_mme,
    "synchronize": _cmd_synchronize,
    "verify-b": _cmd_verify_b,
    "hyperbolic": _cmd_hyperbolic,
    "phase-curve": _cmd_phase_curve,
    "shadow": _cmd_shadow,
    "close": _cmd_close,
    "dichotomy": _cmd_dichotomy,
    "factor-check": _cmd_factor_check,
}


def run(cfg: RunConfig) -> tuple[str, int]:
    """Execute ``cfg`` and return ``(artifact text, exit status)``.

    Library errors propagate; :func:`main` maps them to exit codes.
    """
    tol = config.Tolerances.from_env().updated(cfg.tolerance_overrides)
    saved = config.get()
    config.set_tolerances(tol)
    try:
        model = parse_model(cfg.model_path)
        out = HANDLERS[cfg.command](cfg, model)
    finally:
        config.set_tolerances(saved)
    return out if isinstance(out, tuple) else (out, 0)


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as ``ValidationError`` with exit status 1."""

    def error(self, message):
        raise ValidationError(message)


def _tolerance(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermoflow", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--model_path", required=True, help="shift or flow model (JSON)")
    parser.add_argument("--potential_path", help="potential (base commands) or fiber potential (flow commands)")
    parser.add_argument("--q", type=float, default=1.0, help="multiplier applied to the potential")
    parser.add_argument("--t_horizon", type=float, default=1.0, help="synchronization horizon")
    parser.add_argument("--epsilon", type=float, default=0.1, help="tracing and closing accuracy")
    parser.add_argument("--q_min", type=float, default=0.0)
    parser.add_argument("--q_max", type=float, default=2.0)
    parser.add_argument("--steps", type=int, default=41, help="grid points of phase-curve")
    parser.add_argument("--max_len", type=int, default=6, help="longest cylinder reported or compared")
    parser.add_argument("--output_path", help="write the artifact here instead of stdout")
    parser.add_argument("--code_path", help="block code (factor-check)")
    parser.add_argument("--orbit_path", help="pseudo-orbit (shadow) or orbit segment (close)")
    parser.add_argument(
        "--tolerance_overrides",
        type=_tolerance,
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one tolerance; repeatable",
    )
    return parser


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = vars(ns)
    values["tolerance_overrides"] = dict(values["tolerance_overrides"])
    return RunConfig(**values)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        text, status = run(cfg)
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            sys.stdout.write(text)
        return status
    except ThermoflowError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: ValidationError: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
