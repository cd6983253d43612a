"""Numerical tolerances, kept in one record.

The defaults may be overridden through the ``THERMOFLOW_TOL`` environment
variable, either as a JSON object or as ``key=value`` pairs separated by
commas, e.g. ``THERMOFLOW_TOL="bowen=1e-12,cylinder=1e-7"``.
"""

import contextlib
import dataclasses
import json
import os

from .errors import ValidationError


@dataclasses.dataclass(frozen=True)
class Tolerances:
    #: Perron eigen-data residual and stochasticity checks
    eigen: float = 1e-12
    #: absolute accuracy of the Bowen root
    bowen_root: float = 1e-11
    #: bound on |P(base, Δf - cR)| at the Bowen root
    bowen: float = 1e-9
    #: bisection width for max_ratio_cycle
    ratio: float = 1e-10
    #: cycle-sum tests (cohomology to a constant)
    cohomology: float = 1e-10
    #: strict gap used when deciding hyperbolicity
    hyperbolic: float = 1e-10
    #: two spectral radii closer than this are treated as tied
    tie: float = 1e-10
    #: root finding inside a fiber segment
    segment_root: float = 1e-12
    #: breakpoint comparisons in exact segment arithmetic
    breakpoint: float = 1e-13
    #: |h_top - 1| for the synchronized flow
    synchronized_entropy: float = 1e-8
    #: cylinder-measure agreement
    cylinder: float = 1e-6
    #: density identity for time-changed measures
    density: float = 1e-8
    #: variational identity at the flow level
    variational: float = 1e-9
    #: largest block length a recoding may reach
    max_block: int = 12

    @classmethod
    def from_env(cls, environ=None):
        environ = os.environ if environ is None else environ
        raw = environ.get("THERMOFLOW_TOL", "").strip()
        if not raw:
            return cls()
        return cls().updated(parse_overrides(raw))

    def updated(self, overrides):
        known = {f.name: f.type for f in dataclasses.fields(self)}
        values = {}
        for key, value in overrides.items():
            if key not in known:
                raise ValidationError(f"unknown tolerance {key!r}")
            try:
                values[key] = int(value) if key == "max_block" else float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"tolerance {key!r} has a non-numeric value {value!r}") from None
        return dataclasses.replace(self, **values)


def parse_overrides(raw):
    raw = raw.strip()
    if raw.startswith("{"):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"THERMOFLOW_TOL is not valid JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ValidationError("THERMOFLOW_TOL must be a JSON object")
        return data
    out = {}
    for item in filter(None, (p.strip() for p in raw.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"THERMOFLOW_TOL entry {item!r} is not key=value")
        out[key.strip()] = value.strip()
    return out


TOL = None


def get():
    """The active tolerances, read from the environment on first use."""
    global TOL
    if TOL is None:
        TOL = Tolerances.from_env()
    return TOL


@contextlib.contextmanager
def override(**values):
    """Temporarily replace some tolerances."""
    global TOL
    saved = get()
    TOL = saved.updated(values)
    try:
        yield TOL
    finally:
        TOL = saved


def set_tolerances(tol):
    global TOL
    TOL = tol
