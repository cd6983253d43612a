"""Thermodynamic formalism for suspension flows over shifts of finite type.

Pressure, equilibrium states and measures of maximal entropy for symbolic
flows, with synchronizing time changes, shadowing and closing, the
mixing/constant-suspension dichotomy and finite-to-one factor codes.
"""

from . import config, errors
from .factors import BlockCode, check_finite_to_one, pressure_preservation
from .potentials import Potential, is_cohomologous_to_constant, max_mean_cycle, max_ratio_cycle
from .shift import Sft, SymbolicPoint
from .suspension import (
    FiberPotential,
    FlowMeasure,
    FlowPoint,
    SuspensionFlow,
    flow_equilibrium,
    flow_evaluate,
    flow_mme,
    flow_pressure,
)
from .thermo import MarkovMeasure, entropy, equilibrium_measure, pressure
from .timechange import TimeChangeSpec, is_hyperbolic, synchronize, verify_synchronization
from .topo_dyn import ConstantSuspension, Mixing, PseudoOrbit, close_periodic, shadow, suspension_dichotomy

__all__ = [
    "BlockCode",
    "ConstantSuspension",
    "FiberPotential",
    "FlowMeasure",
    "FlowPoint",
    "MarkovMeasure",
    "Mixing",
    "Potential",
    "PseudoOrbit",
    "Sft",
    "SuspensionFlow",
    "SymbolicPoint",
    "TimeChangeSpec",
    "check_finite_to_one",
    "close_periodic",
    "config",
    "entropy",
    "equilibrium_measure",
    "errors",
    "flow_equilibrium",
    "flow_evaluate",
    "flow_mme",
    "flow_pressure",
    "is_cohomologous_to_constant",
    "is_hyperbolic",
    "max_mean_cycle",
    "max_ratio_cycle",
    "pressure",
    "pressure_preservation",
    "shadow",
    "suspension_dichotomy",
    "synchronize",
    "verify_synchronization",
]

__version__ = "0.1.0"
