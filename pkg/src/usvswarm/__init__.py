"""Two-level simulation of unmanned surface vessels surrounding a target.

The upper level computes collective velocity commands (Cartesian
surrounding and polar equal-surrounding protocols, with an optional
consensus estimator of the target). The lower level turns those commands
into surge/heading references and regulates an identified waterjet hull
model with backstepping or PI/PD laws.
"""
from .dynamics import ActuatorCommand, DynamicsParams, NumericalBlowUp, VesselState
from .engine import OutcomeReport, Scenario, TargetSpec, TraceRecord, detect_outcomes, ideal_mode_run, run
from .geometry import convex_hull, hull_distance
from .protocols import SwarmConfig
from .regulation import RegGains
from .scenario_io import load_preset, scenario_from_dict

__all__ = [
    "ActuatorCommand", "DynamicsParams", "NumericalBlowUp", "VesselState",
    "OutcomeReport", "Scenario", "TargetSpec", "TraceRecord", "detect_outcomes",
    "ideal_mode_run", "run", "convex_hull", "hull_distance", "SwarmConfig", "RegGains",
    "load_preset", "scenario_from_dict",
]
__version__ = "0.1.0"
