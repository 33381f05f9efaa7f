"""Instance generators, incidence and joints counting, and experiment drivers."""

from .ensembles import curve_ensemble, fit_loglog, well_conditioned
from .experiments import ExperimentError, ExperimentReport, fit_power_law, run_experiment
from .incidence import IncidenceGraph, IncidenceInstance, count_incidences, curve_membership, gen_incidence, kst_free
from .joints import Joint, JointsInstance, JointsResult, find_joints, gen_joints, line_curve, rigid_motion

__all__ = [
    "curve_ensemble", "fit_loglog", "well_conditioned",
    "ExperimentError", "ExperimentReport", "fit_power_law", "run_experiment",
    "IncidenceGraph", "IncidenceInstance", "count_incidences", "curve_membership", "gen_incidence", "kst_free",
    "Joint", "JointsInstance", "JointsResult", "find_joints", "gen_joints", "line_curve", "rigid_motion",
]
