"""Approval-based budget division: rules, axioms, and manipulation analysis."""

from .concave import ConcaveProgram, ConcaveSolution, SolverError, maximize_concave
from .constructions import Construction, FamilyId, construct, family_ratio, parse_family
from .core import (
    Candidate,
    Distribution,
    Profile,
    ProfileFormatError,
    Rat,
    parse_profile,
    read_profile_file,
    utility,
    utility_vector,
    write_profile,
    write_profile_file,
)
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpResult, lp_solve
from .manipulation import (
    ManipulationReport,
    VoterResponse,
    best_response,
    enumerate_deviations,
    profile_incentive_ratio,
)
from .axioms import (
    AxiomVerdict,
    check_afs,
    check_efficiency,
    check_gfs,
    check_positive_share,
    verify_nash_removal_bounds,
    verify_nash_separation,
)
from .rules import (
    EGAL,
    FUT,
    MP,
    NASH,
    FutState,
    RuleSpec,
    fut_rounds,
    parse_rule_spec,
    solve,
    solve_egal,
    solve_fut,
    solve_mix,
    solve_mp,
    solve_nash,
    solve_scwm,
)
from .sampling import SamplerConfig, SamplerError, sample
from .experiment import ExperimentConfig, run_experiment

__version__ = "0.1.0"
