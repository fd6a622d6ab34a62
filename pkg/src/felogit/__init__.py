"""Conditional maximum likelihood for the fixed-effects binary logit.

Standard solvers happily return finite numbers on panels where the
conditional likelihood has no maximizer. This package decides, before
estimating, whether a finite unique estimate exists (a rank probe plus a
quadratic-programming separation test on attribute-difference vectors) and
only then runs the Newton fit. A pooled cross-sectional separation check
and a simulation experiment are included, along with the ``felogit`` CLI.
"""

__version__ = "0.1.0"

from ._kernels import active_backend
from .altsets import (
    DEFAULT_ENUMERATION_GUARD,
    AlternativeSet,
    DifferenceVector,
    alternative_set,
    denominator_dp,
    difference_vectors,
    enumerate_alternatives,
    log_denominator_dp,
)
from .datasets import cli_report_schema_path, separated_panel_path
from .detector import (
    STATUS_EXISTS,
    STATUS_RANK_DEFICIENT,
    STATUS_SEPARATED,
    ExistenceReport,
    QpProblem,
    RankCheckResult,
    detect_panel_separation,
    detect_pooled_separation,
    qp_problem_from_panel,
    qp_problem_from_pooled,
    rank_check,
)
from .errors import (
    AlternativeSetTooLargeError,
    FelogitError,
    NoInformativeIndividualsError,
    NonexistenceError,
    PanelDataError,
    QpConvergenceError,
)
from .estimator import (
    CmleFit,
    conditional_loglik,
    conditional_score_and_hessian,
    fit,
)
from .panel import IndividualSlice, PanelDataset, informative_subset, load_csv
from .simulate import FrequencyReport, SimConfig, existence_rate, generate_panel

__all__ = [
    "__version__",
    "active_backend",
    "DEFAULT_ENUMERATION_GUARD",
    "AlternativeSet",
    "DifferenceVector",
    "alternative_set",
    "denominator_dp",
    "difference_vectors",
    "enumerate_alternatives",
    "log_denominator_dp",
    "cli_report_schema_path",
    "separated_panel_path",
    "STATUS_EXISTS",
    "STATUS_RANK_DEFICIENT",
    "STATUS_SEPARATED",
    "ExistenceReport",
    "QpProblem",
    "RankCheckResult",
    "detect_panel_separation",
    "detect_pooled_separation",
    "qp_problem_from_panel",
    "qp_problem_from_pooled",
    "rank_check",
    "AlternativeSetTooLargeError",
    "FelogitError",
    "NoInformativeIndividualsError",
    "NonexistenceError",
    "PanelDataError",
    "QpConvergenceError",
    "CmleFit",
    "conditional_loglik",
    "conditional_score_and_hessian",
    "fit",
    "IndividualSlice",
    "PanelDataset",
    "informative_subset",
    "load_csv",
    "FrequencyReport",
    "SimConfig",
    "existence_rate",
    "generate_panel",
]
