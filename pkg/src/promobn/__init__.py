"""Hybrid Bayesian-network engine and forecasting toolkit for promotional sales."""

from importlib import resources

from .distributions import (
    DistTerm,
    LognormalTerm,
    TriangularTerm,
    fit_lognormal_log_moments,
    fit_triangular,
    remove_outliers,
    scale_lognormal,
    tukey_fences,
)
from .dsl import ParseError, parse_network, serialize_network, tokenize
from .errors import (
    EvidenceError,
    InconsistentEvidenceError,
    ModelError,
    UndefinedPosteriorError,
    UnsupportedShapeError,
)
from .inference import (
    Evidence,
    ContinuousEvidence,
    PosteriorReport,
    SampleSet,
    analytic_mixture_mean,
    analytic_state_mean,
    conditional_density,
    discrete_posterior_exact,
    equation_mean_ci,
    forward_sample,
    posterior_given_equation_evidence,
    reweight_equation,
    weight_sensitivity,
)
from .evaluation import (
    AccuracyReport,
    CategoryStats,
    WeeklyRecord,
    accuracy_report,
    category_stats,
    generate_synthetic_records,
    load_sales_csv,
    mape,
    split_categories,
    write_sales_csv,
)
from .network import (
    ChooseTerm,
    EquationExpr,
    Network,
    Node,
    NodeKind,
    Violation,
    resolve_deterministic,
    structurally_equal,
    topological_order,
    validate_network,
)

__version__ = "0.1.0"


def builtin_model_path():
    """Filesystem path of the bundled promotional-sales model."""
    return resources.files("promobn").joinpath("models/fig2.bnet")


def synthetic_data_path():
    """Filesystem path of the bundled 87-week synthetic sales CSV (seed 42)."""
    return resources.files("promobn").joinpath("models/synthetic_sales.csv")


def load_builtin_model() -> Network:
    return parse_network(builtin_model_path().read_text(encoding="utf-8"))
