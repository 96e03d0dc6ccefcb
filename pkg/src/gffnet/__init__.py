"""Learning weighted networks from samples of a massive Gaussian free field."""

from .baseline import (
    BaselineConfig,
    canonical_U,
    estimate_sigma_bmt,
    improvised_U,
    invert_baseline,
    psi_n,
    tau_bound,
)
from .errors import DegenerateCharFn, GFFError, IllConditionedPlugin, ModelDegenerateError, ParameterError
from .estimator import (
    CharFnEstimate,
    LogModulusStat,
    SymmetricMatrixEstimate,
    estimate_Leta,
    estimate_precision,
    oracle_Leta,
    phi_n,
    recover_support,
    s_n,
)
from .gff import GFFModel, SampleSet, c_eta, c_star, covariance, exact_Leta, exact_phi, sample_field
from .graph import WeightedGraph, laplacian, sample_erdos_renyi
from .metrics import ErrorReport, bound_phi_tail, bound_sigma_error, error_report, fit_rate_slope

__version__ = "0.1.0"
