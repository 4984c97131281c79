"""Functional gait deviation indices from cycle-normalized kinematics.

Univariate FPCA per kinematic variable, score-based multivariate FPCA
across variables, and the FGDI/sFGDI severity indices, together with the
GDI, GPS/GVS and OA reference indices and the rank statistics used to
compare them.
"""

from .errors import ArgumentError, DataError, DegenerateError, FgdiError, ParseError
from .gaitdata import (
    ALL_VARIABLES,
    Cohort,
    GridSpec,
    KinematicCurve,
    SubjectRecord,
    VariableId,
    VariableSet,
    load_cohort,
    resample,
    save_cohort,
    select_variables,
    synth_cohort,
)
from .fpca import (
    FpcaModel,
    center,
    fit_univariate_fpca,
    mean_rmse,
    quadrature_weights,
    reconstruct,
    rmse,
)
from .mfpca import MfpcaModel, ScoreStack, fit_mfpca, joint_covariance, stack_scores
from .indices import (
    GdiFeatureBasis,
    IndexReport,
    approximation_error,
    fgdi,
    gdi,
    gvs_gps,
    load_gdi_basis,
    map_profile,
    minmax_rescale,
    oa,
    sfgdi,
    stability_analysis,
    surrogate_gdi_basis,
)
from .pipeline import (
    PipelineModel,
    fit_pipeline,
    load_pipeline,
    save_pipeline,
    score_report,
)
from .stats import RankTestResult, kendall_tau, kruskal_wallis, linear_trend, wilcoxon_rank_sum

__version__ = "0.1.0"

__all__ = [
    "ALL_VARIABLES",
    "ArgumentError",
    "Cohort",
    "DataError",
    "DegenerateError",
    "FgdiError",
    "FpcaModel",
    "GdiFeatureBasis",
    "GridSpec",
    "IndexReport",
    "KinematicCurve",
    "MfpcaModel",
    "ParseError",
    "PipelineModel",
    "RankTestResult",
    "ScoreStack",
    "SubjectRecord",
    "VariableId",
    "VariableSet",
    "approximation_error",
    "center",
    "fgdi",
    "fit_mfpca",
    "fit_pipeline",
    "fit_univariate_fpca",
    "gdi",
    "gvs_gps",
    "joint_covariance",
    "kendall_tau",
    "kruskal_wallis",
    "linear_trend",
    "load_cohort",
    "load_gdi_basis",
    "load_pipeline",
    "map_profile",
    "mean_rmse",
    "minmax_rescale",
    "oa",
    "quadrature_weights",
    "reconstruct",
    "resample",
    "rmse",
    "save_cohort",
    "save_pipeline",
    "score_report",
    "select_variables",
    "sfgdi",
    "stability_analysis",
    "stack_scores",
    "surrogate_gdi_basis",
    "synth_cohort",
    "wilcoxon_rank_sum",
]
