"""Gait deviation indices: FGDI/sFGDI, MAP, and the GDI, GPS/GVS and OA references.

All indices measure a subject's departure from the healthy members of the
scored cohort.  FGDI works in a principal-component score space (univariate
or multivariate); GDI projects stacked curves onto a fixed 15-feature basis;
GPS compares raw trajectories; OA standardizes and projects onto
healthy-only principal components.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ArgumentError, DataError, DegenerateError
from .fpca import FpcaModel, fit_univariate_fpca, rmse
from .gaitdata import Cohort, VariableId, VariableSet, select_variables
from .mfpca import fit_mfpca, stack_scores

#: Substituted for a zero distance before the log (keeps ranking semantics
#: finite; the affected subjects carry a flag).
EPS_DISTANCE = 1e-12

ZERO_DISTANCE_FLAG = "zero_distance_clamp"

#: Points per variable of the published GDI feature basis.
GDI_GRID_POINTS = 51
GDI_NUM_FEATURES = 15


def healthy_zscore(values: np.ndarray, healthy_mask: np.ndarray) -> np.ndarray:
    """Z-score against the healthy subjects (sample sd, N_H - 1 denominator)."""
    values = np.asarray(values, dtype=float)
    healthy_mask = np.asarray(healthy_mask, dtype=bool)
    if healthy_mask.sum() < 2:
        raise ArgumentError("need at least 2 healthy subjects for index scaling")
    ref = values[healthy_mask]
    sd = float(ref.std(ddof=1))
    if sd == 0.0:
        raise DegenerateError("healthy reference values are identical; z-score undefined")
    return (values - float(ref.mean())) / sd


def score_distance_index(matrix: np.ndarray, healthy_mask: np.ndarray) -> tuple:
    """Log Euclidean distance of each score row to the healthy column means.

    Returns ``(values, clamped)`` where ``clamped`` marks subjects whose
    distance was exactly zero and replaced by ``EPS_DISTANCE``.
    """
    matrix = np.asarray(matrix, dtype=float)
    healthy_mask = np.asarray(healthy_mask, dtype=bool)
    if matrix.ndim != 2:
        raise ArgumentError("scores must be an N x P matrix")
    if matrix.shape[0] != healthy_mask.shape[0]:
        raise ArgumentError("healthy_mask length must match the score rows")
    if not healthy_mask.any():
        raise ArgumentError("need at least one healthy subject")
    healthy_means = matrix[healthy_mask].mean(axis=0)
    distances = np.sqrt(np.sum((matrix - healthy_means) ** 2, axis=1))
    clamped = distances == 0.0
    distances = np.where(clamped, EPS_DISTANCE, distances)
    return np.log(distances), clamped


def fgdi_against_reference(scores: np.ndarray, reference_mean: np.ndarray) -> tuple:
    """Log distance of score rows to a stored healthy score mean.

    Same computation as ``score_distance_index`` but with the reference
    point supplied, so a fitted model can score subjects outside the
    cohort it was fitted on.  Returns ``(values, clamped)``.
    """
    scores = np.asarray(scores, dtype=float)
    reference_mean = np.asarray(reference_mean, dtype=float)
    if scores.ndim != 2 or scores.shape[1] != reference_mean.shape[0]:
        raise ArgumentError("scores must be N x P with P matching the reference mean")
    distances = np.sqrt(np.sum((scores - reference_mean) ** 2, axis=1))
    clamped = distances == 0.0
    distances = np.where(clamped, EPS_DISTANCE, distances)
    return np.log(distances), clamped


def fgdi(scores: np.ndarray, healthy_mask: np.ndarray) -> np.ndarray:
    """Functional gait deviation index from a score matrix (raw, unscaled)."""
    values, _ = score_distance_index(scores, healthy_mask)
    return values


def sfgdi(fgdi_values: np.ndarray, healthy_mask: np.ndarray) -> np.ndarray:
    """Scaled FGDI: z-score of the raw index against the healthy subjects."""
    return healthy_zscore(fgdi_values, healthy_mask)


def map_profile(cohort: Cohort, variable_set: Optional[VariableSet] = None,
                omega: float = 0.99, smoothing: str = "none") -> dict:
    """Movement Analysis Profile: per-variable sFGDI for every subject.

    Runs the joint-specific path (univariate FPCA only) per variable.
    Returns a mapping variable -> length-N vector in cohort subject order.
    """
    variable_set = variable_set or VariableSet.combined15()
    healthy = cohort.healthy_mask
    profile = {}
    for var in variable_set:
        model = fit_univariate_fpca(cohort.matrix(var), cohort.grid,
                                    omega=omega, smoothing=smoothing, variable=var)
        profile[var] = sfgdi(fgdi(model.scores, healthy), healthy)
    return profile


def gvs_gps(cohort: Cohort, variable_set: VariableSet) -> tuple:
    """Gait Variable Scores and the Gait Profile Score over a variable set.

    GVS is the RMS pointwise difference from the healthy mean trajectory;
    GPS is the RMS of the GVS values across the set's members (15 for the
    combined set, 9 for one leg).
    """
    healthy = cohort.healthy_mask
    if not healthy.any():
        raise ArgumentError("need at least one healthy subject")
    gvs = {}
    for var in variable_set:
        curves = cohort.matrix(var)
        healthy_mean = curves[healthy].mean(axis=0)
        gvs[var] = np.sqrt(np.mean((curves - healthy_mean) ** 2, axis=1))
    stacked = np.stack([gvs[var] for var in variable_set])
    gps = np.sqrt(np.mean(stacked**2, axis=0))
    return gvs, gps


# -- GDI --------------------------------------------------------------------


@dataclass(frozen=True)
class GdiFeatureBasis:
    """Orthonormal gait feature basis for the GDI (one side, stacked curves)."""

    matrix: np.ndarray          # (M, n_features), M = 9 * points_per_variable
    source_tag: str             # "published_supplement" | "surrogate_svd"
    points_per_variable: int = GDI_GRID_POINTS

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != 9 * self.points_per_variable:
            raise DataError(
                f"basis must have {9 * self.points_per_variable} rows "
                f"(9 variables x {self.points_per_variable} points), got {m.shape}"
            )
        gram = m.T @ m
        if np.max(np.abs(gram - np.eye(m.shape[1]))) > 1e-6:
            raise DataError("basis columns are not orthonormal (within 1e-6)")
        object.__setattr__(self, "matrix", m)

    @property
    def num_features(self) -> int:
        return self.matrix.shape[1]


def load_gdi_basis(path) -> GdiFeatureBasis:
    """Read the published feature matrix: plain CSV, 459 rows x 15 columns, no header."""
    rows = []
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DataError(f"{path}:{row_no}: non-numeric cell in basis file") from None
    matrix = np.asarray(rows, dtype=float)
    return GdiFeatureBasis(matrix=matrix, source_tag="published_supplement")


def _stacked_side_vectors(cohort: Cohort, side: str) -> np.ndarray:
    members = VariableSet.leg9(side)
    return np.hstack([cohort.matrix(var) for var in members])  # (N, 9*T)


def surrogate_gdi_basis(cohort: Cohort, side: str,
                        num_features: int = GDI_NUM_FEATURES) -> GdiFeatureBasis:
    """Fallback basis: SVD of the healthy subjects' stacked side vectors.

    Used when the published supplement matrix is not available; results
    computed against it are tagged ``surrogate_svd``.
    """
    if cohort.grid.num_points != GDI_GRID_POINTS:
        raise ArgumentError(
            f"GDI basis lives on {GDI_GRID_POINTS} points; resample the cohort first"
        )
    healthy = cohort.healthy_mask
    if not healthy.any():
        raise ArgumentError("need at least one healthy subject for a surrogate basis")
    gait_matrix = _stacked_side_vectors(cohort, side)[healthy].T  # (M, N_H)
    u, _, _ = np.linalg.svd(gait_matrix, full_matrices=False)
    k = min(num_features, u.shape[1])
    if k < num_features:
        warnings.warn(
            f"only {k} healthy subjects available; surrogate basis keeps {k} features"
        )
    return GdiFeatureBasis(matrix=u[:, :k], source_tag="surrogate_svd")


def gdi(cohort: Cohort, side: str, basis: GdiFeatureBasis) -> tuple:
    """Gait Deviation Index for one side: raw log-distance and the 100/10 scale.

    Returns ``(gdi, sgdi)``; sGDI is 100 - 10 * z against healthy subjects,
    so pathology pushes it below 100.
    """
    if cohort.grid.num_points != basis.points_per_variable:
        raise ArgumentError(
            f"cohort grid has {cohort.grid.num_points} points, basis expects "
            f"{basis.points_per_variable}; resample first"
        )
    values, _, sgdi_values = _gdi_full(cohort, side, basis)
    return values, sgdi_values


def _gdi_full(cohort: Cohort, side: str, basis: GdiFeatureBasis) -> tuple:
    features = _stacked_side_vectors(cohort, side) @ basis.matrix  # (N, k)
    values, clamped = score_distance_index(features, cohort.healthy_mask)
    sgdi_values = 100.0 - 10.0 * healthy_zscore(values, cohort.healthy_mask)
    return values, clamped, sgdi_values


# -- Overall Abnormality ------------------------------------------------------


@dataclass
class OaFeatures:
    """PCA feature space built from healthy subjects only (Kaiser rule)."""

    variable_set: VariableSet
    mu: np.ndarray              # (M,), healthy column means
    sigma: np.ndarray           # (M,), healthy column sds (zero -> 1)
    components: np.ndarray      # (K, M), orthonormal rows
    eigenvalues: np.ndarray     # (K,), all >= 1
    num_points: int

    def rescale(self, cohort: Cohort) -> np.ndarray:
        stacked = np.hstack([cohort.matrix(var) for var in self.variable_set])
        return (stacked - self.mu) / self.sigma

    def project(self, cohort: Cohort) -> np.ndarray:
        return self.rescale(cohort) @ self.components.T


def fit_oa_features(cohort: Cohort, variable_set: VariableSet) -> OaFeatures:
    """Standardize the healthy gait matrix and keep components with eigenvalue >= 1."""
    healthy = cohort.healthy_mask
    if healthy.sum() < 2:
        raise ArgumentError("need at least 2 healthy subjects for the OA feature space")
    stacked = np.hstack([cohort.matrix(var) for var in variable_set])
    g = stacked[healthy]
    mu = g.mean(axis=0)
    sigma = g.std(axis=0, ddof=1)
    zero_var = sigma == 0.0
    if zero_var.any():
        warnings.warn(f"{int(zero_var.sum())} constant columns in the healthy gait matrix; "
                      "their scale is set to 1")
        sigma = np.where(zero_var, 1.0, sigma)
    g_tilde = (g - mu) / sigma
    _, svals, vt = np.linalg.svd(g_tilde, full_matrices=False)
    eigenvalues = svals**2 / (g.shape[0] - 1)
    keep = eigenvalues >= 1.0
    if not keep.any():
        raise DegenerateError("no principal component reaches eigenvalue 1")
    components = vt[keep]
    # deterministic sign: largest-|entry| coordinate positive
    for k in range(components.shape[0]):
        peak = np.argmax(np.abs(components[k]))
        if components[k, peak] < 0:
            components[k] *= -1.0
    return OaFeatures(
        variable_set=variable_set,
        mu=mu,
        sigma=sigma,
        components=components,
        eigenvalues=eigenvalues[keep],
        num_points=cohort.grid.num_points,
    )


def oa(cohort: Cohort, variable_set: VariableSet) -> np.ndarray:
    """Overall Abnormality: mean absolute standardized deviation of projections."""
    features = fit_oa_features(cohort, variable_set)
    projections = features.project(cohort)
    healthy = cohort.healthy_mask
    center = projections[healthy].mean(axis=0)
    spread = projections[healthy].std(axis=0, ddof=1)
    spread = np.where(spread == 0.0, 1.0, spread)
    return np.mean(np.abs((projections - center) / spread), axis=1)


# -- approximation error -----------------------------------------------------


def approximation_error(cohort: Cohort, models: Mapping[VariableId, FpcaModel],
                        path: str = "fgdi") -> tuple:
    """Reconstruction RMSE per subject (mean over variables) and per variable.

    ``path='fgdi'`` rebuilds each curve from all retained univariate
    components; ``path='oa'`` round-trips through the healthy-only OA
    feature projection (standardize, project, invert, unscale).
    """
    if path not in ("fgdi", "oa"):
        raise ArgumentError(f"path must be 'fgdi' or 'oa', got {path!r}")
    variables = [v for v in models]
    per_variable = {}
    if path == "fgdi":
        for var in variables:
            model = models[var]
            curves = cohort.matrix(var)
            scores = model.transform(curves)
            approx = model.mean + scores @ model.eigenfunctions
            per_variable[var] = np.sqrt(np.mean((curves - approx) ** 2, axis=1))
    else:
        vset = VariableSet(mode="custom", members=tuple(variables))
        features = fit_oa_features(cohort, vset)
        rescaled = features.rescale(cohort)
        projected = rescaled @ features.components.T
        approx = (projected @ features.components) * features.sigma + features.mu
        t = cohort.grid.num_points
        for j, var in enumerate(variables):
            observed = cohort.matrix(var)
            block = approx[:, j * t:(j + 1) * t]
            per_variable[var] = np.sqrt(np.mean((observed - block) ** 2, axis=1))
    per_subject = np.mean(np.stack([per_variable[v] for v in variables]), axis=0)
    return per_subject, per_variable


def minmax_rescale(values: np.ndarray) -> np.ndarray:
    """Rescale severity values to [0, 1]: (x - min) / (max - min)."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateError("cannot rescale a constant vector to [0, 1]")
    return (values - lo) / (hi - lo)


# -- stability of the index vs component count -------------------------------


@dataclass
class StabilityRow:
    label: str
    k_opt: int
    deltas: dict   # j -> 100 * mean(FGDI_opt - FGDI_{k_opt + j}), None if skipped


def _fgdi_at_truncation(matrix_full: np.ndarray, healthy_mask: np.ndarray, k: int) -> np.ndarray:
    return fgdi(matrix_full[:, :k], healthy_mask)


def _stability_from_spectrum(matrix_full: np.ndarray, pve: np.ndarray,
                             healthy_mask: np.ndarray, omega: float,
                             deltas: Sequence[int], label: str) -> StabilityRow:
    available = matrix_full.shape[1]
    k_opt = min(int(np.searchsorted(pve, omega) + 1), available)
    reference = _fgdi_at_truncation(matrix_full, healthy_mask, k_opt)
    out = {}
    for j in deltas:
        k = k_opt + j
        if not 1 <= k <= available:
            warnings.warn(f"{label}: K={k} out of range 1..{available}, skipped")
            out[j] = None
            continue
        out[j] = float(100.0 * np.mean(reference - _fgdi_at_truncation(matrix_full, healthy_mask, k)))
    return StabilityRow(label=label, k_opt=k_opt, deltas=out)


def stability_analysis(cohort: Cohort, mode: str, deltas: Sequence[int],
                       omega: float = 0.99, pelvis_side: str = "L",
                       smoothing: str = "none") -> list:
    """How the FGDI shifts when the truncation moves by each offset in ``deltas``.

    ``mode='per_joint'`` varies the univariate component count per variable
    (one row per variable); the multivariate modes vary the second-stage
    truncation with the univariate step fixed at ``omega`` (a single row).
    """
    deltas = list(deltas)
    healthy = cohort.healthy_mask
    if mode == "per_joint":
        rows = []
        for var in VariableSet.combined15(pelvis_side):
            full = fit_univariate_fpca(cohort.matrix(var), cohort.grid,
                                       omega=1.0, smoothing=smoothing, variable=var)
            rows.append(_stability_from_spectrum(full.scores, full.pve, healthy,
                                                 omega, deltas, var.label))
        return rows
    if mode == "combined":
        variable_set = VariableSet.combined15(pelvis_side)
    elif mode in ("left", "right"):
        variable_set = VariableSet.leg9("L" if mode == "left" else "R")
    else:
        raise ArgumentError(f"unknown mode {mode!r}")
    models = [fit_univariate_fpca(cohort.matrix(var), cohort.grid,
                                  omega=omega, smoothing=smoothing, variable=var)
              for var in variable_set]
    multi = fit_mfpca(stack_scores(models), omega=1.0)
    return [_stability_from_spectrum(multi.mscores, multi.pve, healthy, omega, deltas, mode)]


# -- report -------------------------------------------------------------------


@dataclass
class IndexReport:
    """Per-subject index values for one scoring mode, cohort order preserved."""

    mode: str
    subject_ids: tuple
    healthy: np.ndarray
    fgdi: Optional[np.ndarray] = None                  # None in per_joint mode
    sfgdi: Optional[np.ndarray] = None
    map_profile: dict = field(default_factory=dict)    # VariableId -> (N,)
    gvs: Optional[dict] = None                          # VariableId -> (N,)
    gps: Optional[np.ndarray] = None
    gdi: Optional[np.ndarray] = None
    sgdi: Optional[np.ndarray] = None
    oa: Optional[np.ndarray] = None
    gdi_source: Optional[str] = None
    flags: tuple = ()                                   # per-subject tuple of strings
    metadata: tuple = ()                                # per-subject clinical dicts

    def subject_index(self, subject_id: str) -> int:
        try:
            return self.subject_ids.index(subject_id)
        except ValueError:
            raise ArgumentError(f"unknown subject_id {subject_id!r}") from None

    def to_dict(self) -> dict:
        payload = {
            "mode": self.mode,
            "subject_ids": list(self.subject_ids),
            "healthy": [bool(h) for h in self.healthy],
            "map_profile": {var.key: vals.tolist() for var, vals in self.map_profile.items()},
            "flags": [list(f) for f in self.flags] or [[] for _ in self.subject_ids],
            "metadata": [dict(m) for m in self.metadata] or [{} for _ in self.subject_ids],
        }
        if self.gvs is not None:
            payload["gvs"] = {var.key: vals.tolist() for var, vals in self.gvs.items()}
        for name in ("fgdi", "sfgdi", "gps", "gdi", "sgdi", "oa"):
            value = getattr(self, name)
            if value is not None:
                payload[name] = value.tolist()
        if self.gdi_source is not None:
            payload["gdi_source"] = self.gdi_source
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "IndexReport":
        def arr(name):
            return np.asarray(payload[name], dtype=float) if name in payload else None

        return cls(
            mode=payload["mode"],
            subject_ids=tuple(payload["subject_ids"]),
            healthy=np.asarray(payload["healthy"], dtype=bool),
            fgdi=arr("fgdi"),
            sfgdi=arr("sfgdi"),
            map_profile={VariableId.from_key(k): np.asarray(v, dtype=float)
                         for k, v in payload.get("map_profile", {}).items()},
            gvs={VariableId.from_key(k): np.asarray(v, dtype=float)
                 for k, v in payload["gvs"].items()} if "gvs" in payload else None,
            gps=arr("gps"),
            gdi=arr("gdi"),
            sgdi=arr("sgdi"),
            oa=arr("oa"),
            gdi_source=payload.get("gdi_source"),
            flags=tuple(tuple(f) for f in payload.get("flags", [])),
            metadata=tuple(payload.get("metadata", [])),
        )

    def to_csv(self, path) -> None:
        """Flat CSV: one row per subject, MAP/GVS expanded into columns."""
        map_vars = list(self.map_profile)
        gvs_vars = list(self.gvs) if self.gvs is not None else []
        index_cols = [name for name in ("fgdi", "sfgdi", "gdi", "sgdi", "gps", "oa")
                      if getattr(self, name) is not None]
        header = ["subject_id", "healthy"] + index_cols
        header += [f"map_{v.key}" for v in map_vars]
        header += [f"gvs_{v.key}" for v in gvs_vars]
        header.append("flags")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i, sid in enumerate(self.subject_ids):
                row = [sid, "1" if self.healthy[i] else "0"]
                row += [repr(float(getattr(self, name)[i])) for name in index_cols]
                row += [repr(float(self.map_profile[v][i])) for v in map_vars]
                row += [repr(float(self.gvs[v][i])) for v in gvs_vars]
                row.append(";".join(self.flags[i]) if i < len(self.flags) else "")
                writer.writerow(row)
