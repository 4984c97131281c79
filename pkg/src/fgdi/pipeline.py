"""Fitted index pipelines: per-variable FPCA, optional MFPCA, healthy references.

A pipeline is fitted once on a cohort and can then score that cohort (or a
new one on the same grid) in any fitted mode.  Scoring projects curves onto
the stored eigenfunctions and scales indices with the healthy statistics
recorded at fit time, so repeated scoring is deterministic.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ArgumentError, DegenerateError
from .fpca import FpcaModel, fit_univariate_fpca, model_from_dict, model_to_dict
from .gaitdata import Cohort, GridSpec, VariableId, VariableSet, resample
from .indices import (
    GDI_GRID_POINTS,
    ZERO_DISTANCE_FLAG,
    GdiFeatureBasis,
    IndexReport,
    _gdi_full,
    fgdi_against_reference,
    gvs_gps,
    oa,
    surrogate_gdi_basis,
)
from .mfpca import MfpcaModel, fit_mfpca, mfpca_from_dict, mfpca_to_dict, stack_scores

MODES = ("combined", "left", "right", "per_joint")

PIPELINE_FORMAT = "fgdi-pipeline"
PIPELINE_VERSION = 1


@dataclass
class ScoreReference:
    """Healthy-cohort statistics needed to index new score rows."""

    healthy_score_mean: np.ndarray
    fgdi_mean: float
    fgdi_sd: float

    def index(self, scores: np.ndarray) -> tuple:
        """(fgdi, sfgdi, clamped) for a score matrix against this reference."""
        values, clamped = fgdi_against_reference(scores, self.healthy_score_mean)
        return values, (values - self.fgdi_mean) / self.fgdi_sd, clamped

    def to_dict(self) -> dict:
        return {
            "healthy_score_mean": self.healthy_score_mean.tolist(),
            "fgdi_mean": self.fgdi_mean,
            "fgdi_sd": self.fgdi_sd,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ScoreReference":
        return cls(
            healthy_score_mean=np.asarray(payload["healthy_score_mean"], dtype=float),
            fgdi_mean=float(payload["fgdi_mean"]),
            fgdi_sd=float(payload["fgdi_sd"]),
        )


def _build_reference(scores: np.ndarray, healthy_mask: np.ndarray) -> ScoreReference:
    healthy_mean = scores[healthy_mask].mean(axis=0)
    values, _ = fgdi_against_reference(scores, healthy_mean)
    ref = values[healthy_mask]
    sd = float(ref.std(ddof=1))
    if sd == 0.0:
        raise DegenerateError("healthy FGDI values are identical; scaling undefined")
    return ScoreReference(healthy_score_mean=healthy_mean,
                          fgdi_mean=float(ref.mean()), fgdi_sd=sd)


@dataclass
class ModeFit:
    """One fitted scoring mode: variable set, component models, references."""

    mode: str
    variable_set: VariableSet
    models: tuple                       # FpcaModel per variable, set order
    mfpca: Optional[MfpcaModel]         # None in per_joint mode
    multi_reference: Optional[ScoreReference]
    uni_references: dict                # VariableId -> ScoreReference (MAP scaling)

    def model_for(self, variable: VariableId) -> FpcaModel:
        for m in self.models:
            if m.variable == variable:
                return m
        raise ArgumentError(f"variable {variable.key} not in mode {self.mode!r}")


@dataclass
class PipelineModel:
    grid: GridSpec
    omega: float
    pelvis_side: str
    smoothing: str
    subject_ids: tuple
    healthy: np.ndarray
    modes: dict                         # name -> ModeFit

    def mode(self, name: str) -> ModeFit:
        if name not in self.modes:
            raise ArgumentError(f"mode {name!r} not fitted; have {sorted(self.modes)}")
        return self.modes[name]

    def component_counts(self) -> dict:
        counts = {}
        for name, fit in self.modes.items():
            entry = {"K_u": {m.variable.key: m.num_components for m in fit.models}}
            entry["K_plus"] = int(sum(m.num_components for m in fit.models))
            entry["W"] = fit.mfpca.num_components if fit.mfpca is not None else None
            counts[name] = entry
        return counts


def _variable_set_for(mode: str, pelvis_side: str) -> VariableSet:
    if mode in ("combined", "per_joint"):
        return VariableSet.combined15(pelvis_side)
    if mode == "left":
        return VariableSet.leg9("L")
    if mode == "right":
        return VariableSet.leg9("R")
    raise ArgumentError(f"unknown mode {mode!r}; expected one of {MODES}")


def fit_pipeline(cohort: Cohort, omega: float = 0.99,
                 modes: Sequence[str] = ("combined",),
                 pelvis_side: str = "L", smoothing: str = "none") -> PipelineModel:
    """Fit the requested scoring modes on one cohort.

    Univariate fits are shared across modes that select the same variable.
    Requires at least 2 healthy subjects (index scaling needs them).
    """
    modes = list(modes)
    if not modes:
        raise ArgumentError("no modes requested")
    for m in modes:
        if m not in MODES:
            raise ArgumentError(f"unknown mode {m!r}; expected one of {MODES}")
    if cohort.n_healthy < 2:
        raise ArgumentError(
            f"need at least 2 healthy subjects, cohort has {cohort.n_healthy}"
        )
    healthy = cohort.healthy_mask

    cache: dict = {}

    def univariate(var: VariableId) -> FpcaModel:
        if var not in cache:
            cache[var] = fit_univariate_fpca(cohort.matrix(var), cohort.grid,
                                             omega=omega, smoothing=smoothing,
                                             variable=var)
        return cache[var]

    fitted = {}
    for mode in dict.fromkeys(modes):  # keep order, drop duplicates
        vset = _variable_set_for(mode, pelvis_side)
        models = tuple(univariate(var) for var in vset)
        uni_refs = {m.variable: _build_reference(m.scores, healthy) for m in models}
        if mode == "per_joint":
            fitted[mode] = ModeFit(mode=mode, variable_set=vset, models=models,
                                   mfpca=None, multi_reference=None,
                                   uni_references=uni_refs)
            continue
        multi = fit_mfpca(stack_scores(models), omega=omega)
        fitted[mode] = ModeFit(mode=mode, variable_set=vset, models=models,
                               mfpca=multi,
                               multi_reference=_build_reference(multi.mscores, healthy),
                               uni_references=uni_refs)
    return PipelineModel(
        grid=cohort.grid,
        omega=omega,
        pelvis_side=pelvis_side,
        smoothing=smoothing,
        subject_ids=cohort.subject_ids,
        healthy=healthy,
        modes=fitted,
    )


def mode_scores(fit: ModeFit, cohort: Cohort) -> np.ndarray:
    """Source score matrix of a cohort under a fitted mode (multi modes only)."""
    if fit.mfpca is None:
        raise ArgumentError("per_joint mode has no multivariate scores")
    blocks = [m.transform(cohort.matrix(m.variable)) for m in fit.models]
    return fit.mfpca.transform(np.hstack(blocks))


def score_report(pipeline: PipelineModel, mode: str, cohort: Cohort,
                 indices: Sequence[str] = ("fgdi",),
                 gdi_basis: Optional[GdiFeatureBasis] = None) -> IndexReport:
    """Score a cohort under one fitted mode and assemble the index report.

    ``indices`` may add ``gps``, ``oa`` and (left/right modes only) ``gdi``.
    GDI is evaluated on a 51-point resample of the cohort; when no basis is
    supplied a surrogate SVD basis is computed from the cohort's healthy
    subjects and the report is tagged accordingly.
    """
    indices = list(indices)
    for name in indices:
        if name not in ("fgdi", "gdi", "gps", "oa"):
            raise ArgumentError(f"unknown index {name!r}")
    if cohort.grid != pipeline.grid:
        raise ArgumentError(
            f"cohort grid has {cohort.grid.num_points} points, pipeline was fitted "
            f"on {pipeline.grid.num_points}; resample first"
        )
    fit = pipeline.mode(mode)
    n = cohort.n_subjects
    flags = [[] for _ in range(n)]

    fgdi_values = sfgdi_values = None
    if fit.mfpca is not None:
        scores = mode_scores(fit, cohort)
        fgdi_values, sfgdi_values, clamped = fit.multi_reference.index(scores)
        for i in np.flatnonzero(clamped):
            flags[i].append(ZERO_DISTANCE_FLAG)

    profile = {}
    for model in fit.models:
        var = model.variable
        uni_scores = model.transform(cohort.matrix(var))
        _, svals, clamped = fit.uni_references[var].index(uni_scores)
        profile[var] = svals
        for i in np.flatnonzero(clamped):
            flags[i].append(f"{ZERO_DISTANCE_FLAG}:{var.key}")

    gvs = gps = None
    if "gps" in indices:
        gvs, gps = gvs_gps(cohort, fit.variable_set)

    oa_values = oa(cohort, fit.variable_set) if "oa" in indices else None

    gdi_values = sgdi_values = gdi_source = None
    if "gdi" in indices:
        if mode not in ("left", "right"):
            warnings.warn(f"GDI is a per-leg index; ignored in mode {mode!r}")
        else:
            side = "L" if mode == "left" else "R"
            cohort51 = (cohort if cohort.grid.num_points == GDI_GRID_POINTS
                        else resample(cohort, GDI_GRID_POINTS))
            basis = gdi_basis or surrogate_gdi_basis(cohort51, side)
            gdi_values, gdi_clamped, sgdi_values = _gdi_full(cohort51, side, basis)
            gdi_source = basis.source_tag
            for i in np.flatnonzero(gdi_clamped):
                flags[i].append(f"{ZERO_DISTANCE_FLAG}:gdi")

    return IndexReport(
        mode=mode,
        subject_ids=cohort.subject_ids,
        healthy=cohort.healthy_mask,
        fgdi=fgdi_values,
        sfgdi=sfgdi_values,
        map_profile=profile,
        gvs=gvs,
        gps=gps,
        gdi=gdi_values,
        sgdi=sgdi_values,
        oa=oa_values,
        gdi_source=gdi_source,
        flags=tuple(tuple(f) for f in flags),
        metadata=tuple(dict(s.metadata) for s in cohort.subjects),
    )


# -- serialization ------------------------------------------------------------


def pipeline_to_dict(pipeline: PipelineModel) -> dict:
    modes = {}
    for name, fit in pipeline.modes.items():
        modes[name] = {
            "variable_set_mode": fit.variable_set.mode,
            "variables": [v.key for v in fit.variable_set],
            "fpca": [model_to_dict(m) for m in fit.models],
            "mfpca": mfpca_to_dict(fit.mfpca) if fit.mfpca is not None else None,
            "multi_reference": (fit.multi_reference.to_dict()
                                if fit.multi_reference is not None else None),
            "uni_references": {var.key: ref.to_dict()
                               for var, ref in fit.uni_references.items()},
        }
    return {
        "format": PIPELINE_FORMAT,
        "version": PIPELINE_VERSION,
        "grid": {"num_points": pipeline.grid.num_points},
        "omega": pipeline.omega,
        "pelvis_side": pipeline.pelvis_side,
        "smoothing": pipeline.smoothing,
        "subject_ids": list(pipeline.subject_ids),
        "healthy": [bool(h) for h in pipeline.healthy],
        "modes": modes,
    }


def pipeline_from_dict(payload: dict) -> PipelineModel:
    if payload.get("format") != PIPELINE_FORMAT:
        raise ArgumentError("not a pipeline model document")
    modes = {}
    for name, entry in payload["modes"].items():
        members = tuple(VariableId.from_key(k) for k in entry["variables"])
        vset = VariableSet(mode=entry["variable_set_mode"], members=members)
        models = tuple(model_from_dict(m) for m in entry["fpca"])
        modes[name] = ModeFit(
            mode=name,
            variable_set=vset,
            models=models,
            mfpca=mfpca_from_dict(entry["mfpca"]) if entry["mfpca"] else None,
            multi_reference=(ScoreReference.from_dict(entry["multi_reference"])
                             if entry["multi_reference"] else None),
            uni_references={VariableId.from_key(k): ScoreReference.from_dict(v)
                            for k, v in entry["uni_references"].items()},
        )
    return PipelineModel(
        grid=GridSpec(payload["grid"]["num_points"]),
        omega=float(payload["omega"]),
        pelvis_side=payload["pelvis_side"],
        smoothing=payload["smoothing"],
        subject_ids=tuple(payload["subject_ids"]),
        healthy=np.asarray(payload["healthy"], dtype=bool),
        modes=modes,
    )


def save_pipeline(pipeline: PipelineModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(pipeline_to_dict(pipeline), fh)
        fh.write("\n")


def load_pipeline(path) -> PipelineModel:
    with open(path) as fh:
        return pipeline_from_dict(json.load(fh))
