"""Univariate functional PCA on a dense common grid.

Curves are treated as functions on the unit-length gait cycle; all inner
products use uniform quadrature weights (1/T each, summing to 1), which
keeps eigenvalues stable across grid resolutions and makes the quadrature
norm coincide with the per-point RMSE, so reconstruction error decays
monotonically in the component count.  The default estimator
eigendecomposes the exact sample covariance on the grid; an optional
penalized mode smooths the covariance surface with a quadratic roughness
penalty (weight chosen by GCV) before the eigendecomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArgumentError, DegenerateError
from .gaitdata import GridSpec, VariableId

SIGN_CONVENTION = "max-abs-positive"

#: Relative cutoff under which eigenvalues are treated as numerically zero.
EIG_ZERO_RTOL = 1e-12


def quadrature_weights(num_points: int) -> np.ndarray:
    """Uniform weights on the unit-length cycle; they sum to 1.

    Equal weighting keeps the inner-product norm identical to the reported
    RMSE (up to the square root of T), so truncated reconstructions can
    only improve as components are added.
    """
    if num_points < 2:
        raise ArgumentError("quadrature needs at least 2 grid points")
    return np.full(num_points, 1.0 / num_points)


def center(curves: np.ndarray) -> tuple:
    """Pointwise mean over all subjects and the centered curve matrix.

    The mean pools healthy subjects and patients; centered rows sum
    pointwise to zero.
    """
    curves = np.asarray(curves, dtype=float)
    if curves.ndim != 2:
        raise ArgumentError("curves must be an N x T matrix")
    if curves.shape[0] < 2:
        raise ArgumentError(f"need at least 2 curves, got {curves.shape[0]}")
    mean = curves.mean(axis=0)
    return mean, curves - mean


@dataclass
class FpcaModel:
    """Fitted univariate FPCA for one kinematic variable.

    Eigenfunctions are orthonormal under the quadrature inner product and
    sign-fixed so each one's largest-magnitude grid value is positive
    (ties broken by earliest grid index).
    """

    grid: GridSpec
    mean: np.ndarray                # (T,)
    eigenfunctions: np.ndarray      # (K, T), rows orthonormal under quadrature
    eigenvalues: np.ndarray         # (K,), descending
    scores: np.ndarray              # (N, K), quadrature inner products
    pve: np.ndarray                 # (K,), cumulative proportion of variance
    omega: float
    noise_variance: float
    estimator: str = "exact"
    variable: Optional[VariableId] = None

    @property
    def num_components(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def n_subjects(self) -> int:
        return self.scores.shape[0]

    def transform(self, curves: np.ndarray) -> np.ndarray:
        """Project (possibly new) curves onto the fitted eigenfunctions."""
        curves = np.asarray(curves, dtype=float)
        if curves.ndim == 1:
            curves = curves[None, :]
        if curves.shape[1] != self.grid.num_points:
            raise ArgumentError(
                f"curves have {curves.shape[1]} points, model grid has {self.grid.num_points}"
            )
        w = quadrature_weights(self.grid.num_points)
        return (curves - self.mean) @ (w[:, None] * self.eigenfunctions.T)


def _apply_sign_convention(eigenfunctions: np.ndarray, scores: np.ndarray) -> None:
    # flip in place so each eigenfunction's largest-|value| sample is positive
    for k in range(eigenfunctions.shape[0]):
        peak = np.argmax(np.abs(eigenfunctions[k]))
        if eigenfunctions[k, peak] < 0:
            eigenfunctions[k] *= -1.0
            scores[:, k] *= -1.0


def _second_difference_penalty(num_points: int) -> np.ndarray:
    d2 = np.zeros((num_points - 2, num_points))
    for i in range(num_points - 2):
        d2[i, i:i + 3] = (1.0, -2.0, 1.0)
    return d2.T @ d2


def _smooth_covariance(cov: np.ndarray) -> tuple:
    """Roughness-penalized covariance surface; GCV picks the penalty weight."""
    num_points = cov.shape[0]
    penalty = _second_difference_penalty(num_points)
    eye = np.eye(num_points)
    best = None
    for alpha in np.logspace(-8.0, 8.0, 33):
        smoother = np.linalg.solve(eye + alpha * penalty, eye)
        fit = smoother @ cov @ smoother.T
        rss = float(np.sum((cov - fit) ** 2))
        denom = 1.0 - (np.trace(smoother) ** 2) / num_points**2
        if denom <= 0:
            continue
        gcv = (rss / num_points**2) / denom**2
        if best is None or gcv < best[0]:
            best = (gcv, alpha, fit)
    if best is None:
        return cov.copy(), 0.0
    _, _, fit = best
    return 0.5 * (fit + fit.T), float(np.mean(np.clip(np.diag(cov) - np.diag(fit), 0.0, None)))


def fit_univariate_fpca(curves: np.ndarray, grid: GridSpec, omega: float = 0.99,
                        smoothing: str = "none",
                        num_components: Optional[int] = None,
                        variable: Optional[VariableId] = None) -> FpcaModel:
    """Fit FPCA to one variable's curves.

    Parameters
    ----------
    curves : ndarray, shape (N, T)
        One curve per subject on ``grid``.
    omega : float in (0, 1]
        Target cumulative proportion of variance explained; the truncation
        is the smallest component count reaching it over the positive
        eigenvalue spectrum.
    smoothing : {'none', 'penalized'}
        Covariance estimator: exact sample covariance, or the penalized
        smoother (see module docstring).
    num_components : int, optional
        Force the truncation instead of using ``omega`` (used by the
        stability analysis); must lie within the positive spectrum.

    Raises
    ------
    DegenerateError
        All curves identical (zero covariance).
    ArgumentError
        ``omega`` outside (0, 1] or invalid arguments.
    """
    if not 0.0 < omega <= 1.0:
        raise ArgumentError(f"omega must be in (0, 1], got {omega}")
    if smoothing not in ("none", "penalized"):
        raise ArgumentError(f"smoothing must be 'none' or 'penalized', got {smoothing!r}")
    curves = np.asarray(curves, dtype=float)
    if curves.ndim != 2 or curves.shape[1] != grid.num_points:
        raise ArgumentError("curves must be N x T with T matching the grid")

    mean, centered = center(curves)
    n = curves.shape[0]
    cov = centered.T @ centered / (n - 1)

    smoothed_sigma2 = None
    if smoothing == "penalized":
        cov, smoothed_sigma2 = _smooth_covariance(cov)

    w = quadrature_weights(grid.num_points)
    sqw = np.sqrt(w)
    sym = sqw[:, None] * cov * sqw[None, :]
    sym = 0.5 * (sym + sym.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    total = float(np.sum(eigvals[eigvals > 0]))
    cutoff = EIG_ZERO_RTOL * max(total, 0.0)
    positive = eigvals > cutoff
    if total <= 0 or not np.any(positive):
        raise DegenerateError("zero covariance: all curves are identical")
    n_positive = int(np.count_nonzero(positive))
    pve_all = np.cumsum(eigvals[:n_positive]) / total

    if num_components is not None:
        if not 1 <= num_components <= n_positive:
            raise ArgumentError(
                f"num_components must be in 1..{n_positive}, got {num_components}"
            )
        k = num_components
    else:
        k = int(np.searchsorted(pve_all, omega) + 1)
        k = min(k, n_positive)

    eigenvalues = eigvals[:k].copy()
    eigenfunctions = (eigvecs[:, :k] / sqw[:, None]).T  # rows integrate to orthonormal
    scores = centered @ (w[:, None] * eigenfunctions.T)
    _apply_sign_convention(eigenfunctions, scores)

    if smoothed_sigma2 is not None:
        noise_variance = smoothed_sigma2
    else:
        noise_variance = float(np.sum(eigvals[k:n_positive]) / grid.num_points)

    return FpcaModel(
        grid=grid,
        mean=mean,
        eigenfunctions=eigenfunctions,
        eigenvalues=eigenvalues,
        scores=scores,
        pve=pve_all[:k].copy(),
        omega=omega,
        noise_variance=max(noise_variance, 0.0),
        estimator="exact" if smoothing == "none" else "penalized",
        variable=variable,
    )


def reconstruct(model: FpcaModel, subject_index: int, num_components: int) -> np.ndarray:
    """Karhunen-Loeve approximation: mean plus the truncated score-weighted sum."""
    if not 0 <= subject_index < model.n_subjects:
        raise ArgumentError(f"subject_index {subject_index} out of range 0..{model.n_subjects - 1}")
    if not 1 <= num_components <= model.num_components:
        raise ArgumentError(
            f"num_components must be in 1..{model.num_components}, got {num_components}"
        )
    coeffs = model.scores[subject_index, :num_components]
    return model.mean + coeffs @ model.eigenfunctions[:num_components]


def rmse(observed: np.ndarray, approx: np.ndarray) -> float:
    """Root mean square error over the grid points."""
    observed = np.asarray(observed, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if observed.shape != approx.shape:
        raise ArgumentError(f"length mismatch: {observed.shape} vs {approx.shape}")
    return float(np.sqrt(np.mean((observed - approx) ** 2)))


def mean_rmse(per_variable_rmse) -> float:
    """Average RMSE across kinematic variables for one subject."""
    values = np.asarray(list(per_variable_rmse), dtype=float)
    if values.size == 0:
        raise ArgumentError("need at least one per-variable RMSE")
    return float(values.mean())


# -- serialization ----------------------------------------------------------


def model_to_dict(model: FpcaModel) -> dict:
    return {
        "variable": model.variable.key if model.variable is not None else None,
        "grid": {"num_points": model.grid.num_points},
        "mean": model.mean.tolist(),
        "eigenfunctions": model.eigenfunctions.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "scores": model.scores.tolist(),
        "pve": model.pve.tolist(),
        "omega": model.omega,
        "noise_variance": model.noise_variance,
        "estimator": model.estimator,
        "sign_convention": SIGN_CONVENTION,
    }


def model_from_dict(payload: dict) -> FpcaModel:
    if payload.get("sign_convention", SIGN_CONVENTION) != SIGN_CONVENTION:
        warnings.warn(
            f"model uses sign convention {payload['sign_convention']!r}; "
            f"this build flips to {SIGN_CONVENTION!r} only when fitting"
        )
    var = payload.get("variable")
    return FpcaModel(
        grid=GridSpec(payload["grid"]["num_points"]),
        mean=np.asarray(payload["mean"], dtype=float),
        eigenfunctions=np.asarray(payload["eigenfunctions"], dtype=float),
        eigenvalues=np.asarray(payload["eigenvalues"], dtype=float),
        scores=np.asarray(payload["scores"], dtype=float),
        pve=np.asarray(payload["pve"], dtype=float),
        omega=float(payload["omega"]),
        noise_variance=float(payload["noise_variance"]),
        estimator=payload.get("estimator", "exact"),
        variable=VariableId.from_key(var) if var else None,
    )
