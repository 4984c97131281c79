"""Second-stage multivariate FPCA over stacked univariate scores.

Per-variable score matrices are concatenated column-wise; the eigenvectors
of their joint covariance weight the univariate components by the
cross-variable dependence, and the resulting multivariate scores feed the
combined and per-leg deviation indices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ArgumentError, DegenerateError
from .fpca import EIG_ZERO_RTOL, FpcaModel
from .gaitdata import VariableId


@dataclass
class ScoreStack:
    """Univariate scores of all variables side by side (N x K_plus)."""

    matrix: np.ndarray
    block_index: dict = field(default_factory=dict)  # VariableId -> (start, stop)

    @property
    def k_plus(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_subjects(self) -> int:
        return self.matrix.shape[0]

    def block(self, variable: VariableId) -> np.ndarray:
        start, stop = self.block_index[variable]
        return self.matrix[:, start:stop]


def stack_scores(models: Sequence[FpcaModel]) -> ScoreStack:
    """Concatenate per-variable score matrices in the given (canonical) order.

    Within each block the components stay in descending-eigenvalue order.
    """
    if not models:
        raise ArgumentError("need at least one fitted model")
    n = models[0].n_subjects
    blocks = []
    block_index = {}
    start = 0
    for m in models:
        if m.n_subjects != n:
            raise ArgumentError(
                f"models fitted on different subject counts: {m.n_subjects} vs {n}"
            )
        stop = start + m.num_components
        if m.variable is not None:
            block_index[m.variable] = (start, stop)
        blocks.append(m.scores)
        start = stop
    return ScoreStack(matrix=np.hstack(blocks), block_index=block_index)


def joint_covariance(stack: ScoreStack) -> np.ndarray:
    """Sample covariance of the stacked scores (scores are already centered)."""
    n = stack.n_subjects
    if n < 2:
        raise ArgumentError(f"need at least 2 subjects, got {n}")
    cov = stack.matrix.T @ stack.matrix / (n - 1)
    return 0.5 * (cov + cov.T)


@dataclass
class MfpcaModel:
    """Eigen-analysis of the joint score covariance, truncated at W < K_plus."""

    eigenvectors: np.ndarray    # (W, K_plus), rows orthonormal
    eigenvalues: np.ndarray     # (W,), descending
    mscores: np.ndarray         # (N, W)
    prefactors: np.ndarray      # (W,), ((N-1) nu_w)^1/2 (kappa' Xi'Xi kappa)^-1/2
    pve: np.ndarray             # (W,), cumulative
    omega: float
    k_plus: int

    @property
    def num_components(self) -> int:
        return self.eigenvalues.shape[0]

    def transform(self, stacked_scores: np.ndarray) -> np.ndarray:
        """Multivariate scores for (possibly new) stacked univariate scores."""
        stacked_scores = np.asarray(stacked_scores, dtype=float)
        if stacked_scores.ndim == 1:
            stacked_scores = stacked_scores[None, :]
        if stacked_scores.shape[1] != self.k_plus:
            raise ArgumentError(
                f"stack has {stacked_scores.shape[1]} columns, model expects {self.k_plus}"
            )
        return (stacked_scores @ self.eigenvectors.T) * self.prefactors


def fit_mfpca(stack: ScoreStack, omega: float = 0.99,
              num_components: Optional[int] = None) -> MfpcaModel:
    """Eigen-analysis of the joint covariance and multivariate score extraction.

    The truncation W is the smallest count whose cumulative proportion of
    variance (over the positive spectrum) reaches ``omega``, and is capped
    at K_plus - 1; if the target forces W = K_plus the last component is
    dropped with a warning.  Scores use the full prefactor formula
    ``((N-1) nu_w)^1/2 (kappa' Xi'Xi kappa)^-1/2 Xi kappa``, which reduces
    to ``Xi kappa`` for unit-norm eigenvectors.
    """
    if not 0.0 < omega <= 1.0:
        raise ArgumentError(f"omega must be in (0, 1], got {omega}")
    cov = joint_covariance(stack)
    trace = float(np.trace(cov))
    if trace <= 0:
        raise DegenerateError("joint score covariance is numerically zero")
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    cutoff = EIG_ZERO_RTOL * trace
    positive = eigvals > cutoff
    if not np.any(positive):
        raise DegenerateError("joint score covariance is numerically zero")
    n_positive = int(np.count_nonzero(positive))
    total = float(np.sum(eigvals[:n_positive]))
    pve_all = np.cumsum(eigvals[:n_positive]) / total

    k_plus = stack.k_plus
    if k_plus < 2:
        raise DegenerateError("cannot truncate below K_plus with a single stacked column")
    if num_components is not None:
        if not 1 <= num_components <= min(n_positive, k_plus - 1):
            raise ArgumentError(
                f"num_components must be in 1..{min(n_positive, k_plus - 1)}, "
                f"got {num_components}"
            )
        w_trunc = num_components
    else:
        w_trunc = int(np.searchsorted(pve_all, omega) + 1)
        w_trunc = min(w_trunc, n_positive)
        if w_trunc >= k_plus:
            warnings.warn(
                f"variance target {omega} reaches W = K_plus = {k_plus}; "
                "dropping the last component to keep W < K_plus"
            )
            w_trunc = k_plus - 1

    n = stack.n_subjects
    eigenvectors = eigvecs[:, :w_trunc].T.copy()
    eigenvalues = eigvals[:w_trunc].copy()
    gram = stack.matrix.T @ stack.matrix
    quad = np.einsum("wk,kj,wj->w", eigenvectors, gram, eigenvectors)
    with np.errstate(divide="ignore"):
        prefactors = np.sqrt((n - 1) * eigenvalues) / np.sqrt(quad)
    prefactors[~np.isfinite(prefactors)] = 1.0
    mscores = (stack.matrix @ eigenvectors.T) * prefactors

    # sign convention mirrors the univariate stage
    for w in range(w_trunc):
        peak = np.argmax(np.abs(eigenvectors[w]))
        if eigenvectors[w, peak] < 0:
            eigenvectors[w] *= -1.0
            mscores[:, w] *= -1.0

    return MfpcaModel(
        eigenvectors=eigenvectors,
        eigenvalues=eigenvalues,
        mscores=mscores,
        prefactors=prefactors,
        pve=pve_all[:w_trunc].copy(),
        omega=omega,
        k_plus=k_plus,
    )


# -- serialization ----------------------------------------------------------


def mfpca_to_dict(model: MfpcaModel) -> dict:
    return {
        "eigenvectors": model.eigenvectors.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "mscores": model.mscores.tolist(),
        "prefactors": model.prefactors.tolist(),
        "pve": model.pve.tolist(),
        "omega": model.omega,
        "k_plus": model.k_plus,
    }


def mfpca_from_dict(payload: dict) -> MfpcaModel:
    return MfpcaModel(
        eigenvectors=np.asarray(payload["eigenvectors"], dtype=float),
        eigenvalues=np.asarray(payload["eigenvalues"], dtype=float),
        mscores=np.asarray(payload["mscores"], dtype=float),
        prefactors=np.asarray(payload["prefactors"], dtype=float),
        pve=np.asarray(payload["pve"], dtype=float),
        omega=float(payload["omega"]),
        k_plus=int(payload["k_plus"]),
    )
