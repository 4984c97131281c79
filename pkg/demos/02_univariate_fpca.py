"""Univariate functional PCA on one kinematic variable.

Shows the estimated mean function, the leading eigenfunctions, how much
variance each mode explains, and how the Karhunen-Loeve reconstruction
error falls as components are added.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fgdi import (
    GridSpec,
    VariableId,
    fit_univariate_fpca,
    quadrature_weights,
    reconstruct,
    rmse,
    synth_cohort,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cohort = synth_cohort(seed=11, n_healthy=30, n_patient=10, grid=GridSpec(101))
var = VariableId("ankle_dorsiflexion", "L")
curves = cohort.matrix(var)

model = fit_univariate_fpca(curves, cohort.grid, omega=0.99, variable=var)
print(f"{var.label}: {model.num_components} components reach "
      f"{100 * model.pve[-1]:.2f}% of the variance")
print("eigenvalues:", np.round(model.eigenvalues, 4))

# eigenfunctions are orthonormal under the cycle-length-1 inner product
w = quadrature_weights(cohort.grid.num_points)
gram = model.eigenfunctions @ np.diag(w) @ model.eigenfunctions.T
print(f"max |Gram - I| = {np.abs(gram - np.eye(model.num_components)).max():.2e}")

# reconstruction error decays monotonically per subject
subject = 33  # a patient
errors = [rmse(curves[subject], reconstruct(model, subject, k))
          for k in range(1, model.num_components + 1)]
print("per-component RMSE decay:", np.round(errors, 4))

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
t = cohort.grid.positions
axes[0].plot(t, curves.T, color="0.8", lw=0.6)
axes[0].plot(t, model.mean, color="k", lw=2, label="mean")
axes[0].set(title=var.label, xlabel="% gait cycle", ylabel="angle (deg)")
axes[0].legend()
for k in range(min(3, model.num_components)):
    axes[1].plot(t, model.eigenfunctions[k],
                 label=f"mode {k + 1} ({100 * model.eigenvalues[k] / model.eigenvalues.sum():.0f}%)")
axes[1].set(title="leading eigenfunctions", xlabel="% gait cycle")
axes[1].legend()
axes[2].plot(range(1, len(errors) + 1), errors, marker="o")
axes[2].set(title=f"KL reconstruction error (subject {subject})",
            xlabel="components", ylabel="RMSE (deg)")
fig.tight_layout()
fig.savefig(out_dir / "fpca_overview.png", dpi=120)
print(f"wrote {out_dir / 'fpca_overview.png'}")
