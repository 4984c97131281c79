"""Gait kinematic cohorts: ingestion, validation, resampling, selection, synthesis.

A cohort holds cycle-normalized joint-angle trajectories (degrees) for a set
of subjects on a shared percent-of-cycle grid.  Curves arrive already
segmented and time-normalized; this module does no marker-level processing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ArgumentError, DataError, ParseError

# Canonical joint/plane order.  Pelvis first, then hip, knee, ankle, foot;
# this fixes column semantics everywhere scores are stacked.
JOINT_PLANES = (
    "pelvic_tilt",
    "pelvic_obliquity",
    "pelvic_rotation",
    "hip_flexion",
    "hip_abduction",
    "hip_rotation",
    "knee_flexion",
    "ankle_dorsiflexion",
    "foot_rotation",
)

PELVIS_PLANES = ("pelvic_tilt", "pelvic_obliquity", "pelvic_rotation")

SIDES = ("L", "R")

_DISPLAY = {
    "pelvic_tilt": "pelvic tilt",
    "pelvic_obliquity": "pelvic obliquity",
    "pelvic_rotation": "pelvic rotation",
    "hip_flexion": "hip flexion/extension",
    "hip_abduction": "hip abduction/adduction",
    "hip_rotation": "hip rotation",
    "knee_flexion": "knee flexion/extension",
    "ankle_dorsiflexion": "ankle dorsiflexion/plantarflexion",
    "foot_rotation": "foot int/external rotation",
}

_METADATA_FIELDS = ("hoehn_yahr", "freezer", "updrs_ii", "updrs_iii", "k_level", "amputated_side")


@dataclass(frozen=True, order=True)
class VariableId:
    """One kinematic variable: a joint/plane on one side."""

    joint_plane: str
    side: str

    def __post_init__(self):
        if self.joint_plane not in JOINT_PLANES:
            raise ArgumentError(f"unknown joint/plane {self.joint_plane!r}")
        if self.side not in SIDES:
            raise ArgumentError(f"side must be 'L' or 'R', got {self.side!r}")

    @property
    def key(self) -> str:
        return f"{self.side}_{self.joint_plane}"

    @property
    def label(self) -> str:
        side = "LHS" if self.side == "L" else "RHS"
        return f"{side} {_DISPLAY[self.joint_plane]}"

    @classmethod
    def from_key(cls, key: str) -> "VariableId":
        side, _, joint = key.partition("_")
        return cls(joint_plane=joint, side=side)


#: All 18 variables, left block before right block, canonical joint order within.
ALL_VARIABLES = tuple(
    VariableId(joint_plane=j, side=s) for s in SIDES for j in JOINT_PLANES
)


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced sampling grid over one gait cycle (0..100 percent)."""

    num_points: int
    positions: np.ndarray = field(compare=False, default=None)

    def __post_init__(self):
        if self.num_points < 2:
            raise ArgumentError(f"grid needs at least 2 points, got {self.num_points}")
        if self.positions is None:
            object.__setattr__(self, "positions", np.linspace(0.0, 100.0, self.num_points))
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size != self.num_points:
            raise ArgumentError("positions must be a vector of length num_points")
        if pos[0] != 0.0 or pos[-1] != 100.0:
            raise ArgumentError("grid must start at 0 and end at 100 percent of cycle")
        steps = np.diff(pos)
        if np.any(steps <= 0):
            raise ArgumentError("grid positions must be strictly increasing")
        h = 100.0 / (self.num_points - 1)
        if np.any(np.abs(steps - h) > 1e-9 * h):
            raise ArgumentError("grid spacing must be uniform")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    def __eq__(self, other):
        return isinstance(other, GridSpec) and self.num_points == other.num_points

    def __hash__(self):
        return hash(("GridSpec", self.num_points))


@dataclass(frozen=True)
class VariableSet:
    """An ordered selection of variables: combined15, leg9 or single."""

    mode: str
    members: tuple

    @classmethod
    def combined15(cls, pelvis_side: str = "L") -> "VariableSet":
        """Both legs; pelvis variables taken from one side only (default left)."""
        if pelvis_side not in SIDES:
            raise ArgumentError(f"pelvis_side must be 'L' or 'R', got {pelvis_side!r}")
        members = tuple(
            v for v in ALL_VARIABLES
            if v.joint_plane not in PELVIS_PLANES or v.side == pelvis_side
        )
        return cls(mode="combined15", members=members)

    @classmethod
    def leg9(cls, side: str) -> "VariableSet":
        if side not in SIDES:
            raise ArgumentError(f"side must be 'L' or 'R', got {side!r}")
        return cls(mode="leg9", members=tuple(v for v in ALL_VARIABLES if v.side == side))

    @classmethod
    def single(cls, variable: VariableId) -> "VariableSet":
        return cls(mode="single", members=(variable,))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class KinematicCurve:
    """One variable's angle trajectory (degrees) over the gait cycle."""

    variable: VariableId
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ArgumentError("curve values must be a vector")
        if not np.all(np.isfinite(vals)):
            raise DataError(f"non-finite angle in curve {self.variable.key}")
        vals = vals.copy() if vals.flags.writeable else vals
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass
class SubjectRecord:
    subject_id: str
    healthy: bool
    curves: Mapping[VariableId, KinematicCurve]
    metadata: dict = field(default_factory=dict)

    def curve(self, variable: VariableId) -> KinematicCurve:
        try:
            return self.curves[variable]
        except KeyError:
            raise DataError(
                f"subject {self.subject_id!r} has no curve for {variable.key}"
            ) from None


class Cohort:
    """Aligned subjects x variables x grid collection.  Immutable after construction."""

    def __init__(self, grid: GridSpec, subjects: Sequence[SubjectRecord]):
        self.grid = grid
        self.subjects = tuple(subjects)
        seen = set()
        for s in self.subjects:
            if s.subject_id in seen:
                raise DataError(f"duplicate subject_id {s.subject_id!r}")
            seen.add(s.subject_id)
            for var, curve in s.curves.items():
                if curve.values.shape[0] != grid.num_points:
                    raise DataError(
                        f"curve {var.key} of subject {s.subject_id!r} has "
                        f"{curve.values.shape[0]} points, grid has {grid.num_points}"
                    )
        if self.subjects:
            first = set(self.subjects[0].curves)
            for s in self.subjects[1:]:
                if set(s.curves) != first:
                    raise DataError(
                        f"subject {s.subject_id!r} covers a different variable set "
                        f"than subject {self.subjects[0].subject_id!r}"
                    )

    # -- shape and lookups ------------------------------------------------

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    @property
    def subject_ids(self) -> tuple:
        return tuple(s.subject_id for s in self.subjects)

    @property
    def healthy_mask(self) -> np.ndarray:
        return np.array([s.healthy for s in self.subjects], dtype=bool)

    @property
    def n_healthy(self) -> int:
        return int(self.healthy_mask.sum())

    def variables(self) -> tuple:
        """Variables covered by every subject, canonical order."""
        if not self.subjects:
            return ()
        present = set(self.subjects[0].curves)
        return tuple(v for v in ALL_VARIABLES if v in present)

    def subject(self, subject_id: str) -> SubjectRecord:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise DataError(f"unknown subject_id {subject_id!r}")

    def matrix(self, variable: VariableId) -> np.ndarray:
        """N x T matrix of one variable's curves, subject order preserved."""
        return np.stack([s.curve(variable).values for s in self.subjects])


# -- operations -----------------------------------------------------------


def select_variables(cohort: Cohort, variable_set: VariableSet) -> Cohort:
    """Restrict a cohort to the members of ``variable_set``.

    Returns a view: curve arrays are shared with the parent cohort, never
    copied, so a value read through the view equals the parent's value.
    """
    for s in cohort.subjects:
        for var in variable_set:
            if var not in s.curves:
                raise DataError(f"subject {s.subject_id!r} has no curve for {var.key}")
    subjects = [
        SubjectRecord(
            subject_id=s.subject_id,
            healthy=s.healthy,
            curves={var: s.curves[var] for var in variable_set},
            metadata=s.metadata,
        )
        for s in cohort.subjects
    ]
    return Cohort(grid=cohort.grid, subjects=subjects)


def resample(cohort: Cohort, target_num_points: int) -> Cohort:
    """Linearly interpolate every curve onto a new equally spaced grid.

    Endpoints are preserved exactly; at matching grid size the values are
    returned unchanged.
    """
    if target_num_points < 2:
        raise ArgumentError(f"target grid needs at least 2 points, got {target_num_points}")
    if target_num_points == cohort.grid.num_points:
        return Cohort(grid=cohort.grid, subjects=cohort.subjects)
    new_grid = GridSpec(target_num_points)
    old_pos = cohort.grid.positions
    subjects = []
    for s in cohort.subjects:
        curves = {
            var: KinematicCurve(var, np.interp(new_grid.positions, old_pos, c.values))
            for var, c in s.curves.items()
        }
        subjects.append(
            SubjectRecord(s.subject_id, s.healthy, curves, metadata=s.metadata)
        )
    return Cohort(grid=new_grid, subjects=subjects)


# -- wide CSV schema ------------------------------------------------------

_FIXED_COLUMNS = ("subject_id", "healthy", "side", "variable")


def _expected_header(num_points: int) -> list:
    return list(_FIXED_COLUMNS) + [f"t{l:03d}" for l in range(num_points)]


def load_cohort(path, metadata_path=None) -> Cohort:
    """Load a cohort from the wide CSV schema (one row per subject-variable).

    Columns: ``subject_id, healthy{0|1}, side{L|R}, variable, t000..t{T-1}``.
    Row order fixes subject order (order of first appearance).  An optional
    metadata CSV attaches clinical fields by subject_id.

    Raises
    ------
    ParseError
        Malformed header.
    DataError
        Non-finite angles (named by row/column), duplicate rows, inconsistent
        row lengths, or invalid field values.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file, expected a header row")
    header = [c.strip() for c in rows[0]]
    if header[: len(_FIXED_COLUMNS)] != list(_FIXED_COLUMNS):
        raise ParseError(
            f"{path}: header must start with {', '.join(_FIXED_COLUMNS)}; got {header[:4]}"
        )
    num_points = len(header) - len(_FIXED_COLUMNS)
    if num_points < 2:
        raise ParseError(f"{path}: need at least 2 sample columns, found {num_points}")
    if header != _expected_header(num_points):
        raise ParseError(f"{path}: sample columns must be t000..t{num_points - 1:03d} in order")

    order: list = []
    healthy_by_subject: dict = {}
    curves_by_subject: dict = {}
    for row_no, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(
                f"{path}:{row_no}: row has {len(row)} cells, header declares {len(header)}"
            )
        subject_id = row[0].strip()
        if not subject_id:
            raise DataError(f"{path}:{row_no}: empty subject_id")
        healthy_tok = row[1].strip()
        if healthy_tok not in ("0", "1"):
            raise DataError(f"{path}:{row_no}: healthy must be 0 or 1, got {healthy_tok!r}")
        healthy = healthy_tok == "1"
        side = row[2].strip()
        joint = row[3].strip()
        try:
            var = VariableId(joint_plane=joint, side=side)
        except ArgumentError as exc:
            raise DataError(f"{path}:{row_no}: {exc}") from None

        values = np.empty(num_points)
        for k, cell in enumerate(row[4:]):
            col = header[4 + k]
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}:{row_no}: column {col}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{row_no}: column {col}: non-finite angle {cell!r}")
            values[k] = v

        if subject_id not in curves_by_subject:
            order.append(subject_id)
            curves_by_subject[subject_id] = {}
            healthy_by_subject[subject_id] = healthy
        elif healthy_by_subject[subject_id] != healthy:
            raise DataError(f"{path}:{row_no}: healthy flag of {subject_id!r} is inconsistent")
        if var in curves_by_subject[subject_id]:
            raise DataError(f"{path}:{row_no}: duplicate row for {subject_id!r} / {var.key}")
        curves_by_subject[subject_id][var] = KinematicCurve(var, values)

    metadata = _load_metadata(metadata_path, set(order)) if metadata_path else {}
    grid = GridSpec(num_points)
    subjects = [
        SubjectRecord(
            subject_id=sid,
            healthy=healthy_by_subject[sid],
            curves=curves_by_subject[sid],
            metadata=metadata.get(sid, {}),
        )
        for sid in order
    ]
    return Cohort(grid=grid, subjects=subjects)


def _load_metadata(path, known_ids: set) -> dict:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "subject_id" not in reader.fieldnames:
            raise ParseError(f"{path}: metadata header must contain subject_id")
        unknown_cols = set(reader.fieldnames) - {"subject_id", *_METADATA_FIELDS}
        if unknown_cols:
            raise ParseError(f"{path}: unknown metadata columns {sorted(unknown_cols)}")
        out: dict = {}
        for row_no, row in enumerate(reader, start=2):
            sid = (row.get("subject_id") or "").strip()
            if not sid:
                continue
            if sid not in known_ids:
                raise DataError(f"{path}:{row_no}: metadata for unknown subject {sid!r}")
            fields = {}
            for name in _METADATA_FIELDS:
                cell = (row.get(name) or "").strip()
                if not cell:
                    continue
                fields[name] = _parse_metadata_field(name, cell, f"{path}:{row_no}")
            if fields:
                out[sid] = fields
        return out


def _parse_metadata_field(name: str, cell: str, where: str):
    if name == "amputated_side":
        if cell not in SIDES:
            raise DataError(f"{where}: amputated_side must be L or R, got {cell!r}")
        return cell
    if name == "freezer":
        low = cell.lower()
        if low in ("1", "true"):
            return True
        if low in ("0", "false"):
            return False
        raise DataError(f"{where}: freezer must be 0/1/true/false, got {cell!r}")
    try:
        value = int(cell)
    except ValueError:
        raise DataError(f"{where}: {name} must be an integer, got {cell!r}") from None
    if name == "hoehn_yahr" and not 1 <= value <= 4:
        raise DataError(f"{where}: hoehn_yahr must be in 1..4, got {value}")
    if name == "k_level" and not 2 <= value <= 3:
        raise DataError(f"{where}: k_level must be 2 or 3, got {value}")
    return value


def save_cohort(cohort: Cohort, path, metadata_path=None) -> None:
    """Write a cohort back to the wide CSV schema (and optional metadata CSV).

    Angles are written with shortest round-trip float formatting, so
    load(save(c)) reproduces the values bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_expected_header(cohort.grid.num_points))
        for s in cohort.subjects:
            for var in cohort.variables():
                row = [s.subject_id, "1" if s.healthy else "0", var.side, var.joint_plane]
                row.extend(repr(float(v)) for v in s.curves[var].values)
                writer.writerow(row)
    if metadata_path is not None:
        with open(metadata_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("subject_id",) + _METADATA_FIELDS)
            for s in cohort.subjects:
                if not s.metadata:
                    continue
                row = [s.subject_id]
                for name in _METADATA_FIELDS:
                    value = s.metadata.get(name)
                    if value is None:
                        row.append("")
                    elif name == "freezer":
                        row.append("1" if value else "0")
                    else:
                        row.append(str(value))
                writer.writerow(row)


# -- synthetic cohorts ----------------------------------------------------

# Fixed per-variable template shapes: up to 3 harmonics of the cycle plus a
# baseline offset, loosely scaled like joint-angle ranges in degrees.
def _template_params(variable: VariableId):
    idx = ALL_VARIABLES.index(variable)
    rng = np.random.default_rng(97 + idx % 9)  # same joint shape on both sides
    amps = rng.uniform(3.0, 14.0, size=3) * np.array([1.0, 0.5, 0.25])
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    offset = rng.uniform(-10.0, 25.0)
    return amps, phases, offset


def _template_curve(variable: VariableId, phase_fraction: np.ndarray, shift: float = 0.0,
                    amp_factor: float = 1.0) -> np.ndarray:
    amps, phases, offset = _template_params(variable)
    t = phase_fraction + shift
    curve = np.full_like(t, offset)
    for k in range(3):
        curve = curve + amp_factor * amps[k] * np.sin(2.0 * np.pi * (k + 1) * t + phases[k])
    return curve


def synth_cohort(seed: int, n_healthy: int, n_patient: int,
                 grid: Optional[GridSpec] = None,
                 deviation_scale: float = 1.0,
                 variables: Iterable[VariableId] = ALL_VARIABLES) -> Cohort:
    """Generate a deterministic synthetic cohort.

    Healthy curves are smooth per-variable templates plus small smooth
    subject effects.  Patient curves add cycle-timing shifts, amplitude
    scaling and level offsets, all proportional to ``deviation_scale``;
    at scale 0 the patient generator coincides with the healthy one.
    """
    if n_healthy < 0 or n_patient < 0:
        raise ArgumentError("subject counts must be non-negative")
    if deviation_scale < 0:
        raise ArgumentError("deviation_scale must be non-negative")
    grid = grid or GridSpec(101)
    variables = tuple(variables)
    rng = np.random.default_rng(seed)
    phase = grid.positions / 100.0

    # subject effects draw independent sin and cos coefficients per harmonic
    # with geometric variance decay, so the per-variable eigen-spectrum falls
    # smoothly (a few dominant modes plus a genuine tail, like measured
    # kinematic covariances)
    effect_basis = np.stack([
        trig(2.0 * np.pi * k * phase)
        for k in range(1, 7) for trig in (np.sin, np.cos)
    ])
    effect_scales = 1.1 * 0.55 ** (0.5 * np.arange(12))

    def subject_effect():
        return rng.normal(0.0, effect_scales) @ effect_basis

    subjects = []
    for i in range(n_healthy):
        curves = {}
        for var in variables:
            values = _template_curve(var, phase) + subject_effect()
            curves[var] = KinematicCurve(var, values)
        subjects.append(SubjectRecord(f"h{i:03d}", True, curves))
    for i in range(n_patient):
        curves = {}
        for var in variables:
            # deviations stay comparable to healthy variation at scale 1 so
            # patient-specific directions blend into the pooled spectrum
            shift = 0.015 * deviation_scale * rng.normal()
            amp_factor = 1.0 + 0.06 * deviation_scale * rng.normal()
            offset = 0.6 * deviation_scale * rng.normal()
            values = (_template_curve(var, phase, shift=shift, amp_factor=amp_factor)
                      + offset + subject_effect())
            curves[var] = KinematicCurve(var, values)
        subjects.append(SubjectRecord(f"p{i:03d}", False, curves))
    return Cohort(grid=grid, subjects=subjects)
