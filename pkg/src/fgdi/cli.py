"""gaitdex: batch front end for fitting, scoring, stability and comparisons.

Diagnostics go to stderr; data goes to files or stdout.  Exit codes:
0 success, 1 module error, 2 usage error, 3 missing GDI basis when the
surrogate fallback is disabled.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import FgdiError
from .gaitdata import GridSpec, load_cohort, save_cohort, synth_cohort
from .indices import GDI_GRID_POINTS, IndexReport, load_gdi_basis, stability_analysis
from .pipeline import MODES, fit_pipeline, load_pipeline, save_pipeline, score_report
from .stats import kendall_tau, wilcoxon_rank_sum

GDI_BASIS_FILENAME = "gdi_features_51x9.csv"

INDEX_COLUMNS = ("fgdi", "sfgdi", "gdi", "sgdi", "gps", "oa")


def _omega(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"omega must be in (0, 1], got {value}")
    return value


def _modes(text: str) -> list:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            raise argparse.ArgumentTypeError(f"unknown mode {m!r}; choose from {', '.join(MODES)}")
    return modes


def _deltas(text: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"deltas must be a comma-separated integer list, got {text!r}")


def _read_config(path) -> dict:
    config = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FgdiError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaitdex",
                                     description="Functional gait deviation index toolkit")
    parser.add_argument("--config", help="key=value file with defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a pipeline model on a cohort")
    p_fit.add_argument("cohort", help="wide CSV cohort file")
    p_fit.add_argument("--metadata", help="optional metadata CSV")
    p_fit.add_argument("--omega", type=_omega, default=None)
    p_fit.add_argument("--modes", type=_modes, default=None,
                       help="comma list from: combined,left,right,per_joint")
    p_fit.add_argument("--pelvis-side", choices=("L", "R"), default=None)
    p_fit.add_argument("--smoothing", choices=("none", "penalized"), default="none")
    p_fit.add_argument("--out", required=True, help="output model JSON path")

    p_score = sub.add_parser("score", help="score a cohort with a fitted model")
    p_score.add_argument("model", help="pipeline model JSON")
    p_score.add_argument("cohort", help="wide CSV cohort file")
    p_score.add_argument("--metadata", help="optional metadata CSV")
    p_score.add_argument("--mode", default=None,
                         help="scoring mode (default: first fitted mode)")
    p_score.add_argument("--indices", default="fgdi",
                         help="comma list from: fgdi,gdi,gps,oa")
    p_score.add_argument("--gdi-basis", help="CSV file with the 459x15 feature basis")
    p_score.add_argument("--no-surrogate", action="store_true",
                         help="fail instead of computing a surrogate GDI basis")
    p_score.add_argument("--out", required=True, help="report output path")
    p_score.add_argument("--format", choices=("csv", "json"), default=None)

    p_stab = sub.add_parser("stability", help="FGDI shift vs component count")
    p_stab.add_argument("model", help="pipeline model JSON (supplies omega and pelvis side)")
    p_stab.add_argument("cohort", help="wide CSV cohort file")
    p_stab.add_argument("--deltas", type=_deltas, default=[-2, -1, 1, 2])
    p_stab.add_argument("--mode", default="per_joint",
                        choices=("per_joint", "combined", "left", "right"))
    p_stab.add_argument("--out", help="output CSV (default stdout)")

    p_cmp = sub.add_parser("compare", help="rank agreement between two reports")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--out", help="output JSON (default stdout)")

    p_synth = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--healthy", type=int, default=20)
    p_synth.add_argument("--patients", type=int, default=10)
    p_synth.add_argument("--points", type=int, default=101)
    p_synth.add_argument("--deviation", type=float, default=1.0)
    p_synth.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--bind", default=None, help="host:port (default 127.0.0.1:8000)")
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument("--ui-dir", default=None,
                         help="serve a built web UI from this directory at /ui "
                              "(default: ./frontend when present)")

    return parser


def _resolve_gdi_basis(args, config):
    if args.gdi_basis:
        return load_gdi_basis(args.gdi_basis)
    data_dir = os.environ.get("DATA_DIR") or config.get("data_dir")
    if data_dir:
        candidate = Path(data_dir) / GDI_BASIS_FILENAME
        if candidate.exists():
            return load_gdi_basis(candidate)
    return None


def cmd_fit(args, config) -> int:
    cohort = load_cohort(args.cohort, metadata_path=args.metadata)
    omega = args.omega if args.omega is not None else float(config.get("omega", 0.99))
    modes = args.modes or _modes(config.get("modes", "combined"))
    pelvis = args.pelvis_side or config.get("pelvis_side", "L")
    pipeline = fit_pipeline(cohort, omega=omega, modes=modes,
                            pelvis_side=pelvis, smoothing=args.smoothing)
    save_pipeline(pipeline, args.out)
    for mode, entry in pipeline.component_counts().items():
        if entry["W"] is not None:
            print(f"{mode}: W={entry['W']} (K+={entry['K_plus']})")
        else:
            k_u = ",".join(str(v) for v in entry["K_u"].values())
            print(f"{mode}: K_u={k_u}")
    return 0


def cmd_score(args, config) -> int:
    pipeline = load_pipeline(args.model)
    cohort = load_cohort(args.cohort, metadata_path=args.metadata)
    indices = [tok.strip() for tok in args.indices.split(",") if tok.strip()]
    mode = args.mode or next(iter(pipeline.modes))
    basis = None
    if "gdi" in indices:
        basis = _resolve_gdi_basis(args, config)
        if basis is None:
            if args.no_surrogate:
                print("error: GDI requested but no basis file found; supply --gdi-basis, "
                      f"or place {GDI_BASIS_FILENAME} under DATA_DIR, or allow the "
                      "surrogate fallback", file=sys.stderr)
                return 3
            print("notice: no published GDI basis found; using a surrogate SVD basis "
                  "from this cohort's healthy subjects", file=sys.stderr)
        if cohort.grid.num_points != GDI_GRID_POINTS:
            print(f"notice: GDI evaluated on a {GDI_GRID_POINTS}-point resample of the cohort",
                  file=sys.stderr)
    report = score_report(pipeline, mode, cohort, indices=indices, gdi_basis=basis)
    fmt = args.format or config.get("format") or ("json" if str(args.out).endswith(".json") else "csv")
    if fmt == "json":
        Path(args.out).write_text(json.dumps(report.to_dict()) + "\n")
    else:
        report.to_csv(args.out)
    return 0


def cmd_stability(args, config) -> int:
    pipeline = load_pipeline(args.model)
    cohort = load_cohort(args.cohort)
    rows = stability_analysis(cohort, args.mode, args.deltas,
                              omega=pipeline.omega, pelvis_side=pipeline.pelvis_side,
                              smoothing=pipeline.smoothing)
    deltas = args.deltas
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow(["label", "k_opt"] + [f"delta_{j:+d}" for j in deltas])
        for row in rows:
            cells = [row.label, row.k_opt]
            for j in deltas:
                value = row.deltas.get(j)
                cells.append("" if value is None else repr(value))
            writer.writerow(cells)
    finally:
        if args.out is not None:
            out.close()
    return 0


def _load_report(path) -> IndexReport:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return IndexReport.from_dict(json.loads(text))
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise FgdiError(f"{path}: empty report")
    payload = {
        "mode": "unknown",
        "subject_ids": [r["subject_id"] for r in rows],
        "healthy": [r["healthy"] == "1" for r in rows],
    }
    for name in INDEX_COLUMNS:
        if name in rows[0]:
            payload[name] = [float(r[name]) for r in rows]
    map_keys = [c[len("map_"):] for c in rows[0] if c.startswith("map_")]
    payload["map_profile"] = {k: [float(r[f"map_{k}"]) for r in rows] for k in map_keys}
    return IndexReport.from_dict(payload)


def _tau_or_none(x, y):
    try:
        return round(kendall_tau(x, y), 12)
    except FgdiError:
        return None


def _report_columns(report: IndexReport) -> dict:
    return {name: np.asarray(getattr(report, name), dtype=float)
            for name in INDEX_COLUMNS if getattr(report, name) is not None}


def cmd_compare(args, config) -> int:
    report_a = _load_report(args.report_a)
    report_b = _load_report(args.report_b)
    shared_ids = [sid for sid in report_a.subject_ids if sid in set(report_b.subject_ids)]
    if not shared_ids:
        raise FgdiError("reports share no subjects")
    idx_a = [report_a.subject_index(sid) for sid in shared_ids]
    idx_b = [report_b.subject_index(sid) for sid in shared_ids]
    cols_a = _report_columns(report_a)
    cols_b = _report_columns(report_b)

    between = {}
    rank_tests = {}
    for name in cols_a:
        if name not in cols_b:
            continue
        a = cols_a[name][idx_a]
        b = cols_b[name][idx_b]
        between[name] = _tau_or_none(a, b)
        test = wilcoxon_rank_sum(a, b)
        rank_tests[name] = {"statistic": test.statistic, "p_value": test.p_value,
                            "method": test.method}

    def within(cols):
        names = sorted(cols)
        out = {}
        for i, x in enumerate(names):
            for y in names[i + 1:]:
                out[f"{x}_vs_{y}"] = _tau_or_none(cols[x], cols[y])
        return out

    summary = {
        "n_shared_subjects": len(shared_ids),
        "between": between,
        "rank_tests": rank_tests,
        "within_a": within(cols_a),
        "within_b": within(cols_b),
    }
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_synth(args, config) -> int:
    cohort = synth_cohort(seed=args.seed, n_healthy=args.healthy,
                          n_patient=args.patients, grid=GridSpec(args.points),
                          deviation_scale=args.deviation)
    save_cohort(cohort, args.out)
    print(f"wrote {cohort.n_subjects} subjects x 18 variables x {args.points} points",
          file=sys.stderr)
    return 0


def cmd_serve(args, config) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    bind = args.bind or os.environ.get("BIND_ADDR") or config.get("bind_addr", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    ui_dir = args.ui_dir
    if ui_dir is None and Path("frontend/index.html").exists():
        ui_dir = "frontend"
    service_config = ServiceConfig.from_sources(config, data_dir=args.data_dir,
                                                ui_dir=ui_dir)
    if service_config.ui_dir is not None:
        print(f"serving web UI from {service_config.ui_dir} at /ui", file=sys.stderr)
    uvicorn.run(create_app(service_config), host=host or "127.0.0.1",
                port=int(port or 8000))
    return 0


_COMMANDS = {
    "fit": cmd_fit,
    "score": cmd_score,
    "stability": cmd_stability,
    "compare": cmd_compare,
    "synth": cmd_synth,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    # argparse reads a leading dash in "--deltas -2,-1,1,2" as an option;
    # joining with '=' keeps the documented spelling working
    argv = list(argv)
    for i, token in enumerate(argv[:-1]):
        if token == "--deltas":
            argv[i:i + 2] = [f"--deltas={argv[i + 1]}"]
            break
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _read_config(args.config) if args.config else {}
    try:
        return _COMMANDS[args.command](args, config)
    except FgdiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
