"""Command line front end.

Subcommands: simulate (run + artifacts), certify (evaluate the scenario's
certificate), sweep (Cartesian parameter grid of certificates, optionally
with simulations), validate (schema diagnostics), audit (replay a finished
run against the spread differential inequalities).

Exit codes: 0 success/feasible, 1 usage or IO error, 2 infeasible or audit
violations, 3 collision termination, 4 step-size underflow.  FLOCKLAB_LOG
selects the logging level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import artifacts
from .certify import (
    CollisionCertificate,
    StandardCertificate,
    SyncCertificate,
    audit_collision_run,
    audit_sync_run,
    decay_rate_fit,
)
from .integrate import CollisionEvent, Completed, StepSizeUnderflow, integrate
from .scenario import (
    Scenario,
    ScenarioError,
    evaluate_certificate,
    load_scenario,
    materialize,
    scenario_sha256,
    validate,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_COLLISION = 3
EXIT_UNDERFLOW = 4

log = logging.getLogger("flocklab")


def _setup_logging() -> None:
    name = os.environ.get("FLOCKLAB_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _versions() -> dict:
    import scipy

    from . import __version__

    return {
        "flocklab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": ".".join(str(part) for part in sys.version_info[:3]),
    }


def _read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(args) -> Scenario:
    text = _read_text(args.scenario)
    return load_scenario(text, seed_override=args.seed)


def _termination_exit(term) -> int:
    if isinstance(term, Completed):
        return EXIT_OK
    if isinstance(term, CollisionEvent):
        return EXIT_COLLISION
    return EXIT_UNDERFLOW


def _maybe_certificate(sc: Scenario):
    """Certificate for the scenario, or None when sync lacks a K source."""
    if sc.variant == "sync" and (sc.certificate is None or sc.certificate.k_source is None):
        return None
    return evaluate_certificate(sc)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cert = _maybe_certificate(sc)
    traj = integrate(sc.model_spec(), sc.initial_state(), sc.integrator)
    log.info(
        "simulate %s: %s after %d accepted / %d rejected steps",
        sc.name,
        type(traj.termination).__name__,
        traj.n_accepted,
        traj.n_rejected,
    )

    csv_path = out / "timeseries.csv"
    artifacts.write_timeseries_csv(csv_path, traj, full=args.full)

    plots = {
        "velocity_components": out / "velocity_components.svg",
        "pairwise_distances": out / "pairwise_distances.svg",
        "spread_v_log": out / "spread_v_log.svg",
    }
    artifacts.plot_velocity_components(plots["velocity_components"], traj)
    artifacts.plot_pairwise_distances(
        plots["pairwise_distances"],
        traj,
        d0=sc.repulsion.d0 if sc.repulsion is not None else None,
    )
    bound = None
    if isinstance(cert, SyncCertificate) and cert.feasible:
        bound = lambda t: cert.decay_bound(t, t0=sc.integrator.t0)  # noqa: E731
    artifacts.plot_spread_v(plots["spread_v_log"], traj, bound=bound)

    report_path = None
    if cert is not None:
        report_path = out / "certificate.txt"
        report_path.write_text(artifacts.certificate_report(cert), encoding="utf-8")

    resolved = None
    if isinstance(cert, SyncCertificate):
        resolved = {
            "k_bound": cert.k_bound,
            "k_source": cert.k_source,
            "relaxed": cert.relaxed,
        }
    manifest = {
        "command": "simulate",
        "scenario": sc.doc,
        "scenario_sha256": scenario_sha256(sc.doc),
        "seed": sc.seed,
        "full": bool(args.full),
        "resolved": resolved,
        "certificate": _cert_doc(cert),
        "run": {
            "termination": artifacts.termination_to_doc(traj.termination),
            "n_accepted": traj.n_accepted,
            "n_rejected": traj.n_rejected,
            "rows": int(len(traj.ts)),
        },
        "artifacts": {
            "timeseries": csv_path.name,
            "plots": sorted(p.name for p in plots.values()),
            "certificate_report": None if report_path is None else report_path.name,
        },
        "versions": _versions(),
    }
    artifacts.write_manifest(out / "manifest.json", manifest)

    final_sv = traj.spread_v[-1]
    print(f"run: {sc.name}")
    print(f"termination: {artifacts.termination_to_doc(traj.termination)}")
    print(f"rows: {len(traj.ts)}")
    print(f"S(v) final: {artifacts.fmt_sig(final_sv)}")
    print(f"artifacts: {out}")
    return _termination_exit(traj.termination)


def _cert_doc(cert):
    if cert is None:
        return None
    doc = artifacts.certificate_fields(cert)
    return {key: _jsonable(val) for key, val in doc.items()}


def _jsonable(val):
    if isinstance(val, float):
        if val != val or val in (float("inf"), float("-inf")):
            return repr(val)
        return val
    return val


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args) -> int:
    sc = _load(args)
    cert = evaluate_certificate(sc)
    report = artifacts.certificate_report(cert)
    print(report, end="")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "certificate.txt").write_text(report, encoding="utf-8")
    return EXIT_OK if cert.feasible else EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# sweep


def _parse_axis(spec: str) -> tuple[str, list]:
    """`key=VALUES` where VALUES is a:b:step, a JSON list, or a comma list."""
    if "=" not in spec:
        raise ValueError(f"axis {spec!r}: expected key=values")
    key, _, raw = spec.partition("=")
    key = key.strip()
    raw = raw.strip()
    if not key or not raw:
        raise ValueError(f"axis {spec!r}: expected key=values")
    if raw.startswith("["):
        values = json.loads(raw)
        if not isinstance(values, list) or not values:
            raise ValueError(f"axis {key!r}: JSON form must be a non-empty list")
        return key, values
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError(f"axis {key!r}: range form is start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"axis {key!r}: need step > 0 and stop >= start")
        count = int(round((stop - start) / step))
        values = [start + step * k for k in range(count + 1)]
        if values[-1] > stop + 1e-9 * max(1.0, abs(stop)):
            values.pop()
        return key, values
    return key, [_parse_scalar(part) for part in raw.split(",")]


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _set_by_path(doc: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        nxt = node.get(key)
        if not isinstance(nxt, dict):
            nxt = {}
            node[key] = nxt
        node = nxt
    node[keys[-1]] = value


_CERT_CLASS = {
    "sync": SyncCertificate,
    "collision_free": CollisionCertificate,
    "baseline": StandardCertificate,
}


def _sweep_columns(variant: str, axis_keys: list[str], with_sim: bool) -> list[str]:
    cols = ["index", *axis_keys, "certificate"]
    cols += [fld.name for fld in dataclasses.fields(_CERT_CLASS[variant])]
    if with_sim:
        cols.append("eps_observed")
    cols.append("error")
    return cols


def _sweep_point(payload) -> dict:
    doc_json, idx, assignments, isolate_stream, with_sim = payload
    doc = json.loads(doc_json)
    for key, value in assignments:
        _set_by_path(doc, key, value)
    row = {"index": idx}
    row.update({key: value for key, value in assignments})
    try:
        seed = doc.get("seed", 0)
        seed_path = (seed, idx) if isolate_stream else (seed,)
        sc = materialize(doc, seed_path=seed_path)
        cert = evaluate_certificate(sc)
        row.update(artifacts.certificate_fields(cert))
        if with_sim:
            traj = integrate(sc.model_spec(), sc.initial_state(), sc.integrator)
            try:
                row["eps_observed"] = decay_rate_fit(traj)
            except ValueError:
                row["eps_observed"] = None
        row["error"] = ""
    except Exception as exc:  # per-point failures recorded, sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _csv_cell(val) -> str:
    if val is None or val == "":
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return artifacts.fmt_sig(val)
    return str(val)


def cmd_sweep(args) -> int:
    import csv as _csv

    text = _read_text(args.scenario)
    doc = json.loads(text)
    if args.seed is not None:
        doc["seed"] = args.seed
    diags = validate(doc)
    if diags:
        raise ScenarioError(diags)

    axes = [_parse_axis(spec) for spec in args.axis or []]
    axis_keys = [key for key, _ in axes]
    grids = [values for _, values in axes]
    points = list(product(*grids)) if axes else [()]
    isolate = bool(axes)

    variant = doc["variant"]
    with_sim = bool(args.simulate)
    payloads = [
        (json.dumps(doc), idx, list(zip(axis_keys, values)), isolate, with_sim)
        for idx, values in enumerate(points)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(payload) for payload in payloads]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = _sweep_columns(variant, axis_keys, with_sim)
    sweep_path = out / "sweep.csv"
    with open(sweep_path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_csv_cell(row.get(col)) for col in cols])

    n_err = sum(1 for row in rows if row["error"])
    n_feasible = sum(1 for row in rows if row.get("feasible") is True)
    print(f"sweep: {len(rows)} points, {n_feasible} feasible, {n_err} errors")
    print(f"artifacts: {sweep_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    try:
        doc = json.loads(_read_text(args.scenario))
    except json.JSONDecodeError as exc:
        print(f"document: invalid JSON ({exc})")
        return EXIT_USAGE
    diags = validate(doc)
    if not diags:
        try:
            materialize(doc)
        except (ScenarioError, ValueError) as exc:
            diags = [f"materialization: {exc}"]
    if diags:
        for diag in diags:
            print(diag)
        return EXIT_USAGE
    print("scenario OK")
    return EXIT_OK


# ---------------------------------------------------------------------------
# audit


def cmd_audit(args) -> int:
    run_dir = Path(args.out)
    manifest = artifacts.read_manifest(run_dir / "manifest.json")
    sc = materialize(manifest["scenario"])
    term = artifacts.termination_from_doc(manifest["run"]["termination"])
    traj = artifacts.trajectory_from_artifacts(
        run_dir / "timeseries.csv", sc.integrator, term, stats=manifest["run"]
    )

    if sc.variant == "collision_free":
        report = audit_collision_run(traj, sc.coupling, sc.repulsion)
        kind = "collision inequality"
    else:
        if sc.variant == "sync":
            resolved = manifest.get("resolved")
            if not resolved or resolved.get("k_bound") is None:
                print("audit: manifest records no K bound for this sync run")
                return EXIT_USAGE
            k_bound = float(resolved["k_bound"])
        else:
            k_bound = 0.0
        report = audit_sync_run(traj, sc.envelope(), sc.n, k_bound)
        kind = "alignment inequality"

    print(f"audit: {kind} on {report.n_samples} samples")
    print(f"checked: {report.n_checked}")
    print(f"skipped (below resolution floor): {report.n_skipped}")
    print(f"violations: {report.n_violations}")
    print(f"worst margin: {artifacts.fmt_sig(report.worst_margin)}")
    if report.first_violation_t is not None:
        print(f"first violation at t = {artifacts.fmt_sig(report.first_violation_t)}")
    return EXIT_INFEASIBLE if report.n_violations else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flocklab",
        description="simulation and certification laboratory for perturbed flocking networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, scenario=True, out_required=False, out=True):
        p = sub.add_parser(name, help=help_text)
        if scenario:
            p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        if out:
            p.add_argument(
                "--out",
                required=out_required,
                default=None,
                help="output directory" if name != "audit" else "run directory to audit",
            )
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers (sweep)")
        p.add_argument("--full", action="store_true", help="write full state columns to CSV")
        p.set_defaults(fn=fn)
        return p

    add("simulate", cmd_simulate, "run a scenario and write artifacts", out_required=True)
    add("certify", cmd_certify, "evaluate the scenario certificate")
    sweep = add("sweep", cmd_sweep, "grid of certificates over axis values", out_required=True)
    sweep.add_argument(
        "--axis",
        action="append",
        metavar="KEY=VALUES",
        help="sweep axis, e.g. coupling.delta=0:2:0.05 or seed=[1,2,3]; repeatable",
    )
    sweep.add_argument(
        "--simulate",
        action="store_true",
        help="also simulate each point and record the observed decay rate",
    )
    add("validate", cmd_validate, "check a scenario file and report diagnostics", out=False)
    add("audit", cmd_audit, "recheck a finished run against the certified inequalities",
        scenario=False, out_required=True)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; this interface pins 1
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except ScenarioError as exc:
        for diag in exc.diagnostics:
            print(diag, file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
