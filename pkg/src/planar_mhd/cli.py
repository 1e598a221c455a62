"""Command-line entry point.

    planar-mhd simulate --config run.yaml [--out DIR] [--jobs N]
    planar-mhd verify mms [--levels K]
    planar-mhd verify oracle
    planar-mhd audit --series out/series.csv
    planar-mhd scenarios list

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import outputs
from .config import ConfigError, RunConfig, config_from_dict, load_config, load_raw
from .core import Parameters
from .diagnostics import bounds_monitor, representation_report, sample
from .integrator import Accumulators, DtUnderflow, PositivityFailure, SingularSystem, advance
from .scenarios import builtin_scenarios, get_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

logger = logging.getLogger("planar_mhd")


def code_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def initial_state(cfg: RunConfig):
    if cfg.initial_state is not None:
        state = outputs.read_snapshot(cfg.initial_state["centers"], cfg.initial_state["nodes"])
        if state.n_cells != cfg.n_cells:
            raise ConfigError(f"initial state has {state.n_cells} cells, config says {cfg.n_cells}", "n_cells")
        return state
    return get_scenario(cfg.scenario).build(cfg.n_cells, seed=cfg.seed, **cfg.scenario_options)


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """Run one trajectory and write its artifacts; returns an exit code."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    for w in cfg.warnings:
        logger.warning(w)
    meta = {
        "config": {**cfg.to_dict(), "output_dir": str(out)},
        "code_version": code_version(),
        "warnings": list(cfg.warnings),
    }
    started = time.perf_counter()
    params = cfg.params
    samples = []

    try:
        state0 = initial_state(cfg)
    except (ConfigError, ValueError) as exc:
        meta.update(status="config_error", error={"type": type(exc).__name__, "message": str(exc)})
        outputs.write_json(out / "meta.json", meta)
        logger.error("%s", exc)
        return EXIT_CONFIG

    acc = Accumulators.start(state0, params)
    track_rep = acc.tracks_representation and abs(sample(state0, acc, params).mass - 1.0) <= 1e-12
    meta["representation"] = "tracked" if track_rep else "skipped: needs unit-normalized parameters and unit mass"

    series = outputs.series_table(out / "series.csv")
    rep = outputs.representation_table(out / "representation.csv")

    def record(state, accs, k):
        if k % cfg.series_every == 0 or state.t == cfg.t_final:
            s = sample(state, accs, params)
            samples.append(s)
            series.write(s.as_row())
            if track_rep:
                r = representation_report(state, accs, state0, params)
                rep.write([state.t, r.Y, r.max_rel_err])
        if k % cfg.snapshot_every == 0 or state.t == cfg.t_final:
            outputs.write_snapshot(out / "snapshots", state)

    status = EXIT_OK
    try:
        record(state0, acc, 0)
        result = advance(state0, cfg.controls, params, [record], accumulators=acc, magnetic=cfg.magnetic)
        meta.update(status="ok", steps=result.steps, retries=result.retries, retry_events=result.retry_events)
    except (PositivityFailure, DtUnderflow, SingularSystem) as exc:
        status = EXIT_SOLVER
        meta.update(status="solver_failure", error={"type": type(exc).__name__, "message": str(exc)})
        logger.error("solver failure: %s", exc)
    finally:
        series.close()
        rep.close()

    if samples:
        meta["bounds"] = bounds_monitor(samples).to_dict()
    meta["wall_clock_s"] = time.perf_counter() - started
    outputs.write_json(out / "meta.json", meta)
    return status


def _run_sweep_member(args) -> tuple[str, int]:
    name, raw, base_dir, out = args
    try:
        cfg = config_from_dict(raw, base_dir=base_dir)
    except ConfigError as exc:
        logger.error("%s: %s", name, exc)
        return name, EXIT_CONFIG
    return name, run(cfg, out)


def simulate(args) -> int:
    path = Path(args.config)
    raw = load_raw(path)
    if isinstance(raw, dict) and "runs" in raw:
        return simulate_sweep(raw, path.parent, args)
    cfg = load_config(path)
    return run(cfg, args.out)


def simulate_sweep(raw: dict, base_dir: Path, args) -> int:
    """Run ``base`` merged with each entry of ``runs``, one directory per run."""
    base = raw.get("base") or {}
    runs = raw["runs"]
    if set(raw) - {"base", "runs"} or not isinstance(runs, list) or not runs:
        raise ConfigError("sweep files hold 'base' and a nonempty 'runs' list")
    root = Path(args.out or base.get("output_dir", "out"))
    jobs = []
    for i, entry in enumerate(runs):
        entry = dict(entry)
        name = str(entry.pop("name", f"run{i:03d}"))
        merged = {**base, **entry}
        if "params" in base and "params" in entry:
            merged["params"] = {**base["params"], **entry["params"]}
        merged["output_dir"] = str(root / name)
        config_from_dict(merged, base_dir)  # fail fast on any invalid member
        jobs.append((name, merged, base_dir, root / name))
    n_jobs = max(1, int(args.jobs))
    if n_jobs == 1:
        results = [_run_sweep_member(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_sweep_member, jobs))
    for name, code in results:
        print(f"{name}: exit {code}")
    return max(code for _, code in results)


def verify_mms(args) -> int:
    from .verification import default_case, run_mms

    levels = tuple(16 * 2**k for k in range(args.levels))
    case = default_case()
    space = run_mms(case, levels, mode="space")
    combined = run_mms(case, levels, mode="combined")
    for rep in (space, combined):
        print("\n".join(rep.lines()))
    ok = space.min_order() >= 1.9 and combined.min_order() >= 0.9
    print(f"spatial order min {space.min_order():.3f} (>= 1.9), combined min {combined.min_order():.3f} (>= 0.9):"
          f" {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def verify_oracle(args) -> int:
    from .verification import oracle_equivalence

    dts = [1e-4, 5e-5, 2.5e-5]
    state = get_scenario("smooth").build(16)
    gaps = oracle_equivalence(state, Parameters.paper_normalized(1.0, 1.0), dts, 0.01)
    ratios = [gaps[i] / gaps[i + 1] for i in range(len(gaps) - 1)]
    for dt, gap in zip(dts, gaps):
        print(f"dt={dt:g} discrepancy={gap:.6e}")
    ok = all(1.5 <= r <= 2.5 for r in ratios)
    print(f"ratios {', '.join(f'{r:.3f}' for r in ratios)} (in [1.5, 2.5]): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def audit(args) -> int:
    samples = outputs.read_series(args.series)
    report = bounds_monitor(samples)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK if report.bounded else EXIT_VERIFY


def list_scenarios(args) -> int:
    for sc in builtin_scenarios():
        opts = ", ".join(f"{k}={v}" for k, v in sc.options.items())
        print(f"{sc.name:20s} {sc.description}" + (f" [{opts}]" if opts else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planar-mhd", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured trajectory or sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=simulate)

    p = sub.add_parser("verify", help="verification studies")
    vsub = p.add_subparsers(dest="study", required=True)
    m = vsub.add_parser("mms", help="manufactured-solution convergence")
    m.add_argument("--levels", type=int, default=3)
    m.set_defaults(func=verify_mms)
    o = vsub.add_parser("oracle", help="semi-implicit vs explicit reference")
    o.set_defaults(func=verify_oracle)

    p = sub.add_parser("audit", help="bounds monitor over a stored series")
    p.add_argument("--series", required=True)
    p.set_defaults(func=audit)

    p = sub.add_parser("scenarios", help="builtin presets")
    ssub = p.add_subparsers(dest="action", required=True)
    ssub.add_parser("list").set_defaults(func=list_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    if getattr(args, "study", None) == "mms" and args.levels < 3:
        print("verify mms needs --levels >= 3", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except outputs.FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
