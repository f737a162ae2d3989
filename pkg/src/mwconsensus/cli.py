"""Command-line front end.

Subcommands::

    mwconsensus check SCENARIO            validate a scenario document
    mwconsensus spectrum SCENARIO         Laplacian spectra and nullity
    mwconsensus run SCENARIO [...]        simulate and write artifacts
    mwconsensus replicate-paper {leaderless,lf} [...]
                                          run the bundled reference scenarios
    mwconsensus sweep SCENARIO [...]      run many scenarios concurrently

``SCENARIO`` is a path to a scenario JSON document, or one of the tokens
``builtin:leaderless`` / ``builtin:lf`` naming the bundled scenarios.

Exit codes are stable: 0 success, 1 validation failure, 2 divergence,
3 I/O error.  Artifact bytes are deterministic for a fixed seed, so runs can
be diffed across machines; wall-clock timing is printed, never written into
the artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, builtin, mwgraph, scenario_io, sim, trigger
from .errors import Diverged, GraphFormatError, InvalidScenario, MwcError
from .linalg import sym_eigen
from .trigger import LeaderFollower

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGED = 2
EXIT_IO = 3

BUILTIN_TOKENS = ("builtin:leaderless", "builtin:lf")


def _load(source: str, overrides: argparse.Namespace):
    """Resolve a scenario source (path or builtin token) plus CLI overrides."""
    if source in BUILTIN_TOKENS:
        which = source.split(":", 1)[1]
        scenario = _builtin_scenario(which, overrides)
        outputs = dict(scenario_io.DEFAULT_OUTPUTS)
    else:
        scenario, outputs = scenario_io.load_scenario_file(source)
        scenario = _apply_overrides(scenario, overrides)
    return scenario, outputs


def _builtin_scenario(which: str, overrides: argparse.Namespace):
    kwargs = {}
    if getattr(overrides, "seed", None) is not None:
        kwargs["seed"] = overrides.seed
    if getattr(overrides, "dt", None) is not None:
        kwargs["dt"] = overrides.dt
    if getattr(overrides, "horizon", None) is not None:
        kwargs["horizon"] = overrides.horizon
    if getattr(overrides, "baseline", None) is not None:
        kwargs["baseline"] = overrides.baseline
    if getattr(overrides, "raw_first_edge", False):
        kwargs["raw_first_edge"] = True
    if which == "leaderless":
        return builtin.leaderless_scenario(**kwargs)
    if which == "lf":
        return builtin.leader_follower_scenario(**kwargs)
    raise GraphFormatError(f"unknown builtin scenario {which!r}")


def _apply_overrides(scenario: sim.Scenario, overrides: argparse.Namespace):
    changes = {}
    if getattr(overrides, "dt", None) is not None:
        changes["dt"] = overrides.dt
    if getattr(overrides, "horizon", None) is not None:
        changes["horizon"] = overrides.horizon
    if getattr(overrides, "seed", None) is not None:
        changes["seed"] = overrides.seed
    if getattr(overrides, "baseline", None) is not None:
        changes["baseline"] = overrides.baseline
    if not changes:
        return scenario
    return sim.Scenario(
        graph=scenario.graph, mode=scenario.mode, params=scenario.params,
        dt=changes.get("dt", scenario.dt),
        horizon=changes.get("horizon", scenario.horizon),
        x0=scenario.x0,
        seed=changes.get("seed", scenario.seed),
        baseline=changes.get("baseline", scenario.baseline))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_artifacts(record, outdir: Path, formats=("csv", "json"),
                    summary_extra=None) -> dict:
    """Write trajectory.csv, chi.csv, events.csv, summary.json, config.json.

    Returns the summary document.  All bytes depend only on the scenario and
    seed (timing is deliberately excluded).
    """
    outdir.mkdir(parents=True, exist_ok=True)
    sc = record.scenario
    n, d = record.n, record.d
    if "csv" in formats:
        # Native-float lists keep the big writes out of numpy scalar overhead.
        times = record.times.tolist()
        labels = [f",{i},{c}," for i in range(n) for c in range(d)]
        with open(outdir / "trajectory.csv", "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write("time,agent,dim,x,xhat,qhat\n")
            states = record.states.tolist()
            broadcasts = record.broadcasts.tolist()
            controls = record.controls.tolist()
            for k, t in enumerate(times):
                ts = repr(t)
                row_x, row_h, row_q = states[k], broadcasts[k], controls[k]
                fh.writelines(
                    f"{ts}{labels[c]}{row_x[c]!r},{row_h[c]!r},{row_q[c]!r}\n"
                    for c in range(n * d))
        with open(outdir / "chi.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("time,agent,chi\n")
            chi = record.chi.tolist()
            for k, t in enumerate(times):
                ts = repr(t)
                row = chi[k]
                fh.writelines(f"{ts},{i},{row[i]!r}\n" for i in range(n))
        with open(outdir / "events.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("agent,time\n")
            for i, ev in enumerate(record.events):
                fh.writelines(f"{i},{t!r}\n" for t in ev.tolist())

    summary_doc = _summary_doc(record)
    if summary_extra:
        summary_doc.update(summary_extra)
    if "json" in formats:
        with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary_doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(outdir / "config.json", "w", encoding="utf-8") as fh:
            fh.write(scenario_io.dump_scenario(sc))
    return summary_doc


def _summary_doc(record) -> dict:
    sc = record.scenario
    doc = {
        "dt": sc.dt,
        "T": sc.horizon,
        "seed": sc.seed,
        "baseline": sc.baseline,
        "final_state": [float(v) for v in record.states[-1]],
        "limit_state": (None if record.limit_state is None
                        else [float(v) for v in record.limit_state]),
    }
    if record.limit_state is not None:
        summary = analysis.event_stats(record)
        doc.update(summary.as_dict(include_duration=False))
    else:
        dwell = sim.min_inter_event(record)
        doc.update({
            "mode": ("leader-follower" if isinstance(sc.mode, LeaderFollower)
                     else "leaderless"),
            "n": record.n,
            "d": record.d,
            "event_counts": [len(e) for e in record.events],
            "min_dwell": [float(x) for x in dwell.min_dwell],
            "max_consecutive": [int(x) for x in dwell.max_consecutive],
            "chi_floor_margins": [float(x) for x in sim.chi_floor_check(record)],
            "warnings": list(record.warnings),
        })
    return doc


def cmd_check(args) -> int:
    scenario, _ = _load(args.scenario, args)
    g = scenario.graph
    print(f"graph: n={g.n} agents, d={g.d}, {len(g.edges)} edges")
    for e in g.edges:
        print(f"  edge ({e.i},{e.j}): {e.cls.value}")
    bip = mwgraph.detect_structural_balance(g)
    if bip is None:
        print("structural balance: IMBALANCED")
    else:
        print(f"structural balance: balanced; "
              f"group1={sorted(bip.group1)} group2={sorted(bip.group2)}")
    report = mwgraph.verify_assumption1(g)
    print(f"assumption 1 (balance + exact consensus kernel): "
          f"{'holds' if report.holds else 'FAILS'} "
          f"(nullity {report.nullity}, subspace residual "
          f"{report.subspace_residual:.3g})")
    ok = report.holds
    lf = isinstance(scenario.mode, LeaderFollower)
    if lf:
        a2 = mwgraph.verify_assumption2(g, scenario.mode.coupling)
        print(f"assumption 2 (extended balance + definite grounding): "
              f"{'holds' if a2 else 'FAILS'}")
        ok = ok and a2
    mu_row = [trigger.mu_bar(i, g) if g.degree(i) else float("nan")
              for i in range(g.n)]
    coupling = scenario.mode.coupling if lf else mwgraph.InputCoupling.empty()
    gam_row = [trigger.gamma(i, g, coupling) for i in range(g.n)]
    print("mu_bar: " + "  ".join(f"{v:.4f}" for v in mu_row))
    print("gamma:  " + "  ".join(f"{v:.4f}" for v in gam_row))
    violations = trigger.validate_params(scenario.params, scenario.mode)
    for v in violations:
        print(f"parameter violation: {v}")
    ok = ok and not violations
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_spectrum(args) -> int:
    scenario, _ = _load(args.scenario, args)
    g = scenario.graph
    lap = mwgraph.build_laplacian(g)
    vals = sym_eigen(lap).eigenvalues
    nullity = mwgraph.null_space(lap).shape[1]
    positive = vals[vals > 1e-9 * max(1.0, vals[-1])]
    print("laplacian eigenvalues (ascending):")
    print("  " + "  ".join(f"{v:.6g}" for v in vals))
    print(f"nullity at tolerance: {nullity}")
    if positive.size:
        print(f"smallest positive eigenvalue: {positive[0]:.6g}")
    else:
        print("smallest positive eigenvalue: none")
    if isinstance(scenario.mode, LeaderFollower):
        grounded = mwgraph.build_grounded_laplacian(g, scenario.mode.coupling)
        gvals = sym_eigen(grounded).eigenvalues
        print("grounded laplacian eigenvalues (ascending):")
        print("  " + "  ".join(f"{v:.6g}" for v in gvals))
        print(f"grounded minimum eigenvalue: {gvals[0]:.6g}")
    return EXIT_OK


def _execute(scenario, outputs, args) -> int:
    out_root = Path(args.out) if args.out else Path(outputs["directory"])
    outdir = out_root / scenario_io.run_directory_name(scenario)
    formats = tuple(outputs["formats"])
    started = time.perf_counter()
    try:
        record = sim.run(scenario, check_assumptions=not args.force)
    except InvalidScenario as exc:
        for v in exc.violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        if exc.partial_record is not None:
            write_artifacts(exc.partial_record, outdir, formats,
                            summary_extra={"diverged": True})
            print(f"partial record flushed to {outdir}", file=sys.stderr)
        return EXIT_DIVERGED
    doc = write_artifacts(record, outdir, formats)
    elapsed = time.perf_counter() - started
    print(f"run complete: {outdir}")
    print(f"  events per agent: {doc['event_counts']}")
    if "final_relative_error" in doc:
        print(f"  final bipartite error: {doc['final_bipartite_error']:.6g} "
              f"(relative {doc['final_relative_error']:.6g})")
    for w in doc.get("warnings", []):
        print(f"  warning: {w}")
    print(f"  wall time: {elapsed:.2f} s")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario, outputs = _load(args.scenario, args)
    if args.dump_config:
        sys.stdout.write(scenario_io.dump_scenario(scenario, outputs))
        return EXIT_OK
    return _execute(scenario, outputs, args)


def cmd_replicate(args) -> int:
    token = "builtin:lf" if args.which == "lf" else "builtin:leaderless"
    scenario, outputs = _load(token, args)
    if args.dump_config:
        sys.stdout.write(scenario_io.dump_scenario(scenario, outputs))
        return EXIT_OK
    return _execute(scenario, outputs, args)


def cmd_sweep(args) -> int:
    workers = os.environ.get("MWC_THREADS")
    workers = int(workers) if workers else min(8, os.cpu_count() or 1)

    def one(path: str) -> int:
        local = argparse.Namespace(**vars(args))
        try:
            scenario, outputs = _load(path, local)
        except (OSError, MwcError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_IO if isinstance(exc, OSError) else EXIT_VALIDATION
        print(f"sweep: {path}")
        return _execute(scenario, outputs, local)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        codes = list(pool.map(one, args.scenarios))
    return max(codes) if codes else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwconsensus",
        description="Event-triggered bipartite consensus on matrix-weighted "
                    "networks: validation, simulation, and analytics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_run_flags=True):
        p.add_argument("--dt", type=float, default=None,
                       help="integration step override")
        p.add_argument("--T", dest="horizon", type=float, default=None,
                       help="horizon override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        if with_run_flags:
            p.add_argument("--out", default=None,
                           help="output root directory (default from scenario)")
            p.add_argument("--force", action="store_true",
                           help="run even when the structural assumptions fail")
            p.add_argument("--baseline", choices=(sim.BASELINE_DYNAMIC,
                                                  sim.BASELINE_STATIC),
                           default=None,
                           help="trigger baseline: dynamic threshold (default) "
                                "or the static comparison variant")
            p.add_argument("--dump-config", action="store_true",
                           help="print the canonical scenario document and exit")

    p_check = sub.add_parser("check", help="validate a scenario document")
    p_check.add_argument("scenario")
    add_common(p_check, with_run_flags=False)
    p_check.set_defaults(func=cmd_check)

    p_spec = sub.add_parser("spectrum", help="Laplacian spectra and nullity")
    p_spec.add_argument("scenario")
    add_common(p_spec, with_run_flags=False)
    p_spec.set_defaults(func=cmd_spectrum)

    p_run = sub.add_parser("run", help="simulate a scenario and write artifacts")
    p_run.add_argument("scenario")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("replicate-paper",
                           help="run a bundled reference scenario")
    p_rep.add_argument("which", choices=("leaderless", "lf"))
    p_rep.add_argument("--raw-first-edge", action="store_true",
                       help="feed the stored unsymmetrized first-edge weight "
                            "to the loader (rejected; demonstrates validation)")
    add_common(p_rep)
    p_rep.set_defaults(func=cmd_replicate)

    p_sweep = sub.add_parser("sweep", help="run several scenarios concurrently "
                                           "(MWC_THREADS caps the pool)")
    p_sweep.add_argument("scenarios", nargs="+")
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MwcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
