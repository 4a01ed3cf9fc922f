"""Command line front end: run solvers, certify stepsizes, sweep benchmarks.

Subcommands
-----------
run
    Solve one sparse-PCA instance, write a per-iteration trace CSV plus a
    summary record, and exit with a code describing the termination:
    0 converged, 2 iteration cap, 3 staleness violation, 4 rejected
    stepsize. Config comes from defaults, then an optional preset, then
    an optional JSON file, then flags; each layer overrides the previous.
certify
    Print the descent margin for a penalty, or the minimal feasible
    penalty when none is given.
bench
    Run a campaign (named preset or JSON campaign file) and write the
    aggregate CSV.
check
    Replay the residual checks on a stored trace. Needs the state file
    written by ``run --full-trace``.

All CSV output is UTF-8 with LF line endings; floats are written with
``repr`` so identical runs produce byte-identical files.
"""

import argparse
import json
import os
import sys
from dataclasses import fields

import numpy as np

from .algorithms import RunConfig, run
from .benchmark import (
    BENCH_PRESETS,
    CampaignCell,
    RUN_PRESETS,
    SparsePcaSpec,
    bench_preset,
    campaign_csv,
    generate,
    run_campaign,
    run_preset,
)
from .diagnostics import trace_residuals
from .problems import ConcaveQuadratic, ConsensusProblem, IterationTrace, SolverState
from .stepsize import certify, descent_margin, minimal_rho

__all__ = ["main", "build_parser", "trace_csv", "save_states", "load_run"]

TRACE_COLUMNS = ("iter", "L", "f", "feas_gap", "prox_grad_norm", "e",
                 "set_size")

# exit codes for the run subcommand
_TERMINATION_CODES = {
    "converged": 0,
    "max_iters": 2,
    "staleness_violation": 3,
    "infeasible_stepsize": 4,
}

_RUN_FIELDS = tuple(f.name for f in fields(RunConfig))
_INSTANCE_FIELDS = tuple(f.name for f in fields(SparsePcaSpec))
_CELL_FIELDS = tuple(f.name for f in fields(CampaignCell))

_DEFAULT_INSTANCE = dict(dim=50, num_components=5, rows=20,
                         nonzero_prob=0.1, l1_weight=0.0, seed=1)


class CliError(Exception):
    """Configuration or input problem; reported on stderr with exit 1."""


# -- trace persistence -------------------------------------------------------

def trace_csv(trace):
    """Per-iteration trace as CSV text; one row per completed update."""
    lines = [",".join(TRACE_COLUMNS)]
    for i in range(len(trace)):
        lines.append(",".join((
            str(int(trace.sim_time[i])),
            repr(float(trace.lagrangian[i])),
            repr(float(trace.objective[i])),
            repr(float(trace.feas_gap[i])),
            repr(float(trace.prox_grad_norm[i])),
            repr(float(trace.measure[i])),
            str(int(trace.collected[i])),
        )))
    return "\n".join(lines) + "\n"


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _states_path(csv_path):
    base = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return base + ".states.npz"


def save_states(path, problem, result, algorithm):
    """Store snapshots plus instance data so checks can rebuild the run."""
    states = result.trace.states
    arrays = {
        "x_hist": np.stack([s.x for s in states]),
        "x_local_hist": np.stack([s.x_local for s in states]),
        "y_hist": np.stack([s.y for s in states]),
        "grad_hist": np.stack([s.grad_stored for s in states]),
        "stale_hist": np.stack([s.stale_index for s in states]).astype(np.int64),
        "iteration_hist": np.array([s.iteration for s in states],
                                   dtype=np.int64),
        "rho": np.asarray(result.rho, dtype=float),
        "delay_bounds": np.array([c.delay_bound for c in result.certificates],
                                 dtype=float),
        "l1_weight": np.float64(problem.l1_weight),
        "radius": np.float64(problem.radius),
        "algorithm": np.str_(algorithm),
    }
    for k, comp in enumerate(problem.components):
        arrays["B_%d" % k] = comp.B
    np.savez_compressed(path, **arrays)


def _parse_trace_csv(text):
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != ",".join(TRACE_COLUMNS):
        raise CliError("trace file is missing the expected header row")
    trace = IterationTrace()
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise CliError("malformed trace row: %r" % ln)
        it, lag, obj, gap, pg, e, size = parts
        trace.append(float(lag), float(obj), float(gap), float(pg),
                     float(e), float(it), int(size))
    return trace


def load_run(csv_path):
    """Rebuild (problem, trace, rho, delay_bounds, algorithm) from run output."""
    if not os.path.exists(csv_path):
        raise CliError("no trace file at %r" % csv_path)
    npz_path = _states_path(csv_path)
    if not os.path.exists(npz_path):
        raise CliError(
            "no state file at %r; checks need the per-iteration snapshots "
            "written by run --full-trace" % npz_path)
    with open(csv_path, "r", encoding="utf-8") as fh:
        trace = _parse_trace_csv(fh.read())
    with np.load(npz_path) as data:
        num = 0
        while "B_%d" % num in data:
            num += 1
        if num == 0:
            raise CliError("state file holds no component data matrices")
        components = [ConcaveQuadratic(data["B_%d" % k]) for k in range(num)]
        problem = ConsensusProblem(
            components, l1_weight=float(data["l1_weight"]),
            radius=float(data["radius"]))
        states = [
            SolverState(
                iteration=int(data["iteration_hist"][i]),
                x=data["x_hist"][i],
                x_local=data["x_local_hist"][i],
                y=data["y_hist"][i],
                grad_stored=data["grad_hist"][i],
                stale_index=data["stale_hist"][i],
            )
            for i in range(data["x_hist"].shape[0])
        ]
        rho = np.asarray(data["rho"], dtype=float)
        delay_bounds = np.asarray(data["delay_bounds"], dtype=float)
        algorithm = str(data["algorithm"][()])
    trace.states = states
    return problem, trace, rho, delay_bounds, algorithm


# -- config assembly ---------------------------------------------------------

def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError("cannot read %r: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise CliError("cannot parse %r: %s" % (path, exc))


def _merge_config_file(cfg, inst, path):
    data = _load_json(path)
    if not isinstance(data, dict):
        raise CliError("config root must be a JSON object")
    for key, value in data.items():
        if key == "instance":
            if not isinstance(value, dict):
                raise CliError("config key 'instance' must be an object")
            for ikey, ival in value.items():
                if ikey not in _INSTANCE_FIELDS:
                    raise CliError("unknown config key 'instance.%s'" % ikey)
                inst[ikey] = ival
        elif key in _RUN_FIELDS:
            cfg[key] = value
        else:
            raise CliError("unknown config key '%s'" % key)


def _parse_scalar_or_list(text, convert, flag):
    try:
        parts = [convert(p) for p in text.split(",")]
    except ValueError:
        raise CliError("bad value for %s: %r" % (flag, text))
    return parts[0] if len(parts) == 1 else parts


def _apply_run_flags(cfg, inst, args):
    if args.algo is not None:
        cfg["algorithm"] = args.algo
    if args.rho is not None:
        cfg["rho"] = ("auto" if args.rho == "auto" else
                      _parse_scalar_or_list(args.rho, float, "--rho"))
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.max_iters is not None:
        cfg["max_iters"] = args.max_iters
    if args.epsilon is not None:
        cfg["epsilon"] = args.epsilon
    if args.delay_bound is not None:
        cfg["delay_bound"] = _parse_scalar_or_list(
            args.delay_bound, float, "--delay-bound")
    if args.window is not None:
        cfg["window"] = args.window
    if args.enforcement is not None:
        cfg["enforcement"] = args.enforcement
    if args.init is not None:
        cfg["init"] = args.init
    if args.force:
        cfg["force"] = True
    if args.full_trace:
        cfg["full_trace"] = True
    if args.N is not None:
        inst["dim"] = args.N
    if args.K is not None:
        inst["num_components"] = args.K
    if args.M is not None:
        inst["rows"] = args.M
    if args.p is not None:
        inst["nonzero_prob"] = args.p
    if args.lam is not None:
        inst["l1_weight"] = args.lam
    if args.instance_seed is not None:
        inst["seed"] = args.instance_seed


def _build_run_config(cfg):
    try:
        return RunConfig(**cfg)
    except TypeError as exc:
        raise CliError("bad run configuration: %s" % exc)


# -- subcommands -------------------------------------------------------------

def cmd_run(args):
    inst = dict(_DEFAULT_INSTANCE)
    cfg = {f.name: getattr(RunConfig(), f.name) for f in fields(RunConfig)}
    if args.preset is not None:
        try:
            preset_inst, preset_cfg = run_preset(args.preset)
        except ValueError as exc:
            raise CliError(str(exc))
        inst.update(preset_inst)
        cfg.update(preset_cfg)
    if args.config is not None:
        _merge_config_file(cfg, inst, args.config)
    _apply_run_flags(cfg, inst, args)

    if args.dump_config:
        print(json.dumps(dict(cfg, instance=inst), sort_keys=True, indent=2))
        return 0

    config = _build_run_config(cfg)
    try:
        spec = SparsePcaSpec(**inst)
    except (TypeError, ValueError) as exc:
        raise CliError("bad instance: %s" % exc)
    problem = generate(spec)
    try:
        result = run(problem, config)
    except ValueError as exc:
        raise CliError(str(exc))

    out = args.out
    _write_text(out, trace_csv(result.trace))
    wrote_states = False
    if (result.trace.states is not None
            and len(result.trace.states) == len(result.trace) + 1
            and len(result.trace.states) > 0):
        save_states(_states_path(out), problem, result, config.algorithm)
        wrote_states = True

    summary = {
        "algorithm": config.algorithm,
        "termination": result.termination,
        "iterations": result.iterations,
        "updates": result.updates,
        "final_e": result.final_measure,
        "staleness_violations": len(result.violations),
        "trace": out,
        "states": _states_path(out) if wrote_states else None,
    }
    base = out[:-4] if out.endswith(".csv") else out
    _write_text(base + ".summary.json",
                json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return _TERMINATION_CODES[result.termination]


def cmd_certify(args):
    if args.L <= 0:
        raise CliError("--L must be positive")
    if args.T < 0:
        raise CliError("--T must be nonnegative")
    if args.rho is not None:
        cert = certify(args.rho, args.L, args.T, args.curvature)
        record = {
            "rho": cert.rho,
            "L": cert.lipschitz,
            "T": cert.delay_bound,
            "class": cert.curvature,
            "margin": cert.margin,
            "feasible": cert.feasible,
            "rule": cert.rule,
        }
        print(json.dumps(record, sort_keys=True))
        return 0 if cert.feasible else 4
    rho_min = minimal_rho(args.L, args.T, args.curvature,
                          precision=args.precision)
    record = {
        "L": args.L,
        "T": args.T,
        "class": args.curvature,
        "min_rho": rho_min,
        "margin": descent_margin(rho_min, args.L, args.T, args.curvature),
        "rule": certify(rho_min, args.L, args.T, args.curvature).rule,
    }
    print(json.dumps(record, sort_keys=True))
    return 0


def cmd_bench(args):
    if args.campaign is not None:
        data = _load_json(args.campaign)
        if not isinstance(data, dict) or not data.get("cells"):
            raise CliError("campaign file %r lists no cells" % args.campaign)
        cells = []
        for entry in data["cells"]:
            unknown = set(entry) - set(_CELL_FIELDS)
            if unknown:
                raise CliError("unknown campaign cell key '%s'"
                               % sorted(unknown)[0])
            try:
                cells.append(CampaignCell(**entry))
            except TypeError as exc:
                raise CliError("bad campaign cell: %s" % exc)
        seeds = data.get("seeds", 20)
    else:
        scale = "paper" if args.paper else "desk"
        try:
            cells, seeds = bench_preset(args.preset, scale)
        except ValueError as exc:
            raise CliError(str(exc))
    if args.seeds is not None:
        seeds = args.seeds

    progress = None
    if args.progress:
        def progress(cell, seed, out):
            sys.stderr.write("%s N=%d K=%d T=%g seed=%d: %s %d\n" % (
                cell.algorithm, cell.dim, cell.num_components,
                cell.delay_label, seed, out.termination, out.iterations))
            sys.stderr.flush()

    rows = run_campaign(cells, seeds, max_iters=args.max_iters,
                        epsilon=args.epsilon, progress=progress)
    text = campaign_csv(rows)
    _write_text(args.out, text)
    sys.stdout.write(text)
    return 0


def cmd_check(args):
    problem, trace, rho, delay_bounds, algorithm = load_run(args.trace)
    if algorithm == "sync_admm":
        raise CliError(
            "trace was produced by exact subproblem minimization; the "
            "residual checks apply to proximal-update runs only")
    report = trace_residuals(
        problem, trace, rho, delay_bounds,
        dual_tol=args.dual_tol, descent_tol=args.descent_tol,
        telescope_tol=args.telescope_tol, dual_diff_tol=args.dual_diff_tol,
        lower_tol=args.lower_tol)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


# -- parser ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="apadmm",
        description="Asynchronous proximal consensus solvers on simulated "
                    "star networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one instance and write its trace")
    p.add_argument("--config", metavar="FILE",
                   help="JSON config; flags override file values")
    p.add_argument("--preset", choices=sorted(RUN_PRESETS),
                   help="named instance + run configuration")
    p.add_argument("--algo", choices=(
        "async_padmm", "sync_padmm", "sync_admm",
        "async_padmm_incremental_variant"))
    p.add_argument("--rho", help="'auto', a number, or comma list per worker")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delay-bound", help="number or comma list per worker")
    p.add_argument("--window", type=float)
    p.add_argument("--enforce", dest="enforcement", action="store_const",
                   const="enforce", help="abort when staleness exceeds the bound")
    p.add_argument("--observe", dest="enforcement", action="store_const",
                   const="observe", help="record staleness violations only")
    p.add_argument("--init", choices=("zero", "random_ball"))
    p.add_argument("--force", action="store_true",
                   help="run even with an uncertified stepsize")
    p.add_argument("--full-trace", action="store_true",
                   help="also store per-iteration state snapshots for check")
    p.add_argument("--N", type=int, help="instance dimension")
    p.add_argument("--K", type=int, help="number of components")
    p.add_argument("--M", type=int, help="rows per component")
    p.add_argument("--p", type=float, help="nonzero probability")
    p.add_argument("--lam", type=float, help="l1 weight")
    p.add_argument("--instance-seed", type=int)
    p.add_argument("--out", default="trace.csv", metavar="FILE")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective config as JSON and exit")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify",
                       help="stepsize feasibility and minimal penalties")
    p.add_argument("--L", type=float, required=True,
                   help="gradient Lipschitz constant")
    p.add_argument("--T", type=float, required=True, help="staleness bound")
    p.add_argument("--class", dest="curvature", required=True,
                   choices=("general", "convex", "concave"))
    p.add_argument("--rho", type=float,
                   help="penalty to certify; omit to solve for the minimum")
    p.add_argument("--precision", type=float, default=1e-9)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bench", help="run a benchmark campaign")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=BENCH_PRESETS)
    group.add_argument("--campaign", metavar="FILE",
                       help="JSON file with 'cells' and optional 'seeds'")
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--desk", action="store_true",
                       help="scaled-down sweep (default)")
    scale.add_argument("--paper", action="store_true",
                       help="full-size sweep; slow")
    p.add_argument("--seeds", type=int, help="override the seed count")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--out", default="campaign.csv", metavar="FILE")
    p.add_argument("--progress", action="store_true",
                   help="per-run progress on stderr")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="replay residual checks on a trace")
    p.add_argument("trace", help="trace CSV written by run")
    p.add_argument("--dual-tol", type=float, default=1e-9)
    p.add_argument("--descent-tol", type=float, default=1e-9)
    p.add_argument("--telescope-tol", type=float, default=1e-6)
    p.add_argument("--dual-diff-tol", type=float, default=1e-9)
    p.add_argument("--lower-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
