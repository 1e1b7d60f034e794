"""Command-line experiment runner: ``gen-noisemap``, ``sweep``, ``anneal``, ``report``.

Every command writes CSV/JSON outputs into ``--out`` together with a
``manifest.json`` recording the configuration, seeds, package version and a
SHA-256 of each output. Failures exit with status 2 and a JSON error object
on stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
import zlib
from dataclasses import dataclass
from itertools import islice
from pathlib import Path

import numpy as np

from . import __version__
from .annealer import CostOracle, Schedule, anneal, locality, random_baseline
from .circuits import (Circuit, build_clifford_conjugation, build_ghz, build_qft_basis, build_random_circuit,
                       build_swapnet)
from .devicegraph import (Assignment, NeighborhoodSpec, NoiseGraph, WeightRanges, _iter_paths, builtin_layout,
                          layout_text, load_layout, planted_noisegraph, random_noisegraph)
from .errors import BudgetExceeded, EchoAssignError, InsufficientData
from .metrics import confusion_for, evaluate_assignments, extrapolate_f, loschmidt_sampled_batch
from .readout import reject
from .simulator import NoiseModel
from .stats import PairedSample, bootstrap_mean_ci, bootstrap_std, conditional_curve, kendall_tau_b

SWEEP_BUDGET = 10**6
SWEEP_COLUMNS = ["path", "F", "F_LE", "F0", "F_extrap", "F_LE_rand_mean", "F_LE_rand_std",
                 "F_LE_shots", "F_LE_shots_stderr", "readout_max", "reject"]


def stream(seed: int, trial: int, purpose: str) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, trial, purpose)``."""
    key = np.random.SeedSequence([seed, trial, zlib.crc32(purpose.encode())])
    return np.random.Generator(np.random.Philox(key))


# -- shared helpers ------------------------------------------------------------------


def load_graph(spec: str) -> NoiseGraph:
    if spec.startswith("builtin:"):
        return builtin_layout(spec.split(":", 1)[1])
    return load_layout(spec)


def build_circuit(args) -> Circuit:
    fam, n = args.circuit, args.n
    if fam == "ghz":
        return build_ghz(n)
    if fam == "swapnet":
        hops = n - 1 if args.hops is None else args.hops
        return build_swapnet(n, complex(args.alpha), complex(args.beta), hops)
    if fam == "clifford":
        return build_clifford_conjugation(n, args.circuit_seed)
    if fam == "qft":
        return build_qft_basis(n, args.j)
    if fam == "random":
        return build_random_circuit(n, args.depth, args.circuit_seed)
    raise ValueError(f"unknown circuit family {fam!r}")


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, args, outputs: list[Path], seeds: dict) -> Path:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "seeds": seeds,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, default=str) + "\n")
    return path


def read_sweep(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in SWEEP_COLUMNS[1:-1]:
            r[k] = float(r[k]) if r.get(k) not in (None, "") else float("nan")
        r["reject"] = r.get("reject") == "1"
    return rows


# -- commands ----------------------------------------------------------------------------


def cmd_gen_noisemap(args) -> list[Path]:
    if args.rows < 2 or args.cols < 2:
        raise ValueError("grid must be at least 2x2")
    rng = stream(args.seed, 0, "noisemap")
    ranges = WeightRanges(tuple(args.eps_range), tuple(args.eta_range), tuple(args.readout_range))
    if args.planted:
        g, planted = planted_noisegraph(args.rows, args.cols, args.planted_n, rng, ranges,
                                        gradient=args.gradient, placement=args.placement)
        data = json.loads(layout_text(g))
        data["planted"] = list(planted.path)
        text = json.dumps(data, indent=1) + "\n"
    else:
        text = layout_text(random_noisegraph(args.rows, args.cols, rng, ranges))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "layout.json"
    path.write_text(text)
    return [path]


def _paths_within_budget(g: NoiseGraph, n: int) -> list[Assignment]:
    paths = list(islice(_iter_paths(g, n), SWEEP_BUDGET + 1))
    if len(paths) > SWEEP_BUDGET:
        raise BudgetExceeded(f"more than {SWEEP_BUDGET} assignments of length {n}")
    return [Assignment(p) for p in paths]


def cmd_sweep(args) -> list[Path]:
    g = load_graph(args.layout)
    c = build_circuit(args)
    paths = _paths_within_budget(g, args.n)
    if not paths:
        raise InsufficientData(f"no length-{args.n} path on the layout")
    nm = NoiseModel(args.noise)
    records = evaluate_assignments(c, paths, g, nm, r=args.rand_r, seed=args.seed)
    if args.shots:
        est, err = loschmidt_sampled_batch(c, paths, g, nm, args.shots, stream(args.seed, 0, "shots"),
                                           readout=True, correct_readout=args.correct_readout)
    else:
        est = err = [None] * len(paths)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for rec, e, s in zip(records, est, err):
            verdict = reject(confusion_for(g, rec.assignment), args.reject_threshold)
            f_ex = extrapolate_f(rec.F_LE, rec.F0) if rec.F0 > 0 else None
            rand = (rec.F_LE_rand_mean, rec.F_LE_rand_std) if args.rand_r else (None, None)
            w.writerow([str(rec.assignment), _fmt(rec.F), _fmt(rec.F_LE), _fmt(rec.F0), _fmt(f_ex),
                        _fmt(rand[0]), _fmt(rand[1]), _fmt(e), _fmt(s), _fmt(verdict.worst_rate),
                        int(verdict.rejected)])
    return [path]


@dataclass
class _AnnealSetup:
    graph: NoiseGraph
    n: int
    table: dict | None
    oracle_fn: object


def _anneal_setup(args) -> _AnnealSetup:
    g = load_graph(args.layout)
    if args.sweep:
        rows = read_sweep(args.sweep)
        table = {Assignment.parse(r["path"]): 1.0 - r[args.metric] for r in rows}
        n = len(next(iter(table)))
        return _AnnealSetup(g, n, table, table.__getitem__)
    c = build_circuit(args)
    nm = NoiseModel(args.noise)

    def cost(a: Assignment) -> float:
        return 1.0 - evaluate_assignments(c, [a], g, nm)[0].F_LE

    return _AnnealSetup(g, args.n, None, cost)


def cmd_anneal(args) -> list[Path]:
    setup = _anneal_setup(args)
    schedule = Schedule.logarithmic(args.t0) if args.schedule == "logarithmic" else Schedule.exponential(args.t0, args.sa_alpha)
    spec = NeighborhoodSpec(args.k)
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    outputs = []
    summary = []
    shared = CostOracle(setup.oracle_fn)
    for trial in range(args.trials):
        oracle = shared.fresh()
        trace = anneal(setup.graph, spec, oracle, schedule, args.steps,
                       rng=stream(args.seed, trial, "anneal"), n=setup.n)
        outputs.append(trace.write_csv(out / "traces" / f"trial_{trial:05d}.csv"))
        summary.append((trial, oracle.n_s, trace.best[0], 1.0 - trace.best_cost))
    baseline = []
    if setup.table is not None:
        costs = np.array(list(setup.table.values()))
        for trial, n_s, _, _ in summary:
            best = random_baseline(costs, n_s, 1, stream(args.seed, trial, "baseline"))[0]
            baseline.append(1.0 - best)
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "n_s", "best_path", "best_F_LE", "baseline_best_F_LE"])
        for i, (trial, n_s, a, f) in enumerate(summary):
            w.writerow([trial, n_s, str(a), _fmt(f), _fmt(baseline[i]) if baseline else ""])
    outputs.append(path)
    result = {"trials": args.trials, "mean_best_F_LE": float(np.mean([s[3] for s in summary])),
              "mean_n_s": float(np.mean([s[1] for s in summary]))}
    if baseline:
        diff = np.array([s[3] for s in summary]) - np.array(baseline)
        mean, lo, hi = bootstrap_mean_ci(diff, rng=stream(args.seed, 0, "bootstrap"))
        boot = stream(args.seed, 0, "bootstrap-std")
        means = diff[boot.integers(0, len(diff), (1000, len(diff)))].mean(axis=1)
        result.update({"mean_baseline_F_LE": float(np.mean(baseline)), "mean_improvement": mean,
                       "improvement_ci95": [lo, hi], "improvement_bootstrap_std": float(means.std(ddof=1)),
                       "global_best_F_LE": float(1.0 - min(setup.table.values()))})
        result["fraction_at_global_best"] = float(np.mean(
            [abs(s[3] - result["global_best_F_LE"]) <= 1e-12 for s in summary]))
    jpath = out / "summary.json"
    jpath.write_text(json.dumps(result, indent=1) + "\n")
    outputs.append(jpath)
    return outputs


def cmd_report(args) -> list[Path]:
    rows = read_sweep(args.sweep)
    if len(rows) < 2:
        raise InsufficientData("report needs at least two sweep rows")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    f = np.array([r["F"] for r in rows])
    metrics = {"F_LE": np.array([r["F_LE"] for r in rows]), "F0": np.array([r["F0"] for r in rows])}
    rand = np.array([r["F_LE_rand_mean"] for r in rows])
    if np.all(np.isfinite(rand)):
        metrics["F_LE_rand_mean"] = rand
    report = {"rows": len(rows), "tau_b": {}, "tau_b_bootstrap_std": {}, "conditional": {}}
    for name, x in metrics.items():
        s = PairedSample(x, f)
        try:
            report["tau_b"][name] = kendall_tau_b(s)
            report["tau_b_bootstrap_std"][name] = bootstrap_std(kendall_tau_b, s, args.resamples,
                                                                stream(args.seed, 0, f"tau:{name}"))
        except EchoAssignError:
            report["tau_b"][name] = report["tau_b_bootstrap_std"][name] = None
        report["conditional"][name] = {str(k): v for k, v in conditional_curve(s).items()}
    outputs = []
    tpath = out / "tau.csv"
    with tpath.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "tau_b", "bootstrap_std"])
        for name in metrics:
            w.writerow([name, _fmt(report["tau_b"][name]), _fmt(report["tau_b_bootstrap_std"][name])])
    outputs.append(tpath)
    cpath = out / "conditional.csv"
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + list(metrics))
        for k in range(5, 100, 5):
            w.writerow([k] + [_fmt(report["conditional"][m][str(k)]) for m in metrics])
    outputs.append(cpath)
    if args.layout:
        g = load_graph(args.layout)
        n = len(Assignment.parse(rows[0]["path"]))
        order = {a: i for i, a in enumerate(g.path_space(n).paths)}
        values = np.full(len(order), np.nan)
        for r in rows:
            values[order[Assignment.parse(r["path"])]] = r["F_LE"]
        if np.any(np.isnan(values)):
            raise InsufficientData("locality needs a complete sweep over the layout")
        loc = locality(g, values, n, ks=range(args.max_k + 1))
        report["locality"] = {str(k): v for k, v in loc.items()}
        lpath = out / "locality.csv"
        with lpath.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "mean_abs_delta_F_LE"])
            for k, v in loc.items():
                w.writerow([k, _fmt(v)])
        outputs.append(lpath)
    jpath = out / "report.json"
    jpath.write_text(json.dumps(report, indent=1) + "\n")
    outputs.append(jpath)
    return outputs


# -- argument parsing ---------------------------------------------------------------------


def _circuit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--circuit", default="ghz", choices=["ghz", "swapnet", "clifford", "qft", "random"])
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--circuit-seed", type=int, default=0)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--hops", type=int, default=None)
    p.add_argument("--alpha", default="1")
    p.add_argument("--beta", default="0")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--noise", default="local", choices=["none", "local", "global"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="echoassign")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-noisemap", help="write a random (optionally planted) grid layout")
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--cols", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-range", type=float, nargs=2, default=(0.005, 0.02))
    p.add_argument("--eta-range", type=float, nargs=2, default=(0.02, 0.08))
    p.add_argument("--readout-range", type=float, nargs=2, default=(0.0, 0.0))
    p.add_argument("--planted", action="store_true")
    p.add_argument("--planted-n", type=int, default=5)
    p.add_argument("--gradient", type=float, default=1.0)
    p.add_argument("--placement", default="perimeter", choices=["perimeter", "any"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_noisemap)

    p = sub.add_parser("sweep", help="score every assignment of a circuit on a layout")
    p.add_argument("--layout", required=True, help="layout JSON path or builtin:rainbow / builtin:weber")
    _circuit_args(p)
    p.add_argument("--rand-r", type=int, default=0)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--correct-readout", action="store_true")
    p.add_argument("--reject-threshold", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("anneal", help="simulated annealing campaign")
    p.add_argument("--layout", required=True)
    p.add_argument("--sweep", help="precomputed sweep CSV (offline mode)")
    p.add_argument("--metric", default="F_LE", choices=["F_LE", "F", "F0"])
    _circuit_args(p)
    p.add_argument("--schedule", default="exponential", choices=["exponential", "logarithmic"])
    p.add_argument("--t0", type=float, default=0.10)
    p.add_argument("--sa-alpha", type=float, default=0.987)
    p.add_argument("--steps", type=int, default=150)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("report", help="concordance statistics for a sweep")
    p.add_argument("--sweep", required=True)
    p.add_argument("--layout", help="layout for the locality table")
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outputs = args.func(args)
        write_manifest(Path(args.out), args.command, args, outputs, {"seed": getattr(args, "seed", None)})
    except (EchoAssignError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
