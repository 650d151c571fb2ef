"""``sched`` command line: build graphs and oracles, schedule, simulate, report.

Exit codes: 0 ok, 2 validation, 3 coverage, 4 parameter, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
from fractions import Fraction

from .errors import ParameterError, SchedError, ValidationError
from .graph import Graph, Partition, load_graph, make_graph, serialize_graph
from .metrics import brute_force_best, efficiency_report, rational_json
from .properties import PropertyMode
from .rng import derive_seed
from .schedulers import PrioritySchedule, random_schedule, tac, tic
from .sim import SimPolicy, dump_chrome_trace, simulate, simulate_cluster, worker_devices
from .synthetic import Shape, SyntheticSpec, expand_to_mr, generate_synthetic, reference_worker
from .timing import (
    TimeOracle,
    bandwidth_oracle,
    declared_oracle,
    estimate_from_traces,
    general_oracle,
    parse_traces,
)

EXIT_IO = 5


class Outputs:
    """Collects artifacts and writes them only once the command has succeeded."""

    def __init__(self):
        self.pending: list[tuple[str, str]] = []

    def add(self, path, text):
        if path:
            self.pending.append((path, text))

    def commit(self):
        written = []
        try:
            for path, text in self.pending:
                with open(path, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
                written.append(path)
        except OSError:
            for p in written:
                try:
                    os.remove(p)
                except OSError:
                    pass
            raise


# --- argument groups ------------------------------------------------------

def _graph_args(p, cluster=True):
    g = p.add_argument_group("graph source")
    g.add_argument("--graph", help="graph JSON file")
    g.add_argument("--shape", choices=[s.value for s in Shape], help="generate a synthetic graph")
    g.add_argument("--layers", type=int, default=3)
    g.add_argument("--params-per-layer", type=int, default=2)
    g.add_argument("--ratio", default="1", help="comm/comp time ratio, e.g. 1 or 1/2")
    g.add_argument("--gen-seed", type=int, default=0)
    if cluster:
        g.add_argument("--workers", type=int, help="expand a worker graph to this many replicas")
        g.add_argument("--ps", type=int, default=1)
        g.add_argument("--ps-op-time", type=int, default=0)


def _oracle_args(p, default="declared"):
    o = p.add_argument_group("time oracle")
    o.add_argument(
        "--oracle", default=default,
        choices=["declared", "general", "traces", "bandwidth", "file"],
    )
    o.add_argument("--traces", help="JSON Lines trace file for --oracle traces")
    o.add_argument("--bandwidth", type=int, help="bytes per µs for --oracle bandwidth")
    o.add_argument("--oracle-file", help="oracle JSON for --oracle file")


def _algo_args(p, choices=("tic", "tac", "random", "none", "file"), default="tac"):
    a = p.add_argument_group("scheduling")
    a.add_argument("--algo", choices=choices, default=default)
    a.add_argument("--mode", choices=[m.value for m in PropertyMode], default="amended")
    a.add_argument("--schedule", help="schedule JSON for --algo file")


def _policy_args(p):
    s = p.add_argument_group("simulation")
    s.add_argument("--enforcement", choices=["counter", "none"], default="counter")
    s.add_argument("--noise", type=float, default=0.0, help="gated reorder probability")
    s.add_argument("--scope", choices=["cluster", "worker"], default="cluster")


def build_parser():
    parser = argparse.ArgumentParser(prog="sched", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of flag values; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = sub.choices

    p = sub.add_parser("validate", help="check a graph file")
    p.add_argument("--graph")

    p = sub.add_parser("generate", help="emit a synthetic worker graph")
    _graph_args(p, cluster=False)
    p.add_argument("--out")

    p = sub.add_parser("expand", help="replicate a worker graph over workers and parameter servers")
    _graph_args(p)
    p.add_argument("--out")

    p = sub.add_parser("oracle", help="build a time oracle")
    _graph_args(p)
    _oracle_args(p)
    p.add_argument("--out")

    p = sub.add_parser("schedule", help="compute recv priorities")
    _graph_args(p)
    _oracle_args(p)
    _algo_args(p, choices=("tic", "tac", "random"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="simulate one iteration")
    _graph_args(p)
    _oracle_args(p)
    _algo_args(p)
    _policy_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.add_argument("--trace", help="Chrome trace JSON output")

    p = sub.add_parser("sweep", help="simulate over many seeds")
    _graph_args(p)
    _oracle_args(p)
    _algo_args(p, default="random")
    _policy_args(p)
    p.add_argument("--seeds", default="0..9", help="a..b inclusive range and/or comma list")
    p.add_argument("--csv")
    p.add_argument("--report")

    p = sub.add_parser("bruteforce", help="exhaust recv permutations")
    _graph_args(p, cluster=False)
    _oracle_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-recvs", type=int, default=8)
    p.add_argument("--out")

    p = sub.add_parser("report", help="bounds, efficiency and speedup for a makespan")
    _graph_args(p)
    _oracle_args(p)
    p.add_argument("--makespan", type=int)
    p.add_argument("--out")
    return parser


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config, encoding="utf-8") as f:
                cfg = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config: {exc}") from None
        if not isinstance(cfg, dict):
            raise ParameterError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items() if k != "command"}
        if isinstance(cfg.get("seeds"), list):
            cfg["seeds"] = ",".join(str(s) for s in cfg["seeds"])
        for sp in parser.commands.values():
            sp.set_defaults(**cfg)
    return parser.parse_args(argv)


# --- pipeline pieces ------------------------------------------------------

def parse_seeds(text) -> list[int]:
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..", 1)
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ParameterError(f"empty seed range {part!r}")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ParameterError(f"bad seed range {part!r}") from None
    if not seeds:
        raise ParameterError("no seeds given")
    return seeds


def _ratio(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"bad ratio {text!r}") from None


def load_worker_or_cluster(args) -> Graph:
    if bool(args.graph) == bool(args.shape):
        raise ParameterError("give exactly one of --graph or --shape")
    if args.graph:
        g = load_graph(args.graph)
    else:
        g = generate_synthetic(
            SyntheticSpec(args.shape, args.layers, args.params_per_layer,
                          _ratio(args.ratio), args.gen_seed)
        )
    workers = getattr(args, "workers", None)
    if workers is not None:
        if g.partition is Partition.CLUSTER:
            raise ParameterError("--workers given but the graph is already a cluster graph")
        g = expand_to_mr(g, workers, args.ps, args.ps_op_time)
    return g


def build_oracle(args, g: Graph) -> TimeOracle:
    src = args.oracle
    if src == "declared":
        return declared_oracle(g)
    if src == "general":
        return general_oracle(g)
    if src == "traces":
        if not args.traces:
            raise ParameterError("--oracle traces needs --traces")
        with open(args.traces, encoding="utf-8") as f:
            return estimate_from_traces(parse_traces(f.read()), g)
    if src == "bandwidth":
        if args.bandwidth is None:
            raise ParameterError("--oracle bandwidth needs --bandwidth")
        return bandwidth_oracle(g, args.bandwidth)
    if not args.oracle_file:
        raise ParameterError("--oracle file needs --oracle-file")
    with open(args.oracle_file, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"oracle file: {exc}") from None
    return TimeOracle.from_json(doc).restricted(g)


def compute_schedule(args, w: Graph, wtime: TimeOracle, seed: int):
    algo = args.algo
    if algo == "tic":
        return tic(w, PropertyMode(args.mode))
    if algo == "tac":
        return tac(w, wtime, PropertyMode(args.mode))
    if algo == "random":
        return random_schedule(w, seed)
    if algo == "file":
        if not args.schedule:
            raise ParameterError("--algo file needs --schedule")
        with open(args.schedule, encoding="utf-8") as f:
            try:
                return PrioritySchedule.from_json(json.load(f))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"schedule file: {exc}") from None
    return None


def run_once(args, g, time, seed):
    """One simulation; returns (report, stats-or-None, EfficiencyReport)."""
    policy = SimPolicy(args.enforcement, seed, args.noise)
    w, wtime = reference_worker(g, time)
    if g.partition is Partition.WORKER:
        sched = compute_schedule(args, w, wtime, seed)
        rep = simulate(g, time, sched, policy)
        return rep, None, efficiency_report(g, time, rep.makespan)

    devices = worker_devices(g)
    per_worker = {}
    if args.algo == "random":
        for i, d in enumerate(devices):
            per_worker[d] = random_schedule(w, derive_seed(seed, i))
    elif args.algo != "none":
        sched = compute_schedule(args, w, wtime, seed)
        if all(k in g.op_map for k in sched.priorities):
            # already a full cluster schedule
            for d in devices:
                mine = {k: v for k, v in sched.priorities.items() if g[k].resource.device == d}
                per_worker[d] = PrioritySchedule(mine, sched.algorithm, g.name)
        else:
            per_worker = {d: sched for d in devices}
    rep, stats = simulate_cluster(g, time, per_worker, policy)
    if args.scope == "worker":
        d0 = devices[0]
        sub_ids = {op.id for op in g.ops if op.resource.device == d0}
        sub = make_graph(
            f"{g.name}:{d0}",
            [g[i] for i in sub_ids],
            [e for e in g.edges if e[0] in sub_ids and e[1] in sub_ids],
            Partition.CLUSTER,
        )
        eff = efficiency_report(sub, time.restricted(sub), stats.per_worker_makespan[d0], stats)
    else:
        eff = efficiency_report(g, time, rep.makespan, stats)
    return rep, stats, eff


def _fmt_rat(x):
    return "undefined" if x is None else f"{x.numerator}/{x.denominator} ({float(x):.6f})"


def summary_line(algo, eff):
    strag = "-" if eff.straggler is None else _fmt_rat(eff.straggler.straggler_fraction)
    return (
        f"algo={algo} m={eff.measured}us E={_fmt_rat(eff.efficiency)} "
        f"S={_fmt_rat(eff.speedup)} straggler={strag}"
    )


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


# --- commands -------------------------------------------------------------

def cmd_validate(args, out: Outputs):
    if not args.graph:
        raise ParameterError("validate needs --graph")
    g = load_graph(args.graph)
    print(f"ok: {g.name!r} {g.partition.value} graph, {len(g.ops)} ops, "
          f"{len(g.edges)} edges, {len(g.recv_ids)} recvs")


def _emit(out, path, text):
    if path:
        out.add(path, text)
    else:
        sys.stdout.write(text)


def cmd_generate(args, out):
    _emit(out, args.out, serialize_graph(load_worker_or_cluster(args)))


def cmd_expand(args, out):
    if args.workers is None:
        raise ParameterError("expand needs --workers")
    _emit(out, args.out, serialize_graph(load_worker_or_cluster(args)))


def cmd_oracle(args, out):
    g = load_worker_or_cluster(args)
    _emit(out, args.out, _dump(build_oracle(args, g).to_json()))


def cmd_schedule(args, out):
    g = load_worker_or_cluster(args)
    if args.algo == "tac":
        time = build_oracle(args, g)
    else:
        time = general_oracle(g)
    w, wtime = reference_worker(g, time)
    sched = compute_schedule(args, w, wtime, args.seed)
    _emit(out, args.out, sched.dumps())


def cmd_simulate(args, out):
    g = load_worker_or_cluster(args)
    time = build_oracle(args, g)
    rep, stats, eff = run_once(args, g, time, args.seed)
    doc = eff.to_json()
    doc.update(
        graph=g.name, algorithm=args.algo, seed=args.seed, scope=args.scope,
        violations=rep.violations, forced_releases=rep.forced,
    )
    out.add(args.report, _dump(doc))
    out.add(args.trace, dump_chrome_trace(rep, g))
    print(summary_line(args.algo, eff))


def cmd_sweep(args, out):
    g = load_worker_or_cluster(args)
    time = build_oracle(args, g)
    seeds = parse_seeds(args.seeds)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "makespan_us", "E_num", "E_den", "E", "straggler"])
    makespans = []
    for s in seeds:
        rep, stats, eff = run_once(args, g, time, s)
        e = eff.efficiency
        st = "" if stats is None else f"{float(stats.straggler_fraction):.6f}"
        w.writerow([
            s, eff.measured,
            "" if e is None else e.numerator, "" if e is None else e.denominator,
            "" if e is None else f"{float(e):.6f}", st,
        ])
        makespans.append(eff.measured)
    out.add(args.csv, buf.getvalue())
    doc = {
        "graph": g.name, "algorithm": args.algo, "seeds": len(seeds),
        "makespan_us": {
            "min": min(makespans), "max": max(makespans),
            "median": rational_json(Fraction(statistics.median(makespans))),
            "mean": rational_json(Fraction(sum(makespans), len(makespans))),
        },
    }
    out.add(args.report, _dump(doc))
    if not args.csv:
        sys.stdout.write(buf.getvalue())
    print(f"algo={args.algo} seeds={len(seeds)} m_min={min(makespans)}us "
          f"m_max={max(makespans)}us m_mean={sum(makespans) / len(makespans):.6f}us")


def cmd_bruteforce(args, out):
    g = load_worker_or_cluster(args)
    time = build_oracle(args, g)
    res = brute_force_best(g, time, SimPolicy(unprioritized_choice_seed=args.seed), args.max_recvs)
    doc = {
        "graph": g.name,
        "best_order": res.best_order,
        "best_makespan_us": res.best_makespan,
        "distribution_us": res.distribution,
    }
    _emit(out, args.out, _dump(doc))
    if args.out:
        print(f"best={res.best_makespan}us order={','.join(res.best_order)} "
              f"permutations={len(res.distribution)}")


def cmd_report(args, out):
    if args.makespan is None:
        raise ParameterError("report needs --makespan")
    g = load_worker_or_cluster(args)
    time = build_oracle(args, g)
    eff = efficiency_report(g, time, args.makespan)
    _emit(out, args.out, _dump(eff.to_json()))


COMMANDS = {
    "validate": cmd_validate,
    "generate": cmd_generate,
    "expand": cmd_expand,
    "oracle": cmd_oracle,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "bruteforce": cmd_bruteforce,
    "report": cmd_report,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        out = Outputs()
        COMMANDS[args.command](args, out)
        out.commit()
    except SchedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ParameterError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
