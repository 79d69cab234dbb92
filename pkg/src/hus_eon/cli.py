"""Command-line entry point.

Subcommands: static, dynamic, sweep-alpha, cost, export-milp, oracle,
validate. A JSON config file may supply any flag; explicit flags override
it. Every simulation run writes a config echo next to its results so the
exact run can be reproduced bit-for-bit from the echo alone.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .check import check_assignment_dump
from .errors import HusEonError
from .milp import MilpInstance, brute_force_opt, export_lp
from .netmodel import (
    Demand,
    FiberKind,
    LightpathAssignment,
    Topology,
    builtin_topology,
    load_topology,
)
from .phy import LinkOsnrTable, PhyParams, ReciprocalSumOsnr, DEFAULT_MODULATIONS
from .simulator import (
    DynamicTraffic,
    StaticTraffic,
    deployment_cost,
    run_dynamic,
    run_static,
    sweep_alpha,
)
from .strategies import (
    OaStrategy,
    RandomStrategy,
    SingleFiberStrategy,
    SuStrategy,
    UffStrategy,
)
from .provisioner import provision_sp, provision_swp

CSV_SCHEMA = "# hus-eon results schema=1"


def resolve_topology(spec: str) -> Topology:
    path = Path(spec)
    if path.exists():
        return load_topology(path)
    stem = path.stem
    try:
        return builtin_topology(stem)
    except FileNotFoundError:
        raise HusEonError(f"topology {spec!r}: no such file or builtin network") from None


def build_strategy(name: str, alpha: float | None, osnr_table=None):
    name = name.lower()
    if name == "random":
        return RandomStrategy()
    if name == "uff":
        return UffStrategy()
    if name == "oa":
        return OaStrategy(alpha=alpha if alpha is not None else 1.12, osnr_table=osnr_table)
    if name == "su":
        return SuStrategy()
    if name in ("ssmf", "only-ssmf"):
        return SingleFiberStrategy(FiberKind.SSMF)
    if name in ("ull", "only-ull"):
        return SingleFiberStrategy(FiberKind.ULL)
    raise HusEonError(f"unknown strategy {name!r}")


def _out_base(args) -> Path:
    outdir = Path(args.outdir or os.environ.get("HUS_EON_OUTDIR", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir / args.out


def _write_echo(base: Path, command: str, args) -> None:
    echo = {"command": command}
    echo.update(
        {
            k: v
            for k, v in vars(args).items()
            if k not in ("func", "config") and v is not None
        }
    )
    base.with_suffix(".config.json").write_text(json.dumps(echo, indent=2, default=str))


def _write_csv(base: Path, fieldnames: list[str], rows: list[dict]) -> Path:
    path = base.with_suffix(".csv")
    with open(path, "w", newline="") as f:
        f.write(CSV_SCHEMA + "\n")
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return path


def _assignment_row(asg: LightpathAssignment, demand: Demand | None = None) -> dict:
    row = {
        "demand_id": asg.demand_id,
        "route": list(asg.route),
        "fibers": [k.value for k in asg.fiber_choice],
        "format": asg.format_name,
        "start_slot": asg.start_slot,
        "fs_count": asg.fs_count,
    }
    if demand is not None:
        row.update({"src": demand.src, "dst": demand.dst, "bandwidth_gbps": demand.bandwidth_gbps})
    return row


def cmd_static(args) -> int:
    topology = resolve_topology(args.topology)
    osnr_table = LinkOsnrTable.from_json(args.link_osnr) if args.link_osnr else None
    strategy = build_strategy(args.strategy, args.alpha)
    rows = []
    dumps = {}
    for seed in args.seed:
        result = run_static(
            topology,
            StaticTraffic(x_max_gbps=args.x_max, seed=seed),
            strategy,
            osnr_table=osnr_table,
        )
        rows.append(
            {
                "mode": "static",
                "topology": topology.name or args.topology,
                "strategy": strategy.name,
                "load_or_x": args.x_max,
                "seed": seed,
                "offered": result.metrics.offered,
                "blocked": result.metrics.blocked,
                "blocking_probability": f"{result.metrics.blocking_probability:.6g}",
                "max_fs_used": result.metrics.max_fs_used,
            }
        )
        demands = {d.demand_id: d for d in result.demands}
        dumps[seed] = [
            _assignment_row(a, demands.get(a.demand_id)) for a in result.assignments
        ]
        if result.blocked_ids:
            print(f"seed {seed}: blocked demands: {', '.join(result.blocked_ids)}")
    base = _out_base(args)
    csv_path = _write_csv(base, list(rows[0].keys()), rows)
    base.with_suffix(".assignments.json").write_text(
        json.dumps({"schema": 1, "topology": topology.name, "runs": dumps}, indent=2)
    )
    _write_echo(base, "static", args)
    print(f"wrote {csv_path}")
    return 0


def _dynamic_worker(payload: tuple) -> dict:
    topo_dict, load, seed, args_d = payload
    topology = Topology.from_dict(topo_dict)
    strategy = build_strategy(args_d["strategy"], args_d.get("alpha"))
    cfg = DynamicTraffic(
        load_erlang=load,
        x_max_gbps=args_d["x_max"],
        mean_holding=args_d["holding"],
        horizon_events=args_d["events"],
        warmup_events=args_d.get("warmup"),
        seed=seed,
    )
    provisioner = provision_sp if args_d.get("baseline") else provision_swp
    metrics = run_dynamic(topology, cfg, strategy, provisioner=provisioner)
    return {
        "mode": "dynamic" + ("-sp" if args_d.get("baseline") else ""),
        "topology": args_d["topology_name"],
        "strategy": args_d["strategy"],
        "load_or_x": load,
        "seed": seed,
        "offered": metrics.offered,
        "blocked": metrics.blocked,
        "blocking_probability": f"{metrics.blocking_probability:.6g}",
        "max_fs_used": metrics.max_fs_used,
    }


def cmd_dynamic(args) -> int:
    topology = resolve_topology(args.topology)
    args_d = {
        "strategy": args.strategy,
        "alpha": args.alpha,
        "x_max": args.x_max,
        "holding": args.holding,
        "events": args.events,
        "warmup": args.warmup,
        "baseline": args.baseline,
        "topology_name": topology.name or args.topology,
    }
    payloads = [
        (topology.to_dict(), load, seed, args_d)
        for load in args.load
        for seed in args.seed
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_dynamic_worker, payloads))
    else:
        rows = [_dynamic_worker(p) for p in payloads]
    rows.sort(key=lambda r: (r["load_or_x"], r["seed"]))
    base = _out_base(args)
    csv_path = _write_csv(base, list(rows[0].keys()), rows)
    _write_echo(base, "dynamic", args)
    print(f"wrote {csv_path}")
    return 0


def cmd_sweep_alpha(args) -> int:
    topology = resolve_topology(args.topology)
    rows = sweep_alpha(topology, args.x_max, args.alphas, seed=args.seed)
    base = _out_base(args)
    csv_path = _write_csv(base, list(rows[0].keys()), rows)
    _write_echo(base, "sweep-alpha", args)
    print(f"wrote {csv_path}")
    return 0


def cmd_cost(args) -> int:
    topology = resolve_topology(args.topology)
    cost = deployment_cost(topology, args.scenario)
    print(f"{cost:g}")
    return 0


def cmd_export_milp(args) -> int:
    instance = MilpInstance.from_json(args.instance)
    base = _out_base(args)
    lp_path, names_path = export_lp(instance, base)
    print(f"wrote {lp_path} and {names_path}")
    return 0


def cmd_oracle(args) -> int:
    instance = MilpInstance.from_json(args.instance)
    forced = FiberKind(args.forced.upper()) if args.forced else None
    result = brute_force_opt(instance, forced_kind=forced)
    if not result.feasible:
        print("infeasible")
        return 1
    print(f"optimum max FS used: {result.optimum}")
    for asg in result.witness:
        print(
            f"  {asg.demand_id}: {'-'.join(asg.route)} via "
            f"{'/'.join(k.value for k in asg.fiber_choice)} "
            f"{asg.format_name} slots [{asg.start_slot}, {asg.end_slot})"
        )
    return 0


def cmd_validate(args) -> int:
    topology = resolve_topology(args.topology)
    with open(args.dump) as f:
        data = json.load(f)
    runs = data.get("runs") or {"-": data["assignments"]}
    if args.link_osnr:
        osnr_table = LinkOsnrTable.from_json(args.link_osnr)
    else:
        osnr_table = LinkOsnrTable.from_physics(topology, PhyParams())
    provider = ReciprocalSumOsnr(topology, osnr_table)
    failures = 0
    for run_id, rows in runs.items():
        assignments = [
            LightpathAssignment(
                row["demand_id"],
                tuple(row["route"]),
                tuple(FiberKind(k) for k in row["fibers"]),
                row["format"],
                int(row["start_slot"]),
                int(row["fs_count"]),
            )
            for row in rows
        ]
        violations = check_assignment_dump(topology, assignments, DEFAULT_MODULATIONS, provider)
        for v in violations:
            print(f"run {run_id}: {v}")
        failures += len(violations)
    if failures:
        print(f"{failures} violation(s) found")
        return 1
    print("all constraints satisfied")
    return 0


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hus-eon",
        description="Lightpath provisioning in dual-fiber (SSMF + ULL) elastic optical networks",
    )
    parser.add_argument("--config", help="JSON file supplying defaults for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--topology", default="n6s9", help="builtin name (n6s9, usnet) or JSON path")
        p.add_argument("--outdir", default=None, help="output directory (or $HUS_EON_OUTDIR)")
        p.add_argument("--out", default="results", help="output basename")

    p = sub.add_parser("static", help="batch provisioning, one demand per node pair")
    common(p)
    p.add_argument("--strategy", default="oa", help="random | uff | oa | ssmf | ull")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--x-max", dest="x_max", type=float, default=200.0)
    p.add_argument("--seed", type=_int_list, default=[0])
    p.add_argument("--link-osnr", dest="link_osnr", default=None, help="JSON reciprocal-OSNR table")
    p.set_defaults(func=cmd_static)

    p = sub.add_parser("dynamic", help="Poisson/exponential loss simulation")
    common(p)
    p.add_argument("--strategy", default="su", help="random | uff | su | ssmf | ull")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--load", type=_float_list, default=[30.0], help="Erlang per node pair (comma list)")
    p.add_argument("--x-max", dest="x_max", type=float, default=200.0)
    p.add_argument("--holding", type=float, default=1.0)
    p.add_argument("--events", type=int, default=10_000, help="arrival horizon")
    p.add_argument("--warmup", type=int, default=None, help="arrivals discarded (default 10%%)")
    p.add_argument("--seed", type=_int_list, default=[0])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--baseline", action="store_true", help="use the fixed shortest-path baseline")
    p.set_defaults(func=cmd_dynamic)

    p = sub.add_parser("sweep-alpha", help="static OA runs over an alpha grid")
    common(p)
    p.add_argument("--alphas", type=_float_list, default=[1.0, 1.2, 1.4, 1.6, 1.8, 2.0])
    p.add_argument("--x-max", dest="x_max", type=_float_list, default=[200.0])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("cost", help="fiber deployment cost of a build scenario")
    p.add_argument("--topology", default="usnet")
    p.add_argument("--scenario", required=True, choices=["S", "SS", "US", "UU"])
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("export-milp", help="emit the LP model and name sidecar")
    p.add_argument("--instance", required=True, help="instance JSON (topology, demands, link_osnr)")
    p.add_argument("--outdir", default=None)
    p.add_argument("--out", default="model")
    p.set_defaults(func=cmd_export_milp)

    p = sub.add_parser("oracle", help="exact optimum on a tiny instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--forced", choices=["ssmf", "ull"], default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="re-check a dumped assignment set")
    p.add_argument("--topology", required=True)
    p.add_argument("--dump", required=True, help="assignments JSON written by `static`")
    p.add_argument("--link-osnr", dest="link_osnr", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    with open(args.config) as f:
        overrides = json.load(f)
    command = overrides.pop("command", args.command)
    rebuilt = [command]
    for key, value in overrides.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                rebuilt.append(flag)
        elif isinstance(value, list):
            rebuilt += [flag, ",".join(str(v) for v in value)]
        else:
            rebuilt += [flag, str(value)]
    # Re-parse with file values first so explicit flags win.
    file_args = parser.parse_args(rebuilt)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in vars(args).items():
        if key in explicit or key in ("func", "command"):
            setattr(file_args, key, value)
    return file_args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, list(argv if argv is not None else sys.argv[1:]))
        return args.func(args)
    except HusEonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
