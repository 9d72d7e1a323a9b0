"""Command line: ``solve``, ``oracle``, ``compare`` and ``generate``.

Reports are JSON with exact rationals as ``"p/q"`` strings.  Everything that
depends on the clock lives under ``"volatile"``; the rest is reproducible
byte for byte from the embedded ``"config"``.

Exit codes: 0 success, 2 invalid input or parameters, 3 internal
consistency error, 4 oracle refused the instance, 5 a compared invariant
failed.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .dissection import Params, optimal_dissection_value, run_hptas
from .instance import (
    HighwayInstance,
    InternalConsistencyError,
    InvalidInput,
    dump_json,
    format_rational,
    generate_random,
    highway_from_dict,
    highway_to_dict,
    load_json,
    profit,
)
from .maxfs import (
    MaxFSInstance,
    Row,
    maxfs_from_dict,
    maxfs_report_dict,
    maxfs_to_dict,
    row_values,
    run_maxfs,
    weighted_count,
)
from .oracle import (
    OracleBounds,
    OracleRefusal,
    exact_highway_bruteforce,
    exact_maxfs,
    exact_tollbooth,
)
from .tollbooth import (
    DEFAULT_MAX_LEAVES,
    TreeDriver,
    TreeInstance,
    run_tollbooth,
    tree_from_dict,
    tree_profit,
    tree_to_dict,
)
from .wellround import TrivialInstance, rounded_instance, well_round

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL, EXIT_REFUSED, EXIT_INVARIANT = 0, 2, 3, 4, 5
ALGOS = ("highway", "tollbooth", "maxfs")


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    algo: str = "highway"
    epsilon: str = "1/2"
    mode: str = "derandomized"
    seed: int = 0
    gamma: int | None = None
    delta: int | None = None
    base_weights: list[int] | None = None
    guarantee_void: bool = False
    oracle_max_edges: int = OracleBounds.max_edges
    oracle_max_budget: int = OracleBounds.max_budget
    max_leaves: int = DEFAULT_MAX_LEAVES
    out: str | None = None
    generate: dict[str, int] = field(default_factory=dict)
    batch: int = 0

    def params(self) -> Params:
        p = Params.from_epsilon(self.epsilon, self.gamma, self.delta, self.base_weights)
        self.guarantee_void = p.guarantee_void
        return p

    def bounds(self) -> OracleBounds:
        return OracleBounds(max_edges=self.oracle_max_edges, max_budget=self.oracle_max_budget)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop("out")
        return data


# ---- instance loading -------------------------------------------------------------

def load_instance(config: RunConfig):
    if config.input is None:
        raise InvalidInput("an instance file is required")
    data = load_json(config.input)
    if not isinstance(data, dict):
        raise InvalidInput("instance file must hold a JSON object")
    kind = data.get("kind")
    if kind != config.algo:
        raise InvalidInput(f"instance kind {kind!r} does not match --algo {config.algo}")
    if kind == "highway":
        return highway_from_dict(data)
    if kind == "tollbooth":
        return tree_from_dict(data, config.max_leaves)
    return maxfs_from_dict(data)


def _fr(values) -> list:
    return [format_rational(v) for v in values]


# ---- commands -----------------------------------------------------------------------

def solve_payload(config: RunConfig, instance) -> dict:
    params = config.params()
    if config.algo == "highway":
        report = run_hptas(instance, params, config.mode, config.seed)
        return {
            "weights": _fr(report.weights),
            "profit": format_rational(report.profit),
            "satisfied": sorted(report.satisfied),
            "diagnostics": report.diagnostics,
        }
    if config.algo == "tollbooth":
        report = run_tollbooth(instance, params, config.mode, config.seed, config.max_leaves)
        return {
            "weights": _fr(report.weights),
            "profit": format_rational(report.profit),
            "satisfied": sorted(report.satisfied),
            "diagnostics": report.diagnostics,
        }
    report = run_maxfs(instance, params, config.mode, config.seed)
    out = maxfs_report_dict(report)
    out["diagnostics"] = report.diagnostics
    return out


def oracle_payload(config: RunConfig, instance) -> dict:
    bounds = config.bounds()
    if config.algo == "highway":
        res = exact_highway_bruteforce(instance, bounds)
        return {"opt": format_rational(res.value), "witness": _fr(res.weights), "satisfied": sorted(res.satisfied)}
    if config.algo == "tollbooth":
        res = exact_tollbooth(instance, bounds)
        return {"opt": format_rational(res.value), "witness": _fr(res.weights), "satisfied": sorted(res.satisfied)}
    value, witness, rows = exact_maxfs(instance, bounds)
    return {"opt": format_rational(value), "witness": _fr(witness), "rows": sorted(rows)}


def _ratio(apx: Fraction, opt: Fraction):
    return format_rational(apx / opt) if opt else None


def compare_highway(config: RunConfig, instance: HighwayInstance) -> dict:
    params = config.params()
    bounds = config.bounds()
    report = run_hptas(instance, params, config.mode, config.seed)
    opt = exact_highway_bruteforce(instance, bounds)
    feasible = profit(instance, report.weights) == report.profit
    record: dict[str, Any] = {
        "apx": format_rational(report.profit),
        "opt": format_rational(opt.value),
        "ratio": _ratio(report.profit, opt.value),
        "feasible": feasible,
        "apx_le_opt": report.profit <= opt.value,
        "corollary1_holds": None,
    }
    try:
        wr = well_round(instance, params.epsilon)
    except TrivialInstance:
        record["corollary1_holds"] = True
        return record
    rounded = rounded_instance(wr)
    w_opt = exact_highway_bruteforce(rounded, OracleBounds(
        max_edges=bounds.max_edges, max_budget=max(bounds.max_budget, wr.trace.expansion),
        max_evaluations=bounds.max_evaluations,
    ))
    total = sum(int(v) for v in w_opt.weights)
    w_star = 1
    while w_star < total:
        w_star *= params.gamma
    table = []
    holds = True
    for draw in report.diagnostics["draws"]:
        if draw["w_star"] != w_star:
            continue
        apx_o = optimal_dissection_value(wr, [int(v) for v in w_opt.weights], draw["x"], draw["y"], params)
        ok = draw["apx_d"] is not None and draw["apx_d"] >= apx_o
        holds = holds and ok
        table.append({"x": draw["x"], "y": draw["y"], "apx_d": draw["apx_d"], "apx_o": apx_o, "holds": ok})
    record["corollary1_holds"] = holds
    if config.mode == "derandomized":
        record["per_draw"] = table
    return record


def compare_payload(config: RunConfig, instance) -> dict:
    params = config.params()
    if config.algo == "highway":
        return compare_highway(config, instance)
    bounds = config.bounds()
    if config.algo == "tollbooth":
        report = run_tollbooth(instance, params, config.mode, config.seed, config.max_leaves)
        opt = exact_tollbooth(instance, bounds)
        return {
            "apx": format_rational(report.profit),
            "opt": format_rational(opt.value),
            "ratio": _ratio(report.profit, opt.value),
            "feasible": tree_profit(instance, report.weights) == report.profit,
            "apx_le_opt": report.profit <= opt.value,
        }
    report = run_maxfs(instance, params, config.mode, config.seed)
    relaxed, _, _ = exact_maxfs(instance, bounds, params.rho)
    achieved = row_values(instance, report.weights)
    feasible = all(
        instance.rows[j].lower <= achieved[j] <= report.violation * instance.rows[j].upper for j in report.rows
    )
    return {
        "apx": format_rational(report.value),
        "opt": format_rational(relaxed),
        "ratio": _ratio(report.value, relaxed),
        "feasible": feasible and weighted_count(instance, report.rows) == report.value,
        "apx_le_opt": report.value <= relaxed,
    }


def _hard_invariants(record: dict) -> list[str]:
    failed = []
    if not record.get("apx_le_opt", True):
        failed.append("apx <= opt")
    if not record.get("feasible", True):
        failed.append("feasibility")
    if record.get("corollary1_holds") is False:
        failed.append("apx_D >= apx_O")
    return failed


def run_compare(config: RunConfig) -> dict:
    if config.batch:
        if config.algo != "highway":
            raise InvalidInput("--batch is only available for --algo highway")
        g = config.generate
        records = []
        for k in range(config.batch):
            inst = generate_random(g["n"], g["m"], g["max_budget"], config.seed + k)
            rec = compare_highway(config, inst)
            rec["seed"] = config.seed + k
            records.append(rec)
        ratios = [Fraction(r["ratio"]) for r in records if r["ratio"] is not None]
        failed = sorted({f for r in records for f in _hard_invariants(r)})
        summary = {
            "instances": len(records),
            "min_ratio": format_rational(min(ratios)) if ratios else None,
            "median_ratio": format_rational(statistics.median_low(ratios)) if ratios else None,
            "failed_invariants": failed,
        }
        return {"summary": summary, "records": records}
    record = compare_payload(config, load_instance(config))
    record["failed_invariants"] = _hard_invariants(record)
    return record


def generate_payload(config: RunConfig) -> dict:
    g = config.generate
    if config.algo == "highway":
        return highway_to_dict(generate_random(g["n"], g["m"], g["max_budget"], config.seed))
    if config.algo == "tollbooth":
        return tree_to_dict(generate_tree(g["n"], g["m"], g["max_budget"], config.seed, config.max_leaves))
    return maxfs_to_dict(generate_maxfs(g["n"], g["m"], g["max_budget"], config.seed))


def generate_tree(nodes: int, m: int, max_budget: int, seed: int, max_leaves: int = DEFAULT_MAX_LEAVES) -> TreeInstance:
    """Seeded tree rooted at leaf 1 with at most ``max_leaves`` leaves."""
    import random

    if nodes < 2 or m < 0 or max_budget < 0 or max_leaves < 2:
        raise InvalidInput(f"bad generator parameters nodes={nodes} m={m} max_budget={max_budget}")
    rng = random.Random(seed)
    edges = [(1, 2)]
    degree = {1: 1, 2: 1}
    for v in range(3, nodes + 1):
        leaves = sum(1 for d in degree.values() if d == 1)
        candidates = [u for u in range(2, v) if degree[u] == 1 or leaves < max_leaves]
        u = rng.choice(candidates)
        edges.append((u, v))
        degree[u] += 1
        degree[v] = 1
    drivers = []
    for _ in range(m):
        a, b = rng.sample(range(1, nodes + 1), 2)
        drivers.append(TreeDriver(a, b, Fraction(rng.randint(0, max_budget))))
    return TreeInstance(nodes, tuple(edges), 1, tuple(drivers))


def generate_maxfs(n: int, m: int, l_max: int, seed: int) -> MaxFSInstance:
    """Seeded interval rows: bounds up to ``l_max`` (upper up to twice that), profits 1..3."""
    import random

    if n < 1 or m < 0 or l_max < 0:
        raise InvalidInput(f"bad generator parameters n={n} m={m} l_max={l_max}")
    rng = random.Random(seed)
    rows = []
    for _ in range(m):
        left = rng.randint(1, n)
        right = rng.randint(left, n)
        lower = rng.randint(0, l_max)
        rows.append(Row(left, right, lower, lower + rng.randint(0, l_max), Fraction(rng.randint(1, 3))))
    return MaxFSInstance(n, tuple(rows))


# ---- argument parsing -------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="highway-ptas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
        if needs_input:
            p.add_argument("input", nargs="?", help="instance JSON file")
        p.add_argument("--algo", choices=ALGOS, default="highway")
        p.add_argument("--epsilon", default="1/2", help="rational p/q with 1/(2 eps) a positive integer")
        p.add_argument("--mode", choices=("randomized", "derandomized"), default="derandomized")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--gamma", type=int, help="override gamma (voids the guarantee)")
        p.add_argument("--delta", type=int, help="override delta (voids the guarantee)")
        p.add_argument("--base-weights", type=_int_list, help="override base weights, e.g. 2,4")
        p.add_argument("--oracle-max-edges", type=int, default=OracleBounds.max_edges)
        p.add_argument("--oracle-max-budget", type=int, default=OracleBounds.max_budget)
        p.add_argument("--max-leaves", type=int, default=DEFAULT_MAX_LEAVES, help="tollbooth leaf limit")
        p.add_argument("--out", help="write the report here instead of stdout")

    common(sub.add_parser("solve", help="run the approximation scheme"))
    common(sub.add_parser("oracle", help="solve exactly (tiny instances only)"))
    cmp = sub.add_parser("compare", help="run solver and oracle and check invariants")
    common(cmp)
    cmp.add_argument("--batch", type=int, default=0, help="compare this many generated highway instances")
    for p in (cmp,):
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--m", type=int, default=3)
        p.add_argument("--max-budget", type=int, default=5)
    gen = sub.add_parser("generate", help="write a seeded random instance")
    common(gen, needs_input=False)
    gen.add_argument("--n", type=int, required=True, help="edges (highway), nodes (tollbooth) or columns (maxfs)")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--max-budget", type=int, required=True, help="largest budget, or l_max for maxfs")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    generate = {}
    if args.command in ("generate", "compare"):
        generate = {"n": args.n, "m": args.m, "max_budget": args.max_budget}
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        algo=args.algo,
        epsilon=args.epsilon,
        mode=args.mode,
        seed=args.seed,
        gamma=args.gamma,
        delta=args.delta,
        base_weights=args.base_weights,
        oracle_max_edges=args.oracle_max_edges,
        oracle_max_budget=args.oracle_max_budget,
        max_leaves=args.max_leaves,
        out=args.out,
        generate=generate,
        batch=getattr(args, "batch", 0),
    )


def execute(config: RunConfig) -> tuple[int, dict]:
    """Run one command; returns the exit code and the report document."""
    started = time.perf_counter()
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    code = EXIT_OK
    if config.command == "generate":
        return code, generate_payload(config)
    try:
        if config.command == "solve":
            result = solve_payload(config, load_instance(config))
        elif config.command == "oracle":
            result = oracle_payload(config, load_instance(config))
        else:
            result = run_compare(config)
            failed = result.get("failed_invariants") or result.get("summary", {}).get("failed_invariants")
            if failed:
                code = EXIT_INVARIANT
    except OracleRefusal as exc:
        code, result = EXIT_REFUSED, {"error": "oracle refused", "message": str(exc), "bounds": asdict(config.bounds())}
    except InvalidInput as exc:
        code, result = EXIT_INVALID, {"error": "invalid input", "message": str(exc)}
    except InternalConsistencyError as exc:
        code, result = EXIT_INTERNAL, {"error": "internal consistency", "message": str(exc)}
    report = {
        "config": config.to_dict(),
        "result": result,
        "volatile": {"timestamp": stamp, "wall_seconds": round(time.perf_counter() - started, 6)},
    }
    return code, report


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = config_from_args(args)
    try:
        config.params()
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        code, report = execute(config)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = dump_json(report)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK and "message" in report.get("result", {}):
        print(f"error: {report['result']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
