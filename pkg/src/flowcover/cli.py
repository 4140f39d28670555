"""``flowcover`` command line: generators, one-shot solving and scenario runs.

Every subcommand accepts ``--config FILE`` (flat ``key=value`` lines using the
flag names) and flags; flags win over the file. ``--seed`` is mandatory.
Output goes to ``--out``, else to ``$FLOWCOVER_OUT_DIR`` (default ``.``)
under a name derived from the subcommand and seed.

Exit status: 0 on success, 2 on a usage or configuration error, 1 when a
generator or solver fails.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from . import experiments as ex
from . import simkit, textio
from .churn import write_trace
from .model import CostModel, flows_at, per_flow_baseline_cost, scheme_cost
from .optimizer import construct_weighted_sets, decode_scheme, exact_cover, greedy_cover

EXIT_RUNTIME = 1
EXIT_USAGE = 2

COMMANDS = (
    "gen-topo",
    "gen-flows",
    "solve",
    "sweep-pollall",
    "cost",
    "overhead",
    "accuracy",
    "churn",
)
RECORD_COMMANDS = ("sweep-pollall", "cost", "overhead", "accuracy", "churn")


class UsageError(Exception):
    pass


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int
    topo_kind: str = "er"
    n: int | None = None
    p: float | None = None
    alpha: float | None = None
    beta: float | None = None
    m: int | None = None
    m_values: tuple | None = None
    n_values: tuple | None = None
    vol_min: int = simkit.DEFAULT_VOLUME_RANGE[0]
    vol_max: int = simkit.DEFAULT_VOLUME_RANGE[1]
    loss_rates: tuple = (0.01,)
    loss_ratios: tuple = (0.1,)
    m0: int = 10000
    rounds: int = 60
    churn_max: int = 2000
    recompute_interval: int = 5
    churn_model: str = "split"
    repeats: int = 5
    l_req: int = 122
    l_reply_header: int = 78
    l_single_entry: int = 96
    solver: str = "greedy"
    budget: int = 1_000_000
    input: str | None = None
    trace: str | None = None
    out: str | None = None
    format: str = "csv"
    trials: int = 1
    jobs: int = 1

    @property
    def model(self) -> CostModel:
        return CostModel(self.l_req, self.l_reply_header, self.l_single_entry)

    def dumps(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(map(str, value))
            lines.append(f"{key.replace('_', '-')}={value}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {
    "seed": int, "n": int, "m": int, "m0": int, "rounds": int, "churn_max": int,
    "recompute_interval": int, "repeats": int, "l_req": int, "l_reply_header": int,
    "l_single_entry": int, "budget": int, "trials": int, "jobs": int,
    "vol_min": int, "vol_max": int, "p": float, "alpha": float, "beta": float,
    "m_values": _ints, "n_values": _ints, "loss_rates": _floats, "loss_ratios": _floats,
    "topo_kind": str, "solver": str, "churn_model": str, "input": str, "trace": str,
    "out": str, "format": str,
}

_DEFAULTS = {
    "gen-topo": {"n": 200},
    "gen-flows": {"n": 200, "m": 20000},
    "solve": {"n": 200, "m": 20000},
    "sweep-pollall": {"n": 100, "m": 20000},
    "cost": {"n": 200, "m_values": (1000, 20000, 100000)},
    "overhead": {
        "n": 200,
        "m": 20000,
        "m_values": tuple(range(10000, 100001, 10000)),
        "n_values": (50, 100, 200, 300, 400),
    },
    "accuracy": {"n": 200, "m_values": (20000,)},
    "churn": {"n": 200},
}


def read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{no}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def build_config(scenario: str, flags: dict) -> ExperimentConfig:
    """Merge subcommand defaults, the optional config file, then flags."""
    raw = dict(_DEFAULTS[scenario])
    if flags.get("config"):
        try:
            raw.update(read_config_file(flags["config"]))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    raw.update({k: v for k, v in flags.items() if v is not None and k != "config"})
    if flags.get("json"):
        raw["format"] = "json"
    raw.pop("json", None)
    raw.pop("scenario", None)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "seed" not in raw:
        raise UsageError("--seed is required")
    conv = {}
    for key, value in raw.items():
        try:
            conv[key] = _FIELD_TYPES[key](value) if isinstance(value, str) else value
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    cfg = ExperimentConfig(scenario=scenario, **conv)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if not 0 <= cfg.seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if cfg.topo_kind not in ("er", "waxman"):
        raise UsageError("--topo-kind must be 'er' or 'waxman'")
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be 'csv' or 'json'")
    if cfg.solver not in ("greedy", "exact"):
        raise UsageError("--solver must be 'greedy' or 'exact'")
    if cfg.churn_model not in ("split", "independent"):
        raise UsageError("--churn-model must be 'split' or 'independent'")
    if cfg.n is not None and cfg.n < 2:
        raise UsageError("--n must be at least 2")
    if cfg.trials < 1 or cfg.jobs < 1:
        raise UsageError("--trials and --jobs must be positive")
    if cfg.trials > 1 and cfg.scenario not in RECORD_COMMANDS:
        raise UsageError(f"--trials is not supported by {cfg.scenario}")
    try:
        cfg.model
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def output_path(cfg: ExperimentConfig) -> str:
    if cfg.out:
        return cfg.out
    ext = {"gen-topo": "topo", "gen-flows": "net", "solve": "scheme"}.get(
        cfg.scenario, "jsonl" if cfg.format == "json" else "csv"
    )
    directory = os.environ.get("FLOWCOVER_OUT_DIR", ".")
    return os.path.join(directory, f"{cfg.scenario}-seed{cfg.seed}.{ext}")


def _topology(cfg: ExperimentConfig, seed: int):
    return ex.make_topology(cfg.topo_kind, cfg.n, seed, cfg.p, cfg.alpha, cfg.beta)


def _network(cfg: ExperimentConfig):
    """Topology and flows from ``--input`` when given, else generated from the seed."""
    if cfg.input:
        with open(cfg.input) as fh:
            topo, flows = textio.loads_network(fh.read())
        return topo, flows
    topo = _topology(cfg, ex._sub_seed(cfg.seed, 0))
    flows = simkit.gen_flows(
        topo, cfg.m, (cfg.vol_min, cfg.vol_max), seed=ex._sub_seed(cfg.seed, 1, cfg.m)
    )
    return topo, flows


def _records(cfg: ExperimentConfig, seed: int) -> list[dict]:
    model = cfg.model
    topo_params = {"p": cfg.p, "alpha": cfg.alpha, "beta": cfg.beta}
    if cfg.scenario == "sweep-pollall":
        recs = ex.run_poll_all_sweep(
            cfg.n, cfg.m, seed, cfg.topo_kind, model, (cfg.vol_min, cfg.vol_max), **topo_params
        )
    elif cfg.scenario == "cost":
        recs = ex.run_cost_experiment(
            cfg.topo_kind, cfg.n, cfg.m_values, seed, model, (cfg.vol_min, cfg.vol_max), **topo_params
        )
    elif cfg.scenario == "overhead":
        recs = ex.run_overhead_experiment(
            cfg.n, cfg.m_values, seed, cfg.n_values, cfg.m, cfg.repeats, model
        )
    elif cfg.scenario == "accuracy":
        recs = ex.run_accuracy_experiment(
            cfg.topo_kind, cfg.n, cfg.m_values, cfg.loss_rates, cfg.loss_ratios, seed, model,
            **topo_params,
        )
    else:
        trace = [] if cfg.trace else None
        recs = ex.run_churn_experiment(
            cfg.n, cfg.m0, cfg.rounds, cfg.churn_max, cfg.recompute_interval, seed, model, trace,
            cfg.churn_model,
        )
        if trace is not None:
            path = cfg.trace if cfg.trials == 1 else f"{cfg.trace}.seed{seed}"
            with open(path, "w") as fh:
                write_trace(trace, fh)
    if cfg.trials > 1 and recs and "seed" not in recs[0]:
        recs = [{"seed": seed, **r} for r in recs]
    return recs


def _summary(cfg: ExperimentConfig, recs: list[dict]) -> str:
    if cfg.scenario == "sweep-pollall":
        best = min(recs, key=lambda r: (r["total_cost"], r["k"]))
        return (
            f"{len(recs)} records; min cost {best['total_cost']} at k={best['k']} "
            f"(baseline {recs[0]['baseline_cost']})"
        )
    if cfg.scenario == "cost":
        mean = sum(r["savings"] for r in recs) / len(recs)
        return f"{len(recs)} records; mean savings {100 * mean:.1f}%"
    if cfg.scenario == "accuracy":
        afr = sum(r["afr"] for r in recs) / len(recs)
        tm = sum(r["tm_accuracy"] for r in recs) / len(recs)
        return f"{len(recs)} records; mean AFR {afr:.4f}, mean TM accuracy {tm:.4f}"
    if cfg.scenario == "churn":
        worst = max(r["patched_cost"] / max(r["recompute_cost"], 1) for r in recs)
        return f"{len(recs)} records; worst patched/recompute ratio {worst:.3f}"
    return f"{len(recs)} records"


def run(cfg: ExperimentConfig) -> str:
    """Execute one configured subcommand; returns the summary line."""
    path = output_path(cfg)
    model = cfg.model
    if cfg.scenario == "gen-topo":
        topo = _topology(cfg, ex._sub_seed(cfg.seed, 0))
        ratio = cfg.loss_ratios[0] if cfg.loss_ratios else 0.0
        topo = simkit.mark_loss_switches(topo, ratio, ex._sub_seed(cfg.seed, 2))
        _write(path, textio.dumps_network(topo))
        return f"topology n={topo.n} links={len(topo.links)} loss={len(topo.loss_switches)} -> {path}"
    if cfg.scenario == "gen-flows":
        if cfg.input:
            with open(cfg.input) as fh:
                topo, _ = textio.loads_network(fh.read())
        else:
            topo = _topology(cfg, ex._sub_seed(cfg.seed, 0))
        flows = simkit.gen_flows(
            topo, cfg.m, (cfg.vol_min, cfg.vol_max), seed=ex._sub_seed(cfg.seed, 1, cfg.m)
        )
        _write(path, textio.dumps_network(topo, flows))
        return f"{len(flows)} flows on n={topo.n} -> {path}"
    if cfg.scenario == "solve":
        topo, flows = _network(cfg)
        system = construct_weighted_sets(topo, flows, model)
        if cfg.solver == "exact":
            solution = exact_cover(system, cfg.budget)
        else:
            solution = greedy_cover(system)
        scheme = decode_scheme(system, solution, flows)
        cost = scheme_cost(model, scheme, flows_at(flows, topo.n))
        base = per_flow_baseline_cost(model, len(flows))
        _write(path, textio.dumps_scheme(scheme))
        proven = "" if solution.proven else " (budget exhausted, not proven optimal)"
        return (
            f"flowcover {cost} bytes vs per-flow {base} bytes, "
            f"savings {100 * ex.savings(cost, base):.2f}%{proven} -> {path}"
        )

    seeds = [cfg.seed + k for k in range(cfg.trials)]
    if cfg.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            chunks = list(pool.map(_records, [cfg] * len(seeds), seeds))
    else:
        chunks = [_records(cfg, s) for s in seeds]
    recs = [r for chunk in chunks for r in chunk]
    with open(path, "w", newline="") as fh:
        ex.write_records(recs, fh, cfg.format)
    return f"{_summary(cfg, recs)} -> {path}"


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowcover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--seed")
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--json", action="store_true", help="shorthand for --format json")
        p.add_argument("--topo-kind", dest="topo_kind")
        p.add_argument("--n")
        p.add_argument("--p")
        p.add_argument("--alpha")
        p.add_argument("--beta")
        p.add_argument("--m")
        p.add_argument("--m-values", dest="m_values")
        p.add_argument("--vol-min", dest="vol_min")
        p.add_argument("--vol-max", dest="vol_max")
        p.add_argument("--l-req", dest="l_req")
        p.add_argument("--l-reply-header", dest="l_reply_header")
        p.add_argument("--l-single-entry", dest="l_single_entry")
        if name in ("gen-flows", "solve"):
            p.add_argument("--input", help="network file (topology, optionally flows)")
        if name == "solve":
            p.add_argument("--solver", choices=("greedy", "exact"))
            p.add_argument("--budget")
        if name in ("gen-topo", "accuracy"):
            p.add_argument("--loss-ratio", "--loss-ratios", dest="loss_ratios")
        if name == "accuracy":
            p.add_argument("--loss-rate", "--loss-rates", dest="loss_rates")
        if name == "overhead":
            p.add_argument("--n-values", dest="n_values")
            p.add_argument("--repeats")
        if name == "churn":
            p.add_argument("--m0")
            p.add_argument("--rounds")
            p.add_argument("--churn-max", dest="churn_max")
            p.add_argument("--recompute-interval", dest="recompute_interval")
            p.add_argument("--churn-model", dest="churn_model", choices=("split", "independent"))
            p.add_argument("--trace", help="also write the churn event trace here")
        if name in RECORD_COMMANDS:
            p.add_argument("--trials", help="run seeds seed..seed+K-1, merged in seed order")
            p.add_argument("--jobs", help="worker processes for --trials")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    flags = vars(args)
    scenario = flags.pop("scenario")
    if not flags.get("json"):
        flags.pop("json")
    try:
        cfg = build_config(scenario, flags)
    except UsageError as exc:
        print(f"flowcover {scenario}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        print(run(cfg))
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"flowcover {scenario}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
