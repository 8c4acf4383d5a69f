"""Command-line front end.

    python -m qramsim call --arch bucket --n 3 --memory random --seed 7 --address uniform
    python -m qramsim counts --n-max 5
    python -m qramsim noise-sweep --arch both --epsilon 0.01 --n 2..10 --trials 1000
    python -m qramsim trace --arch bucket --n 3 --k 5

Exit codes: 0 success, 1 refused (run too large to simulate), 2 bad config.
Reports go to stdout unless ``--output`` is given; ``QRAMSIM_OUTPUT_DIR``
redirects them into a directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import classical
from .bucket import bb_call, bb_step_count
from .fanout import fanout_call, fanout_gate_counts
from .noise import CHANNELS, COUNTINGS, NoiseModel, NoiseSweepResult, SweepRow, analytic_error, monte_carlo_failure
from .oracle import COPY, MODES, SWAP, MemoryArray, ideal_qram_oracle, load_memory, memory_from_pattern
from .qstate import fidelity, make_address_state

MAX_N = 12
MAX_N_QUANTUM_MEMORY = 4
OUTPUT_ENV = "QRAMSIM_OUTPUT_DIR"
MEMORY_PATTERNS = ("zeros", "ones", "random")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class CapacityError(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    n: list[int] = field(default_factory=lambda: [3])
    architecture: str = "bucket"
    mode: str = COPY
    memory: str = "random"
    quantum_memory: bool = False
    d: int = 1
    address: str = "uniform"
    epsilon: list[float] = field(default_factory=lambda: [0.01])
    trials: int = 1000
    seed: int = 0
    counting: str = "per-active-switch"
    channel: str = "route-flip"
    workers: int = 1
    format: str = "json"
    output: str | None = None
    max_n: int | None = None
    events: bool = False
    k: str = "0"
    geometry: str = "1d"
    analytic_only: bool = False

    def validate(self) -> None:
        if not self.n or min(self.n) < 1:
            raise ConfigError("n", f"address width must be >= 1, got {self.n}")
        if self.d < 1:
            raise ConfigError("d", f"cell width must be >= 1, got {self.d}")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        if self.mode == SWAP and not self.quantum_memory:
            raise ConfigError("mode", "swap needs --quantum-memory")
        for eps in self.epsilon:
            if not 0.0 <= eps <= 1.0:
                raise ConfigError("epsilon", f"must lie in [0, 1], got {eps}")
        if self.trials < 1 and not self.analytic_only:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")
        if self.max_n is not None and self.max_n < 1:
            raise ConfigError("max-n", f"must be >= 1, got {self.max_n}")


# -- argument parsing helpers --

def parse_n_range(text: str) -> list[int]:
    """'10', '2..10' (inclusive) or '2,4,8'."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError("n", f"cannot parse {text!r}; use 10, 2..10 or 2,4,8") from None
    if not values:
        raise ConfigError("n", f"empty range {text!r}")
    return values


def parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as a comma-separated list of numbers") from None


def parse_address(spec: str, n: int) -> list[tuple[int, complex]]:
    """'uniform', a single address '5', or 'k:amp,k:amp' (amplitudes may be complex).

    Listed amplitudes that are normalized to within 1e-3 (typed-in 0.707 and
    the like) are rescaled exactly; anything further off is rejected.
    """
    if spec == "uniform":
        amp = 1 / math.sqrt(2**n)
        return [(k, amp) for k in range(2**n)]
    try:
        if ":" not in spec:
            return [(int(spec, 0), 1.0)]
        terms = []
        for item in spec.split(","):
            k, amp = item.split(":")
            terms.append((int(k, 0), complex(amp.replace(" ", ""))))
    except ValueError:
        raise ConfigError("address", f"cannot parse {spec!r}; use uniform, 5 or 0:0.707,3:0.707") from None
    total = sum(abs(a) ** 2 for _, a in terms)
    if total == 0 or abs(total - 1) > 1e-3:
        raise ConfigError("address", f"amplitudes are not normalized: sum |amp|^2 = {total:.6g}")
    scale = 1 / math.sqrt(total)
    return [(k, a * scale) for k, a in terms]


def build_memory(cfg: RunConfig, n: int) -> MemoryArray:
    if cfg.memory in MEMORY_PATTERNS:
        return memory_from_pattern(n, cfg.memory, d=cfg.d, seed=cfg.seed, quantum=cfg.quantum_memory)
    path = Path(cfg.memory)
    if not path.exists():
        raise ConfigError("memory", f"{cfg.memory!r} is neither a pattern ({'|'.join(MEMORY_PATTERNS)}) nor a file")
    try:
        mem = load_memory(path, n=n, d=cfg.d)
    except (ValueError, KeyError) as exc:
        raise ConfigError("memory", str(exc)) from None
    return MemoryArray.quantum(list(mem.cells), mem.d) if cfg.quantum_memory else mem


def check_capacity(cfg: RunConfig, ns: list[int]) -> None:
    limit = MAX_N_QUANTUM_MEMORY if cfg.quantum_memory else MAX_N
    if cfg.max_n is not None:
        if cfg.max_n > limit:
            print(
                f"warning: --max-n {cfg.max_n} lifts the default cap of {limit}; each configuration "
                f"stores 2**n - 1 node registers{' and 2**n memory cells' if cfg.quantum_memory else ''}, "
                "so memory use can grow quickly",
                file=sys.stderr,
            )
        limit = cfg.max_n
    too_big = [n for n in ns if n > limit]
    if too_big:
        raise CapacityError(f"n={max(too_big)} exceeds the simulation cap n <= {limit}; pass --max-n to override")


# -- output --

def resolve_output(cfg: RunConfig) -> Path | None:
    env = os.environ.get(OUTPUT_ENV)
    if cfg.output is not None:
        path = Path(cfg.output)
        return Path(env) / path if env and not path.is_absolute() else path
    if env:
        return Path(env) / f"{cfg.command}.{cfg.format}"
    return None


def emit(cfg: RunConfig, text: str) -> None:
    path = resolve_output(cfg)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n")
    print(f"wrote {path}", file=sys.stderr)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


# -- commands --

def cmd_call(cfg: RunConfig) -> int:
    n = cfg.n[0]
    if len(cfg.n) != 1:
        raise ConfigError("n", "call takes a single n")
    if cfg.architecture not in ("bucket", "fanout"):
        raise ConfigError("arch", "call runs bucket or fanout")
    check_capacity(cfg, [n])
    memory = build_memory(cfg, n)
    try:
        state = make_address_state(n, parse_address(cfg.address, n), cfg.d)
    except ValueError as exc:
        raise ConfigError("address", str(exc)) from None
    call = bb_call if cfg.architecture == "bucket" else fanout_call
    report = call(state, memory, cfg.mode)
    ideal = ideal_qram_oracle(state, memory, cfg.mode)
    doc = report.to_dict()
    if not cfg.events:
        doc.pop("gate_events")
    doc.update(n=n, d=cfg.d, mode=cfg.mode, seed=cfg.seed, oracle_fidelity=fidelity(report.final_state, ideal))
    if cfg.format == "json":
        emit(cfg, json.dumps(doc, indent=2))
        return 0
    rows = []
    for name, value in doc["counts"].items():
        rows.append({"record": "count", "key": name, "value": value})
    rows.append({"record": "count", "key": "oracle_fidelity", "value": doc["oracle_fidelity"]})
    for entry in doc["final_state"]:
        c = entry["configuration"]
        bus = c["bus"]
        rows.append({
            "record": "amplitude",
            "q": c["q"],
            "bus": "" if bus is None else f"{bus['position']}/{bus['payload']}",
            "qutrits": c["qutrits"],
            "memory": " ".join(c.get("memory", [])),
            "a": c["a"],
            "re": entry["re"],
            "im": entry["im"],
        })
    columns = ["record", "key", "value", "q", "bus", "qutrits", "memory", "a", "re", "im"]
    emit(cfg, rows_to_csv(rows, columns))
    return 0


COUNT_COLUMNS = [
    "n",
    "fanout_total",
    "fanout_activated",
    "fanout_on_path",
    "modified_total",
    "modified_activated",
    "bucket_active",
    "bucket_waiting",
    "bucket_cycles",
    "quantum_fanout_routing_gates",
    "quantum_bucket_steps",
]


def count_row(n: int, k: int) -> dict:
    fan = classical.simulate_fanout_classical(n, k)
    mod = classical.simulate_modified_fanout(n, k)
    bb = classical.simulate_bucket_classical(n, k)
    return {
        "n": n,
        "fanout_total": fan.total_elements,
        "fanout_activated": fan.activated_count,
        "fanout_on_path": fan.on_path,
        "modified_total": mod.total_elements,
        "modified_activated": mod.activated_count,
        "bucket_active": bb.activated_count,
        "bucket_waiting": bb.waiting_trits,
        "bucket_cycles": bb.time_steps,
        "quantum_fanout_routing_gates": fanout_gate_counts(n)["total_routing_gates"],
        "quantum_bucket_steps": bb_step_count(n),
    }


def cmd_counts(cfg: RunConfig) -> int:
    n_max = max(cfg.n)
    if cfg.geometry == "2d":
        if n_max < 2:
            raise ConfigError("n-max", "a 2D arrangement needs n >= 2")
        rows = []
        for n in range(2, n_max + 1):
            e = classical.elements_2d(n)
            rows.append({"n": n, **e, "ratio": e["elements_2d"] / e["elements_1d"]})
        columns = ["n", "elements_1d", "elements_2d", "ratio"]
    else:
        rows = []
        for n in range(1, n_max + 1):
            k = _address_for_counts(cfg.k, n)
            rows.append(count_row(n, k))
        columns = COUNT_COLUMNS
    emit(cfg, json.dumps(rows, indent=2) if cfg.format == "json" else rows_to_csv(rows, columns))
    return 0


def _address_for_counts(spec: str, n: int) -> int:
    # counts are address independent; --k picks the traced address (clipped to the tree)
    try:
        return int(spec) % 2**n
    except ValueError:
        raise ConfigError("k", f"expected an integer, got {spec!r}") from None


def cmd_noise_sweep(cfg: RunConfig) -> int:
    archs = ("bucket", "fanout") if cfg.architecture == "both" else (cfg.architecture,)
    if any(a not in ("bucket", "fanout") for a in archs):
        raise ConfigError("arch", "noise-sweep runs bucket, fanout or both")
    try:
        NoiseModel(cfg.epsilon[0], cfg.channel, cfg.counting, cfg.seed)
    except ValueError as exc:
        raise ConfigError("channel", str(exc)) from None
    if not cfg.analytic_only:
        check_capacity(cfg, cfg.n)
    address = cfg.address
    if address not in ("basis", "uniform"):
        try:
            address = parse_address(address, min(cfg.n)) if ":" in address else int(address, 0)
        except ValueError:
            raise ConfigError("address", f"cannot parse {address!r}") from None
        if isinstance(address, int) and not 0 <= address < 2 ** min(cfg.n):
            raise ConfigError("address", f"address {address} out of range for n={min(cfg.n)}")
    result = NoiseSweepResult()
    for arch in archs:
        for eps in cfg.epsilon:
            for n in cfg.n:
                if cfg.analytic_only:
                    result.rows.append(SweepRow(arch, n, eps, 0, None, None, None, analytic_error(eps, n, arch, cfg.counting, cfg.d)))
                    continue
                model = NoiseModel(eps, cfg.channel, cfg.counting, cfg.seed)
                memory = build_memory(cfg, n)
                result.rows.append(monte_carlo_failure(arch, n, model, cfg.trials, memory, address, workers=cfg.workers))
    emit(cfg, result.to_json() if cfg.format == "json" else result.to_csv())
    return 0


def cmd_trace(cfg: RunConfig) -> int:
    archs = classical.ARCHITECTURES if cfg.architecture == "all" else (cfg.architecture,)
    if any(a not in classical.ARCHITECTURES for a in archs):
        raise ConfigError("arch", f"trace runs one of {classical.ARCHITECTURES} or all")
    traces = []
    for n in cfg.n:
        if cfg.k == "all":
            ks = range(2**n)
        else:
            try:
                ks = [int(cfg.k, 0)]
            except ValueError:
                raise ConfigError("k", f"expected an integer or 'all', got {cfg.k!r}") from None
            if not 0 <= ks[0] < 2**n:
                raise ConfigError("k", f"address {ks[0]} out of range for n={n}")
        for arch in archs:
            traces.extend(classical.simulate(arch, n, k) for k in ks)
    emit(cfg, classical.traces_to_json(traces) if cfg.format == "json" else classical.traces_to_csv(traces))
    return 0


COMMANDS = {"call": cmd_call, "counts": cmd_counts, "noise-sweep": cmd_noise_sweep, "trace": cmd_trace}


# -- parser --

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: config error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, help=f"report path (relative paths land in ${OUTPUT_ENV} when set)")
    p.add_argument("--seed", type=int, default=0)


def _memory_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--memory", default="random", help="zeros, ones, random (seeded by --seed) or a file path")
    p.add_argument("--quantum-memory", action="store_true", help="fold the memory cells into the quantum state")
    p.add_argument("--d", type=int, default=1, help="bits per memory cell")
    p.add_argument("--max-n", type=int, default=None, help=f"override the size cap (default {MAX_N}, {MAX_N_QUANTUM_MEMORY} with quantum memory)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qramsim", description="Gate-level simulation of quantum RAM addressing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("call", help="run one qRAM call and dump the final state")
    p.add_argument("--arch", choices=("bucket", "fanout"), default="bucket")
    p.add_argument("--n", default="3")
    p.add_argument("--mode", choices=MODES, default=COPY)
    p.add_argument("--address", default="uniform", help="uniform, a single address, or k:amp,k:amp")
    p.add_argument("--events", action="store_true", help="include the gate-event log (JSON only)")
    _memory_args(p)
    _common(p)

    p = sub.add_parser("counts", help="activation and gate counts over a range of n")
    p.add_argument("--n-max", default="10")
    p.add_argument("--geometry", choices=("1d", "2d"), default="1d")
    p.add_argument("--k", default="0", help="traced address (reduced modulo 2**n)")
    _common(p)

    p = sub.add_parser("noise-sweep", help="Monte Carlo failure rates against the analytic error")
    p.add_argument("--arch", choices=("bucket", "fanout", "both"), default="bucket")
    p.add_argument("--n", default="10", help="10, 2..10 or 2,4,8")
    p.add_argument("--epsilon", default="0.01", help="comma-separated list")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--counting", choices=COUNTINGS, default="per-active-switch")
    p.add_argument("--channel", choices=CHANNELS, default="route-flip")
    p.add_argument("--address", default="basis", help="basis (random per trial), uniform, an address, or k:amp,...")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--analytic-only", action="store_true", help="skip sampling; any n allowed")
    _memory_args(p)
    _common(p)

    p = sub.add_parser("trace", help="classical activation traces")
    p.add_argument("--arch", choices=(*classical.ARCHITECTURES, "all"), default="all")
    p.add_argument("--n", default="3")
    p.add_argument("--k", default="0", help="address or 'all'")
    _common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, format=args.format, output=args.output, seed=args.seed)
    if args.command == "counts":
        cfg.n = parse_n_range(args.n_max)
        cfg.geometry = args.geometry
        cfg.k = args.k
        if max(cfg.n) < 1:
            raise ConfigError("n-max", f"must be >= 1, got {args.n_max}")
    else:
        cfg.n = parse_n_range(args.n)
        cfg.architecture = args.arch
    if args.command in ("call", "noise-sweep"):
        cfg.memory = args.memory
        cfg.quantum_memory = args.quantum_memory
        cfg.d = args.d
        cfg.max_n = args.max_n
        cfg.address = args.address
    if args.command == "call":
        cfg.mode = args.mode
        cfg.events = args.events
    if args.command == "noise-sweep":
        cfg.epsilon = parse_floats(args.epsilon, "epsilon")
        cfg.trials = args.trials
        cfg.counting = args.counting
        cfg.channel = args.channel
        cfg.workers = args.workers
        cfg.analytic_only = args.analytic_only
    if args.command == "trace":
        cfg.k = args.k
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"qramsim {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"qramsim {args.command}: refused: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
