"""``memaccel`` command line: build/verify tables, benchmark, plan, report.

Every command prints a human-readable summary and writes a JSON report to
``<out>/<command>.json``.  Exit status is 0 only when every check passed;
otherwise a one-line JSON failure record goes to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from memaccel import bench
from memaccel.bench import RunConfig
from memaccel.errors import MemAccelError
from memaccel.model import as_fraction, accel_factor, load_graph_spec
from memaccel.nco import build_tone_bank, correct, correct_float
from memaccel.profiles import dvbt_profile
from memaccel.rtar import format_plan_report, plan, plan_report
from memaccel.tables import (
    build_acs_table,
    build_minselect_table,
    load_acs_table,
    load_minselect_table,
    save_table,
)
from memaccel.trellis import DVBT_CODE
from memaccel.viterbi_ma import MaDecoder, acs_lookups_per_step, minselect_lookups_per_step
from memaccel.viterbi_ref import DecoderConfig

DIFFERENTIAL_P = (0.0, 0.01, 0.05, 0.1)
ACS_FILE = "acs.matb"
MINSEL_FILE = "minsel.matb"
# short alternating timing runs keep host drift out of the ratio of medians
DEFAULT_BITS = {"bench": 2_000}
DEFAULT_REPS = {"bench": 41}


class CheckFailed(Exception):
    def __init__(self, failures: List[str], report: dict):
        super().__init__("; ".join(failures))
        self.failures = failures
        self.report = report


def _common(args) -> dict:
    run = RunConfig(args.seed, args.bits, args.bsc_p, args.depth, args.tables, args.reps)
    return {**asdict(run), "code": DVBT_CODE.as_dict()}


def _load_or_build(args, report: dict):
    d = Path(args.tables)
    acs_path, ms_path = d / ACS_FILE, d / MINSEL_FILE
    if acs_path.exists() and ms_path.exists():
        acs, ms = load_acs_table(acs_path, DVBT_CODE), load_minselect_table(ms_path)
        report["table_source"] = str(d)
    else:
        acs, ms = build_acs_table(DVBT_CODE, budget=args.budget), build_minselect_table(budget=args.budget)
        report["table_source"] = "built in memory"
    report["table_digests"] = {"acs": acs.digest.hex(), "minselect": ms.digest.hex()}
    return acs, ms


def cmd_build_tables(args) -> dict:
    report = {"config": _common(args)}
    d = Path(args.tables)
    d.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    acs = build_acs_table(DVBT_CODE, budget=args.budget)
    ms = build_minselect_table(budget=args.budget)
    report["build_seconds"] = time.perf_counter() - t0
    save_table(acs, d / ACS_FILE)
    save_table(ms, d / MINSEL_FILE)
    report["tables"] = {
        name: {"path": str(d / f), "key_bits": t.spec.key_bits, "value_bytes": t.spec.value_bytes,
               "M_m": t.spec.total_bytes, "digest": t.digest.hex()}
        for name, f, t in (("acs", ACS_FILE, acs), ("minselect", MINSEL_FILE, ms))
    }
    for name, t in report["tables"].items():
        print(f"{name}: {t['M_m']} B ({t['key_bits']}-bit key) -> {t['path']}")
    return report


def cmd_verify(args) -> dict:
    report = {"config": _common(args)}
    failures = []
    acs, ms = _load_or_build(args, report)
    t0 = time.perf_counter()
    bad = bench.verify_acs(acs, DVBT_CODE)
    report["acs_exhaustive"] = {"keys": acs.spec.entry_count, "mismatches": bad,
                                "seconds": time.perf_counter() - t0}
    print(f"acs table: {acs.spec.entry_count} keys, {len(bad)} mismatches")
    if bad:
        failures.append(f"acs table differs from reference at keys {bad}")
    bad = bench.verify_minselect(ms)
    report["minselect_exhaustive"] = {"keys": ms.spec.entry_count, "mismatches": bad}
    print(f"min-select table: {ms.spec.entry_count} keys, {len(bad)} mismatches")
    if bad:
        failures.append(f"min-select table differs from reference at keys {bad}")

    decoder = MaDecoder(DecoderConfig(DVBT_CODE, args.depth), acs, ms)
    runs = []
    for p in DIFFERENTIAL_P:
        r = bench.differential(decoder, args.bits, p, args.seed)
        runs.append(r)
        print(f"differential p={p}: {r['info_bits']} bits, identical={r['identical']}, "
              f"reference BER={r['ber']:.3g}")
        if not r["identical"]:
            failures.append(f"decoders differ at p={p} ({r['mismatches']} bits)")
        if p == 0.0 and r["ref_bit_errors"]:
            failures.append("noiseless round trip failed")
    report["differential"] = runs
    if failures:
        raise CheckFailed(failures, report)
    return report


def cmd_bench(args) -> dict:
    report = {"config": _common(args)}
    acs, ms = _load_or_build(args, report)
    decoder = MaDecoder(DecoderConfig(DVBT_CODE, args.depth), acs, ms)
    r = bench.bench_decoders(decoder, args.bits, args.bsc_p, args.seed, args.reps)
    decoded = r.pop("decoded")
    r["decoded_digest"] = bench_digest(decoded)
    expected = (acs_lookups_per_step(64), minselect_lookups_per_step(64))
    r["expected_lookups_per_step"] = expected
    report["bench"] = r
    print(f"reference: median {r['median_ref']:.4f} s over {r['reps']} runs of {r['steps']} steps")
    print(f"memory-accelerated: median {r['median_ma']:.4f} s")
    print(f"a = {r['a']:.3f}; lookups/step acs={r['acs_lookups_per_step']:g} "
          f"minsel={r['minselect_lookups_per_step']:g}")
    failures = []
    if not r["identical"]:
        failures.append("decoders disagree")
    if (r["acs_lookups_per_step"], r["minselect_lookups_per_step"]) != expected:
        failures.append(f"lookup counts differ from analytic {expected}")
    if failures:
        raise CheckFailed(failures, report)
    return report


def bench_digest(bits) -> str:
    return hashlib.sha256(np.asarray(bits, dtype=np.uint8).tobytes()).hexdigest()


def _graph_spec(args):
    if args.graph:
        spec = load_graph_spec(args.graph)
    else:
        spec = dvbt_profile()
    if spec.platform is None:
        raise MemAccelError("graph file has no platform section")
    budget = args.budget_given if args.budget_given is not None else spec.budget
    return spec, budget


def cmd_plan(args) -> dict:
    spec, budget = _graph_spec(args)
    p = plan(spec.graph, spec.platform, budget)
    rep = plan_report(p, spec.platform)
    print(format_plan_report(rep))
    return {"config": {"graph": args.graph or "builtin:dvbt", "budget": budget}, "plan": rep}


def cmd_report(args) -> dict:
    if args.bench_report:
        data = json.loads(Path(args.bench_report).read_text())
        w_ref = as_fraction(data["bench"]["median_ref"])
        w_ma = as_fraction(data["bench"]["median_ma"])
        source = f"measured: {args.bench_report}"
    else:
        w_ref, w_ma = as_fraction(args.w_ref), as_fraction(args.w_ma)
        source = "modeled"
    w_r = as_fraction(args.w_r)
    a = accel_factor(w_r, [w_ref], [w_ma])
    out = {"config": {"w_ref": str(w_ref), "w_ma": str(w_ma), "w_r": str(w_r), "source": source},
           "a": {"exact": str(a), "value": float(a), "display": f"{float(a):.3g}"}}
    print(f"a = {float(a):.4f} (reported {float(a):.3g})  [{source}]")
    if args.graph:
        spec, budget = _graph_spec(args)
        rep = plan_report(plan(spec.graph, spec.platform, budget), spec.platform)
        out["plan"] = rep
        print(format_plan_report(rep))
    return out


def cmd_nco_bench(args) -> dict:
    n = args.n
    offsets = [Fraction(i - args.offsets // 2, args.offsets) for i in range(args.offsets)]
    bank = build_tone_bank(n, offsets)
    rng = np.random.default_rng([args.seed, 2])
    x = np.exp(2j * np.pi * rng.random(n))
    worst = 0.0
    for i, eps in enumerate(offsets):
        err = correct(bank, x, i) - correct_float(x, eps, n)
        worst = max(worst, float(np.abs(err.real).max()), float(np.abs(err.imag).max()))
    t_tab, t_calc = [], []
    for _ in range(args.reps):
        t0 = time.perf_counter()
        for i in range(len(offsets)):
            correct(bank, x, i)
        t_tab.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        for eps in offsets:
            correct_float(x, eps, n)
        t_calc.append(time.perf_counter() - t0)
    a = statistics.median(t_calc) / statistics.median(t_tab)
    rep = {"config": {"seed": args.seed, "n": n, "offsets": len(offsets), "reps": args.reps},
           "bank_bytes": bank.nbytes, "max_component_error": worst,
           "median_tabled": statistics.median(t_tab), "median_computed": statistics.median(t_calc),
           "a": a}
    print(f"tone bank: {len(offsets)} offsets x {n} samples, {bank.nbytes} B")
    print(f"max per-component error vs float corrector: {worst:.3g}")
    print(f"a = {a:.3f}")
    if worst > 1e-3:
        raise CheckFailed([f"tabled corrector error {worst} exceeds 1e-3"], rep)
    return rep


COMMANDS = {
    "build-tables": cmd_build_tables,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "plan": cmd_plan,
    "report": cmd_report,
    "nco-bench": cmd_nco_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=2010)
    common.add_argument("--bits", type=int, default=None,
                        help="info bits per run (verify: 1000000, bench: 2000)")
    common.add_argument("--bsc-p", type=float, default=0.01)
    common.add_argument("--depth", type=int, default=64, help="traceback depth D")
    common.add_argument("--tables", default="tables", help="table directory")
    common.add_argument("--graph", default=None, help="graph JSON file (default: built-in DVB-T profile)")
    common.add_argument("--budget", dest="budget_given", type=int, default=None, help="memory budget in bytes")
    common.add_argument("--reps", type=int, default=None, help="timing repetitions (bench: 41, nco-bench: 5)")
    common.add_argument("--out", default="reports", help="directory for JSON reports")

    parser = argparse.ArgumentParser(prog="memaccel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build-tables", "verify", "bench", "plan"):
        sub.add_parser(name, parents=[common])
    rp = sub.add_parser("report", parents=[common])
    rp.add_argument("--w-ref", default="7.71", help="cost of the computation-only implementation")
    rp.add_argument("--w-ma", default="0.74", help="cost of the memory-accelerated implementation")
    rp.add_argument("--w-r", default="0", help="cost of blocks left computational")
    rp.add_argument("--bench-report", default=None, help="take costs from a bench report")
    nb = sub.add_parser("nco-bench", parents=[common])
    nb.add_argument("--n", type=int, default=2048, help="tone period in samples")
    nb.add_argument("--offsets", type=int, default=64)
    return parser


def _write(args, report: dict) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.command}.json"
    path.write_text(json.dumps(report, indent=2, default=str) + "\n")
    return path


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.budget = args.budget_given if args.budget_given is not None else 1 << 30
    if args.bits is None:
        args.bits = DEFAULT_BITS.get(args.command, 1_000_000)
    if args.reps is None:
        args.reps = DEFAULT_REPS.get(args.command, 5)
    try:
        report = COMMANDS[args.command](args)
    except CheckFailed as exc:
        exc.report["status"] = "fail"
        exc.report["failures"] = exc.failures
        _write(args, exc.report)
        print(json.dumps({"status": "fail", "command": args.command, "failures": exc.failures}),
              file=sys.stderr)
        return 1
    except (MemAccelError, OSError, ValueError, KeyError, TypeError) as exc:
        print(json.dumps({"status": "fail", "command": args.command,
                          "failures": [f"{type(exc).__name__}: {exc}"]}), file=sys.stderr)
        return 2
    report["status"] = "pass"
    path = _write(args, report)
    print(f"report: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
