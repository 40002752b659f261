"""Compare the compiled simulation kernel against the numpy fallback.

Both backends implement the same ``run_program`` contract.  Two tables are
reported: the kernel alone on a prepacked signal table (where the backends
actually differ), and end-to-end ``evaluate_batch`` (which adds the shared
operand packing and output unpacking around the kernel).  Agreement is
checked bit for bit before anything is timed.  Run as:

    python3 benchmarks/bench_simcore.py --lanes 1048576 --repeats 5
"""

import argparse
import time

import numpy as np

from axokit import build_netlist, parse_kind
from axokit import _simpy, simcore
from axokit.operators import AxoConfig
from axokit.simcore import evaluate_batch, gate_words

try:
    from axokit import _simkernel
except ImportError:
    _simkernel = None


def _workload(token, lanes, seed):
    kind = parse_kind(token)
    net = build_netlist(kind)
    rng = np.random.default_rng(seed)
    cfg = AxoConfig(tuple(int(x) for x in rng.integers(0, 2, net.removable_count)))
    lo, hi = kind.operand_range()
    a = rng.integers(lo, hi, size=lanes)
    b = rng.integers(lo, hi, size=lanes)
    return net, cfg, a, b


def _best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_kernel(net, cfg, lanes, seed, repeats):
    """Time run_program alone on one prepacked table per backend.

    Cell rows are recomputed in topological order from the input rows, so
    repeated runs on the same table are idempotent after the first pass.
    """
    rng = np.random.default_rng(seed)
    n_words = (lanes + 63) // 64
    sig = rng.integers(0, 1 << 63, size=(net.n_signals, n_words),
                       dtype=np.int64).astype(np.uint64)
    sig[0] = 0
    sig[1] = ~np.uint64(0)
    gate = gate_words(cfg)
    prog = net.instructions
    times = {}
    tables = {}
    for name, mod in (("numpy", _simpy), ("cext", _simkernel)):
        if mod is None:
            continue
        mine = sig.copy()
        mod.run_program(prog, mine, gate)
        times[name] = _best_of(lambda: mod.run_program(prog, mine, gate), repeats)
        tables[name] = mine
    if len(tables) == 2 and not np.array_equal(tables["numpy"], tables["cext"]):
        raise SystemExit("backend mismatch in run_program")
    return times


def _bench_end_to_end(net, cfg, a, b, repeats):
    saved = simcore._kernel
    times = {}
    outs = {}
    try:
        for name, mod in (("numpy", _simpy), ("cext", _simkernel)):
            if mod is None:
                continue
            simcore._kernel = mod
            outs[name] = evaluate_batch(net, cfg, a, b, count_toggles=True)
            times[name] = _best_of(
                lambda: evaluate_batch(net, cfg, a, b, count_toggles=True), repeats)
    finally:
        simcore._kernel = saved
    if len(outs) == 2:
        same = (np.array_equal(outs["numpy"][0], outs["cext"][0])
                and outs["numpy"][1] == outs["cext"][1])
        if not same:
            raise SystemExit("backend mismatch in evaluate_batch")
    return times


def _print_table(title, rows, lanes):
    print(f"\n{title}")
    print(f"{'kind':<10} {'numpy ms':>10} {'cext ms':>10} {'speedup':>8} "
          f"{'cext Mpair/s':>13}")
    for token, times in rows:
        py = times.get("numpy")
        cx = times.get("cext")
        if cx is None:
            print(f"{token:<10} {py * 1e3:>10.2f} {'-':>10} {'-':>8} {'-':>13}")
        else:
            print(f"{token:<10} {py * 1e3:>10.2f} {cx * 1e3:>10.2f} "
                  f"{py / cx:>7.1f}x {lanes / cx / 1e6:>13.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kinds", default="adder:u8,adder:u12,mul:s4,mul:s8",
                    help="comma-separated operator tokens")
    ap.add_argument("--lanes", type=int, default=1 << 20,
                    help="operand pairs per timed call")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed calls per cell; best is reported")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _simkernel is None:
        print("compiled extension not built; showing the numpy fallback only")
    print(f"lanes={args.lanes}  repeats={args.repeats}  best-of timing")

    kernel_rows = []
    e2e_rows = []
    for token in args.kinds.split(","):
        net, cfg, a, b = _workload(token, args.lanes, args.seed)
        kernel_rows.append((token, _bench_kernel(net, cfg, args.lanes,
                                                 args.seed, args.repeats)))
        e2e_rows.append((token, _bench_end_to_end(net, cfg, a, b, args.repeats)))
    _print_table("run_program only (prepacked signal table)", kernel_rows, args.lanes)
    _print_table("evaluate_batch with toggle counting (includes packing)",
                 e2e_rows, args.lanes)


if __name__ == "__main__":
    main()
