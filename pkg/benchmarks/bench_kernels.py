"""Time the compiled and pure-Python inference kernels against each other.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--family triangular]
"""
import argparse
import logging
import time

from fuzzycharge import kernels
from fuzzycharge.configfile import load_packaged
from fuzzycharge.controllers import MfFamily

log = logging.getLogger("bench_kernels")


def _grid(n, step):
    return [round(k * step, 9) for k in range(n)]


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(family: MfFamily, repeat: int = 5):
    main, _ = load_packaged(family)
    dtemps = _grid(501, 0.01)
    times = _grid(401, 0.1)
    stair = _grid(5001, 0.001)
    results = {}
    for name in kernels.available_backends():
        impl = kernels.load_backend(name)
        packed = kernels.pack_rulebase(main.rulebase, impl)
        t_surf, surf = _best_of(lambda: impl.surface(packed, dtemps, times), repeat)
        t_stop, stops = _best_of(lambda: impl.stop_indices(packed, stair, times, main.decision_threshold), repeat)
        results[name] = (t_surf, t_stop, list(surf), list(stops))
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--family", default="triangular", choices=[f.value for f in MfFamily])
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    res = run(MfFamily(args.family), args.repeat)
    print(f"{'backend':<8} {'surface 501x401':>16} {'stop scan 5001x401':>20}")
    for name, (ts, tstop, _, _) in res.items():
        print(f"{name:<8} {ts * 1e3:>14.1f}ms {tstop * 1e3:>18.1f}ms")
    if len(res) == 2:
        c, p = res["cython"], res["python"]
        print(f"speedup  {p[0] / c[0]:>15.1f}x {p[1] / c[1]:>19.1f}x")
        same = c[2] == p[2] and c[3] == p[3]
        print("outputs identical" if same else "OUTPUTS DIFFER")
        return 0 if same else 1
    log.warning("compiled backend not built, only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
