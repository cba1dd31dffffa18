"""Compare the numba and pure-numpy kernels.

Two views are reported:

* per-kernel timings, calling both implementations from ``kernels.PAIRS`` on
  identical inputs (numba timings exclude the first, compiling call);
* end-to-end timings of a few library calls in fresh interpreters with and
  without ``GINZBURG_DISABLE_NUMBA``.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20] [--size 20000] [--skip-e2e]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ginzburg import _accel, kernels


def kernel_cases(size: int):
    rng = np.random.default_rng(0)
    Om, g, G2 = 3.3, 10.7237, 0.7619
    kap = np.sort(rng.uniform(0, 15, size))
    s = rng.uniform(0, 40, size)
    return {
        "rate1d_exact": (kap, 0.4, 0.01, 1.0, 0.3, 0.004),
        "rate1d_smallv": (kap, 0.5, 1.0, 0.004),
        "rate3d": (kap, 0.5, 1.8, 0.25, Om, g, G2, 30.0),
        "correlator_inner": (kap, 0.7, 1.0, 1.0, 0.5),
        "residue_real": (kap, 0.3, 1.0, 1.0, 1.0, 0.5),
        "residue_leg": (s, 6.0, True, False, 0.3, 1.0, 1.0, 1.0, 0.5),
        "grid_sum": (0.3, 1.0, 3.0, 1.0, 1.0, 2.0, 0.05, 200, 0.02, 2000),
        "radial_trapezoid": (80.0, size + 1),
    }


def bench_kernels(repeat: int, size: int) -> list[dict]:
    rows = []
    for name, args in kernel_cases(size).items():
        fast, slow = kernels.PAIRS[name]
        fast(*args)  # compile
        t_numba = min(timeit.repeat(lambda: fast(*args), number=1, repeat=repeat))
        t_numpy = min(timeit.repeat(lambda: slow(*args), number=1, repeat=repeat))
        rows.append({"kernel": name, "numba_s": t_numba, "numpy_s": t_numpy, "speedup": t_numpy / t_numba})
    return rows


E2E_SCRIPT = """
import json, time
from ginzburg.correlator import SpacetimeInterval, wightman_EE_residue
from ginzburg.detector1d import DetectorSpec1D, excitation_rate_exact
from ginzburg.detector3d import DetectorSpec3D, excitation_rate_3d_exact
from ginzburg.medium import MediumParams
weak, unit = MediumParams(1.0, 0.3, 0.004), MediumParams(1.0, 1.0, 0.5)
jobs = {
    "rate1d_exact": lambda: excitation_rate_exact(DetectorSpec1D(0.5, 1.0, 0.01), weak),
    "rate3d_exact": lambda: excitation_rate_3d_exact(DetectorSpec3D(0.5, (1, 1, 0), 0.01), weak),
    "correlator_residue": lambda: wightman_EE_residue(SpacetimeInterval(0.3, 1.0), unit),
}
out = {}
for name, fn in jobs.items():
    t0 = time.perf_counter(); fn(); first = time.perf_counter() - t0
    t0 = time.perf_counter(); fn(); out[name] = (first, time.perf_counter() - t0)
print(json.dumps(out))
"""


def bench_end_to_end() -> dict:
    results = {}
    for label, disable in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, **{_accel.DISABLE_ENV: disable})
        proc = subprocess.run([sys.executable, "-c", E2E_SCRIPT], env=env, capture_output=True, text=True,
                              check=True)
        results[label] = json.loads(proc.stdout)
    return results


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--size", type=int, default=20000, help="array length for vectorized kernels")
    p.add_argument("--skip-e2e", action="store_true", help="only time the individual kernels")
    args = p.parse_args(argv)

    if not _accel.NUMBA_AVAILABLE:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'kernel':<18} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for r in bench_kernels(args.repeat, args.size):
        print(f"{r['kernel']:<18} {1e3 * r['numba_s']:>11.3f} {1e3 * r['numpy_s']:>11.3f} {r['speedup']:>8.1f}")
    if not args.skip_e2e:
        print("\nend to end (first call incl. compile / cache load, second call) [s]")
        e2e = bench_end_to_end()
        for name in e2e["numba"]:
            (nf, ns), (pf, ps) = e2e["numba"][name], e2e["numpy"][name]
            print(f"{name:<20} numba {nf:8.3f} / {ns:8.3f}   numpy {pf:8.3f} / {ps:8.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
