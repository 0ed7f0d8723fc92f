"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernel.py [--duration 50] [--repeat 3]

Runs the fig4 scenario in fast and spiking mode on each available backend,
checks that both produce the same trace, and prints steps per second. The
``kernel`` case calls the inner loop directly with no per-sample overhead.
"""

import argparse
import math
import time
from dataclasses import replace

import numpy as np

from homeostat import engine, kernel
from homeostat.builtin import load_builtin
from homeostat.dpi import tau_s


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def raw_kernel(sc, backend, n):
    advance = kernel.get_advance(backend)
    d, nrn = sc.device, sc.neuron
    state = np.array([20e-9, sc.llc.v_ref_m, 0.0, 0.0, -math.inf])
    stats = np.array([20e-9, 20e-9, 0.0, 0.0, 0.0])
    h = engine.base_step(sc)
    advance(state, n, h, 0.0, 0.3e-9, False, np.empty(1), 0, stats,
            d.I_0_gain, d.kappa / d.U_T, d.V_dd, d.exp_cap, sc.dpi.I_tau, tau_s(sc.dpi, d),
            20e-9, 0.0, 4e-4, 4e-4, 0.0, nrn.c_mem, nrn.delta_v, nrn.t_ref, nrn.i_leak)
    return state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=50.0, help="simulated seconds per fast run")
    ap.add_argument("--spiking-duration", type=float, default=2.0)
    ap.add_argument("--kernel-steps", type=int, default=500_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["python"]
    if kernel.advance_c is not None:
        backends.insert(0, "cython")
    else:
        print("compiled kernel not built; timing the Python backend only")

    base = load_builtin("fig4")
    cases = {"fast": replace(base, duration=args.duration),
             "spiking": replace(base, mode="spiking", duration=args.spiking_duration)}
    print(f"{'case':<9}{'backend':<9}{'steps':>12}{'seconds':>10}{'Msteps/s':>10}")
    for name, sc in cases.items():
        timings, digests = {}, set()
        for be in backends:
            sec, tr = best_of(lambda: engine.run(sc, backend=be), args.repeat)
            timings[be] = sec
            digests.add(tr.digest())
            print(f"{name:<9}{be:<9}{tr.steps:>12}{sec:>10.3f}{tr.steps / sec / 1e6:>10.2f}")
        if len(timings) == 2:
            print(f"{name:<9}speedup x{timings['python'] / timings['cython']:.0f}, "
                  f"traces identical: {len(digests) == 1}")

    timings, finals = {}, set()
    for be in backends:
        sec, state = best_of(lambda: raw_kernel(base, be, args.kernel_steps), args.repeat)
        timings[be] = sec
        finals.add(state.tobytes())
        print(f"{'kernel':<9}{be:<9}{args.kernel_steps:>12}{sec:>10.3f}{args.kernel_steps / sec / 1e6:>10.2f}")
    if len(timings) == 2:
        print(f"{'kernel':<9}speedup x{timings['python'] / timings['cython']:.0f}, "
              f"states identical: {len(finals) == 1}")


if __name__ == "__main__":
    main()
