"""Time the stepping loop on each available backend.

    python benchmarks/bench_kernels.py [--steps 4000] [--repeat 3]

Reports the best wall time per configuration and the compiled/NumPy ratio.
"""
import argparse
import time

import numpy as np

from semiwave.freeboundary import SolverConfig, evolve, init_cutoff, steady_for_run
from semiwave.kernels import available_backends
from semiwave.media import quasi_periodic_medium


def bench(cfg, backend, steps, repeat):
    m = quasi_periodic_medium()
    steady = steady_for_run(m, cfg, 0.0, 40.0)
    state = init_cutoff(m, steady, 0.0, 8, cfg)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = evolve(state, cfg, stop_t=steps * cfg.dt, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, traj.final.h


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=4000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = available_backends()
    print(f"{'dx':>6} {'points':>7} " + " ".join(f"{b + ' [ms]':>13}" for b in backends)
          + (f" {'speedup':>8} {'|dh|':>9}" if len(backends) > 1 else ""))
    for dx in (0.1, 0.05, 0.025):
        cfg = SolverConfig(dx=dx, dt=0.4 * dx * dx, L=40.0)
        res = {b: bench(cfg, b, args.steps, args.repeat) for b in backends}
        line = f"{dx:>6g} {cfg.n_cells + 1:>7d} " + " ".join(f"{1e3 * res[b][0]:>13.1f}" for b in backends)
        if len(backends) > 1:
            speedup = res["python"][0] / res["cython"][0]
            line += f" {speedup:>8.1f} {abs(res['python'][1] - res['cython'][1]):>9.1e}"
        print(line)


if __name__ == "__main__":
    main()
