"""Timing comparison: compiled kernels vs the pure-Python fallback.

Measures raw transport-field evaluations and full trajectory integrations
on the 2-D radial pair. Run as a script; prints a small table with the
speedup. The two backends are bit-identical, so the numbers differ only
in wall time.
"""

import time

import numpy as np

from germflow import Direction, HomotopySystem, integrate_trajectory, parse
from germflow._kernels import available_backends, get_backend


def build_system(backend: str) -> HomotopySystem:
    f = parse("x1^2 + x2^2", 2)
    g = parse("x1^2 + x2^2 + x1^4 + 2*x1^2*x2^2 + x2^4", 2)
    return HomotopySystem(f, g, backend=backend)


def bench_field(backend: str, n_evals: int = 100_000) -> float:
    system = build_system(backend)
    be = get_backend(backend)
    rng = np.random.default_rng(0)
    xs = rng.uniform(-0.2, 0.2, size=(n_evals, 2))
    xis = rng.uniform(0.0, 1.0, size=n_evals)
    out = np.empty(2)
    t0 = time.perf_counter()
    for i in range(n_evals):
        be.transport_field(system.table, xis[i], xs[i], out)
    return time.perf_counter() - t0


def bench_trajectories(backend: str, n_traj: int = 100) -> float:
    system = build_system(backend)
    rng = np.random.default_rng(1)
    starts = rng.uniform(-0.15, 0.15, size=(n_traj, 2))
    t0 = time.perf_counter()
    for x0 in starts:
        integrate_trajectory(system, x0, Direction.FORWARD)
    return time.perf_counter() - t0


def main():
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "native" not in backends:
        print("compiled extension not built; only the fallback will run")
    results = {}
    for name in backends:
        tf = bench_field(name)
        tt = bench_trajectories(name)
        results[name] = (tf, tt)
        print(f"{name:>9}: {100_000 / tf:>12.0f} field evals/s   "
              f"{100 / tt:>8.1f} trajectories/s")
    if "native" in results and "fallback" in results:
        fe = results["fallback"][0] / results["native"][0]
        tr = results["fallback"][1] / results["native"][1]
        print(f"  speedup: {fe:.1f}x on field evals, {tr:.1f}x on trajectories")


if __name__ == "__main__":
    main()
