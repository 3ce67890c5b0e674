"""Time the compiled integration kernels against the numpy driver.

Both paths produce trajectories that agree to roundoff; this script only
measures wall time. The compiled path is skipped automatically when numba
is unavailable or disabled through FRACSYNC_NO_NUMBA=1.

Usage:
    python benchmarks/benchmark_kernels.py
    python benchmarks/benchmark_kernels.py --steps 2000 8000 --repeats 5
"""

import argparse
import statistics
import time

import numpy as np

from fracsync import SolverConfig, integrate
from fracsync import kernels
from fracsync.control import ExactCancellation, coupled_system
from fracsync.systems import FinancialParams, VoltaParams, financial_system, volta_system

CASES = [
    ("financial", financial_system(), [2.0, -1.0, 1.0]),
    ("volta", volta_system(), [8.0, 2.0, 3.0]),
    (
        "coupled",
        coupled_system(FinancialParams(), VoltaParams(), ExactCancellation()),
        [2.0, -1.0, 1.0, 8.0, 2.0, 3.0],
    ),
]


def _time_case(system, y0, config, backend, repeats):
    y0 = np.asarray(y0, dtype=np.float64)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        integrate(system, 0.99, y0, config, backend=backend)
        samples.append(time.perf_counter() - t0)
    return min(samples), statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--steps",
        type=int,
        nargs="+",
        default=[1000, 4000, 16000],
        help="grid sizes to time (number of steps at h chosen for t_end=10)",
    )
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats per cell")
    parser.add_argument(
        "--memory",
        type=int,
        default=None,
        help="optional history window; default keeps the full history",
    )
    args = parser.parse_args()

    backends = ["numpy"]
    if kernels.NUMBA_ENABLED:
        kernels.warmup()
        backends.append("numba")
    else:
        print("numba disabled or missing; timing the numpy driver only")

    header = f"{'system':<10} {'steps':>7} " + "".join(f"{b + ' (s)':>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>9}"
    print(header)
    print("-" * len(header))

    for name, system, y0 in CASES:
        for n_steps in args.steps:
            config = SolverConfig(h=10.0 / n_steps, n_steps=n_steps, memory=args.memory)
            best = {}
            for backend in backends:
                best[backend], _ = _time_case(system, y0, config, backend, args.repeats)
            row = f"{name:<10} {n_steps:>7} " + "".join(f"{best[b]:>12.4f}" for b in backends)
            if len(backends) == 2:
                row += f"{best['numpy'] / best['numba']:>8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
