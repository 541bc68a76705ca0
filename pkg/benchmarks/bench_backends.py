"""Compare the compiled and NumPy kernel backends.

Times each batched log-probability kernel on synthetic payoff matrices and
then a full equilibrium solve on a nested-logit market, once per available
backend, and prints a side-by-side table. The solver's inner loop is just
these kernels evaluated over and over on small matrices, so the per-call
numbers translate directly into solve time.

Run from the repository root after installing the package:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --batch 5000 --alternatives 80
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import tumatch as tm
from tumatch import _backend


def time_call(func, *args, repeats: int) -> float:
    """Best wall-clock seconds per call over ``repeats`` timed calls."""
    func(*args)  # warm up caches and any lazy setup
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def kernel_cases(batch: int, alternatives: int, nests: int, seed: int):
    """Named (function-name, args) pairs exercising each kernel."""
    rng = np.random.default_rng(seed)
    payoffs = rng.uniform(-8.0, 8.0, size=(batch, alternatives))
    nest_index = rng.integers(0, nests, size=alternatives)
    lam = rng.uniform(0.3, 1.0, size=nests)
    membership = rng.dirichlet(np.ones(nests), size=alternatives)
    with np.errstate(divide="ignore"):
        log_weights = np.log(membership)
    return [
        ("logit_logprobs", (payoffs,)),
        ("nested_logprobs", (payoffs, nest_index, lam)),
        ("nested_cond_logprobs", (payoffs, nest_index, lam)),
        ("gnl_logprobs", (payoffs, log_weights, lam)),
    ]


def solve_market(workers: int, firms: int, seed: int) -> tm.MarketSpec:
    """A nested-logit market on both sides with dispersed tastes."""
    rng = np.random.default_rng(seed)
    worker_nests = rng.integers(1, 4, size=firms)
    firm_nests = rng.integers(1, 4, size=workers)
    return tm.MarketSpec(
        worker_mass=rng.uniform(0.5, 2.0, size=workers),
        firm_mass=rng.uniform(0.5, 2.0, size=firms),
        worker_utility=rng.uniform(-2.0, 2.0, size=(workers, firms)),
        firm_productivity=rng.uniform(-2.0, 2.0, size=(workers, firms)),
        worker_scale=rng.uniform(0.8, 1.5, size=workers),
        firm_scale=rng.uniform(0.8, 1.5, size=firms),
        worker_model=tm.NestedLogit(tuple(worker_nests), (0.4, 0.6, 0.8)),
        firm_model=tm.NestedLogit(tuple(firm_nests), (0.5, 0.7, 0.9)),
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=2000,
                        help="rows per kernel call (default 2000)")
    parser.add_argument("--alternatives", type=int, default=50,
                        help="inside alternatives per row (default 50)")
    parser.add_argument("--nests", type=int, default=5,
                        help="nests for the nested/GNL kernels (default 5)")
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed calls per measurement (default 7)")
    parser.add_argument("--market", type=int, nargs=2, default=(25, 20),
                        metavar=("WORKERS", "FIRMS"),
                        help="market size for the full-solve timing")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = tm.available_backends()
    if len(backends) < 2:
        print(f"only {backends[0]!r} is available; build the extension to compare")
    cases = kernel_cases(args.batch, args.alternatives, args.nests, args.seed)
    spec = solve_market(*args.market, seed=args.seed + 1)

    rows = []
    for name, call_args in cases:
        per_backend = {}
        for backend in backends:
            func = getattr(_backend._BACKENDS[backend], name)
            per_backend[backend] = time_call(func, *call_args, repeats=args.repeats)
        rows.append((name, per_backend))

    def timed_solve() -> None:
        result = tm.solve(spec)
        assert result.converged

    solve_times = {}
    for backend in backends:
        previous = tm.active_backend()
        tm.set_backend(backend)
        try:
            solve_times[backend] = time_call(timed_solve, repeats=max(3, args.repeats // 2))
        finally:
            tm.set_backend(previous)
    rows.append((f"solve {args.market[0]}x{args.market[1]} nested", solve_times))

    both = set(backends) == {"compiled", "numpy"}
    width = max(len(name) for name, _ in rows)
    header = f"{'case':<{width}}" + "".join(f"  {b:>12}" for b in backends)
    if both:
        header += f"  {'numpy/compiled':>14}"
    print(f"batch={args.batch} alternatives={args.alternatives} nests={args.nests} "
          f"(best of {args.repeats}, times in ms)")
    print(header)
    print("-" * len(header))
    for name, per_backend in rows:
        line = f"{name:<{width}}"
        for backend in backends:
            line += f"  {per_backend[backend] * 1e3:>12.3f}"
        if both and per_backend["compiled"] > 0:
            ratio = per_backend["numpy"] / per_backend["compiled"]
            line += f"  {ratio:>13.2f}x"
        print(line)


if __name__ == "__main__":
    main()
