"""Time the numba kernels against the pure-numpy fallback.

Run as `python3 benchmarks/bench_kernels.py`.  Covers the raw kernels at
several register sizes plus end-to-end protocol throughput with each backend
swapped in.
"""

import time

import numpy as np

from ghzqss import kernels, protocol

KERNEL_SIZES = (32, 512, 2048)
REPEATS = 2000
SESSION_ROUNDS = 2000


def _random_amps(n: int) -> np.ndarray:
    rng = np.random.default_rng(1)
    raw = rng.normal(size=n) + 1j * rng.normal(size=n)
    return (raw / np.linalg.norm(raw)).astype(np.complex128)


def _time_kernel(fn, *args, repeats: int = REPEATS) -> float:
    fn(*args)  # warm (jit compile / cache touch)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_kernels(impls: dict) -> dict[str, dict[int, float]]:
    h = 1 / np.sqrt(2)
    out: dict[str, dict[int, float]] = {"apply_1q": {}, "apply_cnot": {}, "prob_one": {}}
    for n in KERNEL_SIZES:
        amps = _random_amps(n)
        out["apply_1q"][n] = _time_kernel(
            impls["apply_1q"], amps, n // 2, h + 0j, h + 0j, h + 0j, -h + 0j)
        out["apply_cnot"][n] = _time_kernel(impls["apply_cnot"], amps, n // 2, n // 4)
        out["prob_one"][n] = _time_kernel(impls["prob_one"], amps, n // 2)
    return out


def bench_session(impls: dict) -> float:
    saved = {name: getattr(kernels, name) for name in impls}
    try:
        for name, fn in impls.items():
            setattr(kernels, name, fn)
        message = [int(b) for b in np.random.default_rng(2).integers(0, 2, SESSION_ROUNDS)]
        protocol.run_session(message[:50], seed=0)  # warm
        start = time.perf_counter()
        protocol.run_session(message, seed=0)
        return (time.perf_counter() - start) / SESSION_ROUNDS
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main() -> None:
    backends = {"numpy": kernels.NUMPY_IMPLS}
    if kernels.NUMBA_IMPLS is not None:
        backends["numba"] = kernels.NUMBA_IMPLS
    else:
        print("numba unavailable; timing the numpy fallback only")

    results = {name: bench_kernels(impls) for name, impls in backends.items()}
    print(f"\nkernel microbenchmarks (mean of {REPEATS} calls, microseconds)")
    header = f"{'kernel':<12}{'dim':>6}" + "".join(f"{b:>12}" for b in backends)
    print(header)
    print("-" * len(header))
    for kernel in ("apply_1q", "apply_cnot", "prob_one"):
        for n in KERNEL_SIZES:
            row = f"{kernel:<12}{n:>6}"
            for backend in backends:
                row += f"{results[backend][kernel][n] * 1e6:>12.2f}"
            print(row)

    print(f"\nhonest protocol throughput ({SESSION_ROUNDS} rounds)")
    for backend, impls in backends.items():
        per_round = bench_session(impls)
        print(f"{backend:>8}: {per_round * 1e6:8.1f} us/round "
              f"({1.0 / per_round:,.0f} rounds/s)")


if __name__ == "__main__":
    main()
