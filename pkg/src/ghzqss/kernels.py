"""Hot state-vector kernels: numba-jitted loops with a pure-numpy fallback.

Every kernel mutates a contiguous complex128 amplitude array in place and
assumes mixed-radix indexing: a wire with element stride ``s`` and dimension 2
has digit ``(i // s) % 2`` at flat index ``i``.  Strides of qubit wires are
always multiples of the trailing ancilla dimension, so the reshape tricks in
the numpy path are valid as long as the ancilla stays the least significant
subsystem (the register layout guarantees that).

Backend selection is controlled by the environment variable
``GHZQSS_KERNELS``:

* ``auto`` (default) - numba when importable, else numpy
* ``numba``          - require numba, raise if unavailable
* ``numpy``          - force the vectorized fallback

``benchmarks/bench_kernels.py`` times both implementations side by side.
"""

from __future__ import annotations

import os

import numpy as np


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _np_apply_1q(amps: np.ndarray, stride: int,
                 m00: complex, m01: complex, m10: complex, m11: complex) -> None:
    v = amps.reshape(-1, 2, stride)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def _np_apply_cnot(amps: np.ndarray, cstride: int, tstride: int) -> None:
    # Swap the target digit within the control=1 sector.  The reshape either
    # way is exact because distinct qubit strides differ by powers of two.
    if cstride > tstride:
        v = amps.reshape(-1, 2, cstride // (2 * tstride), 2, tstride)
        sector = v[:, 1]
        tmp = sector[:, :, 0, :].copy()
        sector[:, :, 0, :] = sector[:, :, 1, :]
        sector[:, :, 1, :] = tmp
    else:
        v = amps.reshape(-1, 2, tstride // (2 * cstride), 2, cstride)
        tmp = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp


def _np_prob_one(amps: np.ndarray, stride: int) -> float:
    v = amps.reshape(-1, 2, stride)
    return float(np.sum(np.abs(v[:, 1, :]) ** 2))


def _np_project_bit(amps: np.ndarray, stride: int, bit: int) -> float:
    v = amps.reshape(-1, 2, stride)
    kept = float(np.sum(np.abs(v[:, bit, :]) ** 2))
    v[:, 1 - bit, :] = 0.0
    return kept


NUMPY_IMPLS = {
    "apply_1q": _np_apply_1q,
    "apply_cnot": _np_apply_cnot,
    "prob_one": _np_prob_one,
    "project_bit": _np_project_bit,
}


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _build_numba_impls():
    import numba

    @numba.njit(cache=True)
    def apply_1q(amps, stride, m00, m01, m10, m11):
        n = amps.shape[0]
        period = 2 * stride
        for base in range(0, n, period):
            for k in range(base, base + stride):
                j = k + stride
                a0 = amps[k]
                a1 = amps[j]
                amps[k] = m00 * a0 + m01 * a1
                amps[j] = m10 * a0 + m11 * a1

    @numba.njit(cache=True)
    def apply_cnot(amps, cstride, tstride):
        n = amps.shape[0]
        for i in range(n):
            if (i // cstride) % 2 == 1 and (i // tstride) % 2 == 0:
                j = i + tstride
                tmp = amps[i]
                amps[i] = amps[j]
                amps[j] = tmp

    @numba.njit(cache=True)
    def prob_one(amps, stride):
        n = amps.shape[0]
        total = 0.0
        for i in range(n):
            if (i // stride) % 2 == 1:
                a = amps[i]
                total += a.real * a.real + a.imag * a.imag
        return total

    @numba.njit(cache=True)
    def project_bit(amps, stride, bit):
        n = amps.shape[0]
        kept = 0.0
        for i in range(n):
            if (i // stride) % 2 == bit:
                a = amps[i]
                kept += a.real * a.real + a.imag * a.imag
            else:
                amps[i] = 0.0
        return kept

    return {
        "apply_1q": apply_1q,
        "apply_cnot": apply_cnot,
        "prob_one": prob_one,
        "project_bit": project_bit,
    }


try:
    NUMBA_IMPLS = _build_numba_impls()
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_IMPLS = None


def _resolve_backend() -> str:
    flag = os.environ.get("GHZQSS_KERNELS", "auto").lower()
    if flag not in ("auto", "numba", "numpy"):
        raise ValueError(f"GHZQSS_KERNELS must be auto|numba|numpy, got {flag!r}")
    if flag == "numpy":
        return "numpy"
    if flag == "numba":
        if NUMBA_IMPLS is None:
            raise RuntimeError("GHZQSS_KERNELS=numba but numba is not importable")
        return "numba"
    return "numba" if NUMBA_IMPLS is not None else "numpy"


BACKEND = _resolve_backend()
_ACTIVE = NUMBA_IMPLS if BACKEND == "numba" else NUMPY_IMPLS

apply_1q = _ACTIVE["apply_1q"]
apply_cnot = _ACTIVE["apply_cnot"]
prob_one = _ACTIVE["prob_one"]
project_bit = _ACTIVE["project_bit"]
