"""Channel tensor containers and the shared numerical kernels.

A channel impulse response (CIR) snapshot is a complex 3-D tensor indexed
(receive row, transmit column, delay tap); its frequency-domain counterpart,
the channel transfer function (CTF), is indexed (receive row, transmit
column, subcarrier).  Everything downstream is built on three kernels kept
here: the delay-axis DFT, the dominant squared singular value, and a
nearest-rank percentile.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

SCENARIOS = ("LOS", "NLOS")

DEFAULT_TAP_SPACING = 1.3e-9  # seconds; 768 MHz sounding bandwidth

# Iteration budget used by the batched sweeps before the dense fallback.
# Signal-dominated matrices converge in a handful of iterations; noise
# matrices have a near-degenerate top of the spectrum and are cheaper to
# hand straight to LAPACK than to iterate on.
SWEEP_ITERATION_BUDGET = 32

_POWER_RTOL = 1e-12
_POWER_MAX_ITER = 1000


def _require_finite_sum(data: np.ndarray, what: str) -> None:
    # a finite sum implies no NaN/Inf anywhere; avoids materialising a
    # full boolean mask for gigabyte-scale tensors
    if not np.isfinite(np.sum(data)):
        raise ValueError(f"{what} contains non-finite values")


@dataclass(frozen=True)
class MeasurementKey:
    """Identifies one CIR snapshot: position u, scenario s, snapshot index i."""

    u: int = 0
    s: str = "LOS"
    i: int = 0

    def __post_init__(self):
        if self.s not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.s!r}")
        if self.u < 0 or self.i < 0:
            raise ValueError("position and snapshot indices must be non-negative")


@dataclass
class CirSnapshot:
    """Delay-domain MIMO channel: tensor[rx, tx, tap], one matrix per delay tap."""

    tensor: np.ndarray
    tap_spacing: float = DEFAULT_TAP_SPACING
    key: MeasurementKey = field(default_factory=MeasurementKey)

    def __post_init__(self):
        self.tensor = np.ascontiguousarray(self.tensor, dtype=np.complex128)
        if self.tensor.ndim != 3 or self.tensor.size == 0:
            raise ValueError("CIR tensor must be a non-empty (rx, tx, tap) array")
        if self.tap_spacing <= 0:
            raise ValueError("tap_spacing must be positive")
        _require_finite_sum(self.tensor, "CIR tensor")

    @property
    def n_rx(self) -> int:
        return self.tensor.shape[0]

    @property
    def n_tx(self) -> int:
        return self.tensor.shape[1]

    @property
    def n_tap(self) -> int:
        return self.tensor.shape[2]

    @property
    def max_delay(self) -> float:
        """Largest observable delay, n_tap * tap_spacing."""
        return self.n_tap * self.tap_spacing


@dataclass
class CtfSnapshot:
    """Frequency-domain MIMO channel: tensor[rx, tx, subcarrier]."""

    tensor: np.ndarray
    key: MeasurementKey = field(default_factory=MeasurementKey)

    def __post_init__(self):
        self.tensor = np.ascontiguousarray(self.tensor, dtype=np.complex128)
        if self.tensor.ndim != 3 or self.tensor.size == 0:
            raise ValueError("CTF tensor must be a non-empty (rx, tx, subcarrier) array")
        _require_finite_sum(self.tensor, "CTF tensor")

    @property
    def n_subcarriers(self) -> int:
        return self.tensor.shape[2]


def fft_delay_axis(cir: CirSnapshot, n_points: int | None = None) -> CtfSnapshot:
    """Unnormalised forward DFT along the delay axis.

    Bin k of the result is sum_d h[d] * exp(-2j*pi*k*d/n_points); with the
    unnormalised convention Parseval reads
    sum_d |h[d]|^2 == (1/K) * sum_k |H[k]|^2.
    """
    if n_points is None:
        n_points = cir.n_tap
    if n_points < cir.n_tap:
        raise ValueError(
            f"n_points ({n_points}) must be at least the tap count ({cir.n_tap})"
        )
    spectrum = np.fft.fft(cir.tensor, n=n_points, axis=2)
    return CtfSnapshot(tensor=spectrum, key=cir.key)


def dominant_sq_singular_value(matrix: np.ndarray) -> float:
    """Largest squared singular value of a complex matrix.

    Power iteration on the Gram matrix of the smaller dimension with a
    deterministic all-ones start vector; falls back to a dense
    eigendecomposition if the Rayleigh quotient has not settled to a
    relative 1e-12 within 1000 iterations or fails a trace sanity bound.
    """
    H = np.asarray(matrix, dtype=np.complex128)
    if H.ndim != 2 or H.size == 0:
        raise ValueError("input must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(H)):
        raise ValueError("input matrix contains non-finite values")
    return float(
        dominant_sq_singular_values(H[np.newaxis], budget=_POWER_MAX_ITER)[0]
    )


def dominant_sq_singular_values(
    stack: np.ndarray, budget: int = SWEEP_ITERATION_BUDGET
) -> np.ndarray:
    """Dominant squared singular value for each matrix in a (n, rx, tx) stack.

    Same iteration as :func:`dominant_sq_singular_value` run lane-parallel;
    lanes that have not converged after ``budget`` iterations are finished
    with a dense eigendecomposition, so the result is always accurate.
    """
    # strided views (e.g. a moveaxis of the tap axis) hit BLAS's slow
    # element-wise path; the copy pays for itself many times over
    stack = np.ascontiguousarray(stack, dtype=np.complex128)
    if stack.ndim != 3:
        raise ValueError("stack must be (n, rx, tx)")
    n, n_rx, n_tx = stack.shape
    if n == 0:
        return np.zeros(0)

    # Gram matrix of the smaller side; eigenvalues of H H^H and H^H H agree.
    if n_rx >= n_tx:
        gram = np.matmul(stack.conj().transpose(0, 2, 1), stack)
    else:
        gram = np.matmul(stack, stack.conj().transpose(0, 2, 1))
    m = gram.shape[1]

    trace = np.einsum("nii->n", gram).real
    out = np.zeros(n)
    live = trace > 0.0  # all-zero matrices stay at 0
    done = ~live

    vec = np.ones((n, m), dtype=np.complex128) / math.sqrt(m)
    rayleigh = np.full(n, np.nan)
    stalled = np.zeros(n, dtype=bool)

    for _ in range(budget):
        if done.all():
            break
        w = np.matmul(gram, vec[..., np.newaxis])[..., 0]
        rq = np.einsum("ni,ni->n", vec.conj(), w).real
        active = ~done
        settled = active & (np.abs(rq - rayleigh) <= _POWER_RTOL * np.abs(rq))
        out = np.where(settled, rq, out)
        done = done | settled
        rayleigh = np.where(active, rq, rayleigh)
        norms = np.linalg.norm(w, axis=1)
        dead = active & (norms == 0.0)  # start vector in the null space
        stalled |= dead
        done |= dead
        safe = np.where(norms > 0.0, norms, 1.0)
        vec = w / safe[:, np.newaxis]

    pending = ~done
    # a converged Rayleigh quotient below the mean eigenvalue cannot be the
    # dominant one (trace/m is a lower bound on lambda_1)
    suspect = done & (trace > 0.0) & (out < trace / m * (1.0 - 1e-9))
    fallback = pending | stalled | suspect
    if fallback.any():
        idx = np.flatnonzero(fallback)
        eigs = np.linalg.eigvalsh(gram[idx])
        out[idx] = eigs[:, -1]
    return np.maximum(out, 0.0)


def sweep_dominant_sq_singular_values(
    stack: np.ndarray,
    chunk: int = 512,
    budget: int = SWEEP_ITERATION_BUDGET,
) -> np.ndarray:
    """Chunked dominant squared singular values for a large (n, rx, tx) stack.

    Chunking bounds the transient Gram stack; chunks are fanned out to
    worker_count() threads (BLAS releases the GIL, so the sweep scales on
    multicore hosts and degrades to the plain loop on a single core).
    """
    stack = np.asarray(stack)
    if stack.ndim != 3:
        raise ValueError("stack must be (n, rx, tx)")
    if chunk < 1:
        raise ValueError("chunk must be at least 1")
    n = stack.shape[0]
    out = np.empty(n, dtype=np.float64)
    spans = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    workers = min(worker_count(), len(spans))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                lambda ab: dominant_sq_singular_values(stack[ab[0]:ab[1]], budget),
                spans,
            )
            for (a, b), values in zip(spans, results):
                out[a:b] = values
    else:
        for a, b in spans:
            out[a:b] = dominant_sq_singular_values(stack[a:b], budget)
    return out


def percentile(values, q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * N)-th smallest value."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("percentile of an empty list is undefined")
    if not 0.0 < q <= 100.0:
        raise ValueError(f"q must lie in (0, 100], got {q}")
    rank = math.ceil(q * arr.size / 100.0)
    rank = min(max(rank, 1), arr.size)
    return float(np.partition(arr, rank - 1)[rank - 1])


def worker_count() -> int:
    """Thread count for the chunked sweeps; HMDCHAN_THREADS overrides."""
    env = os.environ.get("HMDCHAN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"HMDCHAN_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError("HMDCHAN_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1
