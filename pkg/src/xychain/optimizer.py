"""Peak arrival times, optimal fields and parameter sweeps."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .chain import ChainSpec
from .fidelity import FieldDecomposition

COARSE_STEP = 0.1
REFINE_TOL = 1e-3
TIE_TOL = 1e-9
ENVELOPE = (0.45, 0.55)
ENVELOPE_CHECK_STEP = 1.0

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PeakResult:
    t0: float
    F: float
    window: tuple[float, float]
    coarse_step: float
    refined_tolerance: float
    # full-window step used to confirm an envelope-restricted search, if any
    check_step: float | None = None


@dataclass(frozen=True)
class FieldOptimum:
    h_star: float
    period: float
    attains: float


class ParityPrediction(enum.Enum):
    MAX_AT_ZERO_FIELD = "max"
    MIN_AT_ZERO_FIELD = "min"
    INDETERMINATE = "indeterminate"


def _as_batch(objective: Callable, vectorized: bool) -> Callable[[np.ndarray], np.ndarray]:
    if vectorized:
        return lambda ts: np.asarray(objective(np.asarray(ts, dtype=float)), dtype=float)
    return lambda ts: np.array([float(objective(float(t))) for t in ts])


def coarse_grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    ts = lo + step * np.arange(n + 1)
    if ts[-1] < hi - 1e-12:
        ts = np.append(ts, hi)
    return ts


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = REFINE_TOL):
    """Maximize ``f`` on [a, b]; returns the best (t, f(t)) seen, endpoints included."""
    best_t, best_f = a, f(a)
    fb = f(b)
    if fb > best_f:
        best_t, best_f = b, fb
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    for t, v in ((c, fc), (d, fd)):
        if v > best_f:
            best_t, best_f = t, v
    return best_t, best_f


def find_peak(
    chain: ChainSpec | None,
    objective: Callable,
    window: tuple[float, float] | None = None,
    *,
    vectorized: bool = False,
    step: float = COARSE_STEP,
    tol: float = REFINE_TOL,
) -> PeakResult:
    """Window-global maximum of ``objective(t)``.

    Scans the window at ``step``, then golden-section refines the bracket
    spanning two coarse points either side of the best sample. The window
    defaults to [0, N]. Values within 1e-9 of each other are tied and the
    earlier time wins.
    """
    if window is None:
        if chain is None:
            raise ValueError("either a chain or an explicit window is required")
        window = (0.0, float(chain.n_sites))
    lo, hi = map(float, window)
    if not lo < hi:
        raise ValueError(f"empty time window [{lo}, {hi}]")
    batch = _as_batch(objective, vectorized)
    ts = coarse_grid(lo, hi, step)
    values = batch(ts)
    top = float(np.max(values))
    i = int(np.flatnonzero(values >= top - TIE_TOL)[0])
    t_best, f_best = float(ts[i]), float(values[i])
    a, b = float(ts[max(i - 2, 0)]), float(ts[min(i + 2, len(ts) - 1)])
    t_ref, f_ref = golden_section_max(lambda t: float(batch(np.array([t]))[0]), a, b, tol)
    if f_ref > f_best + TIE_TOL or (abs(f_ref - f_best) <= TIE_TOL and t_ref < t_best):
        t_best, f_best = t_ref, f_ref
    return PeakResult(t_best, f_best, (lo, hi), step, tol)


def envelope_peak(
    chain: ChainSpec,
    objective: Callable,
    *,
    vectorized: bool = True,
    envelope: tuple[float, float] = ENVELOPE,
    check_step: float = ENVELOPE_CHECK_STEP,
    step: float = COARSE_STEP,
    tol: float = REFINE_TOL,
) -> PeakResult:
    """Peak search restricted to the arrival envelope ``[0.45 N, 0.55 N]``.

    The result is accepted only if it dominates a coarse scan of the whole
    [0, N] window at ``check_step``; otherwise the full window is searched.
    """
    n = float(chain.n_sites)
    inner = find_peak(
        chain, objective, (envelope[0] * n, envelope[1] * n),
        vectorized=vectorized, step=step, tol=tol,
    )
    batch = _as_batch(objective, vectorized)
    check = batch(coarse_grid(0.0, n, check_step))
    if float(np.max(check)) > inner.F + TIE_TOL:
        return find_peak(chain, objective, vectorized=vectorized, step=step, tol=tol)
    return PeakResult(inner.t0, inner.F, inner.window, step, tol, check_step)


def optimal_field(decomp: FieldDecomposition, theta: float = math.pi / 2) -> FieldOptimum:
    """Smallest non-negative field maximizing ``Re[exp(2iht) L(t)]``.

    The field term is periodic in h with period pi/t, so the optimum is
    reported in [0, pi/t).
    """
    t = decomp.time
    period = math.pi / abs(t) if t != 0 else math.inf
    abs_l = decomp.abs_L
    if abs_l == 0.0:
        return FieldOptimum(0.0, period, 0.0)
    attains = math.sin(theta) ** 2 / 2 * abs_l
    if t == 0:
        return FieldOptimum(0.0, period, attains)
    h = ((-math.atan2(decomp.L.imag, decomp.L.real)) % (2 * math.pi)) / (2 * t)
    h %= period
    if h >= period:
        h = 0.0
    return FieldOptimum(h, period, attains)


def h0_parity_prediction(n: int, k: int) -> ParityPrediction:
    """Whether zero field maximizes or minimizes the qubit fidelity.

    For odd N, L(t) is real and its sign at the arrival peak follows
    N mod 4: even k peaks at h = 0 when N = 3 (mod 4), odd k when
    N = 1 (mod 4). For even N, L is imaginary and h = 0 is neither.
    """
    if n % 2 == 0:
        return ParityPrediction.INDETERMINATE
    target = 3 if k % 2 == 0 else 1
    if n % 4 == target:
        return ParityPrediction.MAX_AT_ZERO_FIELD
    return ParityPrediction.MIN_AT_ZERO_FIELD


class SweepError(RuntimeError):
    def __init__(self, index: int, point: Any, cause: BaseException):
        super().__init__(f"sweep point #{index} {point!r} failed: {cause!r}")
        self.index = index
        self.point = point
        self.cause = cause


def sweep(
    points: Sequence[Any],
    objective: Callable[[Any], Any],
    *,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list:
    """Evaluate ``objective`` at every grid point, results in grid order.

    With ``workers > 1`` points go to a process pool, so ``objective`` and
    the points must be picklable. Output does not depend on worker count.
    """
    points = list(points)
    total = len(points)
    results: list = []
    if workers <= 1 or total <= 1:
        for i, p in enumerate(points):
            try:
                results.append(objective(p))
            except Exception as exc:
                raise SweepError(i, p, exc) from exc
            if progress:
                progress(i + 1, total)
        return results
    with ProcessPoolExecutor(max_workers=min(workers, total)) as pool:
        futures = [pool.submit(objective, p) for p in points]
        for i, (p, fut) in enumerate(zip(points, futures)):
            try:
                results.append(fut.result())
            except Exception as exc:
                for other in futures[i + 1:]:
                    other.cancel()
                raise SweepError(i, p, exc) from exc
            if progress:
                progress(i + 1, total)
    return results
