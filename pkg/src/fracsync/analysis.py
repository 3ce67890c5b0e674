"""Post-processing: error prediction, sync timing, separation, convergence.

The closed-loop error of the cancellation controller obeys scalar
fractional relaxation, so its exact solution is e_i(0) times the
one-parameter Mittag-Leffler function at -t^q_i. That function is
evaluated here by direct series summation, switching to arbitrary
precision when the alternating terms grow too large for float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .errors import (
    DomainExceeded,
    GridMismatch,
    InvalidOrder,
    MissingErrors,
    ZeroInitialSeparation,
)
from .solver import SolverConfig, Trajectory, integrate
from .systems import SystemDef

_SERIES_TOL = 1e-16
_MAX_ABS_ARG = 30.0
_MAX_TERMS = 200_000
# Above this many digits of intermediate growth, float64 summation loses
# too much to cancellation and the mpmath path takes over.
_FLOAT_PEAK_LOG10 = 6.0
# A float64 sum is kept only while its estimated relative error, roughly
# 4e-15 times the magnitude sum over the result, stays below this bound.
_FLOAT_REL_TARGET = 1e-7


def _series_peak(q: float, az: float) -> tuple[float, float]:
    """Estimate (log10 of the largest series term, its index)."""
    if az <= 1.0:
        return 0.0, 0.0
    kstar = az ** (1.0 / q) / q
    log10e = math.log10(math.e)
    best = 0.0
    for k in {math.floor(kstar), math.ceil(kstar), max(1, math.floor(kstar) - 1)}:
        val = k * math.log10(az) - math.lgamma(q * k + 1.0) * log10e
        best = max(best, val)
    return best, kstar


def mittag_leffler(q: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_q(z) for q in (0, 1], |z| <= 30.

    The defining series sum_k z^k / Gamma(q*k + 1) is summed in float64
    with exactly rounded accumulation while that can represent the result
    to at least seven significant digits; sums whose alternating terms
    cancel too deeply for that, and sums whose largest term overflows the
    comfortable float64 range, run in mpmath with enough working digits
    to absorb the cancellation. Relative error is below 1e-7 on the whole
    domain and near machine precision away from heavy cancellation.
    """
    q = float(q)
    if not (math.isfinite(q) and 0.0 < q <= 1.0):
        raise InvalidOrder(f"order {q!r} outside (0, 1]")
    z = float(z)
    if not math.isfinite(z):
        raise DomainExceeded(f"argument must be finite, got {z!r}")
    az = abs(z)
    if az > _MAX_ABS_ARG:
        raise DomainExceeded(f"|z| = {az:g} exceeds the supported series domain ({_MAX_ABS_ARG:g})")
    if z == 0.0:
        return 1.0
    peak10, kstar = _series_peak(q, az)
    if kstar > _MAX_TERMS:
        raise DomainExceeded(
            f"series needs about {kstar:.0f} terms at q = {q:g}, |z| = {az:g}; not supported"
        )
    if peak10 <= _FLOAT_PEAK_LOG10:
        lz = math.log(az)
        negative = z < 0.0
        terms = []
        mags = []
        k = 0
        while True:
            mag = math.exp(k * lz - math.lgamma(q * k + 1.0))
            mags.append(mag)
            terms.append(-mag if (negative and k % 2 == 1) else mag)
            if k > kstar and mag < _SERIES_TOL:
                break
            k += 1
        total = math.fsum(terms)
        magsum = math.fsum(mags)
        if abs(total) > 0.0 and 4e-15 * magsum <= _FLOAT_REL_TARGET * abs(total):
            return total
        # Cancellation ate too many digits; redo with enough of them.
        if abs(total) > 0.0:
            lost = math.log10(magsum / abs(total))
        else:
            lost = peak10 + 16.0
        digits = min(80, max(36, int(lost) + 30))
        return _mittag_leffler_mp(q, z, kstar, digits)
    return _mittag_leffler_mp(q, z, kstar, int(peak10) + 30)


def _mittag_leffler_mp(q: float, z: float, kstar: float, digits: int) -> float:
    with mpmath.workdps(digits):
        zm = mpmath.mpf(z)
        qm = mpmath.mpf(q)
        # Truncate relative to working precision, not to float64's, so
        # results far below 1 keep their leading digits.
        tol = mpmath.mpf(10) ** (5 - digits)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        k = 0
        while True:
            term = power / mpmath.gamma(qm * k + 1)
            total += term
            if k > kstar and abs(term) < tol:
                break
            k += 1
            power *= zm
        return float(total)


def predicted_error(e0, orders, t: float) -> np.ndarray:
    """Exact error components e0_i * E_{q_i}(-t^{q_i}) of the cancellation loop."""
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError(f"time must be finite and nonnegative, got {t!r}")
    q = orders.as_array() if hasattr(orders, "as_array") else np.asarray(orders, dtype=np.float64)
    e0 = np.asarray(e0, dtype=np.float64)
    if e0.shape != q.shape:
        raise ValueError(f"initial errors {e0.shape} and orders {q.shape} must align")
    return np.array([e0[i] * mittag_leffler(q[i], -(t ** q[i])) for i in range(q.size)])


@dataclass(frozen=True)
class SyncSummary:
    """First time the error norm stays under tol, plus the final errors."""

    sync_time: Optional[float]
    final_errors: tuple
    tol: float

    @property
    def final_max_error(self) -> float:
        return max(abs(float(v)) for v in self.final_errors)

    @property
    def final_below_tol(self) -> bool:
        return self.final_max_error < self.tol

    def to_dict(self) -> dict:
        return {
            "sync_time": None if self.sync_time is None else float(self.sync_time),
            "final_errors": [float(v) for v in self.final_errors],
            "final_max_error": float(self.final_max_error),
            "final_below_tol": bool(self.final_below_tol),
            "tol": float(self.tol),
        }


def sync_time(traj: Trajectory, tol: float) -> SyncSummary:
    """Earliest grid time after which max_i |e_i| stays below tol for good.

    sync_time is None when the last grid point still violates the
    threshold; a trajectory that never violates it reports time zero.
    """
    if traj.errors is None:
        raise MissingErrors("trajectory carries no error columns")
    if not (isinstance(tol, (int, float)) and math.isfinite(tol) and tol > 0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    sup = np.max(np.abs(traj.errors), axis=1)
    above = np.flatnonzero(sup >= tol)
    if above.size == 0:
        t_star: Optional[float] = float(traj.times[0])
    elif above[-1] == sup.size - 1:
        t_star = None
    else:
        t_star = float(traj.times[above[-1] + 1])
    final = tuple(float(v) for v in traj.errors[-1])
    return SyncSummary(sync_time=t_star, final_errors=final, tol=float(tol))


def divergence_factor(a: Trajectory, b: Trajectory) -> float:
    """max_t ||a - b|| / ||a(0) - b(0)|| over a shared time grid."""
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise GridMismatch("trajectories do not share a time grid")
    if a.states.shape != b.states.shape:
        raise GridMismatch(
            f"state shapes differ: {a.states.shape} vs {b.states.shape}"
        )
    sep = np.linalg.norm(a.states - b.states, axis=1)
    if sep[0] == 0.0:
        raise ZeroInitialSeparation("trajectories start from the same state")
    return float(np.max(sep) / sep[0])


@dataclass(frozen=True)
class ConvergenceProblem:
    """Reference problem with a known exact solution at t_end."""

    system: SystemDef
    orders: Sequence[float]
    y0: Sequence[float]
    t_end: float
    exact: Callable[[float], np.ndarray]


@dataclass(frozen=True)
class ConvergenceReport:
    step_sizes: tuple
    errors: tuple
    orders: tuple

    def to_dict(self) -> dict:
        return {
            "step_sizes": [float(v) for v in self.step_sizes],
            "errors": [float(v) for v in self.errors],
            "orders": [float(v) for v in self.orders],
        }


def empirical_orders(errors: Sequence[float]) -> tuple:
    """log2 ratios of successive errors from a halving-step refinement."""
    errs = [float(e) for e in errors]
    if len(errs) < 2:
        raise ValueError("need at least two error values")
    if any(e <= 0.0 for e in errs):
        raise ValueError("errors must be positive to take ratios")
    return tuple(math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1))


def convergence_order(problem: ConvergenceProblem, h0: float, levels: int) -> ConvergenceReport:
    """Terminal-error refinement study with step sizes h0 / 2^k.

    Runs `levels` integrations, measures max-abs error against the exact
    solution at t_end, and reports the pairwise empirical orders.
    """
    if levels < 2:
        raise ValueError("need at least two refinement levels")
    hs = []
    errs = []
    for k in range(levels):
        h = float(h0) / (2.0**k)
        cfg = SolverConfig.for_horizon(h, problem.t_end)
        traj = integrate(problem.system, problem.orders, problem.y0, cfg)
        ref = np.asarray(problem.exact(problem.t_end), dtype=np.float64)
        errs.append(float(np.max(np.abs(traj.final_state - ref))))
        hs.append(h)
    return ConvergenceReport(
        step_sizes=tuple(hs), errors=tuple(errs), orders=empirical_orders(errs)
    )
