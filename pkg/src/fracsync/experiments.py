"""End-to-end runs assembled from the solver, control and analysis layers.

Each runner returns a small bundle holding the trajectory and whatever
summaries the run produces. A run that leaves the finite range is not an
exception at this level: the bundle carries the valid prefix and a
blowup record so callers can persist partial results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import control as ctl
from .analysis import (
    ConvergenceProblem,
    ConvergenceReport,
    SyncSummary,
    convergence_order,
    sync_time,
)
from .errors import NonFiniteState
from .solver import SolverConfig, Trajectory, integrate, resolve_backend
from .systems import (
    FinancialParams,
    SystemDef,
    VoltaParams,
    financial_system,
    volta_system,
    zero_system,
)


@dataclass(frozen=True)
class BlowupInfo:
    step: int
    time: float

    def to_dict(self) -> dict:
        return {"step": int(self.step), "time": float(self.time)}


@dataclass
class SimRun:
    trajectory: Trajectory
    backend: str
    blowup: Optional[BlowupInfo] = None


@dataclass
class SyncRun:
    trajectory: Trajectory
    backend: str
    summary: Optional[SyncSummary]
    stability: ctl.StabilityReport
    design_matrix: np.ndarray
    blowup: Optional[BlowupInfo] = None


def build_system(name: str, fp: FinancialParams, vp: VoltaParams) -> SystemDef:
    if name == "financial":
        return financial_system(fp)
    if name == "volta":
        return volta_system(vp)
    if name == "zero":
        return zero_system()
    raise ValueError(f"unknown system {name!r}")


def run_simulation(
    system: SystemDef, orders, y0, config: SolverConfig, backend: Optional[str] = None
) -> SimRun:
    chosen = resolve_backend(system, backend)
    try:
        traj = integrate(system, orders, y0, config, backend=chosen)
        return SimRun(trajectory=traj, backend=chosen)
    except NonFiniteState as exc:
        return SimRun(
            trajectory=exc.trajectory,
            backend=chosen,
            blowup=BlowupInfo(step=exc.step, time=float(exc.time)),
        )


def closed_loop_matrix(controller: ctl.Controller, vp: VoltaParams) -> np.ndarray:
    """Design matrix whose spectrum the synchronization report checks."""
    if isinstance(controller, ctl.ExactCancellation):
        return np.diag(np.array(controller.lam))
    if isinstance(controller, ctl.LiteralFeedback):
        return ctl.closed_loop_error_matrix(controller.gain_array(vp), vp)
    raise TypeError(f"unknown controller {controller!r}")


def run_synchronization(
    fp: FinancialParams,
    vp: VoltaParams,
    controller: ctl.Controller,
    orders,
    master0,
    slave0,
    config: SolverConfig,
    tol: float,
    backend: Optional[str] = None,
) -> SyncRun:
    system = ctl.coupled_system(fp, vp, controller)
    y0 = np.concatenate(
        [np.asarray(master0, dtype=np.float64), np.asarray(slave0, dtype=np.float64)]
    )
    chosen = resolve_backend(system, backend)
    blowup = None
    try:
        traj = integrate(system, _pair_orders(orders), y0, config, backend=chosen)
    except NonFiniteState as exc:
        traj = exc.trajectory
        blowup = BlowupInfo(step=exc.step, time=float(exc.time))

    master = traj.states[:, :3]
    slave = traj.states[:, 3:]
    errors = slave - master
    if traj.states.shape[0] > 0:
        controls = ctl.control_input(controller, master, slave, fp, vp)
    else:
        controls = np.empty((0, 3))
    traj = Trajectory(times=traj.times, states=traj.states, errors=errors, controls=controls)

    matrix = closed_loop_matrix(controller, vp)
    stability = ctl.matignon_check(matrix, _base_orders(orders))
    summary = None if blowup is not None else sync_time(traj, tol)
    return SyncRun(
        trajectory=traj,
        backend=chosen,
        summary=summary,
        stability=stability,
        design_matrix=matrix,
        blowup=blowup,
    )


def _base_orders(orders) -> np.ndarray:
    if hasattr(orders, "as_array"):
        return orders.as_array()
    arr = np.atleast_1d(np.asarray(orders, dtype=np.float64))
    if arr.size == 1:
        arr = np.full(3, float(arr[0]))
    return arr


def _pair_orders(orders) -> np.ndarray:
    # Master and slave components share the same three orders.
    base = _base_orders(orders)
    if base.size == 3:
        return np.concatenate([base, base])
    return base


# ---------------------------------------------------------------------------
# Step-halving self test on a problem with a known solution.
# ---------------------------------------------------------------------------

# Expected order centers by derivative order, with the shared band width.
CONVERGENCE_CASES = ((0.5, 1.5), (0.8, 1.8), (1.0, 2.0))
CONVERGENCE_BAND = 0.2
CONVERGENCE_H0 = 1.0 / 32.0
CONVERGENCE_LEVELS = 4


def power_forcing_problem(q: float) -> ConvergenceProblem:
    """Scalar problem D^q y = Gamma(5)/Gamma(5-q) * t^(4-q), solution t^4."""
    c = math.gamma(5.0) / math.gamma(5.0 - q)
    system = SystemDef(
        name="power-forcing",
        dimension=1,
        rhs=lambda t, y: np.array([c * t ** (4.0 - q)]),
    )
    return ConvergenceProblem(
        system=system,
        orders=(q,),
        y0=(0.0,),
        t_end=1.0,
        exact=lambda t: np.array([t**4.0]),
    )


@dataclass(frozen=True)
class ConvergenceCase:
    q: float
    expected: float
    band: tuple
    report: ConvergenceReport
    in_band: bool

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d.update(
            {
                "q": float(self.q),
                "expected_order": float(self.expected),
                "band": [float(self.band[0]), float(self.band[1])],
                "in_band": bool(self.in_band),
            }
        )
        return d


def convergence_selftest() -> tuple[list[ConvergenceCase], bool]:
    """Run the refinement study at each case order and check its band."""
    cases = []
    for q, expected in CONVERGENCE_CASES:
        report = convergence_order(power_forcing_problem(q), CONVERGENCE_H0, CONVERGENCE_LEVELS)
        lo, hi = expected - CONVERGENCE_BAND, expected + CONVERGENCE_BAND
        in_band = all(lo <= v <= hi for v in report.orders)
        cases.append(
            ConvergenceCase(q=q, expected=expected, band=(lo, hi), report=report, in_band=in_band)
        )
    return cases, all(c.in_band for c in cases)
