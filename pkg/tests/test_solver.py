"""Integration driver: accuracy, memory policy, backends, failure paths."""

import math

import numpy as np
import pytest

from fracsync import (
    FinancialParams,
    FractionalOrders,
    SolverConfig,
    SystemDef,
    financial_system,
    integrate,
    integrate_classical_pece,
    resolve_backend,
    volta_system,
    weights_a,
    weights_b,
    zero_system,
)
from fracsync.errors import InvalidOrder, NonFiniteState
from fracsync.kernels import NUMBA_ENABLED

needs_numba = pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend disabled")


def _scalar_system(name, fn):
    return SystemDef(name=name, dimension=1, rhs=fn)


def _reference_abm(rhs, orders, y0, h, n_steps):
    """Textbook per-step evaluation built only on the published weights."""
    y0 = np.asarray(y0, dtype=np.float64)
    d = y0.size
    qa = np.asarray(orders, dtype=np.float64)
    if qa.ndim == 0:
        qa = np.full(d, float(qa))
    states = np.empty((n_steps + 1, d))
    f = np.empty((n_steps + 1, d))
    states[0] = y0
    f[0] = rhs(0.0, y0)
    for n in range(n_steps):
        t1 = (n + 1) * h
        pred = np.empty(d)
        for i in range(d):
            qi = qa[i]
            b = weights_b(qi, n)
            pred[i] = y0[i] + h**qi / math.gamma(qi + 1.0) * np.dot(b, f[: n + 1, i])
        fp = rhs(t1, pred)
        ynew = np.empty(d)
        for i in range(d):
            qi = qa[i]
            a = weights_a(qi, n)
            acc = np.dot(a[: n + 1], f[: n + 1, i]) + a[n + 1] * fp[i]
            ynew[i] = y0[i] + h**qi / math.gamma(qi + 2.0) * acc
        states[n + 1] = ynew
        f[n + 1] = rhs(t1, ynew)
    return states


class TestExactness:
    def test_zero_field_keeps_state(self, backend):
        if backend == "numba":
            pytest.skip("stub system has no compiled kernel")
        traj = integrate(zero_system(), 0.6, [3.0, -2.0, 5.0], SolverConfig(h=0.1, n_steps=20))
        assert np.array_equal(traj.states, np.tile([3.0, -2.0, 5.0], (21, 1)))

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.85, 1.0])
    def test_constant_field_first_step(self, q):
        c = 0.7
        system = _scalar_system("const", lambda t, y: np.array([c]))
        h = 0.02
        traj = integrate(system, q, [1.5], SolverConfig(h=h, n_steps=1))
        expect = 1.5 + c * h**q / math.gamma(q + 1.0)
        assert abs(traj.states[1, 0] - expect) <= 1e-14

    def test_grid_and_initial_state(self):
        system = _scalar_system("decay", lambda t, y: -y)
        cfg = SolverConfig(h=0.01, n_steps=50)
        traj = integrate(system, 0.9, [2.0], cfg)
        assert traj.n_points == 51
        assert np.array_equal(traj.times, np.arange(51) * 0.01)
        assert traj.states[0, 0] == 2.0
        assert np.array_equal(traj.final_state, traj.states[-1])


class TestAccuracy:
    @pytest.mark.parametrize("q,tol", [(0.5, 5e-4), (1.0, 1e-3)])
    def test_power_forcing_recovers_quartic(self, q, tol):
        g = math.gamma(5.0) / math.gamma(5.0 - q)
        system = _scalar_system("power", lambda t, y: np.array([g * t ** (4.0 - q)]))
        cfg = SolverConfig.for_horizon(h=1.0 / 64.0, t_end=1.0)
        traj = integrate(system, q, [0.0], cfg)
        assert abs(traj.states[-1, 0] - 1.0) <= tol

    def test_unit_order_decay_matches_exponential(self):
        system = _scalar_system("decay", lambda t, y: -y)
        cfg = SolverConfig.for_horizon(h=1e-3, t_end=1.0)
        traj = integrate(system, 1.0, [1.0], cfg)
        assert abs(traj.states[-1, 0] - math.exp(-1.0)) <= 1e-5

    def test_matches_reference_scalar(self):
        system = _scalar_system("affine", lambda t, y: t - y)
        cfg = SolverConfig(h=0.01, n_steps=100)
        traj = integrate(system, 0.6, [1.0], cfg)
        ref = _reference_abm(system.rhs, 0.6, [1.0], 0.01, 100)
        assert np.max(np.abs(traj.states - ref)) <= 1e-10

    def test_matches_reference_financial(self, backend):
        system = financial_system()
        orders = FractionalOrders((0.9, 0.95, 1.0))
        cfg = SolverConfig(h=0.005, n_steps=120)
        traj = integrate(system, orders, [2.0, -1.0, 1.0], cfg, backend=backend)
        ref = _reference_abm(system.rhs, orders.as_array(), [2.0, -1.0, 1.0], 0.005, 120)
        assert np.max(np.abs(traj.states - ref)) <= 1e-9


class TestClassicalLimit:
    def test_scalar_unit_order_agrees_per_step(self):
        system = _scalar_system("decay", lambda t, y: -y)
        cfg = SolverConfig(h=0.01, n_steps=100)
        frac = integrate(system, 1.0, [1.0], cfg, backend="numpy")
        classical = integrate_classical_pece(system, [1.0], cfg)
        assert np.max(np.abs(frac.states - classical.states)) <= 1e-12

    def test_financial_unit_order_agrees_per_step(self, backend):
        system = financial_system()
        cfg = SolverConfig(h=0.005, n_steps=200)
        frac = integrate(system, 1.0, [2.0, -1.0, 1.0], cfg, backend=backend)
        classical = integrate_classical_pece(system, [2.0, -1.0, 1.0], cfg)
        assert np.max(np.abs(frac.states - classical.states)) <= 1e-12


class TestMemoryWindow:
    def test_window_covering_whole_run_changes_nothing(self, backend):
        system = volta_system()
        orders = 0.97
        y0 = [8.0, 2.0, 3.0]
        full = integrate(system, orders, y0, SolverConfig(h=0.002, n_steps=300), backend=backend)
        windowed = integrate(
            system, orders, y0, SolverConfig(h=0.002, n_steps=300, memory=301), backend=backend
        )
        assert np.array_equal(full.states, windowed.states)

    def test_short_window_alters_the_tail(self):
        system = financial_system()
        cfg_full = SolverConfig(h=0.01, n_steps=200)
        cfg_short = SolverConfig(h=0.01, n_steps=200, memory=30)
        full = integrate(system, 0.7, [2.0, -1.0, 1.0], cfg_full)
        short = integrate(system, 0.7, [2.0, -1.0, 1.0], cfg_short)
        assert np.all(np.isfinite(short.states))
        assert not np.array_equal(full.states, short.states)
        # the first 30 steps see identical history
        assert np.array_equal(full.states[:31], short.states[:31])

class TestBackends:
    @needs_numba
    def test_parity_financial(self):
        system = financial_system()
        orders = FractionalOrders((0.88, 0.97, 1.0))
        cfg = SolverConfig(h=0.002, n_steps=300)
        a = integrate(system, orders, [2.0, -1.0, 1.0], cfg, backend="numba")
        b = integrate(system, orders, [2.0, -1.0, 1.0], cfg, backend="numpy")
        assert np.max(np.abs(a.states - b.states)) <= 1e-10

    @needs_numba
    def test_parity_volta_with_window(self):
        system = volta_system()
        cfg = SolverConfig(h=0.001, n_steps=400, memory=150)
        a = integrate(system, 0.98, [8.0, 2.0, 3.0], cfg, backend="numba")
        b = integrate(system, 0.98, [8.0, 2.0, 3.0], cfg, backend="numpy")
        assert np.max(np.abs(a.states - b.states)) <= 1e-10

    def test_resolution_rules(self):
        named = financial_system()
        stub = zero_system()
        assert resolve_backend(stub) == "numpy"
        assert resolve_backend(named, "numpy") == "numpy"
        if NUMBA_ENABLED:
            assert resolve_backend(named) == "numba"
            with pytest.raises(RuntimeError):
                resolve_backend(stub, "numba")
        with pytest.raises(ValueError):
            resolve_backend(named, "fortran")

    def test_determinism(self, backend):
        system = financial_system()
        cfg = SolverConfig(h=0.002, n_steps=250)
        a = integrate(system, 0.9, [2.0, -1.0, 1.0], cfg, backend=backend)
        b = integrate(system, 0.9, [2.0, -1.0, 1.0], cfg, backend=backend)
        assert np.array_equal(a.states, b.states)


class TestFailurePaths:
    # The runaway tests drive the state through float overflow on purpose.
    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_runaway_named_system_reports_prefix(self, backend):
        system = financial_system(FinancialParams(alpha=-1000.0))
        cfg = SolverConfig(h=0.01, n_steps=400)
        with pytest.raises(NonFiniteState) as info:
            integrate(system, 0.9, [2.0, -1.0, 1.0], cfg, backend=backend)
        err = info.value
        assert err.step >= 1
        assert err.trajectory is not None
        assert err.trajectory.n_points == err.step
        assert np.all(np.isfinite(err.trajectory.states))
        assert err.time == pytest.approx(err.step * 0.01)
        assert "non-finite" in str(err)

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_runaway_generic_system(self):
        system = _scalar_system("quad", lambda t, y: y * y)
        with pytest.raises(NonFiniteState) as info:
            integrate(system, 1.0, [10.0], SolverConfig(h=0.1, n_steps=200))
        assert np.all(np.isfinite(info.value.trajectory.states))

    @pytest.mark.parametrize("bad", [0.0, 1.5, -0.3, float("nan")])
    def test_bad_order_rejected(self, bad):
        with pytest.raises(InvalidOrder):
            integrate(financial_system(), bad, [2.0, -1.0, 1.0], SolverConfig(h=0.01, n_steps=5))

    def test_wrong_order_count_rejected(self):
        with pytest.raises(InvalidOrder):
            integrate(financial_system(), [0.9, 0.9], [2.0, -1.0, 1.0], SolverConfig(h=0.01, n_steps=5))

    def test_bad_initial_state_rejected(self):
        cfg = SolverConfig(h=0.01, n_steps=5)
        with pytest.raises(ValueError):
            integrate(financial_system(), 0.9, [2.0, -1.0], cfg)
        with pytest.raises(ValueError):
            integrate(financial_system(), 0.9, [2.0, float("inf"), 1.0], cfg)


class TestSolverConfig:
    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            SolverConfig(h=0.0, n_steps=10)
        with pytest.raises(ValueError):
            SolverConfig(h=-0.1, n_steps=10)
        with pytest.raises(ValueError):
            SolverConfig(h=0.1, n_steps=0)
        with pytest.raises(ValueError):
            SolverConfig(h=0.1, n_steps=10, memory=0)

    def test_for_horizon_rounds_step_count(self):
        cfg = SolverConfig.for_horizon(h=0.01, t_end=1.0)
        assert cfg.n_steps == 100
        assert SolverConfig.for_horizon(h=0.3, t_end=1.0).n_steps == 3
        with pytest.raises(ValueError):
            SolverConfig.for_horizon(h=0.01, t_end=-1.0)

    def test_window_property(self):
        assert SolverConfig(h=0.1, n_steps=40).window == 41
        assert SolverConfig(h=0.1, n_steps=40, memory=7).window == 7
