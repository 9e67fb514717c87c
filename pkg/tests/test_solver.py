import numpy as np
import pytest

from levygal import noise as nz
from levygal.solver import (FixedPointError, InitialCondition, LEDGER_COLUMNS, SimulationAborted, SolverConfig,
                            energy_report, simulate, step, with_)


def heat(**kw):
    base = dict(T=1.0, dt=0.01, n=4, operator=None, gamma=1.0, initial=InitialCondition("coeffs", (1.0,)))
    base.update(kw)
    return SolverConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError, match="p must exceed 2"):
        SolverConfig(T=1, dt=0.1, n=4, operator="p_laplacian", p=1.5)
    with pytest.raises(ValueError):
        SolverConfig(T=1, dt=0.3, n=4)
    with pytest.raises(ValueError):
        SolverConfig(T=1, dt=0.1, n=4, gamma=0.0, convection=True)
    assert SolverConfig(T=1, dt=0.1, n=4, operator="none").operator is None


def test_zero_stays_zero():
    for op in ("smagorinsky", "p_laplacian", "biharmonic", "polynomial", None):
        tr = simulate(SolverConfig(T=0.1, dt=0.01, n=6, operator=op))
        assert not np.any(tr.states) and not np.any(tr.ledger)
        assert energy_report(tr) == {"sup_H2": 0.0, "int_V2": 0.0, "int_Xp": 0.0, "max_residual": 0.0}


def test_pure_heat_closed_form():
    tr = simulate(heat())
    factor = (1 + 0.01 * np.pi ** 2) ** -np.arange(101)
    np.testing.assert_allclose(tr.states[:, 0], factor, rtol=1e-12)
    assert not np.any(tr.states[:, 1:])
    int_v2 = 0.01 * np.pi ** 2 * np.sum(factor[:-1] ** 2)
    assert energy_report(tr)["int_V2"] == pytest.approx(int_v2, rel=1e-12)


def test_single_step_api():
    cfg = heat()
    u1 = step(np.array([1.0, 0, 0, 0]), cfg)
    assert u1[0] == pytest.approx(1 / (1 + 0.01 * np.pi ** 2), rel=1e-14)


def test_one_mode_p_laplacian_decays():
    cfg = SolverConfig(T=0.5, dt=1e-3, n=1, operator="p_laplacian", initial=InitialCondition("coeffs", (0.2,)))
    h = np.abs(simulate(cfg).states[:, 0])
    assert np.all(np.diff(h) < 0)
    fine = simulate(with_(cfg, dt=1e-4)).states[::10, 0]
    assert np.max(np.abs(fine - simulate(cfg).states[:, 0])) < 1e-3


def test_running_sum_of_wiener():
    noise = nz.NoiseDescriptor(q=[0.5])
    cfg = SolverConfig(T=1.0, dt=0.01, n=3, gamma=0.0, noise=noise, seed=11)
    tr = simulate(cfg)
    path = nz.sample_path(noise, 1.0, 0.01, 11, modes=3)
    np.testing.assert_array_equal(tr.states[1:, 0], np.cumsum(path.wiener[:, 0]))
    assert tr.final[0] == np.sum(path.wiener[:, 0]) or tr.final[0] == pytest.approx(np.sum(path.wiener[:, 0]), abs=1e-15)


def test_determinism_bit_identical():
    a1 = np.zeros(6)
    a1[0] = 0.4
    noise = nz.NoiseDescriptor.power_law(0.5, 1.0, 6, marks=(nz.Mark(3.0, a1, 0.2),))
    cfg = SolverConfig(T=0.05, dt=1e-4, n=6, operator="smagorinsky", noise=noise, seed=4,
                       initial=InitialCondition("random", amplitude=0.3))
    a, b = simulate(cfg), simulate(cfg)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.ledger, b.ledger)
    assert a.jump_log == b.jump_log


def test_ledger_identity_and_report():
    a1 = np.zeros(8)
    a1[1] = 0.3
    noise = nz.NoiseDescriptor.power_law(0.5, 1.0, 8, g_kind=nz.DIAGONAL_LINEAR,
                                         marks=(nz.Mark(3.0, a1, 0.2),),
                                         large_jumps=(nz.Mark(1.0, np.zeros(8), -0.5),))
    cfg = SolverConfig(T=0.2, dt=1e-4, n=8, operator="smagorinsky", truncation=2.0, cutoff=1.0, convection=True,
                       noise=noise, seed=2, initial=InitialCondition("coeffs", (1.0, 0.3)))
    tr = simulate(cfg)
    assert tr.ledger.shape == (2000, len(LEDGER_COLUMNS))
    assert tr.relative_residuals().max() <= 1e-9
    rep = energy_report(tr)
    assert rep["sup_H2"] >= float(tr.final @ tr.final)
    assert tr.jump_flags().sum() >= 1


def test_implicit_newton_and_picard():
    cfg = SolverConfig(T=0.05, dt=1e-4, n=4, operator="p_laplacian", implicit_F=True,
                       initial=InitialCondition("coeffs", (0.5, 0.1)))
    a = simulate(cfg)
    b = simulate(with_(cfg, implicit_method="picard"))
    np.testing.assert_allclose(a.states, b.states, atol=1e-10)
    assert a.relative_residuals().max() <= 1e-9


def test_fixed_point_failure_reports_history():
    cfg = SolverConfig(T=0.01, dt=1e-3, n=8, operator="p_laplacian", gamma=0.0, implicit_F=True,
                       implicit_method="picard", max_iter=5, initial=InitialCondition("coeffs", (1.0, 0.3)))
    with pytest.raises(FixedPointError) as exc:
        simulate(cfg)
    assert exc.value.step == 0 and len(exc.value.history) >= 1


def test_runaway_aborts_with_partial_trajectory():
    cfg = SolverConfig(T=0.1, dt=1e-3, n=16, operator="smagorinsky", initial=InitialCondition("coeffs", (5.0, 2.0)))
    with pytest.raises(SimulationAborted) as exc:
        simulate(cfg)
    tr = exc.value.trajectory
    assert tr is not None and not tr.complete and tr.states.shape[0] == exc.value.step + 1


def test_random_initial_prefix_consistent():
    ic = InitialCondition("random", r=1.0, amplitude=2.0)
    assert np.array_equal(ic.sample(4, 3), ic.sample(10, 3)[:4])
    assert ic.second_moment(3) == pytest.approx(4 * (1 + 1 / 4 + 1 / 9))
