import numpy as np
import pytest

from levygal import noise as nz
from levygal.analysis import (convergence_study, gagliardo_seminorm, increment_statistics, jackknife,
                              minty_residual, moment_study, occupancy_study, uniqueness_experiment)
from levygal.operators import get_operator
from levygal.solver import InitialCondition, SolverConfig, Trajectory, simulate, with_
from levygal.spaces import Domain, build_basis


def linear_traj(N, scale=1.0, n=3):
    t = np.linspace(0, 1, N + 1)
    s = np.zeros((N + 1, n))
    s[:, 0] = scale * t
    return Trajectory(SolverConfig(T=1.0, dt=1.0 / N, n=n), build_basis(Domain(), n), t, s, np.zeros((N, 8)))


def test_gagliardo_constant_and_scaling():
    tr = linear_traj(32)
    tr.states[:] = 1.0
    assert gagliardo_seminorm(tr) == 0.0
    a, b = gagliardo_seminorm(linear_traj(64)), gagliardo_seminorm(linear_traj(64, 2.0))
    assert b == pytest.approx(2 * a, rel=1e-14)


def test_gagliardo_refinement_toward_benchmark():
    vals = [gagliardo_seminorm(linear_traj(N)) ** 2 for N in (64, 128, 256)]
    errs = [abs(v - 8 / 15) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    assert abs(vals[-1] - vals[-2]) / vals[-1] <= 0.05


def test_gagliardo_rejects_bad_parameters():
    with pytest.raises(ValueError):
        gagliardo_seminorm(linear_traj(8), alpha=1.5)


def test_increment_statistics_zero_and_brownian():
    zero = simulate(SolverConfig(T=0.25, dt=1 / 64, n=4))
    rep = increment_statistics([zero], [0.0, 1 / 64, 1 / 16])
    assert np.all(rep.means == 0)
    cfg = SolverConfig(T=1.0, dt=1 / 256, n=8, gamma=0.0, noise=nz.NoiseDescriptor.power_law(1.0, 1.0, 8))
    trs = [simulate(with_(cfg, seed=s)) for s in range(30)]
    rep = increment_statistics(trs, [1 / 256, 1 / 64, 1 / 16, 1 / 4])
    assert 0.4 <= rep.epsilon <= 0.6
    with pytest.raises(ValueError):
        increment_statistics(trs, [1 / 300])


def test_convergence_duplicates_and_validation():
    cfg = SolverConfig(T=0.1, dt=1e-3, n=8, operator="p_laplacian",
                       noise=nz.NoiseDescriptor.power_law(0.05, 1.5, 16), initial=InitialCondition("random", r=2, amplitude=0.1))
    rep = convergence_study(cfg, "n", [8, 8])
    assert rep.distances.tolist() == [0.0] and rep.monotone_cauchy
    with pytest.raises(ValueError):
        convergence_study(cfg, "n", [16, 8])
    with pytest.raises(ValueError):
        convergence_study(cfg, "gamma", [1, 2])


def test_convergence_R_above_gradient_is_exact():
    cfg = SolverConfig(T=0.05, dt=1e-3, n=8, operator="p_laplacian", initial=InitialCondition("coeffs", (0.05,)))
    rep = convergence_study(cfg, "R", [2.0, 4.0])
    assert max(rep.max_gradient) < 2.0
    assert rep.distances.tolist() == [0.0]


def test_uniqueness_identical_and_tau():
    cfg = SolverConfig(T=0.2, dt=1e-3, n=6, operator="p_laplacian", implicit_F=True, gamma=0.0,
                       initial=InitialCondition("coeffs", (1.0, 0.3)))
    rep = uniqueness_experiment(cfg, 0.0, M=1e-3)
    assert rep.identical and rep.sup_distance == 0.0
    assert rep.tau_M is not None and rep.tau_M < cfg.T
    rep = uniqueness_experiment(cfg, 1e-8, M=1e9)
    assert rep.sup_distance <= 1e-8 and rep.tau_M is None
    with pytest.raises(ValueError):
        uniqueness_experiment(cfg, other=with_(cfg, gamma=2.0))


def test_jackknife_matches_standard_error():
    x = np.arange(10.0)
    m, se = jackknife(x)
    assert m == 4.5 and se == pytest.approx(x.std(ddof=1) / np.sqrt(10))


def test_moments_zero_and_initial_scaling():
    zero = moment_study(SolverConfig(T=0.1, dt=0.01, n=4, operator="p_laplacian"), 3)
    assert all(v == (0.0, 0.0) for v in zero.estimates.values())
    ic = InitialCondition("coeffs", (0.3, 0.1))
    a = moment_study(SolverConfig(T=0.1, dt=0.01, n=4, initial=ic), 2)
    b = moment_study(SolverConfig(T=0.1, dt=0.01, n=4, initial=InitialCondition("coeffs", (0.6, 0.2))), 2)
    assert b.estimates["sup_H2"][0] >= 4 * a.estimates["sup_H2"][0] * (1 - 1e-12)
    assert b.estimates["sup_H2"][0] >= 4 * 0.1


def test_occupancy_zero_and_monotone():
    cfg = SolverConfig(T=0.05, dt=1e-3, n=8, operator="p_laplacian", implicit_F=True,
                       initial=InitialCondition("coeffs", (1.5, 0.5)))
    rep = occupancy_study(cfg, [2, 4, 8, 16])
    assert rep.monotone and rep.occupancy[-1] == 0.0
    np.testing.assert_allclose(rep.scaled, rep.occupancy * np.array([2, 4, 8, 16.0]) ** 4)


def test_minty_reports():
    rep = minty_residual(get_operator("p_laplacian"), pairs=2000)
    assert rep.passed and rep.minimum >= -1e-10
    smag = minty_residual(get_operator("smagorinsky"), pairs=2000)
    assert smag.slope_vs_grad2 >= 1 - 1e-9 and smag.c_p_vs_Xp > 0


def test_minty_one_mode_grid():
    b = build_basis(Domain(), 4)
    from levygal.operators import assemble_F
    op = get_operator("p_laplacian", 4)
    grid = np.linspace(-3, 3, 25)
    for a in grid:
        for c in grid:
            u, v = np.eye(4)[0] * a, np.eye(4)[0] * c
            assert float((assemble_F(op, u, b) - assemble_F(op, v, b)) @ (u - v)) >= 0
