import numpy as np
import pytest

from levygal import noise as nz
from levygal.properties import (compensated_martingale, default_noise, noise_determinism, noise_growth_lipschitz,
                                wiener_variance)
from levygal.spaces import Domain, build_basis, project


def test_silent_path_is_zero():
    path = nz.sample_path(nz.NoiseDescriptor(q=np.zeros(4)), 1.0, 0.1, 5)
    assert not np.any(path.wiener) and path.jump_times.size == 0 and path.large_times.size == 0
    assert nz.NoiseDescriptor().is_silent


def test_non_divisible_rejected():
    with pytest.raises(ValueError):
        nz.sample_path(nz.NoiseDescriptor(q=[1.0]), 1.0, 0.3, 0)


def test_descriptor_validation():
    with pytest.raises(ValueError):
        nz.NoiseDescriptor(q=[-1.0])
    with pytest.raises(ValueError):
        nz.Mark(0.0, [1.0])
    with pytest.raises(ValueError):
        nz.NoiseDescriptor(q=[1.0, 1.0], sigma=[1.0, 1.0, 1.0])


def test_event_times_ordered_and_in_horizon():
    desc = default_noise()
    for seed in range(20):
        p = nz.sample_path(desc, 2.0, 0.01, seed)
        assert np.all(np.diff(p.jump_times) > 0)
        assert np.all((p.jump_times > 0) & (p.jump_times <= 2.0))


def test_per_mode_streams_are_prefix_consistent():
    desc = nz.NoiseDescriptor.power_law(1.0, 1.0, 16)
    a = nz.sample_path(desc, 1.0, 0.01, 9, modes=4)
    b = nz.sample_path(desc, 1.0, 0.01, 9, modes=16)
    assert np.array_equal(a.wiener, b.wiener[:, :4])


def test_step_event_index():
    p = nz.LevyNoisePath(0, 1.0, 0.25, np.zeros((4, 1)), np.array([0.25, 0.3, 1.0]), np.array([0, 1, 0]),
                         np.zeros(0), np.zeros(0, dtype=int), np.ones(1))
    small, _ = p.step_event_index()
    assert [list(s) for s in small] == [[0], [1], [], [0]]


def test_refine_path_preserves_sums():
    desc = nz.NoiseDescriptor.power_law(1.0, 1.0, 3)
    p = nz.sample_path(desc, 1.0, 0.1, 2)
    f = nz.refine_path(p, 4)
    assert f.steps == 40 and f.dt == pytest.approx(0.025)
    np.testing.assert_allclose(f.wiener.reshape(10, 4, 3).sum(axis=1), p.wiener, atol=1e-14)


def test_refined_increment_variance():
    desc = nz.NoiseDescriptor(q=[2.0])
    fine = np.concatenate([nz.refine_path(nz.sample_path(desc, 1.0, 0.1, s), 5).wiener[:, 0] for s in range(400)])
    assert fine.var() / (2.0 * 0.02) == pytest.approx(1.0, abs=0.1)


def test_wiener_term_examples():
    add = nz.NoiseDescriptor(q=[1.0, 1.0, 1.0], sigma=[1.0, 0.0, 0.0])
    u = np.zeros(3)
    assert np.all(nz.wiener_term(add, u, np.zeros(3)) == 0)
    np.testing.assert_allclose(nz.wiener_term(add, u, [0.3, 0.0, 0.0]), [0.3, 0, 0])
    diag = nz.NoiseDescriptor(q=[1.0, 1.0], sigma=[0.5, 0.5], g_kind=nz.DIAGONAL_LINEAR)
    np.testing.assert_allclose(nz.wiener_term(diag, np.array([2.0, 0.0]), [0.1, 0.0]), [0.1, 0.0])


def test_compensated_jump_examples():
    n = 4
    w1 = np.eye(n)[0]
    zero = nz.NoiseDescriptor(marks=(nz.Mark(1.0, np.zeros(n)),))
    assert np.all(nz.compensated_jump_term(zero, w1, [], 0.01) == 0)
    one = nz.NoiseDescriptor(marks=(nz.Mark(2.0, w1),))
    np.testing.assert_allclose(nz.compensated_jump_term(one, np.zeros(n), [], 0.01), -0.02 * w1)
    np.testing.assert_allclose(nz.compensated_jump_term(one, np.zeros(n), [0], 0.01), 0.98 * w1)


def test_large_jump_examples():
    b = build_basis(Domain(), 8)
    u = np.arange(1.0, 9.0)
    reset = nz.NoiseDescriptor(large_jumps=(nz.Mark(1.0, np.zeros(8), -1.0),))
    assert np.all(nz.large_jump_term(reset, u, []) == 0)
    np.testing.assert_allclose(nz.large_jump_term(reset, u, [0]), -u)
    x = b.grid()[:, 0]
    bump = project(0.7 * np.exp(-50 * (x - 0.4) ** 2), b).coeffs
    desc = nz.NoiseDescriptor(large_jumps=(nz.Mark(1.0, bump),))
    np.testing.assert_allclose(nz.large_jump_term(desc, u, [0]), bump)


def test_rho_formula():
    desc = nz.NoiseDescriptor(q=[0.5, 0.25], sigma=[1.0, 2.0], g_kind=nz.DIAGONAL_LINEAR,
                              marks=(nz.Mark(2.0, [0.3], 0.1),))
    assert desc.rho == pytest.approx(2 * max(1.0, 2 * 2.0 * (0.09 + 0.01)))


def test_growth_lipschitz_and_statistics():
    desc = default_noise()
    for chk in noise_growth_lipschitz(desc) + compensated_martingale(desc):
        assert chk.passed, chk.line()
    assert wiener_variance().passed
    assert noise_determinism(desc).passed
