import math

import pytest
from hypothesis import given, strategies as st

from ionpair.atomic import (D, MAGIC_ANGLE, QuadrupoleEnvironment, S, Sublevel, Term,
                            coherence_sensitivities, gradient_pair, linewidth_pairs,
                            quadrupole_angular_factor, quadrupole_pairs, quadrupole_shift,
                            theta_for_alpha, zeeman_shift)
from ionpair.errors import ConfigError, IdenticalLevels

MU_B = 1.399625e6  # Hz/G


def test_s_to_d_zeeman_slope():
    # g_D m_D - g_S m_S for S+1/2 -> D+5/2
    oracle = (1.2 * 2.5 - 2.0023 * 0.5) * MU_B
    pair = gradient_pair()
    assert pair.zeeman_sensitivity == pytest.approx(oracle, rel=1e-12)
    assert pair.zeeman_sensitivity / 1e6 == pytest.approx(2.80, rel=0.01)


@pytest.mark.parametrize("m, factor", [(2.5, -1.0), (1.5, 0.2), (0.5, 0.8),
                                       (-0.5, 0.8), (-1.5, 0.2), (-2.5, -1.0)])
def test_d52_angular_factors(m, factor):
    assert quadrupole_angular_factor(D(m)) == pytest.approx(factor, abs=1e-15)


def test_quadrupole_shift_traceless_over_manifold():
    env = QuadrupoleEnvironment(10.0, 0.3, 2.5)
    total = sum(quadrupole_shift(D(m / 2), env) for m in range(-5, 6, 2))
    assert total == pytest.approx(0.0, abs=1e-12)


def test_s_levels_have_no_quadrupole_shift():
    env = QuadrupoleEnvironment(10.0, 0.0, 2.5)
    assert quadrupole_shift(S(0.5), env) == 0.0


def test_magic_angle_removes_quadrupole_shift():
    env = QuadrupoleEnvironment(30.0, MAGIC_ANGLE, 2.0)
    assert abs(quadrupole_shift(D(2.5), env)) < 1e-12


def test_quadrupole_pair_sensitivities():
    env = QuadrupoleEnvironment(1.0, 0.0, 1.0)
    p1, p2 = quadrupole_pairs(env)
    # same g and same delta-m: exactly equal Zeeman slopes
    assert p1.zeeman_sensitivity == p2.zeeman_sensitivity
    assert p1.zeeman_sensitivity == pytest.approx(1.2 * 2 * MU_B)
    # upper minus lower, times Theta/4 * (3cos^2 - 1) = 1/2
    assert p1.quadrupole_sensitivity == pytest.approx(0.5 * 1.8)
    assert p2.quadrupole_sensitivity == pytest.approx(0.5 * -0.6)


def test_linewidth_pairs_have_opposite_field_slopes():
    p1, p2 = linewidth_pairs()
    assert p1.zeeman_sensitivity == pytest.approx(-p2.zeeman_sensitivity, rel=1e-14)
    assert p1.laser_coupled and p2.laser_coupled


def test_theta_for_alpha_at_zero_beta():
    probe = quadrupole_pairs(QuadrupoleEnvironment(1.0, 0.0, 1.0))
    assert theta_for_alpha(2.977, probe, 0.0) == pytest.approx(2.977 / 1.2)
    env = QuadrupoleEnvironment(12.97, 0.0, 2.977 / 1.2)
    p1, p2 = quadrupole_pairs(env)
    assert p1.detuning(env, 0) - p2.detuning(env, 0) == pytest.approx(2.977 * 12.97)


def test_theta_for_alpha_at_magic_angle_fails():
    probe = quadrupole_pairs(QuadrupoleEnvironment(1.0, 0.0, 1.0))
    with pytest.raises(ConfigError):
        theta_for_alpha(1.0, probe, MAGIC_ANGLE)


def test_detuning_combines_static_zeeman_and_quadrupole():
    env = QuadrupoleEnvironment(5.0, 0.0, 2.0)
    pair = coherence_sensitivities((D(-2.5), D(-0.5)), env, static_detuning=0.7)
    expected = 0.7 + (zeeman_shift(D(-0.5), 0.01) - zeeman_shift(D(-2.5), 0.01)) \
        + 0.25 * 5.0 * 2.0 * 2.0 * (0.8 - (-1.0))
    assert pair.detuning(env, 0.01) == pytest.approx(expected)


@pytest.mark.parametrize("m", [0.0, 1.0, 3.5, 0.25])
def test_bad_d_sublevels_rejected(m):
    with pytest.raises(ConfigError):
        D(m)


def test_s_sublevel_bounds():
    with pytest.raises(ConfigError):
        S(1.5)
    assert S(-0.5).term is Term.S_half


def test_term_parsing_and_default_lifetimes():
    assert Sublevel("D5/2", 0.5).decay_rate == pytest.approx(1 / 1.16)
    assert Sublevel("S", 0.5).decay_rate == 0.0
    assert D(0.5, math.inf).decay_rate == 0.0
    with pytest.raises(ConfigError):
        Sublevel("P3/2", 0.5)


def test_identical_levels_rejected():
    with pytest.raises(IdenticalLevels):
        coherence_sensitivities((D(0.5), D(0.5)), QuadrupoleEnvironment())


@given(st.floats(-20, 20, allow_nan=False))
def test_beta_folding_preserves_angular_factor(beta):
    env = QuadrupoleEnvironment(1.0, beta, 1.0)
    assert 0 <= env.beta <= math.pi / 2 + 1e-12
    assert env.angular_factor == pytest.approx(3 * math.cos(beta) ** 2 - 1, abs=1e-9)


@given(st.floats(0.1, 100), st.floats(0.1, 10), st.floats(0, 1.5))
def test_quadrupole_shift_linear_in_gradient(g, theta, beta):
    e1 = QuadrupoleEnvironment(g, beta, theta)
    e2 = QuadrupoleEnvironment(2 * g, beta, theta)
    assert quadrupole_shift(D(1.5), e2) == pytest.approx(2 * quadrupole_shift(D(1.5), e1))


def test_zeeman_shift_examples():
    assert zeeman_shift(S(0.5), 1.0) / 1e6 == pytest.approx(1.4012, abs=1e-4)
    assert zeeman_shift(D(1.5), 0.0) == 0.0


@given(st.sampled_from([-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]), st.floats(-10, 10),
       st.floats(-10, 10))
def test_zeeman_linear_and_odd_quadrupole_even(m, B, a):
    lvl, mirror = D(m), D(-m)
    assert zeeman_shift(lvl, a * B) == pytest.approx(a * zeeman_shift(lvl, B), abs=1e-6)
    assert zeeman_shift(mirror, B) == -zeeman_shift(lvl, B)
    assert quadrupole_angular_factor(mirror) == quadrupole_angular_factor(lvl)


def test_quadrupole_shift_hand_value():
    env = QuadrupoleEnvironment(10.0, 0.0, 1.0)
    assert quadrupole_shift(D(-0.5), env) == pytest.approx(4.0)


def test_ion_one_pair_zeeman_value():
    p1, _ = quadrupole_pairs(QuadrupoleEnvironment())
    assert p1.zeeman_sensitivity / 1e6 == pytest.approx(3.359, abs=1e-3)


def test_dfs_branches_have_equal_zeeman_sums():
    # |-5/2,+3/2> and |-1/2,-1/2>
    a = zeeman_shift(D(-2.5), 1.0) + zeeman_shift(D(1.5), 1.0)
    b = zeeman_shift(D(-0.5), 1.0) + zeeman_shift(D(-0.5), 1.0)
    assert a == pytest.approx(b, abs=1e-9)
    p1, p2 = quadrupole_pairs(QuadrupoleEnvironment())
    assert p1.zeeman_sensitivity - p2.zeeman_sensitivity == 0.0


@pytest.mark.parametrize("beta", [0.0, 0.4, 1.2])
def test_bell_branch_quadrupole_difference(beta):
    env = QuadrupoleEnvironment(7.0, beta, 1.3)
    unit = 0.25 * (3 * math.cos(beta) ** 2 - 1) * 1.3 * 7.0
    branch_a = quadrupole_shift(D(-2.5), env) + quadrupole_shift(D(1.5), env)
    branch_b = quadrupole_shift(D(-0.5), env) + quadrupole_shift(D(-0.5), env)
    assert branch_a - branch_b == pytest.approx(-2.4 * unit)
    # composed from the per-ion pairs (upper minus lower): same magnitude, opposite sign
    p1, p2 = quadrupole_pairs(env)
    assert (p1.detuning(env, 0) - p2.detuning(env, 0)) == pytest.approx(2.4 * unit)
