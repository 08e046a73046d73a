import numpy as np
import pytest

from mixedadc.channel import LargeScaleMatrix, draw_small_scale
from mixedadc.closed_form import se_theorem1, sinr_breakdown
from mixedadc.monte_carlo import (
    estimate_moments,
    empirical_se,
    rate_ci_halfwidth,
    simulate_mrc_trial,
    verify_bound,
)
from mixedadc.quantization import lloyd_max_alpha

from conftest import config_for, random_instance

BETA_8x3 = LargeScaleMatrix(
    np.array(
        [
            [1.0, 0.2, 0.05],
            [0.4, 1.5, 0.3],
            [0.1, 0.6, 2.0],
            [0.8, 0.1, 0.9],
            [0.3, 0.7, 0.2],
            [1.2, 0.4, 0.6],
            [0.05, 0.9, 0.5],
            [0.6, 0.3, 1.1],
        ]
    ),
    3,
)


# -- single-trial oracle -----------------------------------------------------


def test_trial_terms_sum_to_received(rng):
    for seed in range(10):
        beta = random_instance(rng)
        s = simulate_mrc_trial(beta, config_for(beta, alpha=0.7), seed, trial_index=seed * 3)
        rebuilt = (s.fs_ls + s.fu + s.lu) * s.x + s.fi + s.li + s.qn + s.n
        assert np.allclose(s.received, rebuilt, rtol=1e-12, atol=1e-12 * np.abs(s.received).max())


def test_full_resolution_has_no_quantization_noise(rng):
    beta = random_instance(rng, m_full=0)
    s = simulate_mrc_trial(beta, config_for(beta, alpha=1.0), 5)
    assert np.all(s.qn == 0)


def test_single_user_has_no_interference(rng):
    beta = random_instance(rng, k_range=(1, 1))
    s = simulate_mrc_trial(beta, config_for(beta), 9)
    assert np.all(s.fi == 0) and np.all(s.li == 0)


def test_single_antenna_self_term():
    beta = LargeScaleMatrix([[2.5]], 1)
    rho = 7.0
    s = simulate_mrc_trial(beta, config_for(beta, rho=rho, alpha=0.5), 42)
    g = np.sqrt(2.5) * draw_small_scale(1, 1, 42)[0, 0]
    assert s.fu[0] == pytest.approx(np.sqrt(rho) * (abs(g) ** 2 - 2.5), rel=1e-12)
    assert s.fs_ls[0] == pytest.approx(np.sqrt(rho) * 2.5)


def test_symbols_have_unit_modulus(rng):
    beta = random_instance(rng)
    s = simulate_mrc_trial(beta, config_for(beta), 3)
    assert np.allclose(np.abs(s.x), 1.0)


# -- moments against closed form ---------------------------------------------


@pytest.fixture(scope="module")
def moments_8x3():
    cfg = config_for(BETA_8x3, rho=10.0, alpha=lloyd_max_alpha(2))
    return cfg, estimate_moments(BETA_8x3, cfg, 100_000, base_seed=7)


def test_second_moments_within_three_se(moments_8x3):
    cfg, mom = moments_8x3
    cf = sinr_breakdown(BETA_8x3, cfg)
    for term in ("fu", "lu", "fi", "li", "qn", "n"):
        mean, se = mom.second_moment(term)
        assert np.all(np.abs(mean - cf.term(term)) <= 3 * se), term
    den, se = mom.second_moment("den")
    assert np.all(np.abs(den - cf.npi_power) <= 3 * se)


def test_self_terms_are_centred(moments_8x3):
    _, mom = moments_8x3
    for term in ("fu", "lu"):
        mean, se = mom.mean(term)
        assert np.all(np.abs(mean) <= 3 * se)


def test_signal_amplitude_is_deterministic_in_mean(moments_8x3):
    cfg, mom = moments_8x3
    sig, se = mom.mean("sig")
    assert np.all(np.abs(sig**2 - sinr_breakdown(BETA_8x3, cfg).fs_ls_power) <= 3 * 2 * sig * se)


def test_cross_moments_vanish(moments_8x3):
    # desired signal uncorrelated with NPI, and FI uncorrelated with LI
    _, mom = moments_8x3
    for name in ("dn", "fl"):
        mean, se = mom.cross(name)
        assert np.all(np.abs(mean) <= 4 * se), name


def test_moments_include_split_families(moments_8x3):
    cfg, mom = moments_8x3
    cf = sinr_breakdown(BETA_8x3, cfg)
    ful, se = mom.second_moment("ful")
    assert np.all(np.abs(ful - (cf.fu_power + cf.lu_power)) <= 3 * se)
    fil, se = mom.second_moment("fil")
    assert np.all(np.abs(fil - (cf.fi_power + cf.li_power)) <= 3 * se)


def test_empirical_se_with_exact_npi_is_bound(rng):
    for _ in range(20):
        beta = random_instance(rng)
        cfg = config_for(beta, alpha=0.6)
        got = empirical_se(sinr_breakdown(beta, cfg), beta, cfg).per_user_rate
        assert np.allclose(got, se_theorem1(beta, cfg).per_user_rate, rtol=1e-12, atol=0)


def test_empirical_se_close_to_bound(moments_8x3):
    cfg, mom = moments_8x3
    emp = empirical_se(mom, BETA_8x3, cfg).per_user_rate
    cf = se_theorem1(BETA_8x3, cfg).per_user_rate
    assert np.all(np.abs(emp - cf) / cf < 0.02)
    hw = rate_ci_halfwidth(mom, BETA_8x3, cfg)
    assert np.all(np.abs(emp - cf) <= hw * 3 / 1.96)


def test_ci_halfwidth_scales_as_inverse_sqrt_n():
    cfg = config_for(BETA_8x3, alpha=lloyd_max_alpha(3))
    widths = [
        rate_ci_halfwidth(estimate_moments(BETA_8x3, cfg, n, base_seed=11), BETA_8x3, cfg)
        for n in (20_000, 40_000, 80_000)
    ]
    r1 = widths[0] / widths[1]
    r2 = widths[0] / widths[2]
    assert np.all(np.abs(r1 - np.sqrt(2)) < 0.3)
    assert np.all(np.abs(r2 - 2.0) < 0.6)  # quadrupling halves the width, within 30%


def test_standard_error_halves_when_trials_quadruple():
    cfg = config_for(BETA_8x3, alpha=0.9)
    se_a = estimate_moments(BETA_8x3, cfg, 25_000, 3).second_moment("den")[1]
    se_b = estimate_moments(BETA_8x3, cfg, 100_000, 3).second_moment("den")[1]
    assert np.all(np.abs(se_a / se_b - 2.0) < 0.3)


def test_estimate_rejects_tiny_runs():
    with pytest.raises(ValueError):
        estimate_moments(BETA_8x3, config_for(BETA_8x3), 10, 0)


# -- verification reports ----------------------------------------------------


def test_verify_bound_passes_8x3(backend_name):
    cfg = config_for(BETA_8x3, rho=10.0, alpha=lloyd_max_alpha(3))
    rep = verify_bound(BETA_8x3, cfg, 100_000, base_seed=1, backend_name=backend_name)
    assert rep.passed, rep.to_text()
    assert len(rep.rows) == 3 * 7
    assert rep.metadata["backend"] == backend_name


def test_verify_bound_twenty_heads_five_users():
    rng = np.random.default_rng(5)
    beta = LargeScaleMatrix(np.exp(rng.standard_normal((20, 5))), 10)
    cfg = config_for(beta, rho=10.0, alpha=lloyd_max_alpha(2))
    rep = verify_bound(beta, cfg, 100_000, base_seed=2)
    # 35 rows each at a 3-sigma gate: the odd row may miss by chance, so the
    # joint check is on the z-score family (Bonferroni level for 35 rows)
    z = np.array([r.z_score for r in rep.rows])
    assert np.all(np.abs(z) < 4.0), rep.to_text()
    assert abs(z.mean()) < 3.0 / np.sqrt(len(z))
    assert len(rep.failures()) <= 3


def test_negative_control_detects_wrong_gain():
    rng = np.random.default_rng(5)
    beta = LargeScaleMatrix(np.exp(rng.standard_normal((20, 5))), 10)
    a = lloyd_max_alpha(2)
    cfg = config_for(beta, rho=10.0, alpha=a)
    rep = verify_bound(beta, cfg, 100_000, base_seed=2, closed_form_alpha=a + 0.1)
    assert not rep.passed
    failed = {r.term for r in rep.failures()}
    assert {"qn", "li", "lu", "fs_ls"} <= failed
    # gain-free terms are unaffected by the wrong gain
    for r in rep.rows:
        if r.term in ("fu", "fi"):
            assert abs(r.z_score) < 4.0
    assert max(abs(rep.row(k, "qn").z_score) for k in range(5)) > 10


def test_verify_report_text():
    cfg = config_for(BETA_8x3, alpha=0.9)
    rep = verify_bound(BETA_8x3, cfg, 1000, base_seed=0, rel_tol=0.5)
    lines = rep.to_text().splitlines()
    assert lines[0].startswith("# n_trials=1000 base_seed=0")
    assert lines[1] == "user\tterm\tclosed_form\tempirical\tstd_err\tz_score\tpass"
    assert len(lines) == 2 + 21
    row = rep.row(1, "qn")
    assert row.closed_form == pytest.approx(sinr_breakdown(BETA_8x3, cfg).qn_power[1])


def test_verify_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        verify_bound(BETA_8x3, config_for(BETA_8x3), 1000, 0, rel_tol=0.0)


def test_exact_zero_terms_pass():
    beta = LargeScaleMatrix(np.ones((4, 1)), 4)
    rep = verify_bound(beta, config_for(beta, alpha=1.0), 1000, 0)
    for term in ("lu", "fi", "li", "qn"):
        r = rep.row(0, term)
        assert r.empirical == 0 and r.passed
