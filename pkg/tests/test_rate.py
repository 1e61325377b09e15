import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimorelay import hybrid, rate
from mimorelay.channel import Scenario, generate
from mimorelay.errors import InvalidParameterError
from mimorelay.rate import ScalingSpec
from mimorelay.streams import trial_rng


@pytest.fixture(autouse=True)
def _quiet_condition_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


def _draw(sc, seed=0):
    real = generate(sc, np.random.default_rng(seed))
    return real, hybrid.build_weights(real.G_hat, sc.K, sc.B)


def test_sinr_perfect_csi_has_no_interference():
    sc = Scenario(N=128, K=3, P_s=2.0, P_p=np.inf)
    real, w = _draw(sc)
    M = w.receive @ real.G
    np.testing.assert_allclose(M, np.eye(6), atol=1e-10)
    noise = np.sum(np.abs(w.receive) ** 2, axis=1)
    np.testing.assert_allclose(rate.uplink_sinrs(w, real.G, 2.0), 2.0 / noise, rtol=1e-9)
    np.testing.assert_allclose(rate.downlink_sinrs(w, real.G, 7.0), 7.0 * w.mu**2, rtol=1e-9)
    assert rate.sinr_uplink(2, w, real.G, 2.0) == pytest.approx(2.0 / noise[2], rel=1e-9)
    assert rate.sinr_downlink(3, w, real.G, 7.0) == pytest.approx(7.0 * w.mu**2, rel=1e-9)


def test_sinr_zero_power():
    real, w = _draw(Scenario(N=64, K=2, P_p=3.0))
    assert np.all(rate.uplink_sinrs(w, real.G, 0.0) == 0)
    assert np.all(rate.downlink_sinrs(w, real.G, 0.0) == 0)


def test_sinr_large_n_means():
    """Perfect CSI, N=512: E{gamma_up} ~ P_s sigma^2 pi N / 4 and
    E{gamma_down} ~ P_r / sum_j 4/(sigma_j^2 pi N)."""
    N, K, P_s = 512, 5, 10.0
    sc = Scenario(N=N, K=K, P_s=P_s, P_p=np.inf)
    up, down, _ = rate.simulate_sinrs(sc, 10_000, seed=0)
    assert up.mean() * 4 / (P_s * math.pi * N) == pytest.approx(1, abs=0.05)
    assert down.mean() * (2 * K * 4 / (math.pi * N)) / sc.P_r == pytest.approx(1, abs=0.05)


def test_mc_single_trial_deterministic():
    sc = Scenario(N=32, K=2, P_p=5.0)
    a = rate.mc_sum_rate(sc, 1, seed=11)
    b = rate.mc_sum_rate(sc, 1, seed=11)
    np.testing.assert_array_equal(a.per_link, b.per_link)
    assert a.trials == 1 and np.all(a.stderr == 0)


def test_mc_link_rate_is_half_min_of_hops():
    sc = Scenario(N=64, K=3, P_s=3.0, P_r=1.0, P_p=5.0)
    rep = rate.mc_sum_rate(sc, 200, seed=2)
    partner = hybrid.partner(np.arange(6))
    np.testing.assert_array_equal(rep.per_link, 0.5 * np.minimum(rep.uplink, rep.downlink[partner]))
    assert rep.sum == pytest.approx(rep.per_link.sum())
    assert np.all(rep.per_link >= 0)


def test_mc_independent_of_worker_count():
    sc = Scenario(N=32, K=2, P_p=5.0)
    a = rate.mc_sum_rate(sc, 40, seed=5, workers=1)
    b = rate.mc_sum_rate(sc, 40, seed=5, workers=3)
    np.testing.assert_array_equal(a.per_link, b.per_link)
    np.testing.assert_array_equal(a.stderr, b.stderr)


def test_mc_tracks_closed_form_at_n64():
    sc = Scenario(N=64, K=5, P_s=10.0, P_p=10.0)
    mc = rate.mc_sum_rate(sc, 3000, seed=0)
    cf = rate.closed_form_theorem1(sc)
    assert abs(mc.sum - cf.sum) / cf.sum < 0.05
    assert mc.resamples <= 0.001 * mc.trials


def test_mc_saturates_with_imperfect_csi():
    lo = rate.mc_sum_rate(Scenario(N=64, K=5, P_s=1e3, P_p=10.0), 1000, seed=4)
    hi = rate.mc_sum_rate(Scenario(N=64, K=5, P_s=1e4, P_p=10.0), 1000, seed=4)
    assert np.max(hi.per_link - lo.per_link) < 0.1


def test_high_resolution_quantizer_matches_ideal():
    ideal = rate.mc_sum_rate(Scenario(N=256, K=5, P_s=10.0, P_p=10.0), 500, seed=6)
    fine = rate.mc_sum_rate(Scenario(N=256, K=5, P_s=10.0, P_p=10.0, B=16), 500, seed=6)
    assert abs(fine.sum - ideal.sum) / ideal.sum < 1e-3


def test_hardening_bound_perfect_csi():
    sc = Scenario(N=128, K=2, P_s=5.0, P_p=np.inf)
    rep = rate.hardening_bound_rate(sc, 2000, seed=3)
    up, _, _ = rate.simulate_sinrs(sc, 2000, seed=3, stream="hardening")
    # unit gain, zero variance and interference: SINR = P_s / E{||w_k^T F_r||^2}
    expected = np.log2(1 + 5.0 / np.mean(5.0 / up, axis=0))
    np.testing.assert_allclose(rep.uplink, expected, rtol=1e-9)


@pytest.mark.parametrize("N, P_p", [(64, 10.0), (256, 1.0), (128, np.inf)])
def test_hardening_bound_below_mc(N, P_p):
    sc = Scenario(N=N, K=5, P_s=10.0, P_p=P_p)
    mc = rate.mc_sum_rate(sc, 2000, seed=7)
    hb = rate.hardening_bound_rate(sc, 2000, seed=8)
    assert hb.sum <= mc.sum + 3 * mc.sum_stderr


def test_hardening_bound_near_closed_form_at_512():
    sc = Scenario(N=512, K=5, P_s=10.0, P_p=10.0)
    hb = rate.hardening_bound_rate(sc, 3000, seed=9)
    assert hb.sum / rate.closed_form_theorem1(sc).sum == pytest.approx(1, abs=0.03)


def test_closed_form_reference_value():
    sc = Scenario(N=256, K=5, P_s=1.0, P_r=10.0, P_p=np.inf)
    rep = rate.closed_form_theorem1(sc)
    assert math.pi * 256 / 4 == pytest.approx(201.06, abs=0.01)
    np.testing.assert_allclose(rep.per_link, 0.5 * math.log2(1 + math.pi * 64), rtol=1e-12)
    assert rep.per_link[0] == pytest.approx(3.829, abs=5e-4)
    assert rep.sum == pytest.approx(38.29, abs=5e-3)


def test_closed_form_hops_balance_at_recommended_split():
    sc = Scenario(N=256, K=4, P_s=3.0, P_p=np.inf)
    sigma2, _ = sc.variances()
    up = sc.P_s * sigma2
    down = sc.P_r / np.sum(1 / sigma2)
    np.testing.assert_allclose(up, down, rtol=1e-14)


def test_closed_form_warns_below_condition():
    with pytest.warns(UserWarning, match="floor"):
        warnings.simplefilter("always")
        rate.closed_form_theorem1(Scenario(N=64, K=5))


@settings(max_examples=40, deadline=None)
@given(P_s=st.floats(1e-3, 1e3), P_r=st.floats(1e-3, 1e3), f=st.floats(1.0, 10.0),
       P_p=st.sampled_from([0.1, 10.0, np.inf]))
def test_closed_form_monotone_in_powers(P_s, P_r, f, P_p):
    base = rate.closed_form_theorem1(Scenario(N=256, K=3, P_s=P_s, P_r=P_r, P_p=P_p)).sum
    more_s = rate.closed_form_theorem1(Scenario(N=256, K=3, P_s=P_s * f, P_r=P_r, P_p=P_p)).sum
    more_r = rate.closed_form_theorem1(Scenario(N=256, K=3, P_s=P_s, P_r=P_r * f, P_p=P_p)).sum
    assert more_s >= base - 1e-12 and more_r >= base - 1e-12


def test_equal_path_loss_form_matches_general_form():
    sc = Scenario(N=300, K=4, P_s=2.0, P_r=5.0, P_p=3.0, betas=[0.7] * 8)
    sigma2, eps2 = sc.variances()
    compact = rate.equal_path_loss_sum_rate(300, 4, 2.0, 5.0, sigma2[0], eps2[0])
    assert compact == pytest.approx(rate.closed_form_theorem1(sc).sum, rel=1e-13)


def test_full_digital_reference_values():
    sc = Scenario(N=256, K=5, P_s=1.0, P_p=np.inf)  # x = 1
    np.testing.assert_allclose(rate.full_digital_rate(sc).per_link, 0.5 * math.log2(247))
    assert 0.5 * math.log2(247) == pytest.approx(3.9742, abs=1e-4)
    edge = Scenario(N=11, K=5, P_s=3.0, P_p=np.inf)
    np.testing.assert_allclose(rate.full_digital_rate(edge).per_link, 0.5 * math.log2(4.0))
    with pytest.raises(InvalidParameterError):
        rate.full_digital_rate(Scenario(N=10, K=5))


@pytest.mark.parametrize("N", [11, 20, 46, 47, 100, 1000])
def test_full_digital_exceeds_hybrid_iff_more_dof(N):
    sc = Scenario(N=N, K=5, P_s=2.0, P_p=np.inf)
    full = rate.full_digital_rate(sc).sum
    hyb = rate.closed_form_theorem1(sc).sum
    assert (full > hyb) == ((N - 10) > math.pi * N / 4)


@pytest.mark.parametrize("N, L, ok", [(1000, 28, True), (128, 10, True), (127, 10, False), (2, 1, True)])
def test_condition_check(N, L, ok):
    assert rate.condition_check(N, L).ok is ok


def test_condition_check_values():
    assert rate.condition_check(1000, 10).L_max == 28
    assert rate.condition_check(128, 10).threshold == 127
    assert rate.condition_check(2, 1).threshold == 1


@given(N=st.integers(1, 100_000))
def test_max_rf_chains_consistent_with_condition(N):
    L = rate.max_rf_chains(N)
    assert L == 0 or rate.condition_check(N, L).ok
    assert not rate.condition_check(N, L + 1).ok


def test_scaling_case1_alpha1_limit():
    sc = Scenario(N=1, K=5, P_p=10.0)
    spec = ScalingSpec(alpha=1.0, E_s=2.0, E_r=1.5)
    sigma2 = 100 / 101
    limit = 5 * math.log2(1 + min(2.0, 1.5) * math.pi * sigma2 / 4)
    assert rate.scaling_limit(sc, spec) == pytest.approx(limit, rel=1e-14)
    assert rate.scaled_sum_rate(sc.replace(N=10**9), spec).sum == pytest.approx(limit, rel=1e-6)


def test_scaling_case1_superlinear_vanishes():
    sc = Scenario(N=1, K=5, P_p=10.0)
    spec = ScalingSpec(alpha=1.5)
    rates = [rate.scaled_sum_rate(sc.replace(N=N), spec).sum for N in (2**10, 2**12, 2**14, 2**16)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert rate.scaling_limit(sc, spec) == 0.0


def test_scaling_case2_half_limit():
    sc = Scenario(N=1, K=5, P_p=10.0)
    spec = ScalingSpec(alpha=0.5, E_s=1.0, E_r=2.0, case="scaled-pilot")
    limit = 5 * math.log2(1 + math.pi * 10 * 1.0 * 1.0 / 4)
    assert rate.scaling_limit(sc, spec) == pytest.approx(limit, rel=1e-14)
    far = rate.scaled_sum_rate(sc.replace(N=10**14), spec).sum
    assert far == pytest.approx(limit, rel=1e-4)
    assert 0 < far < math.inf


def test_scaling_case1_converged_above_4096():
    sc = Scenario(N=1, K=5, P_p=10.0)
    spec = ScalingSpec(alpha=1.0)
    for N in (4096, 8192, 16384):
        a = rate.scaled_sum_rate(sc.replace(N=N), spec).sum
        b = rate.scaled_sum_rate(sc.replace(N=4 * N), spec).sum
        assert abs(a - b) / b < 0.01


def test_scaling_spec_validation():
    with pytest.raises(InvalidParameterError):
        ScalingSpec(alpha=0.0)
    with pytest.raises(InvalidParameterError):
        ScalingSpec(alpha=1.0, case="both")


def test_convergence_diagnostic_k5_n256():
    stats = rate.convergence_diagnostic(Scenario(N=256, K=5, P_p=np.inf), 4000, seed=1)
    assert stats.expected_mean == pytest.approx(360 / (math.pi * 256))
    assert stats.expected_mean == pytest.approx(0.4476, abs=1e-4)
    assert stats.rel_error < 0.05


def test_convergence_diagnostic_single_pair():
    stats = rate.convergence_diagnostic(Scenario(N=200, K=1, P_p=np.inf), 2000, seed=2)
    assert stats.expected_mean == pytest.approx(8 / (math.pi * 200))
    assert stats.expected_var == pytest.approx(32 / (math.pi**2 * 200**2))
    assert stats.rel_error < 0.1


def test_convergence_diagnostic_inverse_n_law():
    a = rate.convergence_diagnostic(Scenario(N=256, K=3, P_p=np.inf), 2000, seed=3)
    b = rate.convergence_diagnostic(Scenario(N=512, K=3, P_p=np.inf), 2000, seed=3)
    ratio_se = (a.mean / b.mean) * math.hypot(a.stderr / a.mean, b.stderr / b.mean)
    assert a.mean / b.mean == pytest.approx(2, abs=max(0.1, 3 * ratio_se))


def test_ratio_moment_small_correction():
    (row,) = rate.ratio_moment_check(1.0, [100.0], 20_000, seed=0)
    assert row.leading_term == pytest.approx(3e-4)
    assert row.deviation == pytest.approx(3e-4, rel=0.2)


def test_ratio_moment_degenerate_sigma():
    rows = rate.ratio_moment_check(0.0, [0.5, 3.0, 100.0], 10, seed=0)
    assert all(r.estimate == 1.0 for r in rows)


def test_ratio_moment_deviation_decreasing():
    rows = rate.ratio_moment_check(1.0, [10, 30, 100, 300], 20_000, seed=1)
    dev = [r.deviation for r in rows]
    assert all(a > b for a, b in zip(dev, dev[1:]))


def test_overhead_reference_ratio():
    full = rate.overhead_factor(600, 64, 2, "full")
    limited = rate.overhead_factor(600, 64, 2, "limited")
    assert full / limited == pytest.approx(596 / 536)
    assert full / limited == pytest.approx(1.112, abs=1e-3)


def test_overhead_boundaries():
    assert rate.throughput_with_overhead(5.0, 64, 64, 2, "limited") == 0.0
    assert rate.overhead_factor(math.inf, 64, 2, "limited") == 1.0
    assert rate.overhead_factor(1e12, 64, 2, "full") == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        rate.overhead_factor(50, 64, 2, "limited")
    with pytest.raises(InvalidParameterError):
        rate.overhead_factor(600, 64, 2, "partial")
