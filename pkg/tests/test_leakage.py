import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

import privrdv as pr
from privrdv.dynamics import AgentParams, run
from privrdv.graph import validate_graph
from privrdv.leakage import (
    EavesdropperView,
    InnovationSequence,
    PosteriorSummary,
    _full_simulation_leakage,
    fixed_pattern_quad_samples,
    initial_state_posterior,
    innovation_transform,
    leakage_trials,
    monte_carlo_audit,
    pointwise_leakage,
    reconstruct_view,
    wilson_interval,
)

R1 = dict(p=0.6, sigma2=1.0, q=0.9, prior_mean=(0.0, 0.0), prior_var=3.0)


def grid_leakage_oracle(mean, var, prior_mean, prior_var):
    """Maximize log posterior(x) - log prior(x) over a fine separable grid."""
    half = 10 * math.sqrt(prior_var)
    xs = np.arange(-half, half, 1e-3 * math.sqrt(prior_var))
    total = math.log(prior_var / var)
    for c in range(2):
        g = (-(xs - mean[c]) ** 2 / (2 * var)
             + (xs - prior_mean[c]) ** 2 / (2 * prior_var))
        total += g.max()
    return total


class TestInnovationTransform:
    def test_first_round_transmission_is_the_output_itself(self, sec4_config):
        rec = run(sec4_config, horizon=1, seed=5)
        z = innovation_transform(EavesdropperView.from_record(rec), sec4_config.graph)
        sent = rec.gamma[0].astype(bool)
        np.testing.assert_array_equal(z.z[0][sent], rec.xt[0][sent])

    def test_zero_where_silent(self, sec4_config):
        rec = run(sec4_config, horizon=60, seed=6)
        z = innovation_transform(EavesdropperView.from_record(rec), sec4_config.graph)
        assert (z.z[~rec.gamma.astype(bool)] == 0).all()

    def test_closed_form_equivalence(self, sec4_config, sec4_derived):
        # the transform must recover gamma * (alpha^k x0 + v) from observed
        # data alone; the simulator supplies the hidden ground truth
        rec = run(sec4_config, horizon=400, seed=7)
        z = innovation_transform(EavesdropperView.from_record(rec), sec4_config.graph)
        ks = np.arange(401.0)
        worst = 0.0
        for i in range(5):
            truth = rec.gamma[:, i, None] * (
                sec4_derived.alpha[i] ** ks[:, None] * rec.x0[i] + rec.noise[:, i]
            )
            worst = max(worst, np.abs(z.z[:, i] - truth).max())
        assert worst < 1e-9

    def test_round_trip_identity(self, sec4_config):
        for seed in (1, 2, 3):
            rec = run(sec4_config, horizon=150, seed=seed)
            view = EavesdropperView.from_record(rec)
            z = innovation_transform(view, sec4_config.graph)
            back = reconstruct_view(z, rec.gamma, sec4_config.graph,
                                    [a.prior_mean for a in sec4_config.agents])
            assert np.abs(back.xt_hist - view.xt_hist).max() < 1e-9
            np.testing.assert_array_equal(back.gamma_hist, rec.gamma)

    def test_all_silent_reconstructs_prior_means(self, sec4_config):
        T = 20
        z = InnovationSequence(z=np.zeros((T + 1, 5, 2)))
        gam = np.zeros((T + 1, 5), dtype=np.uint8)
        mus = [a.prior_mean for a in sec4_config.agents]
        view = reconstruct_view(z, gam, sec4_config.graph, mus)
        np.testing.assert_array_equal(
            view.xt_hist, np.broadcast_to(np.vstack(mus), (T + 1, 5, 2))
        )

    def test_single_transmission_holds_forever(self):
        graph = validate_graph([[0.0, 0.3], [0.3, 0.0]])
        T = 10
        gam = np.zeros((T + 1, 2), dtype=np.uint8)
        gam[0, 0] = 1
        z = np.zeros((T + 1, 2, 2))
        z[0, 0] = (1.5, -2.0)
        view = reconstruct_view(InnovationSequence(z=z), gam, graph,
                                [np.zeros(2), np.zeros(2)])
        np.testing.assert_array_equal(
            view.xt_hist[:, 0], np.broadcast_to([1.5, -2.0], (T + 1, 2))
        )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            EavesdropperView(xt_hist=np.zeros((3, 2, 2)), gamma_hist=np.zeros((2, 2)))


class TestPosterior:
    def test_no_transmissions_returns_prior(self):
        params = AgentParams(**R1)
        post = initial_state_posterior(np.zeros((5, 2)), np.zeros(5), params, 0.4)
        np.testing.assert_array_equal(post.mean, params.prior_mean)
        assert post.var == params.prior_var and post.precision_gain == 0.0

    def test_single_round_zero_conjugate_update(self):
        # scalar oracle: precision 1/3 + 1 = 4/3, mean = (mu/3 + z) * 3/4
        params = AgentParams(**R1)
        gam = np.zeros(8)
        gam[0] = 1
        z = np.zeros((8, 2))
        z[0] = (1.0, -0.5)
        post = initial_state_posterior(z, gam, params, 0.4)
        assert post.var == pytest.approx(0.75, abs=1e-15)
        np.testing.assert_allclose(post.mean, 0.75 * z[0], atol=1e-15)

    def test_precision_gain_brute_force(self, sec4_config, sec4_derived):
        rec = run(sec4_config, horizon=80, seed=9)
        z = innovation_transform(EavesdropperView.from_record(rec), sec4_config.graph)
        for i in range(5):
            params = sec4_config.agents[i]
            post = initial_state_posterior(z.z[:, i], rec.gamma[:, i], params,
                                           sec4_derived.alpha[i])
            brute = sum(
                sec4_derived.alpha[i] ** (2 * k) / (params.sigma2 * params.q ** (2 * k))
                for k in range(81) if rec.gamma[k, i]
            )
            assert post.precision_gain == pytest.approx(brute, rel=1e-12)
            assert 1 / post.var == pytest.approx(1 / params.prior_var + brute,
                                                 rel=1e-12)

    def test_more_observations_never_widen_posterior(self, sec4_config, sec4_derived):
        rec = run(sec4_config, horizon=120, seed=10)
        z = innovation_transform(EavesdropperView.from_record(rec), sec4_config.graph)
        params = sec4_config.agents[0]
        prev = params.prior_var
        for t in (5, 20, 60, 120):
            post = initial_state_posterior(z.z[: t + 1, 0], rec.gamma[: t + 1, 0],
                                           params, sec4_derived.alpha[0])
            assert post.var <= prev + 1e-15
            prev = post.var


class TestPointwiseLeakage:
    def test_prior_equals_posterior_leaks_nothing(self):
        post = PosteriorSummary(mean=np.array([1.0, 2.0]), var=3.0, precision_gain=0.0)
        assert pointwise_leakage(post, (1.0, 2.0), 3.0) == 0.0

    def test_centered_half_variance_leaks_log_two(self):
        post = PosteriorSummary(mean=np.zeros(2), var=1.5, precision_gain=1 / 3)
        assert pointwise_leakage(post, (0.0, 0.0), 3.0) == pytest.approx(math.log(2))

    def test_matches_grid_search_oracle(self):
        gen = np.random.default_rng(12)
        for _ in range(5):
            r = 3.0
            var = r * gen.uniform(0.1, 0.9)
            mean = gen.normal(size=2)
            prior_mean = gen.normal(size=2) * 0.3
            post = PosteriorSummary(mean=mean, var=var, precision_gain=1 / var - 1 / r)
            got = pointwise_leakage(post, prior_mean, r)
            want = grid_leakage_oracle(mean, var, prior_mean, r)
            assert got == pytest.approx(want, abs=1e-6)

    def test_rejects_widened_posterior(self):
        post = PosteriorSummary(mean=np.zeros(2), var=4.0, precision_gain=0.0)
        with pytest.raises(ValueError, match="corrupted"):
            pointwise_leakage(post, (0.0, 0.0), 3.0)


class TestLeakageTrials:
    def test_decomposition_identity(self, sec4_config, sec4_derived):
        ell, gain, quad, kfirst = leakage_trials(sec4_config.agents,
                                                 sec4_derived.alpha, 0,
                                                 4_000, 300, 19)
        sent = kfirst >= 0
        lhs = ell[sent] - np.log1p(3.0 * gain[sent])
        np.testing.assert_allclose(lhs, 0.5 * quad[sent], rtol=1e-12, atol=1e-15)
        assert (ell[~sent] == 0).all()

    def test_first_transmission_bound_hierarchy(self, sec4_config, sec4_derived):
        # per trial: realized information never exceeds the geometric
        # envelope anchored at the first transmission round
        inputs = pr.CalibrationInputs(alpha=0.4, p=0.6, sigma2=1.0, q=0.9, r=3.0)
        ell, gain, _, kfirst = leakage_trials(sec4_config.agents,
                                              sec4_derived.alpha, 0,
                                              4_000, 300, 23)
        sent = kfirst >= 0
        realized = np.log1p(3.0 * gain[sent])
        envelope = np.log1p(
            inputs.snr_scale * inputs.rho ** kfirst[sent] / (1 - inputs.rho)
        )
        assert (realized <= envelope + 1e-12).all()

    def test_matches_posterior_path_on_full_simulations(self, sec4_config,
                                                        sec4_derived):
        direct, _, _, _ = leakage_trials(sec4_config.agents, sec4_derived.alpha,
                                         0, 100, 200, 11)
        slow = _full_simulation_leakage(sec4_config, sec4_derived.alpha, 0,
                                        100, 200, 11)
        np.testing.assert_allclose(direct, slow, atol=1e-6)

    def test_quad_is_chi_square_two_under_fixed_pattern(self):
        params = AgentParams(**R1)
        pattern = np.random.default_rng(0).random(401) < 0.6
        _, quad = fixed_pattern_quad_samples(pattern, params, 0.4, 10_000, seed=31)
        stat = stats.kstest(quad, stats.chi2(2).cdf).statistic
        assert stat < 1.63 / math.sqrt(10_000)

    def test_fixed_pattern_requires_a_transmission(self):
        with pytest.raises(ValueError, match="no transmission"):
            fixed_pattern_quad_samples(np.zeros(10, bool), AgentParams(**R1),
                                       0.4, 10, seed=0)


class TestMonteCarloAudit:
    def test_coverage_beats_series_bound(self, sec4_config):
        report = monte_carlo_audit(sec4_config, 0, 5.0, 20_000, horizon=400, seed=3)
        floor = 1 - report.delta_series
        se = math.sqrt(report.delta_series * (1 - report.delta_series) / 20_000)
        assert report.coverage >= floor - 3 * se
        assert report.passed
        lo, hi = report.wilson_ci
        assert lo <= report.coverage <= hi

    def test_deterministic(self, sec4_config):
        a = monte_carlo_audit(sec4_config, 0, 5.0, 5_000, seed=8)
        b = monte_carlo_audit(sec4_config, 0, 5.0, 5_000, seed=8)
        assert a.coverage == b.coverage

    def test_lower_rate_does_not_leak_more(self, sec4_config):
        # paired comparison with common random numbers
        slow = monte_carlo_audit(sec4_config, 0, 5.0, 20_000, seed=5, p_override=0.2)
        fast = monte_carlo_audit(sec4_config, 0, 5.0, 20_000, seed=5, p_override=0.6)
        se = math.sqrt(fast.coverage * (1 - fast.coverage) / 20_000)
        assert slow.coverage >= fast.coverage - 2 * se

    def test_huge_noise_leaks_nothing(self, sec4_config):
        loud = tuple(replace(a) for a in sec4_config.agents)
        agents = tuple(
            AgentParams(p=a.p, sigma2=1e8, q=a.q, prior_mean=a.prior_mean,
                        prior_var=a.prior_var)
            for a in loud
        )
        cfg = sec4_config.with_overrides(agents=agents)
        report = monte_carlo_audit(cfg, 0, 0.5, 5_000, seed=2)
        assert report.coverage == 1.0

    def test_full_simulation_mode_agrees(self, sec4_config):
        direct = monte_carlo_audit(sec4_config, 1, 5.0, 100, horizon=150, seed=13)
        slow = monte_carlo_audit(sec4_config, 1, 5.0, 100, horizon=150, seed=13,
                                 full_simulation=True)
        assert direct.coverage == slow.coverage

    def test_report_wire_format(self, sec4_config):
        report = monte_carlo_audit(sec4_config, 2, 5.0, 1_000, seed=1)
        payload = report.to_dict()
        assert set(payload) == {"robot", "epsilon", "trials", "horizon", "coverage",
                                "wilson_ci", "delta_theorem1", "delta_corollary",
                                "pass"}
        assert payload["robot"] == 3


class TestWilson:
    def test_known_value(self):
        lo, hi = wilson_interval(95, 100)
        assert lo == pytest.approx(0.8608496970983599, abs=1e-12)
        assert hi == pytest.approx(0.9831516839573993, abs=1e-12)

    def test_degenerate_counts(self):
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and hi < 0.3
        lo, hi = wilson_interval(50, 50)
        assert hi == 1.0 and lo > 0.7

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            wilson_interval(0, 0)
