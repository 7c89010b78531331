from collections import Counter

import numpy as np
import pytest
from scipy.special import betaln, logsumexp

from mrdpm import CountTrack, Hyperparams, MixtureState, SamplerConfig, gibbs_sweep, run_chain
from mrdpm.errors import InvalidInputError
from mrdpm.oracle import canonical_key, enumerate_posterior, exact_gamma_probs, exact_omegas
from mrdpm.sampler import initial_state, iterate_states

from conftest import random_state, random_track

TOY = CountTrack([0, 1], [0, 1], [1, 0])
TOY_HP = Hyperparams(dp_precision=2.0)


def config_frequencies(track, hp, start, n_sweeps, seed):
    counts = Counter()
    for st in iterate_states(track, hp, start, n_sweeps, np.random.default_rng(seed)):
        counts[canonical_key(st.gammas, st.assignments)] += 1
    return {k: v / n_sweeps for k, v in counts.items()}


def state_from_key(track, key):
    gammas, flat = key
    return MixtureState.from_assignments(track, np.reshape(flat, (len(track), 2)), gammas)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(n_sweeps=0), dict(n_sweeps=10, n_burnin=10), dict(n_burnin=-1), dict(seed=-1), dict(pi_update="x")],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidInputError):
            SamplerConfig(**kwargs)


class TestSingleSite:
    def test_stationary_frequencies_match_enumeration(self):
        # three reachable configurations: shared (1/6), split into one atom (1/12),
        # split into two atoms (1/16), unnormalised
        t = CountTrack([0], [0], [0])
        hp = Hyperparams(alpha=1.0, beta=1.0, dp_precision=1.0, spike_prob=0.5)
        assert exact_omegas(t, hp)[0] == pytest.approx(0.2, abs=1e-12)
        assert exact_gamma_probs(t, hp)[0] == pytest.approx(7 / 15, abs=1e-12)
        s = run_chain(t, hp, SamplerConfig(100_000, 1_000, seed=3))
        assert s.omegas[0] == pytest.approx(0.2, abs=0.02)
        assert s.gamma_probs[0] == pytest.approx(7 / 15, abs=0.02)
        assert s.omegas[0] < 0.5

    def test_never_flags_above_gamma(self):
        s = run_chain(TOY, TOY_HP, SamplerConfig(5_000, 500, seed=1))
        assert np.all(s.omegas <= s.gamma_probs)


class TestInvariance:
    def test_frequencies_independent_of_start(self):
        enum = enumerate_posterior(TOY, TOY_HP)
        exact = dict(zip(enum.keys, np.exp(enum.log_post)))
        order = np.argsort(enum.log_post)
        starts = [enum.keys[order[0]], enum.keys[order[-1]], enum.keys[order[len(order) // 2]]]
        init = initial_state(TOY)
        starts.append(canonical_key(init.gammas, init.assignments))
        for n, key in enumerate(starts):
            freq = config_frequencies(TOY, TOY_HP, state_from_key(TOY, key), 100_000, seed=10 + n)
            assert set(freq) <= set(exact)
            worst = max(abs(freq.get(k, 0.0) - p) for k, p in exact.items())
            assert worst <= 0.02, (key, worst)

    def test_visits_every_configuration(self):
        enum = enumerate_posterior(TOY, TOY_HP)
        assert len(enum.keys) == 27
        freq = config_frequencies(TOY, TOY_HP, initial_state(TOY), 10_000, seed=5)
        assert set(freq) == set(enum.keys)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_four_positions(self, seed):
        rng = np.random.default_rng(100 + seed)
        t = CountTrack(np.arange(4), rng.integers(0, 4, 4), rng.integers(0, 4, 4))
        hp = Hyperparams(
            alpha=rng.uniform(0.5, 3), beta=rng.uniform(0.3, 2),
            dp_precision=rng.uniform(0.3, 3), spike_prob=rng.uniform(0.2, 0.8),
        )
        s = run_chain(t, hp, SamplerConfig(50_000, 5_000, seed=seed))
        np.testing.assert_allclose(s.omegas, exact_omegas(t, hp), atol=0.03)

    def test_with_exposures(self):
        t = CountTrack([3, 9], [4, 0], [1, 2], [2.5, 0.4], [0.7, 3.0])
        hp = Hyperparams(alpha=1.5, beta=0.7, dp_precision=1.2, spike_prob=0.4)
        s = run_chain(t, hp, SamplerConfig(50_000, 5_000, seed=8))
        np.testing.assert_allclose(s.omegas, exact_omegas(t, hp), atol=0.03)
        np.testing.assert_allclose(s.gamma_probs, exact_gamma_probs(t, hp), atol=0.03)

    def test_beta_prior_on_spike_prob(self):
        # integrating pi against Beta(1, 1) turns the gamma prior into B(1 + k, 1 + n - k)
        t = CountTrack([0, 1], [3, 0], [0, 2])
        hp = Hyperparams(alpha=1.0, beta=1.0, dp_precision=1.0, spike_prob=0.5)
        enum = enumerate_posterior(t, hp)
        k = enum.gammas.sum(axis=1)
        n = len(t)
        logw = enum.log_post - (k * np.log(0.5) + (n - k) * np.log(0.5)) + betaln(1 + k, 1 + n - k)
        exact = np.exp(logw - logsumexp(logw)) @ enum.distinct
        s = run_chain(t, hp, SamplerConfig(50_000, 5_000, seed=2, pi_update="beta-conjugate"))
        np.testing.assert_allclose(s.omegas, exact, atol=0.03)


class TestRunChain:
    def test_zero_track_stays_below_prior(self):
        t = CountTrack(np.arange(10), np.zeros(10, int), np.zeros(10, int))
        hp = Hyperparams(spike_prob=0.5)
        s = run_chain(t, hp, SamplerConfig(10_000, 2_000, seed=4))
        assert np.all(s.omegas <= hp.spike_prob + 0.05)

    def test_deterministic(self):
        t = random_track(np.random.default_rng(0), 30, exposures=True)
        cfg = SamplerConfig(500, 100, seed=99)
        a, b = run_chain(t, Hyperparams(), cfg), run_chain(t, Hyperparams(), cfg)
        assert np.array_equal(a.omegas, b.omegas)
        assert np.array_equal(a.gamma_probs, b.gamma_probs)
        assert a.mean_num_clusters == b.mean_num_clusters
        c = run_chain(t, Hyperparams(), SamplerConfig(500, 100, seed=100))
        assert not np.array_equal(a.omegas, c.omegas)

    def test_summary_ranges(self):
        t = random_track(np.random.default_rng(1), 25)
        s = run_chain(t, Hyperparams(), SamplerConfig(300, 50, seed=1))
        assert np.all((s.omegas >= 0) & (s.omegas <= 1))
        assert 0.0 <= s.global_null_prob <= 1.0
        assert s.global_null_prob == pytest.approx(np.prod(1 - s.omegas))
        assert 1.0 <= s.mean_num_clusters <= 2 * len(t)
        assert (s.n_sweeps, s.n_burnin) == (300, 50)

    def test_debug_checks_every_sweep(self):
        t = random_track(np.random.default_rng(2), 12, max_count=8, exposures=True)
        cfg = SamplerConfig(200, 20, seed=5, debug=True)
        assert np.array_equal(run_chain(t, Hyperparams(), cfg).omegas,
                              run_chain(t, Hyperparams(), SamplerConfig(200, 20, seed=5)).omegas)

    def test_empty_track(self):
        with pytest.raises(InvalidInputError):
            run_chain(None, Hyperparams(), SamplerConfig())


class TestGibbsSweep:
    def test_preserves_invariants_and_input(self, rng):
        for _ in range(50):
            t = random_track(rng, int(rng.integers(1, 9)), exposures=bool(rng.integers(2)))
            state = random_state(t, rng)
            before = state.assignments.copy()
            new = gibbs_sweep(state, t, Hyperparams(), rng)
            new.check(t)
            assert np.array_equal(state.assignments, before)

    def test_same_stream_same_result(self):
        t = random_track(np.random.default_rng(3), 6)
        st = initial_state(t)
        a = gibbs_sweep(st, t, Hyperparams(), np.random.default_rng(1))
        b = gibbs_sweep(st, t, Hyperparams(), np.random.default_rng(1))
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.gammas, b.gammas)
