import math

import numpy as np
import pytest
from scipy import integrate

from seqdetect import (
    Bernoulli,
    DegenerateModel,
    GaussianMeanShift,
    GroundTruth,
    Hypothesis,
    TableLookup,
    kl_divergences,
    llr_increment,
    model_from_dict,
    model_to_dict,
    sample_llr_increment,
)


def gaussian_kl_quadrature(delta: float) -> float:
    """Oracle: integrate g*log(g/f) numerically instead of using delta^2/2."""
    g = lambda x: math.exp(-((x - delta) ** 2) / 2) / math.sqrt(2 * math.pi)
    f = lambda x: math.exp(-(x ** 2) / 2) / math.sqrt(2 * math.pi)
    value, err = integrate.quad(lambda x: g(x) * math.log(g(x) / f(x)), -20, 20)
    assert err < 1e-8
    return value


class TestKLDivergences:
    def test_gaussian_closed_form_matches_quadrature(self):
        model = GaussianMeanShift(delta=1.5)
        i, j = kl_divergences(model)
        assert i == pytest.approx(1.125, abs=1e-12)
        assert j == pytest.approx(1.125, abs=1e-12)
        assert i == pytest.approx(gaussian_kl_quadrature(1.5), abs=1e-9)

    @pytest.mark.parametrize("delta", [0.25, 0.5, 1.0, 3.0])
    def test_gaussian_quadrature_across_deltas(self, delta):
        i, _ = kl_divergences(GaussianMeanShift(delta=delta))
        assert i == pytest.approx(gaussian_kl_quadrature(delta), abs=1e-9)

    def test_bernoulli_closed_form(self):
        model = Bernoulli(p0=0.2, p1=0.6)
        i, j = kl_divergences(model)
        assert i == pytest.approx(0.6 * math.log(0.6 / 0.2) + 0.4 * math.log(0.4 / 0.8))
        assert j == pytest.approx(0.2 * math.log(0.2 / 0.6) + 0.8 * math.log(0.8 / 0.4))
        assert i > 0 and j > 0

    def test_table_matches_direct_sum(self):
        model = TableLookup(support=(0.0, 1.0, 2.0),
                            f_probs=(0.5, 0.3, 0.2),
                            g_probs=(0.2, 0.3, 0.5))
        i, j = kl_divergences(model)
        direct_i = sum(g * math.log(g / f) for g, f in [(0.2, 0.5), (0.3, 0.3), (0.5, 0.2)])
        assert i == pytest.approx(direct_i, abs=1e-15)
        assert j == pytest.approx(0.5 * math.log(0.5 / 0.2) + 0.2 * math.log(0.2 / 0.5), abs=1e-12)

    def test_identical_bernoulli_is_degenerate(self):
        with pytest.raises(DegenerateModel):
            Bernoulli(p0=0.5, p1=0.5)

    def test_table_with_equal_pmfs_is_degenerate(self):
        with pytest.raises(DegenerateModel):
            TableLookup(support=(0, 1), f_probs=(0.4, 0.6), g_probs=(0.4, 0.6))

    def test_zero_probability_atom_rejected(self):
        with pytest.raises(DegenerateModel):
            TableLookup(support=(0, 1, 2), f_probs=(0.5, 0.5, 0.0), g_probs=(0.2, 0.3, 0.5))

    def test_bad_gaussian_delta(self):
        with pytest.raises(DegenerateModel):
            GaussianMeanShift(delta=0.0)
        with pytest.raises(DegenerateModel):
            GaussianMeanShift(delta=-1.0)

    def test_table_pmf_must_sum_to_one(self):
        with pytest.raises(DegenerateModel):
            TableLookup(support=(0, 1), f_probs=(0.5, 0.6), g_probs=(0.5, 0.5))


class TestLLRIncrements:
    def test_forced_gaussian_observation(self):
        # delta=1 and x=0.5 sit exactly on the symmetry point: 1*0.5 - 0.5 = 0
        assert llr_increment(GaussianMeanShift(delta=1.0), 0.5) == 0.0

    def test_signal_increment_mean_matches_signal_kl(self):
        model = GaussianMeanShift(delta=1.0)
        rng = np.random.Generator(np.random.PCG64(101))
        n = 1_000_000
        draws = np.array([sample_llr_increment(model, Hypothesis.SIGNAL, rng) for _ in range(n)])
        se = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() - 0.5) < 3 * se

    def test_noise_increment_mean_matches_minus_noise_kl(self):
        model = GaussianMeanShift(delta=1.0)
        rng = np.random.Generator(np.random.PCG64(202))
        n = 1_000_000
        draws = np.array([sample_llr_increment(model, Hypothesis.NOISE, rng) for _ in range(n)])
        se = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() + 0.5) < 3 * se

    @pytest.mark.parametrize("hypothesis", [Hypothesis.SIGNAL, Hypothesis.NOISE])
    def test_bernoulli_lln(self, hypothesis):
        model = Bernoulli(p0=0.3, p1=0.7)
        rng = np.random.Generator(np.random.PCG64(303))
        n = 200_000
        draws = np.array([sample_llr_increment(model, hypothesis, rng) for _ in range(n)])
        target = model.signal_kl if hypothesis is Hypothesis.SIGNAL else -model.noise_kl
        se = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() - target) < 3 * se

    def test_replay_is_bit_exact(self):
        model = GaussianMeanShift(delta=0.8)
        first_rng = np.random.Generator(np.random.PCG64(7))
        first = [sample_llr_increment(model, Hypothesis.SIGNAL, first_rng) for _ in range(100)]
        second_rng = np.random.Generator(np.random.PCG64(7))
        second = [sample_llr_increment(model, Hypothesis.SIGNAL, second_rng) for _ in range(100)]
        assert first == second

    def test_table_increments_live_on_declared_values(self):
        model = TableLookup(support=(0.0, 1.0, 2.0),
                            f_probs=(0.5, 0.3, 0.2),
                            g_probs=(0.2, 0.3, 0.5))
        allowed = {
            round(math.log(g / f), 12)
            for g, f in zip(model.g_probs, model.f_probs)
        }
        rng = np.random.Generator(np.random.PCG64(404))
        for _ in range(5000):
            inc = sample_llr_increment(model, Hypothesis.SIGNAL, rng)
            assert round(inc, 12) in allowed

    def test_table_sampling_frequencies(self):
        model = TableLookup(support=(0.0, 1.0), f_probs=(0.8, 0.2), g_probs=(0.3, 0.7))
        rng = np.random.Generator(np.random.PCG64(505))
        n = 100_000
        hi = math.log(0.7 / 0.2)
        hits = sum(
            1 for _ in range(n)
            if sample_llr_increment(model, Hypothesis.SIGNAL, rng) == pytest.approx(hi)
        )
        assert abs(hits / n - 0.7) < 3 * math.sqrt(0.7 * 0.3 / n)


class TestGroundTruth:
    def test_membership(self):
        truth = GroundTruth([2, 4])
        assert truth.is_signal(2) and truth.is_signal(4)
        assert not truth.is_signal(1)

    def test_empty_and_full(self):
        assert GroundTruth().signal_set == frozenset()
        assert GroundTruth(range(1, 5)).signal_set == frozenset({1, 2, 3, 4})

    def test_rejects_nonpositive_indices(self):
        with pytest.raises(ValueError):
            GroundTruth([0, 1])


class TestSerialization:
    @pytest.mark.parametrize("payload", [
        {"kind": "gaussian", "delta": 1.5},
        {"kind": "bernoulli", "p0": 0.2, "p1": 0.7},
        {"kind": "table", "support": [0.0, 1.0], "f_probs": [0.6, 0.4], "g_probs": [0.4, 0.6]},
    ])
    def test_round_trip(self, payload):
        model = model_from_dict(payload)
        assert model_from_dict(model_to_dict(model)) == model

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            model_from_dict({"kind": "poisson", "rate": 2.0})
