import math

import pytest
from hypothesis import given, settings

from wfanorm.automaton import WeightedAutomaton, evaluate
from wfanorm.errors import IllFormedSre, NotStochastic
from wfanorm.numerics import Backend, Rational
from wfanorm.sampling import chi_square_fit, probable_words, sample_pa, sample_sre
from wfanorm.sre import Dirac, Star, eval_sre, length_distribution
from randgen import probabilistic_automata, random_pa, rng_pick

N = 100_000


def within(count, p, n=N, k=4):
    se = math.sqrt(p * (1 - p) / n)
    return abs(count / n - p) <= k * se


@pytest.fixture(scope="module")
def example_batch():
    from conftest import load_data
    return sample_pa(load_data("example_pa.json"), N, seed=20240601)


def test_dirac_chain():
    pa = WeightedAutomaton.build("ab", 3, {0: 1}, {2: 1}, [(0, "a", 1, 1), (1, "b", 2, 1)])
    b = sample_pa(pa, 500, seed=1)
    assert b.counts == {("a", "b"): 500}
    assert b.draws == 500 and b.generator.startswith("numpy.PCG64")


def test_frequency_of_ab(example_batch):
    assert within(example_batch.counts[("a", "b")], 6 / 28)


def test_mean_length(example_batch, example_sre):
    dist = [float(x) for x in length_distribution(example_sre, 40)]
    mean = sum(k * p for k, p in enumerate(dist))
    var = sum(k * k * p for k, p in enumerate(dist)) - mean ** 2
    emp = sum(len(w) * c for w, c in example_batch.counts.items()) / N
    assert abs(emp - mean) <= 4 * math.sqrt(var / N)


def test_counts_sum_to_draws(example_batch):
    assert sum(example_batch.counts.values()) == N


def test_deterministic(example_pa):
    assert sample_pa(example_pa, 2000, seed=5) == sample_pa(example_pa, 2000, seed=5)
    assert sample_pa(example_pa, 2000, seed=5) != sample_pa(example_pa, 2000, seed=6)
    r = Star(Dirac("b"), Rational(1, 3))
    assert sample_sre(r, 2000, seed=5) == sample_sre(r, 2000, seed=5)


def test_rejects_non_stochastic(example):
    with pytest.raises(NotStochastic):
        sample_pa(example, 10, seed=0)
    with pytest.raises(IllFormedSre):
        sample_sre(Star(Star(Dirac("a"), Rational(1, 2)), Rational(1, 2)), 10, seed=0)


def test_sre_dirac():
    assert sample_sre(Dirac("a"), 300, seed=2).counts == {("a",): 300}


def test_sre_geometric():
    b = sample_sre(Star(Dirac("b"), Rational(1, 3)), N, seed=11)
    assert within(b.counts.get((), 0), 2 / 3)


def test_sre_and_automaton_agree(example_pa, example_batch, example_sre):
    other = sample_sre(example_sre, N, seed=77)
    top = sorted(example_batch.counts, key=example_batch.counts.get, reverse=True)[:10]
    for w in top:
        p = float(eval_sre(example_sre, w))
        assert p == pytest.approx(float(evaluate(example_pa, w)))
        diff = example_batch.counts[w] / N - other.counts.get(w, 0) / N
        assert abs(diff) <= 4 * math.sqrt(2 * p * (1 - p) / N)


def test_chi_square_running_example(example_pa, example_batch):
    probs = probable_words(example_pa)
    assert probs[("a", "b")] == Rational(6, 28)
    fit = chi_square_fit(example_batch, probs)
    assert fit.passed, fit


def test_chi_square_random_machines():
    for seed in range(20):
        pa = random_pa(rng_pick(1000 + seed))
        fit = chi_square_fit(sample_pa(pa, N, seed=seed), probable_words(pa))
        assert fit.passed, (seed, fit)


def test_chi_square_detects_wrong_distribution(example_pa, example_batch):
    skewed = {w: p for w, p in probable_words(example_pa).items()}
    skewed[("a", "b")] = Rational(5, 28)
    skewed[("a", "a")] += Rational(1, 28)
    assert not chi_square_fit(example_batch, skewed).passed


def test_float_automaton_sampling(example_pa):
    b = sample_pa(example_pa.to_backend(Backend.FLOAT), 20_000, seed=3)
    assert within(b.counts[("a", "b")], 6 / 28, n=20_000)


@settings(max_examples=15)
@given(probabilistic_automata(max_states=4))
def test_probable_words_are_exact(pa):
    for w, p in probable_words(pa, 1e-2).items():
        assert p == evaluate(pa, w) and p >= 1e-2
