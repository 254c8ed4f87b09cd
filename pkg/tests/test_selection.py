"""Pairwise-region scoring and exponential-mechanism hypothesis selection."""

import numpy as np
import pytest
from scipy.special import ndtr

from privgmm.errors import InvalidArgumentError
from privgmm.model import Dataset, GaussianParams, Mixture, sample
from privgmm.selection import (
    IntegrationSpec,
    grid_cell_masses,
    grid_cells,
    mde_scores,
    mde_scores_grid,
    private_select,
    private_select_report,
    scheffe_estimate,
    scheffe_mass,
    scheffe_membership,
)

PHI_ONE = 0.8413447460685429  # standard normal CDF at 1


def single(mu, var):
    return Mixture(((1.0, GaussianParams.univariate(mu, var)),))


def single_nd(mean, cov):
    return Mixture(((1.0, GaussianParams(np.array(mean, float), np.array(cov, float))),))


def test_region_membership_is_strict():
    a = single(0.0, 1.0)
    b = single(2.0, 1.0)
    assert scheffe_membership(a, b, [0.0])
    assert not scheffe_membership(a, b, [2.0])
    assert not scheffe_membership(a, b, [1.0])  # equal densities: excluded
    with pytest.raises(InvalidArgumentError):
        scheffe_membership(a, single_nd([0.0, 0.0], np.eye(2)), [0.0])


def test_region_mass_closed_form():
    # where N(0,1) beats N(2,1) is exactly x < 1
    a = single(0.0, 1.0)
    b = single(2.0, 1.0)
    spec = IntegrationSpec(tol=1e-6)
    assert scheffe_mass(a, b, a, spec=spec) == pytest.approx(PHI_ONE, abs=1e-5)
    assert scheffe_mass(b, a, a, spec=spec) == pytest.approx(1.0 - PHI_ONE, abs=1e-5)
    est = scheffe_estimate(a, b, a, data=np.array([0.0, 2.0, -1.0, 3.0]), spec=spec)
    assert est.empirical == pytest.approx(0.5)
    assert est.method == "quadrature"


def test_region_mass_monte_carlo_seeded():
    a = single_nd([0.0, 0.0], np.eye(2))
    b = single_nd([1.0, 0.0], np.eye(2))
    spec = IntegrationSpec(n_mc=50_000, seed=3)
    e1 = scheffe_estimate(a, b, a, spec=spec, pair=(0, 1))
    e2 = scheffe_estimate(a, b, a, spec=spec, pair=(0, 1))
    e3 = scheffe_estimate(a, b, a, spec=spec, pair=(4, 9))
    assert e1.mass_i == e2.mass_i
    assert e1.mass_i != e3.mass_i
    assert e1.method == "monte-carlo" and e1.mc_stderr is not None
    # the region is x1 < 1/2
    assert e1.mass_i == pytest.approx(ndtr(0.5), abs=4.0 * e1.mc_stderr + 1e-3)


def test_scores_prefer_the_planted_truth():
    truth = Mixture.univariate([0.5, 0.5], [0.0, 6.0], [1.0, 1.0])
    hyps = [truth, single(20.0, 1.0), single(-20.0, 1.0)]
    data = sample(truth, 4000, seed=11)
    scores = mde_scores(hyps, data, spec=IntegrationSpec(tol=1e-5))
    assert int(np.argmin(scores)) == 0
    assert scores[0] < 0.05
    assert scores[1] > 0.3 and scores[2] > 0.3


def test_scores_shift_at_most_one_over_n_between_neighbors():
    hyps = [single(0.0, 1.0), single(1.5, 1.0), single(-1.0, 4.0)]
    n = 200
    spec = IntegrationSpec(tol=1e-6)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(size=n)
        y = x.copy()
        y[rng.integers(n)] = rng.normal() * 10.0
        s1 = mde_scores(hyps, x, spec=spec)
        s2 = mde_scores(hyps, y, spec=spec)
        assert np.max(np.abs(s1 - s2)) <= 1.0 / n + 1e-9


def test_private_select_report_shape():
    truth = single(0.0, 1.0)
    hyps = [truth, single(8.0, 1.0)]
    data = sample(truth, 500, seed=2)
    rng = np.random.default_rng(0)
    mix, report = private_select_report(hyps, data, epsilon=1e6, rng=rng)
    assert set(report) == {"chosen", "scores", "epsilon", "n"}
    assert report["n"] == 500 and report["epsilon"] == 1e6
    assert report["chosen"] == int(np.argmin(report["scores"])) == 0
    assert mix is hyps[0]


def test_private_select_single_hypothesis_short_circuit():
    only = single(3.0, 2.0)
    rng = np.random.default_rng(1)
    mix, report = private_select_report([only], np.zeros(10), 1.0, rng)
    assert mix is only and report["chosen"] == 0 and report["scores"] == [0.0]
    with pytest.raises(InvalidArgumentError):
        private_select([], np.zeros(10), 1.0, rng)


def test_selection_is_randomized_at_small_epsilon():
    truth = single(0.0, 1.0)
    hyps = [truth, single(0.3, 1.0)]
    data = sample(truth, 50, seed=4)
    scores = mde_scores(hyps, data)
    picks = {
        private_select_report(
            hyps, data, 1e-4, np.random.default_rng(t), scores=scores
        )[1]["chosen"]
        for t in range(40)
    }
    assert picks == {0, 1}


def test_grid_cells_bracket_edges():
    reps = grid_cells(np.array([0.0, 1.0, 2.0]))
    assert np.allclose(reps, [-0.5, 0.5, 1.5, 2.5])
    with pytest.raises(InvalidArgumentError):
        grid_cells(np.array([0.0]))
    with pytest.raises(InvalidArgumentError):
        grid_cells(np.array([0.0, 0.0, 1.0]))


def test_grid_cell_masses_match_normal_cdf():
    flat = single(0.0, 1.0).flat_univariate()
    masses = grid_cell_masses(flat, np.array([-1.0, 1.0]))
    assert masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert masses[2] == pytest.approx(1.0 - PHI_ONE, abs=1e-12)
    assert masses[1] == pytest.approx(2.0 * PHI_ONE - 1.0, abs=1e-12)


def test_grid_scorer_tracks_exact_scorer():
    truth = Mixture.univariate([0.6, 0.4], [0.0, 5.0], [1.0, 2.0])
    hyps = [
        truth,
        Mixture.univariate([0.6, 0.4], [0.5, 5.0], [1.0, 2.0]),
        single(2.0, 9.0),
        single(-6.0, 1.0),
    ]
    data = sample(truth, 600, seed=9)
    exact = mde_scores(hyps, data, spec=IntegrationSpec(tol=1e-6))
    edges = np.linspace(-12.0, 12.0, 600)
    grid = mde_scores_grid(hyps, data, edges)
    assert np.max(np.abs(exact - grid)) <= 0.05


def test_grid_scorer_sensitivity_matches_exact_scorer():
    hyps = [single(0.0, 1.0), single(2.0, 1.0), single(-2.0, 4.0)]
    edges = np.linspace(-10.0, 10.0, 400)
    rng = np.random.default_rng(3)
    n = 150
    for _ in range(5):
        x = rng.normal(size=n)
        y = x.copy()
        y[rng.integers(n)] = 50.0  # lands outside the edges: outer cell
        s1 = mde_scores_grid(hyps, x, edges)
        s2 = mde_scores_grid(hyps, y, edges)
        assert np.max(np.abs(s1 - s2)) <= 1.0 / n + 1e-12


def test_scorers_reject_degenerate_input():
    with pytest.raises(InvalidArgumentError):
        mde_scores([single(0.0, 1.0)], np.zeros(5))
    with pytest.raises(InvalidArgumentError):
        mde_scores_grid([single(0.0, 1.0)], np.zeros(5), np.array([0.0, 1.0]))
    with pytest.raises(InvalidArgumentError):
        IntegrationSpec(tol=0.0)
    with pytest.raises(InvalidArgumentError):
        IntegrationSpec(n_mc=10)


def test_dataset_wrapper_accepted():
    hyps = [single(0.0, 1.0), single(4.0, 1.0)]
    pts = np.random.default_rng(0).normal(size=120)
    a = mde_scores(hyps, pts)
    b = mde_scores(hyps, Dataset(pts[:, None]))
    assert np.allclose(a, b)
