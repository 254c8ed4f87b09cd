"""Release-gate suite: one test per numbered requirement, nine in all.

Each test is self-contained and deterministic (fixed generator seeds), so a
verbose run prints exactly one pass/fail line per requirement.  The numbers
asserted here (sensitivity constants, seed success counts, TV targets, sigma
margins) are the contract; the module tests elsewhere cover the same code at
finer granularity.
"""

import itertools
import math
import time

import numpy as np

from privgmm import univariate as uv
from privgmm.cli import RunConfig, learn_univariate
from privgmm.geometry import (
    ApproxParams,
    ParamRegion,
    affine_push,
    approx_ball_region,
    approx_check,
    det_ratio_bounds,
    goe_symmetric,
    jmj_check,
    nvol_mc,
    sym_sqrt,
)
from privgmm.mech import TruncLapSpec, tlap_bound, tlap_dp_ratio_check, tlap_sample_batch
from privgmm.model import (
    GaussianParams,
    Mixture,
    PrivacyBudget,
    sample,
    tv_upper_bound_batch,
)
from privgmm.nets import CrudeBall, gaussian_cover
from privgmm.selection import private_select_report
from privgmm.tvdist import tv_monte_carlo, tv_univariate


def _gen(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _gen_seq(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


# -- 1: adjacent datasets move the gap multiset by <= 3 and the bucket
#       counts by <= 6 in l1 ----------------------------------------------


def test_criterion_1_gap_multiset_and_count_sensitivity():
    worst_md = 0
    worst_l1 = 0
    # exhaustive corpus: every integer multiset with n in 2..6 over {0..4},
    # against every single-point replacement
    for n in range(2, 7):
        for base in itertools.combinations_with_replacement(range(5), n):
            x = np.array(base, dtype=float)
            z = uv.consecutive_pairs(x)
            for u in sorted(set(base)):
                pos = base.index(u)
                for v in range(5):
                    rep = list(base)
                    rep[pos] = v
                    xp = np.array(rep, dtype=float)
                    md = uv.multiset_distance(z, uv.consecutive_pairs(xp))
                    l1 = uv.count_l1_sensitivity(x, xp)
                    assert md <= 3, (base, rep, md)
                    assert l1 <= 6, (base, rep, l1)
                    worst_md = max(worst_md, md)
                    worst_l1 = max(worst_l1, l1)
    # the bound is tight on this corpus, so the checks have teeth
    assert worst_md == 3

    rng = _gen(11)
    for _ in range(10_000):
        scale = 10.0 ** rng.uniform(-3, 3)
        x = rng.normal(0.0, scale, size=50)
        if rng.random() < 0.3:
            # coarse rounding manufactures ties, exercising zero-gap skipping
            x = np.round(x, 1)
        xp = x.copy()
        xp[rng.integers(50)] = rng.normal(0.0, scale)
        md = uv.multiset_distance(uv.consecutive_pairs(x), uv.consecutive_pairs(xp))
        l1 = uv.count_l1_sensitivity(x, xp)
        assert md <= 3
        assert l1 <= 6
        worst_l1 = max(worst_l1, l1)
    assert worst_l1 == 6


# -- 2: truncated Laplace support, threshold domination, and the numeric
#       indistinguishability check ----------------------------------------


def test_criterion_2_truncated_laplace_bounds():
    rng = _gen(22)
    for _ in range(20):
        spec = TruncLapSpec(
            sensitivity=float(10.0 ** rng.uniform(-1, 1)),
            epsilon=float(10.0 ** rng.uniform(-2, 0.3)),
            delta=float(10.0 ** rng.uniform(-8, -0.5)),
        )
        draws = tlap_sample_batch(spec, rng, 1_000_000)
        assert float(np.max(np.abs(draws))) <= spec.A

    # noise bound below the candidate threshold across the operating domain.
    # The inequality genuinely fails for delta within ~0.045 of one (at
    # delta = 1 the right side is zero), so the grid spans the twelve decades
    # a privacy failure probability actually occupies; the learner's internal
    # budget splits keep its own mechanisms below delta = 0.8 regardless.
    for eps in np.geomspace(1e-4, 1.0, 50):
        for delta in np.geomspace(1e-12, 0.95, 50):
            a = tlap_bound(1.0, eps / 10.0, delta / 10.0)
            assert a < (100.0 / eps) * math.log(1.0 / delta), (eps, delta)
    a_corner = tlap_bound(1.0, 0.1, 0.099)
    assert a_corner > 100.0 * math.log(1.0 / 0.99)

    rng = _gen(23)
    for _ in range(20):
        spec = TruncLapSpec(
            sensitivity=float(10.0 ** rng.uniform(-1, 1)),
            epsilon=float(10.0 ** rng.uniform(-2, 0.5)),
            delta=float(10.0 ** rng.uniform(-6, -0.7)),
        )
        shift = float(rng.uniform(-1.0, 1.0)) * spec.sensitivity
        assert tlap_dp_ratio_check(spec, shift, 2000)


# -- 3: the candidate mechanism never emits more than n - 1 candidates ------


def test_criterion_3_candidate_set_size():
    rng = _gen(33)
    for i in range(100):
        n = int(rng.integers(2, 2001))
        kind = i % 4
        if kind == 0:
            x = rng.normal(0.0, 10.0 ** rng.uniform(-2, 2), size=n)
        elif kind == 1:
            x = rng.integers(-5, 6, size=n).astype(float)
        elif kind == 2:
            x = np.full(n, 3.7)
            x[rng.integers(n)] += 10.0 ** rng.uniform(-3, 3)
        else:
            x = rng.lognormal(0.0, 2.0, size=n)
        budget = PrivacyBudget(
            float(rng.uniform(0.05, 1.0)), float(10.0 ** rng.uniform(-8, -0.4))
        )
        cset = uv.noisy_candidates(x, budget, rng)
        assert len(cset) <= n - 1


# -- 4: the candidate set brackets every planted component at the
#       documented dyadic scale -------------------------------------------


def test_criterion_4_crude_recovery_planted_mixture():
    truth = Mixture.univariate(
        [0.5, 0.3, 0.2], [0.0, 200.0, -500.0], [1.0, 25.0, 0.01]
    )
    components = [(0.0, 1.0), (200.0, 5.0), (-500.0, 0.1)]
    n = 30_000
    budget = PrivacyBudget(1.0, 1e-6)
    wins = 0
    for s in range(20):
        data = sample(truth, n, np.random.SeedSequence((404, s)))
        cset = uv.noisy_candidates(data, budget, _gen_seq(405, s))
        if all(uv.candidate_quality_holds(cset, mu, sd, n) for mu, sd in components):
            wins += 1
    assert wins >= 18, wins


# -- 5: every Gaussian in the crude ball is within TV 0.1 of the cover ------


def test_criterion_5_net_covering_tv():
    ball = CrudeBall(GaussianParams.univariate(0.0, 1.0), 4.0)
    cover = gaussian_cover(ball, 0.1, 1)
    mus = np.array([g.mu1 for g in cover])
    vrs = np.array([g.var1 for g in cover])
    rng = _gen(55)
    for _ in range(500):
        mean = float(rng.uniform(-4.0, 4.0))
        var = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
        target = GaussianParams.univariate(mean, var)
        assert ball.contains(target)
        tm = Mixture.single(target)
        bounds = tv_upper_bound_batch(
            np.full_like(mus, mean), np.full_like(vrs, var), mus, vrs
        )
        # the closed-form bound ranks the cover; quadrature confirms the
        # leaders until one clears the target
        best = np.inf
        for idx in np.argsort(bounds)[:10]:
            best = min(best, tv_univariate(tm, Mixture.single(cover[idx]), 1e-6).value)
            if best <= 0.1:
                break
        assert best <= 0.1, (mean, var, best)


# -- 6: selection lands within 4 OPT + 0.1 of a planted truth ---------------


def _perturbed_class(truth, m, seed):
    """truth plus m - 1 perturbations of growing magnitude, fixed by seed."""
    rng = _gen(seed)
    hyps = [truth]
    while len(hyps) < m:
        t = len(hyps) / (m - 1.0)
        dm = rng.normal(0.0, 0.02 + 0.9 * t, size=2)
        dv = np.exp(rng.normal(0.0, 0.02 + 0.35 * t, size=2))
        w0 = 0.6 * np.exp(rng.normal(0.0, 0.02 + 0.4 * t))
        weights = [w0 / (w0 + 0.4), 0.4 / (w0 + 0.4)]
        hyps.append(
            Mixture.univariate(
                weights,
                [0.0 + dm[0], 4.0 + dm[1]],
                [1.0 * dv[0], 2.25 * dv[1]],
            )
        )
    return hyps


def test_criterion_6_private_selection_rate():
    truth = Mixture.univariate([0.6, 0.4], [0.0, 4.0], [1.0, 2.25])
    hyps = _perturbed_class(truth, 50, seed=66)
    tvs = np.array([tv_univariate(truth, h, 1e-5).value for h in hyps])
    opt = float(np.min(tvs))
    assert opt <= 1e-6  # the truth itself is hypothesis zero
    wins = 0
    for trial in range(20):
        data = sample(truth, 5000, np.random.SeedSequence((606, trial)))
        _, report = private_select_report(hyps, data, 1.0, _gen_seq(607, trial))
        if tvs[report["chosen"]] <= 4.0 * opt + 0.1:
            wins += 1
    assert wins >= 18, wins


# -- 7: the full univariate pipeline at its default operating point ---------


def _pipeline_tv(truth, n, seed):
    """TV to truth of one end-to-end run; a declined run scores the trivial 1."""
    cfg = RunConfig(n=n, n_prime=n, epsilon=1.0, delta=1e-6, alpha=0.2, seed=seed)
    _, report = learn_univariate(cfg, truth=truth)
    if report["result"] != "ok":
        return 1.0
    return float(report["tv_to_truth"])


def test_criterion_7_end_to_end_univariate():
    truth = Mixture.univariate([0.5, 0.5], [0.0, 100.0], [1.0, 25.0])
    per_seed_limit = 300.0
    tvs = []
    for seed in range(10):
        t0 = time.monotonic()
        tvs.append(_pipeline_tv(truth, 20_000, seed))
        assert time.monotonic() - t0 < per_seed_limit
        assert tvs[-1] < 1.0  # every seed must produce an estimate here
    median_flagship = float(np.median(tvs))
    assert median_flagship <= 0.2, tvs

    # sample-size sweep: the learner goes from abstaining, through a coarse
    # estimate right above its release threshold, to the resolution floor of
    # its hypothesis grid.  Medians must not increase along the way.
    medians = []
    for n in (12_000, 14_000, 16_000):
        medians.append(float(np.median([_pipeline_tv(truth, n, s) for s in range(5)])))
    medians.append(median_flagship)
    assert medians[0] == 1.0  # below the release threshold every run declines
    for lo, hi in zip(medians[1:], medians[:-1]):
        assert lo <= hi, medians


# -- 8: spectral enclosures, projection inequality, approximation relation
#       constants, and the push-forward-invariant volume --------------------


def _random_spd(d, rng):
    a = rng.normal(size=(d, d))
    return a @ a.T + (0.3 + rng.random()) * np.eye(d)


def _in_ball(base, p, u, rng):
    """A Gaussian inside the (gamma, rho, tau) ball of base, at depth u < 1."""
    d = base.d
    b = sym_sqrt(base.cov)
    e = goe_symmetric(d, rng, p.gamma * u)
    cov = b @ (np.eye(d) + e) @ b
    cov = 0.5 * (cov + cov.T)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    mean = base.mean + b @ (p.tau * u * rng.random() * direction)
    return GaussianParams(mean, cov)


def test_criterion_8_geometry_lemma_suite():
    rng = _gen(88)
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        m = goe_symmetric(d, rng, float(rng.uniform(0.0, 0.1)))
        ratio, lo, hi = det_ratio_bounds(m, float(rng.uniform(1.0, 2.0)))
        assert lo - 1e-12 <= ratio <= hi + 1e-12

    built = 0
    while built < 1000:
        d = int(rng.integers(1, 9))
        dp = int(rng.integers(d, 9))
        m = goe_symmetric(d, rng, float(np.exp(rng.uniform(-3, 3))))
        # near-isometry rows: scaled orthonormal frame plus small noise;
        # dp >= d keeps the row Gram full rank, away from the distance-1 wall
        q, _ = np.linalg.qr(rng.normal(size=(dp, d)))
        s = math.sqrt(1.0 + rng.uniform(-0.5, 0.5))
        j = s * q.T + rng.uniform(0.0, 0.05) * rng.normal(size=(d, dp))
        g = j @ j.T - np.eye(d)
        phi = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (g + g.T)))))
        if phi > 0.999:
            continue
        built += 1
        assert jmj_check(m, j)

    for _ in range(1000):
        d = int(rng.integers(1, 4))
        p = ApproxParams.shorthand(
            float(rng.uniform(0.01, 0.2)), float(rng.uniform(0.01, 0.2)), d
        )
        p2 = ApproxParams(2 * p.gamma, 2 * p.rho, 2 * p.tau)
        base = GaussianParams(rng.normal(size=d), _random_spd(d, rng))
        hat = _in_ball(base, p, float(rng.uniform(0.0, 0.95)), rng)
        assert approx_check(hat, base, p)
        assert approx_check(base, hat, p2)

    for _ in range(1000):
        d = int(rng.integers(1, 4))
        p = ApproxParams.shorthand(
            float(rng.uniform(0.01, 0.1)), float(rng.uniform(0.01, 0.1)), d
        )
        p4 = ApproxParams(4 * p.gamma, 4 * p.rho, 4 * p.tau)
        base = GaussianParams(rng.normal(size=d), _random_spd(d, rng))
        mid = _in_ball(base, p, float(rng.uniform(0.0, 0.95)), rng)
        far = _in_ball(mid, p, float(rng.uniform(0.0, 0.95)), rng)
        assert approx_check(mid, base, p)
        assert approx_check(far, mid, p)
        assert approx_check(far, base, p4)

    box = ParamRegion(
        d=1,
        lo=np.array([0.0, 1.0]),
        hi=np.array([1.0, 2.0]),
        predicate=lambda mean, cov: True,
    )
    est = nvol_mc(box, n_samples=150_000, seed=808)
    assert abs(est.value - (2.0 - math.sqrt(2.0))) <= 3.0 * est.stderr

    for d, n_samples in ((1, 150_000), (2, 120_000)):
        p = ApproxParams.shorthand(0.06, 0.1, d)
        base = GaussianParams(np.linspace(0.3, -0.5, d), _random_spd(d, _gen(d)))
        pushed = affine_push(base, np.linspace(0.7, -1.1, d), _random_spd(d, _gen(17 + d)))
        e0 = nvol_mc(approx_ball_region(base, p), n_samples=n_samples, seed=818)
        e1 = nvol_mc(approx_ball_region(pushed, p), n_samples=n_samples, seed=819)
        assert abs(e0.value - e1.value) <= 3.0 * math.hypot(e0.stderr, e1.stderr), d


# -- 9: the two TV oracles agree within their own stated error bounds -------


def test_criterion_9_tv_oracle_equivalence():
    rng = _gen(99)

    def rand_mix(k):
        w = rng.dirichlet(np.ones(k))
        mus = rng.uniform(-8.0, 8.0, size=k)
        sds = np.exp(rng.uniform(np.log(0.3), np.log(3.0), size=k))
        return Mixture.univariate(w.tolist(), mus.tolist(), (sds**2).tolist())

    for _ in range(100):
        k1 = int(rng.integers(1, 4))
        k2 = int(rng.integers(1, 4))
        m1 = rand_mix(k1)
        if rng.random() < 0.4:
            w, mu, var = m1.flat_univariate()
            m2 = Mixture.univariate(
                w.tolist(),
                (mu + rng.normal(0.0, 0.2, size=k1)).tolist(),
                (var * np.exp(rng.normal(0.0, 0.1, size=k1))).tolist(),
            )
        else:
            m2 = rand_mix(k2)
        q = tv_univariate(m1, m2, 1e-6)
        mc = tv_monte_carlo(m1, m2, n_samples=50_000, seed=int(rng.integers(2**31)))
        assert abs(q.value - mc.value) <= q.error_bound + mc.error_bound
