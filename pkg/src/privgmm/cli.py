"""End-to-end learners and the command-line interface.

The univariate learner runs two stages on disjoint sample blocks.  The first
block carries an (epsilon, delta) budget split between the dyadic
gap-candidate mechanism and a thresholded location histogram; anchors
derived from the released histogram cells seed small parameter balls, whose
covers and gridded weights form the hypothesis class.  The second block is
fresh data consumed only by the epsilon-DP exponential-mechanism selection.

Paper-faithful parameter choices (ball spread n^3, weight step alpha/k with
huge classes) are accepted in the configuration but capped to enumerable
effective values; requested and effective values both appear in the report.
"""

import argparse
import csv
import itertools
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidArgumentError, UnsupportedDimensionError
from .mech import TruncLapSpec, tlap_sample
from .model import (
    Dataset,
    GaussianParams,
    Mixture,
    PrivacyBudget,
    load_dataset,
    load_mixture,
    mixture_to_dict,
    sample,
)
from .nets import CrudeBall, gaussian_cover, mixture_hypotheses, weight_grid
from .selection import IntegrationSpec, mde_scores, mde_scores_grid, private_select_report
from .tvdist import tv_univariate
from .univariate import noisy_candidates

# Effective caps for desk-scale enumeration.  The requested values (G = n^3,
# zeta = alpha/k) produce classes far beyond what any scorer can touch; the
# caps below keep the class around 10^4 hypotheses.
G_EFF_CAP = 1.30
ZETA_MIN = 0.05
ZETA_MAX = 0.50
COVER_ZETA_FACTOR = 1.5
COVER_ZETA_MAX = 0.35
MEAN_SPAN = 0.50
EDGE_STEP = 0.06
EDGE_TAIL_SIGMAS = 6.0
# First-block budget shares.  The candidate threshold scales like 1/eps, so
# the gap mechanism keeps most of the block budget; the location histogram
# threshold only enters through the much smaller per-cell noise bound.
CAND_BUDGET_FRAC = 0.8
LOC_CELL_FACTOR = 0.125
CLUSTER_GAP_CELLS = 3
GRID_SCORER_MIN_CLASS = 2000
CLASS_SIZE_GUARD = 200_000

BOTTOM = {"result": "bottom"}


@dataclass(frozen=True)
class RunConfig:
    d: int = 1
    k: int = 2
    n: int = 20_000
    n_prime: int = 20_000
    epsilon: float = 1.0
    delta: float = 1e-6
    alpha: float = 0.2
    zeta: Optional[float] = None
    G: Optional[float] = None
    cap: int = 20_000
    K: float = 140.0
    seed: int = 0
    out: Optional[str] = None
    max_candidates: Optional[int] = None
    amplify: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d must be at least 1")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.n_prime < 1:
            raise ConfigError("n_prime must be at least 1")
        if not (self.epsilon > 0.0):
            raise ConfigError("epsilon must be positive")
        if not (0.0 <= self.delta < 1.0):
            raise ConfigError("delta must lie in [0, 1)")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie in (0, 1)")
        if self.zeta is not None and not (0.0 < self.zeta <= 1.0):
            raise ConfigError("zeta must lie in (0, 1]")
        if self.G is not None and self.G < 1.0:
            raise ConfigError("G must be at least 1")
        if self.cap < 1:
            raise ConfigError("cap must be positive")
        if self.K <= 0.0:
            raise ConfigError("K must be positive")
        if self.amplify < 1:
            raise ConfigError("amplify count must be at least 1")

    def requested_g(self):
        """The pseudocode default G = n^3 unless overridden."""
        return float(self.G) if self.G is not None else float(self.n) ** 3

    def requested_zeta(self):
        return float(self.zeta) if self.zeta is not None else self.alpha / self.k


def _effective_knobs(config):
    g_req = config.requested_g()
    z_req = config.requested_zeta()
    g_eff = min(g_req, G_EFF_CAP)
    zeta_w = min(max(z_req, ZETA_MIN), ZETA_MAX)
    # weight grids need an integral 1/zeta
    m = max(2, round(1.0 / zeta_w))
    zeta_w = 1.0 / m
    zeta_cov = min(zeta_w * COVER_ZETA_FACTOR, COVER_ZETA_MAX)
    return g_req, g_eff, z_req, zeta_w, zeta_cov


def _bottom(reason, config=None, extras=None):
    rep = dict(BOTTOM)
    rep["reason"] = reason
    if config is not None:
        rep["config"] = _config_dict(config)
    if extras:
        rep.update(extras)
    return None, rep


def _config_dict(config):
    return {
        "d": config.d,
        "k": config.k,
        "n": config.n,
        "n_prime": config.n_prime,
        "epsilon": config.epsilon,
        "delta": config.delta,
        "alpha": config.alpha,
        "zeta": config.zeta,
        "G": config.G,
        "cap": config.cap,
        "K": config.K,
        "seed": config.seed,
        "max_candidates": config.max_candidates,
        "amplify": config.amplify,
    }


# ---------------------------------------------------------------------------
# Location histogram (second half of the first-block budget)


def _histogram_release(x, width, eps_h, delta_h, rng):
    """Thresholded noisy histogram over cells floor(x / width).

    A single point change touches at most two cells by one count each, so
    per-cell TLap(1, eps_h/2, delta_h/2) noise composes to (eps_h, delta_h).
    With the release threshold at 1 + A (the noise support radius), a cell
    that is empty in one of two adjacent datasets can never be released in
    either, which is what makes noising only nonempty cells sound.
    """
    spec = TruncLapSpec(sensitivity=1.0, epsilon=eps_h / 2.0, delta=delta_h / 2.0)
    threshold = 1.0 + spec.A
    cells = {}
    idx = np.floor(x / width).astype(np.int64)
    for g in idx:
        cells[int(g)] = cells.get(int(g), 0) + 1
    released = {}
    for g in sorted(cells):
        noisy = cells[g] + tlap_sample(spec, rng)
        if noisy > threshold:
            released[g] = noisy
    return released, threshold


def _interp_quantile(cum, totals, lefts, width, q):
    """Linear-in-cell quantile of the released step histogram."""
    target = q * cum[-1]
    j = int(np.searchsorted(cum, target, side="left"))
    j = min(j, len(totals) - 1)
    prev = cum[j] - totals[j]
    frac = 0.5 if totals[j] <= 0 else (target - prev) / totals[j]
    frac = min(1.0, max(0.0, frac))
    return lefts[j] + frac * width


@dataclass(frozen=True)
class Anchor:
    mu: float
    sigma: float
    count: float
    cells: int


_NORMAL_IQR = 1.3489795003921634  # 2 * Phi^-1(0.75)


def _iqr_shrink(z0):
    """IQR of a +-z0 truncated standard normal relative to the full normal."""
    from scipy.special import ndtri

    m = 2.0 * ndtr_scalar(z0) - 1.0
    if m <= 1e-12:
        return 1e-3
    return 2.0 * ndtri(0.5 + 0.25 * m) / _NORMAL_IQR


def ndtr_scalar(z):
    from scipy.special import ndtr

    return float(ndtr(z))


def _corrected_sigma(raw_sigma, half_extent, width):
    """Undo the binning inflation and the release-threshold tail truncation.

    The interpolated quantiles act on counts binned at `width` (adding about
    width^2/12 of variance) and on a histogram whose tails below the release
    threshold are missing entirely (shrinking the IQR).  Both effects are
    inverted approximately, iterating the truncation point twice.
    """
    var_b = max(raw_sigma**2 - width**2 / 12.0, (0.3 * width) ** 2)
    sigma = math.sqrt(var_b)
    for _ in range(2):
        z0 = min(max(half_extent / sigma, 0.5), 8.0)
        sigma = math.sqrt(var_b) / max(_iqr_shrink(z0), 1e-3)
    return sigma


def _anchors_from_release(released, width):
    """Cluster released cells and summarize each by robust quantile moments."""
    if not released:
        return []
    keys = sorted(released)
    groups = [[keys[0]]]
    for g in keys[1:]:
        if g - groups[-1][-1] <= CLUSTER_GAP_CELLS:
            groups[-1].append(g)
        else:
            groups.append([g])
    anchors = []
    for grp in groups:
        counts = np.array([max(released[g], 0.0) for g in grp])
        if counts.sum() <= 0:
            continue
        lefts = np.array([g * width for g in grp])
        cum = np.cumsum(counts)
        q25 = _interp_quantile(cum, counts, lefts, width, 0.25)
        q50 = _interp_quantile(cum, counts, lefts, width, 0.50)
        q75 = _interp_quantile(cum, counts, lefts, width, 0.75)
        raw = max((q75 - q25) / _NORMAL_IQR, width / 2.0)
        half_extent = (lefts[-1] + width - lefts[0]) / 2.0
        sigma = _corrected_sigma(raw, half_extent, width)
        anchors.append(Anchor(mu=q50, sigma=sigma, count=float(counts.sum()), cells=len(grp)))
    anchors.sort(key=lambda a: -a.count)
    return anchors


# ---------------------------------------------------------------------------
# Class construction


def _ball_cover(anchor, g_eff, zeta_cov):
    ball = CrudeBall(GaussianParams.univariate(anchor.mu, anchor.sigma**2), g_eff)
    cover = gaussian_cover(ball, zeta_cov, 1)
    span = MEAN_SPAN * anchor.sigma * (1.0 + 1e-9)
    kept = [g for g in cover if abs(g.mu1 - anchor.mu) <= span]
    return kept if kept else [ball.center]


def _dedup_key(params):
    return (round(params.mu1, 12), round(params.var1, 12))


def _assemble_mixture(weights, comps):
    parts = {}
    for w, c in zip(weights, comps):
        if w <= 0.0:
            continue
        key = _dedup_key(c)
        if key in parts:
            parts[key] = (parts[key][0] + w, parts[key][1])
        else:
            parts[key] = (float(w), c)
    items = sorted(parts.items(), key=lambda kv: kv[0])
    key = tuple((kv[0], round(kv[1][0], 15)) for kv in items)
    return key, Mixture(tuple(kv[1] for kv in items))


def _class_by_assignment(covers, wgrid):
    """One component per anchor ball, crossed with the weight grid."""
    seen = {}
    for wvec in wgrid:
        for combo in itertools.product(*covers):
            key, mix = _assemble_mixture(wvec, combo)
            seen.setdefault(key, mix)
    return [seen[k] for k in sorted(seen)]


def _pooled_components(covers):
    pool = []
    pool_seen = set()
    for cover in covers:
        for g in cover:
            key = _dedup_key(g)
            if key not in pool_seen:
                pool_seen.add(key)
                pool.append(g)
    pool.sort(key=_dedup_key)
    return pool


def _class_pooled(covers, k, wgrid):
    """Multisets of k components from the pooled covers, crossed with weights.

    Ordered weight vectors applied to unordered component multisets reach
    every assignment exactly once.
    """
    pool = _pooled_components(covers)
    seen = {}
    for wvec in wgrid:
        for combo in itertools.combinations_with_replacement(pool, k):
            key, mix = _assemble_mixture(wvec, combo)
            seen.setdefault(key, mix)
    return [seen[key] for key in sorted(seen)]


def _enumeration_size(covers, k, wcount, assignment):
    if assignment:
        total = wcount
        for c in covers:
            total *= len(c)
        return total
    return wcount * math.comb(len(_pooled_components(covers)) + k - 1, k)


def _selection_edges(anchors, g_eff):
    """Fixed cell partition for the grid scorer, derived from anchors only."""
    pieces = []
    root_g = math.sqrt(g_eff)
    for a in anchors:
        hi_sd = a.sigma * root_g
        lo = a.mu - (MEAN_SPAN * a.sigma + EDGE_TAIL_SIGMAS * hi_sd)
        hi = a.mu + (MEAN_SPAN * a.sigma + EDGE_TAIL_SIGMAS * hi_sd)
        step = EDGE_STEP * a.sigma
        count = int(math.ceil((hi - lo) / step)) + 1
        pieces.append(np.linspace(lo, hi, count))
    lo_all = min(float(p[0]) for p in pieces)
    hi_all = max(float(p[-1]) for p in pieces)
    pieces.append(np.linspace(lo_all, hi_all, 33))
    edges = np.unique(np.concatenate(pieces))
    # collapse near-duplicate edges from overlapping windows
    keep = np.concatenate([[True], np.diff(edges) > 1e-12])
    return edges[keep]


# ---------------------------------------------------------------------------
# Univariate end-to-end learner


def learn_univariate(config, data=None, truth=None):
    """Two-block private learner for univariate mixtures.

    Returns (mixture or None, report).  The first config.n points feed the
    (epsilon, delta) crude stage, split between the candidate mechanism and
    the location histogram; the next config.n_prime points feed the
    epsilon-DP selection.  A None mixture means the failure marker was
    returned.
    """
    if config.d != 1:
        raise InvalidArgumentError("learn_univariate requires d = 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 1))))
    if data is None:
        if truth is None:
            raise InvalidArgumentError("need data or a truth mixture to sample from")
        data = sample(truth, config.n + config.n_prime, np.random.SeedSequence((config.seed, 0)))
    pts = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if pts.ndim == 2:
        if pts.shape[1] != 1:
            raise InvalidArgumentError("univariate learner requires d = 1 data")
        pts = pts[:, 0]
    if pts.shape[0] < config.n + config.n_prime:
        raise InvalidArgumentError(
            f"need n + n_prime = {config.n + config.n_prime} samples, have {pts.shape[0]}"
        )
    block1 = pts[: config.n]
    block2 = pts[config.n : config.n + config.n_prime]

    g_req, g_eff, z_req, zeta_w, zeta_cov = _effective_knobs(config)
    report = {
        "config": _config_dict(config),
        "G_requested": g_req,
        "G_eff": g_eff,
        "zeta_requested": z_req,
        "zeta_weights": zeta_w,
        "zeta_cover": zeta_cov,
        "crude_samples_used": int(block1.shape[0]),
        "selection_samples_used": int(block2.shape[0]),
    }
    recommended = config.K * config.k * math.log(1.0 / max(config.delta, 1e-300)) / (
        config.alpha * config.epsilon
    )
    report["undersampled"] = bool(config.n < recommended)

    # Block 1, mechanism 1: dyadic gap candidates at the lion's share of the
    # block budget; mechanism 2 below gets the rest.  Together they compose
    # to (epsilon, delta) over the first block.
    cand_budget = PrivacyBudget(
        CAND_BUDGET_FRAC * config.epsilon, CAND_BUDGET_FRAC * config.delta
    )
    hist_eps = (1.0 - CAND_BUDGET_FRAC) * config.epsilon
    hist_delta = (1.0 - CAND_BUDGET_FRAC) * config.delta
    try:
        cset = noisy_candidates(block1, cand_budget, rng)
    except InvalidArgumentError as exc:
        return _bottom(f"candidate stage rejected input: {exc}", config)
    if config.max_candidates is not None and len(cset) > config.max_candidates:
        cset = type(cset)(tuple(cset.candidates[: config.max_candidates]))
    report["candidates"] = cset.to_dicts()
    if len(cset) == 0:
        return _bottom("no candidate buckets crossed the threshold", config, report)

    # Block 1, mechanism 2: location histogram at the remaining budget share.
    # The cell width is post-processing of mechanism 1's output.
    a_min = min(c.a for c in cset.candidates)
    width = LOC_CELL_FACTOR * config.n * math.ldexp(1.0, a_min)
    if not (width > 0.0 and math.isfinite(width)):
        return _bottom("degenerate histogram cell width", config, report)
    released, hist_threshold = _histogram_release(block1, width, hist_eps, hist_delta, rng)
    report["histogram_cell_width"] = width
    report["histogram_threshold"] = hist_threshold
    report["histogram_cells_released"] = len(released)
    if not released:
        return _bottom("location histogram released no cells", config, report)

    anchors = _anchors_from_release(released, width)
    strong_floor = max(2.0 * hist_threshold, config.alpha * config.n / (4.0 * config.k))
    strong = [a for a in anchors if a.count >= strong_floor][: 2 * config.k]
    if not strong:
        strong = anchors[:1]
    report["anchors"] = [
        {"mu": a.mu, "sigma": a.sigma, "count": a.count, "cells": a.cells} for a in strong
    ]

    wgrid = weight_grid(config.k, zeta_w)
    assignment = len(strong) == config.k
    balls = strong if assignment or len(strong) < config.k else strong[: config.k]
    zeta_c = zeta_cov
    covers = [_ball_cover(a, g_eff, zeta_c) for a in balls]
    # coarsen the cover until the raw product is safely enumerable
    for _ in range(6):
        if _enumeration_size(covers, config.k, len(wgrid), assignment) <= CLASS_SIZE_GUARD:
            break
        zeta_c = min(zeta_c * 1.4, COVER_ZETA_MAX)
        covers = [_ball_cover(a, g_eff, zeta_c) for a in balls]
    report["zeta_cover_effective"] = zeta_c
    if _enumeration_size(covers, config.k, len(wgrid), assignment) > CLASS_SIZE_GUARD:
        return _bottom("hypothesis class too large to enumerate", config, report)
    if assignment:
        hypotheses = _class_by_assignment(covers, wgrid)
    else:
        hypotheses = _class_pooled(covers, config.k, wgrid)
    if len(hypotheses) > config.cap:
        keep = np.unique(np.linspace(0, len(hypotheses) - 1, config.cap).astype(int))
        hypotheses = [hypotheses[i] for i in keep]
        report["class_truncated"] = True
    else:
        report["class_truncated"] = False
    report["class_size"] = len(hypotheses)
    if not hypotheses:
        return _bottom("hypothesis class is empty", config, report)

    # Block 2: epsilon-DP selection on fresh samples.  The scorer grid is a
    # fixed partition derived only from already-released anchors, so the
    # per-point sensitivity argument for the exponential mechanism is intact.
    if len(hypotheses) == 1:
        chosen_idx = 0
        scores = np.zeros(1)
    else:
        edges = _selection_edges(strong, g_eff)
        report["selection_grid_cells"] = int(edges.size + 1)
        scores = mde_scores_grid(hypotheses, block2[:, None], edges)
        _, sel_report = private_select_report(
            hypotheses, block2[:, None], config.epsilon, rng, scores=scores
        )
        chosen_idx = sel_report["chosen"]
    chosen = hypotheses[chosen_idx]
    report["chosen_index"] = int(chosen_idx)
    report["chosen"] = mixture_to_dict(chosen)
    report["epsilon"] = config.epsilon
    report["delta"] = config.delta
    report["score_summary"] = {
        "chosen": float(scores[chosen_idx]),
        "min": float(np.min(scores)),
        "median": float(np.median(scores)),
    }
    if truth is not None:
        report["tv_to_truth"] = tv_univariate(truth, chosen, 1e-4).value
    report["result"] = "ok"
    return chosen, report


def learn_univariate_amplified(config, truth):
    """Median-style amplification: learn on disjoint shards, then privately
    select among the shard outputs with one more fresh block."""
    t = config.amplify
    if t == 1:
        return learn_univariate(config, truth=truth)
    total = t * (config.n + config.n_prime) + config.n_prime
    data = sample(truth, total, np.random.SeedSequence((config.seed, 0)))
    pts = data.points[:, 0]
    outputs = []
    reports = []
    for shard in range(t):
        lo = shard * (config.n + config.n_prime)
        shard_cfg = replace(config, seed=config.seed + shard, amplify=1)
        mix, rep = learn_univariate(shard_cfg, data=pts[lo : lo + config.n + config.n_prime])
        reports.append(rep)
        if mix is not None:
            outputs.append(mix)
    if not outputs:
        return _bottom("all amplification shards failed", config, {"shards": reports})
    final_block = pts[t * (config.n + config.n_prime) :]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 2))))
    if len(outputs) == 1:
        chosen, sel = outputs[0], {"chosen": 0, "scores": [0.0]}
    else:
        chosen, sel = private_select_report(outputs, final_block[:, None], config.epsilon, rng)
    report = {
        "result": "ok",
        "config": _config_dict(config),
        "amplified": t,
        "shard_results": [r.get("result") for r in reports],
        "chosen": mixture_to_dict(chosen),
        "selection": sel,
    }
    if truth is not None:
        report["tv_to_truth"] = tv_univariate(truth, chosen, 1e-4).value
    return chosen, report


# ---------------------------------------------------------------------------
# Fine stage for supplied crude centers (d <= 3)


def nonprivate_moment_centers(data, k, seed=0):
    """NON-PRIVATE crude centers from empirical moments, for d >= 2 demos only.

    This helper looks at the raw data directly and offers no privacy at all;
    it stands in for the out-of-scope multivariate coarse stage.
    """
    pts = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if k == 1:
        cov = np.cov(pts.T).reshape(pts.shape[1], pts.shape[1])
        return [GaussianParams(pts.mean(axis=0), cov)]
    from scipy.cluster.vq import kmeans2

    centers, labels = kmeans2(pts, k, minit="++", seed=seed)
    out = []
    for c in range(k):
        chunk = pts[labels == c]
        if chunk.shape[0] < pts.shape[1] + 2:
            continue
        cov = np.cov(chunk.T).reshape(pts.shape[1], pts.shape[1])
        out.append(GaussianParams(chunk.mean(axis=0), cov))
    return out


def fine_stage(config, crude, data, truth=None):
    """Cover supplied crude centers and privately select; epsilon-DP in data."""
    if config.d > 3:
        raise UnsupportedDimensionError("fine stage supports d <= 3")
    report = {"config": _config_dict(config)}
    if not crude:
        return _bottom("no crude centers supplied", config)
    pts = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != config.d:
        raise InvalidArgumentError("data dimension does not match config")
    g_req, g_eff, z_req, zeta_w, zeta_cov = _effective_knobs(config)
    g_fine = min(config.G if config.G is not None else g_req, 4.0)
    report.update(
        {
            "G_requested": g_req,
            "G_eff": g_fine,
            "zeta_weights": zeta_w,
            "zeta_cover": zeta_cov,
        }
    )
    covers = []
    for center in crude:
        ball = CrudeBall(center, g_fine)
        covers.append(gaussian_cover(ball, zeta_cov, config.d))
    hclass = mixture_hypotheses(covers, config.k, zeta_w, cap=config.cap, seed=config.seed)
    report["class_size"] = len(hclass)
    report["class_truncated"] = hclass.truncated
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 3))))
    spec = IntegrationSpec(seed=config.seed)
    if config.d == 1 and len(hclass) >= GRID_SCORER_MIN_CLASS:
        lo = float(pts.min()) - 1.0
        hi = float(pts.max()) + 1.0
        edges = np.linspace(lo, hi, 1200)
        scores = mde_scores_grid(hclass, pts, edges)
    elif len(hclass) == 1:
        scores = np.zeros(1)
    else:
        scores = mde_scores(hclass, pts, spec=spec)
    _, sel = private_select_report(hclass, pts, config.epsilon, rng, spec=spec, scores=scores)
    chosen = hclass.mixtures[sel["chosen"]]
    report["chosen_index"] = sel["chosen"]
    report["chosen"] = mixture_to_dict(chosen)
    report["score_summary"] = {
        "chosen": float(scores[sel["chosen"]]),
        "min": float(np.min(scores)),
        "median": float(np.median(scores)),
    }
    report["class_misfit"] = bool(np.min(scores) > config.alpha)
    if truth is not None and config.d == 1:
        report["tv_to_truth"] = tv_univariate(truth, chosen, 1e-4).value
    report["result"] = "ok"
    return chosen, report


# ---------------------------------------------------------------------------
# Sweeps


SWEEP_HEADER = ["d", "k", "n", "eps", "delta", "alpha", "seed", "trial", "tv", "wall_ms", "class_size", "bottom"]


def sweep(base, ns, epss, alphas, trials, seed, out_path, truth=None):
    """Grid of (n, eps, alpha) cells, `trials` runs each, one CSV row per run."""
    if not (ns and epss and alphas) or trials < 1:
        raise InvalidArgumentError("sweep grid must be nonempty")
    if truth is None:
        truth = Mixture.univariate([0.5, 0.5], [0.0, 100.0], [1.0, 25.0])
    rows = []
    cell_idx = 0
    for n, eps, alpha in itertools.product(ns, epss, alphas):
        for trial in range(trials):
            run_seed = int(np.random.SeedSequence((seed, cell_idx, trial)).generate_state(1)[0])
            cfg = replace(base, n=n, n_prime=n, epsilon=eps, alpha=alpha, seed=run_seed)
            t0 = time.perf_counter()
            mix, rep = learn_univariate(cfg, truth=truth)
            wall_ms = (time.perf_counter() - t0) * 1000.0
            bottom = mix is None
            tv = "" if bottom else f"{rep['tv_to_truth']:.6f}"
            rows.append(
                [
                    base.d,
                    base.k,
                    n,
                    eps,
                    base.delta,
                    alpha,
                    run_seed,
                    trial,
                    tv,
                    f"{wall_ms:.1f}",
                    rep.get("class_size", 0),
                    int(bottom),
                ]
            )
        cell_idx += 1
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        writer.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# Lemma check suite (used by the check-lemmas subcommand)


def run_lemma_checks(verbose=True, seed=0):
    """Quick randomized pass over the verification properties; returns failures."""
    from . import geometry as geo
    from . import univariate as uv
    from .mech import tlap_bound

    rng = np.random.default_rng(seed)
    failures = []

    def check(name, ok):
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    ok = True
    for _ in range(200):
        d = int(rng.integers(1, 9))
        m = geo.goe_symmetric(d, rng, float(rng.uniform(0.0, 0.1)))
        nu = float(rng.uniform(1.0, 2.0))
        ratio, lo, hi = geo.det_ratio_bounds(m, nu)
        ok &= lo <= ratio <= hi
    check("determinant ratio enclosure", ok)

    ok = True
    for _ in range(200):
        d = int(rng.integers(1, 7))
        m = geo.goe_symmetric(d, rng, 1.0)
        u, _, vt = np.linalg.svd(rng.normal(size=(d, d)))
        j = u @ np.diag(rng.uniform(0.9, 1.1, size=d)) @ vt
        ok &= geo.jmj_check(m, j)
    check("frobenius growth under near-orthogonal conjugation", ok)

    ok = True
    for _ in range(200):
        n = 50
        x = rng.normal(0.0, float(rng.uniform(0.5, 20.0)), size=n)
        xp = x.copy()
        xp[int(rng.integers(0, n))] = rng.normal(0.0, 30.0)
        dist = uv.multiset_distance(uv.consecutive_pairs(x), uv.consecutive_pairs(xp))
        ok &= dist <= 3
        ok &= uv.count_l1_sensitivity(x, xp) <= 6
    check("adjacent-dataset gap sensitivity", ok)

    ok = True
    for s in range(20):
        x = np.random.default_rng(s).normal(size=200)
        ok &= uv.gap_regularity_holds(x)
    check("sorted-sample regularity", ok)

    ok = True
    for _ in range(50):
        eps = float(rng.uniform(0.01, 1.0))
        delta = float(rng.uniform(1e-9, 1.0))
        ok &= tlap_bound(1.0, eps / 10.0, delta / 10.0) <= (100.0 / eps) * math.log(1.0 / delta)
    check("noise support below candidate threshold", ok)

    region = geo.ParamRegion(
        d=1, lo=np.array([0.0, 1.0]), hi=np.array([1.0, 2.0]), predicate=lambda m, c: True
    )
    est = geo.nvol_mc(region, 50_000, seed=seed + 1)
    target = 2.0 - math.sqrt(2.0)
    check("normalized volume closed form", abs(est.value - target) <= 3.0 * est.stderr)

    return failures


# ---------------------------------------------------------------------------
# Argument parsing and entry point


def _add_common(p):
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=20_000)
    p.add_argument("--n-prime", type=int, default=20_000)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--cap", type=int, default=20_000)
    p.add_argument("--G", type=float, default=None)
    p.add_argument("--K", type=float, default=140.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="in_path", type=str, default=None, help="input dataset CSV")
    p.add_argument("--truth", type=str, default=None, help="ground-truth mixture JSON")
    p.add_argument("--out", type=str, default=None, help="report output path")
    p.add_argument("--max-candidates", type=int, default=None)
    p.add_argument("--amplify", type=int, default=1)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="privgmm", description="Differentially private Gaussian mixture learning"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p1 = sub.add_parser("learn1d", help="univariate two-stage private learner")
    _add_common(p1)
    p2 = sub.add_parser("fine", help="net-and-select stage around crude centers")
    _add_common(p2)
    p2.add_argument("--d", type=int, default=1)
    p2.add_argument("--crude", type=str, default=None, help="crude centers JSON")
    p3 = sub.add_parser("sweep", help="grid experiment emitting CSV")
    _add_common(p3)
    p3.add_argument("--ns", type=str, default="20000", help="comma-separated n grid")
    p3.add_argument("--epss", type=str, default="1.0", help="comma-separated eps grid")
    p3.add_argument("--alphas", type=str, default="0.2", help="comma-separated alpha grid")
    p3.add_argument("--trials", type=int, default=1)
    p4 = sub.add_parser("check-lemmas", help="run the randomized lemma verification suite")
    p4.add_argument("--seed", type=int, default=0)
    return parser


def _config_from_args(args, d=1):
    return RunConfig(
        d=d,
        k=args.k,
        n=args.n,
        n_prime=args.n_prime,
        epsilon=args.eps,
        delta=args.delta,
        alpha=args.alpha,
        zeta=args.zeta,
        G=args.G,
        cap=args.cap,
        K=args.K,
        seed=args.seed,
        out=args.out,
        max_candidates=args.max_candidates,
        amplify=args.amplify,
    )


def _emit(report, out_path):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_inputs(args):
    data = load_dataset(args.in_path) if args.in_path else None
    truth = load_mixture(args.truth) if args.truth else None
    return data, truth


def _load_crude(path):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return [
            GaussianParams(np.array(c["mean"], dtype=float), np.array(c["cov"], dtype=float))
            for c in raw
        ]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed crude centers file {path}: {exc}") from exc


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "check-lemmas":
            failures = run_lemma_checks(seed=args.seed)
            return 0 if not failures else 2
        if args.command == "learn1d":
            config = _config_from_args(args, d=1)
            data, truth = _load_inputs(args)
            if data is None and truth is None:
                raise ConfigError("learn1d needs --in or --truth")
        elif args.command == "fine":
            config = _config_from_args(args, d=args.d)
            data, truth = _load_inputs(args)
            if data is None and truth is None:
                raise ConfigError("fine needs --in or --truth")
            crude = _load_crude(args.crude) if args.crude else None
        elif args.command == "sweep":
            config = _config_from_args(args, d=1)
            if not args.out:
                raise ConfigError("sweep needs --out for the CSV")
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, InvalidArgumentError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    try:
        if args.command == "learn1d":
            if config.amplify > 1:
                if truth is None:
                    raise ConfigError("--amplify needs --truth to draw shard data")
                mix, report = learn_univariate_amplified(config, truth)
            else:
                mix, report = learn_univariate(config, data=data, truth=truth)
            _emit(report, args.out)
            return 0 if mix is not None else 2
        if args.command == "fine":
            if data is None:
                data = sample(truth, config.n, np.random.SeedSequence((config.seed, 0)))
            if crude is None:
                crude = nonprivate_moment_centers(data, config.k, seed=config.seed)
                crude_source = "nonprivate-moments"
            else:
                crude_source = "supplied"
            mix, report = fine_stage(config, crude, data, truth=truth)
            report["crude_source"] = crude_source
            _emit(report, args.out)
            return 0 if mix is not None else 2
        if args.command == "sweep":
            ns = [int(v) for v in args.ns.split(",") if v]
            epss = [float(v) for v in args.epss.split(",") if v]
            alphas = [float(v) for v in args.alphas.split(",") if v]
            truth = load_mixture(args.truth) if args.truth else None
            sweep(config, ns, epss, alphas, args.trials, args.seed, args.out, truth=truth)
            return 0
    except (ConfigError, InvalidArgumentError, UnsupportedDimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - never crash: emit the marker
        _emit({"result": "bottom", "reason": f"unhandled failure: {exc}"}, args.out)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
