"""Private hypothesis selection.

Hypotheses are compared on their pairwise test regions: the set where one
density strictly exceeds the other.  Each hypothesis is scored by the worst
gap between its own mass on such a region and the empirical fraction of the
data there, and the exponential mechanism picks a winner.  A data point can
shift any empirical fraction by at most 1/n, so n times the score has
sensitivity one.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .errors import InvalidArgumentError
from .mech import exp_mech
from .model import Dataset, Mixture, log_density_batch, sample
from .tvdist import MONTE_CARLO, QUADRATURE, quadrature_breaks


@dataclass(frozen=True)
class IntegrationSpec:
    """How pairwise region masses are computed.

    tol is the absolute quadrature tolerance used at d = 1; n_mc and seed
    drive the Monte Carlo path used in higher dimension, with one derived
    stream per (i, j) pair.
    """

    tol: float = 1e-4
    n_mc: int = 50_000
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0.0:
            raise InvalidArgumentError("tol must be positive")
        if self.n_mc < 1000:
            raise InvalidArgumentError("need at least 1000 Monte Carlo samples")


@dataclass(frozen=True)
class ScheffeEstimate:
    mass_i: float
    empirical: float
    method: str
    mc_stderr: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.mass_i <= 1.0 and 0.0 <= self.empirical <= 1.0):
            raise InvalidArgumentError("masses must lie in [0, 1]")


def _points(data):
    if isinstance(data, Dataset):
        return data.points
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _hyp_list(hypotheses):
    mixtures = getattr(hypotheses, "mixtures", hypotheses)
    return list(mixtures)


def scheffe_membership(h_i, h_j, x):
    """Whether x lies where h_i's density strictly exceeds h_j's (ties: no)."""
    if h_i.d != h_j.d:
        raise InvalidArgumentError("hypotheses must share dimension")
    pt = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if pt.shape[1] != h_i.d:
        raise InvalidArgumentError("point dimension mismatch")
    li = log_density_batch(h_i, pt)[0]
    lj = log_density_batch(h_j, pt)[0]
    return bool(li > lj)


def _pair_seed(master, i, j):
    # one deterministic stream per ordered pair
    return np.random.SeedSequence(entropy=(int(master), int(i), int(j)))


def scheffe_mass(h_i, h_j, target, spec=IntegrationSpec(), pair=(0, 1)):
    """P_target of the region where h_i beats h_j.

    d = 1 integrates the target density over the region by adaptive
    quadrature; d >= 2 estimates it from seeded target samples.
    """
    est = scheffe_estimate(h_i, h_j, target, spec=spec, pair=pair)
    return est.mass_i


def scheffe_estimate(h_i, h_j, target, data=None, spec=IntegrationSpec(), pair=(0, 1)):
    """Region mass plus (optionally) the empirical fraction of data there."""
    if not (h_i.d == h_j.d == target.d):
        raise InvalidArgumentError("mixtures must share dimension")
    emp = 0.0
    if data is not None:
        pts = _points(data)
        li = log_density_batch(h_i, pts)
        lj = log_density_batch(h_j, pts)
        emp = float(np.mean(li > lj))
    if target.d == 1:
        fi = h_i.flat_univariate()
        fj = h_j.flat_univariate()
        ft = target.flat_univariate()
        breaks = quadrature_breaks([fi, fj, ft])
        val, _ = _kernels.adaptive_scheffe(*ft, *fi, *fj, breaks, spec.tol)
        return ScheffeEstimate(
            mass_i=min(1.0, max(0.0, float(val))),
            empirical=emp,
            method=QUADRATURE,
        )
    xs = sample(target, spec.n_mc, _pair_seed(spec.seed, *pair)).points
    li = log_density_batch(h_i, xs)
    lj = log_density_batch(h_j, xs)
    hits = (li > lj).astype(np.float64)
    mass = float(np.mean(hits))
    stderr = float(np.std(hits, ddof=1) / math.sqrt(spec.n_mc))
    return ScheffeEstimate(mass_i=mass, empirical=emp, method=MONTE_CARLO, mc_stderr=stderr)


def mde_scores(hypotheses, data, spec=IntegrationSpec()):
    """Worst pairwise discrepancy score for every hypothesis.

    score_i = max over j != i of |P_{H_i}(A_ij) - empirical(A_ij)| where
    A_ij is the region where H_i beats H_j.
    """
    hyps = _hyp_list(hypotheses)
    m = len(hyps)
    if m < 2:
        raise InvalidArgumentError("need at least two hypotheses")
    pts = _points(data)
    n = pts.shape[0]
    if n < 1:
        raise InvalidArgumentError("need data")
    logs = np.stack([log_density_batch(h, pts) for h in hyps])
    scores = np.zeros(m)
    for i in range(m):
        for j in range(m):
            if j == i:
                continue
            emp = float(np.mean(logs[i] > logs[j]))
            est = scheffe_estimate(hyps[i], hyps[j], hyps[i], spec=spec, pair=(i, j))
            gap = abs(est.mass_i - emp)
            if gap > scores[i]:
                scores[i] = gap
    return scores


def private_select(hypotheses, data, epsilon, rng, spec=IntegrationSpec()):
    """Exponential-mechanism choice among hypotheses; pure epsilon-DP."""
    mix, _ = private_select_report(hypotheses, data, epsilon, rng, spec=spec)
    return mix


def private_select_report(hypotheses, data, epsilon, rng, spec=IntegrationSpec(), scores=None):
    """Selection plus the JSON-ready report {chosen, scores, epsilon, n}."""
    hyps = _hyp_list(hypotheses)
    if not hyps:
        raise InvalidArgumentError("hypothesis class is empty")
    pts = _points(data)
    n = pts.shape[0]
    if len(hyps) == 1:
        report = {"chosen": 0, "scores": [0.0], "epsilon": float(epsilon), "n": int(n)}
        return hyps[0], report
    if scores is None:
        scores = mde_scores(hyps, pts, spec=spec)
    utilities = -float(n) * np.asarray(scores, dtype=np.float64)
    idx = exp_mech(utilities, 1.0, epsilon, rng)
    report = {
        "chosen": int(idx),
        "scores": [float(s) for s in scores],
        "epsilon": float(epsilon),
        "n": int(n),
    }
    return hyps[idx], report


# ---------------------------------------------------------------------------
# Shared-grid scorer: the same max-discrepancy scores, but with all pairwise
# regions resolved at the granularity of one fixed cell partition.  Exact per
# -cell masses come from the Gaussian CDF; the empirical distribution is
# binned once.  A point still moves at most 1/n of empirical mass between two
# cells, so the sensitivity-one property of n * score is unchanged.  The cell
# partition must be chosen independently of the scored data.


def grid_cells(edges):
    """Representative points of the partition cells induced by sorted edges.

    Cells are (-inf, e_0), [e_0, e_1), ..., [e_last, inf); outer cells use a
    representative one median cell width beyond the boundary.
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise InvalidArgumentError("need at least two edges")
    if np.any(np.diff(edges) <= 0.0):
        raise InvalidArgumentError("edges must be strictly increasing")
    w = float(np.median(np.diff(edges)))
    inner = 0.5 * (edges[:-1] + edges[1:])
    return np.concatenate([[edges[0] - 0.5 * w], inner, [edges[-1] + 0.5 * w]])


def grid_cell_masses(flat, edges):
    """Exact cell probabilities of a univariate mixture on the partition."""
    w, mu, var = flat
    sd = np.sqrt(var)
    z = (edges[None, :] - mu[:, None]) / sd[:, None]
    cdf = ndtr(z)
    cdf = np.concatenate(
        [np.zeros((len(w), 1)), cdf, np.ones((len(w), 1))], axis=1
    )
    return np.asarray(w) @ np.diff(cdf, axis=1)


def mde_scores_grid(hypotheses, data, edges):
    """Grid-resolved max-discrepancy scores for univariate hypotheses."""
    hyps = _hyp_list(hypotheses)
    m = len(hyps)
    if m < 2:
        raise InvalidArgumentError("need at least two hypotheses")
    x = _points(data)[:, 0]
    edges = np.asarray(edges, dtype=np.float64)
    reps = grid_cells(edges)
    p = reps.size
    dens = np.empty((m, p))
    cm = np.empty((m, p))
    for i, h in enumerate(hyps):
        flat = h.flat_univariate()
        dens[i] = _kernels.mixture_pdf_batch(*flat, reps)
        cm[i] = grid_cell_masses(flat, edges)
    emp = np.bincount(np.searchsorted(edges, x, side="right"), minlength=p).astype(np.float64)
    emp /= x.size
    return _kernels.mde_max_scores(dens, cm, emp)
