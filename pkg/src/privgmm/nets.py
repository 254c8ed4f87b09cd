"""Finite covers of Gaussian parameter balls and gridded mixture classes.

A crude ball fixes a center (mu, Sigma) and a spread factor G; the cover is
built on a grid in the center's whitened frame and pushed forward, so its
quality is affine-invariant.  Mixture hypothesis classes combine cover
points with exact rational weight vectors.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidArgumentError, UnsupportedDimensionError
from .model import GaussianParams, Mixture, mixture_from_dict, mixture_to_dict
from .geometry import sym_inv_sqrt, sym_sqrt

D_MAX = 3
WEIGHT_CAP = 40
ENUM_GUARD = 5_000_000


@dataclass(frozen=True)
class CrudeBall:
    center: GaussianParams
    G: float

    def __post_init__(self):
        if not self.G >= 1.0:
            raise InvalidArgumentError("ball spread G must be at least 1")

    def contains(self, params, slack=1e-9):
        """Spectral and Mahalanobis membership in the ball."""
        if params.d != self.center.d:
            raise InvalidArgumentError("dimension mismatch")
        w = sym_inv_sqrt(self.center.cov)
        eigs = np.linalg.eigvalsh(w @ params.cov @ w)
        lo = 1.0 / self.G * (1.0 - slack)
        hi = self.G * (1.0 + slack)
        if eigs[0] < lo or eigs[-1] > hi:
            return False
        maha = float(np.linalg.norm(w @ (params.mean - self.center.mean)))
        return maha <= self.G * (1.0 + slack)


@dataclass(frozen=True)
class HypothesisClass:
    mixtures: tuple
    zeta: float
    truncated: bool = False

    def __post_init__(self):
        if not self.mixtures:
            raise InvalidArgumentError("hypothesis class must be nonempty")
        d = self.mixtures[0].d
        for mix in self.mixtures:
            if mix.d != d:
                raise InvalidArgumentError("hypotheses must share dimension")
            for w, _ in mix.components:
                mult = round(w / self.zeta)
                if abs(w - mult * self.zeta) > 1e-9:
                    raise InvalidArgumentError(
                        "weights must be integral multiples of zeta"
                    )

    def __len__(self):
        return len(self.mixtures)

    @property
    def d(self):
        return self.mixtures[0].d


def _weight_denominator(zeta):
    if not (0.0 < zeta <= 1.0):
        raise InvalidArgumentError("zeta must lie in (0, 1]")
    inv = 1.0 / zeta
    m = round(inv)
    if m < 1 or abs(inv - m) > 1e-9 * m:
        raise InvalidArgumentError("1/zeta must be a positive integer")
    if m > WEIGHT_CAP:
        raise ConfigError(f"1/zeta = {m} exceeds the enumeration cap {WEIGHT_CAP}")
    return m


def weight_grid(k, zeta):
    """All weight vectors with entries in zeta * Z summing to one, lexicographic."""
    if k < 1:
        raise InvalidArgumentError("need k >= 1")
    m = _weight_denominator(zeta)
    total = math.comb(m + k - 1, k - 1)
    if total > ENUM_GUARD:
        raise ConfigError("weight grid too large to enumerate")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for c in range(remaining + 1):
            rec(prefix + (c,), remaining - c, slots - 1)

    rec((), m, k)
    return [np.array(c, dtype=np.float64) / m for c in out]


def _sigma_sq_grid(g, zeta):
    """Geometric grid over [1/G, G] with ratio 1 + zeta/2."""
    q = 1.0 + 0.5 * zeta
    vals = []
    v = 1.0 / g
    while v < g * (1.0 - 1e-12):
        vals.append(v)
        v *= q
    vals.append(g)
    return vals


def _mean_grid_1d(g, zeta):
    """Arithmetic grid over [-G, G], step tuned to the smallest ball variance."""
    h = 2.0 * zeta / math.sqrt(g)
    steps = int(math.floor(g / h + 1e-12))
    return [i * h for i in range(-steps, steps + 1)]


def _cov_grids_nd(g, zeta, d):
    """Entrywise grid over whitened covariances, filtered to the spectral ball."""
    h = 4.0 * zeta / (g * d)
    lo, hi = 1.0 / g, g
    n_diag = max(1, int(math.floor((hi - lo) / h)) + 1)
    diag_vals = [lo + i * h for i in range(n_diag)]
    spread = 0.5 * (g - lo)
    n_off = int(math.floor(spread / h))
    off_vals = [i * h for i in range(-n_off, n_off + 1)]
    iu = np.triu_indices(d, 1)
    out = []
    for diag in itertools.product(diag_vals, repeat=d):
        for off in itertools.product(off_vals, repeat=len(iu[0])):
            s = np.diag(diag).astype(np.float64)
            s[iu] = off
            s = s + np.triu(s, 1).T
            eigs = np.linalg.eigvalsh(s)
            if eigs[0] >= lo * (1.0 - 1e-9) and eigs[-1] <= hi * (1.0 + 1e-9):
                out.append(s)
    return out


def _mean_grid_nd(g, zeta, d):
    h = 2.0 * zeta / math.sqrt(g * d)
    steps = int(math.floor(g / h + 1e-12))
    axis = [i * h for i in range(-steps, steps + 1)]
    out = []
    for mu in itertools.product(axis, repeat=d):
        v = np.array(mu, dtype=np.float64)
        if np.linalg.norm(v) <= g * (1.0 + 1e-12):
            out.append(v)
    return out


def cover_size_bound(g, zeta, d):
    """Lemma-style cardinality bound (2 G')^(d(d+3)) with G' = G sqrt(d)/zeta."""
    gp = g * math.sqrt(d) / zeta
    return (2.0 * gp) ** (d * (d + 3))


def gaussian_cover(ball, zeta, d, d_max=D_MAX):
    """Finite cover of the ball: any Gaussian inside is within TV zeta of it.

    The grid lives in the whitened frame (unit center), with a geometric
    variance grid and arithmetic mean grid for d = 1 and entrywise grids in
    higher dimension, then is pushed forward by the center parameters.
    """
    if d != ball.center.d:
        raise InvalidArgumentError("dimension mismatch between ball and request")
    if d > d_max:
        raise UnsupportedDimensionError(f"cover construction limited to d <= {d_max}")
    if not (0.0 < zeta < 1.0):
        raise InvalidArgumentError("zeta must lie in (0, 1)")
    g = ball.G
    if d == 1:
        cov0 = [np.array([[v]]) for v in _sigma_sq_grid(g, zeta)]
        mean0 = [np.array([m]) for m in _mean_grid_1d(g, zeta)]
    else:
        cov0 = _cov_grids_nd(g, zeta, d)
        mean0 = _mean_grid_nd(g, zeta, d)
    if len(cov0) * len(mean0) > ENUM_GUARD:
        raise ConfigError("cover enumeration would exceed the size guard")
    root = sym_sqrt(ball.center.cov)
    out = []
    for mu0 in mean0:
        pushed_mean = root @ mu0 + ball.center.mean
        for s0 in cov0:
            pushed_cov = root @ s0 @ root
            pushed_cov = 0.5 * (pushed_cov + pushed_cov.T)
            out.append(GaussianParams(pushed_mean, pushed_cov))
    return out


def _component_key(params):
    return (
        tuple(np.round(params.mean, 12).tolist()),
        tuple(np.round(params.cov, 12).reshape(-1).tolist()),
    )


def mixture_hypotheses(covers, k, zeta, cap, seed=0):
    """Mixtures of up to k cover points with gridded weights.

    Full enumeration when the raw product (weight vectors times component
    tuples) fits under cap; otherwise a seeded uniform subsample of exactly
    cap distinct hypotheses, flagged as truncated.
    """
    pool = []
    seen = set()
    for cover in covers:
        for params in cover:
            key = _component_key(params)
            if key not in seen:
                seen.add(key)
                pool.append(params)
    if not pool:
        raise InvalidArgumentError("union of covers is empty")
    pool.sort(key=lambda p: _component_key(p))
    if cap < 1:
        raise InvalidArgumentError("cap must be positive")
    wgrid = weight_grid(k, zeta)
    raw_total = len(wgrid) * len(pool) ** k
    found = {}
    if raw_total <= cap:
        for weights in wgrid:
            for combo in itertools.product(range(len(pool)), repeat=k):
                key, mix = _build_mixture(weights, [pool[i] for i in combo])
                found.setdefault(key, mix)
        truncated = False
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        attempts = 0
        max_attempts = 60 * cap + 1000
        while len(found) < cap and attempts < max_attempts:
            batch = min(cap, max_attempts - attempts)
            widx = rng.integers(0, len(wgrid), size=batch)
            cidx = rng.integers(0, len(pool), size=(batch, k))
            for row in range(batch):
                key, mix = _build_mixture(
                    wgrid[widx[row]], [pool[i] for i in cidx[row]]
                )
                if key not in found:
                    found[key] = mix
                    if len(found) >= cap:
                        break
            attempts += batch
        truncated = True
    mixtures = [found[key] for key in sorted(found)]
    return HypothesisClass(tuple(mixtures), zeta=zeta, truncated=truncated)


def _build_mixture(weights, comps):
    """Canonical (key, Mixture): zero weights dropped, duplicate components
    merged, components sorted so permutations collapse to one key."""
    merged = {}
    for w, c in zip(weights, comps):
        if w <= 0.0:
            continue
        ck = _component_key(c)
        if ck in merged:
            merged[ck] = (merged[ck][0] + w, merged[ck][1])
        else:
            merged[ck] = (float(w), c)
    items = sorted(merged.items(), key=lambda kv: kv[0])
    key = tuple((round(kv[1][0], 15),) + kv[0] for kv in items)
    mix = Mixture(tuple((kv[1][0], kv[1][1]) for kv in items))
    return key, mix


def hypothesis_class_to_dict(hclass):
    return {
        "zeta": hclass.zeta,
        "truncated": hclass.truncated,
        "hypotheses": [mixture_to_dict(m) for m in hclass.mixtures],
    }


def hypothesis_class_from_dict(obj):
    mixtures = tuple(mixture_from_dict(m) for m in obj["hypotheses"])
    return HypothesisClass(mixtures, zeta=float(obj["zeta"]), truncated=bool(obj["truncated"]))


def save_hypothesis_class(hclass, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hypothesis_class_to_dict(hclass), fh, indent=2, sort_keys=True)


def load_hypothesis_class(path):
    with open(path, "r", encoding="utf-8") as fh:
        return hypothesis_class_from_dict(json.load(fh))
