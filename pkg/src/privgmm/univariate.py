"""Crude candidate recovery for univariate mixtures.

Sorted consecutive gaps are bucketed on a dyadic grid keyed by gap scale and
location cell.  Bucket counts get truncated-Laplace noise and every bucket
whose noisy count clears the threshold contributes one (mean, variance)
candidate.  The module also exposes the sensitivity and regularity helpers
that the verification suite exercises.
"""

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgumentError
from .mech import TruncLapSpec, tlap_sample
from .model import Dataset

MAX_N = 10**6


@dataclass(frozen=True)
class GapPair:
    r: float
    s: float

    def __post_init__(self):
        if not (self.s >= 0.0):
            raise InvalidArgumentError("gap must be nonnegative")


@dataclass(frozen=True)
class BucketKey:
    a: int
    b: int


@dataclass(frozen=True)
class Candidate:
    mu: float
    var: float
    a: int
    b: int


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple

    def __len__(self):
        return len(self.candidates)

    def pairs(self):
        return [(c.mu, c.var) for c in self.candidates]

    def to_dicts(self):
        return [{"mu": c.mu, "var": c.var, "a": c.a, "b": c.b} for c in self.candidates]

    @classmethod
    def from_dicts(cls, items):
        return cls(tuple(Candidate(d["mu"], d["var"], d["a"], d["b"]) for d in items))


def _column(data):
    if isinstance(data, Dataset):
        if data.d != 1:
            raise InvalidArgumentError("univariate stage requires d = 1")
        return data.column()
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidArgumentError("univariate stage requires d = 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("data must be finite")
    return arr


def consecutive_pairs(data):
    """Sorted-order gap pairs (Y_j, Y_{j+1} - Y_j) of a univariate sample."""
    x = _column(data)
    if x.size < 2:
        raise InvalidArgumentError("need at least two points")
    y = np.sort(x, kind="stable")
    return tuple(GapPair(float(y[j]), float(y[j + 1] - y[j])) for j in range(y.size - 1))


def multiset_distance(z, zp):
    """Multiset symmetric-difference distance between two gap-pair collections."""
    if len(z) != len(zp):
        raise InvalidArgumentError("gap collections must have equal size")
    c1 = Counter((g.r, g.s) for g in z)
    c2 = Counter((g.r, g.s) for g in zp)
    d1 = sum((c1 - c2).values())
    d2 = sum((c2 - c1).values())
    return max(d1, d2)


def _check_n(n):
    if n < 2:
        raise InvalidArgumentError("need n >= 2")
    if n > MAX_N:
        raise InvalidArgumentError(
            "n > 10^6 not supported: location cells use n^5, which would "
            "overflow the exact integer arithmetic budget"
        )


def bucket_key(r, s, n):
    """Dyadic bucket of a gap pair: a = floor(log2 s), b = floor(r / (n^5 2^a)).

    The exponent a comes straight from the binary representation of s so
    exact powers of two land in their own bucket; b is computed with exact
    integer arithmetic (floor division rounds toward minus infinity).
    """
    _check_n(n)
    r = float(r)
    s = float(s)
    if not math.isfinite(r) or not math.isfinite(s):
        raise InvalidArgumentError("gap pair must be finite")
    if s <= 0.0:
        raise InvalidArgumentError("zero gaps are skipped upstream; need s > 0")
    a = math.frexp(s)[1] - 1
    n5 = n**5
    num, den = r.as_integer_ratio()
    if a >= 0:
        b = num // ((den * n5) << a)
    else:
        b = (num << (-a)) // (den * n5)
    return BucketKey(a, int(b))


def bucket_counts(data, n=None):
    """Counts of nonzero-gap pairs per dyadic bucket."""
    pairs = consecutive_pairs(data)
    if n is None:
        n = len(pairs) + 1
    counts = Counter()
    for g in pairs:
        if g.s > 0.0:
            counts[bucket_key(g.r, g.s, n)] += 1
    return dict(counts)


def candidate_threshold(budget):
    """Noisy-count threshold (100 / epsilon) * ln(1 / delta)."""
    return (100.0 / budget.epsilon) * math.log(1.0 / budget.delta)


def _bucket_value(key, n):
    """Exact float value of b * n^5 * 2^a, rounding once at the end."""
    n5 = n**5
    try:
        if key.a >= 0:
            return float((key.b * n5) << key.a)
        return float(Fraction(key.b * n5, 1 << (-key.a)))
    except OverflowError:
        raise InvalidArgumentError("candidate location exceeds float range")


def noisy_candidates(data, budget, rng):
    """Threshold the noisy bucket histogram into (mean, variance) candidates.

    Each nonempty bucket count gets TLap(1, eps/10, delta/10) noise; buckets
    clearing (100/eps) ln(1/delta) emit the candidate (b n^5 2^a, 2^(2a)).
    Empty buckets never need noise: the truncated support bound keeps any
    noised zero strictly below the threshold, so skipping them leaves the
    output distribution unchanged.  Noise is drawn in sorted bucket order so
    a seeded generator gives reproducible output.
    """
    if not (0.0 < budget.epsilon <= 1.0):
        raise InvalidArgumentError("epsilon must be in (0, 1]")
    if not (0.0 < budget.delta < 1.0):
        raise InvalidArgumentError("delta must be in (0, 1)")
    x = _column(data)
    n = x.size
    _check_n(n)
    counts = bucket_counts(x, n)
    spec = TruncLapSpec(sensitivity=1.0, epsilon=budget.epsilon / 10.0, delta=budget.delta / 10.0)
    thresh = candidate_threshold(budget)
    out = []
    for key in sorted(counts, key=lambda k: (k.a, k.b)):
        noisy = counts[key] + tlap_sample(spec, rng)
        if noisy > thresh:
            var = math.ldexp(1.0, 2 * key.a)
            if var == 0.0 or math.isinf(var):
                # gap scale outside the representable variance range
                continue
            out.append(Candidate(mu=_bucket_value(key, n), var=var, a=key.a, b=key.b))
    cset = CandidateSet(tuple(out))
    if len(cset) > n - 1:
        raise AssertionError("candidate count exceeded n - 1")
    return cset


def _adjacency_gap(x, xp):
    cx = Counter(x.tolist())
    cxp = Counter(xp.tolist())
    return sum((cx - cxp).values()), sum((cxp - cx).values())


def count_l1_sensitivity(x_data, xp_data):
    """L1 distance between the bucket count histograms of adjacent datasets."""
    x = _column(x_data)
    xp = _column(xp_data)
    if x.size != xp.size:
        raise InvalidArgumentError("datasets must have equal size")
    d1, d2 = _adjacency_gap(x, xp)
    if max(d1, d2) > 1:
        raise InvalidArgumentError("datasets are not adjacent")
    n = x.size
    c1 = bucket_counts(x, n)
    c2 = bucket_counts(xp, n)
    keys = set(c1) | set(c2)
    return sum(abs(c1.get(k, 0) - c2.get(k, 0)) for k in keys)


def recovery_index_count(data, mu, sigma, n=None):
    """Sorted-gap indices j with Y_j within one sigma of mu and a usable gap.

    Usable means sigma / (10^4 n^4) <= gap <= 2 sigma.  The crude-recovery
    property asserts each sufficiently heavy, well-separated component keeps
    at least (alpha / 8k) n such indices.
    """
    pairs = consecutive_pairs(data)
    if n is None:
        n = len(pairs) + 1
    lo_gap = sigma / (1e4 * float(n) ** 4)
    count = 0
    for g in pairs:
        if mu - sigma <= g.r <= mu + sigma and lo_gap <= g.s <= 2.0 * sigma:
            count += 1
    return count


def candidate_quality_holds(cset, mu, sigma, n):
    """Whether some candidate brackets the component at the documented scale.

    Requires 2^a in [sigma / (10^5 n^4), 2 sigma] and the candidate mean in
    [mu - sigma - n^5 2^a, mu + sigma].
    """
    n5 = float(n) ** 5
    lo_scale = sigma / (1e5 * float(n) ** 4)
    for c in cset.candidates:
        scale = math.ldexp(1.0, c.a)
        if lo_scale <= scale <= 2.0 * sigma and mu - sigma - n5 * scale <= c.mu <= mu + sigma:
            return True
    return False


def gap_regularity_holds(data, c1=100.0, window=20):
    """Regularity of an i.i.d. standard normal sample at scale L = c1 n^2.

    Returns True when max |x_i| <= L and no run of `window` consecutive
    sorted points fits inside an interval of width 2 / L.
    """
    x = _column(data)
    n = x.size
    big_l = c1 * float(n) ** 2
    if float(np.max(np.abs(x))) > big_l:
        return False
    y = np.sort(x)
    if n >= window:
        widths = y[window - 1 :] - y[: n - window + 1]
        if float(np.min(widths)) <= 2.0 / big_l:
            return False
    return True
