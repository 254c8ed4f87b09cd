"""Core probabilistic types: Gaussians, mixtures, datasets, sampling, densities.

Everything downstream (noise mechanisms, nets, selection) is built on the four
types here. All types are immutable after construction and all randomness is
routed through explicit seeds, so every operation in the package is a pure
function of its inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

SYM_TOL = 1e-9
WEIGHT_TOL = 1e-9
K_MAX = 64


def _as_matrix(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = cov.reshape(1, 1)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidArgumentError(f"covariance must be square, got shape {cov.shape}")
    return cov


@dataclass(frozen=True)
class GaussianParams:
    """Parameters (mean, covariance) of one non-degenerate Gaussian.

    Parameters
    ----------
    mean : array-like, shape (d,)
    cov : array-like, shape (d, d)
        Must be symmetric within absolute tolerance 1e-9 and positive
        definite. Positive definiteness is certified by a Cholesky
        factorization, whose lower factor is cached for sampling and
        whitening.
    """

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = _as_matrix(self.cov)
        if mean.ndim != 1 or mean.shape[0] != cov.shape[0]:
            raise InvalidArgumentError(
                f"mean length {mean.shape} does not match cov shape {cov.shape}"
            )
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise InvalidArgumentError("non-finite entries in Gaussian parameters")
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYM_TOL:
            raise InvalidArgumentError("covariance is not symmetric within 1e-9")
        cov = (cov + cov.T) / 2.0
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise InvalidArgumentError("covariance is not positive definite") from None
        mean.flags.writeable = False
        cov.flags.writeable = False
        chol.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def univariate(cls, mu: float, var: float) -> "GaussianParams":
        return cls(np.array([float(mu)]), np.array([[float(var)]]))

    @property
    def mu1(self) -> float:
        """Scalar mean (d=1 only)."""
        if self.d != 1:
            raise InvalidArgumentError("mu1 is defined only for d=1")
        return float(self.mean[0])

    @property
    def var1(self) -> float:
        """Scalar variance (d=1 only)."""
        if self.d != 1:
            raise InvalidArgumentError("var1 is defined only for d=1")
        return float(self.cov[0, 0])


@dataclass(frozen=True)
class Mixture:
    """A Gaussian mixture: an ordered list of (weight, GaussianParams).

    Weights are nonnegative and sum to 1 within 1e-9; all components share
    one dimension d.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), g) for (w, g) in self.components)
        if not 1 <= len(comps) <= K_MAX:
            raise InvalidArgumentError(f"component count must be in [1, {K_MAX}]")
        d = comps[0][1].d
        total = 0.0
        for w, g in comps:
            if not isinstance(g, GaussianParams):
                raise InvalidArgumentError("components must hold GaussianParams")
            if g.d != d:
                raise InvalidArgumentError("components have mismatched dimensions")
            if not math.isfinite(w) or w < 0:
                raise InvalidArgumentError(f"weight {w} is not a finite nonnegative real")
            total += w
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidArgumentError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def d(self) -> int:
        return self.components[0][1].d

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @classmethod
    def single(cls, g: GaussianParams) -> "Mixture":
        return cls(((1.0, g),))

    @classmethod
    def univariate(cls, weights: Sequence[float], mus: Sequence[float],
                   variances: Sequence[float]) -> "Mixture":
        if not (len(weights) == len(mus) == len(variances)):
            raise InvalidArgumentError("weights/means/variances length mismatch")
        return cls(tuple(
            (w, GaussianParams.univariate(m, v))
            for w, m, v in zip(weights, mus, variances)
        ))

    def flat_univariate(self):
        """(weights, means, variances) arrays for d=1 kernels."""
        if self.d != 1:
            raise InvalidArgumentError("flat_univariate requires d=1")
        w = np.array([c[0] for c in self.components])
        mu = np.array([c[1].mean[0] for c in self.components])
        var = np.array([c[1].cov[0, 0] for c in self.components])
        return w, mu, var


@dataclass(frozen=True)
class Dataset:
    """An n-by-d sample matrix with finite entries."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidArgumentError("dataset must be a nonempty n-by-d matrix")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("dataset entries must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def column(self) -> np.ndarray:
        """The single column as a flat vector (d=1 only)."""
        if self.d != 1:
            raise InvalidArgumentError("column() requires d=1")
        return self.points[:, 0]


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) differential-privacy budget."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgumentError("epsilon must be a positive real")
        if not (0 <= self.delta < 1):
            raise InvalidArgumentError("delta must lie in [0, 1)")


# ---------------------------------------------------------------------------
# densities and sampling
# ---------------------------------------------------------------------------

_LOG_2PI = math.log(2.0 * math.pi)


def log_density_batch(mix: Mixture, X: np.ndarray) -> np.ndarray:
    """Log mixture density at each row of X (shape (n, d) -> (n,))."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if mix.d == 1 else X.reshape(1, -1)
    if X.shape[1] != mix.d:
        raise InvalidArgumentError(
            f"points have dimension {X.shape[1]}, mixture has d={mix.d}"
        )
    n = X.shape[0]
    parts = np.empty((mix.k, n))
    for idx, (w, g) in enumerate(mix.components):
        if w == 0.0:
            parts[idx] = -np.inf
            continue
        # whiten via the cached Cholesky factor: cov = L L^T
        diff = X - g.mean
        y = np.linalg.solve(g.chol, diff.T)
        maha = np.sum(y * y, axis=0)
        logdet = 2.0 * np.sum(np.log(np.diag(g.chol)))
        parts[idx] = math.log(w) - 0.5 * (maha + logdet + g.d * _LOG_2PI)
    mx = np.max(parts, axis=0)
    out = mx + np.log(np.sum(np.exp(parts - mx), axis=0))
    return np.where(np.isfinite(mx), out, -np.inf)


def density_batch(mix: Mixture, X: np.ndarray) -> np.ndarray:
    """Mixture density at each row of X."""
    return np.exp(log_density_batch(mix, X))


def density(mix: Mixture, x) -> float:
    """Mixture pdf at a single point x (scalar for d=1, length-d vector else)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (mix.d,):
        raise InvalidArgumentError(f"point has shape {x.shape}, expected ({mix.d},)")
    return float(density_batch(mix, x.reshape(1, -1))[0])


def sample(mix: Mixture, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. points from the mixture, deterministically in the seed.

    Component indices come first (one multinomial pass over the weights),
    then each point is mean + L z with L the component's Cholesky factor.
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = mix.weights
    weights = weights / weights.sum()
    idx = rng.choice(mix.k, size=n, p=weights)
    Z = rng.standard_normal((n, mix.d))
    out = np.empty((n, mix.d))
    for c, (_, g) in enumerate(mix.components):
        mask = idx == c
        if not np.any(mask):
            continue
        out[mask] = Z[mask] @ g.chol.T + g.mean
    return Dataset(out)


def tv_upper_bound(g1: GaussianParams, g2: GaussianParams) -> float:
    """Closed-form bound on TV(N(g1), N(g2)).

    Returns (1/sqrt 2) * max(||S^-1/2 Sigma2 S^-1/2 - I||_F,
    ||S^-1/2 (mu1 - mu2)||_2) with S = Sigma1. Whitening is done with the
    Cholesky factor of Sigma1, which agrees with the symmetric-root form up
    to an orthogonal similarity and so leaves both norms unchanged.
    """
    if g1.d != g2.d:
        raise InvalidArgumentError("dimension mismatch")
    L = g1.chol
    B = np.linalg.solve(L, g2.cov)
    M = np.linalg.solve(L, B.T)
    fro = np.linalg.norm(M - np.eye(g1.d))
    maha = float(np.linalg.norm(np.linalg.solve(L, g1.mean - g2.mean)))
    return max(fro, maha) / math.sqrt(2.0)


def tv_upper_bound_batch(mu1, var1, mu2, var2) -> np.ndarray:
    """Vectorized d=1 form of tv_upper_bound for candidate prefiltering."""
    mu1, var1 = np.asarray(mu1, float), np.asarray(var1, float)
    mu2, var2 = np.asarray(mu2, float), np.asarray(var2, float)
    fro = np.abs(var2 / var1 - 1.0)
    maha = np.abs(mu1 - mu2) / np.sqrt(var1)
    return np.maximum(fro, maha) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def mixture_to_dict(mix: Mixture) -> dict:
    return {
        "d": mix.d,
        "components": [
            {"weight": w, "mean": g.mean.tolist(), "cov": g.cov.tolist()}
            for w, g in mix.components
        ],
    }


def mixture_from_dict(obj: dict) -> Mixture:
    try:
        comps = tuple(
            (float(c["weight"]), GaussianParams(np.array(c["mean"], dtype=float),
                                                np.array(c["cov"], dtype=float)))
            for c in obj["components"]
        )
    except (KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed mixture object: {exc}") from None
    mix = Mixture(comps)
    if "d" in obj and int(obj["d"]) != mix.d:
        raise InvalidArgumentError("declared d does not match component dimension")
    return mix


def save_mixture(mix: Mixture, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(mixture_to_dict(mix), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_mixture(path: str) -> Mixture:
    with open(path) as fh:
        return mixture_from_dict(json.load(fh))


def save_dataset(data: Dataset, path: str) -> None:
    """CSV, one sample per row, no header, round-trip float formatting."""
    np.savetxt(path, data.points, delimiter=",", fmt="%.17g")


def load_dataset(path: str) -> Dataset:
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    return Dataset(pts)
