"""Matrix approximation relation, affine push-forwards, normalized volume.

The approximation relation compares a candidate Gaussian to a base Gaussian
through spectral, Frobenius and Mahalanobis conditions in the base's
whitened frame.  Normalized volume integrates det(Sigma)^(-(d+2)/2) over
regions of (mean, covariance) space, which is the measure preserved by
affine push-forwards.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .model import GaussianParams

EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class ApproxParams:
    gamma: float
    rho: float
    tau: float

    def __post_init__(self):
        if not (self.gamma > 0.0 and self.rho > 0.0 and self.tau > 0.0):
            raise InvalidArgumentError("approximation parameters must be positive")

    @classmethod
    def shorthand(cls, gamma, tau, d):
        """Two-parameter form: the Frobenius radius defaults to sqrt(d)*gamma."""
        return cls(gamma=gamma, rho=math.sqrt(d) * gamma, tau=tau)


def proj_dim(d):
    """Dimension of the (mean, upper-triangular covariance) coordinates."""
    return d * (d + 3) // 2


def pack_params(mean, cov):
    """Flatten (mu, Sigma) into mean entries then row-major upper triangle."""
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    cov = np.asarray(cov, dtype=np.float64)
    d = mean.size
    iu = np.triu_indices(d)
    return np.concatenate([mean, cov[iu]])


def unpack_params(v, d):
    """Inverse of pack_params; mirrors the upper triangle into a full matrix."""
    v = np.asarray(v, dtype=np.float64)
    mean = v[:d]
    cov = np.zeros((d, d))
    iu = np.triu_indices(d)
    cov[iu] = v[d:]
    cov = cov + np.triu(cov, 1).T
    return mean, cov


@dataclass(frozen=True)
class ParamRegion:
    """Membership predicate over (mu, Sigma) with a bounding box in Proj coordinates."""

    d: int
    lo: np.ndarray
    hi: np.ndarray
    predicate: object  # callable (mean, cov) -> bool

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        m = proj_dim(self.d)
        if lo.shape != (m,) or hi.shape != (m,):
            raise InvalidArgumentError("box must live in d(d+3)/2 coordinates")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidArgumentError("box must be finite")
        if not np.all(hi > lo):
            raise InvalidArgumentError("box must have positive volume")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def box_volume(self):
        return float(np.prod(self.hi - self.lo))


@dataclass(frozen=True)
class NVolEstimate:
    value: float
    stderr: float
    n_samples: int


def _checked_eigh(s):
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if not np.allclose(s, s.T, rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(s))))):
        raise InvalidArgumentError("matrix must be symmetric")
    vals, vecs = np.linalg.eigh(s)
    if vals[0] <= EIG_FLOOR * max(vals[-1], 0.0):
        raise InvalidArgumentError("matrix is not positive definite")
    return vals, vecs


def sym_sqrt(s):
    """Symmetric positive-definite square root."""
    vals, vecs = _checked_eigh(s)
    return (vecs * np.sqrt(vals)) @ vecs.T


def sym_inv_sqrt(s):
    """Symmetric inverse square root."""
    vals, vecs = _checked_eigh(s)
    return (vecs / np.sqrt(vals)) @ vecs.T


def approx_check(hat, base, p):
    """Whether hat approximates base within (gamma, rho, tau).

    In the base's whitened frame, with M the whitened hat covariance, the
    conditions are ||M - I||_op <= gamma, ||M - I||_F <= rho and the whitened
    mean displacement at most tau.
    """
    if hat.d != base.d:
        raise InvalidArgumentError("dimension mismatch")
    w = sym_inv_sqrt(base.cov)
    m = w @ hat.cov @ w
    e = m - np.eye(base.d)
    e = 0.5 * (e + e.T)
    op = float(np.max(np.abs(np.linalg.eigvalsh(e))))
    fro = float(np.linalg.norm(e, "fro"))
    maha = float(np.linalg.norm(w @ (hat.mean - base.mean)))
    # boundary cases like var 1.05 against gamma 0.05 must not fail on the
    # last bit of the whitening arithmetic
    slack = 1.0 + 1e-9
    return op <= p.gamma * slack and fro <= p.rho * slack and maha <= p.tau * slack


def affine_push(p, mu, sigma):
    """Push (mean, cov) through x -> Sigma^(1/2) x + mu."""
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    r = sym_sqrt(sigma)
    if mu.size != p.d or r.shape[0] != p.d:
        raise InvalidArgumentError("dimension mismatch")
    new_mean = r @ p.mean + mu
    new_cov = r @ p.cov @ r
    new_cov = 0.5 * (new_cov + new_cov.T)
    return GaussianParams(new_mean, new_cov)


def approx_ball_region(base, p):
    """The approximation ball around base as an explicit bounded region.

    The bounding box follows from the conditions: whitened covariance within
    gamma of the identity bounds each entry by gamma * sqrt(S_ii S_jj) around
    S_ij, and Mahalanobis radius tau bounds coordinate i by tau * sqrt(S_ii).
    """
    d = base.d
    s = base.cov
    diag = np.sqrt(np.diag(s))
    mean_lo = base.mean - p.tau * diag
    mean_hi = base.mean + p.tau * diag
    iu = np.triu_indices(d)
    spread = p.gamma * np.outer(diag, diag)
    cov_lo = (s - spread)[iu]
    cov_hi = (s + spread)[iu]

    def member(mean, cov, _base=base, _p=p):
        try:
            return approx_check(GaussianParams(mean, cov), _base, _p)
        except InvalidArgumentError:
            return False

    return ParamRegion(
        d=d,
        lo=np.concatenate([mean_lo, cov_lo]),
        hi=np.concatenate([mean_hi, cov_hi]),
        predicate=member,
    )


def nvol_mc(region, n_samples=100_000, seed=0):
    """Monte Carlo normalized volume of a region.

    Samples uniformly in the bounding box, scores each point inside the
    region by det(Sigma)^(-(d+2)/2) (zero outside or when Sigma is not
    positive definite) and multiplies the average by the box volume.
    """
    if n_samples < 10_000:
        raise InvalidArgumentError("need at least 10^4 samples")
    d = region.d
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.uniform(region.lo, region.hi, size=(n_samples, proj_dim(d)))
    covs = np.zeros((n_samples, d, d))
    iu = np.triu_indices(d)
    covs[:, iu[0], iu[1]] = v[:, d:]
    il = np.tril_indices(d, -1)
    covs[:, il[0], il[1]] = covs[:, il[1], il[0]]
    eigs = np.linalg.eigvalsh(covs)
    spd = eigs[:, 0] > 0.0
    vals = np.zeros(n_samples)
    exponent = -(d + 2) / 2.0
    idx = np.flatnonzero(spd)
    dets = np.prod(eigs[idx], axis=1)
    weights = dets**exponent
    for pos, i in enumerate(idx):
        if region.predicate(v[i, :d], covs[i]):
            vals[i] = weights[pos]
    box = region.box_volume()
    est = box * float(np.mean(vals))
    stderr = box * float(np.std(vals, ddof=1) / math.sqrt(n_samples))
    return NVolEstimate(value=est, stderr=stderr, n_samples=n_samples)


def det_ratio_bounds(m, nu):
    """det(I + nu M) / det(I + M) with its proven enclosure nu^(-d), nu^d."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-9):
        raise InvalidArgumentError("matrix must be symmetric")
    if not (1.0 <= nu <= 2.0):
        raise InvalidArgumentError("nu must lie in [1, 2]")
    op = float(np.max(np.abs(np.linalg.eigvalsh(m))))
    if op > 0.1:
        raise InvalidArgumentError("operator norm must be at most 0.1")
    d = m.shape[0]
    eye = np.eye(d)
    ratio = float(np.linalg.det(eye + nu * m) / np.linalg.det(eye + m))
    return ratio, nu ** (-d), nu**d


def jmj_check(m, j):
    """Whether ||J^T M J||_F^2 <= (1 + 3 phi) ||M||_F^2 for phi = ||JJ^T - I||_op."""
    m = np.asarray(m, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-9):
        raise InvalidArgumentError("matrix must be symmetric")
    gram = j @ j.T - np.eye(j.shape[0])
    phi = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (gram + gram.T)))))
    if phi > 1.0:
        raise InvalidArgumentError("JJ^T must be within operator distance 1 of I")
    lhs = float(np.linalg.norm(j.T @ m @ j, "fro") ** 2)
    rhs = (1.0 + 3.0 * phi) * float(np.linalg.norm(m, "fro") ** 2)
    # tiny relative slack so exact-equality cases (J orthogonal) pass in floats
    return lhs <= rhs * (1.0 + 1e-12)


def goe_symmetric(d, rng, op_norm):
    """Random symmetric matrix rescaled to the requested operator norm."""
    a = rng.normal(size=(d, d))
    s = 0.5 * (a + a.T)
    cur = float(np.max(np.abs(np.linalg.eigvalsh(s))))
    if cur == 0.0:
        return np.zeros((d, d))
    return s * (op_norm / cur)
