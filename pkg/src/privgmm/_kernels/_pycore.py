"""Pure numpy implementations of the numeric kernels.

Used when the compiled extension is unavailable or explicitly disabled.
The adaptive quadratures process whole batches of pending intervals per
iteration so the fallback stays usable on realistic inputs.
"""

import numpy as np

BACKEND = "python"

_MAX_DEPTH = 48
_MAX_INTERVALS = 2_000_000


def mixture_pdf_batch(w, mu, var, x):
    """Density of a univariate Gaussian mixture at each point of x."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    z = x[:, None] - mu[None, :]
    comp = np.exp(-0.5 * z * z / var[None, :]) / np.sqrt(2.0 * np.pi * var[None, :])
    return comp @ w


def _adaptive_batched(f, breaks, tol):
    """Adaptive Simpson over the segments defined by sorted breakpoints.

    The total error budget is split across segments in proportion to their
    length, then halved on every subdivision, so the accumulated local
    estimates stay below the requested tolerance.  Returns (value, err) where
    err is the sum of accepted local error estimates.
    """
    breaks = np.asarray(breaks, dtype=np.float64)
    a = breaks[:-1].copy()
    b = breaks[1:].copy()
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0, 0.0
    span = breaks[-1] - breaks[0]
    tol_i = tol * (b - a) / span
    m = 0.5 * (a + b)
    fx = f(breaks)
    fa = fx[:-1][keep]
    fb = fx[1:][keep]
    fm = f(m)
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    depth = np.zeros(a.size, dtype=np.int64)

    total = 0.0
    err = 0.0
    processed = a.size
    while a.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        fnew = f(np.concatenate([lm, rm]))
        flm = fnew[: a.size]
        frm = fnew[a.size:]
        sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        s2 = sl + sr
        e = (s2 - s) / 15.0
        done = (np.abs(e) <= tol_i) | (depth >= _MAX_DEPTH)
        if processed > _MAX_INTERVALS:
            done = np.ones_like(done)
        if np.any(done):
            total += float(np.sum(s2[done] + e[done]))
            err += float(np.sum(np.abs(e[done])))
        live = ~done
        a = np.concatenate([a[live], m[live]])
        fa = np.concatenate([fa[live], fm[live]])
        new_b = np.concatenate([m[live], b[live]])
        fb_new = np.concatenate([fm[live], fb[live]])
        m = np.concatenate([lm[live], rm[live]])
        fm = np.concatenate([flm[live], frm[live]])
        b = new_b
        fb = fb_new
        s = np.concatenate([sl[live], sr[live]])
        tol_i = np.concatenate([0.5 * tol_i[live], 0.5 * tol_i[live]])
        depth = np.concatenate([depth[live] + 1, depth[live] + 1])
        processed += a.size
    return total, err


def adaptive_tv(w1, mu1, var1, w2, mu2, var2, breaks, tol):
    """Integral of 0.5 * |f1 - f2| over the breakpoint window."""

    def f(x):
        return 0.5 * np.abs(
            mixture_pdf_batch(w1, mu1, var1, x) - mixture_pdf_batch(w2, mu2, var2, x)
        )

    return _adaptive_batched(f, breaks, tol)


def adaptive_scheffe(wt, mut, vart, wi, mui, vari, wj, muj, varj, breaks, tol):
    """Integral of f_t over the region where f_i strictly exceeds f_j."""

    def f(x):
        ft = mixture_pdf_batch(wt, mut, vart, x)
        fi = mixture_pdf_batch(wi, mui, vari, x)
        fj = mixture_pdf_batch(wj, muj, varj, x)
        return np.where(fi > fj, ft, 0.0)

    return _adaptive_batched(f, breaks, tol)


def mde_max_scores(dens, cell_mass, emp):
    """Worst-case discrepancy per hypothesis over its pairwise test regions.

    dens[i, p] is the density of hypothesis i at the representative point of
    cell p, cell_mass[i, p] its exact probability mass on cell p, and emp[p]
    the empirical mass.  Returns, for each i, the maximum over j != i of
    |sum over cells with dens[i] > dens[j] of (cell_mass[i] - emp)|.
    """
    dens = np.ascontiguousarray(dens, dtype=np.float64)
    cell_mass = np.ascontiguousarray(cell_mass, dtype=np.float64)
    emp = np.ascontiguousarray(emp, dtype=np.float64)
    m = dens.shape[0]
    if m == 1:
        return np.zeros(1)
    diff = cell_mass - emp[None, :]
    scores = np.empty(m)
    for i in range(m):
        acc = np.where(dens[i][None, :] > dens, diff[i][None, :], 0.0).sum(axis=1)
        acc = np.abs(acc)
        acc[i] = -1.0
        scores[i] = acc.max()
    return scores
