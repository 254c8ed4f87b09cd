# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled numeric kernels: mixture pdf, adaptive Simpson, pairwise scorer."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()

cdef extern from "_pairsum.h":
    double privgmm_pairsum(const double* di, const double* dj,
                           const double* wi, long p) nogil

BACKEND = "native"

cdef enum:
    MAX_DEPTH = 48
    MAX_INTERVALS = 2000000

cdef double TWO_PI = 6.283185307179586476925287


cdef struct Mix:
    Py_ssize_t k
    const double* mu
    const double* inv2v
    const double* nrm


cdef struct Itg:
    int mode  # 0: half absolute difference, 1: target masked by f1 > f2
    Mix m1
    Mix m2
    Mix mt


cdef inline double _mixpdf(const Mix* mx, double x) noexcept nogil:
    cdef double s = 0.0
    cdef double z
    cdef Py_ssize_t c
    for c in range(mx.k):
        z = x - mx.mu[c]
        s += mx.nrm[c] * exp(-z * z * mx.inv2v[c])
    return s


cdef double _feval(const Itg* it, double x) noexcept nogil:
    cdef double f1 = _mixpdf(&it.m1, x)
    cdef double f2 = _mixpdf(&it.m2, x)
    if it.mode == 0:
        return 0.5 * fabs(f1 - f2)
    if f1 > f2:
        return _mixpdf(&it.mt, x)
    return 0.0


cdef void _rec(const Itg* it, double a, double fa, double m, double fm,
               double b, double fb, double s, double tol, int depth,
               long* budget, double* res, double* err) noexcept nogil:
    cdef double lm = 0.5 * (a + m)
    cdef double rm = 0.5 * (m + b)
    cdef double flm = _feval(it, lm)
    cdef double frm = _feval(it, rm)
    cdef double sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    cdef double sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    cdef double s2 = sl + sr
    cdef double e = (s2 - s) / 15.0
    budget[0] -= 1
    # the work budget bounds runtime when the integrand is noisy at every
    # scale (region indicators on densities that agree to rounding error);
    # unresolved intervals still report their error estimate
    if fabs(e) <= tol or depth >= MAX_DEPTH or budget[0] <= 0:
        res[0] += s2 + e
        err[0] += fabs(e)
        return
    _rec(it, a, fa, lm, flm, m, fm, sl, 0.5 * tol, depth + 1, budget, res, err)
    _rec(it, m, fm, rm, frm, b, fb, sr, 0.5 * tol, depth + 1, budget, res, err)


cdef void _run_segments(const Itg* it, double[::1] bk, double tol,
                        double* res, double* err) noexcept nogil:
    cdef Py_ssize_t n_seg = bk.shape[0] - 1
    cdef double span = bk[n_seg] - bk[0]
    cdef Py_ssize_t s_idx
    cdef long budget = MAX_INTERVALS
    cdef double a, b, mid, fa, fb, fmid, s0
    for s_idx in range(n_seg):
        a = bk[s_idx]
        b = bk[s_idx + 1]
        if b <= a:
            continue
        fa = _feval(it, a)
        fb = _feval(it, b)
        mid = 0.5 * (a + b)
        fmid = _feval(it, mid)
        s0 = (b - a) / 6.0 * (fa + 4.0 * fmid + fb)
        _rec(it, a, fa, mid, fmid, b, fb, s0, tol * (b - a) / span, 0,
             &budget, res, err)


class _Prepped:
    """Keeps the derived arrays alive while pointers into them are in use."""

    __slots__ = ("mu", "inv2v", "nrm")

    def __init__(self, w, mu, var):
        w = np.ascontiguousarray(w, dtype=np.float64)
        self.mu = np.ascontiguousarray(mu, dtype=np.float64)
        var = np.ascontiguousarray(var, dtype=np.float64)
        self.inv2v = np.ascontiguousarray(0.5 / var)
        self.nrm = np.ascontiguousarray(w / np.sqrt(TWO_PI * var))


cdef Mix _as_mix(object prepped):
    cdef Mix mx
    cdef double[::1] mu = prepped.mu
    cdef double[::1] inv2v = prepped.inv2v
    cdef double[::1] nrm = prepped.nrm
    mx.k = mu.shape[0]
    mx.mu = &mu[0]
    mx.inv2v = &inv2v[0]
    mx.nrm = &nrm[0]
    return mx


def mixture_pdf_batch(w, mu, var, x):
    """Density of a univariate Gaussian mixture at each point of x."""
    p = _Prepped(w, mu, var)
    cdef Mix mx = _as_mix(p)
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    out_arr = np.empty(xs.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(xs.shape[0]):
            out[i] = _mixpdf(&mx, xs[i])
    return out_arr


def adaptive_tv(w1, mu1, var1, w2, mu2, var2, breaks, tol):
    """Integral of 0.5 * |f1 - f2| over the breakpoint window."""
    p1 = _Prepped(w1, mu1, var1)
    p2 = _Prepped(w2, mu2, var2)
    cdef Itg it
    it.mode = 0
    it.m1 = _as_mix(p1)
    it.m2 = _as_mix(p2)
    it.mt = it.m1
    cdef double[::1] bk = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef double res = 0.0
    cdef double err = 0.0
    cdef double ctol = tol
    if bk.shape[0] >= 2:
        with nogil:
            _run_segments(&it, bk, ctol, &res, &err)
    return res, err


def adaptive_scheffe(wt, mut, vart, wi, mui, vari, wj, muj, varj, breaks, tol):
    """Integral of f_t over the region where f_i strictly exceeds f_j."""
    pt = _Prepped(wt, mut, vart)
    pi = _Prepped(wi, mui, vari)
    pj = _Prepped(wj, muj, varj)
    cdef Itg it
    it.mode = 1
    it.m1 = _as_mix(pi)
    it.m2 = _as_mix(pj)
    it.mt = _as_mix(pt)
    cdef double[::1] bk = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef double res = 0.0
    cdef double err = 0.0
    cdef double ctol = tol
    if bk.shape[0] >= 2:
        with nogil:
            _run_segments(&it, bk, ctol, &res, &err)
    return res, err


def mde_max_scores(dens, cell_mass, emp):
    """Worst-case discrepancy per hypothesis over its pairwise test regions.

    dens[i, p] is the density of hypothesis i at the representative point of
    cell p, cell_mass[i, p] its exact probability mass on cell p, and emp[p]
    the empirical mass.  Returns, for each i, the maximum over j != i of
    |sum over cells with dens[i] > dens[j] of (cell_mass[i] - emp)|.
    """
    cdef double[:, ::1] d = np.ascontiguousarray(dens, dtype=np.float64)
    cdef Py_ssize_t m = d.shape[0]
    cdef Py_ssize_t p = d.shape[1]
    scores_arr = np.zeros(m)
    if m <= 1:
        return scores_arr
    diff_arr = np.ascontiguousarray(
        np.asarray(cell_mass, dtype=np.float64) - np.asarray(emp, dtype=np.float64)[None, :]
    )
    cdef double[:, ::1] diff = diff_arr
    cdef double[::1] out = scores_arr
    cdef Py_ssize_t i, j
    cdef double acc, best
    cdef const double* di
    cdef const double* dj
    cdef const double* wi
    with nogil:
        for i in range(m):
            best = 0.0
            di = &d[i, 0]
            wi = &diff[i, 0]
            for j in range(m):
                if j == i:
                    continue
                dj = &d[j, 0]
                acc = fabs(privgmm_pairsum(di, dj, wi, p))
                if acc > best:
                    best = acc
            out[i] = best
    return scores_arr
