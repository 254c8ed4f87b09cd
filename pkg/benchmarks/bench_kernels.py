"""Compare the compiled integration kernels against the pure-python fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Set PRIVGMM_PURE_PYTHON=1 to force the fallback at import time elsewhere;
this script loads both implementations side by side regardless.
"""

import time

import numpy as np

from privgmm._kernels import _pycore
from privgmm.model import Mixture
from privgmm.tvdist import quadrature_breaks

try:
    from privgmm._kernels import _core

    HAVE_NATIVE = True
except ImportError:
    _core = None
    HAVE_NATIVE = False


def timeit(fn, *args, repeat=3):
    best = float("inf")
    value = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return value, best


def bench_tv(backends):
    m1 = Mixture.univariate([0.5, 0.5], [0.0, 100.0], [1.0, 25.0])
    m2 = Mixture.univariate([0.4, 0.6], [0.5, 99.0], [1.2, 30.0])
    f1 = m1.flat_univariate()
    f2 = m2.flat_univariate()
    breaks = quadrature_breaks([f1, f2])
    print("\nadaptive_tv (pairwise mixture distance, tol 1e-8)")
    results = {}
    for name, mod in backends:
        (value, _err), dt = timeit(mod.adaptive_tv, *f1, *f2, breaks, 1e-8)
        results[name] = value
        print(f"  {name:8s} {dt * 1e3:9.2f} ms   tv = {value:.10f}")
    return results


def bench_scores(backends):
    rng = np.random.default_rng(0)
    m, p = 1200, 500
    dens = np.abs(rng.normal(size=(m, p))) + 1e-8
    cm = rng.dirichlet(np.ones(p), size=m)
    emp = rng.dirichlet(np.ones(p) * 2.0)
    print(f"\nmde_max_scores (worst-pair discrepancy, M = {m}, cells = {p})")
    results = {}
    for name, mod in backends:
        value, dt = timeit(mod.mde_max_scores, dens, cm, emp, repeat=1)
        results[name] = value
        print(f"  {name:8s} {dt:9.3f} s    max score = {value.max():.10f}")
    return results


def main():
    backends = [("python", _pycore)]
    if HAVE_NATIVE:
        backends.insert(0, ("native", _core))
    else:
        print("compiled kernels unavailable; benchmarking the fallback only")

    tv = bench_tv(backends)
    scores = bench_scores(backends)

    if HAVE_NATIVE:
        dtv = abs(tv["native"] - tv["python"])
        dsc = float(np.max(np.abs(scores["native"] - scores["python"])))
        print(f"\nagreement: |tv gap| = {dtv:.2e}, max |score gap| = {dsc:.2e}")


if __name__ == "__main__":
    main()
