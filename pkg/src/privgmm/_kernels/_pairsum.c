/* Hot loop of the pairwise scorer, isolated so the compiler may vectorize
 * the floating-point reduction (the simd pragma permits reassociation here
 * without enabling fast-math for the rest of the extension). */

double privgmm_pairsum(const double *restrict di, const double *restrict dj,
                       const double *restrict wi, long p) {
    double acc = 0.0;
    long q;
#pragma omp simd reduction(+ : acc)
    for (q = 0; q < p; q++) {
        acc += (di[q] > dj[q]) ? wi[q] : 0.0;
    }
    return acc;
}
