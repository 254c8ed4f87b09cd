#ifndef PRIVGMM_PAIRSUM_H
#define PRIVGMM_PAIRSUM_H

double privgmm_pairsum(const double *di, const double *dj, const double *wi,
                       long p);

#endif
