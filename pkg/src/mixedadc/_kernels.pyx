# cython: language_level=3
"""Compiled Monte Carlo kernel for the quantized MRC receive chain.

Mirrors ``_fallback.accumulate``: same counter stream, same per-trial word
layout, same statistic slots. Runs without the GIL so blocks of trials can be
spread over threads.
"""

from libc.math cimport cos, log, sin, sqrt
from libc.stdlib cimport free, malloc

# Slot order must match _fallback.STATS.
cdef enum:
    FU2 = 0
    FU4 = 1
    LU2 = 2
    LU4 = 3
    FI2 = 4
    FI4 = 5
    LI2 = 6
    LI4 = 7
    QN2 = 8
    QN4 = 9
    N2 = 10
    N4 = 11
    SIG = 12
    SIG2 = 13
    FUL2 = 14
    FUL4 = 15
    FIL2 = 16
    FIL4 = 17
    DEN = 18
    DEN2 = 19
    DN_RE = 20
    DN_IM = 21
    DN2 = 22
    FL_RE = 23
    FL_IM = 24
    FL2 = 25
    FU1 = 26
    LU1 = 27
    NSTATS = 28

N_STATS = NSTATS

ctypedef unsigned long long u64

cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586


cdef inline u64 word(u64 key, u64 pos) noexcept nogil:
    cdef u64 z = key + (pos + 1) * GAMMA
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void cnormal(u64 key, u64 pos, double* re, double* im) noexcept nogil:
    cdef double u1 = (<double>(word(key, pos) >> 11) + 1.0) * INV53
    cdef double u2 = <double>(word(key, pos + 1) >> 11) * INV53
    cdef double r = sqrt(-log(u1))
    cdef double ph = TWO_PI * u2
    re[0] = r * cos(ph)
    im[0] = r * sin(ph)


def accumulate(const double[:, ::1] beta, Py_ssize_t m_full, double alpha, double rho,
               u64 key, long long t_start, long long t_stop, double[:, ::1] out):
    cdef Py_ssize_t M = beta.shape[0]
    cdef Py_ssize_t K = beta.shape[1]
    cdef Py_ssize_t ML = M - m_full
    cdef u64 W = 2 * M * K + 2 * M + 2 * ML + K
    if out.shape[0] != K or out.shape[1] != NSTATS:
        raise ValueError("out must have shape (K, N_STATS)")

    cdef double* gr = <double*>malloc(M * K * sizeof(double))
    cdef double* gi = <double*>malloc(M * K * sizeof(double))
    cdef double* sb = <double*>malloc(M * K * sizeof(double))
    cdef double* nr = <double*>malloc(M * sizeof(double))
    cdef double* ni = <double*>malloc(M * sizeof(double))
    cdef double* qr = <double*>malloc((ML + 1) * sizeof(double))
    cdef double* qi = <double*>malloc((ML + 1) * sizeof(double))
    cdef double* xr = <double*>malloc(K * sizeof(double))
    cdef double* xi = <double*>malloc(K * sizeof(double))
    cdef double* amp = <double*>malloc(K * sizeof(double))
    if not (gr and gi and sb and nr and ni and qr and qi and xr and xi and amp):
        free(gr); free(gi); free(sb); free(nr); free(ni)
        free(qr); free(qi); free(xr); free(xi); free(amp)
        raise MemoryError()

    cdef double sr = sqrt(rho)
    cdef double qscale = alpha * (1.0 - alpha)
    cdef long long t
    cdef Py_ssize_t m, k, i
    cdef u64 base, pos
    cdef double re, im, p, ph, load, s
    cdef double fu, lu, sig, fir, fii, lir, lii, ar, ai
    cdef double nre, nim, qre, qim, ful, filr, fili, den
    cdef double npr, npi, dr, di, flr, fli, v

    with nogil:
        for m in range(M):
            for k in range(K):
                sb[m * K + k] = sqrt(beta[m, k])
        for k in range(K):
            s = 0.0
            for m in range(m_full):
                s = s + beta[m, k]
            v = 0.0
            for m in range(m_full, M):
                v = v + beta[m, k]
            amp[k] = sr * (s + alpha * v)

        for t in range(t_start, t_stop):
            base = <u64>t * W
            for m in range(M):
                for k in range(K):
                    pos = base + 2 * (m * K + k)
                    cnormal(key, pos, &re, &im)
                    gr[m * K + k] = re * sb[m * K + k]
                    gi[m * K + k] = im * sb[m * K + k]
            pos = base + 2 * M * K
            for m in range(M):
                cnormal(key, pos + 2 * m, &nr[m], &ni[m])
            pos = pos + 2 * M
            for m in range(ML):
                cnormal(key, pos + 2 * m, &re, &im)
                load = 0.0
                for i in range(K):
                    load = load + gr[(m_full + m) * K + i] * gr[(m_full + m) * K + i] \
                        + gi[(m_full + m) * K + i] * gi[(m_full + m) * K + i]
                v = sqrt(qscale * (1.0 + rho * load))
                qr[m] = v * re
                qi[m] = v * im
            pos = pos + 2 * ML
            for k in range(K):
                ph = TWO_PI * (<double>(word(key, pos + k) >> 11) * INV53)
                xr[k] = cos(ph)
                xi[k] = sin(ph)

            for k in range(K):
                fu = 0.0
                lu = 0.0
                s = 0.0
                v = 0.0
                for m in range(M):
                    p = gr[m * K + k] * gr[m * K + k] + gi[m * K + k] * gi[m * K + k]
                    if m < m_full:
                        fu = fu + (p - beta[m, k])
                        s = s + p
                    else:
                        lu = lu + (p - beta[m, k])
                        v = v + p
                fu = sr * fu
                lu = alpha * sr * lu
                sig = sr * (s + alpha * v)

                # interference: sum_{i != k} (sum_m conj(g_mk) g_mi) x_i
                fir = 0.0
                fii = 0.0
                lir = 0.0
                lii = 0.0
                for i in range(K):
                    if i == k:
                        continue
                    ar = 0.0
                    ai = 0.0
                    for m in range(m_full):
                        ar = ar + gr[m * K + k] * gr[m * K + i] + gi[m * K + k] * gi[m * K + i]
                        ai = ai + gr[m * K + k] * gi[m * K + i] - gi[m * K + k] * gr[m * K + i]
                    fir = fir + ar * xr[i] - ai * xi[i]
                    fii = fii + ar * xi[i] + ai * xr[i]
                    ar = 0.0
                    ai = 0.0
                    for m in range(m_full, M):
                        ar = ar + gr[m * K + k] * gr[m * K + i] + gi[m * K + k] * gi[m * K + i]
                        ai = ai + gr[m * K + k] * gi[m * K + i] - gi[m * K + k] * gr[m * K + i]
                    lir = lir + ar * xr[i] - ai * xi[i]
                    lii = lii + ar * xi[i] + ai * xr[i]
                fir = sr * fir
                fii = sr * fii
                lir = alpha * sr * lir
                lii = alpha * sr * lii

                # thermal noise and quantization noise through conj(g_k)
                nre = 0.0
                nim = 0.0
                for m in range(m_full):
                    nre = nre + gr[m * K + k] * nr[m] + gi[m * K + k] * ni[m]
                    nim = nim + gr[m * K + k] * ni[m] - gi[m * K + k] * nr[m]
                ar = 0.0
                ai = 0.0
                qre = 0.0
                qim = 0.0
                for m in range(m_full, M):
                    ar = ar + gr[m * K + k] * nr[m] + gi[m * K + k] * ni[m]
                    ai = ai + gr[m * K + k] * ni[m] - gi[m * K + k] * nr[m]
                    qre = qre + gr[m * K + k] * qr[m - m_full] + gi[m * K + k] * qi[m - m_full]
                    qim = qim + gr[m * K + k] * qi[m - m_full] - gi[m * K + k] * qr[m - m_full]
                nre = nre + alpha * ar
                nim = nim + alpha * ai

                ful = fu + lu
                filr = fir + lir
                fili = fii + lii
                den = ful * ful + filr * filr + fili * fili + qre * qre + qim * qim \
                    + nre * nre + nim * nim

                npr = ful * xr[k] + filr + qre + nre
                npi = ful * xi[k] + fili + qim + nim
                # amp * x_k * conj(npi)
                dr = amp[k] * (xr[k] * npr + xi[k] * npi)
                di = amp[k] * (xi[k] * npr - xr[k] * npi)
                flr = fir * lir + fii * lii
                fli = fii * lir - fir * lii

                v = fu * fu
                out[k, FU2] += v
                out[k, FU4] += v * v
                v = lu * lu
                out[k, LU2] += v
                out[k, LU4] += v * v
                v = fir * fir + fii * fii
                out[k, FI2] += v
                out[k, FI4] += v * v
                v = lir * lir + lii * lii
                out[k, LI2] += v
                out[k, LI4] += v * v
                v = qre * qre + qim * qim
                out[k, QN2] += v
                out[k, QN4] += v * v
                v = nre * nre + nim * nim
                out[k, N2] += v
                out[k, N4] += v * v
                out[k, SIG] += sig
                out[k, SIG2] += sig * sig
                v = ful * ful
                out[k, FUL2] += v
                out[k, FUL4] += v * v
                v = filr * filr + fili * fili
                out[k, FIL2] += v
                out[k, FIL4] += v * v
                out[k, DEN] += den
                out[k, DEN2] += den * den
                out[k, DN_RE] += dr
                out[k, DN_IM] += di
                out[k, DN2] += dr * dr + di * di
                out[k, FL_RE] += flr
                out[k, FL_IM] += fli
                out[k, FL2] += flr * flr + fli * fli
                out[k, FU1] += fu
                out[k, LU1] += lu

    free(gr); free(gi); free(sb); free(nr); free(ni)
    free(qr); free(qi); free(xr); free(xi); free(amp)
