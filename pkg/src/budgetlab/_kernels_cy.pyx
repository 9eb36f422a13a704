# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trajectory kernel (hot path).

C twin of ``_kernels_py``: same draw protocol, same branch structure, same
compensated summation, so trajectories agree bit for bit with the fallback.
Raw 64-bit words come straight from the PCG64 bitgen_t, which lets the whole
loop run without the GIL (replicates then parallelise across threads).
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, fabs, isnan
from libc.stdint cimport uint8_t, uint64_t

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "cython"

# codes must match _kernels_py
# kinds: 0 linear, 1 onemax, 2 binval, 3 leadingones, 4 zigzag
# algos: 0 rls, 1 ea, 2 sa

cdef double INV53 = 2.0 ** -53


cdef inline uint64_t next_u64(bitgen_t *bg) noexcept nogil:
    return bg.next_uint64(bg.state)


cdef inline double u01(bitgen_t *bg) noexcept nogil:
    return <double>(next_u64(bg) >> 11) * INV53


cdef inline long bounded(bitgen_t *bg, long m) noexcept nogil:
    cdef uint64_t um = <uint64_t>m
    cdef uint64_t threshold = (<uint64_t>0 - um) % um  # 2^64 mod m
    cdef uint64_t w
    while True:
        w = next_u64(bg)
        if w >= threshold:
            return <long>(w % um)


cdef inline long zz(long ones, long n) noexcept nogil:
    return ones if ((n - ones) & 1) == 0 else ones - 2


cdef inline long leading(uint8_t *bits, long n) noexcept nogil:
    cdef long j = 0
    while j < n and bits[j] == 1:
        j += 1
    return j


cdef inline double neumaier_zero_bits(uint8_t *bits, double *coeffs, long n) noexcept nogil:
    cdef double s = 0.0, comp = 0.0, w, t
    cdef long j
    for j in range(n):
        if bits[j] == 0:
            w = coeffs[j]
            t = s + w
            if fabs(s) >= fabs(w):
                comp += (s - t) + w
            else:
                comp += (w - t) + s
            s = t
    return s + comp


cdef inline double neumaier_flip_delta(uint8_t *bits, double *coeffs,
                                       long *flips, long nf) noexcept nogil:
    cdef double s = 0.0, comp = 0.0, w, t
    cdef long i, j
    for i in range(nf):
        j = flips[i]
        w = coeffs[j] if bits[j] == 0 else -coeffs[j]
        t = s + w
        if fabs(s) >= fabs(w):
            comp += (s - t) + w
        else:
            comp += (w - t) + s
        s = t
    return s + comp


cdef inline bint in_flips(long *flips, long nf, long m) noexcept nogil:
    cdef long i
    for i in range(nf):
        if flips[i] == m:
            return True
    return False


cdef inline long off_lead(uint8_t *bits, long n, long lead,
                          long *flips, long nf) noexcept nogil:
    cdef long minb = -1, i, m
    for i in range(nf):
        if flips[i] < lead and (minb < 0 or flips[i] < minb):
            minb = flips[i]
    if minb >= 0:
        return minb
    if lead == n or not in_flips(flips, nf, lead):
        return lead
    m = lead + 1
    while m < n and (bits[m] ^ (1 if in_flips(flips, nf, m) else 0)) == 1:
        m += 1
    return m


cdef inline double full_error(long kind, uint8_t *bits, double *coeffs,
                              long n, long ones, long lead) noexcept nogil:
    if kind == 0 or kind == 2:
        return neumaier_zero_bits(bits, coeffs, n)
    if kind == 1:
        return <double>(n - ones)
    if kind == 3:
        return <double>(n - lead)
    return <double>(n - zz(ones, n))


cdef inline int flip_sign(long kind, uint8_t *bits, double *coeffs, long n,
                          long ones, long lead, long *flips, long nf) noexcept nogil:
    cdef long i, jmax, sumb, d, lead2, k2
    cdef double s
    if kind == 2:  # binval: the highest flipped weight dominates
        jmax = flips[0]
        for i in range(1, nf):
            if flips[i] > jmax:
                jmax = flips[i]
        return 1 if bits[jmax] == 0 else -1
    if kind == 1:
        sumb = 0
        for i in range(nf):
            sumb += bits[flips[i]]
        d = nf - 2 * sumb
        return (d > 0) - (d < 0)
    if kind == 0:
        s = neumaier_flip_delta(bits, coeffs, flips, nf)
        return (s > 0.0) - (s < 0.0)
    if kind == 3:
        lead2 = off_lead(bits, n, lead, flips, nf)
        return (lead2 > lead) - (lead2 < lead)
    sumb = 0
    for i in range(nf):
        sumb += bits[flips[i]]
    k2 = ones + nf - 2 * sumb
    d = zz(k2, n) - zz(ones, n)
    return (d > 0) - (d < 0)


cdef inline int flip_sign_delta(long kind, uint8_t *bits, double *coeffs, long n,
                                long ones, long lead, long *flips, long nf,
                                double *delta) noexcept nogil:
    cdef long i, jmax, sumb, d, lead2, k2
    if kind == 0 or kind == 2:
        delta[0] = neumaier_flip_delta(bits, coeffs, flips, nf)
        if kind == 2:
            jmax = flips[0]
            for i in range(1, nf):
                if flips[i] > jmax:
                    jmax = flips[i]
            return 1 if bits[jmax] == 0 else -1
        return (delta[0] > 0.0) - (delta[0] < 0.0)
    if kind == 1:
        sumb = 0
        for i in range(nf):
            sumb += bits[flips[i]]
        d = nf - 2 * sumb
    elif kind == 3:
        lead2 = off_lead(bits, n, lead, flips, nf)
        d = lead2 - lead
    else:
        sumb = 0
        for i in range(nf):
            sumb += bits[flips[i]]
        k2 = ones + nf - 2 * sumb
        d = zz(k2, n) - zz(ones, n)
    delta[0] = <double>d
    return (d > 0) - (d < 0)


cdef void _run(long algo, double param, long kind, long n, double *coeffs,
               uint8_t *bits, long steps, bitgen_t *bg, double *out,
               long *flips) noexcept nogil:
    cdef long ones = 0, lead, j, t, nf, b, k2, m, i, sumb
    cdef double err, delta
    cdef int sign
    for j in range(n):
        ones += bits[j]
    lead = leading(bits, n)
    err = full_error(kind, bits, coeffs, n, ones, lead)
    out[0] = err

    for t in range(steps):
        if algo == 0:  # rls
            j = bounded(bg, n)
            b = bits[j]
            if kind == 0 or kind == 1 or kind == 2:
                if b == 0:
                    bits[j] = 1
                    ones += 1
                    if kind == 1:
                        err = <double>(n - ones)
                    else:
                        err = neumaier_zero_bits(bits, coeffs, n)
            elif kind == 3:
                if j > lead:
                    bits[j] ^= 1
                    ones += 1 - 2 * b
                elif j == lead:
                    bits[j] = 1
                    ones += 1
                    m = lead + 1
                    while m < n and bits[m] == 1:
                        m += 1
                    lead = m
                    err = <double>(n - lead)
            else:
                k2 = ones + 1 - 2 * b
                if zz(k2, n) >= zz(ones, n):
                    bits[j] ^= 1
                    ones = k2
                    err = <double>(n - zz(k2, n))
        elif algo == 1:  # ea
            nf = 0
            for j in range(n):
                if (<double>(next_u64(bg) >> 11) * INV53) < param:
                    flips[nf] = j
                    nf += 1
            if nf > 0:
                sign = flip_sign(kind, bits, coeffs, n, ones, lead, flips, nf)
                if sign >= 0:
                    sumb = 0
                    for i in range(nf):
                        sumb += bits[flips[i]]
                    ones += nf - 2 * sumb
                    for i in range(nf):
                        bits[flips[i]] ^= 1
                    if kind == 3:
                        lead = leading(bits, n)
                        err = <double>(n - lead)
                    elif kind == 1:
                        err = <double>(n - ones)
                    elif kind == 4:
                        err = <double>(n - zz(ones, n))
                    elif sign != 0:
                        err = neumaier_zero_bits(bits, coeffs, n)
        else:  # sa; the optimum is absorbing and consumes no draws
            if err != 0.0:
                if u01(bg) < 0.5:
                    flips[0] = bounded(bg, n)
                    nf = 1
                else:
                    flips[0] = bounded(bg, n)
                    m = bounded(bg, n - 1)
                    if m >= flips[0]:
                        m += 1
                    flips[1] = m
                    nf = 2
                sign = flip_sign_delta(kind, bits, coeffs, n, ones, lead,
                                       flips, nf, &delta)
                # nan delta (two beyond-double weights cancelling) rejects
                if sign >= 0 or (not isnan(delta) and u01(bg) < exp(delta / param)):
                    sumb = 0
                    for i in range(nf):
                        sumb += bits[flips[i]]
                    ones += nf - 2 * sumb
                    for i in range(nf):
                        bits[flips[i]] ^= 1
                    if kind == 3:
                        lead = leading(bits, n)
                        err = <double>(n - lead)
                    elif kind == 1:
                        err = <double>(n - ones)
                    elif kind == 4:
                        err = <double>(n - zz(ones, n))
                    elif sign != 0:
                        err = neumaier_zero_bits(bits, coeffs, n)
        out[t + 1] = err


def run_trajectory(long algo, double param, long kind, long n, coeffs,
                   bits0, long steps, bit_generator):
    """Simulate one path; returns (error series of length steps+1, final bits)."""
    cdef double[::1] coefv
    cdef uint8_t[::1] bitsv
    cdef double[::1] outv
    cdef long[::1] flipv
    cdef double *cptr = NULL
    cdef bitgen_t *bg
    cdef long j

    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy BitGenerator capsule")
    bg = <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")

    if coeffs is not None:
        coef_arr = np.ascontiguousarray(coeffs, dtype=np.float64)
        coefv = coef_arr
        cptr = &coefv[0]

    bits_arr = np.empty(n, dtype=np.uint8)
    bitsv = bits_arr
    if bits0 is None:
        for j in range(n):  # uniform init: top bit of one word per position
            bitsv[j] = <uint8_t>(next_u64(bg) >> 63)
    else:
        b0 = np.ascontiguousarray(bits0, dtype=np.uint8)
        bits_arr[:] = b0

    out = np.empty(steps + 1, dtype=np.float64)
    outv = out
    flip_arr = np.empty(max(n, 2), dtype=np.int64)
    flipv = flip_arr

    with nogil:
        _run(algo, param, kind, n, cptr, &bitsv[0], steps, bg, &outv[0], &flipv[0])
    return out, bits_arr
