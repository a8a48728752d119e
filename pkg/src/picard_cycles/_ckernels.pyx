# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same signatures as _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, sqrt, M_PI

cnp.import_array()


cdef inline long long _pmod(long long a, long long m) nogil:
    cdef long long r = a % m
    return r + m if r < 0 else r


cdef long long _isqrt(long long n) nogil:
    if n <= 0:
        return 0
    cdef long long s = <long long>sqrt(<double>n)
    while s * s > n:
        s -= 1
    while (s + 1) * (s + 1) <= n:
        s += 1
    return s


cdef inline long long _floordiv(long long a, long long b) nogil:
    cdef long long q = a // b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


def representation_counts(long long A, long long B, long long C, long long x0,
                          long long y0, long long m, long long vmax):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(vmax + 1, dtype=np.int64)
    cdef long long delta = 4 * A * C - B * B
    cdef long long ymax = _isqrt(4 * A * vmax // delta) + 1
    cdef long long Y = -ymax + _pmod(y0 + ymax, m)
    cdef long long rad, s, lo, hi, X, v
    with nogil:
        while Y <= ymax:
            rad = 4 * A * vmax - delta * Y * Y
            if rad >= 0:
                s = _isqrt(rad)
                lo = -_floordiv(B * Y + s, 2 * A)
                hi = _floordiv(s - B * Y, 2 * A)
                X = lo + _pmod(x0 - lo, m)
                while X <= hi:
                    v = A * X * X + B * X * Y + C * Y * Y
                    if 0 <= v <= vmax:
                        counts[v] += 1
                    X += m
            Y += m
    return counts


def lemma46_sweep(long long modulus, long long p, long long delta, long long varpi,
                  int max_report=64):
    cdef long long a, b, x, e12, e13, e23, count = 0
    found = []
    for a in range(modulus):
        if a % p == 0:
            continue
        for x in range(modulus):
            if x % p == 0:
                continue
            for b in range(modulus):
                e12 = _pmod((a - 1) * delta + b, modulus)
                e13 = _pmod(a * varpi + b - delta + x * (delta - varpi), modulus)
                e23 = _pmod(1 - x, modulus)
                if e12 == 0 and e13 == 0 and e23 == 0:
                    count += 1
                    if len(found) < max_report:
                        found.append((a, b, x))
    return count, found


def eval_series(coeffs, zs):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zarr = np.ascontiguousarray(zs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(zarr.shape[0], dtype=np.complex128)
    cdef Py_ssize_t j, n, N = a.shape[0]
    cdef double x, y, r, sr, si, cr, ci, tr, ti, nr, ni, twopi = 2.0 * M_PI
    for j in range(zarr.shape[0]):
        x = zarr[j].real
        y = zarr[j].imag
        sr = 0.0; si = 0.0; cr = 0.0; ci = 0.0
        for n in range(N):
            if a[n] == 0.0:
                continue
            r = exp(-twopi * n * y)
            tr = a[n] * r * cos(twopi * n * x) - cr
            ti = a[n] * r * sin(twopi * n * x) - ci
            nr = sr + tr
            ni = si + ti
            cr = (nr - sr) - tr
            ci = (ni - si) - ti
            sr = nr; si = ni
        out[j] = sr + 1j * si
    return out
