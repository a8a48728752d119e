"""Pure-Python implementations of the hot loops (fallback for _ckernels)."""
from __future__ import annotations

import math
from math import isqrt

import numpy as np


def _x_range(A, B, C, Y, vmax):
    # A X^2 + B Y X + C Y^2 <= vmax  <=>  (2AX + BY)^2 <= 4A vmax - (4AC - B^2) Y^2
    rad = 4 * A * vmax - (4 * A * C - B * B) * Y * Y
    if rad < 0:
        return 1, 0
    s = isqrt(rad)
    lo = -((B * Y + s) // (2 * A))  # ceil((-BY - s) / 2A)
    hi = (s - B * Y) // (2 * A)
    return lo, hi


def representation_counts(A, B, C, x0, y0, m, vmax):
    """counts[v] = #{(X, Y) = (x0, y0) mod m : A X^2 + B XY + C Y^2 = v}, v <= vmax."""
    counts = np.zeros(vmax + 1, dtype=np.int64)
    delta = 4 * A * C - B * B
    ymax = isqrt(4 * A * vmax // delta) + 1
    ystart = -ymax + ((y0 + ymax) % m)
    for Y in range(ystart, ymax + 1, m):
        lo, hi = _x_range(A, B, C, Y, vmax)
        if lo > hi:
            continue
        X = lo + ((x0 - lo) % m)
        while X <= hi:
            v = A * X * X + B * X * Y + C * Y * Y
            if 0 <= v <= vmax:
                counts[v] += 1
            X += m
    return counts


def lemma46_sweep(modulus, p, delta, varpi, max_report=64):
    """Sweep (a, b, x) over Z/modulus with a, x units, testing whether
    u^-1 h u (closed form) is lower triangular."""
    count = 0
    found = []
    for a in range(modulus):
        if a % p == 0:
            continue
        for x in range(modulus):
            if x % p == 0:
                continue
            for b in range(modulus):
                e12 = ((a - 1) * delta + b) % modulus
                e13 = (a * varpi + b - delta + x * (delta - varpi)) % modulus
                e23 = (1 - x) % modulus
                if e12 == 0 and e13 == 0 and e23 == 0:
                    count += 1
                    if len(found) < max_report:
                        found.append((a, b, x))
    return count, found


def eval_series(coeffs, zs):
    """Evaluate sum_n a_n e^{2 pi i n z} at each z, compensated summation."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    out = np.empty(len(zs), dtype=np.complex128)
    twopi = 2.0 * math.pi
    for j, z in enumerate(zs):
        x, y = z.real, z.imag
        sr = si = 0.0
        cr = ci = 0.0
        for n, a in enumerate(coeffs):
            if a == 0.0:
                continue
            r = math.exp(-twopi * n * y)
            tr = a * r * math.cos(twopi * n * x) - cr
            ti = a * r * math.sin(twopi * n * x) - ci
            nr = sr + tr
            ni = si + ti
            cr = (nr - sr) - tr
            ci = (ni - si) - ti
            sr, si = nr, ni
        out[j] = complex(sr, si)
    return out
