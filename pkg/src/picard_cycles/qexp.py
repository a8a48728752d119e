"""Truncated q-expansions with exact coefficients."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd

import numpy as np
import sympy

from . import kernels
from .quad_field import is_prime, kronecker

__all__ = [
    "QExpansion",
    "ModularityReport",
    "character_value",
    "hecke_T",
    "eisenstein",
    "eisenstein3",
    "generalized_bernoulli",
    "eta_product",
    "modularity_check",
    "gamma0_index",
    "sturm_bound",
    "sturm_equal",
    "InsufficientPrecision",
]


class InsufficientPrecision(ValueError):
    """Raised when a truncation is too short for the requested operation."""


def character_value(character: int | None, level: int, n: int) -> int:
    """Value at n of the Nebentypus attached to a discriminant, viewed mod level.

    ``character=None`` is the trivial character mod ``level``.
    """
    if gcd(n, level) != 1:
        return 0
    if character is None:
        return 1
    m = abs(character)
    r = n % m
    if gcd(r, m) != 1:
        return 0
    return kronecker(character, r)


@dataclass
class QExpansion:
    """sum_{n=0}^{trunc} a_n q^n + O(q^{trunc+1}).

    Coefficients are exact: Fractions/ints, or residues mod ``modulus`` when one
    is set.  ``character`` is the discriminant of the quadratic Nebentypus (None
    for trivial).
    """

    coeffs: list
    weight: int = 0
    level: int = 1
    character: int | None = None
    modulus: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.modulus is None:
            self.coeffs = [c if isinstance(c, (int, Fraction)) else Fraction(c) for c in self.coeffs]
        else:
            self.coeffs = [_reduce(c, self.modulus) for c in self.coeffs]

    @property
    def trunc(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def _like(self, coeffs, **kw):
        args = dict(weight=self.weight, level=self.level, character=self.character, modulus=self.modulus)
        args.update(kw)
        return QExpansion(list(coeffs), **args)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        n = min(self.trunc, other.trunc)
        return self._like(self.coeffs[i] + other.coeffs[i] for i in range(n + 1))

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        n = min(self.trunc, other.trunc)
        return self._like(self.coeffs[i] - other.coeffs[i] for i in range(n + 1))

    def scale(self, c) -> "QExpansion":
        return self._like(c * a for a in self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            return self.scale(other)
        n = min(self.trunc, other.trunc)
        out = [0] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a:
                for j in range(n + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        char = _mul_char(self.character, other.character)
        return self._like(out, weight=self.weight + other.weight, level=lcm_(self.level, other.level), character=char)

    __rmul__ = scale

    def truncate(self, N: int) -> "QExpansion":
        if N > self.trunc:
            raise InsufficientPrecision(f"cannot extend truncation {self.trunc} to {N}")
        return self._like(self.coeffs[: N + 1])

    def reduce(self, modulus: int) -> "QExpansion":
        return self._like(self.coeffs, modulus=modulus)

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return (
            self.coeffs == other.coeffs
            and self.weight == other.weight
            and self.level == other.level
            and self.character == other.character
            and self.modulus == other.modulus
        )

    def __repr__(self):
        terms = []
        for n, a in enumerate(self.coeffs[:6]):
            if a:
                terms.append(f"{a}" if n == 0 else f"{a}*q^{n}")
        body = " + ".join(terms) or "0"
        return f"{body} + O(q^{self.trunc + 1})  [k={self.weight}, M={self.level}, chi={self.character}]"

    def to_json(self) -> dict:
        def enc(c):
            c = Fraction(c)
            return f"{c.numerator}/{c.denominator}"

        return {
            "schema": "picard-cycles/qexpansion/1",
            "weight": self.weight,
            "level": self.level,
            "character_disc": self.character,
            "modulus": self.modulus,
            "trunc": self.trunc,
            "coeffs": [[n, enc(c)] for n, c in enumerate(self.coeffs)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "QExpansion":
        trunc = int(data["trunc"])
        coeffs = [Fraction(0)] * (trunc + 1)
        for n, c in data["coeffs"]:
            coeffs[int(n)] = Fraction(c)
        modulus = data.get("modulus")
        if modulus is not None:
            coeffs = [int(c) for c in coeffs]
        return cls(coeffs, int(data["weight"]), int(data["level"]), data.get("character_disc"), modulus)


def lcm_(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _mul_char(c1, c2):
    if c1 is None:
        return c2
    if c2 is None or c1 == c2:
        return None if c1 == c2 else c1
    raise ValueError("product of two distinct nontrivial characters is not tracked")


def _reduce(c, m: int) -> int:
    if isinstance(c, Fraction):
        if c.denominator % m == 0 or gcd(c.denominator, m) != 1:
            raise ZeroDivisionError(f"denominator {c.denominator} is not invertible mod {m}")
        return c.numerator * pow(c.denominator, -1, m) % m
    return int(c) % m


def hecke_T(f: QExpansion, ell: int) -> QExpansion:
    """T_ell on f: a_n -> a_{ell n} + chi(ell) ell^{k-1} a_{n/ell}.

    For ell dividing the level the second term vanishes (U_ell).
    """
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    N = f.trunc // ell
    eps = character_value(f.character, f.level, ell)
    if eps and f.weight < 1:
        raise ValueError("weight must be at least 1 for T_ell with ell prime to the level")
    factor = eps * ell ** (f.weight - 1) if eps else 0
    out = []
    for n in range(N + 1):
        a = f.coeffs[ell * n]
        if factor and n % ell == 0:
            a = a + factor * f.coeffs[n // ell]
        out.append(a)
    return f._like(out)


def _bernoulli_number(j: int) -> Fraction:
    if j == 1:
        return Fraction(-1, 2)
    b = sympy.bernoulli(j)
    return Fraction(int(b.p), int(b.q))


def _bernoulli_poly(k: int, x: Fraction) -> Fraction:
    return sum(comb(k, j) * _bernoulli_number(j) * x ** (k - j) for j in range(k + 1))


def generalized_bernoulli(k: int, disc: int) -> Fraction:
    """B_{k,chi} = f^{k-1} sum_{a=1}^{f} chi(a) B_k(a/f) for chi = (disc/.), f = |disc|."""
    f = abs(disc)
    total = Fraction(0)
    for a in range(1, f + 1):
        c = character_value(disc, f, a)
        if c:
            total += c * _bernoulli_poly(k, Fraction(a, f))
    return f ** (k - 1) * total


def eisenstein(ctx, k: int, N: int) -> QExpansion:
    """a_n = sum_{d | n} chi(d) d^{k-1}, a_0 = -B_{k,chi}/(2k)."""
    disc = ctx.disc
    f = abs(disc)
    chis = [character_value(disc, f, d) for d in range(f)]
    coeffs = [Fraction(0)] * (N + 1)
    coeffs[0] = -generalized_bernoulli(k, disc) / (2 * k)
    a = [0] * (N + 1)
    for d in range(1, N + 1):
        c = chis[d % f]
        if c:
            t = c * d ** (k - 1)
            for n in range(d, N + 1, d):
                a[n] += t
    for n in range(1, N + 1):
        coeffs[n] = Fraction(a[n])
    return QExpansion(coeffs, weight=k, level=f, character=disc)


def eisenstein3(ctx, N: int) -> QExpansion:
    return eisenstein(ctx, 3, N)


def eta_product(spec, N: int, weight: int | None = None, level: int | None = None,
                character: int | None = None) -> QExpansion:
    """q^{sum d e / 24} prod_d prod_m (1 - q^{dm})^{e_d}, to O(q^{N+1})."""
    total = sum(d * e for d, e in spec)
    if total % 24:
        raise ValueError(f"leading exponent {total}/24 is not an integer")
    lead = total // 24
    if lead < 0:
        raise ValueError("negative leading exponent: not holomorphic at infinity")
    M = N - lead
    c = [0] * (M + 1)
    if M >= 0:
        c[0] = 1
    for d, e in spec:
        if d <= 0:
            raise ValueError("eta quotient levels must be positive")
        for j in range(d, M + 1, d):
            if e > 0:
                for _ in range(e):
                    for n in range(M, j - 1, -1):
                        c[n] -= c[n - j]
            else:
                for _ in range(-e):
                    for n in range(j, M + 1):
                        c[n] += c[n - j]
    coeffs = [0] * lead + c
    coeffs = coeffs[: N + 1] + [0] * max(0, N + 1 - len(coeffs))
    if weight is None:
        weight = sum(e for _, e in spec) // 2
    if level is None:
        level = 1
        for d, _ in spec:
            level = lcm_(level, d)
    return QExpansion(coeffs, weight=weight, level=level, character=character)


def gamma0_index(M: int) -> int:
    idx = Fraction(M)
    for p in sympy.primefactors(M):
        idx *= Fraction(p + 1, p)
    return int(idx)


def sturm_bound(k: int, M: int) -> int:
    return k * gamma0_index(M) // 12


def sturm_equal(f: QExpansion, g: QExpansion) -> bool:
    """Equality in M_k(Gamma_0(M), chi) by comparison up to the Sturm bound."""
    if (f.weight, f.level, f.character) != (g.weight, g.level, g.character):
        raise ValueError("forms live in different spaces")
    B = sturm_bound(f.weight, f.level)
    if f.trunc < B or g.trunc < B:
        raise InsufficientPrecision(f"need coefficients up to {B}")
    return all(f.coeffs[n] == g.coeffs[n] for n in range(B + 1))


@dataclass
class ModularityReport:
    max_defect: float
    tail_bound: float
    status: str  # "pass", "fail" or "inconclusive"
    samples: int
    seed: int
    tol: float
    witnesses: list

    def to_json(self) -> dict:
        return {
            "schema": "picard-cycles/modularity-report/1",
            "max_defect": self.max_defect,
            "tail_bound": self.tail_bound,
            "status": self.status,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "witnesses": self.witnesses,
        }


def _tail(C: float, k: int, N: int, absq: float) -> float:
    """C * sum_{n > N} n^k |q|^n."""
    if absq >= 1.0:
        return math.inf
    if absq == 0.0 or C == 0.0:
        return 0.0
    lq = math.log(absq)
    n = np.arange(N + 1, N + 1 + int(80.0 / -lq) + 10 * (k + 1) + 50, dtype=np.float64)
    terms = np.exp(k * np.log(n) + n * lq)
    return float(C * terms.sum())


def _gamma_with(c: int, d: int):
    g, a, b_ = _egcd(d, c)  # a*d + b_*c = 1
    # want a*d - b*c = 1
    return a, -b_, c, d


def _egcd(x: int, y: int):
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def modularity_check(f: QExpansion, samples: int = 200, tol: float = 1e-8, seed: int = 0,
                     gammas=None, max_c_multiple: int = 10, min_imag: float = 0.8) -> ModularityReport:
    """Sample the transformation law f(gz) = chi(d)(cz+d)^k f(z) on Gamma_0(M).

    Base points have Im z >= ``min_imag`` and sit near the pole -d/c so that the
    truncated series still converges at gz; the multiples of M used for c are
    restricted to those where the truncation tail stays below ``tol``.
    """
    if f.modulus is not None:
        raise ValueError("numerical check needs exact rational coefficients")
    N, k, M = f.trunc, f.weight, f.level
    if N < 50:
        raise InsufficientPrecision("modularity check needs at least 50 terms")
    coeffs = np.array([float(c) for c in f.coeffs])
    lo = max(1, N // 2)
    fit = coeffs[lo:] / np.arange(lo, N + 1, dtype=np.float64) ** k
    C = float(np.max(np.abs(fit))) if len(fit) else 0.0
    rng = np.random.default_rng(seed)
    y_hi, eps_hi = min_imag * 1.025, 0.02

    def chi(d):
        return character_value(f.character, M, d)

    scale0 = abs(kernels.eval_series(coeffs, np.array([complex(0.0, min_imag)]))[0]) or 1.0
    feasible = []
    for m in range(1, max_c_multiple + 1):
        c = m * M
        im_g = y_hi / (c * c * (eps_hi ** 2 + y_hi ** 2))
        if _tail(C, k, N, math.exp(-2 * math.pi * im_g)) <= 0.1 * tol * scale0:
            feasible.append(m)
    if not feasible:
        feasible = [1]

    if gammas is None:
        gammas = []
        while len(gammas) < samples:
            if rng.random() < 0.1:
                s = 1 if rng.random() < 0.5 else -1
                gammas.append((s, int(rng.integers(-1000, 1001)), 0, s))
                continue
            c = int(rng.choice(feasible)) * M * (1 if rng.random() < 0.5 else -1)
            d = int(rng.integers(-1000, 1001))
            if d == 0 or gcd(c, d) != 1:
                continue
            gammas.append(_gamma_with(c, d))
    zs, gzs, factors = [], [], []
    for a, b, c, d in gammas:
        if a * d - b * c != 1 or c % M:
            raise ValueError(f"({a},{b};{c},{d}) is not in Gamma_0({M})")
        y = min_imag + (y_hi - min_imag) * rng.random()
        if c == 0:
            x = rng.random() - 0.5
        else:
            x = -d / c + (2 * rng.random() - 1) * eps_hi
        z = complex(x, y)
        cz_d = c * z + d
        zs.append(z)
        gzs.append((a * z + b) / cz_d)
        factors.append(chi(d) * cz_d ** k)
    zs, gzs = np.array(zs), np.array(gzs)
    fz = kernels.eval_series(coeffs, zs)
    fgz = kernels.eval_series(coeffs, gzs)
    max_defect, max_tail = 0.0, 0.0
    witnesses = []
    for i, (a, b, c, d) in enumerate(gammas):
        denom = abs(fz[i]) or 1.0
        defect = abs(fgz[i] - factors[i] * fz[i]) / denom
        tail = (_tail(C, k, N, math.exp(-2 * math.pi * gzs[i].imag))
                + abs(factors[i]) * _tail(C, k, N, math.exp(-2 * math.pi * zs[i].imag))) / denom
        max_tail = max(max_tail, tail)
        witnesses.append((defect, [a, b, c, d], [zs[i].real, zs[i].imag], tail))
        max_defect = max(max_defect, defect)
    witnesses.sort(key=lambda w: -w[0])
    wit = [{"defect": w[0], "gamma": w[1], "z": w[2], "tail": w[3]} for w in witnesses[:5]]
    if max_tail > tol:
        status = "inconclusive"
    elif max_defect < tol:
        status = "pass"
    else:
        status = "fail"
    return ModularityReport(float(max_defect), float(max_tail), status, len(gammas), seed, tol, wit)
