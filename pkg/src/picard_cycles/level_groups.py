"""Level subgroups of GL_3(Z_p) and the matrix identities behind the
Atkin-Lehner element.

Matrices are 3x3 tuples of Python ints (or Fractions after conjugation by
tau).  Entries are labelled

    [[a, b, c],
     [d, e, f],
     [g, h, i]]

and tau = diag(p^2, p, 1).  The GL_1 factor of an element is an inert scalar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .quad_field import FieldCtx, QuadInt, is_prime, norm, split_type

__all__ = [
    "LEVELS",
    "LevelElement",
    "identity",
    "matmul",
    "det",
    "tau",
    "tau_power",
    "conj_tau",
    "member",
    "kprime_congruence",
    "sample",
    "gamma",
    "gamma_prime",
    "verify_gamma",
    "inclusion_check",
    "normality_check",
    "padic_embedding",
    "default_varpi",
    "lemma46_conjugate",
    "lemma46_direct",
    "lemma46_check",
]

LEVELS = ("K", "Kp", "V", "K0", "K1", "V1")

Mat = tuple


def identity() -> Mat:
    return ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def matmul(A, B) -> Mat:
    return tuple(
        tuple(A[i][0] * B[0][j] + A[i][1] * B[1][j] + A[i][2] * B[2][j] for j in range(3))
        for i in range(3)
    )


def det(A) -> int:
    return (
        A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
        - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
        + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0])
    )


def _as_mat(g) -> Mat:
    g = tuple(tuple(row) for row in g)
    if len(g) != 3 or any(len(row) != 3 for row in g):
        raise ValueError("expected a 3x3 matrix")
    return g


@dataclass(frozen=True)
class LevelElement:
    g: Mat
    p: int
    r: int
    x: int = 1

    def __post_init__(self):
        object.__setattr__(self, "g", _as_mat(self.g))
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.r < 0:
            raise ValueError("r must be non-negative")
        if any(not isinstance(v, int) for row in self.g for v in row):
            raise TypeError("LevelElement entries must be integers")
        if det(self.g) % self.p == 0:
            raise ValueError("det(g) is not a unit mod p")
        if self.x % self.p == 0:
            raise ValueError("x must be a unit mod p")

    def to_json(self) -> dict:
        return {"g": [list(row) for row in self.g], "p": self.p, "r": self.r, "x": self.x}


def tau(p: int) -> Mat:
    return ((p * p, 0, 0), (0, p, 0), (0, 0, 1))


def tau_power(p: int, r: int) -> tuple:
    """tau^r as a diagonal (r may be negative; entries are Fractions then)."""
    return tuple(Fraction(p) ** (e * r) for e in (2, 1, 0))


def conj_tau(g, r: int, p: int) -> tuple:
    """tau^-r g tau^r: entry (i, j) is scaled by (t_j / t_i)^r."""
    t = tau_power(p, r)
    return tuple(tuple(Fraction(g[i][j]) * t[j] / t[i] for j in range(3)) for i in range(3))


def _is_integral(g) -> bool:
    return all(Fraction(v).denominator == 1 for row in g for v in row)


def _in_K(g, p: int, r: int) -> bool:
    if not _is_integral(g):
        return False
    g = tuple(tuple(int(v) for v in row) for row in g)
    pr, p2r = p ** r, p ** (2 * r)
    return (
        det(g) % p != 0
        and (g[1][1] - 1) % pr == 0
        and g[0][1] % pr == 0
        and g[1][2] % pr == 0
        and g[0][2] % p2r == 0
    )


def _in_K0(g, p: int, r: int) -> bool:
    if not _is_integral(g):
        return False
    g = tuple(tuple(int(v) for v in row) for row in g)
    pr = p ** r
    return det(g) % p != 0 and all(g[i][j] % pr == 0 for i, j in ((0, 1), (0, 2), (1, 2)))


def _in_K1(g, p: int, r: int) -> bool:
    if not _is_integral(g):
        return False
    g = tuple(tuple(int(v) for v in row) for row in g)
    q = p ** (2 * r)
    return all((g[i][i] - 1) % q == 0 for i in range(3)) and all(
        g[i][j] % q == 0 for i, j in ((0, 1), (0, 2), (1, 2))
    )


def member(level: str, g, p: int, r: int) -> bool:
    """Membership of the GL_3 component g in the named level group.

    K   : e = 1 mod p^r, b = f = 0 mod p^r, c = 0 mod p^2r
    Kp  : K_r intersected with tau K_r tau^-1
    V   : tau^-r K_r tau^r
    K0  : upper entries divisible by p^r
    K1  : diagonal = 1 and upper entries = 0 mod p^2r, lower entries free
    V1  : tau^-r K1_r tau^r
    """
    if isinstance(g, LevelElement):
        g = g.g
    if level == "K":
        return _in_K(g, p, r)
    if level == "Kp":
        return _in_K(g, p, r) and _in_K(conj_tau(g, 1, p), p, r)
    if level == "V":
        return _in_K(conj_tau(g, -r, p), p, r)
    if level == "K0":
        return _in_K0(g, p, r)
    if level == "K1":
        return _in_K1(g, p, r)
    if level == "V1":
        return _in_K1(conj_tau(g, -r, p), p, r)
    raise ValueError(f"unknown level {level!r}; expected one of {LEVELS}")


def kprime_congruence(g, p: int, r: int) -> bool:
    """Closed congruence form of K'_r: e = 1 mod p^r, b = f = 0 mod p^(r+1),
    c = 0 mod p^(2r+2)."""
    if not _is_integral(g):
        return False
    return (
        det(g) % p != 0
        and (g[1][1] - 1) % p ** r == 0
        and g[0][1] % p ** (r + 1) == 0
        and g[1][2] % p ** (r + 1) == 0
        and g[0][2] % p ** (2 * r + 2) == 0
    )


# Vectorized arithmetic on stacks of integer matrices (shape (n, 3, 3), int64).

def _det_mod_p(G: np.ndarray, p: int) -> np.ndarray:
    A = G % p
    d = (A[:, 0, 0] * (A[:, 1, 1] * A[:, 2, 2] - A[:, 1, 2] * A[:, 2, 1])
         - A[:, 0, 1] * (A[:, 1, 0] * A[:, 2, 2] - A[:, 1, 2] * A[:, 2, 0])
         + A[:, 0, 2] * (A[:, 1, 0] * A[:, 2, 1] - A[:, 1, 1] * A[:, 2, 0]))
    return d % p


def _vec_member(level: str, G: np.ndarray, p: int, r: int) -> np.ndarray:
    ok = _det_mod_p(G, p) != 0
    if level in ("V", "V1"):
        ok2, G = _monomial_conj(_tau_monomial(p, -r), G, p)
        return ok & ok2 & _vec_member("K" if level == "V" else "K1", G, p, r)
    if level == "Kp":
        ok2, H = _monomial_conj(_tau_monomial(p, 1), G, p)
        return ok & ok2 & _vec_member("K", G, p, r) & _vec_member("K", H, p, r)
    for (i, j), (e, res) in _shape(level, r).items():
        if res is not None:
            ok &= (G[:, i, j] - res) % p ** e == 0
    return ok


def _tau_monomial(p: int, r: int):
    """tau^r as (permutation, p-exponents); conjugation below is M^-1 G M for
    M = tau^r, matching conj_tau."""
    return (0, 1, 2), (2 * r, r, 0)


def _monomial_conj(mono, G: np.ndarray, p: int, inverse_first: bool = True):
    """Conjugate a stack by a monomial matrix M with M[i, perm[i]] = p^v[i].

    inverse_first=True gives M^-1 G M, otherwise M G M^-1.  Returns
    (integrality mask, conjugated stack); non-integral entries are left undivided.
    """
    perm, v = mono
    n = G.shape[0]
    out = np.empty_like(G)
    ok = np.ones(n, dtype=bool)
    for i in range(3):
        for j in range(3):
            if inverse_first:
                # (M^-1 G M)[perm i, perm j] = p^(v_j - v_i) G[i, j]
                src, dst, e = (i, j), (perm[i], perm[j]), v[j] - v[i]
            else:
                # (M G M^-1)[i, j] = p^(v_i - v_j) G[perm i, perm j]
                src, dst, e = (perm[i], perm[j]), (i, j), v[i] - v[j]
            col = G[:, src[0], src[1]]
            if e >= 0:
                out[:, dst[0], dst[1]] = col * p ** e
            else:
                q = p ** (-e)
                ok &= col % q == 0
                out[:, dst[0], dst[1]] = col // q
    return ok, out


# Constructive sampling: each entry is (divisibility exponent, forced residue).
def _shape(level: str, r: int) -> dict:
    free = {(i, j): (0, None) for i in range(3) for j in range(3)}
    if level == "K":
        free.update({(1, 1): (r, 1), (0, 1): (r, 0), (1, 2): (r, 0), (0, 2): (2 * r, 0)})
    elif level == "Kp":
        free.update({(1, 1): (r, 1), (0, 1): (r + 1, 0), (1, 2): (r + 1, 0), (0, 2): (2 * r + 2, 0)})
    elif level == "K0":
        free.update({(0, 1): (r, 0), (0, 2): (r, 0), (1, 2): (r, 0)})
    elif level == "K1":
        free.update({(i, i): (2 * r, 1) for i in range(3)})
        free.update({(0, 1): (2 * r, 0), (0, 2): (2 * r, 0), (1, 2): (2 * r, 0)})
    else:
        raise ValueError(f"no constructive sampler for {level!r}")
    return free


def sample_array(level: str, p: int, r: int, rng: np.random.Generator, n: int, bound: int | None = None) -> np.ndarray:
    """n random members of a level group as an int64 stack.

    Free entries are uniform in [0, bound), constrained entries are
    residue + p^e * uniform(0, bound), and non-unit determinants are rejected.
    V-groups are sampled as tau^-r-conjugates of K-group samples.
    """
    if level in ("V", "V1"):
        K = sample_array("K" if level == "V" else "K1", p, r, rng, n, bound)
        return _monomial_conj(_tau_monomial(p, r), K, p)[1]
    bound = bound or p ** (2 * r + 2)
    shape = _shape(level, r)
    chunks, have = [], 0
    while have < n:
        m = max(2 * (n - have), 16)
        G = rng.integers(0, bound, size=(m, 3, 3), dtype=np.int64)
        for (i, j), (e, res) in shape.items():
            if res is not None:
                G[:, i, j] = res + p ** e * G[:, i, j]
        G = G[_det_mod_p(G, p) != 0]
        chunks.append(G)
        have += len(G)
    return np.concatenate(chunks)[:n]


def sample(level: str, p: int, r: int, rng: np.random.Generator, n: int = 1, bound: int | None = None):
    """n random integer members of the level group, as nested tuples."""
    return [tuple(tuple(int(v) for v in row) for row in g) for g in sample_array(level, p, r, rng, n, bound)]


def gamma(r: int, p: int) -> Mat:
    if r < 1:
        raise ValueError("r must be at least 1")
    return ((0, 0, p ** (2 * r)), (1, 0, 0), (0, 1, 0))


def gamma_prime(r: int, p: int) -> Mat:
    """tau^-r gamma_r tau^r."""
    return tuple(tuple(int(v) for v in row) for row in conj_tau(gamma(r, p), r, p))


def _conj_by(gm, g, scale: int):
    """gm g gm^-1 where gm^3 = scale * 1 (so gm^-1 = gm^2 / scale); None if not integral."""
    num = matmul(matmul(gm, g), matmul(gm, gm))
    if any(v % scale for row in num for v in row):
        return None
    return tuple(tuple(v // scale for v in row) for row in num)


def _p_monomial(M, p: int):
    perm, v = [], []
    for row in M:
        j = next(j for j in range(3) if row[j])
        val, e = int(row[j]), 0
        while val % p == 0:
            val //= p
            e += 1
        if val != 1:
            raise ValueError("expected a monomial matrix with p-power entries")
        perm.append(j)
        v.append(e)
    return tuple(perm), tuple(v)


def verify_gamma(r: int, p: int, samples: int = 10_000, seed: int = 0) -> dict:
    """Items of the gamma_r lemma: (i) gamma normalizes K1, (ii) gamma' normalizes V1,
    (iii) gamma^3 = gamma'^3 = p^2r, (iv) gamma tau gamma^-1 = gamma' tau gamma'^-1 = diag(1, p^2, p)."""
    rng = np.random.default_rng(seed)
    g, gp = gamma(r, p), gamma_prime(r, p)
    s = p ** (2 * r)
    scal = tuple(tuple(s if i == j else 0 for j in range(3)) for i in range(3))
    target = ((1, 0, 0), (0, p * p, 0), (0, 0, p))
    report = {"p": p, "r": r, "samples": samples, "seed": seed, "items": {}}

    def count(level, gm):
        G = sample_array(level, p, r, rng, samples)
        integral, C = _monomial_conj(_p_monomial(gm, p), G, p, inverse_first=False)
        good = integral & _vec_member(level, C, p, r)
        bad = None if good.all() else G[~good][0].tolist()
        return int(good.sum()), bad

    ok1, bad1 = count("K1", g)
    report["items"]["i"] = {"pass": ok1 == samples, "passed": ok1, "counterexample": bad1}
    ok2, bad2 = count("V1", gp)
    report["items"]["ii"] = {"pass": ok2 == samples, "passed": ok2, "counterexample": bad2}
    g3 = matmul(matmul(g, g), g)
    gp3 = matmul(matmul(gp, gp), gp)
    report["items"]["iii"] = {"pass": g3 == scal and gp3 == scal}
    t = tau(p)
    iv1, iv2 = _conj_by(g, t, s), _conj_by(gp, t, s)
    report["items"]["iv"] = {"pass": iv1 == target and iv2 == target,
                             "value": [list(row) for row in iv1] if iv1 else None}
    report["pass"] = all(v["pass"] for v in report["items"].values())
    return report


def inclusion_check(p: int, r: int, samples: int = 10_000, seed: int = 0) -> dict:
    """K_{r+1} in K'_r in K_r, and K'_r = K_r cap tau K_r tau^-1 (checked on
    constructive members of each group and on valuation-structured matrices)."""
    rng = np.random.default_rng(seed)
    res = {}
    G = sample_array("K", p, r + 1, rng, samples)
    res["K_{r+1} <= K'_r"] = int((~_vec_member("Kp", G, p, r)).sum())
    G = sample_array("Kp", p, r, rng, samples)
    res["K'_r <= K_r"] = int((~_vec_member("K", G, p, r)).sum())
    G = _structured(p, r, rng, samples)
    lhs = np.array([kprime_congruence(tuple(map(tuple, g.tolist())), p, r) for g in G])
    rhs = _vec_member("Kp", G, p, r)
    res["K'_r = K_r cap tau K_r tau^-1"] = int((lhs != rhs).sum())
    res["K'_r both sides true"] = int(rhs.sum())
    fails = {k: v for k, v in res.items() if k != "K'_r both sides true"}
    return {"p": p, "r": r, "samples": samples, "failures": fails,
            "members_seen": res["K'_r both sides true"], "pass": not any(fails.values())}


def _structured(p: int, r: int, rng, n: int) -> np.ndarray:
    """Matrices whose constrained entries have random exact p-adic valuations
    around the congruence thresholds, so both membership outcomes occur."""
    top = 2 * r + 3
    out, have = [], 0
    while have < n:
        m = 2 * n
        G = rng.integers(0, p ** 2, size=(m, 3, 3), dtype=np.int64)
        units = rng.integers(1, p, size=(m, 3, 3), dtype=np.int64)
        vals = rng.integers(0, top + 1, size=(m, 3, 3), dtype=np.int64)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            G[:, i, j] = np.where(vals[:, i, j] == top, 0, units[:, i, j] * p ** vals[:, i, j])
        ev = rng.integers(max(r - 1, 0), r + 2, size=m)
        G[:, 1, 1] = 1 + units[:, 1, 1] * p ** ev
        G = G[_det_mod_p(G, p) != 0]
        out.append(G)
        have += len(G)
    return np.concatenate(out)[:n]


def _conj(k, g, p, modulus):
    """k g k^-1 over Z/modulus (k invertible mod p)."""
    from . import modmat

    K = modmat.as_modmat(k, modulus)
    Ki = modmat.inverse_mod(K, modulus, p)
    c = modmat.matmul(modmat.matmul(K, modmat.as_modmat(g, modulus), modulus), Ki, modulus)
    return tuple(tuple(int(v) for v in row) for row in c)


def normality_check(inner: str, outer: str, p: int, r: int, pairs: int = 1000, seed: int = 0) -> dict:
    """Conjugate random members of ``inner`` by random members of ``outer`` and
    test membership in ``inner`` (arithmetic mod p^(2r+4), enough for every
    congruence involved)."""
    rng = np.random.default_rng(seed)
    modulus = p ** (2 * r + 4)
    inners = sample(inner, p, r, rng, pairs)
    outers = sample(outer, p, r, rng, pairs)
    failures, example = 0, None
    for h, k in zip(inners, outers):
        c = _conj(k, h, p, modulus)
        if not member(inner, c, p, r):
            failures += 1
            if example is None:
                example = {"inner": [list(x) for x in h], "outer": [list(x) for x in k]}
    return {"inner": inner, "outer": outer, "p": p, "r": r, "pairs": pairs,
            "failures": failures, "example": example, "pass": failures == 0}


# Lemma on u^-1 Q_H^0 u

def padic_embedding(ctx: FieldCtx, p: int, s: int) -> int:
    """Image of omega in Z/p^s: Hensel lift of the smallest root of its minimal
    polynomial mod p (p split, p odd)."""
    if split_type(ctx, p) != "split":
        raise ValueError(f"p={p} must split in K")
    t, n = ctx.omega_trace, ctx.omega_norm
    f = lambda z: z * z - t * z + n  # noqa: E731
    root = next(z for z in range(p) if f(z) % p == 0)
    mod = p
    for _ in range(1, s):
        mod *= p
        deriv = (2 * root - t) % p
        root = (root - f(root) * pow(deriv, -1, mod)) % mod
    return root % p ** s


def default_varpi(ctx: FieldCtx, p: int) -> list[QuadInt]:
    """Generators of the primes above p when they are principal: both conjugates
    of the first element of norm p found by search (empty list otherwise)."""
    bound = int(2 * p ** 0.5) + 3
    for a in sorted(range(-bound, bound + 1), key=lambda t: (abs(t), t < 0)):
        for b in range(1, bound + 1):
            z = QuadInt(a, b)
            if norm(ctx, z) == p:
                return [z, z.conj(ctx)]
    return []


def _embed(ctx: FieldCtx, z: QuadInt, p: int, s: int) -> int:
    return (z.a + z.b * padic_embedding(ctx, p, s)) % p ** s


def _delta_p(ctx: FieldCtx, p: int, s: int) -> int:
    w = padic_embedding(ctx, p, s)
    return (2 * w - 1) % p ** s if ctx.half_omega else w


def lemma46_conjugate(a, b, x, delta, varpi, modulus) -> Mat:
    """Closed form of u^-1 (h, x) u for h = [[a, b], [0, 1]], embedded as diag-block (h, x)."""
    return (
        (a % modulus, ((a - 1) * delta + b) % modulus, (a * varpi + b - delta + x * (delta - varpi)) % modulus),
        (0, 1, (1 - x) % modulus),
        (0, 0, x % modulus),
    )


def lemma46_direct(a, b, x, delta, varpi, modulus) -> Mat:
    """u^-1 h u by explicit matrix multiplication, u = [[1, delta, varpi], [0, 1, 1], [0, 0, 1]]."""
    u = ((1, delta, varpi), (0, 1, 1), (0, 0, 1))
    uinv = ((1, -delta, delta - varpi), (0, 1, -1), (0, 0, 1))
    h = ((a, b, 0), (0, 1, 0), (0, 0, x))
    m = matmul(matmul(uinv, h), u)
    return tuple(tuple(v % modulus for v in row) for row in m)


def lemma46_check(ctx: FieldCtx, varpi: QuadInt, p: int = 3, s: int = 5, max_report: int = 64) -> dict:
    """Exhaustive sweep of (a, b, x) over Z/p^s (a, x units) for which the
    closed-form conjugate is lower triangular."""
    modulus = p ** s
    delta = _delta_p(ctx, p, s)
    vp = _embed(ctx, varpi, p, s)
    count, found = kernels.lemma46_sweep(modulus, p, delta, vp, max_report)
    solutions = [tuple(t) for t in found]
    return {
        "D": ctx.D,
        "p": p,
        "s": s,
        "varpi": [varpi.a, varpi.b],
        "delta_p": delta,
        "varpi_p": vp,
        "count": int(count),
        "solutions": [list(t) for t in solutions],
        "pass": int(count) == 1 and solutions == [(1, 0, 1)],
        "backend": kernels.BACKEND,
    }
