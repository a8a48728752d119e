"""Finite-level model of the Lambda_r-valued twisted Poincare pairing.

Gamma_r is the group of residues 1 + p*t mod p^r (order p^(r-1)); element t
of the index set stands for 1 + p*t.  Lambda_r = (Z/p^M)[Gamma_r].  Finite
models of the cohomology towers are supplied as PairingContext objects (one
per level) linked by pushforward matrices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import modmat
from .qexp import QExpansion
from .quad_field import is_prime

__all__ = [
    "GammaGroup",
    "gamma_group",
    "GroupRingElt",
    "PairingContext",
    "PairingTower",
    "BigClass",
    "LambdaExpansion",
    "pair_r",
    "check_lambda_relation",
    "normalized_up",
    "trivial_tower",
    "regular_tower",
    "project_tower",
    "check_tower",
    "build_tower_from_top",
    "phi_expansion",
    "check_coherence",
    "nu_specialize",
    "norm_element",
    "bind_trivial_context",
]

_INT64_SAFE = 2 ** 62


class GammaGroup:
    """Gamma_r = (1 + pZ)/(1 + p^r Z) with multiplication and inverse tables."""

    def __init__(self, p: int, r: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if r < 1:
            raise ValueError("r must be at least 1")
        self.p, self.r = p, r
        self.order = p ** (r - 1)
        mod = p ** r
        self.elements = np.array([(1 + p * t) % mod for t in range(self.order)], dtype=np.int64)
        prod = (self.elements[:, None] * self.elements[None, :]) % mod
        self.table = ((prod - 1) % mod) // p
        ident = self.table  # table[i, j] = index of e_i e_j
        self.inverse = np.empty(self.order, dtype=np.int64)
        self.inverse[np.nonzero(ident == 0)[0]] = np.nonzero(ident == 0)[1]
        # reduction Gamma_r -> Gamma_{r-1}
        if r > 1:
            self.reduce = np.arange(self.order, dtype=np.int64) % p ** (r - 2)
        else:
            self.reduce = None

    def index(self, residue: int) -> int:
        mod = self.p ** self.r
        residue %= mod
        if residue % self.p != 1 % self.p:
            raise ValueError(f"{residue} is not 1 mod p")
        return ((residue - 1) % mod) // self.p

    def lift(self, t: int) -> int:
        return int(self.elements[t])


@lru_cache(maxsize=None)
def gamma_group(p: int, r: int) -> GammaGroup:
    return GammaGroup(p, r)


def _dtype(m: int, length: int = 1):
    return np.int64 if m * m * max(length, 1) < _INT64_SAFE else object


def _vec(x, m: int) -> np.ndarray:
    a = np.array([int(v) % m for v in np.asarray(x).ravel()], dtype=object)
    return a.astype(np.int64) if m < 2 ** 31 else a


def _mat(A, m: int) -> np.ndarray:
    A = np.asarray(A)
    a = np.array([[int(v) % m for v in row] for row in A], dtype=object).reshape(A.shape)
    return a.astype(np.int64) if m < 2 ** 31 else a


def _mv(A: np.ndarray, x: np.ndarray, m: int) -> np.ndarray:
    if A.shape[1] and _dtype(m, A.shape[1]) is np.int64 and A.dtype != object:
        return (A @ x) % m
    return np.array((A.astype(object) @ x.astype(object)) % m).astype(A.dtype if m < 2 ** 31 else object)


def _mm(A: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    if _dtype(m, A.shape[1]) is np.int64 and A.dtype != object:
        return (A @ B) % m
    return np.array((A.astype(object) @ B.astype(object)) % m).astype(A.dtype if m < 2 ** 31 else object)


class GroupRingElt:
    """Element of (Z/p^M)[Gamma_r] as a coefficient vector indexed by t."""

    __slots__ = ("p", "r", "M", "coeffs")

    def __init__(self, p: int, r: int, M: int, coeffs=None):
        self.p, self.r, self.M = p, r, M
        n = p ** (r - 1)
        m = p ** M
        if coeffs is None:
            coeffs = np.zeros(n, dtype=np.int64 if m < 2 ** 31 else object)
        else:
            coeffs = _vec(coeffs, m)
            if coeffs.shape != (n,):
                raise ValueError(f"expected {n} coefficients")
        self.coeffs = coeffs

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    @property
    def group(self) -> GammaGroup:
        return gamma_group(self.p, self.r)

    @classmethod
    def basis(cls, p, r, M, t: int) -> "GroupRingElt":
        e = cls(p, r, M)
        e.coeffs[t] = 1
        return e

    def _check(self, other):
        if (self.p, self.r, self.M) != (other.p, other.r, other.M):
            raise ValueError("group ring elements live in different rings")

    def __add__(self, other):
        self._check(other)
        return GroupRingElt(self.p, self.r, self.M, (self.coeffs + other.coeffs) % self.modulus)

    def __sub__(self, other):
        self._check(other)
        return GroupRingElt(self.p, self.r, self.M, (self.coeffs - other.coeffs) % self.modulus)

    def __neg__(self):
        return GroupRingElt(self.p, self.r, self.M, (-self.coeffs) % self.modulus)

    def scale(self, c: int) -> "GroupRingElt":
        m = self.modulus
        return GroupRingElt(self.p, self.r, self.M, (self.coeffs * (int(c) % m)) % m)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        m = self.modulus
        table = self.group.table
        out = np.zeros_like(self.coeffs)
        for i in np.nonzero(self.coeffs)[0]:
            out[table[i]] = (out[table[i]] + self.coeffs[i] * other.coeffs) % m
        return GroupRingElt(self.p, self.r, self.M, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, GroupRingElt)
            and (self.p, self.r, self.M) == (other.p, other.r, other.M)
            and all(int(a) == int(b) for a, b in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.p, self.r, self.M, tuple(int(c) for c in self.coeffs)))

    def is_zero(self) -> bool:
        return not any(int(c) for c in self.coeffs)

    def project(self) -> "GroupRingElt":
        """p_r : Lambda_r -> Lambda_{r-1}, [sigma] -> [sigma mod p^(r-1)]."""
        if self.r == 1:
            raise ValueError("no level below r = 1")
        m = self.modulus
        out = np.zeros(self.p ** (self.r - 2), dtype=self.coeffs.dtype)
        np.add.at(out, self.group.reduce, self.coeffs) if out.dtype != object else _add_at(out, self.group.reduce, self.coeffs)
        return GroupRingElt(self.p, self.r - 1, self.M, out % m)

    def augmentation(self) -> int:
        return int(sum(int(c) for c in self.coeffs) % self.modulus)

    def character(self, k: int) -> int:
        """Image under [sigma] -> sigma^k, sigma lifted to 1 + p*t in [1, p^r)."""
        m = self.modulus
        g = self.group
        return sum(int(c) * pow(g.lift(t), k, m) for t, c in enumerate(self.coeffs) if c) % m

    def to_json(self) -> dict:
        return {"p": self.p, "r": self.r, "M": self.M, "coeffs": [int(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "GroupRingElt":
        return cls(int(data["p"]), int(data["r"]), int(data["M"]), data["coeffs"])

    def __repr__(self):
        terms = [f"{int(c)}[{self.group.lift(t)}]" for t, c in enumerate(self.coeffs) if c]
        return "GroupRingElt(" + (" + ".join(terms) or "0") + f"; p={self.p}, r={self.r})"


def _add_at(out, idx, vals):
    for i, v in zip(idx, vals):
        out[i] += v


def norm_element(p: int, r: int, M: int) -> GroupRingElt:
    return GroupRingElt(p, r, M, np.ones(p ** (r - 1), dtype=np.int64))


@dataclass
class PairingContext:
    """Level-r finite model: module (Z/p^M)^d with a bilinear form, diamond
    action of Gamma_r, lambda_r and U_p'.

    The diamond action is either ``diamond_perm`` (shape (|Gamma_r|, d): basis
    vector i goes to basis vector perm[t, i]) or ``diamond_mats`` (shape
    (|Gamma_r|, d, d)).  ``ops`` holds extra Hecke operators; those named in
    ``self_adjoint`` are declared self-adjoint and commuting with the rest.
    """

    p: int
    r: int
    M: int
    form: np.ndarray
    lam: np.ndarray
    up: np.ndarray
    diamond_perm: np.ndarray | None = None
    diamond_mats: np.ndarray | None = None
    ops: dict = field(default_factory=dict)
    self_adjoint: tuple = ()
    lam_pull: np.ndarray | None = None
    up_star: np.ndarray | None = None

    def __post_init__(self):
        m = self.modulus
        self.form = _mat(self.form, m)
        self.lam = _mat(self.lam, m)
        self.up = _mat(self.up, m)
        d = self.rank
        n = self.p ** (self.r - 1)
        for name in ("form", "lam", "up"):
            if getattr(self, name).shape != (d, d):
                raise ValueError(f"{name} must be {d}x{d}")
        if self.diamond_perm is None and self.diamond_mats is None:
            self.diamond_perm = np.tile(np.arange(d, dtype=np.int64), (n, 1))
        if self.diamond_perm is not None:
            self.diamond_perm = np.asarray(self.diamond_perm, dtype=np.int64)
            if self.diamond_perm.shape != (n, d):
                raise ValueError("diamond_perm has the wrong shape")
        else:
            self.diamond_mats = np.stack([_mat(a, m) for a in self.diamond_mats])
            if self.diamond_mats.shape != (n, d, d):
                raise ValueError("diamond_mats has the wrong shape")
        self.ops = {k: _mat(v, m) for k, v in self.ops.items()}
        for name in ("lam_pull", "up_star"):
            if getattr(self, name) is not None:
                setattr(self, name, _mat(getattr(self, name), m))

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    @property
    def rank(self) -> int:
        return self.form.shape[0]

    def vector(self, x) -> np.ndarray:
        x = _vec(x, self.modulus)
        if x.shape != (self.rank,):
            raise ValueError(f"expected a vector of length {self.rank}")
        return x

    def diamond(self, t: int, x: np.ndarray) -> np.ndarray:
        if self.diamond_perm is not None:
            out = np.zeros_like(x)
            out[self.diamond_perm[t]] = x
            return out
        return _mv(self.diamond_mats[t], x, self.modulus)

    def diamond_matrix(self, t: int) -> np.ndarray:
        if self.diamond_mats is not None:
            return self.diamond_mats[t]
        d = self.rank
        A = np.zeros((d, d), dtype=self.form.dtype)
        A[self.diamond_perm[t], np.arange(d)] = 1
        return A

    def bilinear(self, x, y) -> int:
        m = self.modulus
        return int(sum(int(a) * int(b) for a, b in zip(x, _mv(self.form, y, m))) % m)

    def apply(self, A: np.ndarray, x) -> np.ndarray:
        return _mv(A, x, self.modulus)

    def to_json(self) -> dict:
        d = {
            "schema": "picard-cycles/pairing-context/1",
            "p": self.p,
            "r": self.r,
            "M": self.M,
            "form": self.form.tolist(),
            "lam": self.lam.tolist(),
            "up": self.up.tolist(),
            "ops": {k: v.tolist() for k, v in self.ops.items()},
            "self_adjoint": list(self.self_adjoint),
        }
        if self.diamond_perm is not None:
            d["diamond_perm"] = self.diamond_perm.tolist()
        else:
            d["diamond_mats"] = self.diamond_mats.tolist()
        for name in ("lam_pull", "up_star"):
            if getattr(self, name) is not None:
                d[name] = getattr(self, name).tolist()
        return _plain(d)

    @classmethod
    def from_json(cls, data: dict) -> "PairingContext":
        kw = {k: data[k] for k in ("diamond_perm", "diamond_mats", "lam_pull", "up_star") if k in data}
        return cls(int(data["p"]), int(data["r"]), int(data["M"]), data["form"], data["lam"], data["up"],
                   ops=dict(data.get("ops", {})), self_adjoint=tuple(data.get("self_adjoint", ())), **kw)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def pair_r(ctx: PairingContext, x, y) -> GroupRingElt:
    """sum over sigma in Gamma_r of form(<sigma> x, lambda U_p'^r y) [sigma^-1]."""
    m = ctx.modulus
    x, y = ctx.vector(x), ctx.vector(y)
    w = y
    for _ in range(ctx.r):
        w = ctx.apply(ctx.up, w)
    w = ctx.apply(ctx.lam, w)
    fw = _mv(ctx.form, w, m)
    g = gamma_group(ctx.p, ctx.r)
    out = GroupRingElt(ctx.p, ctx.r, ctx.M)
    if ctx.diamond_perm is not None:
        # form(<sigma>x, w) = sum_i x_i fw[perm[sigma, i]]
        if _dtype(m, ctx.rank) is np.int64 and fw.dtype != object:
            vals = (fw[ctx.diamond_perm] * x[None, :]).sum(axis=1) % m
        else:
            vals = [sum(int(a) * int(b) for a, b in zip(x, fw[ctx.diamond_perm[t]])) % m for t in range(g.order)]
    else:
        vals = [sum(int(a) * int(b) for a, b in zip(ctx.diamond(t, x), fw)) % m for t in range(g.order)]
    for t in range(g.order):
        out.coeffs[g.inverse[t]] = (out.coeffs[g.inverse[t]] + int(vals[t])) % m
    return out


def check_lambda_relation(ctx: PairingContext) -> bool:
    """U_p' = lambda^* U_p'^* lambda_* when the context supplies the adjoint data."""
    if ctx.lam_pull is None or ctx.up_star is None:
        raise ValueError("context has no lambda pullback / U_p^* data")
    m = ctx.modulus
    return np.array_equal(_mm(_mm(ctx.lam_pull, ctx.up_star, m), ctx.lam, m), ctx.up)


def normalized_up(up, p: int, M: int) -> np.ndarray:
    """U_p' = U_p / p, refusing models where U_p is not divisible by p.

    U_p is given over Z/p^(M+1) so that the quotient is known mod p^M.
    """
    A = np.asarray(up, dtype=object)
    if any(int(v) % p for v in A.ravel()):
        raise ValueError("U_p is not divisible by p in this model")
    return _mat((A // p) % p ** M, p ** M)


@dataclass
class PairingTower:
    """Contexts for r = 1..R and pushforwards pi[r-1]: level r+1 -> level r."""

    levels: list
    pi: list

    def __post_init__(self):
        if len(self.pi) != len(self.levels) - 1:
            raise ValueError("need one pushforward per rung")
        for r, ctx in enumerate(self.levels, start=1):
            if ctx.r != r:
                raise ValueError("levels must be listed for r = 1, 2, ...")
        self.pi = [_mat(P, self.modulus) for P in self.pi]
        for r, P in enumerate(self.pi, start=1):
            if P.shape != (self.levels[r - 1].rank, self.levels[r].rank):
                raise ValueError(f"pushforward {r + 1} -> {r} has the wrong shape")

    @property
    def p(self) -> int:
        return self.levels[0].p

    @property
    def M(self) -> int:
        return self.levels[0].M

    @property
    def R(self) -> int:
        return len(self.levels)

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    def level(self, r: int) -> PairingContext:
        return self.levels[r - 1]

    def push(self, r: int, x) -> np.ndarray:
        """pi_{r,*}: level r -> level r-1."""
        return _mv(self.pi[r - 2], _vec(x, self.modulus), self.modulus)

    def to_json(self) -> dict:
        return {
            "schema": "picard-cycles/pairing-tower/1",
            "levels": [c.to_json() for c in self.levels],
            "pi": [P.tolist() for P in self.pi],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PairingTower":
        if data.get("schema") == "picard-cycles/pairing-context/1":
            return cls([PairingContext.from_json(data)], [])
        return cls([PairingContext.from_json(c) for c in data["levels"]], data["pi"])


def trivial_tower(p: int, M: int = 8, R: int = 4) -> PairingTower:
    """Rank-1 context at every level: trivial diamond action, form xy,
    lambda = U_p' = 1, identity pushforwards."""
    levels = [PairingContext(p, r, M, [[1]], [[1]], [[1]]) for r in range(1, R + 1)]
    return PairingTower(levels, [[[1]] for _ in range(R - 1)])


def regular_tower(p: int, M: int = 8, R: int = 4, d0: int = 2, seed: int = 0, u: int | None = None,
                  hecke_terms: int = 2) -> PairingTower:
    """Regular-representation model: module Lambda_r^d0, diamonds translate,
    lambda permutes the d0 copies, U_p' = u (a unit), and
    form_r(x, y) = u^-r sum_tau x_tau^T B y_tau with B symmetric and
    lambda-invariant.  Pushforwards sum over the fibres of Gamma_{r+1} -> Gamma_r.
    One extra self-adjoint operator T = T0 (x) A is attached, where
    T0 = sum c_j (P^j + P^-j) and A is convolution by sum a_s ([s] + [s^-1]).
    """
    rng = np.random.default_rng(seed)
    m = p ** M
    if u is None:
        u = int(rng.integers(1, m))
        while u % p == 0:
            u = int(rng.integers(1, m))
    if u % p == 0:
        raise ValueError("U_p' must be a unit")
    perm = rng.permutation(d0)
    P = np.zeros((d0, d0), dtype=object)
    P[perm, np.arange(d0)] = 1
    Pinv = P.T.copy()

    def sym_poly(coeffs):
        acc = np.zeros((d0, d0), dtype=object)
        Pj, Pmj = np.eye(d0, dtype=object).astype(object), np.eye(d0, dtype=object).astype(object)
        for j, c in enumerate(coeffs):
            acc = acc + c * (Pj + Pmj) if j else acc + c * Pj
            Pj, Pmj = Pj.dot(P), Pmj.dot(Pinv)
        return acc % m

    while True:
        B = sym_poly([int(c) for c in rng.integers(0, m, size=hecke_terms + 1)])
        if modmat.is_unit_matrix(B, p):
            break
    T0 = sym_poly([int(c) for c in rng.integers(0, m, size=hecke_terms + 1)])
    levels, pis = [], []
    for r in range(1, R + 1):
        g = gamma_group(p, r)
        n = g.order
        d = d0 * n
        # basis index k*n + tau
        dperm = np.empty((n, d), dtype=np.int64)
        for s in range(n):
            for k in range(d0):
                dperm[s, k * n:(k + 1) * n] = k * n + g.table[s]
        scale = pow(u, -r, m)
        form = np.kron(B, np.eye(n, dtype=object)).astype(object) * scale % m
        lam = np.kron(P, np.eye(n, dtype=object)).astype(object)
        up = np.eye(d, dtype=object) * u % m
        a = [int(c) for c in rng.integers(0, m, size=n)]
        conv = np.zeros((n, n), dtype=object)
        for s in range(n):
            for tt in range(n):
                conv[g.table[s, tt], tt] += a[s]
                conv[g.table[g.inverse[s], tt], tt] += a[s]
        T = np.kron(T0, conv % m) % m
        levels.append(PairingContext(p, r, M, form, lam, up, diamond_perm=dperm, ops={"T": T},
                                     self_adjoint=("T",), lam_pull=np.kron(Pinv, np.eye(n, dtype=object)),
                                     up_star=lam.dot(up).dot(np.kron(Pinv, np.eye(n, dtype=object))) % m))
        if r > 1:
            prev = p ** (r - 2)
            pi = np.zeros((d0 * prev, d), dtype=object)
            for k in range(d0):
                for tt in range(n):
                    pi[k * prev + g.reduce[tt], k * n + tt] = 1
            pis.append(pi)
    return PairingTower(levels, pis)


@dataclass
class BigClass:
    """A tower (x_1, ..., x_R) of classes, x_r in the level-r module."""

    tower: list

    def to_json(self) -> dict:
        return {"schema": "picard-cycles/big-class/1", "tower": [[int(v) for v in x] for x in self.tower]}

    @classmethod
    def from_json(cls, data: dict) -> "BigClass":
        return cls([np.array(x, dtype=object) for x in data["tower"]])


def _eq(a, b) -> bool:
    return len(a) == len(b) and all(int(x) == int(y) for x, y in zip(a, b))


def check_tower(T: PairingTower, b: BigClass) -> tuple[bool, int | None]:
    """pi_{r+1,*} x_{r+1} = U_p' x_r at every rung; returns (ok, first bad r)."""
    if len(b.tower) != T.R:
        raise ValueError(f"tower has {len(b.tower)} rungs, expected {T.R}")
    m = T.modulus
    for r in range(1, T.R):
        lhs = T.push(r + 1, b.tower[r])
        rhs = T.level(r).apply(T.level(r).up, _vec(b.tower[r - 1], m))
        if not _eq(lhs, rhs):
            return False, r
    return True, None


def _up_inverse(ctx: PairingContext) -> np.ndarray:
    return _mat(modmat.inverse_mod(ctx.up.astype(object), ctx.modulus, ctx.p), ctx.modulus)


def project_tower(T: PairingTower, b: BigClass, r: int) -> np.ndarray:
    """Normalized level-r component U_p'^-r x_r."""
    ctx = T.level(r)
    inv = _up_inverse(ctx)
    x = _vec(b.tower[r - 1], ctx.modulus)
    for _ in range(r):
        x = ctx.apply(inv, x)
    return x


def build_tower_from_top(T: PairingTower, x_top) -> BigClass:
    """x_R = x_top and x_r = U_p'^-1 pi_* x_{r+1}."""
    xs = [_vec(x_top, T.modulus)]
    for r in range(T.R - 1, 0, -1):
        ctx = T.level(r)
        xs.append(ctx.apply(_up_inverse(ctx), T.push(r + 1, xs[-1])))
    return BigClass(xs[::-1])


@dataclass
class LambdaExpansion:
    """coeffs[r][n] in Lambda_r for r = 1..R, n = 0..N (coefficient 0 is zero)."""

    p: int
    M: int
    coeffs: dict
    D: int | None = None
    character: int | None = None

    @property
    def N(self) -> int:
        return len(next(iter(self.coeffs.values()))) - 1

    def to_json(self) -> dict:
        return {
            "schema": "picard-cycles/lambda-expansion/1",
            "p": self.p,
            "M": self.M,
            "D": self.D,
            "character": self.character,
            "coeffs": {str(r): [[int(c) for c in e.coeffs] for e in row] for r, row in self.coeffs.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "LambdaExpansion":
        p, M = int(data["p"]), int(data["M"])
        coeffs = {int(r): [GroupRingElt(p, int(r), M, c) for c in row] for r, row in data["coeffs"].items()}
        return cls(p, M, coeffs, data.get("D"), data.get("character"))


def phi_expansion(T: PairingTower, xis: dict, zeta: BigClass, N: int, D: int | None = None,
                  character: int | None = None) -> LambdaExpansion:
    """Coefficient at q^n and level r: pair_r of the normalized components
    U_p'^-r xi_{n,r} and U_p'^-r zeta_r.  Incompatible towers are rejected."""
    ok, bad = check_tower(T, zeta)
    if not ok:
        raise ValueError(f"zeta is not a compatible tower (rung {bad})")
    for n, b in xis.items():
        ok, bad = check_tower(T, b)
        if not ok:
            raise ValueError(f"xi_{n} is not a compatible tower (rung {bad})")
    coeffs = {}
    for r in range(1, T.R + 1):
        ctx = T.level(r)
        z = project_tower(T, zeta, r)
        row = [GroupRingElt(T.p, r, T.M)]
        for n in range(1, N + 1):
            if n in xis:
                row.append(pair_r(ctx, project_tower(T, xis[n], r), z))
            else:
                row.append(GroupRingElt(T.p, r, T.M))
        coeffs[r] = row
    return LambdaExpansion(T.p, T.M, coeffs, D, character)


def check_coherence(phi: LambdaExpansion) -> list:
    """(n, r) pairs where p_{r+1}(coefficient at r+1) differs from the coefficient at r."""
    bad = []
    R = max(phi.coeffs)
    for r in range(1, R):
        for n in range(phi.N + 1):
            if phi.coeffs[r + 1][n].project() != phi.coeffs[r][n]:
                bad.append((n, r))
    return bad


def nu_specialize(phi: LambdaExpansion, k: int, r: int, moments: dict | None = None) -> QExpansion:
    """Apply [sigma] -> sigma^(2k) to the level-r coefficients.

    ``moments`` optionally maps n to a base b_n; the coefficient is then
    multiplied by b_n^k.  Output weight 2k+3, level p^r D.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if r not in phi.coeffs:
        raise ValueError(f"level r={r} not present")
    m = phi.p ** phi.M
    out = []
    for n, e in enumerate(phi.coeffs[r]):
        c = e.character(2 * k)
        if moments is not None and n in moments:
            c = c * pow(int(moments[n]) % m, k, m) % m
        out.append(c)
    level = phi.p ** r * (phi.D or 1)
    return QExpansion(out, weight=2 * k + 3, level=level, character=phi.character, modulus=m)


def bind_trivial_context(D: int, p: int, M: int = 8, R: int = 2, N: int = 100):
    """Bind the rank-1 trivial context to the cusp coefficients of the default
    series for D: xi_{n,r} = coefficient mod p^M at every level, zeta = 1.

    Returns (tower, phi, moments, params), where moments[n] = n / (d(L) d(L^dual)).
    """
    from fractions import Fraction

    from .cogdell_series import cusp_series, default_params, moment_base
    from .hida import to_residue

    params = default_params(D, N=N)
    series = cusp_series(params)
    m = p ** M
    T = trivial_tower(p, M, R)
    xis = {n: BigClass([[to_residue(series[n], m)]] * R) for n in range(1, N + 1)}
    zeta = BigClass([[1]] * R)
    phi = phi_expansion(T, xis, zeta, N, D=D, character=params.ctx.disc)
    moments = {n: to_residue(Fraction(moment_base(params.form, n)), m) for n in range(1, N + 1)}
    return T, phi, moments, params
