"""Lambda-adic machinery on q-expansions: arithmetic points, Iwasawa functions,
families and their specializations, and the ordinary projector on finite models."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from . import modmat
from .qexp import QExpansion, character_value
from .quad_field import FieldCtx, is_prime, make_field, split_type

__all__ = [
    "PadicCtx",
    "ArithPoint",
    "IwasawaFunction",
    "Constant",
    "PolyT",
    "DivisorSum",
    "Product",
    "Rule",
    "LambdaFamily",
    "FiniteUpModel",
    "ProjectorError",
    "ordinary_projector",
    "unit_root_count",
    "eisenstein_family",
    "specialize",
    "congruence_check",
    "scale_family",
    "to_residue",
]


class ProjectorError(RuntimeError):
    """The projector iteration did not stabilize within its cap."""


@dataclass(frozen=True)
class PadicCtx:
    p: int
    M: int = 20
    field: FieldCtx | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.M < 1:
            raise ValueError("precision M must be at least 1")
        if self.field is not None and split_type(self.field, self.p) != "split":
            raise ValueError(f"p={self.p} does not split in Q(sqrt(-{self.field.D}))")

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    def to_json(self) -> dict:
        d = {"p": self.p, "M": self.M}
        if self.field is not None:
            d["D"] = self.field.D
        return d


def to_residue(x, m: int) -> int:
    x = Fraction(x)
    if gcd(x.denominator, m) != 1:
        raise ZeroDivisionError(f"{x} has a denominator that is not a unit mod {m}")
    return x.numerator * pow(x.denominator, -1, m) % m


@dataclass(frozen=True)
class ArithPoint:
    """Weight-k point with trivial finite character: gamma -> gamma^k on 1 + pZ_p."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("weights must be non-negative")

    def __call__(self, y: int, pctx: PadicCtx) -> int:
        if y % pctx.p != 1 % pctx.p:
            raise ValueError("arithmetic points are evaluated on 1 + pZ_p")
        return pow(y, self.k, pctx.modulus)

    def at_generator(self, pctx: PadicCtx) -> int:
        return self(1 + pctx.p, pctx)


class IwasawaFunction:
    """A function of the weight k with values in Z/p^M."""

    def __call__(self, k: int, pctx: PadicCtx) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no closed-form descriptor")

    def __mul__(self, other: "IwasawaFunction") -> "IwasawaFunction":
        return Product(self, other)


@dataclass(frozen=True)
class Constant(IwasawaFunction):
    c: Fraction

    def __call__(self, k, pctx):
        return to_residue(self.c, pctx.modulus)

    def to_json(self):
        return {"type": "const", "c": str(Fraction(self.c))}


@dataclass(frozen=True)
class PolyT(IwasawaFunction):
    """sum_i c_i T^i evaluated at T = (1 + p)^k - 1."""

    coeffs: tuple

    def __call__(self, k, pctx):
        m = pctx.modulus
        t = (pow(1 + pctx.p, k, m) - 1) % m
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * t + to_residue(c, m)) % m
        return acc

    def to_json(self):
        return {"type": "polyT", "coeffs": [str(Fraction(c)) for c in self.coeffs]}


@dataclass(frozen=True)
class DivisorSum(IwasawaFunction):
    """sum_{d | n, p does not divide d} chi(d) d^{k + shift}."""

    n: int
    disc: int | None
    shift: int = -1

    def __call__(self, k, pctx):
        m, p = pctx.modulus, pctx.p
        e = k + self.shift
        if e < 0:
            raise ValueError("negative exponent in divisor sum")
        total = 0
        for d in _divisors(self.n):
            if d % p == 0:
                continue
            c = 1 if self.disc is None else character_value(self.disc, abs(self.disc), d)
            if c:
                total += c * pow(d, e, m)
        return total % m

    def to_json(self):
        return {"type": "divisor_sum", "n": self.n, "disc": self.disc, "shift": self.shift}


@dataclass(frozen=True)
class Product(IwasawaFunction):
    left: IwasawaFunction
    right: IwasawaFunction

    def __call__(self, k, pctx):
        return self.left(k, pctx) * self.right(k, pctx) % pctx.modulus

    def to_json(self):
        return {"type": "product", "factors": [self.left.to_json(), self.right.to_json()]}


@dataclass(frozen=True)
class Rule(IwasawaFunction):
    """Arbitrary callable rule (not serializable); used for ad hoc families."""

    fn: object
    name: str = "rule"

    def __call__(self, k, pctx):
        return int(self.fn(k)) % pctx.modulus


def iwasawa_from_json(data: dict) -> IwasawaFunction:
    t = data["type"]
    if t == "const":
        return Constant(Fraction(data["c"]))
    if t == "polyT":
        return PolyT(tuple(Fraction(c) for c in data["coeffs"]))
    if t == "divisor_sum":
        return DivisorSum(int(data["n"]), data.get("disc"), int(data.get("shift", -1)))
    if t == "product":
        a, b = data["factors"]
        return Product(iwasawa_from_json(a), iwasawa_from_json(b))
    raise ValueError(f"unknown Iwasawa function type {t!r}")


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@dataclass
class LambdaFamily:
    """q-expansion whose n-th coefficient is an Iwasawa function of the weight.

    ``coeffs[n]`` for n = 0..trunc; the specialization at weight k is tagged with
    weight ``k + weight_offset``.
    """

    pctx: PadicCtx
    coeffs: list
    tame_level: int = 1
    character: int | None = None
    weight_offset: int = 0
    name: str = ""

    @property
    def trunc(self) -> int:
        return len(self.coeffs) - 1

    def to_json(self) -> dict:
        return {
            "schema": "picard-cycles/lambda-family/1",
            "p": self.pctx.p,
            "M": self.pctx.M,
            "tame_level": self.tame_level,
            "character_disc": self.character,
            "weight_offset": self.weight_offset,
            "name": self.name,
            "rules": [c.to_json() for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LambdaFamily":
        pctx = PadicCtx(int(data["p"]), int(data["M"]))
        return cls(
            pctx,
            [iwasawa_from_json(r) for r in data["rules"]],
            int(data.get("tame_level", 1)),
            data.get("character_disc"),
            int(data.get("weight_offset", 0)),
            data.get("name", ""),
        )


def eisenstein_family(ctx: FieldCtx, pctx: PadicCtx, N: int) -> LambdaFamily:
    """a_n(k) = sum_{d | n, p not dividing d} chi(d) d^{k-1}; constant term set to 0."""
    if split_type(ctx, pctx.p) != "split":
        raise ValueError(f"p={pctx.p} must split in K")
    coeffs = [Constant(Fraction(0))] + [DivisorSum(n, ctx.disc, -1) for n in range(1, N + 1)]
    return LambdaFamily(pctx, coeffs, abs(ctx.disc), ctx.disc, 0, "eisenstein")


def specialize(F: LambdaFamily, P, N: int | None = None) -> QExpansion:
    k = P.k if isinstance(P, ArithPoint) else int(P)
    N = F.trunc if N is None else N
    if N > F.trunc:
        raise ValueError(f"family only known to q^{F.trunc}")
    m = F.pctx.modulus
    coeffs = [F.coeffs[n](k, F.pctx) for n in range(N + 1)]
    return QExpansion(coeffs, weight=k + F.weight_offset, level=F.tame_level * F.pctx.p,
                      character=F.character, modulus=m)


def congruence_check(F: LambdaFamily, k: int, kprime: int, m: int, N: int | None = None) -> bool:
    """a_n(k) = a_n(k') mod p^{m+1} for n <= N, given k = k' mod (p-1)p^m."""
    p = F.pctx.p
    if (k - kprime) % ((p - 1) * p ** m):
        raise ValueError(f"weights {k}, {kprime} are not congruent mod (p-1)p^{m}")
    if m + 1 > F.pctx.M:
        raise ValueError("congruence modulus exceeds the working precision")
    N = F.trunc if N is None else N
    mod = p ** (m + 1)
    return all(
        (F.coeffs[n](k, F.pctx) - F.coeffs[n](kprime, F.pctx)) % mod == 0 for n in range(N + 1)
    )


def scale_family(F: LambdaFamily, lam: IwasawaFunction) -> LambdaFamily:
    return LambdaFamily(F.pctx, [Product(lam, c) for c in F.coeffs], F.tame_level, F.character,
                        F.weight_offset, F.name and f"scaled {F.name}")


@dataclass
class FiniteUpModel:
    """U_p' = U_p/p acting on a finite free Z/p^M-module with a named basis."""

    p: int
    M: int
    matrix: np.ndarray
    basis: list = field(default_factory=list)

    def __post_init__(self):
        self.matrix = modmat.as_modmat(self.matrix, self.modulus)
        n, n2 = self.matrix.shape
        if n != n2:
            raise ValueError("U_p' must be a square matrix")
        if not self.basis:
            self.basis = [f"b{i}" for i in range(n)]

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> dict:
        return {
            "schema": "picard-cycles/up-model/1",
            "p": self.p,
            "M": self.M,
            "basis": self.basis,
            "matrix": [[int(x) for x in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteUpModel":
        return cls(int(data["p"]), int(data["M"]), data["matrix"], list(data.get("basis", [])))


def _group_exponent(d: int, p: int, M: int) -> int:
    """A multiple of the exponent of GL_d(Z/p^M), at least d*M."""
    e = 1
    for i in range(1, d + 1):
        e = lcm(e, p ** i - 1)
    t = 0
    while p ** t < d:
        t += 1
    e *= p ** (t + M - 1)
    while e < d * M:
        e *= p
    return e


def ordinary_projector(model: FiniteUpModel, method: str = "exponent", cap: int = 200):
    """The idempotent lim (U_p')^{n!} mod p^M.

    ``method="factorial"`` raises to the j-th power at step j (so the iterate is
    A^{j!}) and stops at the first idempotent iterate.  ``method="exponent"``
    first jumps to A^E with E a multiple of the exponent of GL_d(Z/p^M), which
    divides n! for n large, then runs the same stabilization loop.
    Returns (e, iterations).
    """
    m = model.modulus
    A = model.matrix
    if method == "exponent":
        A = modmat.matpow(A, _group_exponent(model.rank, model.p, model.M), m)
        for it in range(1, cap + 1):
            A2 = modmat.matmul(A, A, m)
            if np.array_equal(A2, A):
                return A, it
            A = A2
    elif method == "factorial":
        for j in range(1, cap + 1):
            A = modmat.matpow(A, j, m)
            if np.array_equal(modmat.matmul(A, A, m), A):
                return A, j
    else:
        raise ValueError(f"unknown method {method!r}")
    raise ProjectorError(f"no stabilization within {cap} iterations")


def unit_root_count(matrix, p: int) -> int:
    """Number of eigenvalues (with multiplicity) that are units, from the
    characteristic polynomial mod p."""
    import sympy

    M = sympy.Matrix([[int(x) % p for x in row] for row in matrix])
    x = sympy.Symbol("x")
    cp = sympy.Poly(M.charpoly(x).as_expr(), x, modulus=p)
    coeffs = list(reversed(cp.all_coeffs()))  # constant term first
    v = next((i for i, c in enumerate(coeffs) if int(c) % p), len(coeffs) - 1)
    return M.shape[0] - v
