"""Imaginary quadratic fields K = Q(sqrt(-D)) and their quadratic character."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

__all__ = [
    "FieldCtx",
    "QuadInt",
    "KElt",
    "make_field",
    "norm",
    "trace",
    "chi",
    "kronecker",
    "split_type",
    "is_squarefree",
    "is_prime",
]


def is_squarefree(n: int) -> bool:
    if n <= 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True)
class FieldCtx:
    """Context for K = Q(sqrt(-D)).

    ``omega`` is (1 + sqrt(-D))/2 when D = 3 mod 4, else sqrt(-D); the ring of
    integers is Z[omega] in both cases.
    """

    D: int
    disc: int
    half_omega: bool

    @property
    def omega_trace(self) -> int:
        return 1 if self.half_omega else 0

    @property
    def omega_norm(self) -> int:
        return (1 + self.D) // 4 if self.half_omega else self.D

    def to_json(self) -> dict:
        return {"D": self.D, "disc": self.disc}

    @classmethod
    def from_json(cls, data: dict) -> "FieldCtx":
        ctx = make_field(int(data["D"]))
        if "disc" in data and int(data["disc"]) != ctx.disc:
            raise ValueError(f"inconsistent discriminant {data['disc']} for D={ctx.D}")
        return ctx

    def omega(self) -> "KElt":
        return KElt(self, Fraction(1, 2), Fraction(1, 2)) if self.half_omega else KElt(self, 0, 1)

    def delta(self) -> "KElt":
        return KElt(self, 0, 1)

    def element(self, a, b=0) -> "KElt":
        """The field element a + b*sqrt(-D)."""
        return KElt(self, a, b)


def make_field(D: int) -> FieldCtx:
    if not isinstance(D, int) or isinstance(D, bool):
        raise TypeError("D must be an integer")
    if D <= 0:
        raise ValueError(f"D must be positive, got {D}")
    if not is_squarefree(D):
        raise ValueError(f"D must be squarefree, got {D}")
    if D % 4 == 3:
        return FieldCtx(D, -D, True)
    return FieldCtx(D, -4 * D, False)


@dataclass(frozen=True)
class QuadInt:
    """Element a + b*omega of O_K (the field is supplied by the caller)."""

    a: int
    b: int

    def __add__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b)

    def mul(self, ctx: FieldCtx, other: "QuadInt") -> "QuadInt":
        # omega^2 = tr(omega)*omega - N(omega)
        t, n = ctx.omega_trace, ctx.omega_norm
        a, b, c, d = self.a, self.b, other.a, other.b
        return QuadInt(a * c - b * d * n, a * d + b * c + b * d * t)

    def conj(self, ctx: FieldCtx) -> "QuadInt":
        # conj(omega) = tr(omega) - omega
        return QuadInt(self.a + self.b * ctx.omega_trace, -self.b)

    def to_field(self, ctx: FieldCtx) -> "KElt":
        if ctx.half_omega:
            return KElt(ctx, Fraction(2 * self.a + self.b, 2), Fraction(self.b, 2))
        return KElt(ctx, self.a, self.b)


def norm(ctx: FieldCtx, x: QuadInt) -> int:
    a, b = x.a, x.b
    return a * a + a * b * ctx.omega_trace + b * b * ctx.omega_norm


def trace(ctx: FieldCtx, x: QuadInt) -> int:
    return 2 * x.a + x.b * ctx.omega_trace


def chi(ctx: FieldCtx, n: int) -> int:
    """The quadratic character of K/Q, i.e. the Kronecker symbol (disc/n)."""
    m = abs(ctx.disc)
    r = n % m
    if gcd(r, m) != 1:
        return 0
    return kronecker(ctx.disc, r)


def split_type(ctx: FieldCtx, p: int) -> str:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if ctx.disc % p == 0:
        return "ramified"
    return "split" if kronecker(ctx.disc, p) == 1 else "inert"


class KElt:
    """Element x + y*sqrt(-D) of K with rational coordinates."""

    __slots__ = ("ctx", "x", "y")

    def __init__(self, ctx: FieldCtx, x, y=0):
        self.ctx = ctx
        self.x = Fraction(x)
        self.y = Fraction(y)

    def _coerce(self, other) -> "KElt":
        if isinstance(other, KElt):
            return other
        if isinstance(other, QuadInt):
            return other.to_field(self.ctx)
        return KElt(self.ctx, other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return KElt(self.ctx, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return KElt(self.ctx, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return KElt(self.ctx, -self.x, -self.y)

    def __mul__(self, other):
        o = self._coerce(other)
        D = self.ctx.D
        return KElt(self.ctx, self.x * o.x - D * self.y * o.y, self.x * o.y + self.y * o.x)

    __rmul__ = __mul__

    def conj(self) -> "KElt":
        return KElt(self.ctx, self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x + self.ctx.D * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def inverse(self) -> "KElt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in K")
        return KElt(self.ctx, self.x / n, -self.y / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        if isinstance(other, KElt):
            return self.x == other.x and self.y == other.y and self.ctx.D == other.ctx.D
        return NotImplemented

    def __hash__(self):
        return hash((self.x, self.y, self.ctx.D))

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        n, t = self.norm(), self.trace()
        return n.denominator == 1 and t.denominator == 1

    def __repr__(self):
        return f"KElt({self.x} + {self.y}*sqrt(-{self.ctx.D}))"
