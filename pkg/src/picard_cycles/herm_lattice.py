"""Hermitian O_K-lattices in K^3 with the form (u, v) = conj(u)^t J v.

Lattices are stored through a Z-basis of six vectors of K^3.  Coordinates of a
vector v = (v1, v2, v3) are the rational 6-tuple (x1, y1, x2, y2, x3, y3) with
v_i = x_i + y_i*sqrt(-D).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt, lcm

from sympy import Matrix, Rational
from sympy.matrices.normalforms import hermite_normal_form

from . import kernels
from .quad_field import FieldCtx, KElt, QuadInt, make_field

__all__ = [
    "HermLattice",
    "CosetLattice",
    "RankOneForm",
    "herm",
    "trace_form",
    "standard_lattice",
    "dual_lattice",
    "same_lattice",
    "rank_one",
    "count_norm",
    "norm_counts",
    "theta_series",
]

Vec = tuple  # three KElt


def herm(ctx: FieldCtx, u: Vec, v: Vec) -> KElt:
    """(u, v) = conj(u)^t J v with J = [[0,0,1/d],[0,1,0],[-1/d,0,0]], d = sqrt(-D)."""
    dinv = ctx.delta().inverse()
    return u[0].conj() * dinv * v[2] + u[1].conj() * v[1] - u[2].conj() * dinv * v[0]


def trace_form(ctx: FieldCtx, u: Vec, v: Vec) -> Fraction:
    return herm(ctx, u, v).trace()


def _coords(v: Vec) -> list[Fraction]:
    out = []
    for c in v:
        out.extend((c.x, c.y))
    return out


def _from_coords(ctx: FieldCtx, c) -> Vec:
    return tuple(KElt(ctx, c[2 * i], c[2 * i + 1]) for i in range(3))


def _to_sympy(rows) -> Matrix:
    return Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in rows])


def _from_sympy(m: Matrix) -> list[list[Fraction]]:
    return [[Fraction(int(m[i, j].p), int(m[i, j].q)) for j in range(m.cols)] for i in range(m.rows)]


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, eq=False)
class HermLattice:
    ctx: FieldCtx
    zbasis: tuple  # six vectors of K^3
    gram: tuple = field(default=())  # 6x6 trace-form Gram matrix

    def __post_init__(self):
        if len(self.zbasis) != 6:
            raise ValueError("a full lattice in K^3 needs six Z-generators")
        g = tuple(tuple(trace_form(self.ctx, u, v) for v in self.zbasis) for u in self.zbasis)
        if self.gram and tuple(tuple(Fraction(x) for x in row) for row in self.gram) != g:
            raise ValueError("supplied Gram matrix does not match the basis")
        object.__setattr__(self, "gram", g)

    def basis_matrix(self) -> Matrix:
        """Rows are the coordinate vectors of the basis."""
        return _to_sympy([_coords(b) for b in self.zbasis])

    @property
    def det(self) -> Fraction:
        d = _to_sympy(self.gram).det()
        return Fraction(int(d.p), int(d.q))

    def coordinates(self, v: Vec) -> list[Fraction]:
        """Coordinates of v with respect to the Z-basis."""
        B = self.basis_matrix()
        sol = B.T.solve(_to_sympy([_coords(v)]).T)
        return [Fraction(int(s.p), int(s.q)) for s in sol]

    def contains(self, v: Vec) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(v))

    def in_dual(self, v: Vec) -> bool:
        """Trace-integrality of v against every basis vector."""
        return all(trace_form(self.ctx, b, v).denominator == 1 for b in self.zbasis)

    def is_ok_stable(self) -> bool:
        w = self.ctx.omega()
        return all(self.contains(tuple(w * c for c in b)) for b in self.zbasis)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.gram for x in row)

    def to_json(self) -> dict:
        return {
            "D": self.ctx.D,
            "zbasis": [[_frac_str(c) for c in _coords(b)] for b in self.zbasis],
            "gram": [[_frac_str(x) for x in row] for row in self.gram],
            # neither flag is required; both cases are accepted downstream
            "integral": self.is_integral(),
            "dual_of_integral": dual_lattice(self).is_integral(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "HermLattice":
        ctx = make_field(int(data["D"]))
        basis = tuple(_from_coords(ctx, [Fraction(s) for s in row]) for row in data["zbasis"])
        gram = tuple(tuple(Fraction(s) for s in row) for row in data.get("gram", ()))
        return cls(ctx, basis, gram)


@dataclass(frozen=True, eq=False)
class CosetLattice:
    """The coset {v in L^dual : v = shift mod L}."""

    base: HermLattice
    shift: Vec

    def __post_init__(self):
        if not self.base.in_dual(self.shift):
            raise ValueError("coset shift must lie in the dual lattice")

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "shift": [_frac_str(c) for c in _coords(self.shift)]}

    @classmethod
    def from_json(cls, data: dict) -> "CosetLattice":
        base = HermLattice.from_json(data["base"])
        return cls(base, _from_coords(base.ctx, [Fraction(s) for s in data["shift"]]))


def standard_lattice(ctx: FieldCtx) -> HermLattice:
    """O_K^3 with Z-basis e_1, omega*e_1, e_2, omega*e_2, e_3, omega*e_3."""
    zero, one, w = KElt(ctx, 0), KElt(ctx, 1), ctx.omega()
    basis = []
    for i in range(3):
        for c in (one, w):
            basis.append(tuple(c if j == i else zero for j in range(3)))
    return HermLattice(ctx, tuple(basis))


def dual_lattice(L: HermLattice) -> HermLattice:
    G = _to_sympy(L.gram)
    if G.det() == 0:
        raise ValueError("degenerate lattice: trace Gram matrix is singular")
    Ginv = _from_sympy(G.inv())
    basis = []
    for j in range(6):
        c = [Fraction(0)] * 6
        for k in range(6):
            ck = _coords(L.zbasis[k])
            for t in range(6):
                c[t] += Ginv[k][j] * ck[t]
        basis.append(_from_coords(L.ctx, c))
    return HermLattice(L.ctx, tuple(basis))


def _integer_hnf(rows: list[list[Fraction]]) -> tuple[int, Matrix]:
    den = lcm(*(x.denominator for row in rows for x in row))
    cols = Matrix([[int(x * den) for x in row] for row in rows]).T
    return den, hermite_normal_form(cols)


def same_lattice(L1: HermLattice, L2: HermLattice) -> bool:
    """Equality of Z-spans, decided by Hermite normal forms."""
    r1 = [_coords(b) for b in L1.zbasis]
    r2 = [_coords(b) for b in L2.zbasis]
    den = lcm(*(x.denominator for row in r1 + r2 for x in row))
    h1 = hermite_normal_form(Matrix([[int(x * den) for x in row] for row in r1]).T)
    h2 = hermite_normal_form(Matrix([[int(x * den) for x in row] for row in r2]).T)
    return h1 == h2


def _frac_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True)
class RankOneForm:
    """Hermitian norm restricted to a rank-one O_K-sublattice L cap K*w.

    q(a, b) = A a^2 + B ab + C b^2 is the norm (v, v) of v = (a x1 + b x2) w where
    x1, x2 is a Z-basis of the coefficient ideal.  A coset form evaluates q at
    (a + s1, b + s2).
    """

    D: int
    A: Fraction
    B: Fraction
    C: Fraction
    shift: tuple = (Fraction(0), Fraction(0))
    disc_lattice: Fraction = Fraction(1)  # d(L_sigma)

    def __post_init__(self):
        if not (self.A > 0 and 4 * self.A * self.C - self.B * self.B > 0):
            raise ValueError("rank-one form must be positive definite")

    @property
    def disc_field(self) -> int:
        return make_field(self.D).disc

    @property
    def disc_dual(self) -> Fraction:
        """d of the trace-dual of L_sigma inside its line."""
        return 1 / (self.disc_lattice * abs(self.disc_field))

    @property
    def is_coset(self) -> bool:
        return any(s != 0 for s in self.shift)

    def __call__(self, a, b) -> Fraction:
        x, y = a + self.shift[0], b + self.shift[1]
        return self.A * x * x + self.B * x * y + self.C * y * y

    def integer_data(self) -> tuple[int, int, int, int, int, int, int]:
        """(A', B', C', x0, y0, m, scale) with q(a + s1, b + s2) = q'(X, Y)/scale.

        X = m*(a + s1), Y = m*(b + s2) run over the residue classes x0, y0 mod m.
        """
        den = lcm(self.A.denominator, self.B.denominator, self.C.denominator)
        m = lcm(self.shift[0].denominator, self.shift[1].denominator)
        x0 = int(self.shift[0] * m) % m
        y0 = int(self.shift[1] * m) % m
        return (
            int(self.A * den),
            int(self.B * den),
            int(self.C * den),
            x0,
            y0,
            m,
            den * m * m,
        )

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "q": [_frac_str(self.A), _frac_str(self.B), _frac_str(self.C)],
            "shift": [_frac_str(s) for s in self.shift],
            "d": _frac_str(self.disc_lattice),
            "d_dual": _frac_str(self.disc_dual),
        }

    @classmethod
    def from_json(cls, data: dict) -> "RankOneForm":
        A, B, C = (Fraction(s) for s in data["q"])
        shift = tuple(Fraction(s) for s in data.get("shift", ("0", "0")))
        return cls(int(data["D"]), A, B, C, shift, Fraction(data.get("d", "1")))


def _gauss_reduce(A, B, C):
    """Reduce a positive definite form; returns the reduced form and the 2x2
    unimodular matrix U (columns = new basis in old coordinates)."""
    U = [[1, 0], [0, 1]]
    while True:
        if abs(B) > A:
            # b -> b - 2tA with t the nearest integer to B/(2A)
            t = (B / (2 * A) + Fraction(1, 2)).__floor__()
            C = A * t * t - B * t + C
            B = B - 2 * t * A
            U = [[U[0][0], U[0][1] - t * U[0][0]], [U[1][0], U[1][1] - t * U[1][0]]]
            continue
        if A > C:
            A, C = C, A
            B = -B
            U = [[U[0][1], -U[0][0]], [U[1][1], -U[1][0]]]
            continue
        break
    if B < 0 and (-B == A or A == C):
        B = -B
        U = [[U[0][0], -U[0][1]], [U[1][0], -U[1][1]]]
    return A, B, C, U


def rank_one(L, w: Vec, h: Vec | None = None) -> RankOneForm:
    """Binary form of L cap K*w (or of the coset h + L meeting K*w)."""
    if isinstance(L, CosetLattice):
        if h is not None:
            raise ValueError("pass either a coset lattice or a shift, not both")
        L, h = L.base, L.shift
    ctx = L.ctx
    hw = herm(ctx, w, w)
    if hw.y != 0 or hw.x <= 0:
        raise ValueError("w must be a positive vector: (w, w) > 0 is required")
    delta = ctx.delta()
    cw = L.coordinates(w)
    cdw = L.coordinates(tuple(delta * c for c in w))
    # {(s, t) : s*cw + t*cdw integral} is the dual of the Z-span of the rows (cw_i, cdw_i)
    rows = [[cw[i], cdw[i]] for i in range(6)]
    den = lcm(*(x.denominator for row in rows for x in row))
    H = hermite_normal_form(Matrix([[int(x * den) for x in row] for row in rows]).T)
    if H.cols != 2:
        raise ValueError("line meets the lattice degenerately")
    span = Matrix(H) / den
    lam = span.T.inv()  # columns: basis of the coefficient lattice in (s, t)
    x1 = KElt(ctx, Fraction(int(lam[0, 0].p), int(lam[0, 0].q)), Fraction(int(lam[1, 0].p), int(lam[1, 0].q)))
    x2 = KElt(ctx, Fraction(int(lam[0, 1].p), int(lam[0, 1].q)), Fraction(int(lam[1, 1].p), int(lam[1, 1].q)))
    h0 = hw.x
    A = h0 * x1.norm()
    B = h0 * (x1 * x2.conj()).trace()
    C = h0 * x2.norm()
    A, B, C, U = _gauss_reduce(A, B, C)
    x1, x2 = x1 * U[0][0] + x2 * U[1][0], x1 * U[0][1] + x2 * U[1][1]

    shift = (Fraction(0), Fraction(0))
    if h is not None:
        idx = next(i for i in range(3) if not w[i].is_zero())
        x0 = h[idx] / w[idx]
        if any(x0 * w[i] != h[i] for i in range(3)):
            raise ValueError("shift must lie on the line K*w")
        # solve alpha*x1 + beta*x2 = x0 over Q
        det = x1.x * x2.y - x2.x * x1.y
        alpha = (x0.x * x2.y - x2.x * x0.y) / det
        beta = (x1.x * x0.y - x0.x * x1.y) / det
        shift = (alpha - alpha.__floor__(), beta - beta.__floor__())

    det_tr = 4 * A * C - B * B
    d = _frac_sqrt(det_tr / abs(ctx.disc))
    if d is None:
        raise ValueError("sublattice is not O_K-stable; discriminant is not rational")
    return RankOneForm(ctx.D, A, B, C, shift, d)


@lru_cache(maxsize=64)
def _cached_counts(data: tuple, vmax: int):
    A, B, C, x0, y0, m, _ = data
    return kernels.representation_counts(A, B, C, x0, y0, m, vmax)


def norm_counts(f: RankOneForm, N: int) -> list[int]:
    """[count_norm(f, n) for n in 0..N]."""
    data = f.integer_data()
    scale = data[6]
    counts = _cached_counts(data, N * scale)
    return [int(counts[n * scale]) for n in range(N + 1)]


def count_norm(f: RankOneForm, n: int) -> int:
    if n < 0:
        return 0
    return norm_counts(f, n)[n]


def theta_series(f: RankOneForm, N: int, level: int | None = None):
    """Unary theta series sum_n count_norm(n) q^n, weight 1."""
    from .qexp import QExpansion

    ctx = make_field(f.D)
    lvl = abs(ctx.disc) if level is None else level
    return QExpansion(norm_counts(f, N), weight=1, level=lvl, character=ctx.disc)
