"""Generating series of special-cycle intersection numbers.

The cusp coefficient at n is n * D * N(N_0) / |H_sigma| * #{v in L_sigma : (v, v) = n};
only the ratio N(N_0)/|H_sigma| enters, so both are kept as exact rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .herm_lattice import RankOneForm, norm_counts
from .qexp import QExpansion
from .quad_field import FieldCtx, make_field

__all__ = [
    "SeriesParams",
    "cusp_coefficient",
    "cusp_series",
    "higher_weight_coefficient",
    "higher_weight_series",
    "moment_base",
    "default_params",
]


@dataclass(frozen=True)
class SeriesParams:
    ctx: FieldCtx
    form: RankOneForm
    n0_norm: Fraction = Fraction(1)
    h_sigma: Fraction = Fraction(1)
    weight_k: int = 0
    constant_term: Fraction = Fraction(0)
    N: int = 100
    level: int | None = None  # defaults to D

    def __post_init__(self):
        for name in ("n0_norm", "h_sigma", "constant_term"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.n0_norm <= 0:
            raise ValueError("N(N_0) must be positive")
        if self.h_sigma <= 0:
            raise ValueError("|H_sigma| must be positive")
        if self.N < 1:
            raise ValueError("truncation must be at least 1")
        if self.weight_k < 0:
            raise ValueError("weight_k must be non-negative")
        if self.form.D != self.ctx.D:
            raise ValueError("form and field disagree on D")

    @property
    def ratio(self) -> Fraction:
        return self.n0_norm / self.h_sigma

    def to_json(self) -> dict:
        return {
            "D": self.ctx.D,
            "form": self.form.to_json(),
            "n0_norm": str(self.n0_norm),
            "h_sigma": str(self.h_sigma),
            "weight_k": self.weight_k,
            "constant_term": str(self.constant_term),
            "N": self.N,
            "level": self.level,
        }


def _counts(params: SeriesParams, N: int | None = None) -> list[int]:
    return norm_counts(params.form, params.N if N is None else N)


def cusp_coefficient(params: SeriesParams, n: int) -> Fraction:
    if n < 1:
        raise ValueError("cusp coefficients are indexed by n >= 1")
    r = norm_counts(params.form, n)[n]
    return n * params.ctx.D * params.ratio * r


def _cusp_coeffs(params: SeriesParams) -> list[Fraction]:
    r = _counts(params)
    scale = params.ctx.D * params.ratio
    return [Fraction(0)] + [n * scale * r[n] for n in range(1, params.N + 1)]


def cusp_series(params: SeriesParams) -> QExpansion:
    if params.weight_k != 0:
        raise ValueError("cusp_series is the weight-3 (k = 0) series; use higher_weight_series")
    coeffs = _cusp_coeffs(params)
    coeffs[0] = params.constant_term
    level = params.ctx.D if params.level is None else params.level
    return QExpansion(coeffs, weight=3, level=level, character=params.ctx.disc)


def moment_base(form: RankOneForm, n: int) -> Fraction:
    """n / (d(L) d(L^dual)): raised to the k-th power it gives the weight-k factor."""
    return Fraction(n) / (form.disc_lattice * form.disc_dual)


def higher_weight_coefficient(params: SeriesParams, n: int) -> Fraction:
    k = params.weight_k
    if n == 0:
        return params.constant_term if k == 0 else Fraction(0)
    return moment_base(params.form, n) ** k * cusp_coefficient(params, n)


def higher_weight_series(params: SeriesParams) -> QExpansion:
    """Weight 2k+3 series: n^k d(L)^-k d(L^dual)^-k times the cusp coefficients."""
    k = params.weight_k
    base = _cusp_coeffs(params)
    coeffs = [params.constant_term if k == 0 else Fraction(0)]
    coeffs += [moment_base(params.form, n) ** k * base[n] for n in range(1, params.N + 1)]
    level = params.ctx.D if params.level is None else params.level
    return QExpansion(coeffs, weight=2 * k + 3, level=level, character=params.ctx.disc,
                      meta={"heuristic": k > 0})


def default_params(D: int, **kw) -> SeriesParams:
    from .herm_lattice import rank_one, standard_lattice

    ctx = make_field(D)
    L = standard_lattice(ctx)
    form = rank_one(L, L.zbasis[2])
    return SeriesParams(ctx, form, **kw)
