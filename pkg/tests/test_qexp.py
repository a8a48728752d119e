from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from picard_cycles.herm_lattice import rank_one, standard_lattice, theta_series
from picard_cycles.qexp import (
    InsufficientPrecision,
    QExpansion,
    eisenstein3,
    eta_product,
    gamma0_index,
    generalized_bernoulli,
    hecke_T,
    modularity_check,
    sturm_bound,
    sturm_equal,
)
from picard_cycles.quad_field import KElt, chi, make_field

D7 = make_field(7)


def theta(D, N):
    ctx = make_field(D)
    z = KElt(ctx, 0)
    return theta_series(rank_one(standard_lattice(ctx), (z, KElt(ctx, 1), z)), N)


def test_hecke_zero():
    f = QExpansion([0] * 21, weight=3, level=7, character=-7)
    assert hecke_T(f, 2) == QExpansion([0] * 11, weight=3, level=7, character=-7)


def test_eisenstein3_t2_eigen():
    E = eisenstein3(D7, 200)
    assert chi(D7, 2) == 1
    assert E.scale(5).truncate(100) == hecke_T(E, 2)


def test_hecke_up_branch():
    f = QExpansion(list(range(50)), weight=3, level=7, character=-7)
    g = hecke_T(f, 7)
    assert g.coeffs == [7 * n for n in range(8)]


@pytest.mark.parametrize("ell", list(sympy.primerange(2, 21)))
def test_eisenstein3_simultaneous_eigenvector(ell):
    E = eisenstein3(D7, 400)
    lam = 1 + chi(D7, ell) * ell ** 2
    assert hecke_T(E, ell) == E.scale(lam).truncate(400 // ell)


coeff_lists = st.lists(st.integers(-1000, 1000), min_size=170, max_size=170)


@given(coeff_lists, st.sampled_from([(2, 3), (2, 5), (3, 5), (5, 7), (3, 13), (11, 13), (2, 7)]))
def test_hecke_commute(coeffs, pair):
    l1, l2 = pair
    f = QExpansion(coeffs, weight=3, level=7, character=-7)
    a = hecke_T(hecke_T(f, l1), l2)
    b = hecke_T(hecke_T(f, l2), l1)
    n = min(a.trunc, b.trunc)
    assert a.truncate(n) == b.truncate(n)


def test_eisenstein3_coefficients():
    E = eisenstein3(D7, 10)
    assert E[1] == 1
    assert E[2] == 1 + chi(D7, 2) * 4 == 5


def test_eisenstein3_constant_term_against_hurwitz():
    # L(-2, chi) = f^2 sum_a chi(a) zeta(-2, a/f), and a_0 = -B_{3,chi}/6 = L(-2, chi)/2
    f = 7
    L = f ** 2 * sum(chi(D7, a) * mpmath.zeta(-2, mpmath.mpf(a) / f) for a in range(1, f))
    a0 = eisenstein3(D7, 1)[0]
    assert abs(float(a0) - float(L) / 2) < 1e-6
    assert a0 == Fraction(-8, 7)


@pytest.mark.parametrize("D", [3, 7, 11, 2, 1])
def test_generalized_bernoulli_matches_l_value(D):
    ctx = make_field(D)
    f = abs(ctx.disc)
    L = f ** 2 * sum(chi(ctx, a) * mpmath.zeta(-2, mpmath.mpf(a) / f) for a in range(1, f))
    assert abs(float(-generalized_bernoulli(3, ctx.disc) / 3) - float(L)) < 1e-9


def test_eta_product_leading_term():
    f = eta_product([(1, 3), (7, 3)], 20)
    assert f[0] == 0 and f[1] == 1
    assert (f.weight, f.level) == (3, 7)


def test_eta_delta_against_polynomial_oracle():
    N = 12
    poly = np.zeros(N + 1, dtype=object)
    poly[0] = 1
    for m in range(1, N + 1):
        factor = np.zeros(N + 1, dtype=object)
        factor[0], factor[m] = 1, -1
        for _ in range(24):
            poly = np.convolve(poly, factor)[: N + 1]
    expected = [0] + list(poly[:N])
    f = eta_product([(1, 24)], N)
    assert f.coeffs == expected
    assert f[2] == -24


def test_eta_rejects_fractional():
    with pytest.raises(ValueError):
        eta_product([(1, 1)], 10)


def test_sturm():
    assert gamma0_index(7) == 8
    assert sturm_bound(3, 7) == 2
    E = eisenstein3(D7, 10)
    assert sturm_equal(E, E)
    bumped = QExpansion(E.coeffs[:3] + [E[3] + 1] + E.coeffs[4:], weight=3, level=7, character=-7)
    assert sturm_equal(E, bumped)
    with pytest.raises(InsufficientPrecision):
        sturm_equal(E.truncate(1), E.truncate(1))


def test_modularity_identity_defect_zero():
    E = eisenstein3(D7, 400)
    rep = modularity_check(E, samples=5, gammas=[(1, 0, 0, 1)] * 5)
    assert rep.max_defect == 0.0


def test_modularity_reference_forms():
    E = eisenstein3(D7, 400)
    assert modularity_check(E).max_defect < 1e-8
    eta = eta_product([(1, 3), (7, 3)], 400, character=-7)
    rep = modularity_check(eta)
    assert rep.status == "pass" and rep.max_defect < 1e-8


def test_modularity_negative_control():
    E = eisenstein3(D7, 400)
    bad = QExpansion(E.coeffs[:5] + [E[5] + 1] + E.coeffs[6:], weight=3, level=7, character=-7)
    assert modularity_check(bad).max_defect > 1e-3


@pytest.mark.parametrize("D", [3, 7, 11])
def test_unary_theta_is_modular(D):
    rep = modularity_check(theta(D, 400))
    assert rep.status == "pass" and rep.max_defect < 1e-8


def test_modularity_rejects_short_or_residue_series():
    with pytest.raises(InsufficientPrecision):
        modularity_check(eisenstein3(D7, 20))
    with pytest.raises(ValueError):
        modularity_check(eisenstein3(D7, 100).reduce(11 ** 3))


def test_modularity_report_is_seeded():
    E = eisenstein3(D7, 400)
    assert modularity_check(E, seed=5).to_json() == modularity_check(E, seed=5).to_json()


def test_qexpansion_json_roundtrip():
    E = eisenstein3(D7, 30)
    assert QExpansion.from_json(E.to_json()) == E
    R = E.reduce(11 ** 4)
    assert QExpansion.from_json(R.to_json()) == R
