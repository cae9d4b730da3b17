from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dunklhit import dunklpoly as dp
from dunklhit.errors import (ExactDivisionError, IntegrationBudgetExceeded,
                             NonHomogeneousError, RankTooLarge, ValidationError)
from dunklhit.dunklpoly import MultiPoly
from dunklhit.rootsys import Multiplicity, build_root_system, gamma_sum

F = Fraction


def var(m, i):
    return MultiPoly.variable(m, i)


def mult(rs, k1, k0=None):
    return Multiplicity(k1=F(k1), k0=F(k0) if rs.family == "B" else None)


def random_homogeneous(draw, m, d):
    n = draw(st.integers(1, 4))
    terms = {}
    for _ in range(n):
        e = draw(st.lists(st.integers(0, d), min_size=m, max_size=m))
        if sum(e) != d:
            e[-1] = max(0, d - sum(e[:-1]))
            if sum(e) != d:
                continue
        terms[tuple(e)] = F(draw(st.integers(-4, 4)), draw(st.integers(1, 3)))
    p = MultiPoly(m, terms)
    return p if p else MultiPoly(m, {(d,) + (0,) * (m - 1): 1})


# ---------------------------------------------------------------- MultiPoly

def test_multipoly_arithmetic():
    x, y = var(2, 0), var(2, 1)
    p = (x + y) ** 2
    assert p == x * x + x * y * 2 + y * y
    assert p.degree == 2 and p.is_homogeneous()
    assert not (p + 1).is_homogeneous()
    assert (p - p).terms == {}
    assert p([F(1), F(2)]) == 9
    assert p.diff(0) == x * 2 + y * 2
    assert p.euler() == p * 2
    assert p.homogeneous_part(2) == p


def test_divide_linear_exact_and_error():
    x, y = var(2, 0), var(2, 1)
    assert (x * x - y * y).divide_linear((1, -1)) == x + y
    with pytest.raises(ExactDivisionError):
        (x * x + y).divide_linear((1, -1))


# ---------------------------------------------------------------- Dunkl operators

def test_dunkl_derivative_examples():
    rs = build_root_system("A", 2)
    assert dp.dunkl_derivative(var(2, 0), 0, rs, mult(rs, 1)) == MultiPoly.constant(2, 2)
    for fam, m in (("A", 3), ("B", 2), ("D", 3)):
        rs = build_root_system(fam, m)
        assert not dp.dunkl_derivative(MultiPoly.constant(m, 1), 0, rs, mult(rs, F(3, 4), F(1, 2)))
    b1 = build_root_system("B", 1)
    x = var(1, 0)
    assert dp.dunkl_derivative(x * x, 0, b1, Multiplicity(k1=F(1), k0=F(3, 5))) == x * 2


@pytest.mark.parametrize("fam,m", [("A", 2), ("A", 3), ("B", 1), ("B", 2), ("B", 3),
                                   ("D", 2), ("D", 3)])
def test_laplacian_of_norm_square(fam, m):
    rs = build_root_system(fam, m)
    k = mult(rs, F(3, 4), F(2, 5))
    r2 = sum((var(m, i) * var(m, i) for i in range(1, m)), var(m, 0) * var(m, 0))
    got = dp.dunkl_laplacian(r2, rs, k)
    assert got == MultiPoly.constant(m, 2 * m + 4 * gamma_sum(rs, k))
    assert not dp.dunkl_laplacian(var(m, 0), rs, k)
    assert not dp.dunkl_laplacian(MultiPoly.constant(m, 1), rs, k)


@given(st.data())
def test_laplacian_lowers_degree_by_two(data):
    rs = build_root_system("B", 2)
    p = random_homogeneous(data.draw, 2, data.draw(st.integers(2, 5)))
    lap = dp.dunkl_laplacian(p, rs, mult(rs, F(3, 4), F(1, 2)))
    assert not lap or (lap.is_homogeneous() and lap.degree == p.degree - 2)


# ---------------------------------------------------------------- hermitize / Rodriguez

def test_hermitize_examples():
    rs = build_root_system("B", 1)
    k0 = F(3, 4)
    k = Multiplicity(k1=F(1), k0=k0)
    x = var(1, 0)
    assert dp.hermitize(x, rs, k) == x
    assert dp.hermitize(x * x, rs, k) == x * x - (1 + 2 * k0)
    assert dp.hermitize(MultiPoly.constant(1, 1), rs, k) == MultiPoly.constant(1, 1)
    with pytest.raises(NonHomogeneousError):
        dp.hermitize(x * x + x, rs, k)


@pytest.mark.parametrize("fam,m", [("A", 3), ("B", 2), ("B", 3), ("D", 3)])
@given(data=st.data())
def test_spectral_relation_and_top_part(fam, m, data):
    rs = build_root_system(fam, m)
    k = mult(rs, data.draw(st.sampled_from([F(1, 2), F(3, 4), F(1)])),
             data.draw(st.sampled_from([F(1, 2), F(3, 4), F(1)])))
    d = data.draw(st.integers(0, 4))
    p = random_homogeneous(data.draw, m, d) if d else MultiPoly.constant(m, 2)
    H = dp.hermitize(p, rs, k)
    assert not dp.spectral_residual(H, d, rs, k)
    assert H.homogeneous_part(d) == p


def test_rodriguez_examples():
    b1 = build_root_system("B", 1)
    k = Multiplicity(k1=F(1), k0=F(3, 4))
    x = var(1, 0)
    assert dp.rodriguez_eval(MultiPoly.constant(1, 1), b1, k) == MultiPoly.constant(1, 1)
    assert dp.rodriguez_eval(x * x, b1, k) == x * x - F(5, 2)
    a2 = build_root_system("A", 2)
    ka = Multiplicity(k1=F(3, 4))
    phi = var(2, 0) * var(2, 1)
    R, H = dp.rodriguez_eval(phi, a2, ka), dp.hermitize(phi, a2, ka)
    assert R == H
    rng = np.random.default_rng(0)
    for _ in range(20):
        pt = [F(int(v), 7) for v in rng.integers(-20, 20, 2)]
        assert R(pt) == H(pt)
    g = dp.GaussianPoly(R)
    assert g([0.5, -0.2]) == pytest.approx(float(R([0.5, -0.2])) * math.exp(-0.145))


def test_rodriguez_rank_guard():
    with pytest.raises(RankTooLarge):
        dp.rodriguez_eval(var(4, 0), build_root_system("B", 4), Multiplicity(k1=1, k0=1))


# ---------------------------------------------------------------- W symmetrization

def test_w_symmetrize_examples():
    b1 = build_root_system("B", 1)
    x = var(1, 0)
    assert not dp.w_symmetrize(x, b1)
    assert dp.w_symmetrize(x * x, b1) == x * x * 2
    assert dp.w_symmetrize(var(2, 0), build_root_system("A", 2)) == var(2, 0) + var(2, 1)
    with pytest.raises(RankTooLarge):
        dp.w_symmetrize(var(5, 0), build_root_system("B", 5))


@pytest.mark.parametrize("fam,m", [("A", 3), ("B", 2), ("D", 3)])
@given(data=st.data())
def test_symmetrized_is_invariant_and_commutes_with_hermitize(fam, m, data):
    rs = build_root_system(fam, m)
    k = mult(rs, F(3, 4), F(1, 2))
    p = random_homogeneous(data.draw, m, data.draw(st.integers(1, 4)))
    S = dp.w_symmetrize(p, rs)
    for M in rs.weyl_matrices():
        assert S.compose_linear([[int(v) for v in row] for row in M]) == S
    assert dp.hermitize(S, rs, k) == dp.w_symmetrize(dp.hermitize(p, rs, k), rs)


# ---------------------------------------------------------------- chamber integrals

def test_empty_tau_coefficient_is_chamber_mass():
    rs = build_root_system("B", 2)
    k = Multiplicity(k1=F(3, 4), k0=F(3, 4))
    est = dp.ctau_W(MultiPoly.constant(2, 1), rs, k, budget=200_000, seed=1)
    ref = dp.chamber_mass(rs)
    assert ref == pytest.approx(1.0, rel=1e-12)
    assert abs(est.value - ref) < 3 * est.std_error


def test_odd_input_averages_to_zero():
    rs = build_root_system("B", 2)
    k = Multiplicity(k1=F(3, 4), k0=F(3, 4))
    for phi in (var(2, 0), var(2, 0) ** 3 + var(2, 1) * var(2, 0) * var(2, 0)):
        assert dp.ctau_W(phi, rs, k).value == 0.0


def test_mc_integral_matches_quadrature():
    rs = build_root_system("B", 2)
    y1, y2 = var(2, 0), var(2, 1)
    p = y1 * y1 * y2 * y2 - y1 * 3 + 2
    quad = dp.chamber_gaussian_integral(p, rs)
    mc = dp.chamber_mc_integral(p, rs, budget=400_000, seed=5)
    assert abs(mc.value - quad) < 3 * mc.std_error
    assert mc.std_error < 0.2 * abs(quad)


def test_mc_budget_guard():
    rs = build_root_system("B", 2)
    with pytest.raises(IntegrationBudgetExceeded):
        dp.chamber_mc_integral(MultiPoly.constant(2, 1), rs, budget=10)


def test_coefficient_closed_form_low_weight():
    for tau in [(), (1,)]:
        q = dp.coefficient_lhs_B(tau, 2, F(3, 4), F(3, 4)).value
        assert dp.coefficient_rhs_B(tau, 2, F(3, 4), F(3, 4)) == pytest.approx(q, rel=1e-10)
    with pytest.raises(ValidationError):
        dp.coefficient_rhs_B((2,), 2, F(3, 4), F(3, 4))


def test_coefficient_quadrature_exact_values():
    got = {tau: dp.coefficient_lhs_B(tau, 2, F(3, 4), F(3, 4)).value
           for tau in [(), (1,), (2,), (1, 1)]}
    assert got[()] == pytest.approx(1.0, rel=1e-12)
    assert got[(1,)] == pytest.approx(-2.0, rel=1e-12)
    assert got[(2,)] == pytest.approx(48 / 7, rel=1e-10)
    assert got[(1, 1)] == pytest.approx(8 / 7, rel=1e-10)


def test_coefficient_mc_matches_quadrature_weight_two():
    for tau in [(2,), (1, 1)]:
        q = dp.coefficient_lhs_B(tau, 2, F(3, 4), F(3, 4)).value
        mc = dp.coefficient_lhs_B(tau, 2, F(3, 4), F(3, 4), method="mc", budget=400_000, seed=2)
        assert abs(mc.value - q) < 3 * mc.std_error


def test_phi_w_normalization():
    phi = dp.phi_W_B((2,), 2, F(3, 4))
    assert phi([F(1), F(0)]) * 2 == F(dp.jack_C_poly((2,), 2, F(3, 4))([1, 0]),
                                         dp.jack_C_one((2,), 2, F(3, 4)))


def test_invariant_basis_gram_is_symmetric():
    basis = dp.InvariantBasisB(2, F(3, 4), F(3, 4), 4)
    y1, y2 = var(2, 0), var(2, 1)
    p, q = y1 * y1 + y2 * y2, y1 ** 4 + y2 ** 4
    assert basis.pairing(p, q) == basis.pairing(q, p)
    assert basis.pairing(p, MultiPoly.constant(2, 1)) == 0
