from fractions import Fraction
from itertools import permutations
import math
import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import poch

from dunklhit.errors import ValidationError
from dunklhit.partition_jack import (JackContext, as_partition, enumerate_partitions,
                                     gen_pochhammer, get_context, jack_C, jack_C_at_one)


# Independent oracle: monomial expansion of P_kappa from the Laplace-Beltrami
# eigen-recurrence, then C-normalization from (x_1 + ... + x_m)^p = sum_tau C_tau.

def _rho(kappa, alpha):
    return sum(k * (k - 1 - Fraction(2, 1) / alpha * i) for i, k in enumerate(kappa))


def _dominated(lam, kappa):
    a = b = 0
    for i in range(max(len(lam), len(kappa))):
        a += lam[i] if i < len(lam) else 0
        b += kappa[i] if i < len(kappa) else 0
        if a > b:
            return False
    return True


def _partitions(n, max_part=None):
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def oracle_P(kappa, alpha):
    """{mu: coefficient of m_mu in P_kappa} with exact rationals."""
    alpha = Fraction(alpha)
    n = sum(kappa)
    below = [mu for mu in _partitions(n) if _dominated(mu, kappa)]
    coef = {tuple(kappa): Fraction(1)}
    for mu in below:               # decreasing reverse-lex extends dominance
        if mu == tuple(kappa):
            continue
        acc = Fraction(0)
        for i in range(len(mu)):
            for j in range(i + 1, len(mu)):
                for t in range(1, mu[j] + 1):
                    lam = list(mu)
                    lam[i] += t
                    lam[j] -= t
                    lam = tuple(sorted((p for p in lam if p), reverse=True))
                    if lam in coef:
                        acc += (mu[i] - mu[j] + 2 * t) * coef[lam]
        coef[mu] = 2 / alpha / (_rho(kappa, alpha) - _rho(mu, alpha)) * acc
    return coef


def oracle_C_all(p, alpha):
    """{tau: {mu: coef}} for every tau of weight p, C-normalized."""
    P = {tau: oracle_P(tau, alpha) for tau in _partitions(p)}
    remainder = {mu: Fraction(math.factorial(p), math.prod(math.factorial(v) for v in mu))
                 for mu in _partitions(p)}
    out = {}
    for tau in _partitions(p):
        a = remainder.get(tau, Fraction(0))
        out[tau] = {mu: a * c for mu, c in P[tau].items()}
        for mu, c in P[tau].items():
            remainder[mu] = remainder.get(mu, Fraction(0)) - a * c
    return out


def eval_monomials(coefs, x):
    total = 0
    m = len(x)
    for mu, c in coefs.items():
        if len(mu) > m:
            continue
        comp = mu + (0,) * (m - len(mu))
        for perm in set(permutations(comp)):
            total += c * math.prod(xi ** e for xi, e in zip(x, perm))
    return total


ALPHAS = [Fraction(1), Fraction(2), Fraction(4, 3)]


def test_enumerate_examples():
    assert enumerate_partitions(2, 2) == [(), (1,), (2,), (1, 1)]
    assert enumerate_partitions(0, 5) == [()]
    assert enumerate_partitions(4, 1) == [(), (1,), (2,), (3,), (4,)]


@given(st.integers(0, 9), st.integers(1, 4))
def test_enumerate_complete_and_unique(w, L):
    got = enumerate_partitions(w, L)
    assert len(got) == len(set(got))
    expected = {p for n in range(w + 1) for p in _partitions(n) if len(p) <= L}
    assert set(got) == expected
    assert [sum(p) for p in got] == sorted(sum(p) for p in got)


def test_as_partition_normalizes():
    assert as_partition((3, 1, 0, 0)) == (3, 1)
    with pytest.raises(ValidationError):
        as_partition((1, 2))
    with pytest.raises(ValidationError):
        enumerate_partitions(-1, 2)


def test_pochhammer_examples():
    assert gen_pochhammer(2, (1,), 0.37) == 2
    assert gen_pochhammer(3, (2, 1), 1) == 24
    assert gen_pochhammer(0.5, (1, 1), 0.5) == 0


@given(st.fractions(-5, 5, max_denominator=7), st.integers(0, 8), st.fractions(0, 2, max_denominator=5))
def test_one_row_pochhammer_is_rising_factorial(a, n, k1):
    exact = math.prod((a + j for j in range(n)), start=Fraction(1))
    assert gen_pochhammer(a, (n,), k1) == exact
    assert float(gen_pochhammer(float(a), (n,), float(k1))) == pytest.approx(
        float(poch(float(a), n)), rel=1e-12, abs=1e-12)


def test_jack_C_degree_one():
    ctx = get_context(1.7, 2)
    assert jack_C((1,), [0.4, 1.1], ctx) == pytest.approx(1.5, rel=1e-14)


def test_binomial_sum_example():
    ctx = get_context(2.0, 2)
    s = sum(jack_C(tau, [0.3, 0.2], ctx) for tau in [(3,), (2, 1), (1, 1, 1)])
    assert s == pytest.approx(0.125, rel=1e-13)


def test_zonal_example_against_oracle():
    ctx = get_context(2.0, 2)
    ref = eval_monomials(oracle_C_all(2, 2)[(2,)], [1, 1])
    assert jack_C((2,), [1.0, 1.0], ctx) == pytest.approx(float(ref), rel=1e-13)


def test_at_one_examples():
    ctx = get_context(1.0, 2)
    assert jack_C_at_one((), 2, ctx) == 1
    assert sum(jack_C_at_one(t, 2, ctx) for t in [(2,), (1, 1)]) == pytest.approx(4.0)
    ref = eval_monomials(oracle_C_all(2, 1)[(1, 1)], [1, 1])
    assert jack_C_at_one((1, 1), 2, ctx) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_exact_mode_matches_oracle(alpha, p):
    oracle = oracle_C_all(p, alpha)
    for m in (1, 2, 3):
        ctx = JackContext(alpha, m, exact=True)
        x = [Fraction(3, 2), Fraction(-2, 3), Fraction(1, 5)][:m]
        for tau, coefs in oracle.items():
            want = eval_monomials(coefs, x) if len(tau) <= m else 0
            assert jack_C(tau, x, ctx) == want


@pytest.mark.parametrize("alpha", ALPHAS)
def test_float_mode_and_at_one_match_oracle(alpha):
    rng = np.random.default_rng(3)
    for p in (2, 3, 4):
        oracle = oracle_C_all(p, alpha)
        for m in (2, 3):
            ctx = get_context(float(alpha), m)
            x = rng.uniform(-1, 1, m)
            for tau, coefs in oracle.items():
                if len(tau) > m:
                    continue
                want = float(eval_monomials(coefs, [Fraction(v) for v in x]))
                assert jack_C(tau, x, ctx) == pytest.approx(want, rel=1e-11, abs=1e-13)
                one = float(eval_monomials(coefs, [1] * m))
                assert jack_C_at_one(tau, m, ctx) == pytest.approx(one, rel=1e-12)


def test_longer_partition_is_zero():
    ctx = get_context(1.5, 2)
    assert jack_C((1, 1, 1), [0.3, 0.4], ctx) == 0
    assert jack_C_at_one((1, 1, 1), 2, ctx) == 0


taus = st.sampled_from([(1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1), (2, 2), (3, 1), (2, 1, 1)])
vecs = st.lists(st.floats(-2, 2, allow_subnormal=False), min_size=3, max_size=3)


@given(taus, vecs, st.floats(0.1, 3), st.floats(0.3, 3))
def test_homogeneity(tau, x, lam, alpha):
    ctx = get_context(alpha, 3)
    x = np.array(x)
    lhs = jack_C(tau, lam * x, ctx)
    rhs = lam ** sum(tau) * jack_C(tau, x, ctx)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(taus, vecs, st.floats(0.3, 3))
def test_symmetry(tau, x, alpha):
    ctx = get_context(alpha, 3)
    base = jack_C(tau, x, ctx)
    for perm in permutations(x):
        assert jack_C(tau, list(perm), ctx) == pytest.approx(base, rel=1e-12, abs=1e-12)


@given(st.integers(1, 6), st.integers(1, 3), st.floats(0.3, 3), st.data())
def test_binomial_normalization(p, m, alpha, data):
    x = np.array(data.draw(st.lists(st.floats(0.05, 1.5), min_size=m, max_size=m)))
    ctx = get_context(alpha, m)
    total = sum(jack_C(tau, x, ctx) for tau in _partitions(p) if len(tau) <= m)
    assert total == pytest.approx(x.sum() ** p, rel=1e-12)


def test_context_cache_reproducible_and_thread_safe():
    ctx = JackContext(1.25, 3)
    first = ctx.monomial_coefficients((2, 1))
    again = JackContext(1.25, 3).monomial_coefficients((2, 1))
    assert first == again
    assert ctx.monomial_coefficients((2, 1)) is first
    plans = []

    def work():
        plans.append(ctx.plan(12))

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(p is plans[0] for p in plans)


def test_rejects_nonpositive_alpha():
    with pytest.raises(ValidationError):
        JackContext(0.0, 2)
