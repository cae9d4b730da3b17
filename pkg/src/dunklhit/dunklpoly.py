"""Exact polynomial algebra for Dunkl operators.

Polynomials are dictionaries exponent-tuple -> Fraction.  Multiplicities are
converted to Fractions (floats go through their decimal string), so every
identity below is checked as an exact equality.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial
import math

import numpy as np
from scipy.stats import chi2

from .errors import (ExactDivisionError, IntegrationBudgetExceeded, NonHomogeneousError,
                     RankTooLarge, ValidationError)
from .partition_jack import JackContext, as_partition, weight
from .hitting import log_weight_integral, simplex_rule
from .rootsys import Multiplicity, build_root_system


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(str(float(v)))


class MultiPoly:
    """Immutable polynomial in m variables with rational coefficients."""

    __slots__ = ("m", "terms")

    def __init__(self, m, terms=None):
        self.m = int(m)
        clean = {}
        for e, c in (terms or {}).items():
            c = _frac(c)
            if c:
                e = tuple(int(v) for v in e)
                if len(e) != self.m:
                    raise ValidationError("exponent length must equal m", where="dunklpoly.MultiPoly")
                clean[e] = c
        self.terms = clean

    @classmethod
    def constant(cls, m, c=1):
        return cls(m, {(0,) * m: c})

    @classmethod
    def variable(cls, m, i):
        e = [0] * m
        e[i] = 1
        return cls(m, {tuple(e): 1})

    @classmethod
    def from_linear(cls, coeffs):
        m = len(coeffs)
        return cls(m, {tuple(int(j == i) for j in range(m)): c for i, c in enumerate(coeffs)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.m, other)
        return isinstance(other, MultiPoly) and self.m == other.m and self.terms == other.terms

    def __hash__(self):
        return hash((self.m, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}^{p}" if p > 1 else f"x{i + 1}" for i, p in enumerate(e) if p)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self):
        return len({sum(e) for e in self.terms}) <= 1

    def homogeneous_part(self, d):
        return MultiPoly(self.m, {e: c for e, c in self.terms.items() if sum(e) == d})

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.m != self.m:
                raise ValidationError("variable counts differ", where="dunklpoly.MultiPoly")
            return other
        return MultiPoly.constant(self.m, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.m, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.m, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = _frac(other)
            return MultiPoly(self.m, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.m, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = MultiPoly.constant(self.m)
        for _ in range(int(n)):
            out = out * self
        return out

    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return MultiPoly(self.m, out)

    def euler(self):
        """<x, grad> p."""
        return MultiPoly(self.m, {e: c * sum(e) for e, c in self.terms.items()})

    def compose_linear(self, M):
        """p(M x) for a rational m x m matrix M."""
        M = [[_frac(v) for v in row] for row in M]
        forms = [MultiPoly.from_linear(row) for row in M]
        powers = [[MultiPoly.constant(self.m)] for _ in range(self.m)]
        out = MultiPoly(self.m)
        for e, c in self.terms.items():
            term = MultiPoly.constant(self.m, c)
            for i, p in enumerate(e):
                while len(powers[i]) <= p:
                    powers[i].append(powers[i][-1] * forms[i])
                if p:
                    term = term * powers[i][p]
            out = out + term
        return out

    def divide_linear(self, a):
        """Exact quotient p / <a, x>; ExactDivisionError on a nonzero remainder."""
        a = [_frac(v) for v in a]
        j = max(i for i, v in enumerate(a) if v)
        rest = dict(self.terms)
        quot = {}
        while rest:
            e = max(rest, key=lambda f: (f[j], f))
            c = rest[e]
            if e[j] == 0:
                raise ExactDivisionError("division by a linear form left a remainder",
                                         where="dunklpoly.divide_linear")
            q = list(e)
            q[j] -= 1
            q = tuple(q)
            qc = c / a[j]
            quot[q] = quot.get(q, 0) + qc
            for i, ai in enumerate(a):
                if ai:
                    f = list(q)
                    f[i] += 1
                    f = tuple(f)
                    v = rest.get(f, 0) - qc * ai
                    if v:
                        rest[f] = v
                    else:
                        rest.pop(f, None)
        return MultiPoly(self.m, quot)

    def __call__(self, x):
        x = list(x)
        exact = all(isinstance(v, (int, Fraction)) for v in x)
        total = Fraction(0) if exact else 0.0
        for e, c in self.terms.items():
            t = c if exact else float(c)
            for xi, p in zip(x, e):
                if p:
                    t = t * xi ** p
            total += t
        return total

    def evaluate_many(self, Y):
        """Float values at the rows of Y."""
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(len(Y))
        for e, c in self.terms.items():
            out += float(c) * np.prod(Y ** np.array(e), axis=1)
        return out


@dataclass(frozen=True)
class GaussianPoly:
    """p(y) e^{-|y|^2/2}, stored through its polynomial part."""

    poly: MultiPoly

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return float(self.poly(list(y))) * math.exp(-float(y @ y) / 2)


# ---------------------------------------------------------------- Dunkl operators

@lru_cache(maxsize=None)
def _reflection_matrix(alpha):
    a = [Fraction(v) for v in alpha]
    n2 = sum(v * v for v in a)
    m = len(a)
    return tuple(tuple((1 if i == j else 0) - 2 * a[i] * a[j] / n2 for j in range(m))
                 for i in range(m))


def _root_data(rs, k):
    k = k if isinstance(k, Multiplicity) else Multiplicity(k1=k, k0=k if rs.family == "B" else None)
    ks = [_frac(v) for v in k.per_root(rs)]
    roots = [tuple(int(v) for v in a) for a in rs.positive_roots]
    return roots, ks


class DunklOperators:
    """T_1..T_m for a root system and multiplicity, with cached reflection differences."""

    def __init__(self, rs, k):
        self.rs = rs
        self.m = rs.m
        self.roots, self.ks = _root_data(rs, k)
        self._diff = {}

    def _quotients(self, p):
        key = p
        hit = self._diff.get(key)
        if hit is not None:
            return hit
        out = []
        for a, kv in zip(self.roots, self.ks):
            if not kv:
                out.append(None)
                continue
            d = p - p.compose_linear(_reflection_matrix(a))
            out.append(d.divide_linear(a) if d else MultiPoly(self.m))
        self._diff[key] = out
        return out

    def T(self, p, i):
        out = p.diff(i)
        for a, kv, q in zip(self.roots, self.ks, self._quotients(p)):
            if q is not None and a[i]:
                out = out + q * (kv * a[i])
        return out

    def laplacian(self, p):
        out = MultiPoly(self.m)
        for i in range(self.m):
            out = out + self.T(self.T(p, i), i)
        return out

    def T_gauss(self, g, i):
        """T_i on p e^{-|y|^2/2}: polynomial part T_i p - y_i p."""
        return GaussianPoly(self.T(g.poly, i) - g.poly * MultiPoly.variable(self.m, i))

    def apply_polynomial(self, phi, g):
        """phi(T_1..T_m) applied to the GaussianPoly g."""
        out = MultiPoly(self.m)
        cache = {(0,) * self.m: g.poly}
        for e in sorted(phi.terms, key=sum):
            out = out + self._monomial(e, cache) * phi.terms[e]
        return GaussianPoly(out)

    def _monomial(self, e, cache):
        if e in cache:
            return cache[e]
        i = max(j for j, v in enumerate(e) if v)
        prev = list(e)
        prev[i] -= 1
        base = self._monomial(tuple(prev), cache)
        res = self.T_gauss(GaussianPoly(base), i).poly
        cache[e] = res
        return res


def _ops(rs, k):
    return DunklOperators(rs, k)


def dunkl_derivative(p, i, rs, k):
    """T_i p = d_i p + sum_alpha k(alpha) alpha_i (p - p o sigma_alpha) / <alpha, x>."""
    return _ops(rs, k).T(p, i)


def dunkl_laplacian(p, rs, k):
    return _ops(rs, k).laplacian(p)


def hermitize(p, rs, k):
    """e^{-Delta_k/2} p for homogeneous p (a finite sum)."""
    if not p.is_homogeneous():
        raise NonHomogeneousError("hermitize needs a homogeneous polynomial",
                                  where="dunklpoly.hermitize")
    ops = _ops(rs, k)
    out = p
    cur = p
    for j in range(1, p.degree // 2 + 1):
        cur = ops.laplacian(cur)
        out = out + cur * Fraction((-1) ** j, 2 ** j * factorial(j))
    return out


def spectral_residual(H, d, rs, k):
    """[Delta_k - <x, grad>] H + d H (zero polynomial when the relation holds)."""
    return _ops(rs, k).laplacian(H) - H.euler() + H * d


def w_symmetrize(p, rs):
    """sum over w in W of p(w x)."""
    if rs.m > 4:
        raise RankTooLarge("explicit Weyl group needs m <= 4", where="dunklpoly.w_symmetrize")
    out = MultiPoly(p.m)
    for M in rs.weyl_matrices():
        out = out + p.compose_linear([[int(v) for v in row] for row in M])
    return out


def rodriguez_eval(phi, rs, k):
    """(-1)^deg e^{|y|^2/2} phi(T)(e^{-|y|^2/2}) as a polynomial."""
    if not phi.is_homogeneous():
        raise NonHomogeneousError("rodriguez_eval needs a homogeneous polynomial",
                                  where="dunklpoly.rodriguez_eval")
    if rs.m > 3:
        raise RankTooLarge("the exact path supports m <= 3", where="dunklpoly.rodriguez_eval")
    g = _ops(rs, k).apply_polynomial(phi, GaussianPoly(MultiPoly.constant(rs.m)))
    return g.poly * ((-1) ** max(phi.degree, 0))


# ---------------------------------------------------------------- Jack inputs

def jack_C_poly(tau, m, k1, squared=False):
    """C_tau^{(1/k1)} as a MultiPoly (in the squares of the variables if ``squared``)."""
    tau = as_partition(tau)
    alpha = 1 / _frac(k1)
    ctx = JackContext(alpha, m, exact=True)
    if len(tau) > m:
        return MultiPoly(m)
    terms = {}
    for lam, c in ctx.monomial_coefficients(tau).items():
        lam = tuple(lam) + (0,) * (m - len(lam))
        for perm in set(_perms(lam)):
            e = tuple(2 * v for v in perm) if squared else perm
            terms[e] = c
    return MultiPoly(m, terms)


def _perms(lam):
    return permutations(lam)


def jack_C_one(tau, m, k1):
    return jack_C_poly(tau, m, k1)([1] * m)


def phi_W_B(tau, m, k1):
    """(-1)^|tau| / |tau|! C_tau(y^2) / C_tau(1)."""
    tau = as_partition(tau)
    w = weight(tau)
    return jack_C_poly(tau, m, k1, squared=True) * Fraction((-1) ** w, factorial(w) * jack_C_one(tau, m, k1))


def jack_operator_gaussian(tau, rs, k, squared=True):
    """Polynomial part of C_tau(T_1^2,..,T_m^2)(e^{-|y|^2/2})."""
    k = k if isinstance(k, Multiplicity) else Multiplicity(k1=k, k0=k if rs.family == "B" else None)
    phi = jack_C_poly(tau, rs.m, k.k1 if rs.m > 1 else 1, squared=squared)
    if not phi:
        return MultiPoly(rs.m)
    return _ops(rs, k).apply_polynomial(phi, GaussianPoly(MultiPoly.constant(rs.m))).poly


# ---------------------------------------------------------------- integrals over C

def _chamber_weight(rs):
    out = MultiPoly.constant(rs.m)
    for a in rs.positive_roots:
        out = out * MultiPoly.from_linear([int(v) for v in a])
    return out


def chamber_gaussian_integral(p, rs, nodes=40):
    """int_C p(y) e^{-|y|^2/2} prod <alpha,y> dy by radial Gamma factors and simplex quadrature.

    Normalized by the closed form of the p = 1 integral (B and D only).
    """
    if rs.family == "A":
        raise ValidationError("chamber_gaussian_integral supports B and D",
                              where="dunklpoly.chamber_gaussian_integral")
    rays = rs.chamber_rays
    U, Wq = simplex_rule(len(rays), nodes)
    V = U @ rays
    norms = np.linalg.norm(V, axis=1)
    w = _chamber_weight(rs).evaluate_many(V)
    D0 = rs.n_positive
    m = rs.m

    def radial(d):
        n = d + D0 + m
        return math.lgamma(n / 2) + (n / 2) * math.log(2.0)

    base = float(np.sum(Wq * w * norms ** (-(D0 + m))))
    total = 0.0
    for d in sorted({sum(e) for e in p.terms}):
        pd = p.homogeneous_part(d)
        ang = float(np.sum(Wq * w * pd.evaluate_many(V) * norms ** (-(d + D0 + m))))
        total += ang / base * math.exp(radial(d) - radial(0))
    return total * chamber_mass(rs)


def chamber_mass(rs):
    """int_C e^{-|y|^2/2} prod <alpha,y> dy = g(0)/|W|."""
    return math.exp(log_weight_integral(rs, 0.5, 0.5)) / rs.weyl_order


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    std_error: float
    accepted: int
    budget: int


def chamber_mc_integral(p, rs, budget=200_000, seed=0, strata=20):
    """MC estimate of int_C p(y) e^{-|y|^2/2} prod <alpha,y> dy.

    The Gaussian is sampled with |y|^2 stratified in chi-square quantiles and
    directions uniform; samples outside C are rejected (acceptance 1/|W|).
    """
    if budget < 20 * strata:
        raise IntegrationBudgetExceeded(f"budget {budget} below {20 * strata}",
                                        where="dunklpoly.ctau_W")
    rng = np.random.default_rng(seed)
    m = rs.m
    w = _chamber_weight(rs)
    per = budget // strata
    means, vars_ = [], []
    accepted = 0
    for s in range(strata):
        u = (s + rng.random(per)) / strata
        r = np.sqrt(chi2.ppf(u, m))
        d = rng.standard_normal((per, m))
        d /= np.linalg.norm(d, axis=1)[:, None]
        Y = d * r[:, None]
        inside = np.all(Y @ rs.simple_roots.T > 0, axis=1)
        accepted += int(inside.sum())
        f = np.zeros(per)
        Yi = Y[inside]
        f[inside] = p.evaluate_many(Yi) * w.evaluate_many(Yi)
        means.append(f.mean())
        vars_.append(f.var(ddof=1) / per)
    if accepted < 100:
        raise IntegrationBudgetExceeded("too few samples inside the chamber",
                                        where="dunklpoly.ctau_W")
    norm = (2 * math.pi) ** (m / 2)
    value = norm * float(np.mean(means))
    se = norm * math.sqrt(float(np.sum(vars_))) / strata
    return IntegralEstimate(value, se, accepted, budget)


def ctau_W(phi, rs, k, budget=200_000, seed=0):
    """(-1)^deg int_C phi^W(T)(e^{-|y|^2/2}) prod <alpha, y> dy by Monte Carlo.

    ``phi`` is replaced by its W-average phi^W first (a no-op on invariant input).
    """
    if rs.m > 3:
        raise RankTooLarge("ctau_W supports m <= 3", where="dunklpoly.ctau_W")
    phi_w = w_symmetrize(phi, rs) * Fraction(1, rs.weyl_order)
    if not phi_w:
        return IntegralEstimate(0.0, 0.0, 0, budget)
    H = rodriguez_eval(phi_w, rs, k)
    return chamber_mc_integral(H, rs, budget, seed)


# ---------------------------------------------------------------- B-type coefficient identity

def coefficient_lhs_B(tau, m, k0, k1, method="quadrature", budget=400_000, seed=0):
    """int_C C_tau(T^2)(e^{-|y|^2/2}) V(y^2) prod y_i dy for B_m."""
    rs = build_root_system("B", m)
    k = Multiplicity(k1=_frac(k1), k0=_frac(k0))
    poly = jack_operator_gaussian(tau, rs, k)
    if method == "quadrature":
        return IntegralEstimate(chamber_gaussian_integral(poly, rs), 0.0, 0, 0)
    return chamber_mc_integral(poly, rs, budget, seed)


def _gen_poch_exact(a, tau, k1):
    out = Fraction(1)
    for i, t in enumerate(tau):
        for j in range(t):
            out *= a - i * k1 + j
    return out


def coefficient_rhs_B_pochhammer(tau, m, k0, k1):
    """Pochhammer-ratio form of the right side: ratio x |tau|! C_tau(1)^2 x 2-power."""
    tau = as_partition(tau)
    k0, k1 = _frac(k0), _frac(k1)
    num = _gen_poch_exact((k0 - k1) + m * (k1 - Fraction(1, 2)), tau, k1)
    den = _gen_poch_exact(k0 + (m - 1) * k1 + Fraction(1, 2), tau, k1)
    w = weight(tau)
    c1 = jack_C_one(tau, m, k1)
    return float(num / den * factorial(w) * c1 * c1) / 2 ** ((m + 1 + w) / 2)


def coefficient_rhs_B(tau, m, k0, k1):
    """Closed value of the same integral for |tau| <= 1.

    (-2)^|tau| C_tau(1) [l0 + (m-1) l1]_tau g(0)/|W| with l = k - 1/2; for
    |tau| = 1 this is Delta_k e^{-|y|^2/2} = (|y|^2 - m - 2 gamma) e^{-|y|^2/2}
    integrated radially.  Higher weights have no such product form; use
    ``coefficient_lhs_B(..., method="quadrature")`` for exact reference values.
    """
    tau = as_partition(tau)
    if weight(tau) > 1:
        raise ValidationError("closed form available for |tau| <= 1 only",
                              where="dunklpoly.coefficient_rhs_B")
    k0, k1 = _frac(k0), _frac(k1)
    a = (k0 - k1) + m * (k1 - Fraction(1, 2))
    w = weight(tau)
    c1 = jack_C_one(tau, m, k1)
    rs = build_root_system("B", m)
    return float((-2) ** w * c1 * _gen_poch_exact(a, tau, k1)) * chamber_mass(rs)


# ---------------------------------------------------------------- generating series and Mehler

class InvariantBasisB:
    """W-invariant basis p_kappa = C_kappa(x^2) of B_m with its exact pairing Gram matrix.

    The pairing is [p, q]_k = (p(T) q)(0).
    """

    def __init__(self, m, k0, k1, max_weight):
        from .partition_jack import enumerate_partitions
        self.rs = build_root_system("B", m)
        self.k = Multiplicity(k1=_frac(k1), k0=_frac(k0))
        self.ops = DunklOperators(self.rs, self.k)
        self.m = m
        jk1 = self.k.k1 if m > 1 else Fraction(1)
        self.parts = [tuple(p) for p in enumerate_partitions(max_weight, m)]
        self.polys = [jack_C_poly(p, m, jk1, squared=True) for p in self.parts]
        self.hermite = [hermitize(p, self.rs, self.k) for p in self.polys]
        self.gram_inv = {}
        by_w = {}
        for i, p in enumerate(self.parts):
            by_w.setdefault(weight(p), []).append(i)
        for w, idx in by_w.items():
            G = [[self.pairing(self.polys[i], self.polys[j]) for j in idx] for i in idx]
            inv = _invert(G)
            for a, i in enumerate(idx):
                for b, j in enumerate(idx):
                    self.gram_inv[(i, j)] = inv[a][b]
        self.by_weight = by_w

    def pairing(self, p, q):
        out = Fraction(0)
        zero = [0] * self.m
        cache = {(0,) * self.m: q}
        for e, c in p.terms.items():
            out += c * self._apply(e, cache)(zero)
        return out

    def _apply(self, e, cache):
        if e in cache:
            return cache[e]
        i = max(j for j, v in enumerate(e) if v)
        prev = list(e)
        prev[i] -= 1
        res = self.ops.T(self._apply(tuple(prev), cache), i)
        cache[e] = res
        return res

    def kernel_sum(self, fx, fy, w_max, r=1.0):
        """sum over weights <= w_max of Ginv_{ij} fx_i fy_j r^{2|kappa|}."""
        total = 0.0
        for w, idx in self.by_weight.items():
            if w > w_max:
                continue
            for i in idx:
                for j in idx:
                    total += float(self.gram_inv[(i, j)]) * fx[i] * fy[j] * r ** (2 * w)
        return total


def _invert(G):
    n = len(G)
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(G)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        pv = A[c][c]
        A[c] = [v / pv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [row[n:] for row in A]


def _bessel_B(basis, x, y, max_weight=60):
    from .mhg import bessel_DW
    k = Multiplicity(k1=float(basis.k.k1), k0=float(basis.k.k0))
    return bessel_DW(basis.rs, k, x, y, max_weight=max_weight, tolerance=0.0)


def generating_residual(basis, x, y, w):
    """|e^{-|y|^2/2} D^W(x,y) - |W| sum_{|kappa|<=w} Ginv H_kappa(x) p_kappa(y)|, relative."""
    x, y = list(map(float, x)), list(map(float, y))
    lhs = math.exp(-sum(v * v for v in y) / 2) * _bessel_B(basis, np.array(x), np.array(y))
    fx = [float(h(x)) for h in basis.hermite]
    fy = [float(p(y)) for p in basis.polys]
    rhs = basis.rs.weyl_order * basis.kernel_sum(fx, fy, w)
    return abs(lhs - rhs) / abs(lhs)


def mehler_residual(basis, x, y, r, w):
    """Relative gap in the W-invariant Mehler formula truncated at weight w."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    rs = basis.rs
    gamma = float(sum(basis.k.per_root(rs)))
    s = 1 - r * r
    rhs = (rs.weyl_order / s ** (gamma + rs.m / 2)
           * math.exp(-r * r * (x @ x + y @ y) / (2 * s))
           * _bessel_B(basis, x, r * y / s))
    fx = [float(h(list(x))) for h in basis.hermite]
    fy = [float(h(list(y))) for h in basis.hermite]
    lhs = rs.weyl_order ** 2 * basis.kernel_sum(fx, fy, w, r)
    return abs(lhs - rhs) / abs(rhs)
