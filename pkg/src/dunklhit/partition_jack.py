"""Partitions, generalized Pochhammer symbols and Jack polynomials (C-normalization).

Jack polynomials are evaluated through the branching rule

    P_k(x_1..x_n) = sum_{k/mu horizontal strip} psi_{k/mu} P_mu(x_1..x_{n-1}) x_n^{|k/mu|}

whose coefficients depend only on (alpha, m, max weight).  They are stored in a
``BranchPlan`` that the context builds once and reuses; evaluating all Jack
polynomials up to a given weight at a point is then a sparse sweep over the
plan, which is what the compiled kernel accelerates.  Monomial coefficients
come out of the same recursion (sum over Gelfand-Tsetlin chains) and are cached
per (partition, monomial) pair.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import threading

import numpy as np

from . import _backend
from .errors import ValidationError


def as_partition(parts):
    """Validate and normalize to a tuple without trailing zeros."""
    parts = tuple(int(p) for p in parts)
    if any(p < 0 for p in parts):
        raise ValidationError(f"negative part in {parts}", where="partition_jack.Partition")
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ValidationError(f"parts not weakly decreasing: {parts}",
                              where="partition_jack.Partition")
    while parts and parts[-1] == 0:
        parts = parts[:-1]
    return parts


def weight(kappa):
    return sum(kappa)


def enumerate_partitions(max_weight, max_length):
    """All partitions of weight <= max_weight with <= max_length parts.

    Ordered by weight, then reverse-lexicographically inside a weight.
    """
    if max_weight < 0:
        raise ValidationError("max_weight must be >= 0", where="partition_jack.enumerate_partitions")
    out = [()]
    for w in range(1, max_weight + 1):
        out.extend(_partitions_of(w, max_length, w))
    return out


def _partitions_of(n, max_len, max_part):
    if n == 0:
        yield ()
        return
    if max_len == 0:
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions_of(n - first, max_len - 1, first):
            yield (first,) + rest


def conjugate(kappa):
    if not kappa:
        return ()
    return tuple(sum(1 for p in kappa if p > j) for j in range(kappa[0]))


def gen_pochhammer(a, tau, k1):
    """(a)_tau = prod_i (a - k1 (i-1))_{tau_i}; exact for rational inputs."""
    out = 1
    for i, ti in enumerate(tau):
        base = a - k1 * i
        for j in range(ti):
            out *= base + j
    return out


def log_gen_pochhammer(a, tau, k1):
    """(sign, log|.|) of the generalized Pochhammer symbol; sign 0 when it vanishes."""
    sign, acc = 1, 0.0
    for i, ti in enumerate(tau):
        base = a - k1 * i
        for j in range(ti):
            v = base + j
            if v == 0:
                return 0, -math.inf
            if v < 0:
                sign = -sign
            acc += math.log(abs(v))
    return sign, acc


def hook_products(kappa, alpha):
    """(c_k, c'_k) with c = prod(alpha*a + l + 1), c' = prod(alpha*(a+1) + l)."""
    kc = conjugate(kappa)
    c, cp = 1, 1
    for i, ki in enumerate(kappa):
        for j in range(ki):
            arm = ki - j - 1
            leg = kc[j] - i - 1
            c *= alpha * arm + leg + 1
            cp *= alpha * (arm + 1) + leg
    return c, cp


def log_cprime(kappa, alpha):
    kc = conjugate(kappa)
    acc = 0.0
    for i, ki in enumerate(kappa):
        for j in range(ki):
            acc += math.log(alpha * (ki - j) + kc[j] - i - 1)
    return acc


def _b(arm, leg, alpha):
    return (alpha * arm + leg + 1) / (alpha * arm + alpha + leg)


def psi_strip(kappa, mu, alpha):
    """Branching coefficient psi_{kappa/mu} for a horizontal strip (P-normalization)."""
    L = len(kappa)
    mu = tuple(mu) + (0,) * (L - len(mu))
    mc = conjugate(tuple(p for p in mu if p))
    cols = set()
    rows = []
    for i in range(L):
        if kappa[i] > mu[i]:
            rows.append(i)
            cols.update(range(mu[i], kappa[i]))
    out = 1
    for i in rows:
        for j in range(mu[i]):
            if j in cols:
                continue
            leg = mc[j] - i - 1
            out *= _b(mu[i] - j - 1, leg, alpha) / _b(kappa[i] - j - 1, leg, alpha)
    return out


def _strips(kappa, n):
    """mu with kappa/mu a horizontal strip and len(mu) <= n-1."""
    L = len(kappa)
    if L > n:
        return
    k = list(kappa) + [0]
    ranges = [range(k[i + 1], k[i] + 1) for i in range(L)]

    def rec(i, acc):
        if i == L:
            mu = tuple(p for p in acc if p)
            if len(mu) <= n - 1:
                yield mu
            return
        for v in ranges[i]:
            yield from rec(i + 1, acc + (v,))

    yield from rec(0, ())


@dataclass
class BranchLevel:
    parts: list
    index: dict
    rows: np.ndarray
    cols: np.ndarray
    degs: np.ndarray
    psi: np.ndarray
    psi_exact: list


@dataclass
class BranchPlan:
    m: int
    max_weight: int
    levels: list          # levels[n] for n = 0..m
    weights: np.ndarray   # weights of the top-level partitions

    @property
    def partitions(self):
        return self.levels[-1].parts


def build_plan(alpha, m, max_weight, exact=False):
    levels = [BranchLevel([()], {(): 0}, *(np.zeros(0, dtype=np.int64),) * 3,
                          np.zeros(0), [])]
    for n in range(1, m + 1):
        parts = enumerate_partitions(max_weight, n)
        index = {p: i for i, p in enumerate(parts)}
        prev = levels[-1].index
        rows, cols, degs, psi, psi_ex = [], [], [], [], []
        fast = None if exact else _backend.psi_kernel()
        for r, kap in enumerate(parts):
            wk = sum(kap)
            for mu in _strips(kap, n):
                if fast is not None and kap and kap[0] <= 256:
                    v = fast(kap, mu, alpha)
                else:
                    v = psi_strip(kap, mu, alpha)
                rows.append(r)
                cols.append(prev[mu])
                degs.append(wk - sum(mu))
                psi.append(float(v))
                if exact:
                    psi_ex.append(v)
        levels.append(BranchLevel(parts, index,
                                  np.array(rows, dtype=np.int64),
                                  np.array(cols, dtype=np.int64),
                                  np.array(degs, dtype=np.int64),
                                  np.array(psi, dtype=float), psi_ex))
    weights = np.array([sum(p) for p in levels[-1].parts], dtype=np.int64)
    return BranchPlan(m, max_weight, levels, weights)


class JackContext:
    """Jack parameter, variable count and the append-only caches built on them.

    Readers never lock; insertion happens under a lock and only adds keys, so a
    context can be shared across threads.
    """

    def __init__(self, jack_alpha, m, exact=False):
        if not jack_alpha > 0:
            raise ValidationError(f"jack_alpha must be > 0, got {jack_alpha}",
                                  where="partition_jack.JackContext")
        if exact:
            jack_alpha = Fraction(jack_alpha)
        self.jack_alpha = jack_alpha
        self.m = int(m)
        self.exact = bool(exact)
        self._lock = threading.Lock()
        self._plans = {}
        self._coef = {}

    @classmethod
    def from_k1(cls, k1, m, exact=False):
        if exact:
            return cls(1 / Fraction(k1), m, exact=True)
        return cls(1.0 / k1, m)

    def plan(self, max_weight):
        """Smallest cached plan covering ``max_weight`` (built on demand)."""
        for w, p in self._plans.items():
            if w >= max_weight:
                return p
        with self._lock:
            for w, p in self._plans.items():
                if w >= max_weight:
                    return p
            p = build_plan(self.jack_alpha, self.m, max_weight, exact=self.exact)
            self._plans = {**self._plans, max_weight: p}
            return p

    def c_factor(self, kappa):
        """C_k / P_k = alpha^|k| |k|! / c'_k."""
        _, cp = hook_products(kappa, self.jack_alpha)
        return self.jack_alpha ** weight(kappa) * math.factorial(weight(kappa)) / cp

    def p_monomial_coefficient(self, kappa, comp):
        """Coefficient of x^comp in P_kappa(x_1..x_len(comp)), via strip chains."""
        kappa, comp = tuple(kappa), tuple(comp)
        key = ("P", kappa, comp)
        hit = self._coef.get(key)
        if hit is not None:
            return hit
        n = len(comp)
        if len(kappa) > n or sum(kappa) != sum(comp):
            val = 0
        elif n == 0:
            val = 1
        else:
            val = 0
            last = comp[-1]
            for mu in _strips(kappa, n):
                if sum(kappa) - sum(mu) == last:
                    sub = self.p_monomial_coefficient(mu, comp[:-1])
                    if sub:
                        val += psi_strip(kappa, mu, self.jack_alpha) * sub
        with self._lock:
            self._coef.setdefault(key, val)
        return self._coef[key]

    def monomial_coefficients(self, tau):
        """{lambda: coefficient of m_lambda in C_tau} in ``self.m`` variables."""
        tau = as_partition(tau)
        key = ("C", tau)
        hit = self._coef.get(key)
        if hit is not None:
            return hit
        cf = self.c_factor(tau)
        out = {}
        for lam in _partitions_of(weight(tau), self.m, weight(tau)):
            comp = lam + (0,) * (self.m - len(lam))
            v = self.p_monomial_coefficient(tau, comp)
            if v:
                out[lam] = cf * v
        with self._lock:
            self._coef.setdefault(key, out)
        return self._coef[key]


_CONTEXTS = {}
_CTX_LOCK = threading.Lock()


def get_context(jack_alpha, m):
    """Shared float context per (alpha, m), so plans are built once per process."""
    key = (float(jack_alpha), int(m))
    ctx = _CONTEXTS.get(key)
    if ctx is None:
        with _CTX_LOCK:
            ctx = _CONTEXTS.setdefault(key, JackContext(float(jack_alpha), int(m)))
    return ctx


def jack_P_all(x, ctx, max_weight, scale=None):
    """P_k(x) for every partition of the plan covering ``max_weight``, in plan order.

    ``x`` may have shape (m,) or (m, npts).  If ``scale`` is given the values
    returned are P_k(x/scale), i.e. the caller multiplies by scale^|k|.
    """
    plan = ctx.plan(max_weight)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != ctx.m:
        raise ValidationError(f"expected {ctx.m} variables, got {x.shape[0]}",
                              where="partition_jack.jack_C")
    if scale is not None:
        x = x / scale
    return _backend.kernels.jack_levels(plan, x, max_weight)


def _eval_monomials_exact(coefs, x):
    from itertools import permutations
    total = 0
    for lam, c in coefs.items():
        comp = lam + (0,) * (len(x) - len(lam))
        acc = 0
        for perm in set(permutations(comp)):
            term = 1
            for xi, e in zip(x, perm):
                term *= xi ** e
            acc += term
        total += c * acc
    return total


def jack_C(tau, x, ctx):
    """C_tau^{(alpha)}(x).  Partitions longer than x give 0."""
    tau = as_partition(tau)
    n = len(x)
    if len(tau) > n:
        return 0
    if ctx.exact:
        sub = ctx if n == ctx.m else JackContext(ctx.jack_alpha, n, exact=True)
        return _eval_monomials_exact(sub.monomial_coefficients(tau), list(x))
    sub = ctx if n == ctx.m else JackContext(ctx.jack_alpha, n)
    plan = sub.plan(weight(tau))
    i = plan.levels[-1].index[tau]
    vals = jack_P_all(np.asarray(x, dtype=float), sub, weight(tau))
    return float(sub.c_factor(tau) * vals[i])


def jack_C_at_one(tau, m, ctx):
    """C_tau(1,...,1) in m variables from the closed hook/content product."""
    tau = as_partition(tau)
    if len(tau) > m:
        return 0
    alpha = ctx.jack_alpha
    c, cp = hook_products(tau, alpha)
    num = 1
    for i, ti in enumerate(tau):
        for j in range(ti):
            num *= m - i + alpha * j
    w = weight(tau)
    val = alpha ** w * math.factorial(w) * num / (c * cp)
    return val if ctx.exact else float(val)


def log_p_at_one(kappa, m, alpha):
    """log P_k(1^m) = log J_k(1^m) - log c_k."""
    kc = conjugate(kappa)
    acc = 0.0
    for i, ki in enumerate(kappa):
        for j in range(ki):
            acc += math.log(m - i + alpha * j) - math.log(alpha * (ki - j - 1) + kc[j] - i)
    return acc
