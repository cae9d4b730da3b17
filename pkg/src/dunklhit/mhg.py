"""Truncated hypergeometric series of one and two vector arguments with Jack parameter alpha.

    pFq(a; b; x)    = sum_k  prod (a_i)_k / prod (b_j)_k  C_k(x) / |k|!
    pFq(a; b; x, y) = sum_k  prod (a_i)_k / prod (b_j)_k  C_k(x) C_k(y) / (C_k(1) |k|!)

Terms are assembled in log space (C_k/|k|! = alpha^|k| P_k / c'_k) and grouped
by weight; the series is cut at the first weight where two consecutive level
sums fall below ``tolerance`` times the running partial sum.
"""

from dataclasses import dataclass, field
import math
import threading

import numpy as np

from .errors import DivergenceError, PoleError, ValidationError
from .partition_jack import (get_context, jack_P_all, log_cprime, log_gen_pochhammer,
                             log_p_at_one)

DEFAULT_MAX_WEIGHT = 60
DEFAULT_TOLERANCE = 1e-15


@dataclass(frozen=True)
class SeriesSpec:
    p: int
    q: int
    upper: tuple
    lower: tuple
    jack_alpha: float
    max_weight: int = DEFAULT_MAX_WEIGHT
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(float(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in self.lower))
        if self.p not in (0, 1, 2) or self.q not in (0, 1, 2):
            raise ValidationError("p and q must lie in {0,1,2}", where="mhg.SeriesSpec")
        if len(self.upper) != self.p or len(self.lower) != self.q:
            raise ValidationError("parameter counts must match p and q", where="mhg.SeriesSpec")
        if not self.jack_alpha > 0:
            raise ValidationError("jack_alpha must be > 0", where="mhg.SeriesSpec")
        if self.max_weight < 1:
            raise ValidationError("max_weight must be >= 1", where="mhg.SeriesSpec")

    @property
    def k1(self):
        return 1.0 / self.jack_alpha

    @classmethod
    def make(cls, upper, lower, k1, **kw):
        return cls(len(upper), len(lower), tuple(upper), tuple(lower), 1.0 / k1, **kw)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    tail_estimate: float
    terms_used: int
    weight_used: int
    converged: bool
    levels: np.ndarray = field(repr=False, compare=False)


def check_poles(spec, m):
    """PoleError if some (b)_k vanishes for an enumerated partition."""
    k1 = spec.k1
    for b in spec.lower:
        for i in range(min(m, spec.max_weight)):
            for j in range((spec.max_weight // (i + 1))):
                v = b - k1 * i + j
                if abs(v) <= 1e-13 * max(1.0, abs(b)):
                    raise PoleError(
                        f"lower parameter {b} gives a vanishing Pochhammer at row {i + 1}",
                        where="mhg.SeriesSpec",
                    )


_COEF_CACHE = {}
_COEF_LOCK = threading.Lock()


def _log_coefficients(spec, m, two_arg):
    """(sign, log|coef|) per partition in plan order for the series without the P_k factor."""
    key = (spec.upper, spec.lower, spec.jack_alpha, m, spec.max_weight, two_arg)
    hit = _COEF_CACHE.get(key)
    if hit is not None:
        return hit
    ctx = get_context(spec.jack_alpha, m)
    parts = ctx.plan(spec.max_weight).partitions
    alpha, k1 = spec.jack_alpha, spec.k1
    la = math.log(alpha)
    n = len(parts)
    sign = np.ones(n)
    logc = np.empty(n)
    for idx, kap in enumerate(parts):
        w = sum(kap)
        if w > spec.max_weight:
            sign[idx], logc[idx] = 0.0, -np.inf
            continue
        s, acc = 1, w * la - log_cprime(kap, alpha)
        for a in spec.upper:
            sa, l = log_gen_pochhammer(a, kap, k1)
            s *= sa
            acc += l
        for b in spec.lower:
            sb, l = log_gen_pochhammer(b, kap, k1)
            s *= sb
            acc -= l
        if two_arg:
            acc -= log_p_at_one(kap, m, alpha)
        sign[idx] = s
        logc[idx] = acc if s else -np.inf
    with _COEF_LOCK:
        _COEF_CACHE[key] = (sign, logc)
    return sign, logc


def _scaled_values(x, ctx, max_weight):
    x = np.asarray(x, dtype=float)
    s = float(np.max(np.abs(x))) if x.size else 0.0
    if s == 0.0:
        return None, 0.0
    return jack_P_all(x, ctx, max_weight, scale=s), math.log(s)


def level_sums(sign, logc, weights, x_vals_list, log_scales, max_weight):
    """Sum terms per weight; x_vals_list holds P_k(x/s) arrays, log_scales the log s."""
    total_log = logc + weights * sum(log_scales)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = sign * np.exp(total_log)
        for v in x_vals_list:
            terms = terms * v
    terms = np.where(sign == 0, 0.0, terms)
    return np.bincount(weights, weights=terms, minlength=max_weight + 1)[: max_weight + 1]


def truncate(levels, tolerance):
    """(value, tail, weight_used, converged) following the two-consecutive-levels rule."""
    partial = np.cumsum(levels)
    for w in range(1, len(levels)):
        scale = abs(partial[w])
        if abs(levels[w]) <= tolerance * scale and abs(levels[w - 1]) <= tolerance * scale:
            return float(partial[w]), float(abs(levels[w])), w, True
    W = len(levels) - 1
    return float(partial[W]), float(abs(levels[W])), W, False


def _finish(levels, weights, spec):
    if not np.all(np.isfinite(levels)):
        raise DivergenceError("non-finite level sum", where="mhg.hyper")
    value, tail, W, ok = truncate(levels, spec.tolerance)
    if not ok and len(levels) > 4:
        a = np.abs(levels[-4:])
        if a[0] < a[1] < a[2] < a[3] and a[3] > spec.tolerance * abs(value):
            raise DivergenceError(
                f"level sums still growing at max weight {spec.max_weight}",
                where="mhg.hyper",
            )
    used = int(np.count_nonzero(weights <= W))
    return SeriesResult(value, tail, used, W, ok, levels)


def hyper(spec, x, ctx=None):
    """Truncated pFq of one vector argument."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(x)
    if spec.p == 2 and spec.q == 1 and np.max(np.abs(x)) >= 1:
        raise ValidationError("2F1 needs max|x_i| < 1", where="mhg.hyper")
    check_poles(spec, m)
    ctx = ctx or get_context(spec.jack_alpha, m)
    plan = ctx.plan(spec.max_weight)
    weights = plan.weights
    sign, logc = _log_coefficients(spec, m, False)
    vals, ls = _scaled_values(x, ctx, spec.max_weight)
    if vals is None:
        levels = np.zeros(spec.max_weight + 1)
        levels[0] = 1.0
    else:
        levels = level_sums(sign, logc, weights, [vals], [ls], spec.max_weight)
    return _finish(levels, weights, spec)


def hyper2(spec, x, y, ctx=None):
    """Truncated pFq of two vector arguments."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if len(x) != len(y):
        raise ValidationError("x and y must have equal length", where="mhg.hyper2")
    m = len(x)
    check_poles(spec, m)
    ctx = ctx or get_context(spec.jack_alpha, m)
    weights = ctx.plan(spec.max_weight).weights
    sign, logc = _log_coefficients(spec, m, True)
    vx, lx = _scaled_values(x, ctx, spec.max_weight)
    vy, ly = _scaled_values(y, ctx, spec.max_weight)
    if vx is None or vy is None:
        levels = np.zeros(spec.max_weight + 1)
        levels[0] = 1.0
    else:
        levels = level_sums(sign, logc, weights, [vx, vy], [lx, ly], spec.max_weight)
    return _finish(levels, weights, spec)


def kummer_residual(a, b, x, ctx=None, P_max=30):
    """Relative gap in e^{-sum x} 1F1(a; b; x) = 1F1(b - a; b; -x) at matched truncation."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = ctx.jack_alpha if ctx is not None else 1.0
    lhs_spec = SeriesSpec(1, 1, (a,), (b,), alpha, max_weight=P_max, tolerance=0.0)
    rhs_spec = SeriesSpec(1, 1, (b - a,), (b,), alpha, max_weight=P_max, tolerance=0.0)
    lhs = math.exp(-x.sum()) * hyper(lhs_spec, x, ctx).value
    rhs = hyper(rhs_spec, -x, ctx).value
    den = max(abs(lhs), abs(rhs))
    return 0.0 if den == 0 else abs(lhs - rhs) / den


def bessel_DW(rs, k, x, y, max_weight=40, tolerance=DEFAULT_TOLERANCE):
    """W-invariant generalized Bessel function D_k^W(x, y) = sum_w D_k(x, w y).

    Type A: |W| 0F0(x; y).  Type B: |W| 0F1(k0 + (m-1) k1 + 1/2; x^2/2, y^2/2).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m = rs.m
    k1 = float(k.k1) if m > 1 else 1.0
    alpha = 1.0 / k1 if k1 > 0 else 1.0
    if rs.family == "A":
        spec = SeriesSpec(0, 0, (), (), alpha, max_weight, tolerance)
        return rs.weyl_order * hyper2(spec, x, y).value
    if rs.family == "B":
        mu = float(k.k0) + (m - 1) * float(k.k1) + 0.5
        spec = SeriesSpec(0, 1, (), (mu,), alpha, max_weight, tolerance)
        return rs.weyl_order * hyper2(spec, x * x / 2, y * y / 2).value
    raise ValidationError("bessel_DW implemented for types A and B",
                          where="mhg.bessel_DW")
