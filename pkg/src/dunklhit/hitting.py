"""Tail distributions P_x(T_0 > t) of radial Dunkl processes in the Weyl chamber.

The reference process has multiplicities k with indices l = k - 1/2 >= 0; the
process whose tail is returned has index -l (multiplicities 1 - k).  For y = x/sqrt(t)

    P_x(T_0 > t) = (g0 / c_k) prod <alpha, y>^{2 l(alpha)} e^{-|y|^2/2} G(y),

    g(y) = int_C e^{-|z|^2/2} D_k^W(y, z) prod <alpha, z> dz,   G = g / g(0),

with c_k = int_{R^m} e^{-|z|^2/2} omega_k(z)^2 dz and g0 = g(0).  Both constants
have closed Selberg/Mehta forms, which are used; a seeded Monte-Carlo estimate
is available as a cross-check.

Two routes for G are provided:

``method="moment"``
    Expand D_k^W in Jack polynomials and integrate term by term over the
    chamber.  Every chamber moment factors into a Gamma-function radial part
    and an angular average of P_k over the spherical chamber, computed by a
    conical product rule on the simplex spanned by the chamber rays.

``method="hypergeometric"``
    The hypergeometric identifications: 1F1((m+1)/2; k0+(m-1)k1+1/2; y^2/2)
    for B, 1F1(m/2; (m-1)k1+1/2; y^2/2) for D and the b -> infinity limit of a
    Gauss series for A.  These coincide with the moment route for m = 1 but
    not in higher rank (see the tests and README).
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
import threading

import numpy as np
from scipy.special import gammaln, roots_jacobi

from . import mhg
from .errors import (ConvergenceError, ExtrapolationUnstable, IntegrationBudgetExceeded,
                     NoHittingError, BoundaryError, ValidationError)
from .partition_jack import (get_context, jack_P_all, log_cprime, log_gen_pochhammer,
                             log_p_at_one)
from .rootsys import Multiplicity, build_root_system, distance_to_boundary, in_chamber

log = logging.getLogger(__name__)

SERIES_CAP = 40.0
DEFAULT_MAX_WEIGHT = {1: 120, 2: 80, 3: 56, 4: 36}
METHODS = ("moment", "hypergeometric")


# ---------------------------------------------------------------- queries

@dataclass(frozen=True)
class SurvivalQuery:
    rs: object
    k: Multiplicity
    x: tuple
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        validate_query(self)

    @property
    def y(self):
        return np.asarray(self.x) / math.sqrt(self.t)


def _in_range(v, lo, hi, lo_open=False):
    return (lo < v if lo_open else lo <= v) and v <= hi


def validate_query(q):
    rs, k = q.rs, q.k
    where = "hitting.SurvivalQuery"
    if len(q.x) != rs.m:
        raise ValidationError(f"x must have {rs.m} coordinates", where=where)
    if not (q.t > 0 and math.isfinite(q.t)):
        raise ValidationError("t must be > 0", where=where)
    if not in_chamber(rs, q.x):
        raise ValidationError("x must lie strictly inside the chamber", where=where)
    if rs.family == "B":
        if k.k0 is None:
            raise ValidationError("k0 is required for type B", where=where)
        if not _in_range(float(k.k0), 0.5, 1.0):
            raise ValidationError("k0 must lie in [1/2,1]", where=where)
        if rs.m > 1:
            if not _in_range(float(k.k1), 0.5, 1.0):
                raise ValidationError("k1 must lie in [1/2,1]", where=where)
            if float(k.k0) == 0.5 and float(k.k1) == 0.5:
                raise NoHittingError("(k0,k1) = (1/2,1/2): every index vanishes, T0 is infinite",
                                     where=where)
        elif float(k.k0) == 0.5:
            raise NoHittingError("k0 = 1/2: the index vanishes, T0 is infinite", where=where)
    else:
        if rs.family == "A" and rs.m < 2:
            raise NoHittingError("A with m = 1 has no roots, T0 is infinite", where=where)
        if not _in_range(float(k.k1), 0.5, 1.0, lo_open=True):
            raise ValidationError("k1 must lie in (1/2,1]", where=where)


def make_query(family, m, x, t, k0=None, k1=None):
    rs = build_root_system(family, m)
    if rs.family == "B" and rs.m == 1 and k1 is None:
        k1 = 1.0
    return SurvivalQuery(rs, Multiplicity(k1=k1, k0=k0 if rs.family == "B" else None), x, t)


# ---------------------------------------------------------------- constants

def _kv(k, rs):
    k1 = float(k.k1) if k.k1 is not None else 0.0
    k0 = float(k.k0) if k.k0 is not None else 0.0
    return k0, k1


def log_selberg_B(m, k0, k1):
    """log of int_{R^m} e^{-|y|^2/2} prod |y_i|^{2k0} |V(y^2)|^{2k1} dy."""
    out = (m * (k0 + 0.5) + k1 * m * (m - 1)) * math.log(2.0)
    for j in range(m):
        out += gammaln(k0 + 0.5 + j * k1) + gammaln(1 + (j + 1) * k1) - gammaln(1 + k1)
    return float(out)


def log_mehta_A(m, k):
    """log of int_{R^m} e^{-|y|^2/2} |V(y)|^{2k} dy."""
    out = 0.5 * m * math.log(2 * math.pi)
    for j in range(1, m + 1):
        out += gammaln(1 + j * k) - gammaln(1 + k)
    return float(out)


def log_weight_integral(rs, k0, k1):
    """log of int_{R^m} e^{-|y|^2/2} prod |<alpha,y>|^{2k(alpha)} dy."""
    if rs.family == "A":
        return log_mehta_A(rs.m, k1)
    if rs.family == "B":
        return log_selberg_B(rs.m, k0, k1 if rs.m > 1 else 0.0)
    return log_selberg_B(rs.m, 0.0, k1)


@dataclass(frozen=True)
class NormalizationConstants:
    c_k: float
    g0: float
    C_k: float
    c_k_err: float = 0.0
    g0_err: float = 0.0
    C_k_err: float = 0.0
    method: str = "closed"

    @property
    def C(self):
        """Prefactor g0/c_k of the tail written in the variable y = x/sqrt(t)."""
        return self.g0 / self.c_k


def hypergeometric_scale_log(rs, k0, k1):
    """log of the factor turning g0/c_k into C_k for the x^2/2t-variable prefactor."""
    m = rs.m
    l0, l1 = k0 - 0.5, k1 - 0.5
    if rs.family == "B":
        return (m * l0 + (m * (m - 1) * l1 if m > 1 else 0.0)) * math.log(2.0)
    if rs.family == "D":
        return m * (m - 1) * l1 * math.log(2.0)
    return 0.0


def normalization_constants(rs, k, budget=None, seed=0, method="closed"):
    """c_k, g0 and C_k.  ``method="mc"`` estimates c_k and g0 by Gaussian sampling."""
    if rs.m > 4:
        raise ValidationError("normalization constants need m <= 4",
                              where="hitting.normalization_constants")
    k0, k1 = _kv(k, rs)
    scale = hypergeometric_scale_log(rs, k0, k1)
    if method == "closed":
        lc = log_weight_integral(rs, k0, k1)
        lg = log_weight_integral(rs, 0.5, 0.5)
        c_k, g0 = math.exp(lc), math.exp(lg)
        return NormalizationConstants(c_k, g0, math.exp(lg - lc + scale))
    if method != "mc":
        raise ValidationError(f"unknown method {method!r}", where="hitting.normalization_constants")
    n = int(budget or 400_000)
    rng = np.random.default_rng(seed)
    kk = np.array([k0 if o == 0 else k1 for o in rs.orbits])
    acc_c, acc_g = [], []
    chunk = 100_000
    for start in range(0, n, chunk):
        Y = rng.standard_normal((min(chunk, n - start), rs.m))
        P = np.abs(Y @ rs.positive_roots.T)
        acc_c.append(np.prod(P ** (2 * kk), axis=1))
        acc_g.append(np.prod(P, axis=1))
    fc = np.concatenate(acc_c)
    fg = np.concatenate(acc_g)
    norm = (2 * math.pi) ** (rs.m / 2)
    c_k, g0 = norm * fc.mean(), norm * fg.mean()
    c_err = norm * fc.std(ddof=1) / math.sqrt(n)
    g_err = norm * fg.std(ddof=1) / math.sqrt(n)
    if not (c_k > 0 and g0 > 0) or c_err > 0.2 * c_k or g_err > 0.2 * g0:
        raise IntegrationBudgetExceeded(
            f"budget {n} too small for a stable estimate", where="hitting.normalization_constants")
    C = g0 / c_k
    C_err = C * math.hypot(c_err / c_k, g_err / g0)
    f = math.exp(scale)
    return NormalizationConstants(c_k, g0, C * f, c_err, g_err, C_err * f, method="mc")


# ---------------------------------------------------------------- chamber moments

def simplex_rule(r, n):
    """Conical product rule on the (r-1)-simplex: barycentric nodes (N, r) and weights."""
    if r == 1:
        return np.ones((1, 1)), np.ones(1)
    factors = []
    for i in range(r - 1):
        beta = r - 2 - i
        x, w = roots_jacobi(n, 0.0, beta)
        s = (x + 1) / 2
        factors.append((s, w / 2 ** (beta + 1)))
    grids = np.meshgrid(*[f[0] for f in factors], indexing="ij")
    wgrid = np.meshgrid(*[f[1] for f in factors], indexing="ij")
    S = [g.ravel() for g in grids]
    W = np.prod([g.ravel() for g in wgrid], axis=0)
    N = S[0].size
    U = np.empty((N, r))
    rest = np.ones(N)
    for i in range(r - 1):
        U[:, i] = rest * (1 - S[i])
        rest = rest * S[i]
    U[:, r - 1] = rest
    return U, W


@dataclass
class MomentTable:
    sign: np.ndarray
    logc: np.ndarray
    max_weight: int
    nodes: int


_MOMENTS = {}
_MOM_LOCK = threading.Lock()


def _kernel_shift(rs, k0, k1):
    """Lower parameter of the 0F1 kernel for B and D; None for the 0F0 kernel of A."""
    if rs.family == "A":
        return None
    if rs.family == "B":
        return k0 + (rs.m - 1) * k1 + 0.5
    return (rs.m - 1) * k1 + 0.5


def _jack_alpha(rs, k1):
    return 1.0 / k1 if rs.m > 1 else 1.0


def _moment_nodes(rs, max_weight):
    d = 1 if rs.family == "A" else 2
    return max(24, int(math.ceil(0.55 * (d * max_weight + rs.n_positive))) + 8)


def chamber_moments(rs, k0, k1, max_weight, nodes=None):
    """Per-partition (sign, log|coef|) of the series G(X) = sum coef_k P_k(X).

    coef_k = alpha^|k| / c'_k * R_|k| * <P_k(Y(theta))> / (P_k(1) (mu)_k),
    where <.> is the normalized angular average over the spherical chamber with
    weight prod <alpha, theta>, Y(theta) is the kernel argument (theta^2/2 for
    B and D, theta for A) and R_w the ratio of radial Gamma integrals.
    """
    nodes = nodes or _moment_nodes(rs, max_weight)
    key = (rs.family, rs.m, round(k0, 15), round(k1, 15), max_weight, nodes)
    hit = _MOMENTS.get(key)
    if hit is not None:
        return hit
    alpha = _jack_alpha(rs, k1)
    ctx = get_context(alpha, rs.m)
    plan = ctx.plan(max_weight)
    parts = plan.partitions
    rays = rs.chamber_rays
    r = len(rays)
    U, Wq = simplex_rule(r, nodes)
    V = U @ rays
    norms = np.linalg.norm(V, axis=1)
    theta = V / norms[:, None]
    pair = theta @ rs.positive_roots.T
    wts = Wq * norms ** (-r) * np.prod(pair, axis=1)
    wts = wts / wts.sum()
    if rs.family == "A":
        Y = theta
        d = 1
    else:
        Y = theta * theta / 2
        d = 2
    acc = np.zeros(len(parts))
    chunk = max(1, 4_000_000 // max(len(parts), 1))
    for a in range(0, len(wts), chunk):
        vals = jack_P_all(Y[a:a + chunk].T, ctx, max_weight)
        acc += vals @ wts[a:a + chunk]
    D0 = rs.n_positive
    mu = _kernel_shift(rs, k0, k1)
    la = math.log(alpha)
    sign = np.zeros(len(parts))
    logc = np.full(len(parts), -np.inf)
    for i, kap in enumerate(parts):
        w = sum(kap)
        if w > max_weight or acc[i] == 0.0:
            continue
        s = 1.0 if acc[i] > 0 else -1.0
        lc = (w * la - log_cprime(kap, alpha) + math.log(abs(acc[i]))
              - log_p_at_one(kap, rs.m, alpha)
              + 0.5 * d * w * math.log(2.0)
              + gammaln((D0 + d * w + r) / 2) - gammaln((D0 + r) / 2))
        if mu is not None:
            sp, lp = log_gen_pochhammer(mu, kap, 1.0 / alpha)
            s *= sp
            lc -= lp
        sign[i], logc[i] = s, lc
    table = MomentTable(sign, logc, max_weight, nodes)
    with _MOM_LOCK:
        _MOMENTS[key] = table
    return table


def g_ratio_moment(rs, k0, k1, X, max_weight, tolerance=1e-15):
    """G at kernel argument X via the chamber-moment series (returns SeriesResult)."""
    table = chamber_moments(rs, k0, k1, max_weight)
    alpha = _jack_alpha(rs, k1)
    ctx = get_context(alpha, rs.m)
    weights = ctx.plan(max_weight).weights
    X = np.asarray(X, dtype=float)
    s = float(np.max(np.abs(X)))
    if s == 0.0:
        levels = np.zeros(max_weight + 1)
        levels[0] = 1.0
    else:
        vals = jack_P_all(X, ctx, max_weight, scale=s)
        levels = mhg.level_sums(table.sign, table.logc, weights, [vals], [math.log(s)],
                                max_weight)
    value, tail, W, ok = mhg.truncate(levels, tolerance)
    used = int(np.count_nonzero(weights <= W))
    return mhg.SeriesResult(value, tail, used, W, ok, levels)


# ---------------------------------------------------------------- tails

@dataclass(frozen=True)
class TailResult:
    value: float
    series_tail: float
    weight_used: int
    converged: bool
    method: str
    extrapolation_error: float = 0.0
    clamped: bool = False

    def __float__(self):
        return self.value


def _finish_tail(logpref, series, method, extra_err=0.0, where="hitting"):
    raw = math.exp(logpref) * series.value
    rel_tail = series.tail_estimate / abs(series.value) if series.value else math.inf
    if not series.converged and rel_tail > 1e-8:
        raise ConvergenceError(
            f"series not converged at max weight (relative tail {rel_tail:.2e}); "
            "use the simulator for this point", where=where)
    value, clamped = raw, False
    slack = 1e-9 + 10 * rel_tail + extra_err
    if raw < 0 or raw > 1:
        if raw < -slack or raw > 1 + slack:
            raise ConvergenceError(f"tail value {raw} outside [0,1] beyond tolerance",
                                   where=where)
        value = min(1.0, max(0.0, raw))
        clamped = True
        log.warning("clamped tail value %r to %r", raw, value)
    return TailResult(value, series.tail_estimate * math.exp(logpref), series.weight_used,
                      series.converged, method, extra_err, clamped)


def _check_cap(X, cap, where):
    if np.max(np.abs(X)) > cap:
        raise ConvergenceError(
            f"series argument {np.max(np.abs(X)):.3g} exceeds cap {cap}; use the simulator",
            where=where)


def _log_vandermonde_sq(y2):
    out = 0.0
    for i in range(len(y2)):
        for j in range(i + 1, len(y2)):
            out += math.log(y2[i] - y2[j])
    return out


def _max_weight(rs, max_weight):
    return max_weight or DEFAULT_MAX_WEIGHT.get(rs.m, 30)


def tail_B(q, method="moment", max_weight=None, tolerance=1e-15, cap=SERIES_CAP):
    rs = q.rs
    if rs.family != "B":
        raise ValidationError("tail_B needs a type B query", where="hitting.survival_B")
    k0, k1 = _kv(q.k, rs)
    m = rs.m
    y = q.y
    X = y * y / 2
    _check_cap(X, cap, "hitting.survival_B")
    P = _max_weight(rs, max_weight)
    l0, l1 = k0 - 0.5, k1 - 0.5
    lc = normalization_constants(rs, q.k)
    logpref = math.log(lc.C) + 2 * l0 * float(np.sum(np.log(y))) - float(y @ y) / 2
    if m > 1:
        logpref += 2 * l1 * _log_vandermonde_sq(y * y)
    if method == "hypergeometric" or m == 1:
        spec = mhg.SeriesSpec.make(((m + 1) / 2,), (k0 + (m - 1) * k1 + 0.5,),
                                   k1 if m > 1 else 1.0, max_weight=P, tolerance=tolerance)
        series = mhg.hyper(spec, X)
    elif method == "moment":
        series = g_ratio_moment(rs, k0, k1, X, P, tolerance)
    else:
        raise ValidationError(f"method must be one of {METHODS}", where="hitting.survival_B")
    return _finish_tail(logpref, series, method, where="hitting.survival_B")


def tail_D(q, method="moment", max_weight=None, tolerance=1e-15, cap=SERIES_CAP):
    rs = q.rs
    if rs.family != "D":
        raise ValidationError("tail_D needs a type D query", where="hitting.survival_D")
    _, k1 = _kv(q.k, rs)
    m = rs.m
    y = q.y
    X = y * y / 2
    _check_cap(X, cap, "hitting.survival_D")
    P = _max_weight(rs, max_weight)
    l1 = k1 - 0.5
    lc = normalization_constants(rs, q.k)
    logpref = math.log(lc.C) + 2 * l1 * _log_vandermonde_sq(y * y) - float(y @ y) / 2
    if method == "hypergeometric":
        spec = mhg.SeriesSpec.make((m / 2,), ((m - 1) * k1 + 0.5,), k1,
                                   max_weight=P, tolerance=tolerance)
        series = mhg.hyper(spec, X)
    elif method == "moment":
        series = g_ratio_moment(rs, 0.0, k1, X, P, tolerance)
    else:
        raise ValidationError(f"method must be one of {METHODS}", where="hitting.survival_D")
    return _finish_tail(logpref, series, method, where="hitting.survival_D")


def survival_B(q, method="moment", **kw):
    """Tail for type B (float)."""
    return tail_B(q, method, **kw).value


def survival_D(q, method="moment", **kw):
    """Tail for type D (float)."""
    return tail_D(q, method, **kw).value


DEFAULT_B_SCHEDULE = (64, 128, 256, 512)


def _gauss_limit_term(m, k1, b, z, max_weight, tolerance):
    c = b / 2 + k1 * (m - 1) / 2 + (m + 3) / 4
    spec = mhg.SeriesSpec.make(((m + 1) / 2, b), (c,), k1, max_weight=max_weight,
                               tolerance=tolerance)
    return mhg.hyper(spec, z)


def gauss_limit_ratio(m, k1, x, b_schedule=DEFAULT_B_SCHEDULE, max_weight=None,
                      tolerance=1e-14):
    """Values of 2F1(x; b) / 2F1(0; b) along the schedule and their extrapolation.

    Each Gauss series has argument (1 - x/sqrt(b))/2 and is summed to
    convergence at fixed b; the b -> infinity limit is then taken by a
    quadratic fit in 1/sqrt(b) over the schedule, never term by term.
    """
    x = np.asarray(x, dtype=float)
    bs = np.asarray(sorted(b_schedule), dtype=float)
    P = max_weight or (200 if m <= 2 else 60)
    ratios = []
    for b in bs:
        z = 0.5 * (1 - x / math.sqrt(b))
        if np.max(np.abs(z)) >= 0.95:
            raise ValidationError(f"b = {b} puts the Gauss argument outside |z| < 0.95",
                                  where="hitting.survival_A")
        num = _gauss_limit_term(m, k1, b, z, P, tolerance)
        den = _gauss_limit_term(m, k1, b, np.full(m, 0.5), P, tolerance)
        if not (num.converged and den.converged):
            raise ConvergenceError(
                f"Gauss series at b = {b} not converged by weight {P}",
                where="hitting.survival_A")
        ratios.append(num.value / den.value)
    ratios = np.array(ratios)
    h = 1 / np.sqrt(bs)
    deg = min(2, len(bs) - 1)
    coef = np.polyfit(h, ratios, deg)
    limit = float(np.polyval(coef, 0.0))
    resid = float(np.sqrt(np.mean((np.polyval(coef, h) - ratios) ** 2)))
    if len(bs) > 2:
        coef2 = np.polyfit(h[1:], ratios[1:], min(deg, len(bs) - 2))
        alt = float(np.polyval(coef2, 0.0))
        err = max(resid, abs(alt - limit))
        if abs(alt - limit) > 10 * max(resid, 1e-14) and abs(alt - limit) > 1e-6 * abs(limit):
            raise ExtrapolationUnstable(
                f"successive extrapolants {limit} and {alt} disagree", where="hitting.survival_A")
    else:
        err = resid
    return limit, err, ratios


def tail_A(q, method="moment", b_schedule=DEFAULT_B_SCHEDULE, max_weight=None,
           tolerance=1e-15, cap=SERIES_CAP):
    rs = q.rs
    if rs.family != "A":
        raise ValidationError("tail_A needs a type A query", where="hitting.survival_A")
    _, k1 = _kv(q.k, rs)
    m = rs.m
    y = q.y
    yperp = y - y.mean()
    _check_cap(yperp, cap, "hitting.survival_A")
    l1 = k1 - 0.5
    lc = normalization_constants(rs, q.k)
    logV = sum(math.log(y[i] - y[j]) for i in range(m) for j in range(i + 1, m))
    logpref = math.log(lc.C) + 2 * l1 * logV - float(yperp @ yperp) / 2
    if method == "moment":
        series = g_ratio_moment(rs, 0.0, k1, yperp, _max_weight(rs, max_weight), tolerance)
        return _finish_tail(logpref, series, method, where="hitting.survival_A")
    if method != "hypergeometric":
        raise ValidationError(f"method must be one of {METHODS}", where="hitting.survival_A")
    limit, err, _ = gauss_limit_ratio(m, k1, yperp, b_schedule, max_weight)
    series = mhg.SeriesResult(limit, err, 0, 0, True, np.zeros(1))
    return _finish_tail(logpref, series, method, extra_err=err * math.exp(logpref),
                        where="hitting.survival_A")


@dataclass(frozen=True)
class ExtrapolatedValue:
    value: float
    extrapolation_error: float


def survival_A(q, b_schedule=DEFAULT_B_SCHEDULE, method="moment", **kw):
    res = tail_A(q, method, b_schedule=b_schedule, **kw)
    return ExtrapolatedValue(res.value, res.extrapolation_error)


def survival(q, method="moment", **kw):
    """Dispatch on the family; always returns a float."""
    if q.rs.family == "B":
        return survival_B(q, method, **kw)
    if q.rs.family == "D":
        return survival_D(q, method, **kw)
    return survival_A(q, method=method, **kw).value


def tail(q, method="moment", **kw):
    fn = {"A": tail_A, "B": tail_B, "D": tail_D}[q.rs.family]
    return fn(q, method, **kw)


# ---------------------------------------------------------------- mixed indices

def _exact(v):
    return v if isinstance(v, (int, Fraction)) else Fraction(str(float(v)))


def mixed_eigenvalue(rs, l):
    """m + |R+| + 2 * sum of the nonnegative indices.

    ``l`` is a per-root sequence or a mapping orbit-id -> index.  The root
    system needs at least two orbits (otherwise mixed signs are impossible).
    """
    where = "hitting.mixed_eigenvalue"
    if len(rs.orbit_ids) < 2:
        raise ValidationError("mixed indices need a root system with two orbits", where=where)
    if isinstance(l, dict):
        per_root = [l[o] for o in rs.orbits]
    else:
        per_root = list(l)
        if len(per_root) != rs.n_positive:
            raise ValidationError("one index per positive root expected", where=where)
        for o in rs.orbit_ids:
            vals = {per_root[i] for i, oo in enumerate(rs.orbits) if oo == o}
            if len(vals) > 1:
                raise ValidationError("indices must be constant on orbits", where=where)
    vals = [_exact(v) for v in per_root]
    if any(v < Fraction(-1, 2) for v in vals):
        raise ValidationError("indices must be >= -1/2", where=where)
    total = rs.m + rs.n_positive + 2 * sum(v for v in vals if v >= 0)
    if all(isinstance(v, (int, Fraction)) for v in per_root):
        return total
    return float(total)


def mixed_sum_S(x, boundary_tol=1e-6):
    """The short/long cross sum of the exponential functional for type B (telescopes to 0).

    Returns (S, scale) with scale the sum of absolute summands.
    """
    x = np.asarray(x, dtype=float)
    rs = build_root_system("B", len(x))
    if not in_chamber(rs, x) or distance_to_boundary(rs, x) < boundary_tol * max(1.0, np.max(np.abs(x))):
        raise BoundaryError("x too close to the chamber boundary", where="hitting.mixed_sum_S")
    m = len(x)
    terms = []
    for i in range(m):
        for k in range(i + 1, m):
            terms.append(1 / x[i] * (1 / (x[i] - x[k]) + 1 / (x[i] + x[k])))
        for k in range(i):
            terms.append(1 / x[i] * (-1 / (x[k] - x[i]) + 1 / (x[k] + x[i])))
    terms = np.array(terms)
    return float(terms.sum()), float(np.abs(terms).sum())


def mixed_sum_roots(x):
    """Same sum written over pairs (short alpha, long zeta) of positive roots."""
    x = np.asarray(x, dtype=float)
    rs = build_root_system("B", len(x))
    R = rs.positive_roots
    short = [a for a, o in zip(R, rs.orbits) if o == 0]
    long_ = [a for a, o in zip(R, rs.orbits) if o == 1]
    return float(sum((a @ z) / ((a @ x) * (z @ x)) for a in short for z in long_))


# ---------------------------------------------------------------- heat identity

def _B_invariant_operator(F, x, k0, k1, h):
    """(-Delta_k + E_1) F at x for W-invariant F (type B), by central differences."""
    m = len(x)
    f0 = F(x)
    grad = np.empty(m)
    lap = 0.0
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        fp, fm = F(x + e), F(x - e)
        grad[i] = (fp - fm) / (2 * h)
        lap += (fp - 2 * f0 + fm) / (h * h)
    drift = 2 * k0 * np.sum(grad / x)
    for i in range(m):
        for j in range(i + 1, m):
            drift += 2 * k1 * ((grad[i] - grad[j]) / (x[i] - x[j])
                               + (grad[i] + grad[j]) / (x[i] + x[j]))
    return -(lap + drift) + float(x @ grad)


def theorem1_sides(k0, k1, x, y, h, max_weight=48):
    rs = build_root_system("B", len(x))
    k = Multiplicity(k1=k1, k0=k0)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def F(xx, yy):
        return math.exp(-float(yy @ yy) / 2) * mhg.bessel_DW(
            rs, k, xx, yy, max_weight=max_weight, tolerance=0.0)

    lhs = _B_invariant_operator(lambda xx: F(xx, y), x, k0, k1, h)
    rhs = 0.0
    for i in range(len(y)):
        e = np.zeros(len(y))
        e[i] = h
        rhs += y[i] * (F(x, y + e) - F(x, y - e)) / (2 * h)
    return lhs, rhs


def theorem1_residual(k0, k1, x, y, h=1e-4, max_weight=48):
    """Relative gap in J_k^x[e^{-|y|^2/2} D_k^W(x,y)] = E_1^y[e^{-|y|^2/2} D_k^W(x,y)] at B_m."""
    if not 1e-5 <= h <= 1e-3:
        raise ValidationError("h must lie in [1e-5, 1e-3]", where="hitting.theorem1_residual")
    lhs, rhs = theorem1_sides(k0, k1, x, y, h, max_weight)
    den = max(abs(lhs), abs(rhs))
    if den < 1e-300 or np.allclose(y, 0):
        return 0.0
    return abs(lhs - rhs) / den
