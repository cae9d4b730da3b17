"""Exit of Brownian motion from the B and D Weyl chambers.

Three routes to P_x(T0 > t) for standard m-dimensional Brownian motion:

* Pfaffians of 2 x 2 survival factors (even m).  The D entry is the exact
  two-particle probability; the B entry built from a product of gamma
  factors is kept as ``convention="product"``.
* The reflection-principle (Karlin-McGregor) density integrated over the
  chamber with de Bruijn's formula, giving a Pfaffian with one-dimensional
  integral entries (bordered for odd m).  Exact for type B and the default.
* Determinants of scalar confluent functions, with one constant calibrated at
  a reference point.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate
from scipy.special import erf, hyp1f1, ndtr

from .errors import OddDimension, OddRank, SingularCalibration, ValidationError
from .rootsys import build_root_system, in_chamber

B_CONVENTIONS = ("debruijn", "product")


def gamma_func(a):
    """sqrt(2/pi) int_0^a e^{-z^2/2} dz = erf(a/sqrt(2))."""
    return erf(np.asarray(a, dtype=float) / math.sqrt(2.0))


def gamma_func_confluent(a):
    """The same function through Kummer's 1F1(1/2; 3/2; -a^2/2)."""
    a = np.asarray(a, dtype=float)
    return math.sqrt(2.0 / math.pi) * a * hyp1f1(0.5, 1.5, -a * a / 2)


def gamma_func_half(a):
    """a/sqrt(2 pi) 1F1(1/2; 3/2; -a^2/2): half of gamma_func (kept for comparison)."""
    a = np.asarray(a, dtype=float)
    return a / math.sqrt(2 * math.pi) * hyp1f1(0.5, 1.5, -a * a / 2)


# ---------------------------------------------------------------- Pfaffians

@dataclass(frozen=True)
class SkewMatrix:
    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("square matrix expected", where="brownian.SkewMatrix")
        if not np.array_equal(a, -a.T):
            raise ValidationError("matrix is not skew-symmetric", where="brownian.SkewMatrix")
        object.__setattr__(self, "a", a)

    @classmethod
    def from_upper(cls, upper):
        """Skew matrix from a callable or array giving a_ij for i < j."""
        up = np.asarray(upper, dtype=float)
        n = up.shape[0]
        a = np.triu(up, 1)
        return cls(a - a.T)

    @property
    def n(self):
        return self.a.shape[0]


def pfaffian(M):
    """Pfaffian by Parlett-Reid skew tridiagonalization with partial pivoting."""
    A = np.array(M.a if isinstance(M, SkewMatrix) else M, dtype=float)
    n = A.shape[0]
    if n % 2:
        raise OddDimension("Pfaffian needs even dimension", where="brownian.pfaffian")
    if n == 0:
        return 1.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1]) - np.outer(A[k + 2:, k + 1], tau)
    return float(pf)


def rank_one_skew(lam):
    """a_ij = lam_i lam_j for i < j."""
    lam = np.asarray(lam, dtype=float)
    return SkewMatrix.from_upper(np.outer(lam, lam))


# ---------------------------------------------------------------- Pfaffian tails

def _check(family, x, t, where):
    x = np.asarray(x, dtype=float)
    if family not in ("B", "D"):
        raise ValidationError("family must be B or D", where=where)
    if not t > 0:
        raise ValidationError("t must be > 0", where=where)
    rs = build_root_system(family, len(x))
    if not in_chamber(rs, x):
        raise ValidationError("x must lie strictly inside the chamber", where=where)
    return x


def _debruijn_entries(x, t):
    """Q_ij = int int sgn(v - u) f_i(u) f_j(v) and the masses M_i of the killed densities."""
    s = math.sqrt(t)
    m = len(x)

    def f(i, v):
        return (math.exp(-(v - x[i]) ** 2 / (2 * t)) - math.exp(-(v + x[i]) ** 2 / (2 * t))) / (
            s * math.sqrt(2 * math.pi))

    def F(i, v):
        return (ndtr((v - x[i]) / s) - ndtr(-x[i] / s)) - (ndtr((v + x[i]) / s) - ndtr(x[i] / s))

    M = gamma_func(x / s)
    Q = np.zeros((m, m))
    hi = float(np.max(x)) + 12 * s
    for i in range(m):
        for j in range(i + 1, m):
            pts = sorted({float(x[i]), float(x[j])})
            val, _ = integrate.quad(lambda v: f(j, v) * F(i, v) - f(i, v) * F(j, v), 0.0, hi,
                                    points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)
            Q[i, j] = val
            Q[j, i] = -val
    return Q, np.asarray(M)


def survival_bm_exact_B(x, t):
    """Reflection-principle tail for type B via de Bruijn's Pfaffian (any m)."""
    x = _check("B", x, t, "brownian.survival_bm_exact_B")
    m = len(x)
    # chamber order x_1 > ... > x_m reverses the increasing order used by de Bruijn
    Q, M = _debruijn_entries(x[::-1], t)
    if m % 2:
        A = np.zeros((m + 1, m + 1))
        A[:m, :m] = Q
        A[:m, m] = M
        A[m, :m] = -M
        Q = A
    return pfaffian(Q)


def survival_bm_pf(family, x, t, convention="debruijn"):
    """Pfaffian tail for even m.

    D: Pf[gamma((x_i-x_j)/sqrt(2t)) gamma((x_i+x_j)/sqrt(2t))].
    B: ``product`` uses Pf[gamma((x_i-x_j)/sqrt(2t)) gamma(x_j/sqrt(t))];
    ``debruijn`` uses the exact reflection-principle Pfaffian.
    """
    x = _check(family, x, t, "brownian.survival_bm_pf")
    m = len(x)
    if m % 2:
        raise OddRank("the Pfaffian formulas need even m", where="brownian.survival_bm_pf")
    r2 = math.sqrt(2 * t)
    diff = gamma_func((x[:, None] - x[None, :]) / r2)
    if family == "D":
        up = diff * gamma_func((x[:, None] + x[None, :]) / r2)
    elif convention == "product":
        up = diff * gamma_func(x[None, :] / math.sqrt(t))
    elif convention == "debruijn":
        return survival_bm_exact_B(x, t)
    else:
        raise ValidationError(f"convention must be one of {B_CONVENTIONS}",
                              where="brownian.survival_bm_pf")
    return pfaffian(SkewMatrix.from_upper(up))


def survival_bm_D2(x, t):
    """D_2 tail as two independent one-dimensional barriers in x_1 - x_2 and x_1 + x_2."""
    x = _check("D", x, t, "brownian.survival_bm_D2")
    if len(x) != 2:
        raise ValidationError("D2 only", where="brownian.survival_bm_D2")
    u, v = (x[0] - x[1]) / math.sqrt(2), (x[0] + x[1]) / math.sqrt(2)
    return float(gamma_func(u / math.sqrt(t)) * gamma_func(v / math.sqrt(t)))


# ---------------------------------------------------------------- determinants

def det_matrix(family, x, t):
    """Matrix of the determinant formula before the constant."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    z = x * x / (2 * t)
    j = np.arange(1, m + 1)
    if family == "B":
        return z[:, None] ** (m - j + 0.5)[None, :] * hyp1f1(
            m / 2, (m - j + 1.5)[None, :], -z[:, None])
    if family == "D":
        return z[:, None] ** (m - j)[None, :] * hyp1f1(
            (m - 1) / 2, (m - j + 0.5)[None, :], -z[:, None])
    raise ValidationError("family must be B or D", where="brownian.survival_bm_det")


def det_raw(family, x, t):
    return float(np.linalg.det(det_matrix(family, x, t)))


@dataclass(frozen=True)
class Calibration:
    family: str
    m: int
    C: float
    x_ref: tuple
    t_ref: float
    reference: str


def reference_tail(family, x, t, convention="debruijn"):
    m = len(x)
    if family == "B" and convention == "debruijn":
        return survival_bm_exact_B(x, t), "debruijn"
    if m % 2:
        raise OddRank("no reference Pfaffian for odd m with this family/convention",
                      where="brownian.calibrate")
    return survival_bm_pf(family, x, t, convention), "pfaffian-" + convention


def calibrate(family, m, x_ref=None, t_ref=1.0, convention="debruijn"):
    """Fix C so that the determinant formula matches the reference tail at (x_ref, t_ref)."""
    x_ref = tuple(float(v) for v in (x_ref or range(m, 0, -1)))
    d = det_raw(family, x_ref, t_ref)
    if abs(d) < 1e-12:
        raise SingularCalibration(f"reference determinant {d:.3e} below 1e-12",
                                  where="brownian.calibrate")
    ref, name = reference_tail(family, np.array(x_ref), t_ref, convention)
    return Calibration(family, m, ref / d, x_ref, t_ref, name)


def survival_bm_det(family, x, t, calibration=None):
    x = _check(family, x, t, "brownian.survival_bm_det")
    cal = calibration or calibrate(family, len(x))
    if cal.family != family or cal.m != len(x):
        raise ValidationError("calibration does not match family and rank",
                              where="brownian.survival_bm_det")
    return cal.C * det_raw(family, x, t)
