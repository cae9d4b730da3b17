"""Monte-Carlo survival of the radial Dunkl process dX = b(X) dt + dW in the Weyl chamber.

The drift is b(x) = sum_{alpha in R+} k'(alpha) alpha / <alpha, x>.  Paths are
advanced by Euler-Maruyama with step min(dt_base, c d^2), d the distance to
the nearest wall, except that the motion normal to that wall is stepped in
the Bessel scale coordinate d^(1 - 2k') (log d when k' >= 1/2), which removes
the singular drift term and with it the dominant discretization bias.
Inside the layer d < eps the remaining approach to that wall is settled
with the one-dimensional Bessel scale function: the path reaches distance
a = split_factor * eps before the wall with probability (d/a)^(1 - 2k') for k' < 1/2 (always for k' >= 1/2), and is absorbed
otherwise.  ``split_factor=0`` turns this off (absorb as soon as d < eps).

Each path owns a counter-based random stream keyed by (seed, path index), so
results do not depend on the backend or on the number of threads.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._backend import kernels
from .errors import BoundaryError, ConfigError, ValidationError
from .rootsys import Multiplicity, in_chamber


@dataclass(frozen=True)
class SimConfig:
    paths: int = 100_000
    dt_base: float = 1e-3
    dt_boundary_scale: float = 0.1
    absorption_eps: float = 1e-4
    seed: int = 20240601
    horizon: float = None
    split_factor: float = 10.0

    def __post_init__(self):
        where = "simulate.SimConfig"
        if not (self.dt_base > 0 and self.absorption_eps > 0 and self.dt_boundary_scale > 0):
            raise ConfigError("dt_base, dt_boundary_scale and absorption_eps must be > 0",
                              where=where)
        if int(self.paths) < 1:
            raise ConfigError("paths must be >= 1", where=where)
        if self.split_factor < 0 or 0 < self.split_factor <= 1:
            raise ConfigError("split_factor must be 0 (off) or > 1", where=where)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer", where=where)


@dataclass(frozen=True)
class SurvivalEstimate:
    t_grid: np.ndarray
    probabilities: np.ndarray
    std_errors: np.ndarray
    paths: int
    steps: int = field(default=0, compare=False)

    def __eq__(self, other):
        return (isinstance(other, SurvivalEstimate) and self.paths == other.paths
                and np.array_equal(self.t_grid, other.t_grid)
                and np.array_equal(self.probabilities, other.probabilities)
                and np.array_equal(self.std_errors, other.std_errors))

    __hash__ = None


def _kprime_per_root(rs, kprime):
    if isinstance(kprime, Multiplicity):
        vals = kprime.per_root(rs)
    elif np.isscalar(kprime):
        vals = [kprime] * rs.n_positive
    else:
        vals = list(kprime)
        if len(vals) != rs.n_positive:
            raise ValidationError("one multiplicity per positive root expected",
                                  where="simulate.drift")
    out = np.array([float(v) for v in vals])
    if np.any(out < 0) or not np.all(np.isfinite(out)):
        raise ValidationError("multiplicities k' must be finite and >= 0",
                              where="simulate.drift")
    return out


def drift(rs, kprime, x):
    """b(x) = sum over positive roots of k'(alpha) alpha / <alpha, x>."""
    x = np.asarray(x, dtype=float)
    kp = _kprime_per_root(rs, kprime)
    R = rs.positive_roots.astype(float)
    pair = R @ x
    if np.any(pair <= 0):
        raise BoundaryError("x is on or outside a chamber wall", where="simulate.drift")
    return (kp / pair) @ R


def _simple_data(rs, kp):
    S = rs.simple_roots.astype(float)
    norms = np.sqrt((S * S).sum(axis=1))
    unit = S / norms[:, None]
    index = {tuple(a): i for i, a in enumerate(rs.positive_roots.tolist())}
    simple_idx = np.array([index[tuple(a)] for a in rs.simple_roots.tolist()], dtype=np.int64)
    return np.ascontiguousarray(unit), simple_idx


def absorption_times(rs, kprime, x0, horizon, cfg, nthreads=None, backend=None):
    """Per-path absorption times (inf for paths alive at ``horizon``) and total step count."""
    x0 = np.asarray(x0, dtype=float)
    if len(x0) != rs.m:
        raise ValidationError(f"x0 must have {rs.m} coordinates", where="simulate.simulate_survival")
    if not in_chamber(rs, x0):
        raise ValidationError("x0 must lie strictly inside the chamber",
                              where="simulate.simulate_survival")
    kp = _kprime_per_root(rs, kprime)
    unit, simple_idx = _simple_data(rs, kp)
    split_a = cfg.split_factor * cfg.absorption_eps
    impl = backend or kernels
    times, nsteps = impl.simulate_paths(
        np.ascontiguousarray(rs.positive_roots, dtype=float), kp, unit, simple_idx, x0,
        float(horizon), cfg.dt_base, cfg.dt_boundary_scale, cfg.absorption_eps, split_a,
        int(cfg.seed), int(cfg.paths), nthreads=nthreads)
    return np.asarray(times), int(np.sum(nsteps))


def simulate_survival(rs, kprime, x0, t_grid, cfg=None, nthreads=None, backend=None):
    """Survival fractions P(T0 > t) on ``t_grid`` with binomial standard errors."""
    cfg = cfg or SimConfig()
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ConfigError("t_grid must be positive and strictly increasing",
                          where="simulate.simulate_survival")
    horizon = float(t[-1]) if cfg.horizon is None else float(cfg.horizon)
    if horizon < t[-1]:
        raise ConfigError("horizon must cover the last grid time",
                          where="simulate.simulate_survival")
    times, steps = absorption_times(rs, kprime, x0, horizon, cfg, nthreads, backend)
    times = np.sort(times)
    n = cfg.paths
    alive = n - np.searchsorted(times, t, side="right")
    p = alive / n
    se = np.sqrt(p * (1 - p) / n)
    return SurvivalEstimate(t, p, se, n, steps)


def z_score(estimate, value, index=0, extra_se=0.0):
    """(MC - value) in units of the combined standard error (inf if both vanish)."""
    se = math.hypot(float(estimate.std_errors[index]), extra_se)
    diff = float(estimate.probabilities[index]) - value
    if se == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / se
