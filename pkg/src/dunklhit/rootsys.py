"""Root systems of types A, B, D with their chambers, Weyl groups and multiplicities.

Roots live in the standard basis of R^m with small integer coordinates.  Type A
uses m coordinates (so A_{m-1} has m(m-1)/2 positive roots); B_m and D_m are the
usual signed-permutation systems.  Orbit ids: 0 for the short roots e_i of B,
1 for everything else.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import itertools
import math

import numpy as np

from .errors import DomainError, RankTooLarge, ValidationError

FAMILIES = ("A", "B", "D")
MAX_EXPLICIT_RANK = 4


def _unit(m, i):
    v = [0] * m
    v[i] = 1
    return v


def _positive_roots(family, m):
    roots, orbits = [], []
    if family == "B":
        for i in range(m):
            roots.append(_unit(m, i))
            orbits.append(0)
    for i in range(m):
        for j in range(i + 1, m):
            v = [0] * m
            v[i], v[j] = 1, -1
            roots.append(v)
            orbits.append(1)
            if family in ("B", "D"):
                w = [0] * m
                w[i], w[j] = 1, 1
                roots.append(w)
                orbits.append(1)
    return roots, orbits


def _simple_roots(family, m):
    simple = []
    for i in range(m - 1):
        v = [0] * m
        v[i], v[i + 1] = 1, -1
        simple.append(v)
    if family == "B":
        simple.append(_unit(m, m - 1))
    elif family == "D":
        v = [0] * m
        v[m - 2], v[m - 1] = 1, 1
        simple.append(v)
    return simple


@dataclass(frozen=True)
class RootSystem:
    family: str
    m: int
    positive_roots: np.ndarray = field(repr=False)
    simple_roots: np.ndarray = field(repr=False)
    weyl_order: int
    orbits: tuple
    reducible: bool = False

    @property
    def n_positive(self):
        return len(self.positive_roots)

    @property
    def orbit_ids(self):
        return tuple(sorted(set(self.orbits)))

    def pairings(self, x):
        """<alpha, x> for every positive root (last axis of x is the coordinate axis)."""
        return np.asarray(x, dtype=float) @ self.positive_roots.T

    def reflect(self, alpha, x):
        alpha = np.asarray(alpha)
        x = np.asarray(x)
        return x - 2 * (x @ alpha) / (alpha @ alpha) * alpha

    @cached_property
    def _signed_perms(self):
        if self.m > MAX_EXPLICIT_RANK:
            raise RankTooLarge(
                f"explicit Weyl group only for m <= {MAX_EXPLICIT_RANK}, got m={self.m}",
                where="rootsys.weyl_elements",
            )
        out = []
        for perm in itertools.permutations(range(self.m)):
            if self.family == "A":
                out.append((perm, (1,) * self.m))
                continue
            for signs in itertools.product((1, -1), repeat=self.m):
                if self.family == "D" and signs.count(-1) % 2:
                    continue
                out.append((perm, signs))
        return tuple(out)

    def weyl_elements(self):
        """All w in W as (perm, signs) with (w x)_i = signs[i] * x[perm[i]]."""
        return self._signed_perms

    def weyl_matrices(self):
        mats = []
        for perm, signs in self.weyl_elements():
            M = np.zeros((self.m, self.m), dtype=int)
            for i, (p, s) in enumerate(zip(perm, signs)):
                M[i, p] = s
            mats.append(M)
        return mats

    @cached_property
    def chamber_rays(self):
        """Extreme rays of the closed chamber inside the span of the roots.

        Solves <alpha_j, r_i> = delta_ij over the simple roots; for type A the
        rays lie in the sum-zero hyperplane.
        """
        S = self.simple_roots.astype(float)
        if len(S) == 0:
            return np.zeros((0, self.m))
        return np.linalg.pinv(S).T


def build_root_system(family, m):
    """Construct A_{m-1} (on m coordinates), B_m or D_m."""
    family = str(family).upper()
    if family not in FAMILIES:
        raise ValidationError(f"family must be one of A, B, D, got {family!r}",
                              where="rootsys.build_root_system")
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValidationError(f"rank m must be a positive integer, got {m!r}",
                              where="rootsys.build_root_system")
    m = int(m)
    if family == "D" and m < 2:
        raise ValidationError("D_m requires m >= 2", where="rootsys.build_root_system")
    roots, orbits = _positive_roots(family, m)
    order = math.factorial(m)
    if family == "B":
        order *= 2 ** m
    elif family == "D":
        order *= 2 ** (m - 1)
    return RootSystem(
        family=family,
        m=m,
        positive_roots=np.array(roots, dtype=int).reshape(len(roots), m),
        simple_roots=np.array(_simple_roots(family, m), dtype=int).reshape(-1, m),
        weyl_order=order,
        orbits=tuple(orbits),
        reducible=(family == "D" and m == 2),
    )


@dataclass(frozen=True)
class Multiplicity:
    """Orbit-constant multiplicity; ``k0`` is used only by the short roots of B."""

    k1: object
    k0: object = None

    def __post_init__(self):
        for name in ("k0", "k1"):
            v = getattr(self, name)
            if v is None:
                continue
            if not math.isfinite(float(v)) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}",
                                      where="rootsys.Multiplicity")

    def of_orbit(self, orbit):
        if orbit == 0:
            if self.k0 is None:
                raise ValidationError("k0 is required for type B",
                                      where="rootsys.Multiplicity")
            return self.k0
        return self.k1

    def per_root(self, rs):
        return [self.of_orbit(o) for o in rs.orbits]

    def index_per_root(self, rs):
        half = Fraction(1, 2) if all(isinstance(v, (int, Fraction)) for v in self.per_root(rs)) else 0.5
        return [k - half for k in self.per_root(rs)]

    def dual(self):
        """Multiplicities 1 - k, i.e. the process with index -l."""
        return Multiplicity(k1=1 - self.k1, k0=None if self.k0 is None else 1 - self.k0)


def as_multiplicity(rs, k=None, k0=None, k1=None):
    if isinstance(k, Multiplicity):
        return k
    if k is not None:
        k1 = k
        if rs.family == "B" and k0 is None:
            k0 = k
    if k1 is None and rs.family == "B" and rs.m == 1:
        k1 = 0
    return Multiplicity(k1=k1, k0=k0 if rs.family == "B" else None)


def in_chamber(rs, x):
    x = np.asarray(x, dtype=float)
    if rs.simple_roots.size == 0:
        return True
    return bool(np.all(rs.simple_roots @ x > 0))


def distance_to_boundary(rs, x):
    """min over simple roots of <alpha, x>/|alpha|, clamped at 0 outside the chamber."""
    x = np.asarray(x, dtype=float)
    if rs.simple_roots.size == 0:
        return math.inf
    S = rs.simple_roots
    d = (S @ x) / np.sqrt((S * S).sum(axis=1))
    return max(0.0, float(d.min()))


def gamma_sum(rs, k):
    """gamma = sum of k over the positive roots."""
    return sum(k.per_root(rs))


def _is_integer(v):
    return float(v).is_integer()


def weight_omega(rs, k, x):
    """prod over positive roots of <alpha, x>^k(alpha)."""
    x = np.asarray(x, dtype=float)
    out = 1.0
    for p, kv in zip(rs.pairings(x), k.per_root(rs)):
        if p <= 0 and not _is_integer(kv):
            raise DomainError(
                f"<alpha,x> = {p} <= 0 with non-integer multiplicity {kv}",
                where="rootsys.weight_omega",
            )
        out *= p ** float(kv)
    return float(out)


def vandermonde(x):
    x = np.asarray(x, dtype=float)
    out = 1.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            out *= x[i] - x[j]
    return float(out)
