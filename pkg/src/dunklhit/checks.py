"""Identity suites shared by the CLI ``check`` command and the test-suite."""

from dataclasses import asdict, dataclass
from fractions import Fraction
import math

import numpy as np

from . import brownian, dunklpoly, hitting, mhg
from .partition_jack import get_context
from .rootsys import Multiplicity, build_root_system

SUITES = ("kummer", "theorem1", "mehler", "pfdet", "mixed-s", "spectral")


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def _result(name, residual, threshold, passed=None):
    residual = float(residual)
    if passed is None:
        passed = residual <= threshold
    return CheckResult(name, residual, float(threshold), bool(passed))


def kummer_suite(seed=0, draws=50, P_max=30, tol=1e-8):
    rng = np.random.default_rng(seed)
    out = []
    for n in range(draws):
        m = int(rng.integers(1, 3))
        k1 = float(rng.uniform(0.5, 1.0))
        alpha = 1.0 / k1 if m > 1 else 1.0
        a = float(rng.uniform(0.1, 2.0))
        b = float(rng.uniform(0.5, 3.0)) + (m - 1) * k1
        x = rng.uniform(-1, 1, m)
        r = mhg.kummer_residual(a, b, x, get_context(alpha, m), P_max)
        out.append(_result(f"kummer[{n}] m={m} a={a:.3f} b={b:.3f}", r, tol))
    return out


def _chamber_pair(rng, lo, hi, gap):
    while True:
        v = np.sort(rng.uniform(lo, hi, 2))[::-1]
        if v[0] - v[1] > gap and v[1] > gap:
            return v


def theorem1_suite(seed=0, pairs=10, h=1e-4, tol=1e-6, k0=0.75, k1=0.75):
    rng = np.random.default_rng(seed)
    out = []
    for n in range(pairs):
        x = _chamber_pair(rng, 0.3, 2.0, 0.15)
        y = _chamber_pair(rng, 0.1, 1.5, 0.05)
        r = hitting.theorem1_residual(k0, k1, x, y, h)
        out.append(_result(f"theorem1[{n}] h={h:g}", r, tol))
        coarse = hitting.theorem1_residual(k0, k1, x, y, 1e-3)
        fine = hitting.theorem1_residual(k0, k1, x, y, 5e-4)
        ratio = coarse / fine if fine else math.inf
        out.append(_result(f"theorem1[{n}] halving ratio (h^2 -> 4)", abs(ratio - 4.0), 1.0))
    return out


def _decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


def mehler_suite(seed=0, weights=(4, 6, 8), r=0.4, k0=Fraction(3, 4), k1=Fraction(3, 4)):
    rng = np.random.default_rng(seed)
    out = []
    for m in (1, 2):
        basis = dunklpoly.InvariantBasisB(m, k0, k1, max(weights))
        if m == 1:
            x, y = rng.uniform(0.3, 1.2, 1), rng.uniform(0.3, 1.2, 1)
        else:
            x, y = _chamber_pair(rng, 0.2, 1.4, 0.1), _chamber_pair(rng, 0.2, 1.4, 0.1)
        gen = [dunklpoly.generating_residual(basis, x, y, w) for w in weights]
        meh = [dunklpoly.mehler_residual(basis, x, y, r, w) for w in weights]
        for label, vals in (("generating", gen), ("mehler", meh)):
            ok = _decreasing(vals)
            out.append(_result(f"{label} B{m} weights {list(weights)}", vals[-1], vals[0], ok))
    return out


def pfdet_suite(seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)
    out = []
    for n in (2, 4, 6, 8):
        for rep in range(3):
            A = rng.standard_normal((n, n))
            A = A - A.T
            pf = brownian.pfaffian(A)
            det = np.linalg.det(A)
            out.append(_result(f"pf^2=det n={n} #{rep}", abs(pf * pf - det) / abs(det), tol))
    for n in (2, 4, 6, 8):
        lam = rng.uniform(-2, 2, n)
        pf = brownian.pfaffian(brownian.rank_one_skew(lam))
        prod = float(np.prod(lam))
        out.append(_result(f"Pf[lam_i lam_j] n={n}", abs(pf - prod) / abs(prod), tol))
    return out


def mixed_s_suite(seed=0, points=20, tol=1e-12):
    rng = np.random.default_rng(seed)
    out = []
    for m in (2, 3):
        for n in range(points):
            while True:
                x = np.sort(rng.uniform(0.1, 3.0, m))[::-1]
                if np.min(np.diff(np.r_[x, 0.0][::-1])) > 0.05:
                    break
            s, scale = hitting.mixed_sum_S(x)
            out.append(_result(f"S B{m} #{n}", abs(s) / scale, tol))
    for fam, m in (("B", 2), ("B", 3)):
        rs = build_root_system(fam, m)
        val = hitting.mixed_eigenvalue(rs, {0: 0, 1: 0})
        out.append(_result(f"eigenvalue l=0 {fam}{m}", abs(val - (m + rs.n_positive)), 0.0))
    return out


def _random_homogeneous(rng, m, d, terms=4):
    out = {}
    for _ in range(terms):
        cuts = np.sort(rng.integers(0, d + 1, m - 1))
        e = np.diff(np.r_[0, cuts, d])
        out[tuple(int(v) for v in e)] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return dunklpoly.MultiPoly(m, out)


SPECTRAL_SYSTEMS = (("A", 2), ("A", 3), ("B", 1), ("B", 2), ("B", 3), ("D", 2), ("D", 3))
SPECTRAL_K = (Fraction(1, 2), Fraction(3, 4), Fraction(1))


def spectral_suite(seed=0, max_degree=6, rodriguez=True):
    """Exact spectral relation (and Rodriguez = hermitize) over families, ranks, k and degrees."""
    rng = np.random.default_rng(seed)
    out = []
    for fam, m in SPECTRAL_SYSTEMS:
        rs = build_root_system(fam, m)
        for kv in SPECTRAL_K:
            k0 = SPECTRAL_K[int(rng.integers(0, 3))] if fam == "B" else None
            k = Multiplicity(k1=kv, k0=k0)
            for d in range(max_degree + 1):
                p = _random_homogeneous(rng, m, d) if d else dunklpoly.MultiPoly.constant(m, 3)
                if not p:
                    p = dunklpoly.MultiPoly.constant(m, 1)
                if m == 1 and d:
                    p = dunklpoly.MultiPoly(1, {(d,): 1})
                H = dunklpoly.hermitize(p, rs, k)
                res = dunklpoly.spectral_residual(H, d, rs, k)
                tag = f"{fam}{m} k1={kv} k0={k0} deg={d}"
                out.append(_result(f"spectral {tag}", 0.0 if not res else 1.0, 0.0))
                if rodriguez:
                    same = dunklpoly.rodriguez_eval(p, rs, k) == H
                    out.append(_result(f"rodriguez {tag}", 0.0 if same else 1.0, 0.0))
    return out


RUNNERS = {
    "kummer": kummer_suite,
    "theorem1": theorem1_suite,
    "mehler": mehler_suite,
    "pfdet": pfdet_suite,
    "mixed-s": mixed_s_suite,
    "spectral": spectral_suite,
}


def run_suite(name, seed=0):
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return RUNNERS[name](seed=seed)
