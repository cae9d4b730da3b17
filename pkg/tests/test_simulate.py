import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gammainc

from dunklhit import _backend
from dunklhit.errors import BoundaryError, ConfigError, ValidationError
from dunklhit.rootsys import Multiplicity, build_root_system
from dunklhit.simulate import SimConfig, drift, simulate_survival, z_score

B1, B2, A3 = (build_root_system(f, m) for f, m in (("B", 1), ("B", 2), ("A", 3)))


def test_drift_example():
    got = drift(B2, 0.25, [2.0, 1.0])
    assert got == pytest.approx([0.25 * (0.5 + 1 + 1 / 3), 0.25 / 3], rel=1e-14)
    assert drift(B1, Multiplicity(k1=1, k0=0.3), [2.0]) == pytest.approx([0.15])
    with pytest.raises(BoundaryError):
        drift(B2, 0.25, [1.0, 1.0])
    with pytest.raises(ValidationError):
        drift(B2, -0.1, [2.0, 1.0])
    with pytest.raises(ValidationError):
        drift(B2, [0.1, 0.2], [2.0, 1.0])


@given(st.floats(0.2, 5), st.floats(-3, 3))
def test_drift_scaling_and_translation(lam, c):
    x = np.array([2.0, 0.5, -1.0])
    base = drift(A3, 0.3, x)
    assert drift(A3, 0.3, lam * x) == pytest.approx(base / lam, rel=1e-12)
    assert drift(A3, 0.3, x + c) == pytest.approx(base, rel=1e-12)


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(dt_base=0)
    with pytest.raises(ConfigError):
        SimConfig(paths=0)
    with pytest.raises(ConfigError):
        SimConfig(split_factor=0.5)
    with pytest.raises(ConfigError):
        SimConfig(seed=-1)
    with pytest.raises(ConfigError):
        simulate_survival(B1, 0.25, [1.0], [1.0, 0.5], SimConfig(paths=10))
    with pytest.raises(ConfigError):
        simulate_survival(B1, 0.25, [1.0], [1.0], SimConfig(paths=10, horizon=0.5))
    with pytest.raises(ValidationError):
        simulate_survival(B2, 0.25, [1.0, 2.0], [1.0], SimConfig(paths=10))


def test_deterministic_for_fixed_seed():
    cfg = SimConfig(paths=500, seed=11)
    a = simulate_survival(B2, 0.25, [2.0, 1.0], [0.5, 1.0], cfg)
    b = simulate_survival(B2, 0.25, [2.0, 1.0], [0.5, 1.0], cfg)
    c = simulate_survival(B2, 0.25, [2.0, 1.0], [0.5, 1.0], SimConfig(paths=500, seed=12))
    assert a == b
    assert a != c


def test_no_hits_when_drift_repels():
    est = simulate_survival(B2, 2.0, [2.0, 1.0], [1.0], SimConfig(paths=10_000, seed=3))
    assert est.probabilities[0] == 1.0
    assert est.std_errors[0] == 0.0


def test_rank_one_against_incomplete_gamma():
    k0 = 0.75
    t = np.array([0.5, 1.0, 2.0])
    est = simulate_survival(B1, Multiplicity(k1=1, k0=k0).dual(), [1.0], t,
                            SimConfig(paths=40_000, seed=5))
    exact = gammainc(k0 - 0.5, 1.0 / (2 * t))
    for i, v in enumerate(exact):
        assert abs(z_score(est, v, i)) < 4


def test_step_refinement_is_consistent():
    x0, t = [2.0, 1.0], [1.0]
    coarse = simulate_survival(B2, 0.25, x0, t, SimConfig(paths=20_000, seed=8, dt_base=4e-3))
    fine = simulate_survival(B2, 0.25, x0, t, SimConfig(paths=20_000, seed=9, dt_base=1e-3))
    d = coarse.probabilities[0] - fine.probabilities[0]
    assert abs(d) < 4 * np.hypot(coarse.std_errors[0], fine.std_errors[0])


def test_thread_count_does_not_change_result():
    cfg = SimConfig(paths=800, seed=2)
    one = simulate_survival(B2, 0.25, [2.0, 1.0], [1.0], cfg, nthreads=1)
    four = simulate_survival(B2, 0.25, [2.0, 1.0], [1.0], cfg, nthreads=4)
    assert one == four


@pytest.mark.skipif(_backend.compiled is None, reason="compiled kernels not built")
def test_backends_agree():
    cfg = SimConfig(paths=400, seed=4)
    a = simulate_survival(B2, 0.25, [2.0, 1.0], [0.5, 1.0], cfg, backend=_backend.compiled)
    b = simulate_survival(B2, 0.25, [2.0, 1.0], [0.5, 1.0], cfg, backend=_backend.fallback)
    assert np.array_equal(a.probabilities, b.probabilities)


def test_z_score():
    cfg = SimConfig(paths=100, seed=1)
    est = simulate_survival(B2, 2.0, [2.0, 1.0], [1.0], cfg)
    assert z_score(est, 1.0) == 0.0
    assert z_score(est, 0.5) == np.inf
    assert z_score(est, 0.5, extra_se=0.25) == pytest.approx(2.0)
