import os
import subprocess
import sys

import numpy as np
import pytest

from dunklhit import _backend
from dunklhit.partition_jack import get_context
from dunklhit.rootsys import build_root_system
from dunklhit.simulate import SimConfig, absorption_times

needs_compiled = pytest.mark.skipif(_backend.compiled is None, reason="compiled kernels not built")


def test_default_prefers_compiled():
    expected = "cython" if _backend.compiled is not None else "python"
    assert _backend.BACKEND == expected


def test_env_forces_fallback():
    env = dict(os.environ, DUNKL_HIT_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from dunklhit import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("DUNKL_HIT_THREADS", "1")
    assert _backend.thread_count() == 1
    monkeypatch.setenv("DUNKL_HIT_THREADS", "junk")
    assert _backend.thread_count() >= 1


@needs_compiled
def test_jack_levels_agree():
    ctx = get_context(4 / 3, 3)
    plan = ctx.plan(16)
    x = np.random.default_rng(0).uniform(-1, 1, (3, 8))
    a = _backend.compiled.jack_levels(plan, x, 16)
    b = _backend.fallback.jack_levels(plan, x, 16)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_compiled
def test_uniform_streams_identical():
    a = _backend.compiled.uniforms(123, 7, 0, 16)
    b = _backend.fallback.uniforms(123, 7, 0, 16)
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_compiled
def test_absorption_times_agree():
    rs = build_root_system("B", 2)
    cfg = SimConfig(paths=200, seed=1)
    a, _ = absorption_times(rs, 0.25, [2.0, 1.0], 1.0, cfg, backend=_backend.compiled)
    b, _ = absorption_times(rs, 0.25, [2.0, 1.0], 1.0, cfg, backend=_backend.fallback)
    assert np.array_equal(np.isinf(a), np.isinf(b))
    fin = np.isfinite(a)
    assert np.allclose(a[fin], b[fin], rtol=1e-10, atol=1e-12)
