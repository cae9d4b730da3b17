"""Pick the compiled kernels when they import, else the numpy fallback.

Set ``DUNKL_HIT_BACKEND=python`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("DUNKL_HIT_BACKEND", "").lower() == "python":
        raise ImportError("fallback requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def thread_count():
    cap = os.environ.get("DUNKL_HIT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


class Kernels:
    def __init__(self, impl, name):
        self.impl = impl
        self.name = name

    def jack_levels(self, plan, x, max_weight):
        """Top-level P_kappa values for every partition in ``plan``."""
        vec = x.ndim == 2
        X = x if vec else x[:, None]
        X = np.ascontiguousarray(X, dtype=float)
        npts = X.shape[1]
        prev = np.ones((1, npts))
        degs_max = plan.max_weight
        for n in range(1, plan.m + 1):
            lv = plan.levels[n]
            powers = X[n - 1][None, :] ** np.arange(degs_max + 1)[:, None]
            prev = self.impl.branch_level(lv.rows, lv.cols, lv.degs, lv.psi, prev,
                                          np.ascontiguousarray(powers), len(lv.parts))
        return prev if vec else prev[:, 0]

    def simulate_paths(self, *args, nthreads=None):
        return self.impl.simulate_paths(*args, thread_count() if nthreads is None else nthreads)

    def uniforms(self, key, path, start, n):
        return self.impl.uniforms(key, path, start, n)


def psi_kernel():
    return _compiled.psi_strip if _compiled is not None and kernels is compiled else None


fallback = Kernels(_fallback, "python")
compiled = Kernels(_compiled, "cython") if _compiled is not None else None
kernels = compiled or fallback
BACKEND = kernels.name
