# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the Jack branching sweep and the Euler-Maruyama path kernel.

Both functions mirror ``_fallback`` line by line; the RNG is the same
counter-based splitmix64 stream so the two backends draw identical numbers.
"""

import numpy as np
from cython.parallel import prange
from libc.math cimport sqrt, log, exp, cos, sin, pow, INFINITY, M_PI
from libc.stdint cimport uint64_t, int64_t

DEF MAXM = 16

cdef uint64_t GOLD = 0x9E3779B97F4A7C15
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = 0x94D049BB133111EB
cdef uint64_t STEP = 0xD1B54A32D192ED03
cdef double TWO53 = 1.0 / 9007199254740992.0


cdef inline uint64_t splitmix64(uint64_t z) noexcept nogil:
    z = z + GOLD
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double draw(uint64_t base, uint64_t q) noexcept nogil:
    return <double>(splitmix64(base + q * STEP) >> 11) * TWO53


def path_base(uint64_t key, uint64_t path):
    return splitmix64(key ^ splitmix64(path))


def uniforms(uint64_t key, uint64_t path, uint64_t start, Py_ssize_t n):
    cdef uint64_t base = splitmix64(key ^ splitmix64(path))
    out = np.empty(n)
    cdef double[:] o = out
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = draw(base, start + i)
    return out


def branch_level(const int64_t[:] rows, const int64_t[:] cols, const int64_t[:] degs,
                 const double[:] psi, const double[:, :] prev, const double[:, :] powers,
                 Py_ssize_t nrows):
    """out[rows[e], :] += psi[e] * prev[cols[e], :] * powers[degs[e], :]."""
    cdef Py_ssize_t npts = prev.shape[1]
    out = np.zeros((nrows, npts))
    cdef double[:, :] o = out
    cdef Py_ssize_t e, k, r, c, d
    cdef double p
    with nogil:
        for e in range(rows.shape[0]):
            r = rows[e]
            c = cols[e]
            d = degs[e]
            p = psi[e]
            for k in range(npts):
                o[r, k] += p * prev[c, k] * powers[d, k]
    return out


cdef double run_path(const double[:, :] roots, const double[:] kprime,
                     const double[:, :] simple, const int64_t[:] simple_idx,
                     const double[:] x0, double horizon, double dt_base, double c_scale,
                     double eps, double split_a, uint64_t base, int64_t* steps) noexcept nogil:
    cdef Py_ssize_t m = x0.shape[0]
    cdef Py_ssize_t nR = roots.shape[0]
    cdef Py_ssize_t nS = simple.shape[0]
    cdef double x[MAXM]
    cdef double b[MAXM]
    cdef double z[MAXM + 1]
    cdef Py_ssize_t i, j, r, jmin, skip
    cdef double s = 0.0, d, v, dt, sq, u1, u2, rad, prob, kp, nu, g, y, dnew
    cdef uint64_t q = 0
    cdef bint last
    cdef int64_t nstep = 0
    for i in range(m):
        x[i] = x0[i]
    while True:
        d = INFINITY
        jmin = 0
        for j in range(nS):
            v = 0.0
            for i in range(m):
                v += simple[j, i] * x[i]
            if v < d:
                d = v
                jmin = j
        if d <= 0.0:
            steps[0] = nstep
            return s
        kp = kprime[simple_idx[jmin]]
        if d < eps:
            if split_a <= 0.0:
                steps[0] = nstep
                return s
            if kp >= 0.5:
                prob = 1.0
            else:
                prob = pow(d / split_a, 1.0 - 2.0 * kp)
            u1 = draw(base, q)
            q += 1
            if u1 >= prob:
                steps[0] = nstep
                return s
            for i in range(m):
                x[i] += (split_a - d) * simple[jmin, i]
            continue
        if s >= horizon:
            steps[0] = nstep
            return INFINITY
        dt = c_scale * d * d
        if dt > dt_base:
            dt = dt_base
        last = False
        if dt >= horizon - s:
            dt = horizon - s
            last = True
        # drift of every root except the nearest wall, whose normal motion is
        # advanced through the Bessel scale function below
        skip = simple_idx[jmin]
        for i in range(m):
            b[i] = 0.0
        for r in range(nR):
            v = 0.0
            for i in range(m):
                v += roots[r, i] * x[i]
            if v <= 0.0:
                steps[0] = nstep
                return s
            if r == skip:
                continue
            v = kprime[r] / v
            for i in range(m):
                b[i] += v * roots[r, i]
        i = 0
        while i < m:
            u1 = 1.0 - draw(base, q)
            u2 = draw(base, q + 1)
            q += 2
            rad = sqrt(-2.0 * log(u1))
            z[i] = rad * cos(2.0 * M_PI * u2)
            z[i + 1] = rad * sin(2.0 * M_PI * u2)
            i += 2
        sq = sqrt(dt)
        g = 0.0
        for i in range(m):
            b[i] = b[i] * dt + sq * z[i]
            g += simple[jmin, i] * b[i]
        if kp >= 0.5:
            dnew = d * exp(g / d + (kp - 0.5) * dt / (d * d))
        else:
            nu = 1.0 - 2.0 * kp
            y = pow(d, nu) + nu * pow(d, nu - 1.0) * g
            dnew = pow(y, 1.0 / nu) if y > 0.0 else -1.0
        for i in range(m):
            x[i] += b[i] + (dnew - d - g) * simple[jmin, i]
        nstep += 1
        if last:
            s = horizon
        else:
            s += dt
        if dnew <= 0.0:
            steps[0] = nstep
            return s


def simulate_paths(const double[:, :] roots, const double[:] kprime,
                   const double[:, :] simple, const int64_t[:] simple_idx,
                   const double[:] x0, double horizon, double dt_base, double c_scale,
                   double eps, double split_a, uint64_t key, Py_ssize_t n_paths,
                   int nthreads):
    """Absorption time per path (inf when the path survives to the horizon)."""
    if x0.shape[0] > MAXM:
        raise ValueError("rank too large for the compiled kernel")
    times = np.empty(n_paths)
    nsteps = np.zeros(n_paths, dtype=np.int64)
    cdef double[:] t = times
    cdef int64_t[:] ns = nsteps
    cdef Py_ssize_t p
    cdef uint64_t base
    for p in prange(n_paths, nogil=True, schedule="static", num_threads=nthreads):
        base = splitmix64(key ^ splitmix64(<uint64_t>p))
        t[p] = run_path(roots, kprime, simple, simple_idx, x0, horizon, dt_base,
                        c_scale, eps, split_a, base, &ns[p])
    return times, nsteps


def psi_strip(tuple kappa, tuple mu, double alpha):
    """Branching coefficient psi_{kappa/mu} for a horizontal strip."""
    cdef Py_ssize_t L = len(kappa), Lm = len(mu)
    cdef int k[64]
    cdef int u[64]
    cdef int mc[256]
    cdef Py_ssize_t i, j, r
    cdef double out = 1.0, a1, a2, leg
    if L > 64 or (L and kappa[0] > 256):
        raise ValueError("partition too large for the compiled kernel")
    for i in range(L):
        k[i] = kappa[i]
        u[i] = mu[i] if i < Lm else 0
    for j in range(k[0] if L else 0):
        mc[j] = 0
        for i in range(L):
            if u[i] > j:
                mc[j] += 1
    for i in range(L):
        if k[i] == u[i]:
            continue
        for j in range(u[i]):
            # columns touched by the strip are skipped
            for r in range(L):
                if u[r] <= j < k[r]:
                    break
            else:
                leg = mc[j] - i - 1
                a1 = u[i] - j - 1
                a2 = k[i] - j - 1
                out *= ((alpha * a1 + leg + 1) / (alpha * a1 + alpha + leg)) / \
                       ((alpha * a2 + leg + 1) / (alpha * a2 + alpha + leg))
    return out
