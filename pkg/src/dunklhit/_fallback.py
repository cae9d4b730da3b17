"""Pure numpy implementations of the compiled kernels.

Paths are advanced in lockstep, each with its own clock and its own draw
counter, so the random stream seen by a path is the same as in the compiled
kernel.
"""

import numpy as np

GOLD = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
STEP = np.uint64(0xD1B54A32D192ED03)
TWO53 = 1.0 / 9007199254740992.0


def splitmix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + GOLD
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def _draw(base, q):
    with np.errstate(over="ignore"):
        h = splitmix64(base + q * STEP)
    return (h >> np.uint64(11)).astype(np.float64) * TWO53


def path_base(key, path):
    return int(splitmix64(np.uint64(key) ^ splitmix64(np.uint64(path))))


def uniforms(key, path, start, n):
    base = np.uint64(path_base(key, path))
    q = np.uint64(start) + np.arange(n, dtype=np.uint64)
    return _draw(base, q)


def branch_level(rows, cols, degs, psi, prev, powers, nrows, chunk_entries=2_000_000):
    npts = prev.shape[1]
    out = np.zeros((nrows, npts))
    E = len(rows)
    if E == 0:
        return out
    step = max(1, chunk_entries // max(npts, 1))
    for a in range(0, E, step):
        sl = slice(a, min(E, a + step))
        contrib = psi[sl, None] * prev[cols[sl]] * powers[degs[sl]]
        r = rows[sl]
        starts = np.flatnonzero(np.r_[True, r[1:] != r[:-1]])
        out[r[starts]] += np.add.reduceat(contrib, starts, axis=0)
    return out


def simulate_paths(roots, kprime, simple, simple_idx, x0, horizon, dt_base, c_scale,
                   eps, split_a, key, n_paths, nthreads=1):
    roots = np.asarray(roots, dtype=float)
    simple = np.asarray(simple, dtype=float)
    kprime = np.asarray(kprime, dtype=float)
    simple_idx = np.asarray(simple_idx, dtype=np.int64)
    simple_k = kprime[simple_idx]
    m = len(x0)
    npair = (m + 1) // 2
    paths = np.arange(n_paths, dtype=np.uint64)
    base = splitmix64(np.uint64(key) ^ splitmix64(paths))
    q = np.zeros(n_paths, dtype=np.uint64)
    x = np.tile(np.asarray(x0, dtype=float), (n_paths, 1))
    s = np.zeros(n_paths)
    times = np.full(n_paths, np.inf)
    nsteps = np.zeros(n_paths, dtype=np.int64)
    active = np.arange(n_paths)
    while active.size:
        xa = x[active]
        proj = xa @ simple.T
        jmin = np.argmin(proj, axis=1)
        d = proj[np.arange(active.size), jmin]

        dead = d <= 0.0
        near = (~dead) & (d < eps)
        if near.any():
            idx = np.flatnonzero(near)
            if split_a <= 0.0:
                dead[idx] = True
            else:
                kp = simple_k[jmin[idx]]
                expo = np.maximum(0.0, 1.0 - 2.0 * kp)
                prob = np.where(kp >= 0.5, 1.0, (d[idx] / split_a) ** expo)
                u = _draw(base[active[idx]], q[active[idx]])
                q[active[idx]] += np.uint64(1)
                esc = u < prob
                dead[idx[~esc]] = True
                go = idx[esc]
                x[active[go]] += (split_a - d[go])[:, None] * simple[jmin[go]]
        if dead.any():
            gone = active[dead]
            times[gone] = s[gone]
            active = active[~dead]
            continue
        if near.any():
            # escaped paths re-enter the loop before stepping
            continue

        done = s[active] >= horizon
        if done.any():
            active = active[~done]
            d, jmin = d[~done], jmin[~done]
            xa = x[active]
            if not active.size:
                break
        dt = np.minimum(dt_base, c_scale * d * d)
        rem = horizon - s[active]
        last = dt >= rem
        dt = np.where(last, rem, dt)

        pair = xa @ roots.T
        bad = (pair <= 0.0).any(axis=1)
        # the nearest wall's own term is handled through the scale function
        kmat = np.tile(kprime, (active.size, 1))
        kmat[np.arange(active.size), simple_idx[jmin]] = 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            b = (kmat / pair) @ roots
        z = np.empty((active.size, 2 * npair))
        qa = q[active]
        for j in range(npair):
            u1 = 1.0 - _draw(base[active], qa + np.uint64(2 * j))
            u2 = _draw(base[active], qa + np.uint64(2 * j + 1))
            rad = np.sqrt(-2.0 * np.log(u1))
            z[:, 2 * j] = rad * np.cos(2.0 * np.pi * u2)
            z[:, 2 * j + 1] = rad * np.sin(2.0 * np.pi * u2)
        ok = ~bad
        ia = active[ok]
        d, jmin, dt, last = d[ok], jmin[ok], dt[ok], last[ok]
        inc = b[ok] * dt[:, None] + np.sqrt(dt)[:, None] * z[ok, :m]
        n = simple[jmin]
        g = np.sum(n * inc, axis=1)
        kp = simple_k[jmin]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            nu = 1.0 - 2.0 * kp
            y = d ** nu + nu * d ** (nu - 1.0) * g
            dsc = np.where(y > 0.0, np.abs(y) ** (1.0 / nu), -1.0)
            dlog = d * np.exp(g / d + (kp - 0.5) * dt / (d * d))
        dnew = np.where(kp >= 0.5, dlog, dsc)
        q[ia] += np.uint64(2 * npair)
        x[ia] = xa[ok] + inc + (dnew - d - g)[:, None] * n
        nsteps[ia] += 1
        s[ia] = np.where(last, horizon, s[ia] + dt)
        hit = dnew <= 0.0
        if hit.any():
            times[ia[hit]] = s[ia[hit]]
        if bad.any() or hit.any():
            gone = np.zeros(active.size, dtype=bool)
            gone[bad] = True
            gone[np.flatnonzero(ok)[hit]] = True
            times[active[bad]] = s[active[bad]]
            active = active[~gone]
    return times, nsteps
