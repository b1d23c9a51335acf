"""Hot numeric kernels with JIT and pure-numpy implementations.

The JIT path covers the three inner loops that dominate wall time: the
backprojection gather (per point, per element delay lookup), the
lattice interpolation used by subimage merging, and the Newton
inversion of the compressed-coordinate map used for grid generation.
All have numpy fallbacks with identical semantics, selected
automatically when the JIT compiler is unavailable.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .model import C_LIGHT

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

    prange = range


def set_threads(n: int | None) -> None:
    """Cap JIT worker threads; no-op without the JIT compiler."""
    if HAVE_NUMBA and n:
        numba.set_num_threads(max(1, int(n)))


# ---------------------------------------------------------------------------
# backprojection gather
# ---------------------------------------------------------------------------

@njit(parallel=True, fastmath=True, cache=True)
def _backproject_jit(points, el_pos, envelopes, t0, dt, k_ref):
    n_pts = points.shape[0]
    n_el = el_pos.shape[0]
    n_t = envelopes.shape[1]
    out = np.zeros(n_pts, dtype=np.complex128)
    oow = np.zeros(n_pts, dtype=np.int64)
    kc = k_ref * C_LIGHT
    for ip in prange(n_pts):
        px = points[ip, 0]
        py = points[ip, 1]
        pz = points[ip, 2]
        acc = 0.0 + 0.0j
        bad = 0
        for ie in range(n_el):
            dx = px - el_pos[ie, 0]
            dy = py - el_pos[ie, 1]
            dz = pz - el_pos[ie, 2]
            tau = 2.0 * np.sqrt(dx * dx + dy * dy + dz * dz) / C_LIGHT
            x = (tau - t0) / dt
            if x < 0.0 or x > n_t - 1:
                bad += 1
                continue
            i = int(x)
            if i > n_t - 2:
                i = n_t - 2
            f = x - i
            env = envelopes[ie, i] * (1.0 - f) + envelopes[ie, i + 1] * f
            acc += env * np.exp(1j * kc * tau)
        out[ip] = acc
        oow[ip] = bad
    return out, oow


def _backproject_numpy(points, el_pos, envelopes, t0, dt, k_ref):
    n_t = envelopes.shape[1]
    out = np.zeros(points.shape[0], dtype=complex)
    oow = np.zeros(points.shape[0], dtype=np.int64)
    kc = k_ref * C_LIGHT
    for ie in range(el_pos.shape[0]):
        d = np.linalg.norm(points - el_pos[ie], axis=1)
        tau = 2.0 * d / C_LIGHT
        x = (tau - t0) / dt
        ok = (x >= 0.0) & (x <= n_t - 1)
        oow += ~ok
        xs = np.where(ok, x, 0.0)
        i = np.minimum(xs.astype(int), n_t - 2)
        f = xs - i
        row = envelopes[ie]
        env = row[i] * (1.0 - f) + row[i + 1] * f
        out += np.where(ok, env * np.exp(1j * kc * tau), 0.0)
    return out, oow


def backproject_gather(points, el_pos, envelopes, t0, dt, k_ref):
    """Sum delay-interpolated echoes of the given elements at each point.

    Returns (values, out_of_window_counts); callers decide whether any
    out-of-window hit is an error.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    el_pos = np.ascontiguousarray(el_pos, dtype=np.float64)
    envelopes = np.ascontiguousarray(envelopes, dtype=np.complex128)
    if HAVE_NUMBA:
        return _backproject_jit(points, el_pos, envelopes,
                                float(t0), float(dt), float(k_ref))
    return _backproject_numpy(points, el_pos, envelopes, t0, dt, k_ref)


# ---------------------------------------------------------------------------
# lattice interpolation (separable, on fractional lattice coordinates)
# ---------------------------------------------------------------------------

@njit(parallel=True, fastmath=True, cache=True)
def _interp_linear_jit(values, coords):
    nu, nv, nn = values.shape
    n = coords.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    ok = np.zeros(n, dtype=np.bool_)
    for ip in prange(n):
        cu = coords[ip, 0]
        cv = coords[ip, 1]
        cn = coords[ip, 2]
        if cu < 0.0 or cu > nu - 1 or cv < 0.0 or cv > nv - 1 \
                or cn < 0.0 or cn > nn - 1:
            continue
        iu = int(cu)
        if iu > nu - 2:
            iu = nu - 2
        iv = int(cv)
        if iv > nv - 2:
            iv = nv - 2
        iw = int(cn)
        if iw > nn - 2:
            iw = nn - 2
        fu = cu - iu
        fv = cv - iv
        fn = cn - iw
        acc = 0.0 + 0.0j
        for a in range(2):
            wa = fu if a == 1 else 1.0 - fu
            for b in range(2):
                wb = fv if b == 1 else 1.0 - fv
                for c in range(2):
                    wc = fn if c == 1 else 1.0 - fn
                    acc += values[iu + a, iv + b, iw + c] * (wa * wb * wc)
        out[ip] = acc
        ok[ip] = True
    return out, ok


@njit(parallel=True, fastmath=True, cache=True)
def _interp_cubic_jit(values, coords):
    nu, nv, nn = values.shape
    n = coords.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    ok = np.zeros(n, dtype=np.bool_)
    for ip in prange(n):
        cu = coords[ip, 0]
        cv = coords[ip, 1]
        cn = coords[ip, 2]
        # the 4-tap stencil needs one spare sample on each side
        if cu < 1.0 or cu > nu - 2 or cv < 1.0 or cv > nv - 2 \
                or cn < 1.0 or cn > nn - 2:
            continue
        iu = int(cu)
        if iu > nu - 3:
            iu = nu - 3
        iv = int(cv)
        if iv > nv - 3:
            iv = nv - 3
        iw = int(cn)
        if iw > nn - 3:
            iw = nn - 3
        wu = _keys_weights(cu - iu)
        wv = _keys_weights(cv - iv)
        wn = _keys_weights(cn - iw)
        acc = 0.0 + 0.0j
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    acc += values[iu - 1 + a, iv - 1 + b, iw - 1 + c] \
                        * (wu[a] * wv[b] * wn[c])
        out[ip] = acc
        ok[ip] = True
    return out, ok


@njit(cache=True)
def _keys_weights(f):
    # Keys cubic convolution, a = -1/2
    w = np.empty(4)
    w[0] = ((-0.5 * f + 1.0) * f - 0.5) * f
    w[1] = (1.5 * f - 2.5) * f * f + 1.0
    w[2] = ((-1.5 * f + 2.0) * f + 0.5) * f
    w[3] = (0.5 * f - 0.5) * f * f
    return w


def _interp_linear_numpy(values, coords):
    nu, nv, nn = values.shape
    cu, cv, cn = coords[:, 0], coords[:, 1], coords[:, 2]
    ok = ((cu >= 0) & (cu <= nu - 1) & (cv >= 0) & (cv <= nv - 1)
          & (cn >= 0) & (cn <= nn - 1))
    iu = np.minimum(np.clip(cu, 0, None).astype(int), nu - 2)
    iv = np.minimum(np.clip(cv, 0, None).astype(int), nv - 2)
    iw = np.minimum(np.clip(cn, 0, None).astype(int), nn - 2)
    fu, fv, fn = cu - iu, cv - iv, cn - iw
    out = np.zeros(coords.shape[0], dtype=complex)
    for a in (0, 1):
        wa = fu if a else 1.0 - fu
        for b in (0, 1):
            wb = fv if b else 1.0 - fv
            for c in (0, 1):
                wc = fn if c else 1.0 - fn
                out += values[iu + a, iv + b, iw + c] * (wa * wb * wc)
    return np.where(ok, out, 0.0), ok


def _keys_weights_numpy(f):
    w0 = ((-0.5 * f + 1.0) * f - 0.5) * f
    w1 = (1.5 * f - 2.5) * f * f + 1.0
    w2 = ((-1.5 * f + 2.0) * f + 0.5) * f
    w3 = (0.5 * f - 0.5) * f * f
    return (w0, w1, w2, w3)


def _interp_cubic_numpy(values, coords):
    nu, nv, nn = values.shape
    cu, cv, cn = coords[:, 0], coords[:, 1], coords[:, 2]
    ok = ((cu >= 1) & (cu <= nu - 2) & (cv >= 1) & (cv <= nv - 2)
          & (cn >= 1) & (cn <= nn - 2))
    iu = np.minimum(np.clip(cu, 1, None).astype(int), nu - 3)
    iv = np.minimum(np.clip(cv, 1, None).astype(int), nv - 3)
    iw = np.minimum(np.clip(cn, 1, None).astype(int), nn - 3)
    wu = _keys_weights_numpy(cu - iu)
    wv = _keys_weights_numpy(cv - iv)
    wn = _keys_weights_numpy(cn - iw)
    out = np.zeros(coords.shape[0], dtype=complex)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                out += values[iu - 1 + a, iv - 1 + b, iw - 1 + c] \
                    * (wu[a] * wv[b] * wn[c])
    return np.where(ok, out, 0.0), ok


# ---------------------------------------------------------------------------
# compressed-coordinate Newton inversion
# ---------------------------------------------------------------------------

@njit(parallel=True, fastmath=True, cache=True)
def _invert_newton_jit(x_min, x_max, y_min, y_max, k_min, k_max,
                       targets, guesses, tol, max_iter, max_step, z_floor):
    # Damped Newton per point with the analytic gradient of the
    # (u, v, n) map; max_step <= 0 disables the trust radius. Failed
    # points return their (z-floored) starting guess with ok False.
    n_pts = targets.shape[0]
    pos = np.empty((n_pts, 3))
    ok = np.zeros(n_pts, np.bool_)
    iters = np.zeros(n_pts, np.int64)
    gap = 4.0 * (x_max - x_min) ** 2 + 4.0 * (y_max - y_min) ** 2
    pi = np.pi
    for i in prange(n_pts):
        x = guesses[i, 0]
        y = guesses[i, 1]
        z = guesses[i, 2] if guesses[i, 2] > z_floor else z_floor
        tu = targets[i, 0]
        tv = targets[i, 1]
        tn = targets[i, 2]
        good = False
        it = 0
        for it in range(1, max_iter + 1):
            x0 = min(max(x, x_min), x_max)
            y0 = min(max(y, y_min), y_max)
            z2 = z * z
            du1 = np.sqrt((x - x_min) ** 2 + (y - y0) ** 2 + z2)
            du2 = np.sqrt((x - x_max) ** 2 + (y - y0) ** 2 + z2)
            dv1 = np.sqrt((x - x0) ** 2 + (y - y_min) ** 2 + z2)
            dv2 = np.sqrt((x - x0) ** 2 + (y - y_max) ** 2 + z2)
            e1 = np.sqrt((x - x_min) ** 2 + (y - y_min) ** 2 + z2)
            e2 = np.sqrt((x - x_min) ** 2 + (y - y_max) ** 2 + z2)
            e3 = np.sqrt((x - x_max) ** 2 + (y - y_min) ** 2 + z2)
            e4 = np.sqrt((x - x_max) ** 2 + (y - y_max) ** 2 + z2)
            r = e1 + e2 + e3 + e4
            rad = r * r - gap
            if rad <= 0.0 or min(min(du1, du2), min(dv1, dv2)) == 0.0 \
                    or min(min(e1, e2), min(e3, e4)) == 0.0:
                break
            sq = np.sqrt(rad)
            u = (k_max / pi) * (du1 - du2)
            v = (k_max / pi) * (dv1 - dv2)
            w = (k_max / (4.0 * pi)) * sq - (k_min / (4.0 * pi)) * r
            ru = u - tu
            rv = v - tv
            rn = w - tn
            if max(abs(ru), max(abs(rv), abs(rn))) <= tol:
                good = True
                break
            cu = k_max / pi
            ja = cu * ((x - x_min) / du1 - (x - x_max) / du2)
            jb = cu * ((y - y0) / du1 - (y - y0) / du2)
            jc = cu * (z / du1 - z / du2)
            jd = cu * ((x - x0) / dv1 - (x - x0) / dv2)
            je = cu * ((y - y_min) / dv1 - (y - y_max) / dv2)
            jf = cu * (z / dv1 - z / dv2)
            fac = (k_max / (4.0 * pi)) * (r / sq) - k_min / (4.0 * pi)
            rx = (x - x_min) / e1 + (x - x_min) / e2 \
                + (x - x_max) / e3 + (x - x_max) / e4
            ry = (y - y_min) / e1 + (y - y_max) / e2 \
                + (y - y_min) / e3 + (y - y_max) / e4
            rz = z / e1 + z / e2 + z / e3 + z / e4
            jg = fac * rx
            jh = fac * ry
            ji = fac * rz
            det = ja * (je * ji - jf * jh) - jb * (jd * ji - jf * jg) \
                + jc * (jd * jh - je * jg)
            if abs(det) < 1e-30:
                break
            sx = (ru * (je * ji - jf * jh) - jb * (rv * ji - jf * rn)
                  + jc * (rv * jh - je * rn)) / det
            sy = (ja * (rv * ji - jf * rn) - ru * (jd * ji - jf * jg)
                  + jc * (jd * rn - rv * jg)) / det
            sz = (ja * (je * rn - rv * jh) - jb * (jd * rn - rv * jg)
                  + ru * (jd * jh - je * jg)) / det
            if max_step > 0.0:
                sn = np.sqrt(sx * sx + sy * sy + sz * sz)
                if sn > max_step:
                    sc = max_step / sn
                    sx *= sc
                    sy *= sc
                    sz *= sc
            x -= sx
            y -= sy
            z -= sz
            if z < z_floor:
                z = z_floor
        iters[i] = it
        if good:
            pos[i, 0] = x
            pos[i, 1] = y
            pos[i, 2] = z
            ok[i] = True
        else:
            pos[i, 0] = guesses[i, 0]
            pos[i, 1] = guesses[i, 1]
            pos[i, 2] = guesses[i, 2] if guesses[i, 2] > z_floor else z_floor
    return pos, ok, iters


def lattice_interpolate(values: np.ndarray, coords: np.ndarray,
                        kernel: str = "linear"):
    """Interpolate a complex 3-D lattice at fractional coordinates.

    Parameters
    ----------
    values : ndarray, shape (nu, nv, nn)
    coords : ndarray, shape (n, 3)
        Lattice-index coordinates (0 at the first sample, 1 per step).
    kernel : {'linear', 'cubic'}

    Returns
    -------
    (values, ok) : complex ndarray (n,), bool ndarray (n,)
        Out-of-hull queries return 0 with ok False; no clamping.
    """
    values = np.ascontiguousarray(values, dtype=np.complex128)
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if kernel == "linear":
        fn = _interp_linear_jit if HAVE_NUMBA else _interp_linear_numpy
    elif kernel == "cubic":
        fn = _interp_cubic_jit if HAVE_NUMBA else _interp_cubic_numpy
    else:
        raise ConfigError(f"unknown interpolation kernel '{kernel}'")
    return fn(values, coords)
