"""Independent reference implementations the tests compare against.

Everything here is the slow, obvious formula: scalar loops, direct
Fourier sums, and textbook finite differences. None of it shares code
with the package, so agreement is evidence rather than tautology.
"""

import numpy as np

C_LIGHT = 299_792_458.0


def born_cube(positions, reflectivity, elements, freqs_hz):
    """Stepped-frequency measurement as a triple scalar loop.

    s(element, freq) = sum_q sigma_q * exp(-2j * k * |element - q|).
    """
    positions = np.asarray(positions, dtype=float)
    elements = np.asarray(elements, dtype=float)
    out = np.zeros((len(elements), len(freqs_hz)), dtype=complex)
    for e in range(len(elements)):
        for m, f in enumerate(freqs_hz):
            k = 2.0 * np.pi * f / C_LIGHT
            acc = 0.0 + 0.0j
            for q in range(len(positions)):
                d = np.sqrt(np.sum((elements[e] - positions[q]) ** 2))
                acc += reflectivity[q] * np.exp(-2j * k * d)
            out[e, m] = acc
    return out


def dft_profile(spectrum, k_samples, taus):
    """Direct delay-domain sum s(t) = sum_m s_m exp(j k_m c t)."""
    taus = np.asarray(taus, dtype=float)
    phases = np.exp(1j * np.outer(taus * C_LIGHT, np.asarray(k_samples)))
    return phases @ np.asarray(spectrum, dtype=complex)


def interp_backproject(profiles, element_positions, envelopes, points):
    """Backprojection through numpy's own interpolator.

    Linear interpolation of each envelope at the round-trip delay plus
    carrier re-modulation, accumulated point by point with np.interp
    (real and imaginary parts separately).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    taxis = profiles.t0 + profiles.dt * np.arange(profiles.n_samples)
    out = np.zeros(points.shape[0], dtype=complex)
    for i, p in enumerate(points):
        acc = 0.0 + 0.0j
        for e in range(len(element_positions)):
            d = np.sqrt(np.sum((element_positions[e] - p) ** 2))
            tau = 2.0 * d / C_LIGHT
            env = (np.interp(tau, taxis, envelopes[e].real)
                   + 1j * np.interp(tau, taxis, envelopes[e].imag))
            acc += env * np.exp(1j * profiles.k_ref * C_LIGHT * tau)
        out[i] = acc
    return out


def num_gradient(f, p, h=1e-5):
    """Central-difference gradient of a scalar field at one point."""
    p = np.asarray(p, dtype=float)
    g = np.zeros(3)
    for a in range(3):
        dp = np.zeros(3)
        dp[a] = h
        g[a] = (f(p + dp) - f(p - dp)) / (2.0 * h)
    return g


def num_jacobian(field, p, h=1e-5):
    """Central-difference Jacobian d field_i / d p_j of a 3-vector field."""
    p = np.asarray(p, dtype=float)
    cols = []
    for a in range(3):
        dp = np.zeros(3)
        dp[a] = h
        cols.append((field(p + dp) - field(p - dp)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def curl_ratio(field, p, h=1e-5):
    """Curl magnitude of a 3-vector field over its Jacobian norm.

    Dimensionless: ~0 for a conservative field, order 1 for a field
    whose rotational part is comparable to its total variation.
    """
    J = num_jacobian(field, p, h)
    curl = np.array([J[2, 1] - J[1, 2],
                     J[0, 2] - J[2, 0],
                     J[1, 0] - J[0, 1]])
    return np.linalg.norm(curl) / max(np.linalg.norm(J), 1e-300)


def box_coefficients(ext, point, kgrid, keypoints_fn, local_wavenumber_fn):
    """Worst box coordinate of the true corner wavenumbers at a point.

    Expresses 2*(k0 - center) for every (subarray corner, band edge)
    pair in the basis (v1, v2, v3) and returns the largest absolute
    coefficient; <= 1 means the spanned parallelepiped contains every
    corner wavenumber exactly.
    """
    kp = keypoints_fn(ext, point, kgrid)
    basis = np.stack([kp.v1, kp.v2, kp.v3], axis=-1)
    center = kp.center
    worst = 0.0
    for vertex in ext.vertices():
        for k in (kgrid.k_min, kgrid.k_max):
            k0 = local_wavenumber_fn(vertex, point, k)
            coef = np.linalg.solve(basis, 2.0 * (k0 - center))
            worst = max(worst, float(np.abs(coef).max()))
    return worst
