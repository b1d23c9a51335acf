"""Range compression and delay-domain interpolation."""

import numpy as np
import pytest

from hhsar import (C_LIGHT, ConfigError, DataCube, FrequencyGrid, JitterSpec,
                   NumericDomainError, Scene, generate_handheld_aperture,
                   range_compress, sample_delay, simulate_measurement)
from hhsar.rangecomp import sample_delays

from oracles import dft_profile


@pytest.fixture(scope="module")
def one_target():
    freqs = FrequencyGrid(12.0e9, 15.0e9, 16)
    ap = generate_handheld_aperture(3, 3, 0.05, JitterSpec(0.004, 2e-4), seed=9)
    scene = Scene(positions=np.array([[0.01, -0.02, 0.12]]),
                  reflectivity=np.array([1.0 - 0.3j]))
    cube = simulate_measurement(scene, ap, freqs)
    return freqs, ap, scene, cube


def test_window_and_shape_metadata(one_target):
    freqs, _, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    assert prof.n_samples == 8 * freqs.count
    assert prof.t0 == 0.0
    lo, hi = prof.window
    assert lo == 0.0 and hi == pytest.approx((prof.n_samples - 1) * prof.dt)
    assert prof.k_ref == pytest.approx(0.5 * (freqs.k_min + freqs.k_max))
    # one alias period of the frequency step spans the delay axis
    dk = (freqs.k_max - freqs.k_min) / (freqs.count - 1)
    assert prof.n_samples * prof.dt == pytest.approx(2 * np.pi / (dk * C_LIGHT))


def test_parseval_energy_identity(one_target):
    freqs, _, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    lhs = np.sum(np.abs(prof.envelopes) ** 2, axis=1)
    rhs = 8 * freqs.count * np.sum(np.abs(cube.values) ** 2, axis=1)
    assert np.allclose(lhs, rhs, rtol=1e-12)


def test_flat_spectrum_peaks_at_the_frequency_count():
    freqs = FrequencyGrid(12.0e9, 15.0e9, 16)
    ap = generate_handheld_aperture(1, 1, 0.01, seed=0)
    cube = DataCube(values=np.ones((1, 16), dtype=complex), aperture=ap,
                    freqs=freqs)
    prof = range_compress(cube, upsample=8)
    assert np.abs(prof.envelopes[0, 0]) == pytest.approx(16.0)
    assert np.abs(prof.envelopes).max() == pytest.approx(16.0)


def test_target_peak_sits_at_its_round_trip_delay(one_target):
    _, ap, scene, cube = one_target
    prof = range_compress(cube, upsample=8)
    for e in range(ap.n_elements):
        d = np.linalg.norm(ap.elements[e] - scene.positions[0])
        tau = 2.0 * d / C_LIGHT
        peak = np.argmax(np.abs(prof.envelopes[e]))
        assert abs(peak * prof.dt - tau) <= prof.dt


def test_interpolated_sampling_tracks_the_direct_sum(one_target):
    freqs, ap, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    lo, hi = prof.window
    taus = np.linspace(lo, hi, 201)
    for e in (0, 4, 8):
        got = sample_delays(prof, e, taus)
        want = dft_profile(cube.values[e], freqs.k_samples, taus)
        scale = np.abs(want).max()
        assert np.max(np.abs(got - want)) < 0.02 * scale


def test_sampling_is_exact_on_profile_samples(one_target):
    freqs, _, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    taus = prof.t0 + prof.dt * np.array([0, 7, 40, prof.n_samples - 1])
    got = sample_delays(prof, 2, taus)
    want = dft_profile(cube.values[2], freqs.k_samples, taus)
    assert np.max(np.abs(got - want)) < 1e-10 * np.abs(want).max()


def test_scalar_and_vector_sampling_agree(one_target):
    _, _, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    taus = np.linspace(*prof.window, 17)
    got = sample_delays(prof, 1, taus)
    want = np.array([sample_delay(prof, 1, t) for t in taus])
    assert np.max(np.abs(got - want)) < 1e-14 * np.abs(want).max()


def test_out_of_window_delays_are_rejected(one_target):
    _, _, _, cube = one_target
    prof = range_compress(cube, upsample=8)
    lo, hi = prof.window
    with pytest.raises(NumericDomainError):
        sample_delay(prof, 0, hi + prof.dt)
    with pytest.raises(NumericDomainError):
        sample_delays(prof, 0, np.array([lo, lo - prof.dt]))


def test_upsample_factor_is_validated(one_target):
    _, _, _, cube = one_target
    with pytest.raises(ConfigError):
        range_compress(cube, upsample=0)
    with pytest.raises(ConfigError):
        range_compress(cube, upsample=2.5)
