import json

import numpy as np
import pytest

import fvnlab


def test_unit_fvn_is_all_pass():
    spec = fvnlab.FvnSpec(sigma_t=0.01, fs=44100.0, seed=3)
    h = fvnlab.synthesize_unit_fvn(spec)
    assert h.shape == (spec.dft_size,)
    np.testing.assert_allclose(np.abs(np.fft.fft(h)), 1.0, atol=1e-9)
    np.testing.assert_array_equal(np.roll(h, spec.dft_size // 2), fvnlab.placement_unit(spec))


def test_coefficients():
    a = np.array(fvnlab.six_term_coefficients())
    assert abs(a.sum() - 1.0) < 1e-12
    assert abs((a * (-1.0) ** np.arange(6)).sum()) < 1e-12


def test_codes_orthogonal():
    b = fvnlab.code_matrix(3)
    np.testing.assert_array_equal(b @ b.T, b.shape[1] * np.eye(3))


def test_generate_measure_roundtrip():
    mix, channels, manifest = fvnlab.generate(json.dumps({"period_no": 4410, "reps": 8, "seed": 2}))
    assert len(channels) == 1
    assert json.loads(manifest)["period_no"] == 4410
    rec = fvnlab.simulate([mix], 44100.0, json.dumps({"paths": [[0.0, 0.5, 0.25]]}))
    ir = fvnlab.measure(rec, manifest)["per_code_irs"][0]
    np.testing.assert_allclose(ir[:4], [0.0, 0.5, 0.25, 0.0], atol=1e-6)


def test_demultiplex_two_channels():
    fs, period = 44100.0, 4410
    units, seqs = [], []
    for ch in range(2):
        spec = fvnlab.FvnSpec(0.01, fs, 10 + ch)
        units.append(fvnlab.placement_unit(spec))
        seqs.append(fvnlab.assemble_sequence(spec, 2, ch, period, 12))
    rec = fvnlab.simulate(seqs, fs, json.dumps({"paths": [[1.0], [0.0, 0.0, -0.5]]}))
    res = fvnlab.demultiplex(rec, units, 2, period, 12, fs=fs)
    np.testing.assert_allclose(res["per_code_irs"][0][:3], [1.0, 0.0, 0.0], atol=1e-6)
    np.testing.assert_allclose(res["per_code_irs"][1][:3], [0.0, 0.0, -0.5], atol=1e-6)


def test_shaping_roundtrip():
    a = fvnlab.fit_slope_filter(-3.0)
    x = np.random.default_rng(0).standard_normal(2000)
    np.testing.assert_allclose(fvnlab.inverse_shape(fvnlab.shape_spectrum(x, a), a), x, atol=1e-9)


def test_third_octave_of_impulse_is_flat():
    ir = np.zeros(1024)
    ir[0] = 1.0
    f, level = fvnlab.third_octave_spectrum(ir, 48000.0)
    assert len(f) == len(level) > 0
    np.testing.assert_allclose(level, 0.0, atol=1e-9)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        fvnlab.code_matrix(0)
    with pytest.raises(ValueError):
        fvnlab.FvnSpec(sigma_t=-1.0).validate()
