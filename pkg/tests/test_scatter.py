import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcmrcs import geometry as geo
from pcmrcs import scatter as sc
from pcmrcs.errors import BandError, SamplingError
from pcmrcs.geometry import TileKind
from pcmrcs.jones import Jones2, ReflectionSpectrum

IDEAL = sc.ideal_converter()
IDEAL_M = IDEAL.mirrored()
CELL = geo.paper_cell()
TH = np.arange(0.0, 89.5, 1.0)
PH = np.arange(0.0, 360.0, 2.0)


def _random_aperture(seed, shape=(12, 20), pitch=1.0, f=37.75):
    rng = np.random.default_rng(seed)
    z = lambda: rng.normal(size=shape) + 1j * rng.normal(size=shape)  # noqa: E731
    return sc.ApertureField(pitch, z(), z(), f, "Y")


def test_paint_paper_layout_cross_signs():
    lay = geo.build_checkerboard(3, 5, 2, CELL)
    ap = sc.paint_aperture(lay, IDEAL, IDEAL_M, 37.75, samples_per_cell=1)
    assert ap.shape == (6, 10) and ap.extent == (24.0, 40.0)
    assert np.all(ap.co == 0)
    assert ap.cross[0, 0] == -1.0 and ap.cross[2, 0] == 1.0
    assert ap.cross.sum() == -4.0  # 8 UNIT tiles of 4 cells minus 7 MIRROR tiles


def test_paint_pec_and_absent_tiles():
    lay = geo.make_layout([[TileKind.PEC, TileKind.ABSENT]], 8.0, 2, CELL)
    ap = sc.paint_aperture(lay, IDEAL, IDEAL_M, 30.0, samples_per_cell=1)
    np.testing.assert_array_equal(ap.co, [[-1, -1, 0, 0], [-1, -1, 0, 0]])
    assert np.all(ap.cross == 0)


def test_paint_default_sampling_meets_quarter_wave():
    lay = geo.build_checkerboard(3, 5, 2, CELL)
    ap = sc.paint_aperture(lay, IDEAL, IDEAL_M, 37.75)
    assert ap.pitch <= sc.wavelength_mm(37.75) / 4


def test_paint_outside_spectrum_band():
    narrow = ReflectionSpectrum([30.0, 40.0], np.zeros((2, 2, 2)))
    with pytest.raises(BandError):
        sc.paint_aperture(geo.build_checkerboard(1, 1, 1, CELL), narrow, narrow, 45.0)


def test_far_field_sampling_error():
    with pytest.raises(SamplingError):
        sc.far_field(_random_aperture(0, pitch=2.5), TH, PH)


def test_pec_plate_formula():
    assert abs(sc.pec_plate_rcs(28.7, 41.6, 30.0) + 7.46) <= 0.01
    assert abs(sc.pec_plate_rcs(28.7, 41.6, 37.75) + 5.47) <= 0.01
    assert sc.pec_plate_rcs(0.0, 41.6, 30.0) == -math.inf
    assert sc.pec_plate_rcs(56, 80, 30) - sc.pec_plate_rcs(28, 40, 30) == pytest.approx(20 * math.log10(4))


def test_plate_aperture_matches_formula():
    plate = geo.make_layout(np.full((3, 5), TileKind.PEC), 8.0, 2, CELL)
    p = sc.far_field(sc.paint_aperture(plate, IDEAL, IDEAL_M, 30.0), [0.0], [0.0])
    assert p.sigma_dbsm[0, 0] == pytest.approx(sc.pec_plate_rcs(24, 40, 30.0), abs=1e-9)


def test_reduction_one_tile_imbalance():
    lay = geo.build_checkerboard(3, 5, 2, CELL)
    c = sc.monostatic_reduction(lay, IDEAL, IDEAL_M, (30.0, 40.0), 5)
    np.testing.assert_allclose(c.delta_db, 20 * math.log10(1 / 15), atol=1e-9)


def test_reduction_balanced_tiling():
    c = sc.monostatic_reduction(geo.build_checkerboard(4, 4, 2, CELL), IDEAL, IDEAL_M, (30.0, 40.0), 3)
    assert np.all(c.delta_db < -60)
    assert np.all(c.sigma_layout_dbsm == sc.DBSM_FLOOR)


def test_reduction_threads_match_serial():
    lay = geo.build_checkerboard(3, 5, 2, CELL)
    a = sc.monostatic_reduction(lay, IDEAL, IDEAL_M, (30.0, 40.0), 7)
    b = sc.monostatic_reduction(lay, IDEAL, IDEAL_M, (30.0, 40.0), 7, threads=3)
    np.testing.assert_array_equal(a.delta_db, b.delta_db)


def test_predict_lobes():
    lobes = sc.predict_lobes(8.0, 37.75)
    assert [p for _, p in lobes] == [45.0, 135.0, 225.0, 315.0]
    assert lobes[0][0] == pytest.approx(44.58, abs=0.01)
    assert sc.predict_lobes(1e6, 37.75)[0][0] < 1e-3
    assert sc.predict_lobes(4.0, 37.75) == []  # lambda > sqrt(2) d


def test_peaks_plate_single_at_zenith():
    plate = geo.make_layout(np.full((3, 5), TileKind.PEC), 8.0, 2, CELL)
    p = sc.far_field(sc.paint_aperture(plate, IDEAL, IDEAL_M, 37.75), TH, PH)
    dom = sc.dominant_peaks(sc.find_peaks(p, 3.0))
    assert len(dom) == 1 and dom[0][0] == 0.0


def test_peaks_monotone_pattern():
    th = np.arange(0, 90, 1.0)
    ph = np.arange(0, 360, 5.0)
    amp = np.sqrt(10 ** (-np.repeat(th[:, None], ph.size, axis=1) / 10))
    lam = sc.wavelength_mm(30.0) * 1e-3
    amp = amp * lam / math.sqrt(4 * math.pi)  # sigma_dBsm = -theta
    p = sc.FarFieldPattern(th, ph, amp.astype(complex), np.zeros_like(amp, dtype=complex), 30.0, "Y")
    np.testing.assert_allclose(p.sigma_dbsm[:, 0], -th, atol=1e-9)
    peaks = sc.find_peaks(p, 0.5)
    assert len(peaks) == 1 and peaks[0][0] == 0.0


def test_peak_order_ties():
    th = np.array([0.0, 1.0, 2.0, 3.0])
    ph = np.arange(0, 360, 90.0)
    s = np.full((4, 4), -50.0)
    s[2, 1] = s[2, 3] = -10.0
    lam = sc.wavelength_mm(30.0) * 1e-3
    amp = np.sqrt(10 ** (s / 10) * lam**2 / (4 * math.pi)).astype(complex)
    p = sc.FarFieldPattern(th, ph, amp, np.zeros_like(amp), 30.0, "Y")
    pk = sc.find_peaks(p, 3.0)
    assert [(t, f) for t, f, _ in pk] == [(2.0, 90.0), (2.0, 270.0)]


def test_small_checkerboard_lobes_pulled_in():
    # 3 x 5 tiles: the tile element factor pulls the lobes inside the grating angle
    lay = geo.build_checkerboard(3, 5, 2, CELL)
    p = sc.far_field(sc.paint_aperture(lay, IDEAL, IDEAL_M, 37.75))
    dom = sc.dominant_peaks(sc.find_peaks(p, 3.0))
    assert len(dom) == 4
    assert all(35.0 < t < 44.6 for t, _, _ in dom)
    assert sorted(round(f / 90 - 0.5) % 4 for _, f, _ in dom) == [0, 1, 2, 3]


def test_fft_path_matches_direct():
    ap = _random_aperture(1)
    u, v, fc, fx = sc.fft_amplitudes(ap, pad=3)
    dc, dx = sc.uv_amplitudes_direct(ap, u, v)
    assert np.max(np.abs(fc - dc)) / np.max(np.abs(dc)) < 1e-9
    assert np.max(np.abs(fx - dx)) / np.max(np.abs(dx)) < 1e-9


def test_separable_path_matches_direct():
    ap = _random_aperture(2)
    p = sc.far_field(ap, TH, PH)
    q = sc.far_field(ap, TH, PH, method="direct")
    assert np.max(np.abs(p.amp_co - q.amp_co)) / np.max(np.abs(q.amp_co)) < 1e-9


def test_broadside_is_plain_sum():
    ap = _random_aperture(3)
    p = sc.far_field(ap, [0.0], [0.0, 90.0])
    a_co, a_x = ap.broadside_amplitude()
    assert a_co == pytest.approx(ap.co.sum() * 1e-6, rel=1e-12)
    np.testing.assert_allclose(p.amp_co[0], a_co, rtol=1e-12)
    np.testing.assert_allclose(p.amp_cross[0], a_x, rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_far_field_linearity(seed, alpha):
    a, b = _random_aperture(seed, (6, 7)), _random_aperture(seed + 1, (6, 7))
    scaled = sc.ApertureField(b.pitch, alpha * b.co, alpha * b.cross, b.freq, b.incident_pol)
    s = sc.far_field(a + scaled, TH[::5], PH[::9])
    pa, pb = sc.far_field(a, TH[::5], PH[::9]), sc.far_field(b, TH[::5], PH[::9])
    ref = pa.amp_co + alpha * pb.amp_co
    assert np.max(np.abs(s.amp_co - ref)) <= 1e-12 * max(np.max(np.abs(ref)), 1e-300) * 10


@settings(max_examples=15, deadline=None)
@given(
    st.integers(1, 5),
    st.integers(1, 5),
    st.tuples(*[st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)] * 3),
)
def test_swap_unit_mirror_leaves_sigma(tx, ty, entries):
    a, b, d = entries
    spec = ReflectionSpectrum([20.0, 60.0], np.array([[[a, b], [b, d]]] * 2))
    lay = geo.build_checkerboard(tx, ty, 1, CELL)
    p = sc.far_field(sc.paint_aperture(lay, spec, spec.mirrored(), 37.75), TH[::6], PH[::10])
    q = sc.far_field(sc.paint_aperture(lay.swapped(), spec, spec.mirrored(), 37.75), TH[::6], PH[::10])
    np.testing.assert_allclose(p.sigma_m2, q.sigma_m2, rtol=1e-9, atol=1e-30)


def test_polarisation_parts_add_in_power():
    ap = _random_aperture(4)
    full = sc.far_field(ap, TH[::3], PH[::3]).sigma_m2
    parts = sc.far_field(ap.only("co"), TH[::3], PH[::3]).sigma_m2 + sc.far_field(ap.only("cross"), TH[::3], PH[::3]).sigma_m2
    np.testing.assert_allclose(full, parts, rtol=1e-12)


def test_dbsm_floor():
    assert sc.to_dbsm(0.0) == sc.DBSM_FLOOR
    assert sc.to_dbsm(1e-12) == sc.DBSM_FLOOR
    assert sc.to_dbsm(1.0) == 0.0


def test_x_incidence_uses_x_column():
    spec = ReflectionSpectrum([20.0, 60.0], np.array([[[0.1, 0.2], [0.3, 0.4]]] * 2, dtype=complex))
    lay = geo.build_checkerboard(1, 1, 1, CELL)
    ap = sc.paint_aperture(lay, spec, spec.mirrored(), 30.0, "X", samples_per_cell=1)
    assert ap.co[0, 0] == 0.1 and ap.cross[0, 0] == 0.3
    j = Jones2(spec.r[0])
    assert ap.cross[0, 0] == j.r_yx
