import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from aptile.cutproject import cp_points_octa, phys_array
from aptile.diffraction import (
    DEFAULT_THRESHOLD, OCTAGON_AREA, PeakList2D, dual_basis, intensity_1d, numeric_intensity,
    octagon_ft, peak_1d, peaks_1d, peaks_2d, peaks_to_csv,
)
from aptile.substitution import fixed_point_1d

H = (1 + math.sqrt(2)) / 2


def quadrature_ft(k):
    # The octagon is centrally symmetric, so its transform is the real cosine
    # integral over |x| <= h, |y| <= min(h, sqrt2 h - |x|).
    val, _ = dblquad(
        lambda y, x: math.cos(2 * math.pi * (k[0] * x + k[1] * y)),
        -H, H,
        lambda x: -min(H, math.sqrt(2) * H - abs(x)),
        lambda x: min(H, math.sqrt(2) * H - abs(x)),
        epsabs=1e-11, epsrel=1e-11,
    )
    return val


def test_transform_at_zero_is_the_area():
    assert octagon_ft([0.0, 0.0]) == pytest.approx(OCTAGON_AREA, abs=1e-12)
    assert OCTAGON_AREA == pytest.approx(2 * (1 + math.sqrt(2)))


@pytest.mark.parametrize("k", [(0.3, 0.0), (0.1, 0.7), (-1.3, 0.4), (2.0, 2.0), (1e-7, 3e-7)])
def test_transform_matches_quadrature(k):
    got = octagon_ft(k)
    assert abs(got.imag) < 1e-9
    assert got.real == pytest.approx(quadrature_ft(k), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_transform_has_the_eightfold_symmetry(kx, ky):
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    a = octagon_ft([kx, ky])
    b = octagon_ft([c * kx - s * ky, s * kx + c * ky])
    assert abs(a - b) < 1e-9


def test_transform_vectorises():
    ks = np.array([[0.0, 0.0], [0.3, 0.0], [0.1, 0.7]])
    vec = octagon_ft(ks)
    assert np.allclose(vec, [octagon_ft(k) for k in ks])


def test_dual_basis_is_dual():
    B = dual_basis()
    E = np.array([[math.cos(k * math.pi / 4), math.sin(k * math.pi / 4),
                   math.cos(3 * k * math.pi / 4), math.sin(3 * k * math.pi / 4)] for k in range(4)])
    assert np.allclose(B @ E.T, np.eye(4))


# ---------------------------------------------------------------------------
# one dimension
# ---------------------------------------------------------------------------


def test_1d_central_peak_and_extinctions():
    assert peak_1d(0, 0).intensity == 1.0
    for n in (2, -2):
        assert peak_1d(0, n).intensity < 1e-20


def test_1d_list_is_complete():
    kmax, thr = 3.0, 1e-3
    brute = set()
    for m in range(-60, 61):
        for n in range(-80, 81):
            p = peak_1d(m, n)
            if abs(p.k_phys) <= kmax and p.intensity >= thr:
                brute.add((m, n))
    assert {(p.m, p.n) for p in peaks_1d(kmax, thr)} == brute


def test_1d_list_is_sorted_and_thresholded():
    ps = peaks_1d(4.0)
    assert all(p.intensity >= DEFAULT_THRESHOLD for p in ps)
    assert [p.intensity for p in ps] == sorted((p.intensity for p in ps), reverse=True)
    assert intensity_1d(0.25) == pytest.approx(np.sinc(math.sqrt(2) * 0.25) ** 2)


def test_1d_numeric_matches_analytic():
    x = np.array([float(t.left) for t in fixed_point_1d(9)])
    for p in peaks_1d(4.0)[:10]:
        assert numeric_intensity(x, p.k_phys) == pytest.approx(p.intensity, rel=0.02)
    for n in (2, -2):
        assert numeric_intensity(x, peak_1d(0, n).k_phys) < 1e-3


def test_argument_checks():
    with pytest.raises(ValueError):
        peaks_1d(0.0)
    with pytest.raises(ValueError):
        peaks_2d(1.0, threshold=0.0)
    with pytest.raises(ValueError):
        numeric_intensity(np.zeros((0, 2)), [0.0, 0.0])


def test_numeric_intensity_of_a_lattice():
    x = np.arange(100.0)
    assert numeric_intensity(x, 1.0) == pytest.approx(1.0)
    assert numeric_intensity(x, 0.5) == pytest.approx(0.0, abs=1e-20)


# ---------------------------------------------------------------------------
# two dimensions
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def peaks4():
    return peaks_2d(4.0)


def test_2d_list_is_rotation_closed(peaks4):
    ms = {p.m for p in peaks4.peaks}
    assert {(-m[3], m[0], m[1], m[2]) for m in ms} == ms
    assert not peaks4.bound_limited
    top = peaks4.peaks[0]
    assert top.m == (0, 0, 0, 0) and top.intensity == pytest.approx(1.0)


def test_2d_intensities_match_the_transform(peaks4):
    for p in peaks4.peaks[:30]:
        assert p.intensity == pytest.approx(abs(octagon_ft(p.k_int)) ** 2 / OCTAGON_AREA**2)
        assert math.hypot(*p.k_phys) <= 4.0 + 1e-9


def test_2d_numeric_matches_analytic(peaks4):
    pts = phys_array(cp_points_octa(30.0).as_array())
    for p in peaks4.peaks[:20]:
        assert numeric_intensity(pts, p.k_phys) == pytest.approx(p.intensity, rel=0.10)


def test_scan_bound_flag():
    small = peaks_2d(4.0, scan_bound=2)
    assert small.bound_limited


def test_csv_headers(peaks4):
    rows = list(csv.reader(io.StringIO(peaks_to_csv(peaks4))))
    assert rows[0] == ["m1", "m2", "m3", "m4", "kx", "ky", "intensity", "singular_flag"]
    assert len(rows) == len(peaks4.peaks) + 1
    rows = list(csv.reader(io.StringIO(peaks_to_csv(peaks_1d(2.0)))))
    assert rows[0] == ["m", "n", "kx", "ky", "intensity", "singular_flag"]
    assert rows[1][:2] == ["0", "0"]
    empty = peaks_to_csv(PeakList2D([], 12, False))
    assert empty.splitlines() == ["m1,m2,m3,m4,kx,ky,intensity,singular_flag"]
