import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from calitho.core import (
    DOMAIN_QUANTIZED,
    AngleGrid,
    CalibrationCurve,
    Sinogram,
    angular_spacing,
    binarize,
    check_square,
    cos_sin_deg,
    load_image,
    pad_to_square,
    quantize,
    recommended_angle_count,
    save_image,
)


@pytest.mark.parametrize("n, expected", [(500, 785), (2, 3), (1000, 1571)])
def test_recommended_angle_count(n, expected):
    assert recommended_angle_count(n) == expected
    # independent: nearest integer to pi*n/2
    assert abs(expected - math.pi * n / 2) <= 0.5


def test_recommended_angle_count_rejects_zero():
    with pytest.raises(ValueError):
        recommended_angle_count(0)


@given(st.integers(1, 5000))
def test_recommended_angle_count_monotone(n):
    assert recommended_angle_count(n + 1) >= recommended_angle_count(n)


@pytest.mark.parametrize("rng, count, spacing", [(180, 500, 0.36), (360, 360, 1.0)])
def test_angular_spacing_exact(rng, count, spacing):
    assert angular_spacing(AngleGrid(count, rng)) == pytest.approx(spacing, rel=1e-15)


def test_angular_spacing_785():
    assert angular_spacing(AngleGrid(785, 180)) == pytest.approx(0.2293, abs=5e-5)


def test_angle_grid_end_exclusive():
    g = AngleGrid(500, 360)
    assert len(g.angles) == 500
    assert g.angles[0] == 0.0 and g.angles[-1] < 360.0
    assert g.angles[1] == pytest.approx(0.72)


@given(st.integers(1, 2000), st.sampled_from([180.0, 360.0]), st.floats(-360, 360))
def test_angle_grid_spacing_times_count(count, rng, start):
    g = AngleGrid(count, rng, start)
    assert g.spacing * g.count == pytest.approx(g.range, rel=1e-14)
    assert np.allclose(np.diff(g.angles), g.spacing, rtol=0, atol=1e-9)


@pytest.mark.parametrize("bad", [dict(count=0), dict(count=-3), dict(count=2.5), dict(count=4, range=0)])
def test_angle_grid_rejects(bad):
    with pytest.raises(ValueError):
        AngleGrid(**bad)


def test_cos_sin_exact_at_quadrants():
    c, s = cos_sin_deg(np.array([0.0, 90.0, 180.0, 270.0, 360.0]))
    assert c.tolist() == [1.0, 0.0, -1.0, 0.0, 1.0]
    assert s.tolist() == [0.0, 1.0, 0.0, -1.0, 0.0]


def test_sinogram_validation():
    g = AngleGrid(3)
    with pytest.raises(ValueError):
        Sinogram(np.zeros((2, 4)), g)
    with pytest.raises(ValueError):
        Sinogram(np.full((3, 4), 0.5), g, DOMAIN_QUANTIZED)
    with pytest.raises(ValueError):
        Sinogram(np.full((3, 4), 256.0), g, DOMAIN_QUANTIZED)
    with pytest.raises(ValueError):
        Sinogram(np.zeros((3, 4)), g, "bogus")
    s = Sinogram(np.zeros((3, 4)), g)
    assert s.n_x == 4 and s.count == 3
    with pytest.raises(ValueError):
        s.data[0, 0] = 1.0  # immutable


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20))
def test_quantize_is_euclidean_projection(values):
    v = np.array(values)
    q = quantize(v)
    levels = np.arange(256.0)
    for x, qx in zip(v, q):
        # brute force over every feasible level
        assert abs(qx - x) <= np.min(np.abs(levels - x)) + 1e-12


def test_quantize_idempotent():
    v = np.array([0.0, 3.0, 255.0, 17.0])
    assert np.array_equal(quantize(quantize(v)), quantize(v))


def test_calibration_linear_default():
    cal = CalibrationCurve.linear(2.0)
    assert cal(0) == 0.0
    assert cal(255) == pytest.approx(2.0)
    assert cal(127.5) == pytest.approx(1.0)
    assert cal.i_max == pytest.approx(2.0)


@pytest.mark.parametrize("values, intens", [
    ((0, 100, 50), (0, 1, 2)),
    ((0, 100), (0, -1)),
    ((0, 100, 255), (0, 2, 1)),
    ((1, 255), (0, 1)),
    ((0, 255), (0.5, 1)),
])
def test_calibration_rejects(values, intens):
    with pytest.raises(ValueError):
        CalibrationCurve(values, intens)


@given(st.lists(st.floats(0, 10), min_size=2, max_size=6), st.floats(0, 255), st.floats(0, 255))
def test_calibration_monotone(incs, v1, v2):
    values = np.linspace(0, 255, len(incs) + 1)
    intens = np.concatenate([[0.0], np.cumsum(incs)])
    cal = CalibrationCurve(tuple(values), tuple(intens))
    lo, hi = sorted((v1, v2))
    assert cal(lo) <= cal(hi) + 1e-12


def test_calibration_csv_roundtrip(tmp_path):
    cal = CalibrationCurve((0, 64, 128, 255), (0, 0.1, 0.5, 2.0))
    p = tmp_path / "cal.csv"
    cal.to_csv(p)
    assert p.read_text().splitlines()[0] == "dlp_value,intensity_w_cm2"
    assert CalibrationCurve.from_csv(p) == cal


def test_calibration_csv_bad_header(tmp_path):
    p = tmp_path / "cal.csv"
    p.write_text("value,power\n0,0\n255,1\n")
    with pytest.raises(ValueError):
        CalibrationCurve.from_csv(p)


def test_binarize_examples():
    assert not binarize(np.zeros((4, 4)), 0.5).any()
    assert binarize(np.ones((4, 4)), 0.5).all()
    checker = np.where((np.add.outer(np.arange(4), np.arange(4)) % 2) == 0, 0.2, 0.8)
    assert np.array_equal(binarize(checker, 0.5), (checker > 0.5).astype(float))


def test_pad_to_square_and_check():
    a = np.ones((3, 5))
    sq = pad_to_square(a)
    assert sq.shape == (5, 5) and sq.sum() == 15
    with pytest.raises(ValueError):
        check_square(a)
    with pytest.raises(ValueError):
        check_square(np.full((2, 2), np.nan))


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_image_roundtrip(tmp_path, suffix):
    img = np.zeros((6, 6))
    img[1:4, 2:5] = 1.0
    p = tmp_path / f"t{suffix}"
    save_image(p, img)
    assert np.array_equal(load_image(p), img)
    if suffix == ".pgm":
        assert p.read_bytes()[:2] == b"P5"


def test_load_image_pads_non_square(tmp_path):
    p = tmp_path / "wide.png"
    save_image(p, np.ones((2, 4)))
    assert load_image(p).shape == (4, 4)
