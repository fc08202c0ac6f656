import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from calitho.core import DOMAIN_QUANTIZED, AngleGrid, Sinogram, quantize
from calitho.io import FormatError, read_cals, write_cals, write_sinogram_csv


@given(arrays(np.float64, (4, 6), elements=st.floats(-1e3, 1e3, width=32)),
       st.sampled_from([180.0, 360.0]), st.floats(0, 90, width=32))
def test_cals_roundtrip(tmp_path_factory, data, rng, start):
    p = tmp_path_factory.mktemp("cals") / "s.cals"
    s = Sinogram(data, AngleGrid(4, rng, start))
    write_cals(p, s)
    back = read_cals(p)
    assert back.grid == s.grid
    assert np.array_equal(back.data, s.data)


def test_cals_quantized_domain(tmp_path):
    s = Sinogram(quantize(np.random.default_rng(0).random((3, 5)) * 300), AngleGrid(3), DOMAIN_QUANTIZED)
    write_cals(tmp_path / "q.cals", s)
    assert read_cals(tmp_path / "q.cals").domain == DOMAIN_QUANTIZED


@pytest.mark.parametrize("mangle", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:-4],
    lambda b: b[:10],
    lambda b: b[:20] + b"\x07" + b[21:],
])
def test_cals_rejects_malformed(tmp_path, mangle):
    p = tmp_path / "s.cals"
    write_cals(p, Sinogram(np.ones((2, 3)), AngleGrid(2)))
    p.write_bytes(mangle(p.read_bytes()))
    with pytest.raises(FormatError):
        read_cals(p)


def test_sinogram_csv(tmp_path):
    s = Sinogram(np.arange(6.0).reshape(2, 3), AngleGrid(2))
    write_sinogram_csv(tmp_path / "s.csv", s)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "angle_deg,x0,x1,x2"
    assert lines[2] == "90,3,4,5"
