import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import CALM, HIGHVOL, RegimeSeries


def _series():
    return RegimeSeries(
        months=("2001-01", "2001-02", "2001-03"),
        highvol=np.array([False, True, False]),
        detector="vlstar",
        transition=np.array([np.nan, 0.4, -1.2]),
    )


def test_labels_and_share():
    s = _series()
    assert_array_equal(s.labels, [CALM, HIGHVOL, CALM])
    assert_allclose(s.highvol_share(), 1.0 / 3.0, rtol=1e-15)
    assert len(s) == 3


def test_validation():
    with pytest.raises(ValueError):
        RegimeSeries(months=("a", "b"), highvol=np.array([True]), detector="x")
    with pytest.raises(ValueError):
        RegimeSeries(months=("a", "a"), highvol=np.array([True, False]), detector="x")
    with pytest.raises(ValueError):
        RegimeSeries(
            months=("a", "b"),
            highvol=np.array([True, False]),
            detector="x",
            transition=np.array([1.0]),
        )


def test_default_transition_is_nan():
    s = RegimeSeries(months=("a",), highvol=np.array([True]), detector="x")
    assert np.isnan(s.transition).all()


def test_csv_roundtrip(tmp_path):
    s = _series()
    path = tmp_path / "regimes.csv"
    s.to_csv(path)
    back = RegimeSeries.from_csv(path, detector="vlstar")
    assert back.months == s.months
    assert_array_equal(back.highvol, s.highvol)
    assert back.detector == "vlstar"
    assert np.isnan(back.transition[0])
    assert_allclose(back.transition[1:], s.transition[1:], rtol=1e-15)


def test_from_csv_rejects_unknown_label(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("month,regime\n2001-01,Stormy\n")
    with pytest.raises(ValueError, match="Stormy"):
        RegimeSeries.from_csv(path)


def test_from_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("month\n2001-01\n")
    with pytest.raises(ValueError, match="regime"):
        RegimeSeries.from_csv(path)
