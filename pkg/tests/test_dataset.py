"""Tests for the column-major dataset container and CSV round trips."""

import numpy as np
import pytest

from semibn.dataset import ContinuousData, read_csv, write_csv
from semibn.errors import DataFormatError


class TestContinuousData:
    def test_basic_accessors(self):
        values = np.arange(6.0).reshape(3, 2)
        data = ContinuousData(("x", "y"), values)
        assert data.n_rows == 3
        assert data.n_vars == 2
        np.testing.assert_array_equal(data.column("y"), [1.0, 3.0, 5.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(DataFormatError):
            ContinuousData(("x",), np.array([[1.0], [np.nan]]))
        with pytest.raises(DataFormatError):
            ContinuousData(("x",), np.array([[np.inf]]))

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataFormatError):
            ContinuousData(("x", "x"), np.zeros((2, 2)))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DataFormatError):
            ContinuousData(("x", "y"), np.zeros((4, 3)))

    def test_take_rows_and_reorder(self):
        rng = np.random.default_rng(0)
        data = ContinuousData(("a", "b", "c"), rng.normal(size=(5, 3)))
        sub = data.take_rows(np.array([4, 0, 2]))
        np.testing.assert_array_equal(sub.values, data.values[[4, 0, 2]])
        swapped = data.reorder((2, 0, 1))
        assert swapped.names == ("c", "a", "b")
        np.testing.assert_array_equal(swapped.values, data.values[:, [2, 0, 1]])


class TestCsvRoundTrip:
    def test_write_read_is_bit_exact(self, tmp_path):
        """Full repr precision means the float bits survive the trip."""
        rng = np.random.default_rng(7)
        data = ContinuousData(("u", "v"), rng.normal(size=(20, 2)) * 1e-7)
        path = tmp_path / "round.csv"
        write_csv(data, path)
        back = read_csv(path)
        assert back.names == data.names
        np.testing.assert_array_equal(back.values, data.values)

    def test_bad_cell_is_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(DataFormatError, match="row 2.*column 'y'"):
            read_csv(path)

    def test_empty_body_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("x,y\n")
        with pytest.raises(DataFormatError):
            read_csv(path)
