"""Loading series from delimited files, NA handling, numeric-aware labels,
equal-width discretization, and the one-column sample format."""

import io

import numpy as np
import pytest

import mtdkit as mk


def buf(text):
    return io.StringIO(text)


class TestColumnSelection:
    def test_default_is_first_column(self):
        s = mk.ingest_series(buf("x\n1\n0\n1\n"))
        assert s.labels() == ["1", "0", "1"]

    def test_column_by_name(self):
        text = "t,v\n0,a\n1,b\n2,a\n"
        s = mk.ingest_series(buf(text), column="v")
        assert s.labels() == ["a", "b", "a"]

    def test_column_by_index(self):
        text = "t,v\n0,a\n1,b\n2,a\n"
        s = mk.ingest_series(buf(text), column=1)
        assert s.labels() == ["a", "b", "a"]

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="no column named 'z'"):
            mk.ingest_series(buf("t,v\n0,a\n1,b\n"), column="z")

    def test_index_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            mk.ingest_series(buf("t,v\n0,a\n1,b\n"), column=5)

    def test_headerless_numeric_column(self):
        s = mk.ingest_series(buf("1\n2\n1\n"))
        assert len(s) == 3

    def test_first_token_recurring_later_is_data(self):
        # "a" cannot be a header if it shows up again as an observation
        s = mk.ingest_series(buf("a\nb\na\n"))
        assert s.labels() == ["a", "b", "a"]

    def test_blank_lines_skipped(self):
        s = mk.ingest_series(buf("x\n1\n\n2\n"))
        assert s.labels() == ["1", "2"]

    def test_empty_file_rejected(self):
        with pytest.raises(ValueError, match="no rows"):
            mk.ingest_series(buf(""))


class TestMissingValues:
    def test_default_policy_errors_with_row_number(self):
        with pytest.raises(ValueError, match="missing value at row 1"):
            mk.ingest_series(buf("x\n1\nna\n2\n"))

    def test_drop_edges_trims_leading_and_trailing(self):
        s = mk.ingest_series(
            buf("x\nna\nNA\n1\n2\n1\nnan\n"), na_policy="drop_edges"
        )
        assert s.labels() == ["1", "2", "1"]

    def test_interior_gap_still_rejected(self):
        with pytest.raises(ValueError, match="interior row 1"):
            mk.ingest_series(buf("x\n1\nna\n2\n"), na_policy="drop_edges")

    def test_all_missing_rejected(self):
        with pytest.raises(ValueError, match="no observations left"):
            mk.ingest_series(buf("x\nna\nna\n"), na_policy="drop_edges")

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError, match="na_policy"):
            mk.ingest_series(buf("x\n1\n2\n"), na_policy="interpolate")


class TestAlphabetInference:
    def test_numeric_labels_sort_numerically(self):
        s = mk.ingest_series(buf("x\n10\n9\n9\n10\n2\n"))
        assert s.alphabet.symbols == ("2", "9", "10")
        assert s.labels() == ["10", "9", "9", "10", "2"]

    def test_integral_floats_lose_the_decimal_point(self):
        s = mk.ingest_series(buf("x\n2.0\n1\n2.0\n"))
        assert s.alphabet.symbols == ("1", "2")
        assert s.labels() == ["2", "1", "2"]

    def test_text_labels_sort_lexicographically(self):
        s = mk.ingest_series(buf("x\nb\na\nc\na\n"))
        assert s.alphabet.symbols == ("a", "b", "c")

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="single value"):
            mk.ingest_series(buf("x\n5\n5\n5\n"))

    def test_reverse_restores_chronological_order(self):
        s = mk.ingest_series(buf("x\n3\n2\n1\n"), reverse=True)
        assert s.labels() == ["1", "2", "3"]


class TestReadNumericSeries:
    def test_reads_floats(self):
        got = mk.read_numeric_series(buf("x\n1.5\n2.5\n-3\n"))
        np.testing.assert_array_equal(got, [1.5, 2.5, -3.0])

    def test_non_numeric_token_rejected(self):
        with pytest.raises(ValueError, match="non-numeric value 'foo'"):
            mk.read_numeric_series(buf("x\n1\nfoo\n2\n"))

    def test_shares_na_handling(self):
        got = mk.read_numeric_series(
            buf("x\nna\n1\n2\n"), na_policy="drop_edges"
        )
        np.testing.assert_array_equal(got, [1.0, 2.0])


class TestDiscretize:
    def test_equal_width_boundary_value(self):
        lo, hi = 12.046, 29.8
        boundary = lo + (hi - lo) / 2
        assert boundary == pytest.approx(20.923, abs=1e-12)
        s = mk.discretize(np.array([lo, hi, boundary, np.nextafter(boundary, lo)]), 2)
        assert s.labels() == ["1", "2", "2", "1"]

    def test_four_bins_on_unit_steps(self):
        # range [0, 4], k = 4: boundaries sit exactly at 1, 2 and 3
        s = mk.discretize(np.array([0.0, 0.999, 1.0, 2.5, 3.0, 4.0]), 4)
        assert s.labels() == ["1", "1", "2", "3", "4", "4"]

    def test_alphabet_keeps_empty_bins(self):
        s = mk.discretize(np.array([0.0, 4.0]), 4)
        assert s.alphabet.symbols == ("1", "2", "3", "4")
        assert s.labels() == ["1", "4"]

    def test_maximum_lands_in_top_bin(self):
        s = mk.discretize(np.array([0.0, 1.0, 2.0]), 3)
        assert s.labels()[-1] == "3"

    def test_guards(self):
        with pytest.raises(ValueError, match="at least 2 bins"):
            mk.discretize(np.array([0.0, 1.0]), 1)
        with pytest.raises(ValueError, match="constant"):
            mk.discretize(np.array([2.0, 2.0, 2.0]), 2)
        with pytest.raises(ValueError, match="non-empty"):
            mk.discretize(np.array([]), 2)
        with pytest.raises(ValueError, match="finite"):
            mk.discretize(np.array([0.0, np.inf]), 2)


class TestSampleCsv:
    def test_text_format(self):
        s = mk.Sample.from_labels(["b", "a", "b"])
        assert mk.sample_csv_text(s) == "x\r\nb\r\na\r\nb\r\n"

    def test_file_round_trip(self, tmp_path):
        src = mk.discretize(np.linspace(0.0, 1.0, 40), 3)
        path = tmp_path / "series.csv"
        mk.write_sample_csv(src, path)
        back = mk.ingest_series(path)
        assert back.labels() == src.labels()
        assert back.alphabet.symbols == src.alphabet.symbols

    def test_buffer_round_trip(self):
        src = mk.Sample.from_labels(["1", "0", "1", "1", "0"])
        text = mk.sample_csv_text(src)
        back = mk.ingest_series(buf(text))
        assert back.labels() == src.labels()
