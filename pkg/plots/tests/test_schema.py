"""CSV parsing and schema rejection."""

import numpy as np
import pytest

from isacplots.schema import SchemaError, read_table

GOOD_FIG3 = (
    "# kind = sumrate-vs-snr\n"
    "# seed = 0\n"
    "snr_db,variant,mean_sum_rate,stderr\n"
    "0,with_ris,5.5,0.2\n"
    "0,without_ris,3.1,0.1\n"
    "10,with_ris,9.9,0.3\n"
    "10,without_ris,5.0,0.2\n"
)


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_reads_meta_and_columns(tmp_path):
    table = read_table(write(tmp_path, GOOD_FIG3), "fig3")
    assert table.meta["kind"] == "sumrate-vs-snr"
    assert table.meta["seed"] == "0"
    np.testing.assert_array_equal(table["snr_db"], [0, 0, 10, 10])
    assert table["variant"] == ["with_ris", "without_ris"] * 2
    assert table["mean_sum_rate"].dtype == float


def test_header_mismatch_names_both_column_sets(tmp_path):
    path = write(tmp_path, GOOD_FIG3)
    with pytest.raises(SchemaError) as exc:
        read_table(path, "fig2")
    msg = str(exc.value)
    assert "eta" in msg and "snr_db" in msg and "expects columns" in msg


def test_missing_file_rejected(tmp_path):
    with pytest.raises(SchemaError, match="cannot read"):
        read_table(tmp_path / "absent.csv", "fig3")


def test_empty_file_rejected(tmp_path):
    with pytest.raises(SchemaError, match="no header row"):
        read_table(write(tmp_path, ""), "fig3")


def test_comments_only_rejected(tmp_path):
    with pytest.raises(SchemaError, match="no header row"):
        read_table(write(tmp_path, "# kind = x\n# seed = 0\n"), "fig3")


def test_header_without_rows_rejected(tmp_path):
    text = "snr_db,variant,mean_sum_rate,stderr\n"
    with pytest.raises(SchemaError, match="no data rows"):
        read_table(write(tmp_path, text), "fig3")


def test_short_row_rejected(tmp_path):
    text = GOOD_FIG3 + "20,with_ris,12.0\n"
    with pytest.raises(SchemaError, match="expected 4 fields"):
        read_table(write(tmp_path, text), "fig3")


def test_non_numeric_value_names_column(tmp_path):
    text = GOOD_FIG3.replace("9.9", "lots")
    with pytest.raises(SchemaError, match="'mean_sum_rate' is not numeric"):
        read_table(write(tmp_path, text), "fig3")


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError, match="unknown figure kind"):
        read_table(write(tmp_path, GOOD_FIG3), "fig9")
