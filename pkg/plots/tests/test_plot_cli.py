"""Exit codes and messages of the plot_fig command."""

from isacplots.cli import main

from test_figures import fig3_csv


def test_success(tmp_path, capsys):
    csv_path = fig3_csv(tmp_path)
    out = tmp_path / "fig3.png"
    assert main(["--kind", "fig3", "--in", str(csv_path),
                 "--out", str(out)]) == 0
    assert out.exists()
    stdout = capsys.readouterr().out
    assert "2 traces" in stdout


def test_schema_mismatch_exits_nonzero_with_diagnostic(tmp_path, capsys):
    csv_path = fig3_csv(tmp_path)
    out = tmp_path / "fig2.png"
    assert main(["--kind", "fig2", "--in", str(csv_path),
                 "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "expects columns" in err and "eta" in err
    assert not out.exists()


def test_empty_body_exits_nonzero_without_output(tmp_path, capsys):
    csv_path = tmp_path / "empty.csv"
    csv_path.write_text("snr_db,variant,mean_sum_rate,stderr\n")
    out = tmp_path / "fig3.png"
    assert main(["--kind", "fig3", "--in", str(csv_path),
                 "--out", str(out)]) == 2
    assert "no data rows" in capsys.readouterr().err
    assert not out.exists()


def test_missing_input_exits_nonzero(tmp_path, capsys):
    assert main(["--kind", "fig3", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o.png")]) == 2
    assert "cannot read" in capsys.readouterr().err
