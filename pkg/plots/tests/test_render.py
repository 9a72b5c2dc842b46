import pytest

from qfl_plots.cli import main
from qfl_plots.metrics_io import MetricsSchemaError, read_metrics, run_label
from qfl_plots.render import FigureRequest, render

from conftest import HEADER, metrics_text


class TestReadMetrics:
    def test_parses_clients_and_global(self, metrics_file):
        run = read_metrics(metrics_file)
        assert set(run.clients) == {"client_0", "client_1", "client_2"}
        assert len(run.global_series.epochs) == 5
        assert run.label == "simple"
        assert len(run.clients["client_0"].train_loss) == 5

    def test_label_falls_back_to_directory(self, tmp_path):
        d = tmp_path / "weighted"
        d.mkdir()
        path = d / "metrics.csv"
        path.write_text(metrics_text(epochs=1), encoding="utf-8")
        assert run_label(path) == "weighted"
        assert read_metrics(path).label == "weighted"

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("epoch,entity,train_loss,test_acc\n1,global,,0.5\n",
                        encoding="utf-8")
        with pytest.raises(MetricsSchemaError, match="train_acc"):
            read_metrics(path)

    def test_unexpected_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + ",bonus\n1,global,,,0.5,1\n", encoding="utf-8")
        with pytest.raises(MetricsSchemaError, match="bonus"):
            read_metrics(path)

    def test_bad_value_names_column_and_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "\n1,client_0,oops,0.5,0.5\n",
                        encoding="utf-8")
        with pytest.raises(MetricsSchemaError, match="train_loss"):
            read_metrics(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(MetricsSchemaError):
            read_metrics(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text(HEADER + "\n", encoding="utf-8")
        with pytest.raises(MetricsSchemaError):
            read_metrics(path)


class TestRender:
    def test_one_file_two_figures(self, metrics_file, tmp_path):
        out = tmp_path / "figs"
        written = render(FigureRequest([str(metrics_file)], str(out)))
        assert [p.name for p in written] == ["simple_accuracy.png",
                                             "simple_trainloss.png"]
        for path in written:
            assert path.stat().st_size > 0

    def test_three_files_six_figures(self, three_scheme_files, tmp_path):
        out = tmp_path / "figs"
        written = render(FigureRequest([str(p) for p in three_scheme_files],
                                       str(out)))
        assert len(written) == 6
        names = {p.name for p in written}
        for scheme in ("simple", "weighted", "best_pick"):
            assert f"{scheme}_accuracy.png" in names
            assert f"{scheme}_trainloss.png" in names

    def test_svg_format(self, metrics_file, tmp_path):
        written = render(FigureRequest([str(metrics_file)],
                                       str(tmp_path / "figs"), "svg"))
        assert all(p.suffix == ".svg" for p in written)
        assert all(p.stat().st_size > 0 for p in written)

    def test_single_epoch_renders(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text(metrics_text(epochs=1), encoding="utf-8")
        written = render(FigureRequest([str(path)], str(tmp_path / "figs")))
        assert len(written) == 2
        assert all(p.stat().st_size > 0 for p in written)

    def test_inputs_unchanged(self, metrics_file, tmp_path):
        before = metrics_file.read_bytes()
        render(FigureRequest([str(metrics_file)], str(tmp_path / "figs")))
        assert metrics_file.read_bytes() == before

    def test_same_inputs_same_filenames(self, metrics_file, tmp_path):
        request = FigureRequest([str(metrics_file)], str(tmp_path / "figs"))
        assert [p.name for p in render(request)] == \
            [p.name for p in render(request)]

    def test_request_validation(self, tmp_path):
        with pytest.raises(ValueError):
            FigureRequest([], str(tmp_path))
        with pytest.raises(ValueError):
            FigureRequest(["x.csv"], str(tmp_path), "pdf")


class TestCli:
    def test_success_exit_zero(self, three_scheme_files, tmp_path, capsys):
        code = main(["--metrics", *[str(p) for p in three_scheme_files],
                     "--out", str(tmp_path / "figs"), "--format", "png"])
        assert code == 0
        assert len(capsys.readouterr().out.strip().split("\n")) == 6

    def test_schema_violation_exit_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("epoch,entity,score\n1,global,0.5\n", encoding="utf-8")
        code = main(["--metrics", str(bad), "--out", str(tmp_path / "figs")])
        assert code == 1
        assert "score" in capsys.readouterr().err

    def test_missing_file_exit_nonzero(self, tmp_path):
        code = main(["--metrics", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "figs")])
        assert code == 1
