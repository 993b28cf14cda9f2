"""Rendering and run-view behavior against real run directories."""

import json

import numpy as np
import pytest

from mfgplots import FIGURE_KINDS, RunView, RunViewError, psi_series, render


class TestRunView:
    def test_opens_valid_run(self, schelling_run):
        view = RunView.open(schelling_run)
        assert view.task == "solve"
        assert view.populations() == [0, 1]
        times, m = view.field_matrix("m", 0)
        assert m.shape[1] == 100
        assert np.all(np.diff(times) > 0)

    def test_refuses_unknown_schema_version(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            json.dumps({"schema_version": 99}))
        with pytest.raises(RunViewError, match="schema_version"):
            RunView.open(tmp_path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(RunViewError, match="manifest"):
            RunView.open(tmp_path / "nope")

    def test_malformed_csv_names_the_file(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            json.dumps({"schema_version": 1, "task": "solve", "run": {
                "snapshots": [{"file": "bad.csv", "quantity": "m",
                               "population": 0, "time_index": 0,
                               "time": 0.0}]}}))
        (tmp_path / "bad.csv").write_text("cell_index,x,value\n0,oops,1\n")
        view = RunView.open(tmp_path)
        with pytest.raises(RunViewError, match="bad.csv"):
            view.load_field("bad.csv")


class TestRenderSolveRun:
    def test_all_kinds_render_without_error(self, schelling_run, tmp_path):
        with pytest.warns(UserWarning):
            # psi and multistart inputs are absent on a plain solve run and
            # must be skipped with a warning, not an error
            written = render(schelling_run, list(FIGURE_KINDS), tmp_path)
        names = sorted(p.name for p in written)
        assert names == ["heatmap_m_p0.png", "heatmap_m_p1.png",
                         "residuals.png", "values.png"]
        for p in written:
            assert p.stat().st_size > 0

    def test_deterministic_filenames(self, schelling_run, tmp_path):
        a = render(schelling_run, ["heatmap"], tmp_path / "a")
        b = render(schelling_run, ["heatmap"], tmp_path / "b")
        assert [p.name for p in a] == [p.name for p in b]

    def test_rendering_is_read_only(self, schelling_run, tmp_path):
        before = {p.name: p.read_bytes()
                  for p in schelling_run.iterdir() if p.is_file()}
        render(schelling_run, ["heatmap", "values", "residuals"], tmp_path)
        after = {p.name: p.read_bytes()
                 for p in schelling_run.iterdir() if p.is_file()}
        assert before == after

    def test_unknown_kind_rejected(self, schelling_run, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kinds"):
            render(schelling_run, ["hologram"], tmp_path)


class TestPsiSweep:
    def test_series_starts_at_origin_and_is_monotone(self, sweep_run):
        manifest = json.loads((sweep_run / "manifest.json").read_text())
        horizons, psi = psi_series(manifest)
        assert horizons[0] == 0.0
        assert psi[0] == 0.0
        assert np.all(np.diff(horizons) > 0)
        assert np.all(np.diff(psi) >= 0)

    def test_psi_figure_rendered(self, sweep_run, tmp_path):
        written = render(sweep_run, ["psi", "residuals"], tmp_path)
        assert sorted(p.name for p in written) == ["psi_sweep.png",
                                                   "residuals.png"]


class TestMultistart:
    def test_distance_bars_rendered(self, multistart_run, tmp_path):
        written = render(multistart_run, ["multistart"], tmp_path)
        assert [p.name for p in written] == ["multistart.png"]

    def test_pairwise_data_present(self, multistart_run):
        manifest = json.loads((multistart_run / "manifest.json").read_text())
        pairs = manifest["multistart"]["pairwise_distances"]
        assert len(pairs) == 3  # 3 converged starts -> 3 pairs


class TestCli:
    def test_render_command(self, schelling_run, tmp_path, capsys):
        from mfgplots.cli import main

        code = main(["render", str(schelling_run),
                     "--figs", "heatmap,residuals",
                     "--out", str(tmp_path / "figs")])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 3  # two heatmaps + residuals

    def test_bad_inputs_exit_2(self, tmp_path, capsys):
        from mfgplots.cli import main

        assert main(["render", str(tmp_path), "--out",
                     str(tmp_path / "f")]) == 2
        assert "error:" in capsys.readouterr().err
