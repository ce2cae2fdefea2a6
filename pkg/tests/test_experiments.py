import csv
from pathlib import Path

import pytest

from tracksim.backends import FaultyBackend, MockBackend
from tracksim.cli import main
from tracksim.experiments import ablation, sweep_scenario, sweep_success
from tracksim.report import write_ablation_report, write_run_plot, write_sweep_report
from tracksim.runner import load_human_script
from tracksim.scenario import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class TestSweep:
    def test_mock_backend_is_always_accepted(self):
        cells = sweep_success([2, 5, 8], [2, 5, 8], lambda: MockBackend(), queries_per_cell=20)
        assert len(cells) == 9
        assert all(c.task_rate == 1.0 and c.action_rate == 1.0 for c in cells)

    def test_capacity_rule_floor_half(self):
        cells = sweep_success([2], range(2, 9), lambda: MockBackend(), queries_per_cell=1)
        caps = {c.targets: c.capacity for c in cells}
        assert caps == {2: 1, 3: 1, 4: 2, 5: 2, 6: 3, 7: 3, 8: 4}

    def test_faulty_backend_rate_lands_in_band(self):
        cells = sweep_success(
            [3], [4], lambda: FaultyBackend(0.3, seed=5), queries_per_cell=500
        )
        (cell,) = cells
        assert 0.65 <= cell.task_rate <= 0.75
        assert 0.65 <= cell.action_rate <= 0.75

    def test_range_validation(self):
        with pytest.raises(ValueError):
            sweep_success([1], [4], lambda: MockBackend())

    def test_sweep_scenario_zone_mix(self):
        s = sweep_scenario(4, 6)
        kinds = [z.kind for z in s.zones]
        assert kinds.count("sensing") == 5
        assert kinds.count("communication") == 2
        assert len(s.robots) == 4 and len(s.targets) == 6
        assert all(r.capacity == 3 for r in s.robots)


@pytest.fixture(scope="module")
def result():
    scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
    script = load_human_script(SCENARIO_DIR / "ablation_human.txt")
    return ablation(
        scenario,
        seeds=list(range(10)),
        backend_factory=lambda: MockBackend(),
        steps=60,
        human_script=script,
    )


class TestAblation:
    def test_requires_ten_seeds(self):
        scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
        with pytest.raises(ValueError):
            ablation(scenario, seeds=[0, 1], backend_factory=lambda: MockBackend())

    def test_table_has_all_columns(self, result):
        table = result.table()
        for label in ("accum. trace", "sensing", "comm", "traj."):
            assert label in table
        assert "no_llm" in table and "llm_human" in table

    def test_means_cover_all_modes(self, result):
        assert set(result.means) == {"no_llm", "llm", "llm_human"}
        for row in result.means.values():
            assert row["accumulated_trace"] > 0

    def test_report_files_written(self, result, tmp_path):
        paths = write_ablation_report(result, tmp_path)
        assert paths["csv"].exists() and paths["png"].exists()
        with paths["csv"].open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["mode", "seed", "accumulated_trace", "sensing_attacks",
                           "comm_attacks", "trajectory_length"]
        # 3 modes x 10 seeds + 3 mean rows + header
        assert len(rows) == 1 + 30 + 3


class TestReports:
    def test_sweep_report_files(self, tmp_path):
        cells = sweep_success([2, 3], [2, 3], lambda: MockBackend(), queries_per_cell=5)
        paths = write_sweep_report(cells, tmp_path)
        assert paths["csv"].exists() and paths["png"].exists()
        with paths["csv"].open() as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 4

    def test_run_plot(self, tmp_path):
        from tracksim.runner import run_scenario

        scenario = load_scenario(SCENARIO_DIR / "demo.yaml")
        log = tmp_path / "demo.jsonl"
        run_scenario(scenario, "llm", steps=15, backend=MockBackend(), log_path=log)
        out = write_run_plot(log, tmp_path / "demo.png", scenario)
        assert out.exists() and out.stat().st_size > 0


class TestCli:
    def test_run_subcommand(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--scenario", str(SCENARIO_DIR / "demo.yaml"),
                "--mode", "llm",
                "--steps", "10",
                "--seed", "3",
                "--backend", "mock",
                "--log", str(tmp_path / "out.jsonl"),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert '"accumulated_trace"' in out
        assert (tmp_path / "out.jsonl").exists()

    def test_run_with_plot(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--scenario", str(SCENARIO_DIR / "demo.yaml"),
                "--steps", "8",
                "--log", str(tmp_path / "out.jsonl"),
                "--plot", str(tmp_path / "out.png"),
            ]
        )
        assert code == 0
        assert (tmp_path / "out.png").exists()

    def test_sweep_subcommand(self, tmp_path, capsys):
        code = main(
            [
                "sweep",
                "--backend", "mock",
                "--queries", "3",
                "--robots", "2,3",
                "--targets", "2",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "sweep.csv").exists()
        assert (tmp_path / "sweep.png").exists()
        assert "task=1.000" in capsys.readouterr().out

    def test_scenario_error_is_reported(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("dt: 0.1\n")
        code = main(["run", "--scenario", str(bad), "--steps", "1"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_human_mode_via_cli(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--scenario", str(SCENARIO_DIR / "ablation.yaml"),
                "--mode", "llm_human",
                "--human-script", str(SCENARIO_DIR / "ablation_human.txt"),
                "--steps", "25",
                "--seed", "0",
                "--log", str(tmp_path / "h.jsonl"),
            ]
        )
        assert code == 0
        assert "Focus more on tracking targets" in (tmp_path / "h.jsonl").read_text()
