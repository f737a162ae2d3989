"""CLI behavior: commands, exit codes, artifact layout, byte determinism."""

import hashlib
import json
from pathlib import Path

import pytest

from mwconsensus import scenario_io
from mwconsensus.cli import EXIT_DIVERGED, EXIT_IO, EXIT_OK, EXIT_VALIDATION, \
    main


def small_scenario_doc(seed=4, weight=1.5, horizon=1.0):
    return {
        "graph": {"n": 2, "d": 1,
                  "edges": [{"i": 0, "j": 1, "weight": [weight]}]},
        "mode": "leaderless",
        "params": {"sigma": 0.5, "theta": 1.0, "beta": 1.0, "delta": 1.0,
                   "chi0": 0.3},
        "sim": {"dt": 0.001, "T": horizon, "seed": seed},
    }


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(small_scenario_doc()))
    return path


def file_hashes(directory: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(directory.iterdir())}


class TestCheck:
    def test_builtin_leaderless(self, capsys):
        assert main(["check", "builtin:leaderless"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "balanced" in out
        assert "group1=[0, 1, 5]" in out
        assert "assumption 1" in out and "holds" in out
        assert "mu_bar" in out and "gamma" in out

    def test_builtin_lf(self, capsys):
        assert main(["check", "builtin:lf"]) == EXIT_OK
        assert "assumption 2" in capsys.readouterr().out

    def test_imbalanced_graph_fails(self, tmp_path, capsys):
        doc = small_scenario_doc()
        doc["graph"] = {"n": 3, "d": 1, "edges": [
            {"i": 0, "j": 1, "weight": [1.0]},
            {"i": 1, "j": 2, "weight": [1.0]},
            {"i": 0, "j": 2, "weight": [-1.0]},
        ]}
        path = tmp_path / "imbalanced.json"
        path.write_text(json.dumps(doc))
        assert main(["check", str(path)]) == EXIT_VALIDATION
        assert "IMBALANCED" in capsys.readouterr().out

    def test_missing_file_is_io_error(self):
        assert main(["check", "/nonexistent/file.json"]) == EXIT_IO

    def test_reference_with_flipped_edge_reported_imbalanced(self, tmp_path,
                                                             capsys):
        from mwconsensus.builtin import leaderless_scenario
        doc = json.loads(scenario_io.dump_scenario(leaderless_scenario()))
        for entry in doc["graph"]["edges"]:
            if (entry["i"], entry["j"]) == (1, 2):
                entry["weight"] = [-v for v in entry["weight"]]
                entry["class"] = "pd"
        path = tmp_path / "flipped.json"
        path.write_text(json.dumps(doc))
        assert main(["check", str(path)]) == EXIT_VALIDATION
        assert "IMBALANCED" in capsys.readouterr().out

    def test_malformed_document(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\"graph\": {}}")
        assert main(["check", str(path)]) == EXIT_VALIDATION


class TestSpectrum:
    def test_two_node_pair(self, scenario_file, capsys):
        assert main(["spectrum", str(scenario_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "nullity at tolerance: 1" in out
        # path Laplacian with weight 1.5: eigenvalues 0 and 3
        assert "smallest positive eigenvalue: 3" in out

    def test_builtin_reports_nullity_four(self, capsys):
        assert main(["spectrum", "builtin:leaderless"]) == EXIT_OK
        assert "nullity at tolerance: 4" in capsys.readouterr().out

    def test_lf_includes_grounded(self, capsys):
        assert main(["spectrum", "builtin:lf"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "grounded minimum eigenvalue" in out


class TestRun:
    def test_artifacts_written(self, scenario_file, tmp_path, capsys):
        out_root = tmp_path / "runs"
        assert main(["run", str(scenario_file), "--out", str(out_root)]) == EXIT_OK
        run_dirs = list(out_root.iterdir())
        assert len(run_dirs) == 1
        files = {p.name for p in run_dirs[0].iterdir()}
        assert files == {"trajectory.csv", "chi.csv", "events.csv",
                         "summary.json", "config.json"}
        summary = json.loads((run_dirs[0] / "summary.json").read_text())
        assert summary["mode"] == "leaderless"
        assert "duration_s" not in summary  # timing must not break determinism
        header = (run_dirs[0] / "trajectory.csv").read_text().splitlines()[0]
        assert header == "time,agent,dim,x,xhat,qhat"

    def test_byte_determinism(self, scenario_file, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["run", str(scenario_file), "--out", str(a)]) == EXIT_OK
        assert main(["run", str(scenario_file), "--out", str(b)]) == EXIT_OK
        da, db = next(a.iterdir()), next(b.iterdir())
        assert da.name == db.name
        assert file_hashes(da) == file_hashes(db)

    def test_seed_override_changes_artifacts(self, scenario_file, tmp_path):
        a = tmp_path / "a"
        assert main(["run", str(scenario_file), "--out", str(a)]) == EXIT_OK
        assert main(["run", str(scenario_file), "--out", str(a),
                     "--seed", "9"]) == EXIT_OK
        assert len(list(a.iterdir())) == 2

    def test_dump_config_round_trip(self, scenario_file, capsys):
        assert main(["run", str(scenario_file), "--dump-config"]) == EXIT_OK
        text = capsys.readouterr().out
        sc, outputs = scenario_io.load_scenario_text(text)
        assert scenario_io.dump_scenario(sc, outputs) == text

    def test_divergent_scenario_exit_code(self, tmp_path, capsys):
        doc = small_scenario_doc(weight=1000.0, horizon=10.0)
        doc["sim"]["dt"] = 0.1
        path = tmp_path / "stiff.json"
        path.write_text(json.dumps(doc))
        out_root = tmp_path / "runs"
        assert main(["run", str(path), "--out", str(out_root)]) == EXIT_DIVERGED
        err = capsys.readouterr().err
        assert "diverged" in err
        run_dir = next(out_root.iterdir())
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["diverged"] is True
        assert (run_dir / "trajectory.csv").exists()

    def test_validation_failure_exit_code(self, tmp_path, capsys):
        doc = small_scenario_doc()
        doc["params"]["sigma"] = 1.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["run", str(path)]) == EXIT_VALIDATION
        assert "sigma" in capsys.readouterr().err

    def test_force_runs_despite_failed_assumptions(self, tmp_path):
        doc = small_scenario_doc()
        doc["graph"] = {"n": 3, "d": 1, "edges": [
            {"i": 0, "j": 1, "weight": [1.0]},
            {"i": 1, "j": 2, "weight": [1.0]},
            {"i": 0, "j": 2, "weight": [-1.0]},
        ]}
        doc["sim"]["T"] = 0.2
        path = tmp_path / "imbalanced.json"
        path.write_text(json.dumps(doc))
        out = tmp_path / "runs"
        assert main(["run", str(path), "--out", str(out)]) == EXIT_VALIDATION
        assert main(["run", str(path), "--out", str(out),
                     "--force"]) == EXIT_OK
        summary = json.loads(
            (next(out.iterdir()) / "summary.json").read_text())
        assert summary["limit_state"] is None


class TestReplicate:
    def test_leaderless_run_and_summary(self, tmp_path, capsys):
        out_root = tmp_path / "runs"
        code = main(["replicate-paper", "leaderless", "--seed", "1",
                     "--T", "2.0", "--out", str(out_root)])
        assert code == EXIT_OK
        summary = json.loads(
            (next(out_root.iterdir()) / "summary.json").read_text())
        assert summary["mode"] == "leaderless"
        assert summary["n"] == 6 and summary["d"] == 4

    def test_static_baseline_flag(self, tmp_path):
        out_root = tmp_path / "runs"
        code = main(["replicate-paper", "leaderless", "--seed", "1",
                     "--T", "1.0", "--baseline", "static",
                     "--out", str(out_root)])
        assert code == EXIT_OK
        summary = json.loads(
            (next(out_root.iterdir()) / "summary.json").read_text())
        assert summary["baseline"] == "static"

    def test_raw_first_edge_rejected(self, capsys):
        code = main(["replicate-paper", "leaderless", "--raw-first-edge"])
        assert code == EXIT_VALIDATION
        assert "asymmetric" in capsys.readouterr().err

    def test_events_csv_matches_summary(self, tmp_path):
        out_root = tmp_path / "runs"
        main(["replicate-paper", "leaderless", "--seed", "2", "--T", "1.0",
              "--out", str(out_root)])
        run_dir = next(out_root.iterdir())
        summary = json.loads((run_dir / "summary.json").read_text())
        lines = (run_dir / "events.csv").read_text().splitlines()[1:]
        counts = [0] * 6
        for line in lines:
            counts[int(line.split(",")[0])] += 1
        assert counts == summary["event_counts"]


class TestSweep:
    def test_multiple_scenarios(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MWC_THREADS", "2")
        paths = []
        for k, seed in enumerate((1, 2, 3)):
            doc = small_scenario_doc(seed=seed, horizon=0.5)
            p = tmp_path / f"s{k}.json"
            p.write_text(json.dumps(doc))
            paths.append(str(p))
        out_root = tmp_path / "runs"
        assert main(["sweep", *paths, "--out", str(out_root)]) == EXIT_OK
        assert len(list(out_root.iterdir())) == 3

    def test_sweep_propagates_worst_exit(self, tmp_path):
        good = tmp_path / "good.json"
        good.write_text(json.dumps(small_scenario_doc(horizon=0.2)))
        bad = tmp_path / "bad.json"
        doc = small_scenario_doc()
        doc["params"]["sigma"] = 2.0
        bad.write_text(json.dumps(doc))
        out_root = tmp_path / "runs"
        code = main(["sweep", str(good), str(bad), "--out", str(out_root)])
        assert code == EXIT_VALIDATION


class TestConfigRoundTripOnDisk:
    def test_config_artifact_reparses_identically(self, scenario_file, tmp_path):
        out_root = tmp_path / "runs"
        main(["run", str(scenario_file), "--out", str(out_root)])
        config = next(out_root.iterdir()) / "config.json"
        sc, _ = scenario_io.load_scenario_file(config)
        assert scenario_io.run_directory_name(sc) == next(out_root.iterdir()).name
