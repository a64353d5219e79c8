import json
import shutil
import subprocess

import pytest

from outage_sentinel import lodf, ptdf
from outage_sentinel.cli import main
from outage_sentinel.evaluate import EVALUATION_COLUMNS


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def scenario_path(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "network": "k4",
        "outaged_branch": 12,
        "event_time_s": 10.0,
        "duration_s": 60.0,
        "noise": {"rng_seed": 17},
    }))
    return path


@pytest.fixture()
def dataset_path(tmp_path, scenario_path, capsys):
    path = tmp_path / "data.csv"
    code = main(["simulate", "--config", str(scenario_path), "--out", str(path)])
    capsys.readouterr()
    assert code == 0
    return path


class TestPipeline:
    def test_simulate_detect_locate_export(self, tmp_path, scenario_path, capsys):
        data = tmp_path / "data.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--config", str(scenario_path), "--out", str(data)
        )
        assert code == 0
        assert "6 channels x 1500 samples" in out

        events = tmp_path / "events.json"
        code, _, _ = run_cli(capsys, "detect", str(data), "--out", str(events))
        assert code == 0
        docs = json.loads(events.read_text())
        assert len(docs) == 1
        assert {"event_time_ms", "channels", "params_echo"} == set(docs[0])

        loc = tmp_path / "loc.json"
        code, _, _ = run_cli(
            capsys, "locate", str(data), "--network", "k4",
            "--events", str(events), "--out", str(loc),
        )
        assert code == 0
        report = json.loads(loc.read_text())
        assert set(report) == {"power_change", "max_freq_baseline"}
        assert report["power_change"]["estimated_branch"] == 12
        assert not report["power_change"]["low_confidence"]

        geo = tmp_path / "map.geojson"
        code, _, _ = run_cli(
            capsys, "export-map", str(loc), "--network", "k4", "--out", str(geo)
        )
        assert code == 0
        fc = json.loads(geo.read_text())
        assert fc["type"] == "FeatureCollection"
        lines = [f for f in fc["features"] if f["geometry"]["type"] == "LineString"]
        points = [f for f in fc["features"] if f["geometry"]["type"] == "Point"]
        assert len(lines) == 6 and len(points) == 1
        assert points[0]["properties"]["estimated_branch"] == 12

    def test_simulate_reruns_are_byte_identical(self, tmp_path, scenario_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(scenario_path), "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(scenario_path), "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override_changes_the_noise(self, tmp_path, scenario_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(scenario_path), "--out", str(a), "--seed", "1"]) == 0
        assert main(["simulate", "--config", str(scenario_path), "--out", str(b), "--seed", "2"]) == 0
        capsys.readouterr()
        assert a.read_bytes() != b.read_bytes()

    def test_detect_and_locate_reruns_are_byte_identical(self, tmp_path, dataset_path, capsys):
        e1, e2 = tmp_path / "e1.json", tmp_path / "e2.json"
        assert main(["detect", str(dataset_path), "--out", str(e1)]) == 0
        assert main(["detect", str(dataset_path), "--out", str(e2)]) == 0
        l1, l2 = tmp_path / "l1.json", tmp_path / "l2.json"
        assert main(["locate", str(dataset_path), "--network", "k4", "--out", str(l1)]) == 0
        assert main(["locate", str(dataset_path), "--network", "k4", "--out", str(l2)]) == 0
        capsys.readouterr()
        assert e1.read_bytes() == e2.read_bytes()
        assert l1.read_bytes() == l2.read_bytes()


class TestDetectCommand:
    def test_event_free_stream_prints_an_empty_list(self, tmp_path, capsys):
        scen = tmp_path / "scen.json"
        scen.write_text(json.dumps({
            "network": "k4", "outaged_branch": None, "noise": {"rng_seed": 0}
        }))
        data = tmp_path / "flat.csv"
        assert main(["simulate", "--config", str(scen), "--out", str(data)]) == 0
        capsys.readouterr()
        code, out, _ = run_cli(capsys, "detect", str(data))
        assert code == 0
        assert json.loads(out) == []

    def test_threshold_flags_reach_the_detector(self, dataset_path, capsys):
        code, out, _ = run_cli(
            capsys, "detect", str(dataset_path), "--first-threshold-hz", "0.5",
            "--second-threshold-hz", "0.25",
        )
        assert code == 0
        assert json.loads(out) == []

    def test_truncated_csv_is_a_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "timestamp_ms,channel_id,branch_id,frequency_hz,active_power_mw\n"
            "1000,pmu-012,12,60.0\n"
        )
        code, _, err = run_cli(capsys, "detect", str(bad))
        assert code == 3
        assert err.strip()

    def test_missing_file_is_a_data_error(self, capsys):
        code, _, _ = run_cli(capsys, "detect", "no-such-file.csv")
        assert code == 3


class TestLocateCommand:
    def test_method_selection(self, dataset_path, capsys):
        code, out, _ = run_cli(
            capsys, "locate", str(dataset_path), "--network", "k4", "--method", "power"
        )
        assert code == 0
        assert set(json.loads(out)) == {"power_change"}
        code, out, _ = run_cli(
            capsys, "locate", str(dataset_path), "--network", "k4", "--method", "baseline"
        )
        assert code == 0
        assert set(json.loads(out)) == {"max_freq_baseline"}

    def test_explicit_event_time(self, dataset_path, capsys):
        code, out, _ = run_cli(
            capsys, "locate", str(dataset_path), "--network", "k4",
            "--event-time-ms", "1609459210000", "--method", "power",
        )
        assert code == 0
        doc = json.loads(out)["power_change"]
        assert doc["estimated_branch"] == 12
        assert doc["event_time_ms"] == 1609459210000

    def test_internal_detector_fallback(self, dataset_path, capsys):
        code, out, _ = run_cli(
            capsys, "locate", str(dataset_path), "--network", "k4", "--method", "power"
        )
        assert code == 0
        assert json.loads(out)["power_change"]["estimated_branch"] == 12

    def test_no_event_anywhere_is_a_data_error(self, tmp_path, capsys):
        scen = tmp_path / "scen.json"
        scen.write_text(json.dumps({
            "network": "k4", "outaged_branch": None, "noise": {"rng_seed": 0}
        }))
        data = tmp_path / "flat.csv"
        assert main(["simulate", "--config", str(scen), "--out", str(data)]) == 0
        capsys.readouterr()
        code, _, err = run_cli(capsys, "locate", str(data), "--network", "k4")
        assert code == 3
        assert "no event" in err

    def test_unknown_fixture_is_a_data_error(self, dataset_path, capsys):
        code, _, _ = run_cli(
            capsys, "locate", str(dataset_path), "--network", "atlantis"
        )
        assert code == 3


class TestFactorsCommand:
    def test_lodf_table_round_trips(self, k4, capsys):
        code, out, _ = run_cli(capsys, "factors", "--network", "k4", "--outage", "12")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "branch_id,lodf"
        parsed = {int(b): float(v) for b, v in (line.split(",") for line in lines[1:])}
        assert parsed == lodf(k4, 12).values

    def test_branch_ref_accepts_an_l_prefix(self, capsys):
        code, plain, _ = run_cli(capsys, "factors", "--network", "k4", "--outage", "12")
        assert code == 0
        code, prefixed, _ = run_cli(capsys, "factors", "--network", "k4", "--outage", "L12")
        assert code == 0
        assert plain == prefixed

    def test_ptdf_table_round_trips(self, k4, capsys):
        code, out, _ = run_cli(
            capsys, "factors", "--network", "k4", "--transaction", "1", "2"
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "branch_id,ptdf"
        parsed = {int(b): float(v) for b, v in (line.split(",") for line in lines[1:])}
        assert parsed == ptdf(k4, 1, 2).values

    def test_islanding_outage_is_a_model_error(self, capsys):
        code, _, err = run_cli(capsys, "factors", "--network", "ne39", "--outage", "22")
        assert code == 4
        assert err.strip()

    def test_unknown_branch_is_a_data_error(self, capsys):
        code, _, _ = run_cli(capsys, "factors", "--network", "k4", "--outage", "99")
        assert code == 3

    def test_outage_and_transaction_conflict(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["factors", "--network", "k4", "--outage", "12", "--transaction", "1", "2"])
        assert exc.value.code == 2


class TestEvaluateCommand:
    def test_k4_sweep_writes_rows_and_a_summary(self, tmp_path, capsys):
        rows_path = tmp_path / "rows.csv"
        code, out, _ = run_cli(
            capsys, "evaluate", "--network", "k4", "--seeds", "0",
            "--out", str(rows_path),
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["overall"]["cases"] == 6
        assert summary["overall"]["detection_rate"] == 1.0
        lines = rows_path.read_text().strip().splitlines()
        assert lines[0].split(",") == EVALUATION_COLUMNS
        assert len(lines) == 7

    def test_seed_ranges_multiply_the_cases(self, capsys):
        code, out, _ = run_cli(capsys, "evaluate", "--network", "k4", "--seeds", "0:2")
        assert code == 0
        assert json.loads(out)["overall"]["cases"] == 12

    def test_zero_coverage_is_a_data_error(self, capsys):
        code, _, _ = run_cli(
            capsys, "evaluate", "--network", "k4", "--coverage", "0.0", "--seeds", "0"
        )
        assert code == 3


class TestExportMapCommand:
    def test_coordinates_are_lon_lat_pairs(self, tmp_path, dataset_path, k4, capsys):
        loc = tmp_path / "loc.json"
        assert main([
            "locate", str(dataset_path), "--network", "k4",
            "--method", "power", "--out", str(loc),
        ]) == 0
        capsys.readouterr()
        code, out, _ = run_cli(capsys, "export-map", str(loc), "--network", "k4")
        assert code == 0
        fc = json.loads(out)
        report = json.loads(loc.read_text())["power_change"]
        top = report["ranked"][0]["branch_id"]
        (lat1, lon1), (lat2, lon2) = k4.branch_terminals(top)
        first = fc["features"][0]
        assert first["geometry"]["coordinates"] == [[lon1, lat1], [lon2, lat2]]
        assert first["properties"]["rank"] == 1
        point = fc["features"][-1]["geometry"]["coordinates"]
        (alat1, alon1), (alat2, alon2) = k4.branch_terminals(report["estimated_branch"])
        assert point == [(alon1 + alon2) / 2.0, (alat1 + alat2) / 2.0]

    def test_bare_power_report_is_accepted(self, tmp_path, dataset_path, capsys):
        loc = tmp_path / "loc.json"
        assert main([
            "locate", str(dataset_path), "--network", "k4",
            "--method", "power", "--out", str(loc),
        ]) == 0
        capsys.readouterr()
        bare = tmp_path / "bare.json"
        bare.write_text(json.dumps(json.loads(loc.read_text())["power_change"]))
        code, out, _ = run_cli(capsys, "export-map", str(bare), "--network", "k4")
        assert code == 0
        assert len(json.loads(out)["features"]) == 7

    def test_baseline_only_report_is_a_data_error(self, tmp_path, dataset_path, capsys):
        loc = tmp_path / "loc.json"
        assert main([
            "locate", str(dataset_path), "--network", "k4",
            "--method", "baseline", "--out", str(loc),
        ]) == 0
        capsys.readouterr()
        code, _, err = run_cli(capsys, "export-map", str(loc), "--network", "k4")
        assert code == 3
        assert "power_change" in err

    def test_malformed_json_is_a_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        code, _, _ = run_cli(capsys, "export-map", str(bad), "--network", "k4")
        assert code == 3

    def test_empty_ranking_gives_an_empty_collection(self, tmp_path, capsys):
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({
            "method": "power_change", "event_time_ms": 0,
            "estimated_branch": 12, "ranked": [], "low_confidence": True,
        }))
        code, out, _ = run_cli(capsys, "export-map", str(empty), "--network", "k4")
        assert code == 0
        assert json.loads(out)["features"] == []


class TestUsage:
    def test_no_arguments_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_subcommand_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_required_flag_is_a_usage_error(self, dataset_path):
        with pytest.raises(SystemExit) as exc:
            main(["locate", str(dataset_path)])
        assert exc.value.code == 2


class TestConsoleScript:
    def test_entry_point_is_installed(self, tmp_path):
        exe = shutil.which("outage-sentinel")
        assert exe, "console script not on PATH"
        proc = subprocess.run(
            [exe, "factors", "--network", "k4", "--outage", "12"],
            capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("branch_id,lodf")
