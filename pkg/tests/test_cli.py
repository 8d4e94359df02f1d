import json
import os

import pytest

from uncoordsim import ScenarioError
from uncoordsim.cli import main
from uncoordsim.runner import CSV_HEADER, write_csv

from conftest import hand_raw


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "world.json"
    path.write_text(json.dumps(hand_raw()))
    return str(path)


def small_sweep_file(tmp_path):
    raw = hand_raw()
    raw["executors"].append({"id": 1, "speed": 1e9, "position": [5.0, 0.0]})
    raw["executors"].append({"id": 2, "speed": 1e9, "position": [0.0, 5.0]})
    raw["clients"][0]["workload"]["arrival"] = {"kind": "poisson", "rate": 120.0}
    raw["clients"][0]["workload"]["ops"] = {"kind": "exponential", "mean": 4e6}
    raw["policy"] = {"kind": "uncoordinated", "k": 3, "chi": 0.1, "alpha": 0.1}
    raw["horizon_s"] = 8.0
    raw["warmup_s"] = 1.0
    path = tmp_path / "sweepworld.json"
    path.write_text(json.dumps(raw))
    return str(path)


class TestSimulate:
    def test_success(self, scenario_file, capsys):
        code = main(["simulate", "--scenario", scenario_file, "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "delay_mean_s:        0.004" in out
        assert "util_mean:           0.2" in out

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code = main(["simulate", "--scenario", str(tmp_path / "nope.json"),
                     "--seed", "1"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_json_is_validation_error(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["simulate", "--scenario", str(path), "--seed", "1"]) == 1

    def test_unknown_key_is_validation_error(self, tmp_path, capsys):
        raw = hand_raw()
        raw["typo_key"] = 1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw))
        code = main(["simulate", "--scenario", str(path), "--seed", "1"])
        assert code == 1
        assert "unknown key" in capsys.readouterr().err

    def test_invariant_violation_message(self, tmp_path, capsys):
        raw = hand_raw()
        raw["policy"]["k"] = 6
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw))
        code = main(["simulate", "--scenario", str(path), "--seed", "1"])
        assert code == 1
        assert "pool_size exceeds executor count" in capsys.readouterr().err

    def test_trace_written(self, scenario_file, tmp_path, capsys):
        trace = tmp_path / "trace.tsv"
        code = main(["simulate", "--scenario", scenario_file, "--seed", "1",
                     "--trace", str(trace)])
        assert code == 0
        lines = trace.read_text().splitlines()
        assert lines[0].split("\t")[2] == "arrival"
        kinds = {line.split("\t")[2] for line in lines}
        assert kinds == {"arrival", "request_sent", "service_start",
                         "service_end", "response_received"}

    def test_cdf_written(self, scenario_file, tmp_path, capsys):
        cdf = tmp_path / "cdf.csv"
        code = main(["simulate", "--scenario", scenario_file, "--seed", "1",
                     "--cdf", str(cdf)])
        assert code == 0
        lines = cdf.read_text().splitlines()
        assert lines[0] == "delay_s,cum_prob"
        assert lines[-1].endswith(",1")


class TestSweep:
    def run_sweep(self, tmp_path, out_name="out", extra=()):
        scenario = small_sweep_file(tmp_path)
        out = tmp_path / out_name
        code = main(["sweep", "--scenario", scenario, "--param", "chi",
                     "--values", "0.0,0.2", "--seeds", "2,1", "--out", str(out),
                     *extra])
        return code, out

    def test_csv_layout(self, tmp_path, capsys):
        code, out = self.run_sweep(tmp_path)
        assert code == 0
        lines = (out / "sweep_chi.csv").read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 5  # header + 2 values x 2 seeds
        # rows ordered by (value, seed) regardless of the seed list order
        keys = [(line.split(",")[1], line.split(",")[2]) for line in lines[1:]]
        assert keys == [("0", "1"), ("0", "2"), ("0.2", "1"), ("0.2", "2")]

    def test_cdf_files_named_per_point(self, tmp_path, capsys):
        code, out = self.run_sweep(tmp_path)
        names = sorted(os.listdir(out))
        assert "cdf_uncoordinated_chi=0.2_seed=1.csv" in names
        assert "cdf_uncoordinated_chi=0_seed=2.csv" in names

    def test_byte_identical_reruns(self, tmp_path, capsys):
        _, out1 = self.run_sweep(tmp_path, "out1")
        _, out2 = self.run_sweep(tmp_path, "out2")
        a = (out1 / "sweep_chi.csv").read_bytes()
        b = (out2 / "sweep_chi.csv").read_bytes()
        assert a == b

    def test_parallel_jobs_identical_output(self, tmp_path, capsys):
        _, seq = self.run_sweep(tmp_path, "seq")
        _, par = self.run_sweep(tmp_path, "par", extra=("--jobs", "2"))
        assert (seq / "sweep_chi.csv").read_bytes() == (par / "sweep_chi.csv").read_bytes()

    def test_invalid_value_fails_before_running(self, tmp_path, capsys):
        scenario = small_sweep_file(tmp_path)
        out = tmp_path / "never"
        code = main(["sweep", "--scenario", scenario, "--param", "k",
                     "--values", "2,9", "--seeds", "1", "--out", str(out)])
        assert code == 1
        assert not out.exists()
        assert "pool_size exceeds executor count" in capsys.readouterr().err

    def test_k_sweep(self, tmp_path, capsys):
        scenario = small_sweep_file(tmp_path)
        out = tmp_path / "ksweep"
        code = main(["sweep", "--scenario", scenario, "--param", "k",
                     "--values", "1,2,3", "--seeds", "4", "--out", str(out)])
        assert code == 0
        lines = (out / "sweep_k.csv").read_text().splitlines()
        assert [line.split(",")[1] for line in lines[1:]] == ["1", "2", "3"]

    def test_empty_table_writes_nothing(self, tmp_path):
        path = tmp_path / "empty.csv"
        with pytest.raises(ScenarioError, match="no rows"):
            write_csv([], "chi", str(path))
        assert not path.exists()

    def test_replication_independence(self, tmp_path, capsys):
        # a seed's row is the same whether it runs alone or inside a sweep
        scenario = small_sweep_file(tmp_path)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        main(["sweep", "--scenario", scenario, "--param", "chi",
              "--values", "0.1", "--seeds", "1,2,3", "--out", str(out_a)])
        main(["sweep", "--scenario", scenario, "--param", "chi",
              "--values", "0.1", "--seeds", "2", "--out", str(out_b)])
        rows_a = (out_a / "sweep_chi.csv").read_text().splitlines()
        rows_b = (out_b / "sweep_chi.csv").read_text().splitlines()
        row_a2 = [r for r in rows_a if r.split(",")[2] == "2"]
        row_b2 = [r for r in rows_b if r.split(",")[2] == "2"]
        assert row_a2 == row_b2
