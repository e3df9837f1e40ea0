"""Command-line interface: schema validation, exit codes, report format."""

import json
import subprocess
import sys

import pytest

from farpoint.cli import (EXIT_INCONCLUSIVE, EXIT_IO, EXIT_OK,
                          EXIT_PRECONDITION, main)

DISK_FILE = {
    "kind": "balls",
    "dimension": 2,
    "balls": [{"center": [0.0, 0.0], "radius": 1.0}],
    "query": [3.0, 0.0],
}
LENS_FILE = {
    "kind": "balls",
    "dimension": 2,
    "balls": [{"center": [0.0, 0.0], "radius": 1.25},
              {"center": [1.0, 0.0], "radius": 1.25}],
    "query": [0.5, 0.0],
}


def write(tmp_path, payload, name="inst.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run_cli(args, env=None):
    return subprocess.run([sys.executable, "-m", "farpoint.cli"] + args,
                          capture_output=True, text=True, env=env)


def last_record(stdout):
    return json.loads(stdout.strip().splitlines()[-1])


class TestFarthestCommand:
    def test_single_disk_value(self, tmp_path, capsys):
        code = main(["farthest", write(tmp_path, DISK_FILE)])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        rec = last_record(out)
        assert rec["status"] == "ok"
        assert rec["value"] == pytest.approx(16.0, abs=1e-5)
        assert rec["case"] == "DisjointFromInterior"

    def test_oracle_flag_appends_comparison(self, tmp_path, capsys):
        code = main(["farthest", write(tmp_path, DISK_FILE), "--oracle"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "oracle" in out
        rec = last_record(out)
        assert rec["oracle_value"] == pytest.approx(16.0, abs=1e-3)

    def test_interior_query_without_container(self, tmp_path, capsys):
        code = main(["farthest", write(tmp_path, LENS_FILE)])
        out = capsys.readouterr().out
        assert code == EXIT_PRECONDITION
        rec = last_record(out)
        assert rec["status"] == "precondition"

    def test_missing_radius_names_field(self, tmp_path, capsys):
        bad = {"kind": "balls", "dimension": 2,
               "balls": [{"center": [0.0, 0.0]}], "query": [3.0, 0.0]}
        code = main(["farthest", write(tmp_path, bad)])
        err = capsys.readouterr().err
        assert code == EXIT_IO
        assert "balls[0].radius" in err

    def test_negative_radius_rejected(self, tmp_path, capsys):
        bad = {"kind": "balls", "dimension": 2,
               "balls": [{"center": [0.0, 0.0], "radius": -1.0}],
               "query": [3.0, 0.0]}
        assert main(["farthest", write(tmp_path, bad)]) == EXIT_IO
        capsys.readouterr()

    def test_unknown_field_rejected(self, tmp_path, capsys):
        bad = dict(DISK_FILE)
        bad["extra"] = 1
        code = main(["farthest", write(tmp_path, bad)])
        err = capsys.readouterr().err
        assert code == EXIT_IO
        assert "extra" in err

    def test_kind_mismatch(self, tmp_path, capsys):
        code = main(["farthest", write(tmp_path, {"kind": "subset_sum",
                                                  "S": [1.0, -1.0]})])
        err = capsys.readouterr().err
        assert code == EXIT_IO
        assert "balls" in err

    def test_missing_file(self, capsys):
        assert main(["farthest", "/nonexistent/inst.json"]) == EXIT_IO
        capsys.readouterr()

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["farthest", str(path)]) == EXIT_IO
        capsys.readouterr()


class TestSubsetSumCommand:
    def test_yes_with_witness(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0]})
        code = main(["subset-sum", path])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        rec = last_record(out)
        assert rec["answer"] == "YES"
        assert rec["witness"] == [1, 2]

    def test_certified_no(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, 2.0]})
        code = main(["subset-sum", path])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert last_record(out)["answer"] == "NO"

    def test_inconclusive_exit_code(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, 2.0, -7.0]})
        code = main(["subset-sum", path])
        out = capsys.readouterr().out
        assert code == EXIT_INCONCLUSIVE
        assert last_record(out)["answer"] == "INCONCLUSIVE"

    def test_brute_force_agreement_line(self, tmp_path, capsys):
        path = write(tmp_path,
                     {"kind": "subset_sum", "S": [3.0, -1.0, -2.0, 5.0]})
        code = main(["subset-sum", path, "--brute-force"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "brute-force agrees" in out
        rec = last_record(out)
        assert rec["answer"] == "YES"
        assert rec["witness"] == [1, 2, 3]
        assert rec["brute_force_agrees"] is True

    def test_file_level_parameters_used(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0],
                                "rho": 40.0, "beta": 30.0})
        code = main(["subset-sum", path])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "rho=40" in last_record(out)["diagnostics"]


class TestValidateCommand:
    def test_subset_sum_construction(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0, 2.0]})
        code = main(["validate", path])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        rec = last_record(out)
        assert rec["pass"] is True
        corner = [c for c in rec["checks"] if c["name"] == "corner_exactness"]
        assert corner and corner[0]["residual"] <= 1e-9

    def test_alpha_grid_rows(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0, 2.0]})
        code = main(["validate", path, "--alpha-grid", "4"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        rec = last_record(out)
        rows = [c for c in rec["checks"] if c["name"] == "scaling_identity"]
        assert len(rows) == 4
        assert all(r["residual"] <= 1e-9 for r in rows)

    def test_coaxial_family(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "coaxial", "a": 1.0,
                                "q": [3.0, 2.0, 1.0], "dimension": 3})
        code = main(["validate", path])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        rec = last_record(out)
        checks = {c["name"]: c for c in rec["checks"]}
        assert checks["inclusion_sampler"]["violations"] == 0

    def test_balls_kind_not_supported(self, tmp_path, capsys):
        assert main(["validate", write(tmp_path, DISK_FILE)]) == EXIT_IO
        capsys.readouterr()


class TestDeterminismAndSeeds:
    def test_identical_runs_byte_identical(self, tmp_path):
        path = write(tmp_path,
                     {"kind": "subset_sum", "S": [3.0, -1.0, -2.0, 5.0]})
        a = run_cli(["subset-sum", path, "--seed", "11"])
        b = run_cli(["subset-sum", path, "--seed", "11"])
        assert a.returncode == b.returncode == EXIT_OK
        assert a.stdout == b.stdout

    def test_seed_recorded(self, tmp_path, capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0]})
        main(["subset-sum", path, "--seed", "7"])
        rec = last_record(capsys.readouterr().out)
        assert rec["seed"] == 7

    def test_env_seed_and_flag_precedence(self, tmp_path, monkeypatch,
                                          capsys):
        path = write(tmp_path, {"kind": "subset_sum", "S": [1.0, -1.0]})
        monkeypatch.setenv("SOLVER_SEED", "5")
        main(["subset-sum", path])
        assert last_record(capsys.readouterr().out)["seed"] == 5
        main(["subset-sum", path, "--seed", "9"])
        assert last_record(capsys.readouterr().out)["seed"] == 9

    def test_tolerance_flags_recorded(self, tmp_path, capsys):
        path = write(tmp_path, DISK_FILE)
        main(["farthest", path, "--tol-bisection", "1e-5",
              "--tol-solver", "1e-6"])
        rec = last_record(capsys.readouterr().out)
        assert rec["config"]["tol_bisection"] == 1e-5
        assert rec["config"]["tol_solver"] == 1e-6

    def test_record_round_trips_through_schema(self, tmp_path, capsys):
        path = write(tmp_path, DISK_FILE)
        main(["farthest", path])
        first = last_record(capsys.readouterr().out)
        replay = dict(first["instance"])
        replay["kind"] = first["kind"]
        path2 = write(tmp_path, replay, name="replay.json")
        main(["farthest", path2])
        second = last_record(capsys.readouterr().out)
        assert second == first
