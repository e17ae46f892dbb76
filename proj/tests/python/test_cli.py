import json
import subprocess


def run(cli, *args):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True)


def test_flops_exit_zero(cli):
    result = run(cli, "flops", "-n", 12, "-d", 5, "-K", 52, "-v", 500, "--vm", 300)
    assert result.returncode == 0
    assert "27040" in result.stdout


def test_validate_ok(cli, source_dir):
    result = run(cli, "validate", source_dir / "scenarios/ieee13.scenario")
    assert result.returncode == 0


def test_bad_dimension_reduction_exits_one(cli, source_dir):
    result = run(cli, "validate", source_dir / "scenarios/ieee13.scenario", "-d", 11)
    assert result.returncode == 1


def test_invalid_field_exits_one(cli, source_dir, tmp_path):
    config = json.loads((source_dir / "scenarios/ieee13.scenario").read_text())
    config["voltage_floor"] = 1.5
    config["feeder"] = str(source_dir / "scenarios" / config["feeder"])
    config["baseline"] = str(source_dir / "scenarios" / config["baseline"])
    path = tmp_path / "bad.scenario"
    path.write_text(json.dumps(config))
    assert run(cli, "run", path, "-o", tmp_path / "out").returncode == 1


def test_missing_file_exits_three(cli, tmp_path):
    assert run(cli, "run", tmp_path / "absent.scenario").returncode == 3


def test_run_writes_outputs(cli, source_dir, tmp_path):
    result = run(cli, "run", source_dir / "scenarios/ieee13.scenario", "-o", tmp_path, "-q")
    assert result.returncode == 0
    assert (tmp_path / "load.csv").exists()
