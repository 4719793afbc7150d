import json

from heislab import cli


def run(args):
    return cli.main(args)


def test_regions_suite_passes(tmp_path):
    assert run(["regions", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "regions" / "summary.json").read_text())
    assert summary["passed"] and summary["suite"] == "regions"
    assert all(a["passed"] for a in summary["assertions"])
    assert (tmp_path / "regions" / "triangle_vertices.csv").exists()


def test_rerun_is_byte_identical(tmp_path):
    run(["regions", "--out", str(tmp_path / "a"), "--seed", "5"])
    run(["regions", "--out", str(tmp_path / "b"), "--seed", "5"])
    for name in ("summary.json", "triangle_vertices.csv"):
        a = (tmp_path / "a" / "regions" / name).read_bytes()
        b = (tmp_path / "b" / "regions" / name).read_bytes()
        assert a == b


def test_invalid_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\nn = 7\n")
    assert run(["regions", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert run(["regions", "--config", str(tmp_path / "missing.ini"),
                "--out", str(tmp_path)]) == 2


def test_config_file_applies(tmp_path):
    cfg = tmp_path / "ok.ini"
    cfg.write_text("[run]\nn = 1\nseed = 9\ndelta = 0.5\n")
    assert run(["regions", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "regions" / "summary.json").read_text())
    assert summary["config"]["seed"] == 9


def test_laguerre_suite_passes(tmp_path):
    assert run(["laguerre-verify", "--out", str(tmp_path)]) == 0
    csv_text = (tmp_path / "laguerre-verify" / "uniform_scan.csv").read_text()
    assert csv_text.startswith("delta,lambda,k_max,sup,fitted_C")
