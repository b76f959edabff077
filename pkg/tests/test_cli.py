"""CLI contract tests: artifacts, exit codes, schema conformance."""

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from greedyfool import cli
from greedyfool.images import load_png, save_png

jsonschema = pytest.importorskip("jsonschema")

SCHEMA_PATH = (
    Path(__file__).resolve().parents[1]
    / "src" / "greedyfool" / "schemas" / "attack_report.schema.json"
)
SCHEMA = json.loads(SCHEMA_PATH.read_text())


def _write_image(path, rng, size=16):
    img = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    save_png(img, path)
    return img


def _attack_args(input_path, out, report, extra=()):
    return [
        "attack", str(input_path),
        "--seed", "0",
        "--pop-size", "24",
        "--generations", "20",
        "--num-classes", "4",
        "--oracle-seed", "2",
        "--out", str(out),
        "--report", str(report),
        *extra,
    ]


def test_attack_writes_artifacts_and_l0_matches(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    out = tmp_path / "adv.png"
    report_path = tmp_path / "report.json"
    benign = _write_image(input_path, rng)
    code = cli.main(_attack_args(input_path, out, report_path))
    assert code == 0
    report = json.loads(report_path.read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["success"] is True
    adv = load_png(out)
    assert adv.shape == benign.shape
    changed = int(np.any(adv != benign, axis=2).sum())
    assert changed == report["metrics"]["l0"]
    assert len(report["applied_units"]) == report["metrics"]["l0"]


def test_attack_missing_target_label_usage_error(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    out = tmp_path / "adv.png"
    report_path = tmp_path / "report.json"
    _write_image(input_path, rng)
    code = cli.main(
        _attack_args(input_path, out, report_path, extra=["--mode", "targeted"])
    )
    assert code == cli.EXIT_USAGE
    assert not out.exists()
    assert not report_path.exists()


def test_attack_deterministic_reports_modulo_timing(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    reports = []
    for run_id in range(2):
        out = tmp_path / f"adv{run_id}.png"
        rep = tmp_path / f"report{run_id}.json"
        assert cli.main(_attack_args(input_path, out, rep)) == 0
        data = json.loads(rep.read_text())
        data.pop("elapsed_seconds")
        reports.append(json.dumps(data, sort_keys=True))
    assert reports[0] == reports[1]
    assert (tmp_path / "adv0.png").read_bytes() == (tmp_path / "adv1.png").read_bytes()


def test_attack_unreadable_input_io_error(tmp_path):
    code = cli.main(_attack_args(tmp_path / "missing.png", tmp_path / "a.png", tmp_path / "r.json"))
    assert code == cli.EXIT_IO


def test_attack_rejects_non_rgb_png(tmp_path):
    gray = tmp_path / "gray.png"
    Image.fromarray(np.zeros((16, 16), dtype=np.uint8), mode="L").save(gray)
    code = cli.main(_attack_args(gray, tmp_path / "a.png", tmp_path / "r.json"))
    assert code == cli.EXIT_IO

    rgba = tmp_path / "rgba.png"
    Image.fromarray(np.zeros((16, 16, 4), dtype=np.uint8), mode="RGBA").save(rgba)
    assert cli.main(_attack_args(rgba, tmp_path / "a.png", tmp_path / "r.json")) == cli.EXIT_IO


def test_attack_remote_without_endpoint_usage_error(tmp_path, rng, monkeypatch):
    monkeypatch.delenv(cli.ENDPOINT_ENV_VAR, raising=False)
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    code = cli.main(
        _attack_args(input_path, tmp_path / "a.png", tmp_path / "r.json",
                     extra=["--oracle", "remote"])
    )
    assert code == cli.EXIT_USAGE


def test_attack_remote_unreachable_oracle_error(tmp_path, rng, monkeypatch):
    monkeypatch.setenv(cli.ENDPOINT_ENV_VAR, "http://127.0.0.1:9")
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    code = cli.main(
        _attack_args(input_path, tmp_path / "a.png", tmp_path / "r.json",
                     extra=["--oracle", "remote"])
    )
    assert code == cli.EXIT_ORACLE


def test_metrics_identical_files(tmp_path, rng, capsys):
    a = tmp_path / "a.png"
    img = _write_image(a, rng)
    b = tmp_path / "b.png"
    save_png(img, b)
    assert cli.main(["metrics", str(a), str(b)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {"l0": 0, "l2": 0.0, "linf": 0, "mul_factor_loss": 0.0}


def test_metrics_known_single_pixel_pair(tmp_path, rng, capsys):
    # expected value from the independent scalar evaluator, not the package
    from test_metrics import _cumulative_ref, _sd_ref

    a = tmp_path / "a.png"
    img = _write_image(a, rng)
    x, y, color = 3, 4, (200, 10, 90)
    adv = img.copy()
    adv[y, x] = color
    b = tmp_path / "b.png"
    save_png(adv, b)
    assert cli.main(["metrics", str(a), str(b), "--breakdown"]) == 0
    payload = json.loads(capsys.readouterr().out)
    expected = sum(
        w * abs(_cumulative_ref(color[c]) - _cumulative_ref(int(img[y, x, c])))
        / max(_sd_ref(img, x, y, c), 1.0)
        for c, w in enumerate((0.299, 0.587, 0.114))
    )
    assert payload["mul_factor_loss"] == pytest.approx(expected, rel=1e-9)
    assert payload["l0"] == 1
    assert len(payload["pixels"]) == 1
    assert payload["pixels"][0]["total"] == pytest.approx(expected, rel=1e-9)


def test_metrics_shape_mismatch(tmp_path, rng):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    _write_image(a, rng, size=16)
    _write_image(b, rng, size=24)
    assert cli.main(["metrics", str(a), str(b)]) == cli.EXIT_USAGE


def test_baseline_same_contract(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    out = tmp_path / "adv.png"
    rep = tmp_path / "rep.json"
    code = cli.main([
        "baseline", str(input_path),
        "--seed", "1", "--budget", "400",
        "--num-classes", "4", "--oracle-seed", "2",
        "--out", str(out), "--report", str(rep),
    ])
    report = json.loads(rep.read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["method"] == "random_baseline"
    assert out.exists()
    assert code in (cli.EXIT_OK, cli.EXIT_ATTACK_FAILED)
    assert (code == 0) == report["success"]


def test_baseline_seeded_run_reproducible(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    payloads = []
    for run_id in range(2):
        rep = tmp_path / f"rep{run_id}.json"
        cli.main([
            "baseline", str(input_path),
            "--seed", "9", "--budget", "150",
            "--num-classes", "4", "--oracle-seed", "2",
            "--out", str(tmp_path / f"adv{run_id}.png"), "--report", str(rep),
        ])
        data = json.loads(rep.read_text())
        data.pop("elapsed_seconds")
        payloads.append(json.dumps(data, sort_keys=True))
    assert payloads[0] == payloads[1]


def test_baseline_budget_zero_fails(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    code = cli.main([
        "baseline", str(input_path), "--budget", "0",
        "--num-classes", "4",
        "--out", str(tmp_path / "a.png"), "--report", str(tmp_path / "r.json"),
    ])
    assert code == cli.EXIT_ATTACK_FAILED


def test_weights_flag_validation(tmp_path, rng):
    input_path = tmp_path / "benign.png"
    _write_image(input_path, rng)
    code = cli.main(
        _attack_args(input_path, tmp_path / "a.png", tmp_path / "r.json",
                     extra=["--weights", "0.5,0.5,0.5"])
    )
    assert code == cli.EXIT_USAGE


def test_png_round_trip_bit_exact(tmp_path, rng):
    for i in range(10):
        img = rng.integers(0, 256, (rng.integers(1, 40), rng.integers(1, 40), 3), dtype=np.uint8)
        path = tmp_path / f"rt{i}.png"
        save_png(img, path)
        np.testing.assert_array_equal(load_png(path), img)
