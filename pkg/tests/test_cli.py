#! /usr/bin/env python
import csv
import json
import logging

import pytest
from conftest import PRESET_QX, TEST_INPUT_FOLDER, write_config
from util4tests import assert_close, log, run_single_test

from pyqkdchain.__main__ import (
    EXIT_INVALID,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    main,
)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as csvfile:
        return list(csv.DictReader(csvfile))


def test_bounds_to_stdout(capsys):
    log.info("test_bounds_to_stdout")
    assert main(["bounds", "--values", "1e7", "1e8"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("N,m,epsilon,delta,delta_prime,nu")
    assert len(lines) == 3
    assert lines[1].startswith("10000000,700000,")


def test_noise_csv(tmp_path):
    log.info("test_noise_csv")
    out = tmp_path / "noise.csv"
    assert main(["noise", "--values", "0.03", "--out", str(out)]) == EXIT_OK
    (row,) = read_csv(out)
    assert_close(float(row["qx_total"]), PRESET_QX, 1e-11)
    assert_close(float(row["p_star_h4"]), 0.0573536, 1e-6)


def test_rate_finite_csv(tmp_path):
    log.info("test_rate_finite_csv")
    out = tmp_path / "finite.csv"
    argv = ["rate-finite", "--variable", "qx", "--values", str(PRESET_QX)]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    point, threshold = read_csv(out)
    assert_close(float(point["rate_h4"]), 0.236, 2e-3)
    assert threshold["qx"] == "threshold"

    out_n = tmp_path / "finite-n.csv"
    argv = ["rate-finite", "--values", "1e6", "1e8", "--honest", "4"]
    assert main(argv + ["--out", str(out_n)]) == EXIT_OK
    rows = read_csv(out_n)
    assert [r["N"] for r in rows] == ["1000000", "100000000"]
    assert float(rows[0]["rate_h4"]) < float(rows[1]["rate_h4"])


def test_rate_asymptotic_with_config(tmp_path):
    log.info("test_rate_asymptotic_with_config")
    out = tmp_path / "asymptotic.csv"
    argv = [
        "rate-asymptotic",
        "--variable",
        "q",
        "--config",
        str(TEST_INPUT_FOLDER / "chain-mixed.json"),
        "--values",
        "0.01",
        "0.03",
        "--honest",
        "0",
        "2",
        "--out",
        str(out),
    ]
    assert main(argv) == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 3
    assert float(rows[0]["rate_h2"]) > float(rows[1]["rate_h2"])


def test_simulate_json(tmp_path):
    log.info("test_simulate_json")
    out = tmp_path / "run.json"
    argv = ["simulate", "--N", "1e4", "--honest", "4", "--seed", "7"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["chain"]["honest_left"] == 2
    assert doc["report"]["rounds"] == 10_000
    assert doc["report"]["sample_size"] == 700
    assert doc["report"]["seed"] == 7
    assert 0.0 <= doc["report"]["qx_hat"] <= 0.5


def test_override_with_other_split(tmp_path, caplog):
    log.info("test_override_with_other_split")
    config = str(TEST_INPUT_FOLDER / "chain-override.json")
    out = tmp_path / "run.json"
    base = ["simulate", "--config", config, "--N", "1e4", "--seed", "5"]
    assert main(base + ["--honest", "0", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["report"]["p_star"] == 0.0
    assert "p_star_override" not in doc["chain"]

    assert main(base + ["--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["report"]["p_star"] == 0.01

    with caplog.at_level(logging.WARNING, logger="pyqkdchain.__main__"):
        assert main(base + ["--q", "0.02", "--out", str(out)]) == EXIT_OK
    assert "are not used" in caplog.text
    assert "p_star_override" not in json.loads(
        out.read_text(encoding="utf-8")
    )["chain"]


def test_mc_verify(tmp_path):
    log.info("test_mc_verify")
    out = tmp_path / "mc.json"
    argv = ["mc-verify", "--honest", "4", "--trials", "50", "--seed", "3"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
    assert summary["passed"] is True
    assert summary["trials"] == 50
    assert_close(summary["sampling_bound"], 1e-4, 1e-15)


def test_verify_mutation_exit_code(tmp_path):
    log.info("test_verify_mutation_exit_code")
    out = tmp_path / "verify.json"
    argv = ["verify", "--mutate", "convolve", "--trials", "50"]
    assert main(argv + ["--out", str(out)]) == EXIT_VERIFY_FAILED
    assert json.loads(out.read_text(encoding="utf-8"))["passed"] is False


def test_invalid_input(tmp_path, capsys):
    log.info("test_invalid_input")
    broken = write_config(tmp_path, {"repeaters": 1, "links": []})
    assert main(["noise", "--config", str(broken)]) == EXIT_INVALID
    assert "invalid config" in capsys.readouterr().err
    argv = ["rate-finite", "--variable", "qx", "--values", "0.7"]
    assert main(argv) == EXIT_INVALID
    assert main(["simulate", "--N", "100", "--m-fraction", "0.8"]) == (
        EXIT_INVALID
    )
    for argv in (["rate-finite", "--variable", "Z"], ["no-such-command"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == EXIT_INVALID


if __name__ == "__main__":
    run_single_test(__file__)
