"""CLI contract: subcommands, exit codes, output schemas, determinism."""

import json
import types

import numpy as np
import pytest

from ghzqss import analysis, cli, protocol


def test_derive_seed_is_stable_and_spread():
    seeds = [cli.derive_seed(42, k) for k in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [cli.derive_seed(42, k) for k in range(100)]
    assert all(0 <= s < 2 ** 63 for s in seeds)


def test_run_honest_json(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["run", "--random-bits", "120", "--reps", "3",
                     "--seed", "9", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["aggregate"]["sessions"] == 3
    assert doc["aggregate"]["qber_total"]["mean"] == 0.0
    assert doc["aggregate"]["detection_rate"] == 0.0
    assert len(doc["sessions"]) == 3
    session = doc["sessions"][0]
    assert session["seed"] == cli.derive_seed(9, 0)
    assert session["rounds"] == 120


def test_run_bits_literal(capsys):
    code = cli.main(["run", "--bits", "1011", "--seed", "1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["sessions"][0]["config_echo"]["message"] == "1011"


def test_run_message_file(tmp_path, capsys):
    msg = tmp_path / "message.txt"
    msg.write_text("01 10\n11\n", encoding="utf-8")
    code = cli.main(["run", "--message-file", str(msg), "--seed", "1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["sessions"][0]["config_echo"]["message"] == "011011"


def test_run_intercept_detection(tmp_path):
    out = tmp_path / "ir.json"
    code = cli.main(["run", "--random-bits", "600", "--attack", "intercept",
                     "--seed", "3", "--reps", "2", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["aggregate"]["detection_rate"] == 1.0
    assert doc["aggregate"]["qber_total"]["mean"] > 0.4


def test_run_deterministic_byte_identical(tmp_path):
    args = ["run", "--random-bits", "200", "--attack", "intercept",
            "--seed", "7", "--reps", "2"]
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_run_csv_transcript(tmp_path):
    out = tmp_path / "transcript.csv"
    code = cli.main(["run", "--bits", "101", "--seed", "2",
                     "--format", "csv", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ("round,parity,sent,bob_bit,charlie_bit,announced_by,"
                        "announced_bit,reconstructed,error,carrier_fidelity")
    assert len(lines) == 4


def test_run_csv_multi_rep(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code = cli.main(["run", "--bits", "10", "--seed", "2", "--reps", "2",
                     "--format", "csv", "--out", str(out)])
    assert code == 0
    assert (tmp_path / "t.rep0.csv").exists()
    assert (tmp_path / "t.rep1.csv").exists()
    aggregate = json.loads(capsys.readouterr().out)
    assert aggregate["sessions"] == 2


def test_run_cheat_attack(tmp_path):
    out = tmp_path / "cheat.json"
    code = cli.main(["run", "--random-bits", "400", "--attack", "cheat",
                     "--cheat-mode", "flip", "--seed", "5", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["sessions"][0]["qber_even"] == 1.0
    assert doc["sessions"][0]["qber_odd"] == 0.0


def test_run_entangle_requires_spec(capsys):
    assert cli.main(["run", "--bits", "10", "--attack", "entangle"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_run_entangle_with_spec_file(tmp_path):
    spec = analysis.EntanglingAttackSpec.honest(2)
    doc = {"variant": "entangling", "refresh_each_round": True, **spec.to_dict()}
    path = tmp_path / "attack.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "report.json"
    code = cli.main(["run", "--bits", "1100", "--attack", "entangle",
                     "--attack-spec", str(path), "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["sessions"][0]["qber_total"] == 0.0
    assert report["sessions"][0]["eve"]["branch_overlap"] == 1.0


def test_run_config_errors(capsys):
    assert cli.main(["run", "--bits", "abc"]) == 2
    assert cli.main(["run", "--bits", ""]) == 2
    assert cli.main(["run", "--bits", "01", "--reps", "0"]) == 2
    assert cli.main(["run", "--bits", "01", "--noise-p", "0.7"]) == 2
    assert cli.main(["run", "--bits", "01", "--reps", "2", "--format", "csv"]) == 2
    capsys.readouterr()


def test_run_io_error(tmp_path, capsys):
    missing_dir = tmp_path / "nope" / "report.json"
    code = cli.main(["run", "--bits", "01", "--out", str(missing_dir)])
    assert code == 3
    assert "i/o error" in capsys.readouterr().err


def test_run_noise_exercises_threshold(tmp_path):
    out = tmp_path / "noise.json"
    code = cli.main(["run", "--random-bits", "600", "--noise-p", "0.2",
                     "--seed", "8", "--detect-threshold", "0.05",
                     "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["sessions"][0]["detected"] is True


def test_bound_search_outputs(tmp_path):
    out = tmp_path / "bound.json"
    code = cli.main(["bound-search", "--min-distinguishability", "1.0",
                     "--budget", "2000", "--ancilla-dim", "2", "--seed", "4",
                     "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert 0.25 - 1e-9 <= doc["best_average"] <= 0.2501
    frontier = (tmp_path / "bound.json.frontier.csv").read_text().splitlines()
    assert frontier[0] == ("distinguishability_constraint,min_average_qber,"
                           "epsilon_at_min,evaluations")
    assert len(frontier) == 2


def test_bound_search_trivial_constraint(capsys):
    code = cli.main(["bound-search", "--min-distinguishability", "0",
                     "--budget", "10000", "--seed", "1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["best_average"] <= 1e-9


def test_bound_search_single_candidate(capsys):
    code = cli.main(["bound-search", "--budget", "1", "--seed", "2"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["evaluations"] == 1


def test_bound_search_infeasible(capsys):
    code = cli.main(["bound-search", "--min-distinguishability", "0.5",
                     "--ancilla-dim", "1"])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_verify_passes(capsys):
    assert cli.main(["verify", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 5
    assert "all checks passed" in out


def test_verify_deterministic(capsys):
    cli.main(["verify", "--seed", "3"])
    first = capsys.readouterr().out
    cli.main(["verify", "--seed", "3"])
    second = capsys.readouterr().out
    assert first == second


def test_verify_catches_corrupted_hadamard(capsys):
    corrupted = np.array([[1.0, 0.1], [0.1, -1.0]], dtype=complex) / np.sqrt(2)
    code = cli._cmd_verify(types.SimpleNamespace(seed=0),
                           hadamard_override=corrupted)
    assert code == 1
    out = capsys.readouterr().out
    assert "[FAIL] switch-duality" in out
    assert "failed checks: switch-duality" in out


def test_exit_code_constants():
    assert (cli.EXIT_OK, cli.EXIT_VERIFY_FAILED, cli.EXIT_CONFIG, cli.EXIT_IO) == \
        (0, 1, 2, 3)
