"""Session state machine: round flow, decoding rules, detection, export."""

import io

import numpy as np
import pytest

from ghzqss import adversary, carriers, protocol, qsim
import oracles


def test_new_session_starts_with_ghz():
    session = protocol.new_session(seed=0, ancilla_dim=1)
    assert qsim.fidelity(session.state, carriers.ghz()) == pytest.approx(1.0)
    assert session.round_index == 1
    assert session.parity == "odd"
    assert session.expected_carrier is carriers.CarrierKind.GHZ


def test_new_session_with_ancilla():
    session = protocol.new_session(seed=0, ancilla_dim=4)
    assert session.state.layout.names == ("a", "b", "c", "e")
    assert session.state.amps[0] == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(ValueError):
        protocol.new_session(seed=0, ancilla_dim=0)


def test_session_replay_is_deterministic():
    msg = [0, 1, 1, 0, 1] * 8
    a = protocol.run_session(msg, adversary.InterceptResend(), seed=321)
    b = protocol.run_session(msg, adversary.InterceptResend(), seed=321)
    assert a.transcript == b.transcript
    assert a.to_dict() == b.to_dict()


def test_alice_entangle_matches_reference_states():
    for q in (0, 1):
        session = protocol.new_session(seed=0)
        protocol.alice_entangle(session, q)
        np.testing.assert_allclose(session.state.amps,
                                   oracles.entangled_odd_state(q), atol=1e-10)
    for q in (0, 1):
        session = protocol.new_session(seed=0)
        protocol.refresh_carrier(session)
        protocol.alice_entangle(session, q)
        np.testing.assert_allclose(session.state.amps,
                                   oracles.entangled_even_state(q), atol=1e-10)


def test_alice_entangle_rejects_double_call():
    session = protocol.new_session(seed=0)
    protocol.alice_entangle(session, 0)
    with pytest.raises(protocol.StateMachineError):
        protocol.alice_entangle(session, 0)


def test_transit_wire_reduction_is_maximally_mixed():
    session = protocol.new_session(seed=0)
    protocol.alice_entangle(session, 1)
    for wire in carriers.DATA_WIRES:
        rho = qsim.reduced_density(session.state, [wire])
        assert qsim.trace_distance(rho, qsim.maximally_mixed(2)) < 1e-12


def test_honest_disentangle_extracts_product():
    for q in (0, 1):
        session = protocol.new_session(seed=0)
        protocol.alice_entangle(session, q)
        protocol.transmit(session, adversary.NoAttack())
        protocol.receivers_disentangle(session)
        rho = qsim.reduced_density(session.state, ["w1", "w2"])
        expected = carriers.encode_product(q)
        assert qsim.dm_fidelity_pure(rho, expected) == pytest.approx(1.0, abs=1e-10)
        purity = float(np.trace(rho.entries @ rho.entries).real)
        assert purity == pytest.approx(1.0, abs=1e-10)


def test_honest_disentangle_extracts_parity_state():
    for q in (0, 1):
        session = protocol.new_session(seed=0)
        protocol.refresh_carrier(session)
        protocol.alice_entangle(session, q)
        protocol.transmit(session, adversary.NoAttack())
        protocol.receivers_disentangle(session)
        rho = qsim.reduced_density(session.state, ["w1", "w2"])
        assert qsim.dm_fidelity_pure(rho, carriers.encode_parity(q)) == \
            pytest.approx(1.0, abs=1e-10)


def test_disentangle_order_is_irrelevant():
    session = protocol.new_session(seed=0)
    protocol.alice_entangle(session, 1)
    a = qsim.apply_cnot(qsim.apply_cnot(session.state, "b", "w1"), "c", "w2")
    b = qsim.apply_cnot(qsim.apply_cnot(session.state, "c", "w2"), "b", "w1")
    np.testing.assert_allclose(a.amps, b.amps, atol=1e-12)


def test_odd_round_records_both_bits():
    session = protocol.new_session(seed=7)
    protocol.alice_entangle(session, 1)
    protocol.transmit(session, adversary.NoAttack())
    protocol.receivers_disentangle(session)
    record = protocol.measure_and_reconstruct(session)
    assert (record.bob_bit, record.charlie_bit) == (1, 1)
    assert record.error is False
    assert record.announced_by is None
    assert record.reconstructed == (1, 1)
    # data wires removed afterwards
    assert session.state.layout.names == ("a", "b", "c")


def test_even_round_announcement_reconstruction():
    for q in (0, 1):
        for seed in range(6):
            session = protocol.new_session(seed=seed)
            protocol.refresh_carrier(session)
            protocol.alice_entangle(session, q)
            protocol.transmit(session, adversary.NoAttack())
            protocol.receivers_disentangle(session)
            record = protocol.measure_and_reconstruct(session)
            assert record.announced_by == "bob"
            assert record.announced_bit == record.bob_bit
            # reconstructed = announced XOR own bit recovers q
            assert record.reconstructed == record.announced_bit ^ record.charlie_bit
            assert record.reconstructed == q
            assert record.error is False


def test_refresh_alternates_carrier():
    session = protocol.new_session(seed=3)
    protocol.alice_entangle(session, 0)
    protocol.transmit(session, adversary.NoAttack())
    protocol.receivers_disentangle(session)
    protocol.measure_and_reconstruct(session)
    protocol.refresh_carrier(session)
    assert qsim.fidelity(session.state, carriers.even_parity()) == \
        pytest.approx(1.0, abs=1e-10)
    assert session.expected_carrier is carriers.CarrierKind.EVEN_PARITY
    # run the even round to completion, carrier returns to GHZ
    protocol.alice_entangle(session, 1)
    protocol.transmit(session, adversary.NoAttack())
    protocol.receivers_disentangle(session)
    protocol.measure_and_reconstruct(session)
    protocol.refresh_carrier(session)
    assert qsim.fidelity(session.state, carriers.ghz()) == \
        pytest.approx(1.0, abs=1e-10)


def test_double_refresh_restores_carrier():
    session = protocol.new_session(seed=0)
    before = session.state.amps.copy()
    protocol.refresh_carrier(session)
    protocol.refresh_carrier(session)
    np.testing.assert_allclose(session.state.amps, before, atol=1e-12)


def test_run_session_honest_correctness():
    rng = np.random.default_rng(11)
    message = [int(b) for b in rng.integers(0, 2, size=1000)]
    report = protocol.run_session(message, seed=5)
    assert report.qber_total == 0.0
    assert report.detected is False
    assert report.rounds == 1000
    assert all(abs(r.carrier_fidelity - 1.0) <= 1e-10 for r in report.transcript)
    kinds = [r.parity for r in report.transcript]
    assert kinds[::2] == ["odd"] * 500 and kinds[1::2] == ["even"] * 500


def test_run_session_carrier_classification_in_honest_runs():
    message = [1, 0, 0, 1]
    session = protocol.new_session(seed=2)
    for q in message:
        kind = carriers.classify_carrier(session.state)
        assert kind is session.expected_carrier
        protocol.alice_entangle(session, q)
        protocol.transmit(session, adversary.NoAttack())
        protocol.receivers_disentangle(session)
        protocol.measure_and_reconstruct(session)
        protocol.refresh_carrier(session)


def test_announcement_secrecy():
    # announced bit is a fair coin regardless of the message content
    for bit in (0, 1):
        report = protocol.run_session([bit] * 2000, seed=13)
        announced = [r.announced_bit for r in report.transcript if r.parity == "even"]
        freq = sum(announced) / len(announced)
        assert abs(freq - 0.5) <= 3 * oracles.binomial_se(0.5, len(announced))


def test_single_round_policy_short_circuits():
    report = protocol.run_session([1], seed=0)
    assert report.rounds == 1
    assert report.detected is False


def test_detect_thresholds():
    rng = np.random.default_rng(0)
    policy = protocol.DetectionPolicy(sample_fraction=0.2, abort_threshold=0.05,
                                      min_samples=50)

    def fake_records(n, error_rate):
        rng_local = np.random.default_rng(1)
        return [protocol.RoundRecord(
            round=i + 1, parity="odd", sent=0, bob_bit=0, charlie_bit=0,
            announced_by=None, announced_bit=None, reconstructed=(0, 0),
            error=bool(rng_local.random() < error_rate), carrier_fidelity=1.0)
            for i in range(n)]

    assert protocol.detect(fake_records(1000, 0.0), policy, rng) is False
    # 50% errors, 200 samples: miss probability is a binomial tail below 1e-12
    assert protocol.detect(fake_records(1000, 0.5), policy, rng) is True
    assert protocol.detect(fake_records(100, 0.5), policy, rng) is False  # 20 < 50


def test_noise_flips_cause_errors():
    report = protocol.run_session([0] * 400, noise_p=0.25, seed=9)
    assert report.qber_total > 0.1
    # odd rounds: a single flip always hits exactly one receiver bit
    odd = [r for r in report.transcript if r.parity == "odd"]
    flipped = [r for r in odd if r.error]
    assert flipped, "expected at least one noisy odd round"
    # carrier still refreshes correctly afterwards: fidelity stays 1
    assert all(abs(r.carrier_fidelity - 1.0) <= 1e-10 for r in report.transcript)


def test_report_rates_consistency():
    report = protocol.run_session([0, 1] * 100, adversary.InterceptResend(), seed=21)
    records = report.transcript
    odd = [r for r in records if r.parity == "odd"]
    even = [r for r in records if r.parity == "even"]
    assert report.qber_odd == pytest.approx(
        sum(r.error for r in odd) / len(odd))
    assert report.qber_even == pytest.approx(
        sum(r.error for r in even) / len(even))
    assert report.qber_total == pytest.approx(
        sum(r.error for r in records) / len(records))
    assert report.receiver_disagreement_even == pytest.approx(
        sum(r.bob_bit != r.charlie_bit for r in even) / len(even))


def test_state_machine_guards():
    session = protocol.new_session(seed=0)
    with pytest.raises(protocol.StateMachineError):
        protocol.receivers_disentangle(session)
    with pytest.raises(protocol.StateMachineError):
        protocol.measure_and_reconstruct(session)
    protocol.alice_entangle(session, 0)
    with pytest.raises(protocol.StateMachineError):
        protocol.measure_and_reconstruct(session)


def test_run_session_rejects_bad_messages():
    with pytest.raises(ValueError):
        protocol.run_session([], seed=0)
    with pytest.raises(ValueError):
        protocol.run_session([0, 2], seed=0)


def test_transcript_csv_format():
    report = protocol.run_session([1, 0, 1], seed=4)
    buf = io.StringIO()
    protocol.write_transcript_csv(report.transcript, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ("round,parity,sent,bob_bit,charlie_bit,announced_by,"
                        "announced_bit,reconstructed,error,carrier_fidelity")
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "odd" and first[2] == "1"
    assert first[5] == "" and first[6] == ""      # no announcement on odd rounds
    assert first[7] == "11" and first[8] == "false"
    second = lines[2].split(",")
    assert second[1] == "even" and second[5] == "bob"


def test_report_json_fields():
    report = protocol.run_session([1, 0], seed=4)
    doc = report.to_dict()
    assert set(doc) == {"qber_odd", "qber_even", "qber_total", "qber_data_bits",
                        "receiver_disagreement_even", "detected", "rounds",
                        "seed", "config_echo", "eve"}
    assert doc["config_echo"]["message"] == "10"
    assert doc["config_echo"]["attack"] == {"variant": "none"}
