"""Round-based session engine: entangle, transmit, disentangle, measure.

A session owns a persistent carrier state shared by the three parties.  Each
round adjoins two fresh data wires, entangles them to the carrier, exposes
them to the channel (the attack injection point), disentangles and measures
them at the receivers, then refreshes the carrier with Hadamards so the next
round sees the alternate carrier.  Data wires are discarded after
measurement, so the register dimension stays bounded no matter how long the
message is.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import adversary, carriers, qsim
from .carriers import CARRIER_WIRES, DATA_WIRES, CarrierKind

CANONICAL_ORDER = ("a", "b", "c", "w1", "w2", "e")


class StateMachineError(RuntimeError):
    """A protocol step was invoked out of order."""


@dataclass(frozen=True)
class DetectionPolicy:
    """Public comparison of a sampled subsequence of sent vs received bits."""

    sample_fraction: float = 0.2
    abort_threshold: float = 0.05
    min_samples: int = 50

    def __post_init__(self):
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ValueError("sample_fraction must lie in (0, 1]")
        if not 0.0 < self.abort_threshold < 1.0:
            raise ValueError("abort_threshold must lie in (0, 1)")
        if self.min_samples < 1:
            raise ValueError("min_samples must be positive")

    def to_dict(self) -> dict:
        return {"sample_fraction": self.sample_fraction,
                "abort_threshold": self.abort_threshold,
                "min_samples": self.min_samples}


@dataclass
class RoundRecord:
    round: int
    parity: str                    # "odd" | "even"
    sent: int
    bob_bit: int                   # Bob's measured bit (wire 1)
    charlie_bit: int               # Charlie's measured bit (wire 2)
    announced_by: str | None       # even rounds only
    announced_bit: int | None      # possibly cheated declaration
    reconstructed: tuple[int, int] | int
    error: bool
    carrier_fidelity: float


@dataclass
class SessionReport:
    qber_odd: float
    qber_even: float
    qber_total: float
    qber_data_bits: float
    receiver_disagreement_even: float
    detected: bool
    rounds: int
    seed: int
    config_echo: dict
    eve: dict
    transcript: list[RoundRecord]

    def to_dict(self) -> dict:
        """JSON-ready view mirroring the report fields (transcript excluded)."""
        return {
            "qber_odd": self.qber_odd,
            "qber_even": self.qber_even,
            "qber_total": self.qber_total,
            "qber_data_bits": self.qber_data_bits,
            "receiver_disagreement_even": self.receiver_disagreement_even,
            "detected": self.detected,
            "rounds": self.rounds,
            "seed": self.seed,
            "config_echo": self.config_echo,
            "eve": self.eve,
        }


@dataclass
class Session:
    state: qsim.PureState
    round_index: int
    expected_carrier: CarrierKind
    rng: np.random.Generator
    ancilla_dim: int
    seed: int
    announcer: str = "bob"
    noise_p: float = 0.0
    phase: str = "round_start"
    transcript: list[RoundRecord] = field(default_factory=list)
    _pending_sent: int = 0
    _pending_fidelity: float = 0.0
    # layouts are fixed per session; cached to keep the round loop lean
    _layout_bare: qsim.RegisterLayout = None
    _layout_full: qsim.RegisterLayout = None

    @property
    def parity(self) -> str:
        return "odd" if self.round_index % 2 == 1 else "even"


def new_session(seed: int, ancilla_dim: int = 1, *, announcer: str = "bob",
                noise_p: float = 0.0) -> Session:
    """Fresh session: GHZ carrier, round 1, optional trivial ancilla."""
    if ancilla_dim < 1 or ancilla_dim > 64:
        raise ValueError("ancilla_dim must lie in [1, 64]")
    if announcer not in ("bob", "charlie"):
        raise ValueError(f"announcer must be bob or charlie, got {announcer!r}")
    if not 0.0 <= noise_p <= 0.5:
        raise ValueError("noise_p must lie in [0, 0.5]")
    state = carriers.ghz()
    if ancilla_dim > 1:
        ancilla = qsim.PureState(
            qsim.RegisterLayout((("e", ancilla_dim),)),
            np.eye(1, ancilla_dim, dtype=np.complex128)[0])
        state = qsim.tensor_product(state, ancilla)
    bare = state.layout
    with_wires = [(w, 2) for w in CARRIER_WIRES] + [(w, 2) for w in DATA_WIRES]
    if ancilla_dim > 1:
        with_wires.append(("e", ancilla_dim))
    return Session(state=state, round_index=1, expected_carrier=CarrierKind.GHZ,
                   rng=np.random.default_rng(seed), ancilla_dim=ancilla_dim,
                   seed=seed, announcer=announcer, noise_p=noise_p,
                   _layout_bare=bare,
                   _layout_full=qsim.RegisterLayout(tuple(with_wires)))


def carrier_fidelity(session: Session) -> float:
    """Fidelity of the carrier reduction with the expected carrier state.

    Uses <ref|rho|ref> = |M^dagger ref|^2 with M the amplitudes reshaped to
    (carrier, rest), which avoids forming the 8x8 reduction each round.
    """
    m = session.state.amps.reshape(8, -1)
    ref = carriers.reference_amps(session.expected_carrier)
    v = ref.conj() @ m
    return float(np.vdot(v, v).real)


def alice_entangle(session: Session, q: int) -> None:
    """Adjoin freshly encoded data wires and entangle them to the carrier.

    Odd rounds entangle |q,q> with two carrier-controlled flips; even rounds
    entangle the parity encoding with a single one.
    """
    if q not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {q!r}")
    if session.phase != "round_start":
        raise StateMachineError(f"cannot entangle in phase {session.phase!r}")
    if any(w in session.state.layout.names for w in DATA_WIRES):
        raise StateMachineError("data wires already present")
    session._pending_fidelity = carrier_fidelity(session)
    session._pending_sent = q
    odd = session.parity == "odd"
    encoded = carriers.encode_product(q) if odd else carriers.encode_parity(q)
    # Adjoin in canonical order (a, b, c, w1, w2, e): outer product against
    # the wire amplitudes, then move the ancilla axis behind the wires.
    d = session.ancilla_dim
    amps = np.outer(session.state.amps, encoded.amps)
    if d > 1:
        amps = amps.reshape(8, d, 4).swapaxes(1, 2)
    joint = qsim.PureState(session._layout_full, amps.reshape(-1))
    joint = qsim.apply_cnot(joint, "a", "w1")
    if odd:
        joint = qsim.apply_cnot(joint, "a", "w2")
    session.state = joint
    session.phase = "entangled"


def transmit(session: Session, attack: adversary.AttackSpec,
             ledger: adversary.EveLedger | None = None) -> None:
    """Expose the flying wires to the channel: attack action, then noise."""
    if session.phase != "entangled":
        raise StateMachineError(f"cannot transmit in phase {session.phase!r}")
    if isinstance(attack, adversary.InterceptResend) and \
            attack.applies_to(session.round_index):
        session.state = adversary.intercept_resend(
            session.state, attack.wires, session.rng,
            ledger=ledger, alice_bit=session._pending_sent)
    if session.noise_p > 0.0:
        for wire in DATA_WIRES:
            if session.rng.random() < session.noise_p:
                session.state = qsim.apply_pauli_x(session.state, wire)
    session.phase = "transmitted"


def receivers_disentangle(session: Session) -> None:
    """Bob and Charlie undo the carrier entanglement with their own flips."""
    if session.phase != "transmitted":
        raise StateMachineError(f"cannot disentangle in phase {session.phase!r}")
    state = qsim.apply_cnot(session.state, "b", "w1")
    state = qsim.apply_cnot(state, "c", "w2")
    session.state = state
    session.phase = "disentangled"


def measure_and_reconstruct(session: Session,
                            cheat: adversary.CheatSpec | None = None) -> RoundRecord:
    """Measure both data wires, announce/reconstruct, drop the wires.

    Odd rounds: each receiver reads his own copy, no announcement.  Even
    rounds: the announcer declares his bit (possibly cheated) and the other
    party reconstructs by XOR; the error flag compares the jointly declared
    value against Alice's bit.
    """
    if session.phase != "disentangled":
        raise StateMachineError(f"cannot measure in phase {session.phase!r}")
    outcome = qsim.measure_computational(session.state, list(DATA_WIRES), session.rng)
    m1, m2 = outcome.bits
    # Wires sit between the carrier and the ancilla; after projection the
    # surviving amplitudes live in one wire block, so dropping is a slice.
    d = session.ancilla_dim
    block = outcome.post_state.amps.reshape(8, 4, d)[:, m1 * 2 + m2, :]
    session.state = qsim.PureState(session._layout_bare,
                                   np.ascontiguousarray(block).reshape(-1))

    q = session._pending_sent
    if session.parity == "odd":
        record = RoundRecord(
            round=session.round_index, parity="odd", sent=q,
            bob_bit=m1, charlie_bit=m2, announced_by=None, announced_bit=None,
            reconstructed=(m1, m2), error=(m1, m2) != (q, q),
            carrier_fidelity=session._pending_fidelity)
    else:
        announcer = session.announcer
        true_bit = m1 if announcer == "bob" else m2
        announced = true_bit
        if cheat is not None and cheat.who == announcer:
            announced = adversary.cheat_declaration(true_bit, cheat, session.rng)
        other_bit = m2 if announcer == "bob" else m1
        reconstructed = announced ^ other_bit
        record = RoundRecord(
            round=session.round_index, parity="even", sent=q,
            bob_bit=m1, charlie_bit=m2, announced_by=announcer,
            announced_bit=announced, reconstructed=reconstructed,
            error=reconstructed != q,
            carrier_fidelity=session._pending_fidelity)
    session.transcript.append(record)
    session.phase = "round_done"
    return record


def refresh_carrier(session: Session) -> None:
    """End-of-round Hadamards: toggles the carrier and the expected kind."""
    if session.phase not in ("round_done", "round_start"):
        raise StateMachineError(f"cannot refresh in phase {session.phase!r}")
    session.state = carriers.switch_carrier(session.state)
    session.round_index += 1
    session.expected_carrier = session.expected_carrier.toggled()
    session.phase = "round_start"


def detect(transcript: list[RoundRecord], policy: DetectionPolicy,
           rng: np.random.Generator) -> bool:
    """Compare a sampled subsequence; abort when its error rate is too high."""
    n = len(transcript)
    if n == 0:
        return False
    k = min(n, math.ceil(policy.sample_fraction * n))
    if k < policy.min_samples:
        return False
    picked = rng.choice(n, size=k, replace=False)
    errors = sum(1 for i in picked if transcript[int(i)].error)
    return errors / k > policy.abort_threshold


def run_session(message, attack: adversary.AttackSpec | None = None,
                policy: DetectionPolicy | None = None, seed: int = 0, *,
                noise_p: float = 0.0, announcer: str = "bob",
                ancilla_dim: int | None = None) -> SessionReport:
    """Execute one round per message bit and aggregate the round statistics."""
    message = [int(b) for b in message]
    if not message:
        raise ValueError("message must be non-empty")
    if any(b not in (0, 1) for b in message):
        raise ValueError("message must consist of bits")
    if attack is None:
        attack = adversary.NoAttack()
    if policy is None:
        policy = DetectionPolicy()
    if ancilla_dim is None:
        ancilla_dim = attack.spec.ancilla_dim \
            if isinstance(attack, adversary.Entangling) else 1

    session = new_session(seed, ancilla_dim, announcer=announcer, noise_p=noise_p)
    ledger = adversary.EveLedger()
    if isinstance(attack, adversary.Entangling):
        eta = attack.spec.eta
        n0, n7 = np.linalg.norm(eta[0]), np.linalg.norm(eta[7])
        if n0 > 0 and n7 > 0:
            ledger.branch_overlap = float(abs(np.vdot(eta[0], eta[7])) / (n0 * n7))
    cheat = attack if isinstance(attack, adversary.CheatSpec) else None

    for q in message:
        if isinstance(attack, adversary.Entangling) and \
                (session.round_index == 1 or attack.refresh_each_round):
            adversary.install_entangling_attack(session, attack)
        alice_entangle(session, q)
        transmit(session, attack, ledger=ledger)
        receivers_disentangle(session)
        measure_and_reconstruct(session, cheat)
        refresh_carrier(session)

    detected = detect(session.transcript, policy, session.rng)
    return _build_report(session, attack, policy, message, noise_p, ledger, detected)


def _build_report(session: Session, attack, policy, message, noise_p,
                  ledger, detected: bool) -> SessionReport:
    records = session.transcript
    odd = [r for r in records if r.parity == "odd"]
    even = [r for r in records if r.parity == "even"]

    def rate(items) -> float:
        return sum(1 for r in items if r.error) / len(items) if items else 0.0

    bit_errors = 0
    bit_count = 0
    for r in records:
        if r.parity == "odd":
            bit_errors += (r.bob_bit != r.sent) + (r.charlie_bit != r.sent)
            bit_count += 2
        else:
            bit_errors += int(r.reconstructed != r.sent)
            bit_count += 1
    disagreement = (sum(1 for r in even if r.bob_bit != r.charlie_bit) / len(even)
                    if even else 0.0)

    config_echo = {
        "message": "".join(str(b) for b in message),
        "attack": attack.to_dict(),
        "policy": policy.to_dict(),
        "seed": session.seed,
        "noise_p": noise_p,
        "announcer": session.announcer,
        "ancilla_dim": session.ancilla_dim,
    }
    eve = {
        "observations": len(ledger.observations),
        "mutual_information_bits": ledger.mutual_information_bits(),
        "branch_overlap": ledger.branch_overlap,
    }
    return SessionReport(
        qber_odd=rate(odd), qber_even=rate(even), qber_total=rate(records),
        qber_data_bits=bit_errors / bit_count,
        receiver_disagreement_even=disagreement,
        detected=detected, rounds=len(records), seed=session.seed,
        config_echo=config_echo, eve=eve, transcript=records)


# ---------------------------------------------------------------------------
# transcript / report export
# ---------------------------------------------------------------------------

TRANSCRIPT_COLUMNS = ["round", "parity", "sent", "bob_bit", "charlie_bit",
                      "announced_by", "announced_bit", "reconstructed",
                      "error", "carrier_fidelity"]


def write_transcript_csv(records: list[RoundRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRANSCRIPT_COLUMNS)
    for r in records:
        rec = "".join(str(b) for b in r.reconstructed) \
            if isinstance(r.reconstructed, tuple) else str(r.reconstructed)
        writer.writerow([
            r.round, r.parity, r.sent, r.bob_bit, r.charlie_bit,
            r.announced_by or "",
            "" if r.announced_bit is None else r.announced_bit,
            rec, "true" if r.error else "false", repr(r.carrier_fidelity)])
