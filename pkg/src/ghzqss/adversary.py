"""Attack models: intercept-resend, carrier entangling, receiver cheating."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, carriers, qsim


@dataclass(frozen=True)
class NoAttack:
    def to_dict(self) -> dict:
        return {"variant": "none"}


@dataclass(frozen=True)
class InterceptResend:
    """Measure the flying wires in the computational basis and resend."""

    rounds: str | frozenset[int] = "all"
    wires: tuple[str, ...] = ("w1", "w2")

    def __post_init__(self):
        if not self.wires:
            raise ValueError("intercept-resend needs at least one wire")
        bad = set(self.wires) - set(carriers.DATA_WIRES)
        if bad:
            raise ValueError(f"unknown flying wires {sorted(bad)}")
        if self.rounds != "all" and not isinstance(self.rounds, frozenset):
            object.__setattr__(self, "rounds", frozenset(self.rounds))

    def applies_to(self, round_index: int) -> bool:
        return self.rounds == "all" or round_index in self.rounds

    def to_dict(self) -> dict:
        rounds = "all" if self.rounds == "all" else sorted(self.rounds)
        return {"variant": "intercept_resend", "rounds": rounds,
                "wires": list(self.wires)}


@dataclass(frozen=True)
class CheatSpec:
    """A receiver announces a bit unrelated to his measurement."""

    who: str = "bob"
    mode: str = "random"  # random: fair coin; flip: always the wrong bit

    def __post_init__(self):
        if self.who not in ("bob", "charlie"):
            raise ValueError(f"cheater must be bob or charlie, got {self.who!r}")
        if self.mode not in ("flip", "random"):
            raise ValueError(f"cheat mode must be flip or random, got {self.mode!r}")

    def to_dict(self) -> dict:
        return {"variant": "cheat", "who": self.who, "mode": self.mode}


@dataclass(frozen=True)
class Entangling:
    """Replace the carrier(+ancilla) with a branch-entangled attack state."""

    spec: analysis.EntanglingAttackSpec
    refresh_each_round: bool = True

    def to_dict(self) -> dict:
        doc = self.spec.to_dict()
        return {"variant": "entangling",
                "refresh_each_round": self.refresh_each_round, **doc}


AttackSpec = NoAttack | InterceptResend | Entangling | CheatSpec


@dataclass
class EveLedger:
    """What the simulator knows about Eve's knowledge for one session."""

    observations: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    branch_overlap: float | None = None

    def record(self, alice_bit: int, observed: tuple[int, ...]) -> None:
        self.observations.append((alice_bit, observed))

    def mutual_information_bits(self) -> float:
        return mutual_information(self.observations)


def mutual_information(pairs: list[tuple[int, tuple[int, ...]]]) -> float:
    """Empirical mutual information (bits) between sent bits and observations."""
    if not pairs:
        return 0.0
    n = len(pairs)
    joint: dict[tuple, int] = {}
    px: dict[int, int] = {}
    py: dict[tuple, int] = {}
    for x, y in pairs:
        joint[(x, y)] = joint.get((x, y), 0) + 1
        px[x] = px.get(x, 0) + 1
        py[y] = py.get(y, 0) + 1
    mi = 0.0
    for (x, y), c in joint.items():
        p_xy = c / n
        mi += p_xy * math.log2(p_xy * n * n / (px[x] * py[y]))
    return max(0.0, mi)


def intercept_resend(state: qsim.PureState, wires: tuple[str, ...],
                     rng: np.random.Generator,
                     ledger: EveLedger | None = None,
                     alice_bit: int | None = None) -> qsim.PureState:
    """Collapse the flying wires to a sampled computational-basis branch.

    Resending fresh qubits in the measured basis state is the same map as
    keeping the post-measurement state, so that is what is returned.  The
    observed bits go to the ledger when one is supplied.
    """
    outcome = qsim.measure_computational(state, list(wires), rng)
    if ledger is not None:
        ledger.record(0 if alice_bit is None else alice_bit, tuple(outcome.bits))
    return outcome.post_state


def cheat_declaration(true_bit: int, spec: CheatSpec, rng: np.random.Generator) -> int:
    """The announced bit under a cheating declaration."""
    if true_bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {true_bit!r}")
    if spec.mode == "flip":
        return 1 - true_bit
    return int(rng.integers(0, 2))


def install_entangling_attack(session, attack: Entangling) -> None:
    """Overwrite the session's carrier(+ancilla) with the attack state.

    Only legal at a round start, before the data wires exist; the attack
    state is switched into its even-round form on even rounds.
    """
    if getattr(session, "phase", "round_start") != "round_start":
        raise RuntimeError("entangling attack can only be installed at a round start")
    if attack.spec.ancilla_dim != session.ancilla_dim:
        raise ValueError(
            f"attack ancilla_dim {attack.spec.ancilla_dim} does not match "
            f"session ancilla_dim {session.ancilla_dim}")
    even_round = session.round_index % 2 == 0
    session.state = analysis.attack_state(attack.spec, even_round=even_round)


# ---------------------------------------------------------------------------
# JSON loading
# ---------------------------------------------------------------------------

def attack_from_dict(doc: dict) -> AttackSpec:
    variant = doc.get("variant")
    if variant == "none":
        return NoAttack()
    if variant == "intercept_resend":
        rounds = doc.get("rounds", "all")
        if rounds != "all":
            rounds = frozenset(int(r) for r in rounds)
        wires = tuple(doc.get("wires", list(carriers.DATA_WIRES)))
        return InterceptResend(rounds=rounds, wires=wires)
    if variant == "entangling":
        spec = analysis.EntanglingAttackSpec.from_dict(doc)
        return Entangling(spec=spec,
                          refresh_each_round=bool(doc.get("refresh_each_round", True)))
    if variant == "cheat":
        return CheatSpec(who=doc.get("who", "bob"), mode=doc.get("mode", "random"))
    raise ValueError(f"unknown attack variant {variant!r}")


def load_attack_json(path: str) -> AttackSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return attack_from_dict(json.load(fh))
