"""Cross-module self-verification: algebraic identities vs simulated runs.

Each check re-derives a protocol property along two independent routes and
compares them; the CLI `verify` subcommand renders the results as a pass/fail
table.  The switch-duality check accepts an override for the Hadamard matrix
as a fault-injection hook, so the suite itself can be shown to catch a
corrupted gate constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis, carriers, protocol, qsim


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _parity_pair(names: tuple[str, str], q: int) -> qsim.PureState:
    amps = np.zeros(4, dtype=np.complex128)
    amps[q] = 1.0 / np.sqrt(2.0)
    amps[2 + (1 - q)] = 1.0 / np.sqrt(2.0)
    return qsim.PureState(qsim.qubit_layout(*names), amps)


def check_switch_duality(hadamard_override: np.ndarray | None = None) -> CheckResult:
    """Triple Hadamard must map |G> to |E> and back, fidelity 1 within 1e-12."""
    matrix = qsim.HADAMARD if hadamard_override is None else hadamard_override

    def switch(state: qsim.PureState) -> qsim.PureState:
        for wire in carriers.CARRIER_WIRES:
            state = qsim.apply_single_qubit(state, wire, matrix)
        return state

    try:
        worst = max(abs(1.0 - qsim.fidelity(switch(carriers.ghz()), carriers.even_parity())),
                    abs(1.0 - qsim.fidelity(switch(carriers.even_parity()), carriers.ghz())))
    except ValueError as exc:  # a corrupted gate can break normalization
        return CheckResult("switch-duality", False, f"state invalid: {exc}")
    return CheckResult("switch-duality", worst <= 1e-12,
                       f"max fidelity deviation {worst:.3e}")


def check_cnot_pair_property() -> CheckResult:
    """Paired flips add the two-wire parities: C_a1 C_b2 |qbar>|q'bar>."""
    worst = 0.0
    for q in (0, 1):
        for qp in (0, 1):
            state = qsim.tensor_product(_parity_pair(("a", "b"), q),
                                        _parity_pair(("w1", "w2"), qp))
            state = qsim.apply_cnot(state, "a", "w1")
            state = qsim.apply_cnot(state, "b", "w2")
            expected = qsim.tensor_product(_parity_pair(("a", "b"), q),
                                           _parity_pair(("w1", "w2"), q ^ qp))
            worst = max(worst, float(np.abs(state.amps - expected.amps).max()))
    return CheckResult("cnot-pair-property", worst <= 1e-12,
                       f"max amplitude deviation {worst:.3e}")


def _transit_state(parity: str, q: int) -> qsim.PureState:
    session = protocol.new_session(seed=0)
    if parity == "even":
        protocol.refresh_carrier(session)
    protocol.alice_entangle(session, q)
    return session.state


def check_transit_secrecy() -> CheckResult:
    """In transit the data wires carry nothing about the bit value."""
    worst = 0.0
    for parity in ("odd", "even"):
        reductions = [qsim.reduced_density(_transit_state(parity, q), list(carriers.DATA_WIRES))
                      for q in (0, 1)]
        worst = max(worst, qsim.trace_distance(reductions[0], reductions[1]))
        for q in (0, 1):
            for wire in carriers.DATA_WIRES:
                rho = qsim.reduced_density(_transit_state(parity, q), [wire])
                worst = max(worst, qsim.trace_distance(rho, qsim.maximally_mixed(2)))
    return CheckResult("transit-secrecy", worst <= 1e-12,
                       f"max trace distance {worst:.3e}")


def check_pairing_identity(rng: np.random.Generator, samples: int = 200) -> CheckResult:
    """Both routes to the even-round error rate agree on random attacks."""
    worst = 0.0
    for k in range(samples):
        spec = analysis.EntanglingAttackSpec.random(rng, ancilla_dim=(1, 2, 4)[k % 3])
        lhs, rhs = analysis.pairing_identity(spec)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("pairing-identity", worst <= 1e-12,
                       f"max |lhs - rhs| {worst:.3e} over {samples} specs")


def check_analytic_vs_simulated(rng: np.random.Generator,
                                rounds: int = 4000) -> CheckResult:
    """Closed-form error rates must match Monte Carlo frequencies (3 s.e.)."""
    from . import adversary

    worst_sigma = 0.0
    for case in range(2):
        spec = analysis.EntanglingAttackSpec.random(rng, ancilla_dim=2)
        attack = adversary.Entangling(spec=spec, refresh_each_round=True)
        message = [int(b) for b in rng.integers(0, 2, size=rounds)]
        report = protocol.run_session(message, attack,
                                      seed=int(rng.integers(0, 2 ** 32)))
        for predicted, empirical, n in (
                (analysis.qber_odd(spec), report.qber_odd, (rounds + 1) // 2),
                (analysis.qber_even(analysis.hadamard_transform_branches(spec)),
                 report.qber_even, rounds // 2)):
            se = max(np.sqrt(predicted * (1 - predicted) / n), 1e-9)
            worst_sigma = max(worst_sigma, abs(empirical - predicted) / se)
    return CheckResult("analytic-vs-simulated-qber", worst_sigma <= 3.0,
                       f"worst deviation {worst_sigma:.2f} standard errors")


def run_checks(seed: int = 0,
               hadamard_override: np.ndarray | None = None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [
        check_switch_duality(hadamard_override),
        check_cnot_pair_property(),
        check_transit_secrecy(),
        check_pairing_identity(rng),
        check_analytic_vs_simulated(rng),
    ]
