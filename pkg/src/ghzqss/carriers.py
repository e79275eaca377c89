"""The protocol's special states: carriers, data encodings, carrier switch."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import qsim

CARRIER_WIRES = ("a", "b", "c")
DATA_WIRES = ("w1", "w2")

DEGRADED = "degraded"


class CarrierKind(enum.Enum):
    GHZ = "ghz"
    EVEN_PARITY = "even_parity"

    def toggled(self) -> "CarrierKind":
        return CarrierKind.EVEN_PARITY if self is CarrierKind.GHZ else CarrierKind.GHZ


class EncodingMode(enum.Enum):
    PRODUCT = "product"
    PARITY = "parity"


@dataclass(frozen=True)
class DataEncoding:
    """A classical bit together with the wire encoding used to send it."""

    mode: EncodingMode
    bit: int

    def state(self) -> qsim.PureState:
        if self.mode is EncodingMode.PRODUCT:
            return encode_product(self.bit)
        return encode_parity(self.bit)


def _require_bit(q: int) -> int:
    if q not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {q!r}")
    return q


def ghz() -> qsim.PureState:
    """(|000> + |111>)/sqrt(2) on the carrier wires."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = amps[7] = 1.0 / np.sqrt(2.0)
    return qsim.PureState(qsim.qubit_layout(*CARRIER_WIRES), amps)


def even_parity() -> qsim.PureState:
    """Uniform superposition of the four even-parity carrier basis states."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[[0, 3, 5, 6]] = 0.5
    return qsim.PureState(qsim.qubit_layout(*CARRIER_WIRES), amps)


def carrier_reference(kind: CarrierKind) -> qsim.PureState:
    return ghz() if kind is CarrierKind.GHZ else even_parity()


_REFERENCE_AMPS = {
    CarrierKind.GHZ: ghz().amps,
    CarrierKind.EVEN_PARITY: even_parity().amps,
}
for _amps in _REFERENCE_AMPS.values():
    _amps.flags.writeable = False


def reference_amps(kind: CarrierKind) -> np.ndarray:
    """Shared read-only amplitude vector of a reference carrier."""
    return _REFERENCE_AMPS[kind]


def encode_product(q: int) -> qsim.PureState:
    """|q,q> on the data wires; either receiver reads q alone."""
    _require_bit(q)
    return qsim.basis_state(qsim.qubit_layout(*DATA_WIRES), {"w1": q, "w2": q})


def encode_parity(q: int) -> qsim.PureState:
    """(|0,q> + |1,1+q>)/sqrt(2): every branch has two-wire parity q."""
    _require_bit(q)
    amps = np.zeros(4, dtype=np.complex128)
    amps[q] = 1.0 / np.sqrt(2.0)          # |0,q>
    amps[2 + (1 - q)] = 1.0 / np.sqrt(2.0)  # |1,1+q>
    return qsim.PureState(qsim.qubit_layout(*DATA_WIRES), amps)


def decode_parity(b1: int, b2: int) -> int:
    """Recombine the two receiver bits by addition mod 2."""
    return _require_bit(b1) ^ _require_bit(b2)


def switch_carrier(s: qsim.PureState) -> qsim.PureState:
    """Hadamard each carrier wire; toggles |G> <-> |E>, other wires untouched."""
    out = s
    for wire in CARRIER_WIRES:
        out = qsim.apply_hadamard(out, wire)
    return out


def classify_carrier(s: qsim.PureState, tolerance: float = 1e-6):
    """Name the carrier if its reduction is within tolerance of |G> or |E>.

    Returns a CarrierKind, or the string "degraded" when neither reference
    reaches fidelity 1 - tolerance.
    """
    if not 0.0 < tolerance < 1.0:
        raise ValueError("tolerance must lie in (0, 1)")
    rho = qsim.reduced_density(s, list(CARRIER_WIRES))
    for kind in (CarrierKind.GHZ, CarrierKind.EVEN_PARITY):
        if qsim.dm_fidelity_pure(rho, carrier_reference(kind)) >= 1.0 - tolerance:
            return kind
    return DEGRADED
