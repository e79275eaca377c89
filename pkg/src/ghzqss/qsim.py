"""Dense state-vector kernel for small named registers.

Registers are ordered lists of named subsystems; the first subsystem is the
most significant in basis-index arithmetic.  Qubit wires have dimension 2,
the optional eavesdropper ancilla may have any dimension up to 64.  All
operations are value-in / value-out; the only mutable input is the explicit
random generator used for measurement sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

NORM_TOL = 1e-10
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


class LayoutError(ValueError):
    """A wire name or dimension does not fit the register layout."""


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered (name, dim) subsystems; first name is most significant."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.subsystems]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate subsystem names in {names}")
        for name, dim in self.subsystems:
            if dim < 1:
                raise LayoutError(f"subsystem {name!r} has non-positive dim {dim}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.subsystems)

    @property
    def total_dim(self) -> int:
        out = 1
        for _, dim in self.subsystems:
            out *= dim
        return out

    def axis(self, name: str) -> int:
        for k, (n, _) in enumerate(self.subsystems):
            if n == name:
                return k
        raise LayoutError(f"no subsystem named {name!r} in {self.names}")

    def dim(self, name: str) -> int:
        return self.subsystems[self.axis(name)][1]

    def stride(self, name: str) -> int:
        """Element stride of a subsystem: product of dims after it."""
        k = self.axis(name)
        out = 1
        for _, dim in self.subsystems[k + 1:]:
            out *= dim
        return out

    def require_qubit(self, name: str) -> None:
        if self.dim(name) != 2:
            raise LayoutError(f"subsystem {name!r} has dim {self.dim(name)}, need a qubit")


def qubit_layout(*names: str) -> RegisterLayout:
    return RegisterLayout(tuple((n, 2) for n in names))


@dataclass
class PureState:
    """Normalized complex amplitude vector over a register layout."""

    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.amps, np.ndarray) and self.amps.dtype == np.complex128
                and self.amps.flags.c_contiguous):
            self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (self.layout.total_dim,):
            raise LayoutError(
                f"amplitude vector has shape {self.amps.shape}, layout needs "
                f"({self.layout.total_dim},)")
        # A single reduction covers both invariants: any NaN/Inf amplitude
        # makes the squared norm non-finite, which fails the (inverted)
        # comparison below just like a norm defect does.
        sq = np.vdot(self.amps, self.amps).real
        if not abs(np.sqrt(sq) - 1.0) <= NORM_TOL:
            raise ValueError(f"state norm deviates from 1 beyond {NORM_TOL}: |amps|={sq}")

    def copy(self) -> "PureState":
        return PureState(self.layout, self.amps.copy())


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace matrix on a flat index space."""

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        self.entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"density matrix must be square, got {self.entries.shape}")
        self.dim = self.entries.shape[0]
        if np.abs(self.entries - self.entries.conj().T).max() > NORM_TOL:
            raise ValueError("density matrix not Hermitian within tolerance")
        tr = np.trace(self.entries).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {tr} deviates from 1")

    def validate_psd(self, tol: float = 1e-10) -> None:
        lo = np.linalg.eigvalsh(self.entries).min()
        if lo < -tol:
            raise ValueError(f"density matrix has eigenvalue {lo} below -{tol}")


@dataclass
class MeasurementOutcome:
    """Sampled computational-basis result on a set of qubit wires."""

    bits: list[int]
    probability: float
    post_state: PureState


def basis_state(layout: RegisterLayout, digits: dict[str, int]) -> PureState:
    """Basis state with the given digit per subsystem (default 0)."""
    index = 0
    for name, dim in layout.subsystems:
        d = digits.get(name, 0)
        if not 0 <= d < dim:
            raise LayoutError(f"digit {d} out of range for {name!r} (dim {dim})")
        index = index * dim + d
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(layout, amps)


def tensor_product(s1: PureState, s2: PureState) -> PureState:
    """Joint state with s1's subsystems followed by s2's."""
    common = set(s1.layout.names) & set(s2.layout.names)
    if common:
        raise LayoutError(f"subsystem names {sorted(common)} appear in both factors")
    layout = RegisterLayout(s1.layout.subsystems + s2.layout.subsystems)
    return PureState(layout, np.kron(s1.amps, s2.amps))


def permute_subsystems(s: PureState, order: tuple[str, ...]) -> PureState:
    """Reorder the register; amplitudes move with their subsystems."""
    if sorted(order) != sorted(s.layout.names):
        raise LayoutError(f"order {order} is not a permutation of {s.layout.names}")
    axes = [s.layout.axis(name) for name in order]
    reshaped = s.amps.reshape(s.layout.dims)
    moved = np.transpose(reshaped, axes)
    layout = RegisterLayout(tuple(s.layout.subsystems[a] for a in axes))
    return PureState(layout, np.ascontiguousarray(moved).reshape(-1))


def apply_single_qubit(s: PureState, wire: str, matrix: np.ndarray) -> PureState:
    """Apply a 2x2 matrix to one qubit wire."""
    s.layout.require_qubit(wire)
    m = np.asarray(matrix, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"single-qubit matrix must be 2x2, got {m.shape}")
    amps = s.amps.copy()
    kernels.apply_1q(amps, s.layout.stride(wire),
                     m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return PureState(s.layout, amps)


def apply_hadamard(s: PureState, wire: str) -> PureState:
    return apply_single_qubit(s, wire, HADAMARD)


def apply_pauli_x(s: PureState, wire: str) -> PureState:
    return apply_single_qubit(s, wire, PAULI_X)


def apply_cnot(s: PureState, control: str, target: str) -> PureState:
    """Flip the target qubit on basis states whose control qubit is 1."""
    if control == target:
        raise LayoutError("control and target must differ")
    s.layout.require_qubit(control)
    s.layout.require_qubit(target)
    amps = s.amps.copy()
    kernels.apply_cnot(amps, s.layout.stride(control), s.layout.stride(target))
    return PureState(s.layout, amps)


def measure_computational(s: PureState, wires: list[str],
                          rng: np.random.Generator) -> MeasurementOutcome:
    """Sample a computational-basis outcome on the given qubit wires.

    The reported probability is the squared norm of the projected branch
    before renormalization; the post state is the renormalized projection.
    """
    for w in wires:
        s.layout.require_qubit(w)
    amps = s.amps.copy()
    mass = float(np.vdot(amps, amps).real)
    bits: list[int] = []
    for w in wires:
        stride = s.layout.stride(w)
        p1 = kernels.prob_one(amps, stride)
        bit = 1 if rng.random() < p1 / mass else 0
        mass = kernels.project_bit(amps, stride, bit)
        if mass <= 0.0:
            raise RuntimeError("projected branch has zero norm")
        bits.append(bit)
    post = PureState(s.layout, amps / np.sqrt(mass))
    return MeasurementOutcome(bits=bits, probability=mass, post_state=post)


def drop_subsystem(s: PureState, wire: str, digit: int) -> PureState:
    """Remove a subsystem whose state is the given basis digit.

    Requires all amplitude mass to sit on that digit (e.g. right after a
    projective measurement of the wire).
    """
    axis = s.layout.axis(wire)
    reshaped = s.amps.reshape(s.layout.dims)
    taken = np.take(reshaped, digit, axis=axis)
    rest = np.delete(reshaped, digit, axis=axis)
    if rest.size and np.abs(rest).max() > 1e-9:
        raise RuntimeError(f"subsystem {wire!r} is not in basis state {digit}")
    layout = RegisterLayout(tuple(
        sub for k, sub in enumerate(s.layout.subsystems) if k != axis))
    amps = np.ascontiguousarray(taken).reshape(-1)
    return PureState(layout, amps / np.linalg.norm(amps))


def reduced_density(s: PureState, keep: list[str]) -> DensityMatrix:
    """Partial trace onto the kept subsystems, in the order listed."""
    if not keep:
        raise ValueError("keep set must be non-empty")
    keep_axes = [s.layout.axis(name) for name in keep]
    if len(set(keep_axes)) != len(keep_axes):
        raise LayoutError(f"repeated names in keep set {keep}")
    other_axes = [k for k in range(len(s.layout.subsystems)) if k not in keep_axes]
    reshaped = s.amps.reshape(s.layout.dims)
    moved = np.transpose(reshaped, keep_axes + other_axes)
    keep_dim = 1
    for a in keep_axes:
        keep_dim *= s.layout.dims[a]
    m = moved.reshape(keep_dim, -1)
    return DensityMatrix(m @ m.conj().T)


def fidelity(s1: PureState, s2: PureState) -> float:
    """|<s1|s2>|^2 for equal-dimension pure states."""
    if s1.layout.total_dim != s2.layout.total_dim:
        raise ValueError("states have different dimensions")
    return float(abs(np.vdot(s1.amps, s2.amps)) ** 2)


def dm_fidelity_pure(m: DensityMatrix, s: PureState) -> float:
    """<s|rho|s>, the fidelity of a density matrix with a pure reference."""
    if m.dim != s.layout.total_dim:
        raise ValueError("dimension mismatch")
    return float(np.vdot(s.amps, m.entries @ s.amps).real)


def trace_distance(m1: DensityMatrix, m2: DensityMatrix) -> float:
    """Half the trace norm of the difference; 0 for identical matrices."""
    if m1.dim != m2.dim:
        raise ValueError("density matrices have different dimensions")
    eigs = np.linalg.eigvalsh(m1.entries - m2.entries)
    return float(0.5 * np.abs(eigs).sum())


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)
