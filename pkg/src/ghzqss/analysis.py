"""Closed-form error-rate analysis of carrier-entangling attacks.

The attacker correlates an ancilla with the three carrier qubits, writing the
joint state as eight un-normalized branch vectors indexed by the carrier
basis value under the (a, b, c) convention with `a` most significant.  This
module evaluates the odd- and even-round error rates of such an attack in
closed form, relates the two round types through the carrier switch, and
certifies by randomized search that any attack yielding information cannot
push the round-averaged error rate below 25%.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import carriers, qsim

BRANCH_COUNT = 8
# Odd rounds decode correctly only on the all-0/all-1 carrier branches.
HONEST_BRANCHES = (0, 7)
ODD_ERROR_BRANCHES = (1, 2, 3, 4, 5, 6)
# Even rounds flip the decoded parity exactly on odd-parity carrier branches.
EVEN_ERROR_BRANCHES = (1, 2, 4, 7)
COMPLEMENT_PAIRS = ((0, 7), (1, 6), (2, 5), (3, 4))

NORM_TOL = 1e-10


def _branch_weights(vectors: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(vectors) ** 2, axis=1)


def _check_normalized(vectors: np.ndarray, what: str) -> None:
    total = float(_branch_weights(vectors).sum())
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"{what} branch weights sum to {total}, need 1 within {NORM_TOL}")


@dataclass
class EntanglingAttackSpec:
    """Eight ancilla branch vectors defining a carrier-entangling attack."""

    eta: np.ndarray  # shape (8, ancilla_dim), complex
    ancilla_dim: int = field(init=False)

    def __post_init__(self):
        self.eta = np.ascontiguousarray(self.eta, dtype=np.complex128)
        if self.eta.ndim != 2 or self.eta.shape[0] != BRANCH_COUNT:
            raise ValueError(f"eta must have shape (8, d), got {self.eta.shape}")
        self.ancilla_dim = self.eta.shape[1]
        _check_normalized(self.eta, "attack spec")

    def branch_weights(self) -> np.ndarray:
        return _branch_weights(self.eta)

    def to_dict(self) -> dict:
        return {
            "ancilla_dim": self.ancilla_dim,
            "eta": [[[float(z.real), float(z.imag)] for z in row] for row in self.eta],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EntanglingAttackSpec":
        rows = doc["eta"]
        if len(rows) != BRANCH_COUNT:
            raise ValueError(f"eta must list 8 branch vectors, got {len(rows)}")
        eta = np.array([[complex(re, im) for re, im in row] for row in rows],
                       dtype=np.complex128)
        if "ancilla_dim" in doc and doc["ancilla_dim"] != eta.shape[1]:
            raise ValueError("ancilla_dim does not match eta vector length")
        return cls(eta=eta)

    @classmethod
    def honest(cls, ancilla_dim: int = 1) -> "EntanglingAttackSpec":
        """No-information spec: equal honest branches, no error branches."""
        eta = np.zeros((BRANCH_COUNT, ancilla_dim), dtype=np.complex128)
        eta[0, 0] = eta[7, 0] = 1.0 / np.sqrt(2.0)
        return cls(eta=eta)

    @classmethod
    def random(cls, rng: np.random.Generator, ancilla_dim: int) -> "EntanglingAttackSpec":
        raw = rng.normal(size=(BRANCH_COUNT, ancilla_dim)) \
            + 1j * rng.normal(size=(BRANCH_COUNT, ancilla_dim))
        return cls(eta=raw / np.linalg.norm(raw))


@dataclass
class XiVectors:
    """Branch vectors of the attack state after the carrier switch."""

    xi: np.ndarray

    def __post_init__(self):
        self.xi = np.ascontiguousarray(self.xi, dtype=np.complex128)
        if self.xi.ndim != 2 or self.xi.shape[0] != BRANCH_COUNT:
            raise ValueError(f"xi must have shape (8, d), got {self.xi.shape}")
        _check_normalized(self.xi, "transformed")

    def branch_weights(self) -> np.ndarray:
        return _branch_weights(self.xi)


@dataclass
class BoundSearchResult:
    best_spec: EntanglingAttackSpec
    best_average: float
    epsilon: float
    evaluations: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "best_average": self.best_average,
            "epsilon": self.epsilon,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "best_spec": self.best_spec.to_dict(),
        }


def qber_odd(spec: EntanglingAttackSpec) -> float:
    """Odd-round error rate: total weight off the honest branch pair."""
    w = spec.branch_weights()
    return float(w[list(ODD_ERROR_BRANCHES)].sum())


def hadamard_transform_branches(spec: EntanglingAttackSpec) -> XiVectors:
    """Branch vectors after Hadamards on all three carrier qubits.

    xi_j = (1 / 2 sqrt 2) * sum_i (-1)^(i.j) eta_i with i.j the bitwise
    inner product; applying the transform twice returns the original
    branches.
    """
    signs = np.empty((BRANCH_COUNT, BRANCH_COUNT))
    for j in range(BRANCH_COUNT):
        for i in range(BRANCH_COUNT):
            signs[j, i] = -1.0 if bin(i & j).count("1") % 2 else 1.0
    xi = (signs @ spec.eta) / (2.0 * np.sqrt(2.0))
    return XiVectors(xi=xi)


def qber_even(xi: XiVectors) -> float:
    """Even-round error rate: weight on the odd-parity carrier branches."""
    w = xi.branch_weights()
    return float(w[list(EVEN_ERROR_BRANCHES)].sum())


def pairing_identity(spec: EntanglingAttackSpec) -> tuple[float, float]:
    """Two routes to the even-round error rate.

    lhs evaluates the transformed branches directly; rhs is half the sum of
    squared differences over bitwise-complement branch pairs.  The contract
    is lhs == rhs within 1e-12.
    """
    lhs = qber_even(hadamard_transform_branches(spec))
    rhs = 0.0
    for i, j in COMPLEMENT_PAIRS:
        diff = spec.eta[i] - spec.eta[j]
        rhs += float(np.vdot(diff, diff).real)
    return lhs, 0.5 * rhs


def average_qber(spec: EntanglingAttackSpec) -> float:
    """Mean of the odd- and even-round error rates."""
    return 0.5 * (qber_odd(spec) + qber_even(hadamard_transform_branches(spec)))


def distinguishability(spec: EntanglingAttackSpec) -> float:
    """1 - |overlap| of the normalized honest branch states.

    0 means the attacker's honest-branch states are identical (she learns
    nothing); 1 means orthogonal (perfect information).
    """
    n0 = np.linalg.norm(spec.eta[0])
    n7 = np.linalg.norm(spec.eta[7])
    if n0 == 0.0 or n7 == 0.0:
        raise ValueError("distinguishability needs non-zero honest branches")
    return float(1.0 - abs(np.vdot(spec.eta[0], spec.eta[7])) / (n0 * n7))


# ---------------------------------------------------------------------------
# randomized bound search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchConstraint:
    min_distinguishability: float = 1.0
    max_epsilon: float | None = None

    def validate(self, ancilla_dim: int) -> None:
        if not 0.0 <= self.min_distinguishability <= 1.0:
            raise ValueError("min_distinguishability must lie in [0, 1]")
        if self.max_epsilon is not None and not 0.0 <= self.max_epsilon <= 1.0:
            raise ValueError("max_epsilon must lie in [0, 1]")
        if self.min_distinguishability > 0.0 and ancilla_dim < 2:
            # A one-dimensional ancilla has unit-modulus branch overlaps only.
            raise ValueError(
                "min_distinguishability > 0 is infeasible with ancilla_dim 1")


def _orthogonal_fill(reference: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to the reference direction."""
    d = reference.shape[0]
    ref = reference / np.linalg.norm(reference)
    for k in range(d):
        cand = np.zeros(d, dtype=np.complex128)
        cand[k] = 1.0
        cand -= np.vdot(ref, cand) * ref
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            return cand / norm
    raise RuntimeError("no orthogonal direction found")


def _project_feasible(raw: np.ndarray, constraint: SearchConstraint) -> EntanglingAttackSpec:
    """Map an arbitrary branch array onto the constrained unit sphere."""
    eta = raw.copy()
    total = np.linalg.norm(eta)
    if total == 0.0:
        eta[0, 0] = 1.0
        total = 1.0
    eta /= total

    if constraint.max_epsilon is not None:
        w = _branch_weights(eta)
        eps = float(w[list(ODD_ERROR_BRANCHES)].sum())
        honest = float(w[0] + w[7])
        if eps > constraint.max_epsilon:
            target_h = 1.0 - constraint.max_epsilon
            if honest < 1e-12:
                eta[0] = 0.0
                eta[7] = 0.0
                eta[0, 0] = np.sqrt(target_h / 2.0)
                eta[7, min(1, eta.shape[1] - 1)] = np.sqrt(target_h / 2.0)
            else:
                eta[0] *= np.sqrt(target_h / honest)
                eta[7] *= np.sqrt(target_h / honest)
            scale = np.sqrt(constraint.max_epsilon / eps) if eps > 0 else 0.0
            for i in ODD_ERROR_BRANCHES:
                eta[i] *= scale
            eta /= np.linalg.norm(eta)

    min_d = constraint.min_distinguishability
    if min_d > 0.0:
        floor = 1e-4  # keep honest branches alive so the overlap is defined
        for i in (0, 7):
            if np.linalg.norm(eta[i]) < floor:
                eta[i, 0 if i == 0 else min(1, eta.shape[1] - 1)] = floor
        n0 = np.linalg.norm(eta[0])
        n7 = np.linalg.norm(eta[7])
        hat0 = eta[0] / n0
        overlap = np.vdot(hat0, eta[7]) / n7
        cmax = 1.0 - min_d
        if abs(overlap) > cmax:
            parallel = np.vdot(hat0, eta[7]) * hat0
            perp = eta[7] - parallel
            pnorm = np.linalg.norm(perp)
            perp_hat = perp / pnorm if pnorm > 1e-9 else _orthogonal_fill(hat0)
            phase = overlap / abs(overlap)
            eta[7] = n7 * (cmax * phase * hat0
                           + np.sqrt(max(0.0, 1.0 - cmax * cmax)) * perp_hat)
        eta /= np.linalg.norm(eta)

    return EntanglingAttackSpec(eta=eta)


def minimize_average_qber(constraint: SearchConstraint, budget: int, seed: int,
                          ancilla_dim: int = 2) -> BoundSearchResult:
    """Search the constrained attack family for the lowest average error rate.

    Multi-start random sampling on the unit sphere of concatenated branch
    vectors, each start followed by coordinate-wise refinement with step
    halving down to 1e-9.  Every candidate is projected into the feasible
    set before evaluation, so the returned best_average is the minimum over
    feasible evaluated candidates.  Deterministic given the seed.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    constraint.validate(ancilla_dim)
    rng = np.random.default_rng(seed)
    shape = (BRANCH_COUNT, ancilla_dim)
    n_real = 2 * BRANCH_COUNT * ancilla_dim

    def as_complex(x: np.ndarray) -> np.ndarray:
        half = n_real // 2
        return (x[:half] + 1j * x[half:]).reshape(shape)

    evaluations = 0
    best_spec: EntanglingAttackSpec | None = None
    best_value = np.inf

    def evaluate(x: np.ndarray) -> tuple[float, EntanglingAttackSpec]:
        nonlocal evaluations, best_spec, best_value
        spec = _project_feasible(as_complex(x), constraint)
        value = average_qber(spec)
        evaluations += 1
        if value < best_value:
            best_value = value
            best_spec = spec
        return value, spec

    while evaluations < budget:
        x = rng.normal(size=n_real)
        x /= np.linalg.norm(x)
        current, _ = evaluate(x)
        step = 0.25
        while step >= 1e-9 and evaluations < budget:
            improved = False
            for k in range(n_real):
                if evaluations >= budget:
                    break
                for sign in (1.0, -1.0):
                    if evaluations >= budget:
                        break
                    y = x.copy()
                    y[k] += sign * step
                    # keep the iterate on the unit sphere so the nominal step
                    # stays the effective step after projection
                    y /= np.linalg.norm(y)
                    value, _ = evaluate(y)
                    if value < current:
                        x, current = y, value
                        improved = True
                        break
            if not improved:
                step *= 0.5

    assert best_spec is not None
    return BoundSearchResult(best_spec=best_spec, best_average=float(best_value),
                             epsilon=qber_odd(best_spec), evaluations=evaluations,
                             seed=seed)


def frontier(constraints: list[float], budget: int, seed: int,
             ancilla_dim: int = 2, max_epsilon: float | None = None) -> list[dict]:
    """Minimal average error rate per distinguishability constraint."""
    rows = []
    for k, min_d in enumerate(constraints):
        result = minimize_average_qber(
            SearchConstraint(min_distinguishability=min_d, max_epsilon=max_epsilon),
            budget=budget, seed=seed + k, ancilla_dim=ancilla_dim)
        rows.append({
            "distinguishability_constraint": float(min_d),
            "min_average_qber": result.best_average,
            "epsilon_at_min": result.epsilon,
            "evaluations": result.evaluations,
        })
    return rows


# ---------------------------------------------------------------------------
# full state-vector cross-checks
# ---------------------------------------------------------------------------

def attack_state(spec: EntanglingAttackSpec, even_round: bool = False) -> qsim.PureState:
    """The attack's carrier(+ancilla) state as a full state vector."""
    subsystems = [(w, 2) for w in carriers.CARRIER_WIRES]
    if spec.ancilla_dim > 1:
        subsystems.append(("e", spec.ancilla_dim))
    layout = qsim.RegisterLayout(tuple(subsystems))
    amps = spec.eta.reshape(-1).copy()
    state = qsim.PureState(layout, amps)
    if even_round:
        state = carriers.switch_carrier(state)
    return state


def branches_from_state(state: qsim.PureState, ancilla_dim: int) -> np.ndarray:
    """Read the eight ancilla branch vectors back out of a full state."""
    return state.amps.reshape(BRANCH_COUNT, ancilla_dim)


# ---------------------------------------------------------------------------
# JSON / CSV plumbing
# ---------------------------------------------------------------------------

def load_spec_json(path: str) -> EntanglingAttackSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return EntanglingAttackSpec.from_dict(json.load(fh))


def save_spec_json(spec: EntanglingAttackSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


FRONTIER_COLUMNS = ["distinguishability_constraint", "min_average_qber",
                    "epsilon_at_min", "evaluations"]


def write_frontier_csv(rows: list[dict], fh) -> None:
    fh.write(",".join(FRONTIER_COLUMNS) + "\n")
    for row in rows:
        fh.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                          for c in FRONTIER_COLUMNS) + "\n")
