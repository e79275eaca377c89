"""Secret sharing over reusable GHZ carriers: exact simulator and analysis."""

from . import adversary, analysis, carriers, cli, kernels, protocol, qsim, verify
from .adversary import CheatSpec, Entangling, InterceptResend, NoAttack
from .analysis import EntanglingAttackSpec, SearchConstraint, minimize_average_qber
from .carriers import CarrierKind, encode_parity, encode_product, even_parity, ghz
from .protocol import DetectionPolicy, SessionReport, new_session, run_session

__version__ = "0.1.0"

__all__ = [
    "adversary", "analysis", "carriers", "cli", "kernels", "protocol",
    "qsim", "verify",
    "CheatSpec", "Entangling", "InterceptResend", "NoAttack",
    "EntanglingAttackSpec", "SearchConstraint", "minimize_average_qber",
    "CarrierKind", "encode_parity", "encode_product", "even_parity", "ghz",
    "DetectionPolicy", "SessionReport", "new_session", "run_session",
]
