from app.core.graph import Graph, degrees
from app.core.generators import generate
from app.core.attacks import AttackTrace, plan_attack
from app.core.robustness import (
    RobustnessCurve,
    batch_curve,
    error_report,
    overall_rc,
    robustness_curve,
)
from app.core.spectral import spectral_measures

__all__ = [
    "Graph",
    "degrees",
    "generate",
    "AttackTrace",
    "plan_attack",
    "RobustnessCurve",
    "batch_curve",
    "error_report",
    "overall_rc",
    "robustness_curve",
    "spectral_measures",
]
