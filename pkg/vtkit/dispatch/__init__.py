from vtkit.dispatch.pipeline import (
    DischargeOutcome,
    MethodReport,
    MethodVerdict,
    OutcomeStatus,
    Tier,
    VerdictKind,
    discharge,
    export_residual,
    method_verdict,
    verify_method,
)
from vtkit.dispatch.smtlib import emit_smtlib
from vtkit.dispatch.solver import SmtSolver

__all__ = [
    "DischargeOutcome",
    "MethodReport",
    "MethodVerdict",
    "OutcomeStatus",
    "SmtSolver",
    "Tier",
    "VerdictKind",
    "discharge",
    "emit_smtlib",
    "export_residual",
    "method_verdict",
    "verify_method",
]
