"""Compilers from QBF formulas and perfect channel systems into TSO games."""
from .pcs import (
    CheatScript,
    Pcs,
    PcsConfig,
    PcsError,
    PcsTransition,
    audit_pcs_play,
    cheat_script,
    parse_pcs,
    pcs_run,
    pcs_step,
    pcs_to_process_fairness_game,
    pcs_to_update_fairness_game,
    script_from_pcs_run,
)
from .qbf import And, Lit, Or, QbfError, QbfFormula, eval_qbf, parse_qbf, qbf_to_program

__all__ = [
    "And", "Lit", "Or", "QbfError", "QbfFormula", "eval_qbf", "parse_qbf", "qbf_to_program",
    "CheatScript", "Pcs", "PcsConfig", "PcsError", "PcsTransition", "audit_pcs_play", "cheat_script",
    "parse_pcs", "pcs_run", "pcs_step", "pcs_to_process_fairness_game", "pcs_to_update_fairness_game",
    "script_from_pcs_run",
]
