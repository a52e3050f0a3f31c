"""Two-player games on concurrent programs under TSO store-buffer semantics."""
from .arena import A, B, Arena, Solution, Verdict, check_strategy, solve_game, to_dot, to_json
from .loadbuffer import figure8_program, lb_escape_check, sb_forcing_check
from .program import (
    Instruction,
    Objective,
    ParseError,
    Process,
    Program,
    ProgramError,
    Transition,
    parse_program,
    project,
    serialize_program,
    validate_for_game,
)
from .solver import (
    Decision,
    FlushAll,
    NeverUpdate,
    RandomUpdate,
    ScriptedUpdate,
    check_update_fair_prefix,
    decide,
    lift_strategy,
    process_fairness_report,
    simulate_play,
)
from .tso import (
    Configuration,
    Message,
    apply_instruction,
    apply_update,
    bounded_explore,
    enabled_moves,
    initial_configuration,
    update_closure,
)
from .views import (
    View,
    build_view_arena,
    check_bisimulation,
    check_lemma5,
    dummy_update_equivalence,
    solve_single_process,
    state_space_bound,
    view_of,
)

__version__ = "0.1.0"
