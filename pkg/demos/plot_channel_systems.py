"""
Simulating a channel system under TSO
=====================================

A perfect channel system is replayed inside a two-process program: Proc1
follows the control states and Proc2 copies messages from one variable to
another.
"""

from tsogames.corpus import CHEAT_PCS
from tsogames.reductions import (
    audit_pcs_play,
    cheat_script,
    parse_pcs,
    pcs_run,
    pcs_to_process_fairness_game,
    pcs_to_update_fairness_game,
    script_from_pcs_run,
)
from tsogames.solver import check_update_fair_prefix, script_strategies, simulate_play
from tsogames.tso import initial_configuration

pcs = parse_pcs(CHEAT_PCS)
run = ["e0", "e1", "e2", "e3"]
print([f"{c.state}:{''.join(c.channel) or '-'}" for c in pcs_run(pcs, run)])


def replay(program, objective, moves):
    proc, upd = script_strategies(moves)
    return simulate_play(program, objective, initial_configuration(program), proc, upd, 10_000)


# %%
# The honest schedule reaches s4 and is fair to the process player
program, objective = pcs_to_update_fairness_game(pcs)
play, outcome = replay(program, objective, script_from_pcs_run(pcs, run))
audit = audit_pcs_play(pcs, play)
print(outcome.status, "at ply", outcome.ply, "| fair:", bool(check_update_fair_prefix(play)))
print("embedded states", audit.embedded, "rotations", audit.rotations)

# %%
# Flushing too much at once lets Proc2 jump to qwin2
for kind in ("double-flush", "y-window"):
    cheat = cheat_script(pcs, run, kind)
    play, _ = replay(program, objective, cheat.moves)
    print(kind, "-> qwin2 enabled at", audit_pcs_play(pcs, play).qwin2_enabled_at)

# %%
# Under process fairness, rotating a message nobody asked for opens an escape
program, objective = pcs_to_process_fairness_game(pcs)
cheat = cheat_script(pcs, run, "rotation")
play, _ = replay(program, objective, cheat.moves)
print("escape enabled at", audit_pcs_play(pcs, play).escape_enabled_at, "->", play.configs[-1].states[0])
