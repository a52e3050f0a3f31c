"""
Deciding concurrent games one process at a time
===============================================

The process player wins a concurrent game exactly when she wins on some
process in isolation.
"""

from tsogames import decide, lift_strategy, simulate_play
from tsogames.corpus import CONCURRENT, example
from tsogames.solver import NeverUpdate, RandomUpdate, validate_witness
from tsogames.tso import config_to_json, initial_configuration

for name in CONCURRENT:
    d = decide(*example(name))
    per = {p: r.winner for p, r in d.projections.items()}
    print(f"{name:13s} {d.winner:8s} witness={d.witness} {per}")

# %%
# Play the witness strategy against an update player that never flushes
program, objective = example("ex1_idle")
d = decide(program, objective)
strategy = lift_strategy(program, d.witness, d.witness_result)
play, outcome = simulate_play(program, objective, initial_configuration(program), strategy, NeverUpdate())
for turn, c in zip(play.turns, play.configs):
    print(turn, config_to_json(program, c))
print(outcome.status, "at ply", outcome.ply)

# %%
# Random update players cannot stop it either
print(all(validate_witness(program, objective, d, seed) for seed in range(100)))
