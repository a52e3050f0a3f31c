"""
Quantified formulas as games
============================

Every prenex formula compiles into a single-process program whose game is
won by the process player iff the formula is true.
"""

from tsogames import decide, serialize_program
from tsogames.reductions import eval_qbf, parse_qbf, qbf_to_program

f = parse_qbf("A x E y : (x & y) | (!x & !y)")
program, objective = qbf_to_program(f)
print(serialize_program(program, objective))
print("true:", eval_qbf(f), " game:", decide(program, objective).winner)

# %%
# Swapping the quantifiers makes the formula false, and the game follows
g = parse_qbf("E y A x : (x & y) | (!x & !y)")
for mode in ("reach", "safe"):
    print(mode, eval_qbf(g), decide(*qbf_to_program(g, mode)).winner)
