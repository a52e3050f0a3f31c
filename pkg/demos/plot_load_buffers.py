"""
Store buffers versus load buffers
=================================

The same three-process program is a loss for the process player under
store buffers and a win under load buffers.
"""

from tsogames.loadbuffer import WRONG_ORDER, figure8_program, lb_escape_check, sb_forcing_check
from tsogames.program import serialize_program

program, objective = figure8_program()
print(serialize_program(program, objective))

# %%
# Flushing in the order Proc3 asks for forces qF on every fair continuation
print(sb_forcing_check(horizon=6))

# %%
# The wrong order leaves a fair loop that avoids qF
verdict = sb_forcing_check(horizon=6, strategy=WRONG_ORDER)
print(verdict.message)
for edge in verdict.witness:
    print("  ", edge)

# %%
# With load buffers the stale value 1 can never come back once memory holds 2
print(lb_escape_check(propagation_bound=4))
print(lb_escape_check(propagation_bound=4, stale_values=("1",)).message)
