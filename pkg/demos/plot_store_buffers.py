"""
Store buffers by hand
=====================

Writes wait in a per-process buffer before they reach memory.
"""

from tsogames import Configuration, Message, apply_instruction, apply_update, update_closure
from tsogames.corpus import example
from tsogames.tso import bounded_explore, config_to_json, enabled_moves, initial_configuration

program, objective = example("EX1")
c = initial_configuration(program)
print(config_to_json(program, c))

# The write goes into P's buffer; memory still says x=0
(name, write), = enabled_moves(program, c)
c = apply_instruction(program, c, name, write)
print(config_to_json(program, c))

# P can already read its own write
print([str(t.instr) for _, t in enabled_moves(program, c)])

# Flushing moves the oldest message to memory
print(config_to_json(program, apply_update(program, c, "P")))

# %%
# Two processes with one pending write each: the flush order decides the final value of x
program, _ = example("sb_litmus")
busy = Configuration(("b", "b"), ((Message("x", "1"),), (Message("y", "1"),)), ("0", "0"))
for d in sorted(update_closure(program, busy)):
    print(d.memory, [len(b) for b in d.buffers])

# %%
# Bounded exploration keeps buffers short so the state space stays finite
ex = bounded_explore(program, initial_configuration(program), buffer_bound=1)
print(len(ex.configurations), "configurations,", len(ex.frontier), "cut off by the bound")
