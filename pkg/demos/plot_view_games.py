"""
Solving a single-process game
=============================

The view arena abstracts each configuration to its local state, the
values the process would read, and whether a fence could pass.
"""

from tsogames import build_view_arena, solve_single_process, state_space_bound
from tsogames.arena import to_dot
from tsogames.corpus import example
from tsogames.views import vertex_name

for name in ("EX1", "EX2"):
    program, objective = example(name)
    res = solve_single_process(program, objective)
    print(name, "->", res.winner, "player wins;", len(res.arena), "views of at most", state_space_bound(program))

# %%
# In EX2 the fence needs an empty buffer, and the update player simply never flushes
program, objective = example("EX2")
res = solve_single_process(program, objective)
for v in res.arena.vertices:
    print(f"{vertex_name(program, v):18s} won by {res.solution.winner[v]}")

# %%
# Dropping the flush edges never changes who wins
for flush in (True, False):
    print(flush, solve_single_process(program, objective, flush_edges=flush).winner)

# %%
# The arena exports to Graphviz
print(to_dot(build_view_arena(program), res.special))
