"""Independent reference implementations shared by the test modules."""
from functools import lru_cache

from tsogames.arena import A, B


def minimax(arena, mode, special):
    """Depth-indexed game-tree search: who wins from each vertex within |V| plies of the reacher."""
    reacher = A if mode == "reach" else B
    special = set(special)
    n = len(arena)

    @lru_cache(maxsize=None)
    def wins(v, d):
        succ = arena.successors(v)
        if v in special or (not succ and arena.owner(v) != reacher):
            return True
        if d == 0 or not succ:
            return False
        results = (wins(w, d - 1) for w in succ)
        return any(results) if arena.owner(v) == reacher else all(results)

    other = B if reacher == A else A
    return {v: reacher if wins(v, n) else other for v in arena.vertices}
