"""Match vectors and per-generation match-set (quorum) selection.

The q-validity variant has no persistent match set: every generation,
each processor broadcasts which slot senders agreed with its own coded
word, and the match set is the lexicographically smallest q-clique of
the resulting mutual-match graph. All processors see the same vectors,
so they select the identical set with no extra communication.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from .rs import SymbolVector


def compute_match_bits(
    n: int, received: SymbolVector, coded: SymbolVector
) -> tuple[bool, ...]:
    """bits[j-1] is TRUE iff slot j was delivered and equals own S[j]."""
    out = []
    for j in range(1, n + 1):
        r = received.get(j)
        out.append(r is not None and r == coded.get(j))
    return tuple(out)


def find_match_set(
    vectors: Mapping[int, Sequence[bool] | None],
    candidates: Sequence[int],
    q: int,
) -> list[int] | None:
    """Lexicographically smallest q-clique of the mutual-match graph.

    A processor that withheld its vector (None) matches nobody.
    Exhaustive search in combination order; the first qualifying
    combination is the lexicographically smallest one.
    """

    def mutual(i: int, j: int) -> bool:
        vi, vj = vectors.get(i), vectors.get(j)
        if vi is None or vj is None:
            return False
        return bool(vi[j - 1]) and bool(vj[i - 1])

    pool = sorted(set(candidates))
    for combo in itertools.combinations(pool, q):
        if all(mutual(i, j) for i, j in itertools.combinations(combo, 2)):
            return list(combo)
    return None
