"""Dispute-graph fault localization.

A complete trust graph over processors 1..n loses an edge whenever two
processors' broadcast claims about the same message contradict; at least
one endpoint of every removed edge lied, so the edge never returns. A
vertex that loses t+1 edges cannot be fault-free (that would take t+1
faulty neighbours) and is convicted; conviction removes its remaining
edges, which can convict further vertices. The graph is shared protocol
state: every processor derives the identical graph from broadcast data,
so one instance per execution suffices.
"""

from __future__ import annotations

from typing import Iterable


class ConfigurationError(ValueError):
    """Protocol parameters violate a resilience bound."""


# ("edge", i, j) with i < j, or ("convicted", v)
Event = tuple


class TrustGraph:
    """Complete graph K_n minus dispute edges; t+1 losses convict."""

    def __init__(self, n: int, t: int):
        if t < 0:
            raise ConfigurationError(f"fault bound must be nonnegative, got {t}")
        if n < 3 * t + 1:
            raise ConfigurationError(f"need n >= 3t+1, got n={n}, t={t}")
        self.n = n
        self.t = t
        self._adj: dict[int, set[int]] = {
            v: set(range(1, n + 1)) - {v} for v in range(1, n + 1)
        }
        self.convicted: set[int] = set()

    # ------------------------------------------------------------ queries

    def _check_vertex(self, v: int) -> None:
        if not 1 <= v <= self.n:
            raise ValueError(f"vertex {v} out of range 1..{self.n}")

    def edge_present(self, i: int, j: int) -> bool:
        self._check_vertex(i)
        self._check_vertex(j)
        return j in self._adj[i]

    def trusts(self, i: int, j: int) -> bool:
        """Self-trust is unconditional; otherwise the edge must survive."""
        return i == j or self.edge_present(i, j)

    def removed_count(self, v: int) -> int:
        self._check_vertex(v)
        return (self.n - 1) - len(self._adj[v])

    def present_edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i in self._adj for j in self._adj[i] if i < j}

    def unconvicted(self) -> list[int]:
        return [v for v in range(1, self.n + 1) if v not in self.convicted]

    def match_helper(self, j: int, p_match: Iterable[int]) -> int | None:
        """Lowest-index member of p_match that j trusts, if any."""
        for member in sorted(p_match):
            if self.trusts(j, member):
                return member
        return None

    # ----------------------------------------------------------- mutation

    def remove_edge(self, i: int, j: int) -> list[Event]:
        """Record a dispute; returns removal/conviction events in order."""
        if i == j:
            raise ValueError("no self-loops in the trust graph")
        if not self.edge_present(i, j):
            return []
        events = [self._drop(i, j)]
        events.extend(self._settle())
        return events

    def convict(self, v: int) -> list[Event]:
        """Mark v faulty outright (all processors saw the same proof)."""
        self._check_vertex(v)
        if v in self.convicted:
            return []
        events = self._convict_now(v)
        events.extend(self._settle())
        return events

    def _drop(self, i: int, j: int) -> Event:
        self._adj[i].discard(j)
        self._adj[j].discard(i)
        return ("edge", min(i, j), max(i, j))

    def _convict_now(self, v: int) -> list[Event]:
        self.convicted.add(v)
        events: list[Event] = [("convicted", v)]
        for u in sorted(self._adj[v]):
            events.append(self._drop(v, u))
        return events

    def _settle(self) -> list[Event]:
        """Threshold convictions to fixpoint, lowest vertex first."""
        events: list[Event] = []
        changed = True
        while changed:
            changed = False
            for v in range(1, self.n + 1):
                if v in self.convicted:
                    continue
                if self.removed_count(v) >= self.t + 1:
                    events.extend(self._convict_now(v))
                    changed = True
                    break
        return events

    # -------------------------------------------------------- transcripts

    def to_jsonable(self) -> dict:
        present = self.present_edges()
        removed = [
            [i, j]
            for i in range(1, self.n + 1)
            for j in range(i + 1, self.n + 1)
            if (i, j) not in present
        ]
        return {
            "n": self.n,
            "t": self.t,
            "removed_edges": removed,
            "convicted": sorted(self.convicted),
        }
