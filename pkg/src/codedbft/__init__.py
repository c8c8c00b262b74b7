"""Coded Byzantine consensus simulator.

Deterministic implementations of two synchronous, error-free
multi-valued consensus protocols that spread each value over an
erasure code and localize faults through a dispute graph, plus the
adversary scripting, cost accounting, and replay harness used to
exercise them.
"""

__version__ = "0.1.0"
