"""Deterministic synchronous execution engine and ground-truth checker.

One execution runs one configuration against one adversary script:
lockstep rounds deliver exactly the obligated messages, the script may
corrupt or withhold anything a faulty processor sends, every delivered
bit is charged to a cost ledger, and every observable event lands in a
canonical JSON-lines transcript. The checker knows the ground-truth
faulty set (the protocol code never does) and records violations of
the agreement properties in the transcript instead of raising, so that
failing adversarial runs stay inspectable and replayable.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .broadcast import BroadcastCostModel
from .consensus import (
    STEP_HELPER,
    STEP_OWN,
    STEP_RECONSTRUCTED,
    TAG_CODED,
    TAG_DETECTED,
    TAG_MATCH_BITS,
    TAG_RECEIVED,
    Claims,
    SendObligation,
    detection_flag,
    local_helper_copies,
    matching_obligations,
    reconstruction_sources,
    run_diagnosis,
)
from .diagnosis import ConfigurationError, TrustGraph
from .quorum import compute_match_bits, find_match_set
from .rs import (
    CodeParams,
    ParameterError,
    SymbolVector,
    decode,
    encode,
    reconstruct_position,
)

ALG1 = "alg1"
ALG2 = "alg2"

STAGE_MATCHING = "matching"
STAGE_CHECKING = "checking"
STAGE_DIAGNOSIS = "diagnosis"

OUTCOME_DECIDED = "DECIDED"
OUTCOME_DIAGNOSED = "DIAGNOSED_DECIDED"
OUTCOME_DEFAULT = "DEFAULT"
OUTCOME_TERMINATED = "TERMINATED_DEFAULT"

RULE_SILENT_MATCH_VECTOR = "silent-match-vector"


# --------------------------------------------------------------- config


@dataclass(frozen=True)
class ExecutionConfig:
    """Everything that determines an execution besides the adversary."""

    algorithm: str
    n: int
    t: int
    l_bits: int
    d_bits: int
    inputs: tuple[str, ...]
    q: int | None = None
    seed: int = 0
    broadcast_coefficient: int = 1
    stop_when_no_match_set: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in (ALG1, ALG2):
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.t < 0 or self.n < 3 * self.t + 1 or self.n < 2:
            raise ConfigurationError(f"need n >= 3t+1, got n={self.n}, t={self.t}")
        if self.algorithm == ALG2:
            if self.q is None:
                raise ConfigurationError("alg2 requires q")
            if not self.t + 1 <= self.q <= self.n - self.t:
                raise ConfigurationError(
                    f"need t+1 <= q <= n-t, got q={self.q}, n={self.n}, t={self.t}"
                )
        if self.l_bits < 1 or self.l_bits % 8:
            raise ConfigurationError("l_bits must be a positive multiple of 8")
        unit = 8 * self.k
        if self.d_bits < unit or self.d_bits % unit:
            raise ConfigurationError(
                f"d_bits must be a positive multiple of {unit} (8 x code dimension)"
            )
        if len(self.inputs) != self.n:
            raise ConfigurationError(f"need {self.n} inputs, got {len(self.inputs)}")
        want = self.l_bits // 8
        for i, value in enumerate(self.inputs, start=1):
            try:
                raw = bytes.fromhex(value)
            except ValueError as exc:
                raise ConfigurationError(f"input {i} is not valid hex") from exc
            if len(raw) != want:
                raise ConfigurationError(
                    f"input {i} must be exactly {want} bytes of hex"
                )
        if self.broadcast_coefficient < 1:
            raise ConfigurationError("broadcast coefficient must be >= 1")

    @property
    def k(self) -> int:
        return (self.n - self.t) if self.algorithm == ALG1 else self.q

    @property
    def sym_bytes(self) -> int:
        return self.d_bits // (8 * self.k)

    @property
    def generations(self) -> int:
        return -(-self.l_bits // self.d_bits)

    @property
    def block_bytes(self) -> int:
        return self.d_bits // 8

    @property
    def padded_bytes(self) -> int:
        return self.generations * self.block_bytes

    def padded_input(self, i: int) -> bytes:
        return bytes.fromhex(self.inputs[i - 1]).ljust(self.padded_bytes, b"\x00")

    def input_block(self, i: int, g: int) -> bytes:
        size = self.block_bytes
        return self.padded_input(i)[(g - 1) * size : g * size]

    def code_params(self) -> CodeParams:
        return CodeParams(self.n, self.k, self.sym_bytes)

    def to_jsonable(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "t": self.t,
            "q": self.q,
            "l_bits": self.l_bits,
            "d_bits": self.d_bits,
            "inputs": list(self.inputs),
            "seed": self.seed,
            "broadcast_coefficient": self.broadcast_coefficient,
            "stop_when_no_match_set": self.stop_when_no_match_set,
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "ExecutionConfig":
        return cls(
            algorithm=data["algorithm"],
            n=data["n"],
            t=data["t"],
            q=data.get("q"),
            l_bits=data["l_bits"],
            d_bits=data["d_bits"],
            inputs=tuple(data["inputs"]),
            seed=data.get("seed", 0),
            broadcast_coefficient=data.get("broadcast_coefficient", 1),
            stop_when_no_match_set=data.get("stop_when_no_match_set", False),
        )


# --------------------------------------------------------------- script


SEND_HONEST = "honest"
SEND_SILENT = "silent"
SEND_CORRUPT = "corrupt"
SEND_REPLACE = "replace"

BCAST_SILENT = "silent"
BCAST_REPLACE = "replace"

_HONEST_SEND = (SEND_HONEST, None)
_STEPS = (STEP_OWN, STEP_HELPER, STEP_RECONSTRUCTED)
_TAGS = (TAG_DETECTED, TAG_MATCH_BITS, TAG_CODED, TAG_RECEIVED)


class AdversaryScript:
    """Scripted misbehavior for the faulty set, keyed by round position.

    Send rules are keyed (generation, step, sender, receiver) and apply
    to every slot of that message; broadcast rules are keyed
    (generation, tag, sender). Anything without a rule is sent
    honestly. A script can only speak for faulty senders: rules for
    other processors are rejected at construction, and the engine
    re-checks reach before applying one.
    """

    def __init__(self, faulty: Iterable[int] = ()):
        self.faulty = frozenset(faulty)
        self._sends: dict[tuple[int, str, int, int], tuple[str, bytes | None]] = {}
        self._bcasts: dict[tuple[int, str, int], tuple[str, Any]] = {}

    def _check_sender(self, sender: int) -> None:
        if sender not in self.faulty:
            raise ValueError(f"processor {sender} is not in the faulty set")

    def add_send(
        self,
        generation: int,
        step: str,
        sender: int,
        receiver: int,
        kind: str,
        data: bytes | None = None,
    ) -> "AdversaryScript":
        self._check_sender(sender)
        if step not in _STEPS:
            raise ValueError(f"unknown step {step!r}")
        if kind not in (SEND_HONEST, SEND_SILENT, SEND_CORRUPT, SEND_REPLACE):
            raise ValueError(f"unknown send action {kind!r}")
        if kind in (SEND_CORRUPT, SEND_REPLACE) and not data:
            raise ValueError(f"{kind} needs a byte argument")
        self._sends[(generation, step, sender, receiver)] = (kind, data)
        return self

    def add_broadcast(
        self, generation: int, tag: str, sender: int, kind: str, payload: Any = None
    ) -> "AdversaryScript":
        self._check_sender(sender)
        if tag not in _TAGS:
            raise ValueError(f"unknown broadcast tag {tag!r}")
        if kind not in (BCAST_SILENT, BCAST_REPLACE):
            raise ValueError(f"unknown broadcast action {kind!r}")
        if kind == BCAST_REPLACE:
            if tag == TAG_DETECTED and not isinstance(payload, bool):
                raise ValueError("detected override must be a bool")
            if tag == TAG_MATCH_BITS:
                if not isinstance(payload, (list, tuple)) or not all(
                    isinstance(b, bool) for b in payload
                ):
                    raise ValueError("match_bits override must be a list of bools")
                payload = list(payload)
            if tag in (TAG_CODED, TAG_RECEIVED):
                if not isinstance(payload, (list, tuple)) or not all(
                    v is None or isinstance(v, str) for v in payload
                ):
                    raise ValueError("vector override must be a list of hex or None")
                payload = list(payload)
        self._bcasts[(generation, tag, sender)] = (kind, payload)
        return self

    def send_rule(
        self, generation: int, step: str, sender: int, receiver: int
    ) -> tuple[str, bytes | None]:
        return self._sends.get((generation, step, sender, receiver), _HONEST_SEND)

    def bcast_rule(
        self, generation: int, tag: str, sender: int
    ) -> tuple[str, Any] | None:
        return self._bcasts.get((generation, tag, sender))

    def validate_shapes(self, config: ExecutionConfig) -> None:
        """Fail fast if any rule payload does not fit the configuration."""
        if len(self.faulty) > config.t:
            raise ConfigurationError(
                f"script declares {len(self.faulty)} faulty, bound is t={config.t}"
            )
        for p in self.faulty:
            if not 1 <= p <= config.n:
                raise ConfigurationError(f"faulty id {p} out of range")
        sym = config.sym_bytes
        for key, (kind, data) in self._sends.items():
            if kind in (SEND_CORRUPT, SEND_REPLACE) and len(data) != sym:
                raise ConfigurationError(
                    f"send rule {key} carries {len(data)} bytes, need {sym}"
                )
        for (g, tag, s), (kind, payload) in self._bcasts.items():
            if kind != BCAST_REPLACE:
                continue
            if tag == TAG_MATCH_BITS and len(payload) != config.n:
                raise ConfigurationError(
                    f"match_bits rule for {s} at g{g} needs {config.n} bits"
                )
            if tag in (TAG_CODED, TAG_RECEIVED):
                try:
                    SymbolVector.from_jsonable(config.n, sym, payload)
                except (ParameterError, ValueError) as exc:
                    raise ConfigurationError(
                        f"vector rule for {s} at g{g} does not fit: {exc}"
                    ) from exc

    def to_jsonable(self) -> dict:
        sends = {}
        for (g, step, s, r), (kind, data) in sorted(self._sends.items()):
            sends[f"{g}|{step}|{s}|{r}"] = {
                "kind": kind,
                "data": None if data is None else data.hex(),
            }
        bcasts = {}
        for (g, tag, s), (kind, payload) in sorted(self._bcasts.items()):
            bcasts[f"{g}|{tag}|{s}"] = {"kind": kind, "payload": payload}
        return {"faulty": sorted(self.faulty), "sends": sends, "broadcasts": bcasts}

    @classmethod
    def from_jsonable(cls, data: dict) -> "AdversaryScript":
        script = cls(data.get("faulty", ()))
        for key, rule in data.get("sends", {}).items():
            g, step, s, r = key.split("|")
            raw = rule.get("data")
            script.add_send(
                int(g), step, int(s), int(r), rule["kind"],
                None if raw is None else bytes.fromhex(raw),
            )
        for key, rule in data.get("broadcasts", {}).items():
            g, tag, s = key.split("|")
            payload = rule.get("payload")
            if tag == TAG_MATCH_BITS and payload is not None:
                payload = [bool(b) for b in payload]
            script.add_broadcast(int(g), tag, int(s), rule["kind"], payload)
        return script


# --------------------------------------------------------------- ledger


class CostLedger:
    """Bit and symbol counts per (generation, stage)."""

    FIELDS = ("p2p_symbols", "p2p_bits", "bcast_payload_bits", "bcast_charged_bits")

    def __init__(self) -> None:
        self._cells: dict[tuple[int, str], dict[str, int]] = {}

    def _cell(self, generation: int, stage: str) -> dict[str, int]:
        key = (generation, stage)
        if key not in self._cells:
            self._cells[key] = {f: 0 for f in self.FIELDS}
        return self._cells[key]

    def add_symbol(self, generation: int, stage: str, bits: int) -> None:
        cell = self._cell(generation, stage)
        cell["p2p_symbols"] += 1
        cell["p2p_bits"] += bits

    def add_broadcast(
        self, generation: int, stage: str, payload_bits: int, charged_bits: int
    ) -> None:
        cell = self._cell(generation, stage)
        cell["bcast_payload_bits"] += payload_bits
        cell["bcast_charged_bits"] += charged_bits

    def total(self, fieldname: str) -> int:
        return sum(cell[fieldname] for cell in self._cells.values())

    def stage_total(self, stage: str, fieldname: str) -> int:
        return sum(
            cell[fieldname] for (_, s), cell in self._cells.items() if s == stage
        )

    def per_generation(self, stage: str, fieldname: str) -> dict[int, int]:
        out: dict[int, int] = {}
        for (g, s), cell in self._cells.items():
            if s == stage:
                out[g] = out.get(g, 0) + cell[fieldname]
        return dict(sorted(out.items()))

    def to_jsonable(self) -> dict:
        return {
            f"{g}:{stage}": dict(cell)
            for (g, stage), cell in sorted(self._cells.items())
        }


# ------------------------------------------------------------ transcript


class Transcript:
    """Ordered event log with a canonical byte serialization."""

    def __init__(self) -> None:
        self.events: list[dict] = []

    def append(self, event_type: str, **fields: Any) -> None:
        event = {"type": event_type}
        event.update(fields)
        self.events.append(event)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n"
            for e in self.events
        )

    def of_type(self, event_type: str) -> list[dict]:
        return [e for e in self.events if e["type"] == event_type]


# --------------------------------------------------------------- results


CSV_COLUMNS = [
    "seed", "algorithm", "n", "t", "q", "L", "D",
    "verdict", "diagnosis_count", "p2p_bits", "bcast_bits",
]


@dataclass
class ExecutionResult:
    config: ExecutionConfig
    script: AdversaryScript
    verdict: str
    violations: list[str]
    outputs: dict[int, bytes]
    outcomes: list[dict]
    diagnosis_count: int
    ledger: CostLedger
    transcript: Transcript
    graph: TrustGraph

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def csv_row(self) -> dict[str, Any]:
        cfg = self.config
        return {
            "seed": cfg.seed,
            "algorithm": cfg.algorithm,
            "n": cfg.n,
            "t": cfg.t,
            "q": "" if cfg.q is None else cfg.q,
            "L": cfg.l_bits,
            "D": cfg.d_bits,
            "verdict": self.verdict,
            "diagnosis_count": self.diagnosis_count,
            "p2p_bits": self.ledger.total("p2p_bits"),
            "bcast_bits": self.ledger.total("bcast_charged_bits"),
        }


# ---------------------------------------------------------------- engine


class Execution:
    """One deterministic run of one protocol against one script."""

    def __init__(self, config: ExecutionConfig, script: AdversaryScript):
        script.validate_shapes(config)
        self.config = config
        self.script = script
        self.params = config.code_params()
        self.graph = TrustGraph(config.n, config.t)
        self.cost = BroadcastCostModel(config.broadcast_coefficient)
        self.ledger = CostLedger()
        self.transcript = Transcript()
        self.violations: list[str] = []
        self.diagnosis_count = 0
        self.fault_free = [
            p for p in range(1, config.n + 1) if p not in script.faulty
        ]
        # per fault-free processor, the blocks decided so far
        self.decided: dict[int, list[bytes]] = {p: [] for p in self.fault_free}

    # ------------------------------------------------------- primitives

    def _violate(self, message: str) -> None:
        self.violations.append(message)

    def _deliver(
        self,
        g: int,
        ob: SendObligation,
        coded: dict[int, SymbolVector],
        received: dict[int, SymbolVector],
        suppressed: set[int],
    ) -> None:
        """Route one obligation, applying the script to faulty senders."""
        value = coded[ob.sender].get(ob.slot)
        if ob.sender in self.script.faulty:
            kind, data = self.script.send_rule(g, ob.step, ob.sender, ob.receiver)
            if kind == SEND_SILENT:
                return
            if kind == SEND_CORRUPT:
                value = bytes(a ^ b for a, b in zip(value, data))
            elif kind == SEND_REPLACE:
                value = data
            elif ob.sender in suppressed:
                return
        elif ob.sender in suppressed:
            return
        received[ob.receiver].set(ob.slot, value)
        self.ledger.add_symbol(g, STAGE_MATCHING, 8 * self.params.sym_bytes)
        self.transcript.append(
            "SYMBOL_SENT",
            g=g,
            step=ob.step,
            sender=ob.sender,
            receiver=ob.receiver,
            slot=ob.slot,
            value=value.hex(),
        )

    def _broadcast(
        self, g: int, stage: str, tag: str, sender: int,
        honest_payload: Any, honest_bits: int,
    ) -> Any:
        """Broadcast with script override; returns the observed payload."""
        payload = honest_payload
        if sender in self.script.faulty:
            rule = self.script.bcast_rule(g, tag, sender)
            if rule is not None:
                kind, override = rule
                payload = None if kind == BCAST_SILENT else override
        bits = 0 if payload is None else honest_bits
        self.ledger.add_broadcast(
            g, stage, bits, self.cost.charged_bits(self.config.n, bits)
        )
        self.transcript.append(
            "BROADCAST", g=g, tag=tag, sender=sender,
            payload=_jsonable_payload(payload), payload_bits=bits,
        )
        return payload

    def _graph_events(self, g: int, tagged: list[tuple[str, tuple]]) -> None:
        for rule, event in tagged:
            if event[0] == "edge":
                self.transcript.append(
                    "EDGE_REMOVED", g=g, i=event[1], j=event[2], rule=rule
                )
                if event[1] in self.decided and event[2] in self.decided:
                    self._violate(
                        f"g{g}: edge ({event[1]},{event[2]}) between "
                        f"fault-free processors removed"
                    )
            else:
                self.transcript.append("CONVICTED", g=g, processor=event[1], rule=rule)
                if event[1] in self.decided:
                    self._violate(f"g{g}: fault-free processor {event[1]} convicted")

    def _record_outcome(
        self, g: int, kind: str, value: bytes | None, decide_set: list[int]
    ) -> dict:
        outcome = {
            "g": g,
            "kind": kind,
            "value": None if value is None else value.hex(),
            "decide_set": decide_set,
        }
        self.transcript.append("DECIDED", **outcome)
        return outcome

    def _safe_decode(self, vec: SymbolVector) -> bytes:
        try:
            return decode(self.params, vec)
        except ValueError:
            return b"\x00" * self.config.block_bytes

    # ---------------------------------------------------- matching waves

    def _fresh_state(
        self, g: int
    ) -> tuple[dict[int, SymbolVector], dict[int, SymbolVector]]:
        cfg = self.config
        coded = {
            i: encode(self.params, cfg.input_block(i, g))
            for i in range(1, cfg.n + 1)
        }
        received = {i: SymbolVector(cfg.n, cfg.sym_bytes) for i in range(1, cfg.n + 1)}
        for i in range(1, cfg.n + 1):
            received[i].set(i, coded[i].get(i))
        return coded, received

    def _helper_and_reconstruct(
        self,
        g: int,
        p_match: Sequence[int],
        obligations: list[SendObligation],
        coded: dict[int, SymbolVector],
        received: dict[int, SymbolVector],
    ) -> None:
        """Helper wave, non-member reconstruction, re-send wave."""
        cfg = self.config
        members = set(p_match)
        for ob in obligations:
            if ob.step == STEP_HELPER:
                self._deliver(g, ob, coded, received, set())
        for r, slot in local_helper_copies(self.graph, p_match):
            received[r].set(slot, coded[r].get(slot))
        # a non-member that cannot gather enough match-set symbols keeps
        # its own-input slot and skips the re-send wave entirely
        failed: set[int] = set()
        for j in range(1, cfg.n + 1):
            if j in members:
                continue
            sources = reconstruction_sources(received[j], p_match, self.params.k)
            if sources is None:
                failed.add(j)
                continue
            coded[j].set(j, reconstruct_position(self.params, received[j], j, sources))
        for ob in obligations:
            if ob.step == STEP_RECONSTRUCTED:
                self._deliver(g, ob, coded, received, failed)
        for j in range(1, cfg.n + 1):
            if j not in members:
                received[j].set(j, coded[j].get(j))

    # -------------------------------------------------- checking + claims

    def _run_checking(
        self, g: int, members: set[int],
        coded: dict[int, SymbolVector], received: dict[int, SymbolVector],
    ) -> dict[int, bool | None]:
        flags: dict[int, bool | None] = {}
        for p in self.graph.unconvicted():
            live = detection_flag(
                self.params, received[p], coded[p], p in members, members
            )
            observed = self._broadcast(g, STAGE_CHECKING, TAG_DETECTED, p, live, 1)
            flags[p] = observed if observed is None else bool(observed)
        return flags

    def _collect_claims(
        self, g: int, flags: dict[int, bool | None],
        coded: dict[int, SymbolVector], received: dict[int, SymbolVector],
    ) -> dict[int, Claims]:
        cfg = self.config
        claims: dict[int, Claims] = {}
        for p in self.graph.unconvicted():
            coded_obs = self._broadcast(
                g, STAGE_DIAGNOSIS, TAG_CODED, p, coded[p], coded[p].payload_bits()
            )
            received_obs = self._broadcast(
                g, STAGE_DIAGNOSIS, TAG_RECEIVED, p,
                received[p], received[p].payload_bits(),
            )
            claims[p] = Claims(
                flags.get(p),
                _as_vector(coded_obs, cfg.n, cfg.sym_bytes),
                _as_vector(received_obs, cfg.n, cfg.sym_bytes),
            )
        return claims

    # ------------------------------------------------------------- ALG1

    def _terminated_tail(self, g: int) -> list[dict]:
        self.transcript.append(OUTCOME_TERMINATED, g=g)
        return [
            {"g": h, "kind": OUTCOME_TERMINATED, "value": None, "decide_set": []}
            for h in range(g, self.config.generations + 1)
        ]

    def _run_alg1(self) -> list[dict]:
        cfg = self.config
        outcomes: list[dict] = []
        p_match = list(range(1, cfg.n + 1))
        for g in range(1, cfg.generations + 1):
            p_match = [p for p in p_match if p not in self.graph.convicted]
            if len(p_match) < cfg.n - cfg.t:
                return outcomes + self._terminated_tail(g)
            obligations = matching_obligations(self.graph, p_match)
            coded, received = self._fresh_state(g)
            for ob in obligations:
                if ob.step == STEP_OWN:
                    self._deliver(g, ob, coded, received, set())
            self._helper_and_reconstruct(g, p_match, obligations, coded, received)
            flags = self._run_checking(g, set(p_match), coded, received)
            if all(v is False for v in flags.values()):
                values = {p: self._safe_decode(received[p]) for p in self.fault_free}
                self._check_generation_values(g, values, p_match)
                outcomes.append(
                    self._record_outcome(
                        g, OUTCOME_DECIDED, values[self.fault_free[0]], []
                    )
                )
                for p in self.fault_free:
                    self.decided[p].append(values[p])
                continue
            self.diagnosis_count += 1
            claims = self._collect_claims(g, flags, coded, received)
            result = run_diagnosis(
                self.params, self.graph, p_match, obligations, claims,
                p_match, cfg.n - cfg.t,
            )
            self._graph_events(g, result.events)
            if not result.decide_ids:
                return outcomes + self._terminated_tail(g)
            self.transcript.append("DECIDE_SET", g=g, members=result.decide_ids)
            self._check_generation_values(
                g, {p: result.decide_value for p in self.fault_free}, p_match
            )
            outcomes.append(
                self._record_outcome(
                    g, OUTCOME_DIAGNOSED, result.decide_value, result.decide_ids
                )
            )
            for p in self.fault_free:
                self.decided[p].append(result.decide_value)
            p_match = result.decide_ids
        return outcomes

    def _check_generation_values(
        self, g: int, values: dict[int, bytes], p_match: Sequence[int]
    ) -> None:
        """Per-generation agreement and validity over fault-free processors."""
        distinct = set(values.values())
        if len(distinct) > 1:
            self._violate(f"g{g}: fault-free processors decided different blocks")
        member_blocks = {
            self.config.input_block(p, g) for p in p_match if p in self.decided
        }
        if member_blocks:
            for v in distinct:
                if v not in member_blocks:
                    self._violate(
                        f"g{g}: decided block is no fault-free member's input"
                    )

    # ------------------------------------------------------------- ALG2

    def _run_alg2(self) -> list[dict]:
        cfg = self.config
        outcomes: list[dict] = []
        everyone = list(range(1, cfg.n + 1))
        default_block = b"\x00" * cfg.block_bytes
        for g in range(1, cfg.generations + 1):
            coded, received = self._fresh_state(g)
            for ob in matching_obligations(self.graph, everyone):
                self._deliver(g, ob, coded, received, set())
            vectors: dict[int, tuple[bool, ...] | None] = {}
            for p in self.graph.unconvicted():
                live = compute_match_bits(cfg.n, received[p], coded[p])
                observed = self._broadcast(
                    g, STAGE_MATCHING, TAG_MATCH_BITS, p, live, cfg.n
                )
                vectors[p] = (
                    None if observed is None else tuple(bool(b) for b in observed)
                )
            p_match = find_match_set(vectors, self.graph.unconvicted(), cfg.q)
            self.transcript.append("MATCH_SET", g=g, members=p_match)
            self._check_clique_existence(g, p_match)
            if p_match is None:
                if cfg.stop_when_no_match_set:
                    for p in self.fault_free:
                        self.decided[p].extend(
                            default_block for _ in range(g, cfg.generations + 1)
                        )
                    return outcomes + self._terminated_tail(g)
                self._check_q_validity(g, OUTCOME_DEFAULT, default_block)
                for p in self.fault_free:
                    self.decided[p].append(default_block)
                outcomes.append(
                    self._record_outcome(g, OUTCOME_DEFAULT, default_block, [])
                )
                continue
            outcomes.append(
                self._run_alg2_generation(
                    g, p_match, coded, received, vectors, default_block
                )
            )
        return outcomes

    def _run_alg2_generation(
        self, g: int, p_match: list[int],
        coded: dict[int, SymbolVector], received: dict[int, SymbolVector],
        vectors: dict[int, tuple[bool, ...] | None], default_block: bytes,
    ) -> dict:
        cfg = self.config
        obligations = matching_obligations(self.graph, p_match)
        self._helper_and_reconstruct(g, p_match, obligations, coded, received)
        flags = self._run_checking(g, set(p_match), coded, received)
        if all(v is False for v in flags.values()):
            values = {p: self._safe_decode(received[p]) for p in self.fault_free}
            if len(set(values.values())) > 1:
                self._violate(f"g{g}: fault-free processors decided different blocks")
            value = values[self.fault_free[0]]
            self._check_q_validity(g, OUTCOME_DECIDED, value)
            for p in self.fault_free:
                self.decided[p].append(values[p])
            return self._record_outcome(g, OUTCOME_DECIDED, value, [])
        self.diagnosis_count += 1
        for p in list(self.graph.unconvicted()):
            if vectors.get(p) is None:
                self._graph_events(
                    g,
                    [(RULE_SILENT_MATCH_VECTOR, ev) for ev in self.graph.convict(p)],
                )
        claims = self._collect_claims(g, flags, coded, received)
        result = run_diagnosis(
            self.params, self.graph, p_match, obligations, claims,
            list(range(1, cfg.n + 1)), cfg.q, count_convicted=True,
        )
        self._graph_events(g, result.events)
        if result.decide_ids:
            self.transcript.append("DECIDE_SET", g=g, members=result.decide_ids)
            kind, value = OUTCOME_DIAGNOSED, result.decide_value
        else:
            kind, value = OUTCOME_DEFAULT, default_block
        self._check_q_validity(g, kind, value)
        for p in self.fault_free:
            self.decided[p].append(value)
        return self._record_outcome(g, kind, value, result.decide_ids or [])

    def _sharers_of(self, g: int) -> tuple[bytes | None, list[int]]:
        """The most widely shared fault-free block this generation."""
        groups: dict[bytes, list[int]] = {}
        for p in self.fault_free:
            groups.setdefault(self.config.input_block(p, g), []).append(p)
        if not groups:
            return None, []
        block, ids = min(groups.items(), key=lambda kv: (-len(kv[1]), kv[1]))
        return block, ids

    def _check_clique_existence(self, g: int, p_match: list[int] | None) -> None:
        """A trusting fault-free group sharing a block must yield a match set."""
        if p_match is not None:
            return
        _, sharers = self._sharers_of(g)
        if len(sharers) < self.config.q:
            return
        for combo in itertools.combinations(sharers, self.config.q):
            if all(
                self.graph.edge_present(a, b)
                for a, b in itertools.combinations(combo, 2)
            ):
                self._violate(
                    f"g{g}: no match set found despite a trusting "
                    f"fault-free group sharing a block"
                )
                return

    def _check_q_validity(self, g: int, kind: str, value: bytes) -> None:
        """Check the properties every execution must satisfy.

        A default generation itself is legal (the decision rule may
        find no group of q identical claims), but any non-default
        decision must be a fault-free input, and when a majority-sized
        quorum of fault-free processors shares a block, only that block
        can win.
        """
        cfg = self.config
        if kind == OUTCOME_DEFAULT:
            return
        fault_free_blocks = {cfg.input_block(p, g) for p in self.fault_free}
        if value not in fault_free_blocks:
            self._violate(f"g{g}: decided block is no fault-free input")
        block, sharers = self._sharers_of(g)
        if len(sharers) < cfg.q:
            return
        if cfg.q >= (cfg.n + 2) // 2 and value != block:
            self._violate(
                f"g{g}: majority quorum decided a block other than the shared one"
            )

    # ----------------------------------------------------------- driver

    def run(self) -> ExecutionResult:
        cfg = self.config
        self.transcript.append(
            "header",
            config=cfg.to_jsonable(),
            script=self.script.to_jsonable(),
            original_l_bits=cfg.l_bits,
            padded_bits=cfg.generations * cfg.d_bits,
            padding="zero-fill-tail",
            generations=cfg.generations,
        )
        outcomes = self._run_alg1() if cfg.algorithm == ALG1 else self._run_alg2()
        terminated = any(o["kind"] == OUTCOME_TERMINATED for o in outcomes)
        outputs: dict[int, bytes] = {}
        for p in self.fault_free:
            if cfg.algorithm == ALG1 and terminated:
                outputs[p] = b"\x00" * cfg.padded_bytes
            else:
                outputs[p] = b"".join(self.decided[p])
        self._check_final(outputs)
        verdict = "PASS" if not self.violations else "VERDICT_FAIL"
        self.transcript.append(
            "VERDICT",
            verdict=verdict,
            violations=list(self.violations),
            outputs={str(p): v.hex() for p, v in sorted(outputs.items())},
            diagnosis_count=self.diagnosis_count,
            ledger=self.ledger.to_jsonable(),
            graph=self.graph.to_jsonable(),
        )
        return ExecutionResult(
            config=cfg,
            script=self.script,
            verdict=verdict,
            violations=self.violations,
            outputs=outputs,
            outcomes=outcomes,
            diagnosis_count=self.diagnosis_count,
            ledger=self.ledger,
            transcript=self.transcript,
            graph=self.graph,
        )

    def _check_final(self, outputs: dict[int, bytes]) -> None:
        cfg = self.config
        for p, blob in outputs.items():
            if len(blob) != cfg.padded_bytes:
                self._violate(f"processor {p} terminated without a full output")
        if len(set(outputs.values())) > 1:
            self._violate("final fault-free outputs differ")
        fault_free_inputs = {bytes.fromhex(cfg.inputs[p - 1]) for p in self.fault_free}
        if cfg.algorithm == ALG1 and len(fault_free_inputs) == 1:
            expected = next(iter(fault_free_inputs))
            for v in outputs.values():
                if v[: cfg.l_bits // 8] != expected:
                    self._violate("identical fault-free inputs were not decided")
                    break
        for p in self.fault_free:
            if p in self.graph.convicted:
                self._violate(f"fault-free processor {p} ended convicted")


def _jsonable_payload(payload: Any) -> Any:
    if isinstance(payload, SymbolVector):
        return payload.to_jsonable()
    if isinstance(payload, tuple):
        return list(payload)
    return payload


def _as_vector(observed: Any, n: int, sym_bytes: int) -> SymbolVector | None:
    if observed is None:
        return None
    if isinstance(observed, SymbolVector):
        return observed
    return SymbolVector.from_jsonable(n, sym_bytes, observed)


def run_execution(config: ExecutionConfig, script: AdversaryScript) -> ExecutionResult:
    return Execution(config, script).run()


# ------------------------------------------------------------ complexity


@dataclass
class ComplexityReport:
    data_bits: int
    data_formula_bits: int
    overhead_bits: int
    alg2_symbols_per_generation: dict[int, int]
    alg2_symbol_bound: int | None

    @property
    def data_matches_formula(self) -> bool:
        return self.data_bits == self.data_formula_bits

    @property
    def alg2_within_bound(self) -> bool:
        if self.alg2_symbol_bound is None:
            return True
        return all(
            v <= self.alg2_symbol_bound
            for v in self.alg2_symbols_per_generation.values()
        )

    def to_jsonable(self) -> dict:
        return {
            "data_bits": self.data_bits,
            "data_formula_bits": self.data_formula_bits,
            "data_matches_formula": self.data_matches_formula,
            "overhead_bits": self.overhead_bits,
            "alg2_symbols_per_generation": {
                str(g): v for g, v in self.alg2_symbols_per_generation.items()
            },
            "alg2_symbol_bound": self.alg2_symbol_bound,
            "alg2_within_bound": self.alg2_within_bound,
        }


def check_complexity(result: ExecutionResult) -> ComplexityReport:
    """Ledger readback against the closed-form traffic identities."""
    cfg = result.config
    padded_l = cfg.generations * cfg.d_bits
    if cfg.algorithm == ALG1:
        formula = cfg.n * (cfg.n - 1) * padded_l // (cfg.n - cfg.t)
        bound = None
        per_gen: dict[int, int] = {}
    else:
        formula = (2 * cfg.n - cfg.q) * (cfg.n - 1) * padded_l // cfg.q
        bound = (2 * cfg.n - cfg.q) * (cfg.n - 1)
        per_gen = result.ledger.per_generation(STAGE_MATCHING, "p2p_symbols")
    data_bits = result.ledger.stage_total(STAGE_MATCHING, "p2p_bits")
    overhead = (
        result.ledger.total("bcast_charged_bits")
        + result.ledger.total("p2p_bits")
        - data_bits
    )
    return ComplexityReport(
        data_bits=data_bits,
        data_formula_bits=formula,
        overhead_bits=overhead,
        alg2_symbols_per_generation=per_gen,
        alg2_symbol_bound=bound,
    )


# ----------------------------------------------------- scripts and sweeps


def random_inputs(
    rng: random.Random, n: int, l_bits: int, sharers: Sequence[int] | None = None
) -> tuple[str, ...]:
    """Random per-processor inputs; `sharers` all get the first value.

    With sharers=None every processor gets the same value.
    """
    size = l_bits // 8
    shared = rng.randbytes(size)
    out = []
    for p in range(1, n + 1):
        if sharers is None or p in sharers:
            out.append(shared.hex())
        else:
            out.append(rng.randbytes(size).hex())
    return tuple(out)


def random_script(
    config: ExecutionConfig, seed: int, faulty: Sequence[int] | None = None
) -> AdversaryScript:
    """A script drawn from the closed action grammar, up to t faulty.

    With faulty=None the corrupt set is sampled as well; pass an explicit
    set to randomize only the behaviour.
    """
    rng = random.Random(seed)
    n, t = config.n, config.t
    if faulty is None:
        count = rng.randint(1, t) if t else 0
        faulty = sorted(rng.sample(range(1, n + 1), count))
    else:
        faulty = sorted(faulty)
    script = AdversaryScript(faulty)
    sym = config.sym_bytes
    tags = [TAG_DETECTED, TAG_CODED, TAG_RECEIVED]
    if config.algorithm == ALG2:
        tags.append(TAG_MATCH_BITS)
    for s in faulty:
        for g in range(1, config.generations + 1):
            if rng.random() < 0.45:
                for _ in range(rng.randint(1, 2)):
                    receiver = rng.choice([p for p in range(1, n + 1) if p != s])
                    kind = rng.choice((SEND_SILENT, SEND_CORRUPT, SEND_REPLACE))
                    data = None
                    if kind == SEND_CORRUPT:
                        data = bytes([rng.randint(1, 255)]) + rng.randbytes(sym - 1)
                    elif kind == SEND_REPLACE:
                        data = rng.randbytes(sym)
                    script.add_send(g, rng.choice(_STEPS), s, receiver, kind, data)
            if rng.random() < 0.30:
                tag = rng.choice(tags)
                if rng.random() < 0.35:
                    script.add_broadcast(g, tag, s, BCAST_SILENT)
                elif tag == TAG_DETECTED:
                    script.add_broadcast(
                        g, tag, s, BCAST_REPLACE, bool(rng.getrandbits(1))
                    )
                elif tag == TAG_MATCH_BITS:
                    script.add_broadcast(
                        g, tag, s, BCAST_REPLACE,
                        [bool(rng.getrandbits(1)) for _ in range(n)],
                    )
                else:
                    slots = [
                        None if rng.random() < 0.2 else rng.randbytes(sym).hex()
                        for _ in range(n)
                    ]
                    script.add_broadcast(g, tag, s, BCAST_REPLACE, slots)
    return script


@dataclass
class SweepReport:
    results: list[ExecutionResult]
    failures: list[int] = field(default_factory=list)

    @property
    def rows(self) -> list[dict]:
        return [r.csv_row() for r in self.results]

    def max_diagnosis_count(self, algorithm: str | None = None) -> int:
        counts = [
            r.diagnosis_count
            for r in self.results
            if algorithm is None or r.config.algorithm == algorithm
        ]
        return max(counts, default=0)

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return buf.getvalue()


def sweep(
    cases: Iterable[tuple[ExecutionConfig, AdversaryScript]],
    workers: int = 1,
    stop_on_fail: bool = False,
) -> SweepReport:
    """Run many independent executions; results keep case order."""
    case_list = list(cases)
    if workers > 1 and not stop_on_fail:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: run_execution(*c), case_list))
    else:
        results = []
        for config, script in case_list:
            result = run_execution(config, script)
            results.append(result)
            if stop_on_fail and not result.passed:
                break
    failures = [i for i, r in enumerate(results) if not r.passed]
    return SweepReport(results=results, failures=failures)


# ---------------------------------------------------------------- replay


def serialize_case(config: ExecutionConfig, script: AdversaryScript) -> str:
    return json.dumps(
        {"config": config.to_jsonable(), "script": script.to_jsonable()},
        sort_keys=True,
        indent=2,
    )


def load_case(text: str) -> tuple[ExecutionConfig, AdversaryScript]:
    data = json.loads(text)
    return (
        ExecutionConfig.from_jsonable(data["config"]),
        AdversaryScript.from_jsonable(data["script"]),
    )


def replay_identical(config: ExecutionConfig, script: AdversaryScript) -> bool:
    """Serialize, reload, re-run: the transcript must be byte-identical."""
    first = run_execution(config, script).transcript.to_jsonl()
    config2, script2 = load_case(serialize_case(config, script))
    second = run_execution(config2, script2).transcript.to_jsonl()
    return first.encode() == second.encode()
