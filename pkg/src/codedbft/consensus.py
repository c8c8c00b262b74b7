"""Shared protocol logic: matching obligations, detection, diagnosis.

Both consensus variants move one generation through the same three
stages. Matching spreads coded symbols point to point along the trust
graph; checking has every processor broadcast a one-bit detection flag;
when any flag is TRUE, diagnosis has every processor broadcast its full
coded and received vectors as claims, and all processors apply the same
deterministic rules to those claims: convict processors whose claims
are self-contradictory, and remove a trust edge between any
sender/receiver pair whose claims about one delivered symbol disagree.

The two variants differ only in parameters fed to this module: the code
dimension (n-t versus q), which processors count toward the decision
set, and the decision threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .diagnosis import TrustGraph
from .rs import (
    CodeParams,
    InsufficientSymbolsError,
    SymbolVector,
    decode,
    is_codeword,
    reconstruct_position,
)

# matching proceeds in three send waves, one synchronous round each
STEP_OWN = "own"
STEP_HELPER = "helper"
STEP_RECONSTRUCTED = "reconstructed"
STEP_ORDER = {STEP_OWN: 0, STEP_HELPER: 1, STEP_RECONSTRUCTED: 2}

# broadcast tags
TAG_DETECTED = "detected"
TAG_MATCH_BITS = "match_bits"
TAG_CODED = "coded"
TAG_RECEIVED = "received"


@dataclass(frozen=True)
class SendObligation:
    """One required point-to-point send, derivable by every processor.

    Diagnosis depends on all processors reconstructing the identical
    obligation list from (trust graph, match set) alone, so obligations
    never depend on private state or on delivered content.
    """

    sender: int
    receiver: int
    slot: int
    step: str

    def sort_key(self) -> tuple[int, int, int, int]:
        return (STEP_ORDER[self.step], self.sender, self.receiver, self.slot)


def matching_obligations(
    graph: TrustGraph, p_match: Iterable[int]
) -> list[SendObligation]:
    """Every network send of one matching stage, canonically ordered.

    Wave 1: each processor offers its own slot to every trusted peer.
    Wave 2: for each receiver, the lowest-index trusted match-set
    member re-sends the match-set slots the receiver cannot obtain
    directly. Wave 3: processors outside the match set re-send their
    own slot after rebuilding it from match-set symbols. Self-deliveries
    are local, free, and not obligations.
    """
    members = sorted(set(p_match))
    n = graph.n
    obligations: list[SendObligation] = []
    for s in range(1, n + 1):
        for r in range(1, n + 1):
            if r != s and graph.trusts(s, r):
                obligations.append(SendObligation(s, r, s, STEP_OWN))
    for r in range(1, n + 1):
        missing = [k for k in members if not graph.trusts(r, k)]
        if not missing:
            continue
        helper = graph.match_helper(r, members)
        if helper is None or helper == r:
            continue
        for k in missing:
            obligations.append(SendObligation(helper, r, k, STEP_HELPER))
    for s in range(1, n + 1):
        if s in members:
            continue
        for r in range(1, n + 1):
            if r != s and graph.trusts(s, r):
                obligations.append(SendObligation(s, r, s, STEP_RECONSTRUCTED))
    obligations.sort(key=SendObligation.sort_key)
    return obligations


def local_helper_copies(
    graph: TrustGraph, p_match: Iterable[int]
) -> list[tuple[int, int]]:
    """(receiver, slot) pairs a receiver fills from its own coded word.

    When a match-set member is its own lowest trusted helper, the
    helper send degenerates to a free local copy.
    """
    members = sorted(set(p_match))
    copies = []
    for r in members:
        missing = [k for k in members if not graph.trusts(r, k)]
        if missing and graph.match_helper(r, members) == r:
            copies.extend((r, k) for k in missing)
    return copies


def reconstruction_sources(
    received: SymbolVector, p_match: Iterable[int], k: int
) -> list[int] | None:
    """The k lowest-index match-set slots present in `received`.

    None when fewer than k are present. Only match-set slots qualify:
    their delivered values are final after the helper wave, so every
    processor can later recompute the same reconstruction from the
    broadcast received-vector claims.
    """
    present = [m for m in sorted(set(p_match)) if received.get(m) is not None]
    if len(present) < k:
        return None
    return present[:k]


def detection_flag(
    params: CodeParams,
    received: SymbolVector,
    coded: SymbolVector | None,
    in_match: bool,
    p_match: Iterable[int],
) -> bool:
    """TRUE when the received word is implausible or contradicts own S.

    Erased slots are skipped by the codeword check; fewer than k
    non-erased slots counts as detection (the word cannot be checked
    at all). A processor outside the match set also detects when it
    could not gather k match-set symbols: with exactly k symbols the
    codeword check is vacuous, so a starved processor must announce
    the failure rather than decode an unverifiable word.
    """
    try:
        if not is_codeword(params, received):
            return True
    except InsufficientSymbolsError:
        return True
    if in_match:
        if coded is not None:
            for pos in range(1, params.n + 1):
                r, s = received.get(pos), coded.get(pos)
                if r is not None and s is not None and r != s:
                    return True
        return False
    return reconstruction_sources(received, p_match, params.k) is None


@dataclass
class Claims:
    """One processor's diagnosis broadcasts; None marks silence."""

    flag: bool | None
    coded: SymbolVector | None
    received: SymbolVector | None


# conviction / dispute rule tags, as they appear in transcripts
RULE_INCOMPLETE = "incomplete-claims"
RULE_NOT_CODEWORD = "coded-claim-not-codeword"
RULE_RECONSTRUCTION = "reconstruction-mismatch"
RULE_FLAG = "flag-claims-mismatch"
RULE_DISPUTE = "claim-dispute"


@dataclass
class DiagnosisResult:
    """Graph updates plus the decision-set outcome of one diagnosis."""

    events: list[tuple[str, tuple]]
    decide_ids: list[int]
    decide_value: bytes | None


def run_diagnosis(
    params: CodeParams,
    graph: TrustGraph,
    p_match: Sequence[int],
    obligations: Sequence[SendObligation],
    claims: Mapping[int, Claims],
    decision_domain: Sequence[int],
    threshold: int,
    count_convicted: bool = False,
) -> DiagnosisResult:
    """Apply the diagnosis rules to everyone's broadcast claims.

    All inputs are common knowledge (broadcasts plus deterministically
    derived state), so every fault-free processor computes this very
    function and lands on the identical graph and decision set.

    Rule order, each pass in ascending processor id:
      1. incomplete claims: a missing flag, missing vector, or a coded
         vector with erased slots proves the broadcaster faulty (a
         fault-free processor always has a complete coded word).
      2. a match-set member whose coded claim is not a codeword is
         faulty outright.
      3. a non-member whose received claims contain enough match-set
         symbols must show exactly the reconstruction they imply.
      4. a flag that does not follow from the broadcaster's own claims
         proves it faulty (honest flags are a function of the claims).
      5. for every obligation, the sender's coded claim and the
         receiver's received claim must agree on the slot; any
         difference, including a value against an erasure, removes the
         trust edge between them. In a synchronous network one of the
         two lied: a delivered symbol is received, a withheld one is
         not. A re-send obligation whose sender's received claim shows
         no usable source set expects an erasure instead, because the
         honest behaviour for a starved processor is silence.
    Then the decision set is the largest group of domain processors
    with bit-identical complete-codeword coded claims (ties:
    lexicographically smallest id list); below `threshold` it is empty.
    With `count_convicted` the group may keep claims from processors
    convicted by the rules above: the claims were already broadcast, so
    counting them is deterministic, and any group of `threshold` or
    more claims contains a fault-free one whose codeword fixes the
    value. Without it only unconvicted processors count.
    """
    events: list[tuple[str, tuple]] = []

    def convict(p: int, rule: str) -> None:
        for ev in graph.convict(p):
            events.append((rule, ev))

    members = set(p_match)

    for p in sorted(claims):
        if p in graph.convicted:
            continue
        c = claims[p]
        if (
            c.flag is None
            or c.coded is None
            or c.received is None
            or not c.coded.is_complete()
        ):
            convict(p, RULE_INCOMPLETE)

    for m in sorted(members):
        if m in graph.convicted or m not in claims:
            continue
        if not is_codeword(params, claims[m].coded):
            convict(m, RULE_NOT_CODEWORD)

    for j in sorted(claims):
        if j in members or j in graph.convicted:
            continue
        c = claims[j]
        sources = reconstruction_sources(c.received, members, params.k)
        if sources is None:
            continue
        expected = reconstruct_position(params, c.received, j, sources)
        if c.coded.get(j) != expected:
            convict(j, RULE_RECONSTRUCTION)

    for p in sorted(claims):
        if p in graph.convicted:
            continue
        c = claims[p]
        if c.flag != detection_flag(params, c.received, c.coded, p in members, members):
            convict(p, RULE_FLAG)

    # senders whose own claims show no usable source set were obliged
    # to skip the re-send wave; receivers then keep the first-wave
    # value for that slot, which the own-step obligation already
    # polices, so the re-send obligation yields no new evidence
    resend_silent = {
        j
        for j, c in claims.items()
        if j not in members
        and c.received is not None
        and reconstruction_sources(c.received, members, params.k) is None
    }
    for ob in obligations:
        if ob.sender in graph.convicted or ob.receiver in graph.convicted:
            continue
        if ob.step == STEP_RECONSTRUCTED and ob.sender in resend_silent:
            continue
        sent = claims[ob.sender].coded.get(ob.slot)
        got = claims[ob.receiver].received.get(ob.slot)
        if sent != got:
            for ev in graph.remove_edge(ob.sender, ob.receiver):
                events.append((RULE_DISPUTE, ev))

    decide_ids, decide_value = select_decision(
        params, graph, claims, decision_domain, threshold, count_convicted
    )
    return DiagnosisResult(events, decide_ids, decide_value)


def select_decision(
    params: CodeParams,
    graph: TrustGraph,
    claims: Mapping[int, Claims],
    decision_domain: Sequence[int],
    threshold: int,
    count_convicted: bool = False,
) -> tuple[list[int], bytes | None]:
    """Largest equal-coded-claim group meeting the threshold, if any.

    Only complete codeword claims are eligible: the group's value must
    decode, and a fault-free processor's coded claim in the domain is
    always a complete codeword.
    """
    factions: dict[bytes, list[int]] = {}
    for p in sorted(set(decision_domain)):
        if p not in claims:
            continue
        if not count_convicted and p in graph.convicted:
            continue
        coded = claims[p].coded
        if coded is None or not coded.is_complete():
            continue
        if not is_codeword(params, coded):
            continue
        factions.setdefault(coded.canonical_bytes(), []).append(p)
    if not factions:
        return [], None
    best = min(factions.values(), key=lambda ids: (-len(ids), ids))
    if len(best) < threshold:
        return [], None
    return best, decode(params, claims[best[0]].coded)
