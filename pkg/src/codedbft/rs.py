"""Systematic Reed-Solomon coding over GF(2^8), byte-interleaved.

A macro-symbol is a fixed-length byte string of `sym_bytes` bytes.  Byte
lane b of the n slots forms an independent (n, k) codeword: the codeword
is the evaluation of the unique degree-below-k polynomial through the k
data bytes at the field points 1..n.  Slots 1..k therefore carry the data
verbatim and any k slots determine the rest (minimum distance n - k + 1).

Erased slots are represented as None.  All functions are pure; vectors
passed in are never mutated by the codec.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .gf256 import gf_div, gf_mul


class ParameterError(ValueError):
    """Code parameters outside the supported range."""


class InsufficientSymbolsError(ValueError):
    """Fewer non-erased slots than the code dimension k."""


class NotACodewordError(ValueError):
    """Vector is inconsistent with every degree-below-k polynomial."""


@dataclass(frozen=True)
class CodeParams:
    """Shape of one (n, k) byte-interleaved code instance."""

    n: int
    k: int
    sym_bytes: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"need 1 <= k <= n, got n={self.n} k={self.k}")
        if self.n > 255:
            raise ParameterError(f"n={self.n} exceeds the 255 field points of GF(2^8)")
        if self.sym_bytes < 1:
            raise ParameterError(f"sym_bytes must be positive, got {self.sym_bytes}")

    @property
    def distance(self) -> int:
        return self.n - self.k + 1

    @property
    def block_bytes(self) -> int:
        """Payload bytes carried by one codeword (k data macro-symbols)."""
        return self.k * self.sym_bytes


class SymbolVector:
    """n macro-symbol slots addressed by 1-based position; None marks erasure."""

    __slots__ = ("n", "sym_bytes", "_slots")

    def __init__(self, n: int, sym_bytes: int, slots: Sequence[bytes | None] | None = None):
        self.n = n
        self.sym_bytes = sym_bytes
        if slots is None:
            self._slots: list[bytes | None] = [None] * n
        else:
            if len(slots) != n:
                raise ParameterError(f"expected {n} slots, got {len(slots)}")
            self._slots = list(slots)
        for value in self._slots:
            self._check_symbol(value)

    def _check_symbol(self, value: bytes | None) -> None:
        if value is not None and len(value) != self.sym_bytes:
            raise ParameterError(
                f"macro-symbol must be {self.sym_bytes} bytes, got {len(value)}"
            )

    def get(self, pos: int) -> bytes | None:
        return self._slots[pos - 1]

    def set(self, pos: int, value: bytes | None) -> None:
        self._check_symbol(value)
        self._slots[pos - 1] = value

    def present_positions(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self._slots) if v is not None]

    def is_complete(self) -> bool:
        return all(v is not None for v in self._slots)

    def copy(self) -> "SymbolVector":
        return SymbolVector(self.n, self.sym_bytes, self._slots)

    def payload_bits(self) -> int:
        """Broadcast size: one presence bit per slot plus the present bytes."""
        return self.n + 8 * self.sym_bytes * len(self.present_positions())

    def canonical_bytes(self) -> bytes:
        """Stable serialization used for equality grouping and transcripts."""
        parts = []
        for v in self._slots:
            parts.append(b"\x00" if v is None else b"\x01" + v)
        return b"".join(parts)

    def to_jsonable(self) -> list[str | None]:
        return [None if v is None else v.hex() for v in self._slots]

    @classmethod
    def from_jsonable(cls, n: int, sym_bytes: int, data: Sequence[str | None]) -> "SymbolVector":
        slots = [None if v is None else bytes.fromhex(v) for v in data]
        return cls(n, sym_bytes, slots)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolVector):
            return NotImplemented
        return (
            self.n == other.n
            and self.sym_bytes == other.sym_bytes
            and self._slots == other._slots
        )

    def __repr__(self) -> str:
        body = ",".join("-" if v is None else v.hex() for v in self._slots)
        return f"SymbolVector[{body}]"


@lru_cache(maxsize=None)
def _lagrange_coeffs(xs: tuple[int, ...], target: int) -> tuple[int, ...]:
    """Weight of each sample when evaluating the interpolant at `target`."""
    coeffs = []
    for s, x_s in enumerate(xs):
        num = 1
        den = 1
        for u, x_u in enumerate(xs):
            if u == s:
                continue
            num = gf_mul(num, target ^ x_u)
            den = gf_mul(den, x_s ^ x_u)
        coeffs.append(gf_div(num, den))
    return tuple(coeffs)


def _eval_at(sources: Sequence[tuple[int, bytes]], target: int, sym_bytes: int) -> bytes:
    xs = tuple(pos for pos, _ in sources)
    coeffs = _lagrange_coeffs(xs, target)
    out = bytearray(sym_bytes)
    for c, (_, sym) in zip(coeffs, sources):
        if c == 0:
            continue
        for lane in range(sym_bytes):
            out[lane] ^= gf_mul(c, sym[lane])
    return bytes(out)


def encode(params: CodeParams, data: bytes) -> SymbolVector:
    """Spread k data macro-symbols over n slots; slots 1..k hold the data."""
    if len(data) != params.block_bytes:
        raise ParameterError(
            f"data block must be {params.block_bytes} bytes, got {len(data)}"
        )
    s = params.sym_bytes
    vec = SymbolVector(params.n, s)
    sources = []
    for pos in range(1, params.k + 1):
        sym = data[(pos - 1) * s : pos * s]
        vec.set(pos, sym)
        sources.append((pos, sym))
    for pos in range(params.k + 1, params.n + 1):
        vec.set(pos, _eval_at(sources, pos, s))
    return vec


def _seed_sources(params: CodeParams, vec: SymbolVector) -> list[tuple[int, bytes]]:
    present = vec.present_positions()
    if len(present) < params.k:
        raise InsufficientSymbolsError(
            f"need {params.k} non-erased slots, have {len(present)}"
        )
    return [(pos, vec.get(pos)) for pos in present[: params.k]]


def is_codeword(params: CodeParams, vec: SymbolVector) -> bool:
    """Consistency of every non-erased slot with one degree-below-k polynomial.

    Interpolates through the k lowest non-erased slots and checks the rest.
    Raises InsufficientSymbolsError when fewer than k slots are present;
    callers in the protocol treat that as a detection.
    """
    if vec.n != params.n or vec.sym_bytes != params.sym_bytes:
        raise ParameterError("vector shape does not match code parameters")
    seed = _seed_sources(params, vec)
    seed_positions = {pos for pos, _ in seed}
    for pos in vec.present_positions():
        if pos in seed_positions:
            continue
        if vec.get(pos) != _eval_at(seed, pos, params.sym_bytes):
            return False
    return True


def reconstruct_position(
    params: CodeParams, vec: SymbolVector, pos: int, sources: Iterable[int]
) -> bytes:
    """Value at `pos` of the codeword through exactly k given source slots."""
    src = list(sources)
    if len(src) != params.k:
        raise ParameterError(f"need exactly {params.k} sources, got {len(src)}")
    if len(set(src)) != params.k:
        raise ParameterError("duplicate source positions")
    pairs = []
    for p in src:
        if not 1 <= p <= params.n:
            raise ParameterError(f"source position {p} out of range 1..{params.n}")
        value = vec.get(p)
        if value is None:
            raise InsufficientSymbolsError(f"source slot {p} is erased")
        pairs.append((p, value))
    return _eval_at(pairs, pos, params.sym_bytes)


def interpolate_full(
    params: CodeParams, vec: SymbolVector, sources: Iterable[int]
) -> SymbolVector:
    """Complete codeword through exactly k source slots of `vec`."""
    src = list(sources)
    out = SymbolVector(params.n, params.sym_bytes)
    for pos in range(1, params.n + 1):
        out.set(pos, reconstruct_position(params, vec, pos, src))
    return out


def decode(params: CodeParams, vec: SymbolVector) -> bytes:
    """Data block of a (possibly erased) vector that passes is_codeword."""
    if not is_codeword(params, vec):
        raise NotACodewordError("vector is not consistent with any codeword")
    seed = _seed_sources(params, vec)
    out = bytearray()
    for pos in range(1, params.k + 1):
        value = vec.get(pos)
        if value is None:
            value = _eval_at(seed, pos, params.sym_bytes)
        out.extend(value)
    return bytes(out)


def min_distance_bruteforce(params: CodeParams) -> int:
    """Exact minimum Hamming distance (in slots) over all codeword pairs.

    The difference of two codewords is itself a codeword (the evaluation
    map is linear over GF(2^8)), so the pairwise minimum equals the
    minimum nonzero-codeword weight. Slot weight is also invariant under
    nonzero scalar multiples, so it suffices to enumerate the codewords
    whose first nonzero data symbol is 1; that costs 256^(k-1) encodes.
    """
    if params.sym_bytes != 1 or (params.k - 1) * 8 > 16:
        raise ParameterError("brute force limited to sym_bytes=1 and k <= 3")
    best = params.n + 1
    for lead in range(params.k):
        tail_len = params.k - lead - 1
        for tail in range(256**tail_len):
            data = bytes(lead) + b"\x01" + tail.to_bytes(tail_len, "big")
            vec = encode(params, data)
            weight = sum(
                1 for pos in range(1, params.n + 1) if vec.get(pos) != b"\x00"
            )
            if weight < best:
                best = weight
                if best == 1:
                    # nothing can beat a weight-1 codeword
                    return best
    return best


def format_test_vector(params: CodeParams, data: bytes, vec: SymbolVector) -> str:
    """One interchange line: 'n k sym_bytes data_hex codeword_hex'."""
    if not vec.is_complete():
        raise ParameterError("test vectors require a complete codeword")
    codeword_hex = "".join(vec.get(pos).hex() for pos in range(1, params.n + 1))
    return f"{params.n} {params.k} {params.sym_bytes} {data.hex()} {codeword_hex}"


def parse_test_vector(line: str) -> tuple[CodeParams, bytes, SymbolVector]:
    fields = line.split()
    if len(fields) != 5:
        raise ParameterError(f"expected 5 fields, got {len(fields)}")
    n, k, sym_bytes = int(fields[0]), int(fields[1]), int(fields[2])
    params = CodeParams(n, k, sym_bytes)
    data = bytes.fromhex(fields[3])
    raw = bytes.fromhex(fields[4])
    if len(raw) != n * sym_bytes:
        raise ParameterError("codeword field has the wrong length")
    slots = [raw[i * sym_bytes : (i + 1) * sym_bytes] for i in range(n)]
    return params, data, SymbolVector(n, sym_bytes, slots)
