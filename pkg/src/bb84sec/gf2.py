"""GF(2) linear algebra on bit strings packed into Python ints.

A :class:`BitString` of length ``n`` stores bit ``i`` (1-based, as written
left to right) at integer position ``n - i``. The integer value therefore
doubles as the big-endian basis index ``sum(j_i * 2**(n-i))`` used for
``|j>`` kets throughout the package.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_ENUM_CAP = 20
ENUM_CAP_ENV = "BB84SEC_ENUM_CAP"


class GF2Error(ValueError):
    pass


class LengthMismatch(GF2Error):
    pass


class EnumerationCapError(GF2Error):
    pass


def enum_cap() -> int:
    """Enumeration cap, overridable through ``$BB84SEC_ENUM_CAP``."""
    raw = os.environ.get(ENUM_CAP_ENV)
    return int(raw) if raw else DEFAULT_ENUM_CAP


@dataclass(frozen=True, order=True)
class BitString:
    n: int
    value: int

    def __post_init__(self):
        if self.n <= 0:
            raise GF2Error("bit strings must have length > 0")
        if not 0 <= self.value < (1 << self.n):
            raise GF2Error(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise GF2Error(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise GF2Error(f"not a bit: {b!r}")
            value = (value << 1) | b
        return cls(len(bits), value)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    def bits(self) -> list[int]:
        return [(self.value >> (self.n - 1 - i)) & 1 for i in range(self.n)]

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b")

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        """Bit at 0-based position ``i`` from the left."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.value >> (self.n - 1 - i)) & 1

    def __xor__(self, other: "BitString") -> "BitString":
        _same_length(self, other)
        return BitString(self.n, self.value ^ other.value)

    def weight(self) -> int:
        return bin(self.value).count("1")

    def support(self) -> list[int]:
        """0-based positions holding a one."""
        return [i for i in range(self.n) if self[i]]


def _same_length(*strings: BitString) -> None:
    if len({s.n for s in strings}) > 1:
        raise LengthMismatch(f"bit strings have different lengths: {[s.n for s in strings]}")


def dot(x: BitString, v: BitString) -> int:
    """Inner product over GF(2): parity of the bitwise AND."""
    _same_length(x, v)
    return bin(x.value & v.value).count("1") & 1


def rank(vs: Sequence[BitString]) -> int:
    if not vs:
        return 0
    _same_length(*vs)
    basis: dict[int, int] = {}  # leading bit position -> reduced row
    for s in vs:
        row = s.value
        while row:
            lead = row.bit_length() - 1
            if lead not in basis:
                basis[lead] = row
                break
            row ^= basis[lead]
    return len(basis)


def is_independent(vs: Sequence[BitString]) -> bool:
    return rank(vs) == len(vs)


def span_element(vs: Sequence[BitString], s: BitString) -> BitString:
    """``sum_i s_i vs[i]``; ``s`` has one bit per generator."""
    if s.n != len(vs):
        raise LengthMismatch(f"selector of length {s.n} for {len(vs)} generators")
    acc = 0
    for i, g in enumerate(vs):
        if s[i]:
            acc ^= g.value
    return BitString(vs[0].n, acc)


@dataclass(frozen=True)
class ParityCode:
    """Privacy-amplification string ``v`` plus ``r`` public parity checks."""

    v: BitString
    ecc_strings: tuple[BitString, ...] = field(default=())
    ecc_bits: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "ecc_strings", tuple(self.ecc_strings))
        object.__setattr__(self, "ecc_bits", tuple(int(b) for b in self.ecc_bits))
        problems = self.problems()
        if problems:
            raise GF2Error("; ".join(problems))

    def problems(self) -> list[str]:
        return code_problems(self.v, self.ecc_strings, self.ecc_bits)

    @property
    def n(self) -> int:
        return self.v.n

    @property
    def r(self) -> int:
        return len(self.ecc_strings)

    @property
    def strings(self) -> list[BitString]:
        return [self.v, *self.ecc_strings]

    @classmethod
    def from_strs(cls, v: str, ecc_strings: Sequence[str] = (), ecc_bits: Sequence[int] = ()) -> "ParityCode":
        return cls(
            BitString.from_str(v),
            tuple(BitString.from_str(s) for s in ecc_strings),
            tuple(ecc_bits),
        )

    def to_dict(self) -> dict:
        return {
            "v": str(self.v),
            "ecc_strings": [str(s) for s in self.ecc_strings],
            "ecc_bits": list(self.ecc_bits),
        }


def code_problems(v: BitString, ecc_strings: Sequence[BitString], ecc_bits: Sequence[int]) -> list[str]:
    """Violated ParityCode invariants, as human-readable messages."""
    out = []
    r = len(ecc_strings)
    if r != len(ecc_bits):
        out.append(f"{r} ecc strings but {len(ecc_bits)} ecc bits")
    if any(b not in (0, 1) for b in ecc_bits):
        out.append("ecc bits must be 0 or 1")
    if any(s.n != v.n for s in ecc_strings):
        out.append("ecc strings and v have different lengths")
        return out
    if v.value == 0:
        out.append("privacy-amplification string v is all zeros")
    if r >= v.n:
        out.append(f"r = {r} must be < n = {v.n}")
    if not is_independent([v, *ecc_strings]):
        out.append("v, v_1..v_r are not linearly independent over GF(2)")
    return out


def solve_affine(rows: Sequence[BitString], rhs: Sequence[int], cap: int | None = None) -> list[BitString]:
    """All ``x`` with ``rows[i] . x == rhs[i]``, sorted lexicographically.

    The system is reduced to row echelon form; the free variables are then
    enumerated in lexicographic order, and the result sorted as strings.
    """
    if not rows:
        raise GF2Error("empty system")
    _same_length(*rows)
    n = rows[0].n
    cap = enum_cap() if cap is None else cap
    # augmented rows: coefficient bits shifted left by one, rhs in bit 0
    pivots: dict[int, int] = {}
    for row, b in zip(rows, rhs):
        aug = (row.value << 1) | (b & 1)
        for lead in sorted(pivots, reverse=True):
            if (aug >> (lead + 1)) & 1:
                aug ^= pivots[lead]
        if aug >> 1 == 0:
            if aug & 1:
                return []  # inconsistent
            continue
        lead = (aug >> 1).bit_length() - 1
        for other in list(pivots):
            if (pivots[other] >> (lead + 1)) & 1:
                pivots[other] ^= aug
        pivots[lead] = aug
    free = [p for p in range(n - 1, -1, -1) if p not in pivots]
    if len(free) > cap:
        raise EnumerationCapError(f"{2 ** len(free)} solutions (2^{len(free)}) exceeds cap 2^{cap}")
    out = []
    for k in range(1 << len(free)):
        x = 0
        for i, pos in enumerate(free):
            if (k >> (len(free) - 1 - i)) & 1:
                x |= 1 << pos
        for lead, aug in pivots.items():
            coeffs = (aug >> 1) & ~(1 << lead)
            bit = (aug & 1) ^ (bin(coeffs & x).count("1") & 1)
            if bit:
                x |= 1 << lead
        out.append(BitString(n, x))
    out.sort(key=lambda s: s.value)
    return out


def enumerate_solutions(code: ParityCode, key_bit: int, cap: int | None = None) -> list[BitString]:
    """Strings ``x`` with ``x.v == key_bit`` and ``x.v_i == b_i`` for every check."""
    cap = enum_cap() if cap is None else cap
    free = code.n - code.r - 1
    if free > cap:
        raise EnumerationCapError(f"n - r - 1 = {free} exceeds enumeration cap {cap}")
    return solve_affine(code.strings, [key_bit, *code.ecc_bits], cap=cap)


@dataclass(frozen=True)
class CosetWeights:
    """Per-coset offsets ``v XOR v_s``; ``selectors[k]`` is ``s`` as an int of ``r`` bits."""

    r: int
    selectors: list[int]
    offsets: list[BitString]
    weights: list[int]

    @property
    def min_weight(self) -> int:
        return min(self.weights)

    def alpha(self) -> float:
        return self.min_weight / self.offsets[0].n

    def selector_str(self, k: int) -> str:
        return format(self.selectors[k], f"0{self.r}b") if self.r else ""


def coset_weights(code: ParityCode, cap: int | None = None) -> CosetWeights:
    """Hamming weights of ``v XOR v_s`` for every ``s`` in ``{0,1}^r``."""
    cap = enum_cap() if cap is None else cap
    r = code.r
    if r > cap:
        raise EnumerationCapError(f"2^{r} cosets exceeds cap 2^{cap}")
    offsets, weights = [], []
    for k in range(1 << r):
        acc = code.v.value
        for i, g in enumerate(code.ecc_strings):
            if (k >> (r - 1 - i)) & 1:
                acc ^= g.value
        off = BitString(code.n, acc)
        offsets.append(off)
        weights.append(off.weight())
    return CosetWeights(r, list(range(1 << r)), offsets, weights)


def selector_parity(k: int, r: int, bits: Sequence[int]) -> int:
    """``s . b`` for the selector ``s`` encoded as the ``r``-bit int ``k``."""
    return sum((k >> (r - 1 - i)) & bits[i] for i in range(r)) & 1
