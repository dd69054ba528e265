"""Rate-1/2 feedforward convolutional codes and their trellises.

Generators are written in octal with the most significant bit acting on the
current input (delay 0).  For a code of memory ``nu`` the full register is the
``nu + 1`` bit integer ``(b << nu) | state`` where ``state`` holds the previous
``nu`` inputs, most recent input in its top bit.  The output bit of a generator
is the parity of ``register & g`` and the next state is ``register >> 1``.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConvCode",
    "Trellis",
    "CodeTableError",
    "SearchBudgetExceeded",
    "parse_code",
    "build_trellis",
    "free_distance",
    "code_table",
    "CODE_TABLE",
]


class CodeTableError(KeyError):
    """Requested (family, n_states) entry does not exist in the code table."""


class SearchBudgetExceeded(RuntimeError):
    """Free-distance search ran past its step cap (likely a catastrophic code)."""


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class ConvCode:
    g0: int
    g1: int
    nu: int

    def __post_init__(self):
        if self.nu < 1:
            raise ValueError(f"constraint length must be >= 1, got {self.nu}")
        width = self.nu + 1
        for g in (self.g0, self.g1):
            if g <= 0 or g >= (1 << width):
                raise ValueError(f"generator {g:o} does not fit in {width} bits")
        top = 1 << self.nu
        if not ((self.g0 | self.g1) & top) or not ((self.g0 | self.g1) & 1):
            raise ValueError(
                f"code [{self.g0:o} {self.g1:o}] has no delay-0 or no delay-{self.nu} tap"
            )

    @property
    def n_states(self) -> int:
        return 1 << self.nu

    def octal(self) -> str:
        """Octal pair as printed in code tables, e.g. ``'13 04'``."""
        width = (self.nu + 3) // 3
        return f"{self.g0:0{width}o} {self.g1:0{width}o}"

    def __str__(self) -> str:
        return f"[{self.octal()}]"


@dataclass(frozen=True, eq=False)
class Trellis:
    """State-transition table of a rate-1/2 code.

    ``next_state[s, b]`` and ``out_label[s, b]`` give the successor and the 2-bit
    branch label (g0 output in the high bit) for input bit ``b`` from state ``s``.
    ``prev_state[s, x]`` lists the two predecessors of ``s``; ``prev_label`` the
    matching branch labels.  All arrays are read-only.
    """

    n_states: int
    next_state: np.ndarray
    out_label: np.ndarray
    prev_state: np.ndarray = field(repr=False)
    prev_label: np.ndarray = field(repr=False)
    code: ConvCode | None = None

    def input_bit(self, state: int) -> int:
        """Input bit carried by every branch entering ``state``."""
        return state >> (self.n_states.bit_length() - 2)


_OCTAL_PAIR = re.compile(r"^\s*(\[)?\s*([0-7]+)\s+([0-7]+)\s*(?(1)\])\s*$")


def parse_code(spec: str) -> ConvCode:
    """Parse ``"133 171"`` (optionally bracketed) into a :class:`ConvCode`."""
    m = _OCTAL_PAIR.match(spec)
    if m is None:
        raise ValueError(f"expected two whitespace-separated octal numbers, got {spec!r}")
    g0, g1 = int(m.group(2), 8), int(m.group(3), 8)
    if g0 == 0 or g1 == 0:
        raise ValueError(f"zero generator in {spec!r}")
    nu = max(g0, g1).bit_length() - 1
    if nu < 1:
        raise ValueError(f"{spec!r} is memoryless (nu = 0)")
    return ConvCode(g0, g1, nu)


def build_trellis(code: ConvCode) -> Trellis:
    n = code.n_states
    nxt = np.empty((n, 2), dtype=np.int64)
    lab = np.empty((n, 2), dtype=np.int64)
    prev = np.full((n, 2), -1, dtype=np.int64)
    prev_lab = np.empty((n, 2), dtype=np.int64)
    for s in range(n):
        for b in (0, 1):
            reg = (b << code.nu) | s
            label = (_parity(reg & code.g0) << 1) | _parity(reg & code.g1)
            ns = reg >> 1
            nxt[s, b] = ns
            lab[s, b] = label
            # the dropped register bit orders the two predecessors
            x = s & 1
            prev[ns, x] = s
            prev_lab[ns, x] = label
    for a in (nxt, lab, prev, prev_lab):
        a.setflags(write=False)
    return Trellis(n, nxt, lab, prev, prev_lab, code)


def free_distance(code: ConvCode, max_steps: int | None = None) -> int:
    """Minimum Hamming weight of a detour leaving and re-merging with state 0.

    Dijkstra over trellis states, ordered by (weight, length).  Raises
    :class:`SearchBudgetExceeded` if the best open path exceeds ``max_steps``
    (default ``50 * nu``) before a merge is found.
    """
    if max_steps is None:
        max_steps = 50 * code.nu
    tr = build_trellis(code)
    weight = [0, 1, 1, 2]
    start = int(tr.next_state[0, 1])
    w0 = weight[int(tr.out_label[0, 1])]
    if start == 0:
        return w0
    best = {start: w0}
    heap = [(w0, 1, start)]
    while heap:
        w, steps, s = heapq.heappop(heap)
        if s == 0:
            return w
        if w > best.get(s, w):
            continue
        if steps >= max_steps:
            raise SearchBudgetExceeded(f"{code}: no merge within {max_steps} steps")
        for b in (0, 1):
            ns = int(tr.next_state[s, b])
            nw = w + weight[int(tr.out_label[s, b])]
            if ns == 0 or nw < best.get(ns, nw + 1):
                if ns != 0:
                    best[ns] = nw
                heapq.heappush(heap, (nw, steps + 1, ns))
    raise SearchBudgetExceeded(f"{code}: search exhausted without re-merging")


# (family, n_states) -> octal pair; families follow the two columns of the
# published granular-gain comparison.
CODE_TABLE: dict[str, dict[int, str]] = {
    "ungerboeck": {
        4: "5 2",
        8: "13 04",
        16: "23 04",
        32: "45 10",
        64: "103 024",
        128: "235 126",
        256: "515 362",
    },
    "distance_optimal": {
        4: "5 7",
        8: "13 17",
        16: "23 35",
        32: "53 75",
        64: "133 171",
        256: "561 753",
        1024: "2335 3661",
    },
}

_FAMILY_ALIASES = {
    "ungerboeck": "ungerboeck",
    "traditional": "ungerboeck",
    "distance_optimal": "distance_optimal",
    "distance-optimal": "distance_optimal",
    "proposed": "distance_optimal",
}


def normalize_family(family: str) -> str:
    try:
        return _FAMILY_ALIASES[family.lower()]
    except KeyError:
        raise ValueError(
            f"unknown code family {family!r}; expected one of {sorted(_FAMILY_ALIASES)}"
        ) from None


def code_table(family: str, n_states: int) -> ConvCode:
    fam = normalize_family(family)
    try:
        return parse_code(CODE_TABLE[fam][n_states])
    except KeyError:
        raise CodeTableError(
            f"no {fam} code with {n_states} states: absent in the published table"
        ) from None
