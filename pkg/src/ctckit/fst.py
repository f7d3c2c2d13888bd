"""Weighted finite-state transducers over tropical or log weights.

Weights are plain floats carrying negative-log scores; a semiring
object supplies ``plus``/``times``/``zero``/``one``. Composition uses
the standard three-state epsilon filter so that paths mixing epsilon
moves on either side are counted exactly once. Graphs are trimmed
(accessible and coaccessible) after composition; determinization and
minimization are deliberately out of scope.

Binary graph format (little-endian):
  magic ``CTCG``, u32 version=1,
  input symbol table: u32 count, then per symbol u32 byte-length + UTF-8,
  output symbol table: same layout,
  u32 num_states, u32 start_state,
  num_states f64 final weights (+inf marks a non-final state),
  u32 total arc count, then per state u32 arc count followed by that
  many arcs as (u32 ilabel, u32 olabel, f64 weight, u32 nextstate).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .errors import FormatError, GraphError

EPSILON = 0
EPSILON_SYMBOL = "<eps>"

INF = float("inf")

MAGIC = b"CTCG"
VERSION = 1


class TropicalSemiring:
    """(min, +) over nonpositive-to-infinite costs; Viterbi semantics."""

    zero = INF
    one = 0.0

    @staticmethod
    def plus(a: float, b: float) -> float:
        return a if a <= b else b

    @staticmethod
    def times(a: float, b: float) -> float:
        if a == INF or b == INF:
            return INF
        return a + b


class LogSemiring:
    """(-log(e^-a + e^-b), +); full-sum semantics for diagnostics."""

    zero = INF
    one = 0.0

    @staticmethod
    def plus(a: float, b: float) -> float:
        if a == INF:
            return b
        if b == INF:
            return a
        if a > b:
            a, b = b, a
        return a - math.log1p(math.exp(a - b))

    @staticmethod
    def times(a: float, b: float) -> float:
        if a == INF or b == INF:
            return INF
        return a + b


@dataclass(frozen=True)
class Arc:
    ilabel: int
    olabel: int
    weight: float
    nextstate: int


@dataclass
class Wfst:
    """Mutable transducer; treat as immutable once built."""

    isymbols: tuple[str, ...]
    osymbols: tuple[str, ...]
    start: int = 0
    arcs: list = field(default_factory=list)       # per-state list[Arc]
    finals: dict = field(default_factory=dict)     # state -> final weight

    def __post_init__(self):
        if not self.isymbols or self.isymbols[0] != EPSILON_SYMBOL:
            raise GraphError(f"input symbol 0 must be {EPSILON_SYMBOL!r}")
        if not self.osymbols or self.osymbols[0] != EPSILON_SYMBOL:
            raise GraphError(f"output symbol 0 must be {EPSILON_SYMBOL!r}")
        if not self.arcs:
            self.arcs = [[]]

    @property
    def num_states(self) -> int:
        return len(self.arcs)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self.arcs)

    def add_state(self) -> int:
        self.arcs.append([])
        return len(self.arcs) - 1

    def add_arc(self, state: int, ilabel: int, olabel: int,
                weight: float, nextstate: int) -> None:
        if not 0 <= state < self.num_states or not 0 <= nextstate < self.num_states:
            raise GraphError(f"arc endpoints {state}->{nextstate} out of range")
        if not 0 <= ilabel < len(self.isymbols):
            raise GraphError(f"input label {ilabel} not in symbol table")
        if not 0 <= olabel < len(self.osymbols):
            raise GraphError(f"output label {olabel} not in symbol table")
        self.arcs[state].append(Arc(ilabel, olabel, weight, nextstate))

    def set_final(self, state: int, weight: float = 0.0) -> None:
        if not 0 <= state < self.num_states:
            raise GraphError(f"final state {state} out of range")
        self.finals[state] = weight

    def final_weight(self, state: int) -> float:
        return self.finals.get(state, INF)


def compose(a: Wfst, b: Wfst, semiring=TropicalSemiring) -> Wfst:
    """Compose two transducers with the three-state epsilon filter.

    Requires ``a``'s output symbol table to equal ``b``'s input table.
    Filter states: 0 after a match (or at the start), 1 while consuming
    b-side epsilons only, 2 while consuming a-side epsilons only; the
    simultaneous epsilon move is allowed only from 0 and returns to 0.
    The result is trimmed.
    """
    if a.osymbols != b.isymbols:
        raise GraphError(
            "composition symbol mismatch: left output table != right input table")

    out = Wfst(a.isymbols, b.osymbols)
    state_map: dict[tuple[int, int, int], int] = {}

    def get_state(key: tuple[int, int, int]) -> int:
        idx = state_map.get(key)
        if idx is None:
            idx = out.add_state() if state_map else 0
            state_map[key] = idx
        return idx

    start_key = (a.start, b.start, 0)
    stack = [start_key]
    get_state(start_key)

    while stack:
        key = stack.pop()
        qa, qb, f = key
        src = state_map[key]

        fa, fb = a.final_weight(qa), b.final_weight(qb)
        if fa != INF and fb != INF:
            out.finals[src] = semiring.times(fa, fb)

        def emit(ilabel, olabel, weight, next_key):
            if next_key not in state_map:
                dst = get_state(next_key)
                stack.append(next_key)
            else:
                dst = state_map[next_key]
            out.add_arc(src, ilabel, olabel, weight, dst)

        arcs_a = a.arcs[qa]
        arcs_b = b.arcs[qb]

        for arc_a in arcs_a:
            if arc_a.olabel == EPSILON:
                # a-side epsilon alone: allowed unless locked to b-side.
                if f in (0, 2):
                    emit(arc_a.ilabel, EPSILON, arc_a.weight,
                         (arc_a.nextstate, qb, 2))
                # simultaneous epsilon move, canonical form only from 0.
                if f == 0:
                    for arc_b in arcs_b:
                        if arc_b.ilabel == EPSILON:
                            emit(arc_a.ilabel, arc_b.olabel,
                                 semiring.times(arc_a.weight, arc_b.weight),
                                 (arc_a.nextstate, arc_b.nextstate, 0))
            else:
                for arc_b in arcs_b:
                    if arc_b.ilabel == arc_a.olabel:
                        emit(arc_a.ilabel, arc_b.olabel,
                             semiring.times(arc_a.weight, arc_b.weight),
                             (arc_a.nextstate, arc_b.nextstate, 0))
        if f in (0, 1):
            for arc_b in arcs_b:
                if arc_b.ilabel == EPSILON:
                    emit(EPSILON, arc_b.olabel, arc_b.weight,
                         (qa, arc_b.nextstate, 1))

    return trim(out)


def trim(fst: Wfst) -> Wfst:
    """Keep only states on some start-to-final path; renumber stably."""
    n = fst.num_states
    reachable = [False] * n
    stack = [fst.start]
    reachable[fst.start] = True
    while stack:
        s = stack.pop()
        for arc in fst.arcs[s]:
            if not reachable[arc.nextstate]:
                reachable[arc.nextstate] = True
                stack.append(arc.nextstate)

    incoming: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        for arc in fst.arcs[s]:
            incoming[arc.nextstate].append(s)
    useful = [False] * n
    stack = [s for s in fst.finals if reachable[s]]
    for s in stack:
        useful[s] = True
    while stack:
        s = stack.pop()
        for p in incoming[s]:
            if not useful[p]:
                useful[p] = True
                stack.append(p)

    keep = [s for s in range(n) if reachable[s] and useful[s]]
    if fst.start not in keep:
        # Empty language: a start-only graph with no finals.
        empty = Wfst(fst.isymbols, fst.osymbols)
        return empty
    renum = {old: new for new, old in enumerate(keep)}

    out = Wfst(fst.isymbols, fst.osymbols)
    for _ in range(len(keep) - 1):
        out.add_state()
    out.start = renum[fst.start]
    for old in keep:
        for arc in fst.arcs[old]:
            if arc.nextstate in renum:
                out.add_arc(renum[old], arc.ilabel, arc.olabel,
                            arc.weight, renum[arc.nextstate])
        if old in fst.finals:
            out.finals[renum[old]] = fst.finals[old]
    return out


def linear_acceptor(labels, symbols: tuple[str, ...]) -> Wfst:
    """Acceptor for exactly one string, identity input/output."""
    fst = Wfst(symbols, symbols)
    state = 0
    for lab in labels:
        nxt = fst.add_state()
        fst.add_arc(state, lab, lab, 0.0, nxt)
        state = nxt
    fst.set_final(state, 0.0)
    return fst


def identity_acceptor(symbols: tuple[str, ...]) -> Wfst:
    """Single-state acceptor passing every non-epsilon symbol through."""
    fst = Wfst(symbols, symbols)
    for lab in range(1, len(symbols)):
        fst.add_arc(0, lab, lab, 0.0, 0)
    fst.set_final(0, 0.0)
    return fst


def transductions(fst: Wfst, input_labels, max_results: int = 100_000,
                  semiring=TropicalSemiring) -> dict[tuple[int, ...], float]:
    """All accepted (output string -> best weight) for one input string.

    Exhaustive search for test-scale graphs; epsilon input arcs consume
    no input. Raises on runaway result counts.
    """
    labels = tuple(input_labels)
    results: dict[tuple[int, ...], float] = {}
    # (state, consumed, outputs, weight); bound epsilon chains by visit count
    stack = [(fst.start, 0, (), 0.0, 0)]
    while stack:
        state, pos, outs, w, eps_run = stack.pop()
        if len(results) > max_results:
            raise GraphError("too many transductions; graph may be cyclic in epsilon")
        if pos == len(labels):
            fw = fst.final_weight(state)
            if fw != INF:
                total = semiring.times(w, fw)
                prev = results.get(outs)
                results[outs] = total if prev is None else semiring.plus(prev, total)
        for arc in fst.arcs[state]:
            new_outs = outs if arc.olabel == EPSILON else outs + (arc.olabel,)
            if arc.ilabel == EPSILON:
                if eps_run < 10 * fst.num_states:
                    stack.append((arc.nextstate, pos, new_outs,
                                  semiring.times(w, arc.weight), eps_run + 1))
            elif pos < len(labels) and arc.ilabel == labels[pos]:
                stack.append((arc.nextstate, pos + 1, new_outs,
                              semiring.times(w, arc.weight), 0))
    return results


def write_graph(fst: Wfst, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        for table in (fst.isymbols, fst.osymbols):
            fh.write(struct.pack("<I", len(table)))
            for sym in table:
                raw = sym.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
        fh.write(struct.pack("<II", fst.num_states, fst.start))
        for s in range(fst.num_states):
            fh.write(struct.pack("<d", fst.final_weight(s)))
        fh.write(struct.pack("<I", fst.num_arcs))
        for s in range(fst.num_states):
            fh.write(struct.pack("<I", len(fst.arcs[s])))
            for arc in fst.arcs[s]:
                fh.write(struct.pack("<IIdI", arc.ilabel, arc.olabel,
                                     arc.weight, arc.nextstate))


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise FormatError("truncated graph file", path=self.path,
                              offset=self.pos)
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def take_bytes(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError("truncated graph file", path=self.path,
                              offset=self.pos)
        out = self.data[self.pos:self.pos + size]
        self.pos += size
        return out


def read_graph(path) -> Wfst:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}",
                          path=str(path), offset=0)
    r = _Reader(data, str(path))
    r.pos = 4
    (version,) = r.take("<I")
    if version != VERSION:
        raise FormatError(f"unsupported graph version {version}",
                          path=str(path), offset=4)
    tables = []
    for _ in range(2):
        (count,) = r.take("<I")
        syms = []
        for _ in range(count):
            (length,) = r.take("<I")
            syms.append(r.take_bytes(length).decode("utf-8"))
        tables.append(tuple(syms))
    num_states, start = r.take("<II")
    if num_states < 1 or start >= num_states:
        raise FormatError(f"bad state header ({num_states} states, start {start})",
                          path=str(path), offset=r.pos)
    finals = {}
    for s in range(num_states):
        (w,) = r.take("<d")
        if w != INF:
            finals[s] = w
    (total_arcs,) = r.take("<I")
    fst = Wfst(tables[0], tables[1])
    for _ in range(num_states - 1):
        fst.add_state()
    fst.start = start
    fst.finals = finals
    seen_arcs = 0
    for s in range(num_states):
        (count,) = r.take("<I")
        for _ in range(count):
            ilabel, olabel, weight, nextstate = r.take("<IIdI")
            try:
                fst.add_arc(s, ilabel, olabel, weight, nextstate)
            except GraphError as exc:
                raise FormatError(str(exc), path=str(path), offset=r.pos) from exc
            seen_arcs += 1
    if seen_arcs != total_arcs:
        raise FormatError(f"arc count mismatch: header says {total_arcs}, "
                          f"found {seen_arcs}", path=str(path), offset=r.pos)
    if r.pos != len(data):
        raise FormatError("trailing bytes after graph payload",
                          path=str(path), offset=r.pos)
    return fst
