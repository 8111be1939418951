"""Text notation for curve configurations.

GRAMMAR (whitespace insensitive)

    type      := term ('+' term)*
    term      := [count] component
    component := chain | fork | bench | dynkin
    chain     := '[' entry (',' entry)* ']'
    bench     := '[[' entry (',' entry)* ']]' [tipmarks]
    fork      := '<' int marks ';' chain ',' chain ',' chain '>'
    dynkin    := ('A' | 'D' | 'E') int
    entry     := int marks | '(' int ')_' int marks      (run, length >= 0)
    tipmarks  := '(' marks ';' marks ';' marks ';' marks ')'
    marks     := ('!' | '@' int | '@@' int)*
    count     := int

A chain entry k stands for a curve of self-intersection -k.  The mark '!'
declares the curve horizontal (a section of the fibration under study);
'@j' records that the j-th exterior (-1)-curve meets it, '@@j' that it
meets twice.  Fork twigs are read outward from the branch curve.  Bench
tip marks name the four (-2)-tips in the order left pair then right pair.
Dynkin names expand to the usual configurations of (-2)-curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graphs import Shape, WeightedGraph


class NotationError(ValueError):
    pass


Mark = tuple[str, int, int]  # ("H", 0, 0) or ("A", j, times)


@dataclass(frozen=True)
class DecoratedType:
    """A configuration plus fibration decorations.

    graph       the boundary curves only
    horizontal  ids of curves marked '!'
    meets       j -> ((vertex id, times), ...) for vertical contacts of
                the j-th exterior (-1)-curve
    crossings   like meets, but on horizontal curves
    ties        (i, j) pairs of exterior curves meeting each other; they
                arise when the chain separating two exterior curves in a
                fiber degenerates to nothing
    """

    graph: WeightedGraph
    horizontal: frozenset[str] = frozenset()
    meets: dict[int, tuple[tuple[str, int], ...]] = field(default_factory=dict)
    crossings: dict[int, tuple[tuple[str, int], ...]] = field(default_factory=dict)
    ties: tuple[tuple[int, int], ...] = ()

    def vertical_ids(self) -> list[str]:
        return [v for v in self.graph.ids() if v not in self.horizontal]


# -- parsing ----------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str) -> None:
        self.text = text
        self.i = 0

    def skip_ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self, k: int = 1) -> str:
        self.skip_ws()
        return self.text[self.i : self.i + k]

    def take(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.i):
            self.fail(f"expected {token!r}")
        self.i += len(token)

    def try_take(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.i):
            self.i += len(token)
            return True
        return False

    def int(self, allow_negative: bool = False) -> int:
        self.skip_ws()
        j = self.i
        if allow_negative and j < len(self.text) and self.text[j] == "-":
            j += 1
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        if j == self.i or self.text[self.i : j] == "-":
            self.fail("expected an integer")
        val = int(self.text[self.i : j])
        self.i = j
        return val

    def at_end(self) -> bool:
        self.skip_ws()
        return self.i >= len(self.text)

    def fail(self, msg: str) -> None:
        raise NotationError(f"parse error at position {self.i}: {msg}")


def _parse_marks(s: _Scanner) -> list[Mark]:
    marks: list[Mark] = []
    while True:
        if s.try_take("!"):
            marks.append(("H", 0, 0))
        elif s.peek(2) == "@@":
            s.take("@@")
            marks.append(("A", s.int(), 2))
        elif s.peek() == "@":
            s.take("@")
            marks.append(("A", s.int(), 1))
        else:
            return marks


def _parse_entries(s: _Scanner, closer: str) -> list[tuple[int, list[Mark]]]:
    entries: list[tuple[int, list[Mark]]] = []
    while True:
        if s.peek() == "(":
            s.take("(")
            w = s.int()
            s.take(")")
            s.take("_")
            n = s.int()
            if n < 0:
                s.fail("run length must be >= 0")
            marks = _parse_marks(s)
            if marks and n == 0:
                s.fail("marks on an empty run")
            for k in range(n):
                entries.append((w, marks if k == n - 1 else []))
        else:
            w = s.int()
            if w < 1:
                s.fail("curve weight must be >= 1")
            entries.append((w, _parse_marks(s)))
        if s.try_take(","):
            continue
        s.take(closer)
        return entries


_DYNKIN_FORKS = {"D": None, "E": {6: (2, 2), 7: (3, 2), 8: (4, 2)}}


def _dynkin_component(letter: str, n: int, s: _Scanner):
    if letter == "A":
        if n < 1:
            s.fail("A rank must be >= 1")
        return ("chain", [(2, []) for _ in range(n)])
    if letter == "D":
        if n < 4:
            s.fail("D rank must be >= 4")
        twigs = [[(2, [])] * (n - 3), [(2, [])], [(2, [])]]
        return ("fork", (2, []), twigs)
    if n not in (6, 7, 8):
        s.fail("E rank must be 6, 7 or 8")
    a, b = _DYNKIN_FORKS["E"][n]
    twigs = [[(2, [])] * a, [(2, [])] * b, [(2, [])]]
    return ("fork", (2, []), twigs)


def _parse_component(s: _Scanner):
    c = s.peek()
    if s.peek(2) == "[[":
        s.take("[[")
        entries = _parse_entries(s, "]]")
        tipmarks: list[list[Mark]] = [[], [], [], []]
        if s.peek() == "(":
            s.take("(")
            for k in range(4):
                tipmarks[k] = _parse_marks(s)
                s.take(";") if k < 3 else s.take(")")
        return ("bench", entries, tipmarks)
    if c == "[":
        s.take("[")
        return ("chain", _parse_entries(s, "]"))
    if c == "<":
        s.take("<")
        b = s.int()
        bmarks = _parse_marks(s)
        s.take(";")
        twigs = []
        for k in range(3):
            s.take("[")
            twigs.append(_parse_entries(s, "]"))
            s.take(",") if k < 2 else s.take(">")
        return ("fork", (b, bmarks), twigs)
    if c in ("A", "D", "E"):
        s.take(c)
        return _dynkin_component(c, s.int(), s)
    s.fail("expected a component")


def parse_type(text: str) -> DecoratedType:
    """Parse a configuration literal into a decorated type.

    >>> len(parse_type("2A1+A3").graph)
    5
    """
    s = _Scanner(text)
    comps = []
    while True:
        count = 1
        s.skip_ws()
        if s.peek() and s.peek().isdigit():
            count = s.int()
            if count < 1:
                s.fail("count must be >= 1")
        comp = _parse_component(s)
        comps.extend([comp] * count)
        if s.try_take("+"):
            continue
        if s.at_end():
            break
        s.fail("expected '+' or end of input")
    return build_components(comps)


def parse_chain(text: str) -> tuple[int, ...]:
    """Parse a bare chain literal; marks are rejected, '[]' is empty.

    Entries below 2 are allowed here since contraction input needs them.
    """
    s = _Scanner(text)
    s.take("[")
    if s.try_take("]"):
        entries: list[tuple[int, list[Mark]]] = []
    else:
        entries = _parse_entries(s, "]")
    if not s.at_end():
        s.fail("trailing input after chain")
    if any(m for _, m in entries):
        raise NotationError("marks are not allowed on a bare chain")
    return tuple(w for w, _ in entries)


def build_components(comps) -> DecoratedType:
    g = WeightedGraph()
    horizontal: set[str] = set()
    meets: dict[int, list[tuple[str, int]]] = {}
    crossings: dict[int, list[tuple[str, int]]] = {}

    def place(vid: str, weight: int, marks: list[Mark]) -> None:
        g.add_vertex(vid, -weight)
        for kind, j, times in marks:
            if kind == "H":
                horizontal.add(vid)
        for kind, j, times in marks:
            if kind == "A":
                target = crossings if vid in horizontal else meets
                target.setdefault(j, []).append((vid, times))

    for t, comp in enumerate(comps):
        p = f"t{t:02d}"
        if comp[0] == "chain":
            entries = comp[1]
            if not entries:
                continue
            for j, (w, marks) in enumerate(entries):
                place(f"{p}.c{j:02d}", w, marks)
            for j in range(len(entries) - 1):
                g.add_edge(f"{p}.c{j:02d}", f"{p}.c{j + 1:02d}")
        elif comp[0] == "fork":
            (b, bmarks), twigs = comp[1], comp[2]
            if any(not tw for tw in twigs):
                raise NotationError("fork twigs must be nonempty")
            bid = f"{p}.b"
            place(bid, b, bmarks)
            for k, twig in enumerate(twigs):
                prev = bid
                for j, (w, marks) in enumerate(twig):
                    vid = f"{p}.t{k}.{j:02d}"
                    place(vid, w, marks)
                    g.add_edge(prev, vid)
                    prev = vid
        elif comp[0] == "bench":
            entries, tipmarks = comp[1], comp[2]
            if not entries:
                raise NotationError("bench central chain must be nonempty")
            for j, (w, marks) in enumerate(entries):
                place(f"{p}.c{j:02d}", w, marks)
            for j in range(len(entries) - 1):
                g.add_edge(f"{p}.c{j:02d}", f"{p}.c{j + 1:02d}")
            last = f"{p}.c{len(entries) - 1:02d}"
            anchors = [f"{p}.c00", f"{p}.c00", last, last]
            for k, anchor in enumerate(anchors):
                vid = f"{p}.k{k}"
                place(vid, 2, tipmarks[k])
                g.add_edge(anchor, vid)
    return DecoratedType(
        graph=g,
        horizontal=frozenset(horizontal),
        meets={j: tuple(v) for j, v in sorted(meets.items())},
        crossings={j: tuple(v) for j, v in sorted(crossings.items())},
    )


# -- formatting -------------------------------------------------------------


def _render_entries(ws: Sequence[int], marks: dict[int, str]) -> str:
    """Compress runs of length >= 3 into (w)_n; marks break runs."""
    parts = []
    i = 0
    while i < len(ws):
        j = i
        while (
            j < len(ws)
            and ws[j] == ws[i]
            and not (j > i and marks.get(j - 1))
            and not marks.get(j)
        ):
            j += 1
        n = j - i
        if n >= 3:
            parts.append(f"({ws[i]})_{n}")
            i = j
        else:
            parts.append(f"{ws[i]}{marks.get(i, '')}")
            i += 1
    return ",".join(parts)


def _marks_str(marklist: Iterable[Mark]) -> str:
    out = []
    for kind, j, times in marklist:
        if kind == "H":
            out.append("!")
        else:
            out.append(("@@" if times == 2 else "@") + str(j))
    return "".join(out)


def _dynkin_name(shape: Shape) -> str | None:
    if shape.kind == "chain" and len(shape.weights) >= 1 and all(
        w == 2 for w in shape.weights
    ):
        return f"A{len(shape.weights)}"
    if shape.kind == "fork" and shape.weights == (2,):
        tw = sorted(shape.twigs, key=lambda t: (len(t), t))
        if any(w != 2 for t in tw for w in t):
            return None
        lens = sorted(len(t) for t in tw)
        if lens[0] == 1 and lens[1] == 1:
            return f"D{3 + lens[2]}"
        if lens[:2] == [1, 2] and lens[2] in (2, 3, 4):
            return f"E{4 + lens[2]}"
    return None


def format_shape(shape: Shape, mark_of: dict[str, str] | None = None) -> str:
    """Render one component; Dynkin names fire only when unmarked."""
    marked = bool(mark_of) and any(mark_of.get(v) for v in shape.ids)
    if not marked:
        name = _dynkin_name(shape)
        if name:
            return name
    mark_of = mark_of or {}
    if shape.kind == "chain":
        return "[" + _best_run(shape.weights, shape.order, mark_of) + "]"
    if shape.kind == "fork":
        btxt = f"{shape.weights[0]}{mark_of.get(shape.order[0], '')}"
        ttxt = []
        for ws, ids in zip(shape.twigs, shape.twig_order):
            marks = {i: mark_of.get(v, "") for i, v in enumerate(ids)}
            ttxt.append("[" + _render_entries(ws, marks) + "]")
        return f"<{btxt};{','.join(ttxt)}>"
    if shape.kind == "bench":
        return _render_bench(shape, mark_of)
    if shape.kind == "cycle":
        return "cycle[" + ",".join(str(w) for w in shape.weights) + "]"
    if shape.kind == "genus1":
        return f"genus1[{shape.weights[0]}]"
    return "other{" + ",".join(shape.ids) + "}"


def _best_run(
    ws: Sequence[int], ids: Sequence[str], mark_of: dict[str, str]
) -> str:
    """Render a path in whichever orientation compares smaller."""
    marks = {i: mark_of.get(v, "") for i, v in enumerate(ids)}
    fwd = _render_entries(list(ws), marks)
    rev_marks = {len(ids) - 1 - i: m for i, m in marks.items()}
    rev = _render_entries(list(ws)[::-1], rev_marks)
    return min(fwd, rev)


def _render_bench(shape: Shape, mark_of: dict[str, str]) -> str:
    cands = []
    for flip in (False, True):
        order = shape.order[::-1] if flip else shape.order
        ws = shape.weights[::-1] if flip else shape.weights
        tips = shape.tips[2:] + shape.tips[:2] if flip else shape.tips
        marks = {i: mark_of.get(v, "") for i, v in enumerate(order)}
        central = _render_entries(ws, marks)
        groups = [mark_of.get(t, "") for t in tips]
        suffix = "(" + ";".join(groups) + ")" if any(groups) else ""
        cands.append(f"[[{central}]]{suffix}")
    return min(cands)


def format_type(value: DecoratedType | WeightedGraph) -> str:
    """Canonical text for a configuration, decorations included.

    Components are sorted by a structural key and grouped with counts,
    so equal configurations format identically.
    """
    if isinstance(value, DecoratedType):
        g = value.graph
        mark_of: dict[str, str] = {}
        for v in value.horizontal:
            mark_of[v] = "!"
        contacts: dict[str, list[Mark]] = {}
        for j, pairs in list(value.meets.items()) + list(value.crossings.items()):
            for vid, times in pairs:
                contacts.setdefault(vid, []).append(("A", j, times))
        for vid, ms in contacts.items():
            ms.sort(key=lambda m: m[1])
            mark_of[vid] = mark_of.get(vid, "") + _marks_str(ms)
    else:
        g = value
        mark_of = {}
    if len(g) == 0:
        return "0"
    rendered = []
    for shape in g.recognize_shapes():
        key = (
            _KIND_RANK.get(shape.kind, 9),
            len(shape.ids),
            shape.canonical_weights(),
            shape.twigs,
        )
        rendered.append((key, format_shape(shape, mark_of)))
    rendered.sort(key=lambda kv: (kv[0], kv[1]))
    out = []
    i = 0
    while i < len(rendered):
        j = i
        while j < len(rendered) and rendered[j][1] == rendered[i][1]:
            j += 1
        n = j - i
        out.append((str(n) if n > 1 else "") + rendered[i][1])
        i = j
    return "+".join(out)


def canonical_type(value: DecoratedType | WeightedGraph) -> str:
    """Canonical text with all decorations stripped: the bare type."""
    g = value.graph if isinstance(value, DecoratedType) else value
    return format_type(g)


_KIND_RANK = {"chain": 0, "fork": 1, "bench": 2, "cycle": 3, "genus1": 4, "other": 5}
