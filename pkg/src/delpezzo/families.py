"""Parametric families of decorated boundary types.

A family couples a graph template with integer and chain parameters,
validity guards, and the expected Euler characteristic of the
logarithmic tangent sheaf.  Templates are written in a compact chain
language:

    [3, m!, (2)_{r-2}@1]      chain literal; runs and braced arithmetic
    <b; [2]^@1, T, adj(T)>    fork; twigs are written tip first
    [[m!]](@1;;@2;)           bench; four tip mark groups
    D{k}@1   GF(T*(2)_2)@2    standard degenerate-fiber stumps
    SUM(j, 1, nu, D{kj}@j)    one term per index j
    CROSS(j, 1, nu)           j-th exceptional curve crosses the
                              horizontal curve once

Marks decorate single entries: ``!`` flags the entry as horizontal for
the fibration and ``@j`` records that the j-th exceptional curve meets
it (``@@j`` twice).  A caret binds the following mark to the first
entry of an item instead of the last.  ``*`` is the chain gluing
product and ``adj``/``rev`` take adjoints and reversals.  A run
``(2)_n`` with n = 0 vanishes (its marks slide to the neighbouring
entry); with n = -1 it absorbs the following entry.

Every family carries a fibration kind.  ``verify_instance`` rebuilds
the degenerate fibers of an instance from the marks and checks the
whole ledger of numerical constraints: negative definiteness, the log
canonical bound, fiber validity, fiber degrees against the horizontal
curves, the positivity test for the adjoint coefficients, the sigma
and Euler counts, and the Euler characteristic column.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Iterator, Mapping, Sequence

import yaml

from .birational import fiber_analysis, sigma_identity
from .chains import adjoint, disc, is_admissible
from .graphs import WeightedGraph
from .notation import (
    DecoratedType,
    build_components,
    canonical_type,
    format_type,
    parse_type,
)
from .singularities import chi_log_tangent, classify_lc, coefficients


class TemplateError(ValueError):
    """A template cannot be parsed or expanded with the given values."""


class GuardViolation(ValueError):
    """Parameter values violate a family guard."""

    def __init__(self, family_id: str, guard: str, params: Mapping[str, Any]):
        self.family_id = family_id
        self.guard = guard
        self.params = dict(params)
        super().__init__(f"family {family_id}: guard {guard!r} fails at {self.params}")


# -- guarded expression evaluation -------------------------------------------


def _as_chain(t) -> tuple[int, ...]:
    return tuple(int(x) for x in t)


def _fork_ok(center, *twigs) -> bool:
    """Admissible-or-log-canonical test for a fork with the given twigs.

    True when the twig determinants satisfy sum(1/d) > 1, or sum(1/d) == 1
    provided the fork is not entirely made of (-2)-vertices (that degenerate
    case is negative semi-definite, so it cannot contract).
    """
    chains = [_as_chain(t) for t in twigs]
    delta = sum(Fraction(1, disc(t)) for t in chains)
    if delta != 1:
        return delta > 1
    return not (center == 2 and all(x == 2 for t in chains for x in t))


_HELPERS = {
    "d": lambda t: disc(_as_chain(t)),
    "len": len,
    "min": min,
    "max": max,
    "abs": abs,
    "adj": lambda t: adjoint(_as_chain(t)),
    "rev": lambda t: tuple(reversed(_as_chain(t))),
    "invd": lambda t: Fraction(1, disc(_as_chain(t))),
    "frac": Fraction,
    "all2": lambda t: all(x == 2 for x in t),
    "fork_ok": _fork_ok,
}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.FloorDiv: lambda a, b: a // b,
    ast.Mod: lambda a, b: a % b,
}

_CMPOPS = {
    ast.Eq: lambda a, b: a == b,
    ast.NotEq: lambda a, b: a != b,
    ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b,
    ast.Gt: lambda a, b: a > b,
    ast.GtE: lambda a, b: a >= b,
    ast.In: lambda a, b: a in b,
    ast.NotIn: lambda a, b: a not in b,
}


def safe_eval(src: str, env: Mapping[str, Any]):
    """Evaluate a guard or chi expression over a restricted grammar.

    Names resolve to parameter values (chains appear as tuples, and list
    displays in the source are read as tuples so ``T == [2,3]`` works).
    Only arithmetic, comparisons, boolean logic, conditional expressions
    and the helpers d/len/min/max/abs/adj/rev/invd/frac/all2/fork_ok
    are allowed.
    """
    tree = ast.parse(src, mode="eval")

    def ev(node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, bool)):
                return node.value
            raise TemplateError(f"constant {node.value!r} not allowed")
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            raise TemplateError(f"unknown name {node.id!r} in {src!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -ev(node.operand)
            if isinstance(node.op, ast.Not):
                return not ev(node.operand)
        if isinstance(node, ast.BoolOp):
            vals = [ev(v) for v in node.values]
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        if isinstance(node, ast.Compare):
            left = ev(node.left)
            for op, comp in zip(node.ops, node.comparators):
                right = ev(comp)
                if type(op) not in _CMPOPS:
                    raise TemplateError("comparison not allowed")
                if not _CMPOPS[type(op)](left, right):
                    return False
                left = right
            return True
        if isinstance(node, ast.IfExp):
            return ev(node.body) if ev(node.test) else ev(node.orelse)
        if isinstance(node, ast.Call):
            if isinstance(node.func, ast.Name) and node.func.id in _HELPERS:
                return _HELPERS[node.func.id](*[ev(a) for a in node.args])
            raise TemplateError(f"call not allowed in {src!r}")
        if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
            return tuple(ev(e) for e in node.elts)
        raise TemplateError(f"forbidden syntax in {src!r}")

    return ev(tree.body)


# -- template parsing ---------------------------------------------------------

_UNIT = object()  # gluing unit: run of length -1 used in a product
_CONSUME = object()  # run of length -1 inside a chain literal


class _Scan:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self._ws()

    def _ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i] in " \t\n":
            self.i += 1

    def peek(self, n: int = 1) -> str:
        return self.text[self.i : self.i + n]

    def at_end(self) -> bool:
        return self.i >= len(self.text)

    def fail(self, msg: str):
        raise TemplateError(f"{msg} at {self.i}: {self.text[self.i:self.i + 16]!r}")

    def try_take(self, tok: str) -> bool:
        if self.text.startswith(tok, self.i):
            self.i += len(tok)
            self._ws()
            return True
        return False

    def take(self, tok: str) -> None:
        if not self.try_take(tok):
            self.fail(f"expected {tok!r}")

    def int_(self) -> int:
        j = self.i
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        if j == self.i:
            self.fail("expected an integer")
        v = int(self.text[self.i : j])
        self.i = j
        self._ws()
        return v

    def ident(self) -> str:
        j = self.i
        if j >= len(self.text) or not self.text[j].isalpha():
            self.fail("expected a name")
        while j < len(self.text) and self.text[j].isalnum():
            j += 1
        name = self.text[self.i : j]
        self.i = j
        self._ws()
        return name


def _parse_marks(s: _Scan) -> list[tuple[bool, str, Any, int]]:
    marks: list[tuple[bool, str, Any, int]] = []
    while True:
        save = s.i
        first = False
        if s.peek() == "^":
            s.i += 1
            first = True
        if s.peek() == "!":
            s.i += 1
            s._ws()
            marks.append((first, "H", 0, 0))
            continue
        if s.peek(2) == "@@":
            s.i += 2
            marks.append((first, "A", _parse_markref(s), 2))
            continue
        if s.peek() == "@":
            s.i += 1
            marks.append((first, "A", _parse_markref(s), 1))
            continue
        s.i = save
        return marks


def _parse_markref(s: _Scan):
    if s.peek().isdigit():
        return s.int_()
    return s.ident()


def _parse_items(s: _Scan, closer: str) -> list:
    items: list = []
    if s.try_take(closer):
        return items
    while True:
        node = _parse_texpr(s, addsub=True)
        marks = _parse_marks(s)
        items.append((node, marks))
        if s.try_take(closer):
            return items
        s.take(",")


def _parse_runlen(s: _Scan):
    if s.try_take("{"):
        node = _parse_texpr(s, addsub=True)
        s.take("}")
        return node
    if s.peek().isdigit():
        return ("num", s.int_())
    return ("name", s.ident())


def _parse_tatom(s: _Scan):
    c = s.peek()
    if c == "[":
        s.take("[")
        return ("lit", _parse_items(s, "]"))
    if c == "(":
        s.take("(")
        inner = _parse_texpr(s, addsub=True)
        s.take(")")
        if s.peek() == "_":
            s.i += 1
            return ("run", inner, _parse_runlen(s))
        return inner
    if c.isdigit():
        return ("num", s.int_())
    name = s.ident()
    if name in ("adj", "rev"):
        s.take("(")
        arg = _parse_texpr(s, addsub=True)
        s.take(")")
        return ("call", name, arg)
    return ("name", name)


def _parse_texpr(s: _Scan, addsub: bool):
    node = _parse_tatom(s)
    while s.try_take("*"):
        node = ("bin", "*", node, _parse_tatom(s))
    while addsub and s.peek() in "+-":
        op = s.peek()
        s.i += 1
        s._ws()
        right = _parse_tatom(s)
        while s.try_take("*"):
            right = ("bin", "*", right, _parse_tatom(s))
        node = ("bin", op, node, right)
    return node


def _parse_term(s: _Scan):
    if s.try_take("SUM("):
        var = s.ident()
        s.take(",")
        lo = _parse_texpr(s, addsub=True)
        s.take(",")
        hi = _parse_texpr(s, addsub=True)
        s.take(",")
        inner = _parse_term(s)
        s.take(")")
        return ("sum", var, lo, hi, inner)
    if s.try_take("CROSS("):
        var = s.ident()
        s.take(",")
        lo = _parse_texpr(s, addsub=True)
        s.take(",")
        hi = _parse_texpr(s, addsub=True)
        s.take(")")
        return ("crossrange", var, lo, hi)
    if s.peek() == "D" and s.peek(2)[1:] in tuple("0123456789{"):
        s.take("D")
        if s.try_take("{"):
            knode = _parse_texpr(s, addsub=True)
            s.take("}")
        else:
            knode = ("num", s.int_())
        return ("dyn", knode, _parse_marks(s))
    if s.try_take("GF("):
        arg = _parse_texpr(s, addsub=True)
        s.take(")")
        return ("gf", arg, _parse_marks(s))
    if s.peek(2) == "[[":
        s.take("[[")
        items = _parse_items(s, "]]")
        s.take("(")
        groups = []
        for k in range(4):
            groups.append(_parse_marks(s))
            s.take(";" if k < 3 else ")")
        return ("bench", items, groups)
    if s.peek() == "<":
        s.take("<")
        bnode = _parse_texpr(s, addsub=False)
        bmarks = _parse_marks(s)
        s.take(";")
        args = []
        for k in range(3):
            node = _parse_texpr(s, addsub=False)
            args.append((node, _parse_marks(s)))
            s.take("," if k < 2 else ">")
        return ("fork", (bnode, bmarks), args)
    node = _parse_texpr(s, addsub=False)
    return ("chain", node, _parse_marks(s))


@lru_cache(maxsize=None)
def _template_ast(text: str) -> tuple:
    s = _Scan(text)
    terms = [_parse_term(s)]
    while s.try_take("+"):
        terms.append(_parse_term(s))
    if not s.at_end():
        s.fail("trailing input")
    return tuple(terms)


# -- template expansion -------------------------------------------------------

Cells = tuple[tuple[int, tuple], ...]


def _cells(ws: Iterable[int]) -> Cells:
    return tuple((int(w), ()) for w in ws)


def _mark(kind: str, ref, times: int, env: Mapping[str, Any]) -> tuple:
    if kind == "H":
        return ("H", 0, 0)
    j = ref if isinstance(ref, int) else env.get(ref)
    if not isinstance(j, int):
        raise TemplateError(f"mark index {ref!r} is not an integer")
    return ("A", j, times)


def _split_marks(marks, env) -> tuple[list, list]:
    first = [_mark(k, r, t, env) for isf, k, r, t in marks if isf]
    last = [_mark(k, r, t, env) for isf, k, r, t in marks if not isf]
    return first, last


def _eval_node(node, env, *, product: bool = False, literal: bool = False):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "name":
        if node[1] not in env:
            raise TemplateError(f"unknown name {node[1]!r}")
        v = env[node[1]]
        return _cells(v) if isinstance(v, tuple) else v
    if kind == "lit":
        return _assemble(node[1], env)
    if kind == "run":
        entry = _eval_node(node[1], env)
        length = _eval_node(node[2], env)
        if not isinstance(entry, int) or not isinstance(length, int):
            raise TemplateError("run entry and length must be integers")
        if length >= 0:
            return _cells([entry] * length)
        if length == -1:
            if product:
                return _UNIT
            if literal:
                return _CONSUME
            raise TemplateError("run of length -1 outside a product or literal")
        raise TemplateError(f"run of length {length}")
    if kind == "call":
        v = _eval_node(node[2], env)
        if not isinstance(v, tuple):
            raise TemplateError(f"{node[1]} expects a chain")
        if node[1] == "rev":
            return tuple(reversed(v))
        if any(ms for _, ms in v):
            raise TemplateError("adjoint of a marked chain")
        return _cells(adjoint(tuple(w for w, _ in v)))
    if kind == "bin":
        op = node[1]
        lv = _eval_node(node[2], env, product=(op == "*"))
        rv = _eval_node(node[3], env, product=(op == "*"))
        if isinstance(lv, int) and isinstance(rv, int):
            return _BINOPS[{"+": ast.Add, "-": ast.Sub, "*": ast.Mult}[op]](lv, rv)
        if op != "*":
            raise TemplateError("only the gluing product applies to chains")
        return _star_cells(lv, rv)
    raise TemplateError(f"cannot evaluate template node {kind!r}")


def _star_cells(l, r) -> Cells:
    if l is _UNIT:
        if not isinstance(r, tuple) or not r:
            raise TemplateError("gluing unit needs a nonempty right operand")
        if len(r) == 1:
            return ()
        return ((r[1][0] + 1, r[1][1]),) + r[2:]
    if r is _UNIT:
        raise TemplateError("gluing unit may only stand on the left")
    if not isinstance(l, tuple) or not isinstance(r, tuple):
        raise TemplateError("gluing product needs chains")
    if not l and not r:
        raise TemplateError("empty gluing product is undefined")
    if not l:
        return r[1:]
    if not r:
        return l
    merged = (l[-1][0] + r[0][0] - 1, l[-1][1] + r[0][1])
    return l[:-1] + (merged,) + r[1:]


def _assemble(items, env) -> Cells:
    cells: list[list] = []
    consume = 0
    hanging: list = []
    for node, marks in items:
        v = _eval_node(node, env, literal=True)
        if v is _CONSUME:
            consume += 1
            continue
        if isinstance(v, int):
            new = [[v, []]]
        else:
            new = [[w, list(ms)] for w, ms in v]
        first, last = _split_marks(marks, env)
        was_empty = not new
        if new:
            new[0][1].extend(first)
            new[-1][1].extend(last)
            while consume and new:
                new.pop(0)
                consume -= 1
        if not new:
            if was_empty:
                hanging.extend(first)
                if last:
                    (cells[-1][1] if cells else hanging).extend(last)
            continue
        if hanging:
            new[0][1].extend(hanging)
            hanging.clear()
        cells.extend(new)
    if consume:
        raise TemplateError("run of length -1 found nothing to absorb")
    if hanging:
        if cells:
            raise TemplateError("marks bind to no entry in a chain literal")
        _orphan(env, hanging)
    return tuple((w, tuple(ms)) for w, ms in cells)


def _orphan(env, marks) -> None:
    """Record marks whose carrier component vanished entirely."""
    sink = env.get("__orphans__")
    if sink is None:
        raise TemplateError("marks stranded on an empty component")
    sink.append(tuple(marks))


def _chain_value(node, marks, env) -> Cells:
    v = _eval_node(node, env)
    if isinstance(v, int):
        raise TemplateError("expected a chain, got an integer")
    first, last = _split_marks(marks, env)
    cells = [[w, list(ms)] for w, ms in v]
    if cells:
        cells[0][1].extend(first)
        cells[-1][1].extend(last)
    elif first or last:
        _orphan(env, first + last)
    return tuple((w, tuple(ms)) for w, ms in cells)


def _int_value(node, marks, env) -> tuple[int, list]:
    v = _eval_node(node, env)
    if not isinstance(v, int):
        raise TemplateError("expected an integer entry")
    first, last = _split_marks(marks, env)
    return v, first + last


def _expand_term(term, env, comps: list) -> None:
    kind = term[0]
    if kind == "chain":
        cells = _chain_value(term[1], term[2], env)
        if cells:
            comps.append(("chain", [(w, list(ms)) for w, ms in cells]))
        return
    if kind == "fork":
        (bnode, bmarks), args = term[1], term[2]
        b, bms = _int_value(bnode, bmarks, env)
        twigs = []
        for node, marks in args:
            cells = _chain_value(node, marks, env)
            if not cells:
                raise TemplateError("fork twig is empty")
            twigs.append([(w, list(ms)) for w, ms in reversed(cells)])
        comps.append(("fork", (b, bms), twigs))
        return
    if kind == "bench":
        cells = _assemble(term[1], env)
        if not cells:
            raise TemplateError("bench central chain is empty")
        groups = []
        for g in term[2]:
            groups.append([_mark(k, r, t, env) for _, k, r, t in g])
        comps.append(("bench", [(w, list(ms)) for w, ms in cells], groups))
        return
    if kind == "dyn":
        k = _eval_node(term[1], env)
        marks = [_mark(kd, r, t, env) for _, kd, r, t in term[2]]
        if not isinstance(k, int) or k < 2:
            raise TemplateError(f"D{{{k}}} needs an integer >= 2")
        if k == 2:
            comps.append(("chain", [(2, list(marks))]))
            comps.append(("chain", [(2, list(marks))]))
        elif k == 3:
            comps.append(("chain", [(2, []), (2, list(marks)), (2, [])]))
        else:
            long = [(2, []) for _ in range(k - 3)]
            long[-1] = (2, list(marks))
            comps.append(("fork", (2, []), [long, [(2, [])], [(2, [])]]))
        return
    if kind == "gf":
        v = _eval_node(term[1], env)
        if not isinstance(v, tuple) or not v:
            raise TemplateError("GF needs a nonempty chain")
        marks = [_mark(kd, r, t, env) for _, kd, r, t in term[2]]
        if len(v) == 1:
            w, ms = v[0]
            comps.append(("chain", [(2, []), (w, list(ms) + marks), (2, [])]))
        else:
            b, bms = v[-1]
            twig = [[w, list(ms)] for w, ms in v[:-1]]
            twig[0][1].extend(marks)
            twig.reverse()
            comps.append(
                ("fork", (b, list(bms)), [twig, [(2, [])], [(2, [])]])
            )
        return
    if kind == "sum":
        _, var, lo, hi, inner = term
        lo_v = _eval_node(lo, env)
        hi_v = _eval_node(hi, env)
        if not isinstance(lo_v, int) or not isinstance(hi_v, int):
            raise TemplateError("SUM bounds must be integers")
        for j in range(lo_v, hi_v + 1):
            env2 = dict(env)
            env2[var] = j
            if f"k{j}" in env:
                env2["kj"] = env[f"k{j}"]
            _expand_term(inner, env2, comps)
        return
    if kind == "crossrange":
        _, var, lo, hi = term
        lo_v = _eval_node(lo, env)
        hi_v = _eval_node(hi, env)
        if not isinstance(lo_v, int) or not isinstance(hi_v, int):
            raise TemplateError("CROSS bounds must be integers")
        for j in range(lo_v, hi_v + 1):
            comps.append(("cross", j))
        return
    raise TemplateError(f"unknown term {kind!r}")


def expand_template(text: str, env: Mapping[str, Any]) -> DecoratedType:
    """Expand a template with the given bindings into a decorated type."""
    orphans: list[tuple] = []
    env = {**env, "__orphans__": orphans}
    comps: list = []
    for term in _template_ast(text):
        _expand_term(term, env, comps)
    extra = [c[1] for c in comps if c[0] == "cross"]
    comps = [c for c in comps if c[0] != "cross"]
    dec = build_components(comps)
    if extra:
        if len(dec.horizontal) != 1:
            raise TemplateError("CROSS needs exactly one horizontal curve")
        h = next(iter(dec.horizontal))
        crossings = {j: list(v) for j, v in dec.crossings.items()}
        for j in extra:
            crossings.setdefault(j, []).append((h, 1))
        dec = DecoratedType(
            graph=dec.graph,
            horizontal=dec.horizontal,
            meets=dec.meets,
            crossings={j: tuple(v) for j, v in sorted(crossings.items())},
        )
    if orphans:
        dec = _resolve_orphans(dec, orphans)
    return dec


def _resolve_orphans(dec: DecoratedType, orphans: list[tuple]) -> DecoratedType:
    """Reinterpret marks whose carrier component came out empty.

    A pair of simple exterior marks means the two exterior curves now
    meet each other directly (the fiber chain between them vanished); a
    single mark is dropped provided the curve keeps a contact elsewhere.
    """
    ties: list[tuple[int, int]] = []
    pending: list[int] = []
    for group in orphans:
        amarks = [(j, t) for kind, j, t in group if kind == "A"]
        if len(amarks) != len(group):
            raise TemplateError("a bold mark vanished with its component")
        if (
            len(amarks) == 2
            and amarks[0][0] != amarks[1][0]
            and all(t == 1 for _, t in amarks)
        ):
            i, j = sorted((amarks[0][0], amarks[1][0]))
            ties.append((i, j))
        elif len(amarks) == 1 and amarks[0][1] == 1:
            pending.append(amarks[0][0])
        else:
            raise TemplateError("marks stranded on an empty component")
    tied = {k for pair in ties for k in pair}
    for j in pending:
        if j not in dec.meets and j not in dec.crossings and j not in tied:
            raise TemplateError(f"exterior curve {j} lost every contact")
    if not ties:
        return dec
    return DecoratedType(
        graph=dec.graph,
        horizontal=dec.horizontal,
        meets=dec.meets,
        crossings=dec.crossings,
        ties=tuple(sorted(ties)),
    )


# -- families -----------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    id: str
    table: int
    height: int
    fibration: str  # sections1 | sections2 | bisection | none
    char: str  # any | not2 | only2
    params: tuple[tuple[str, Mapping[str, Any]], ...]
    template: str
    guards: tuple[str, ...]
    chi: str | None
    literal: bool
    meta: Mapping[str, Any]

    def allows_char(self, char: int | None) -> bool:
        c = 0 if char is None else char
        if self.char == "not2":
            return c != 2
        if self.char == "only2":
            return c == 2
        return True


@dataclass(frozen=True)
class FamilyInstance:
    family: Family
    params: Mapping[str, Any]
    decorated: DecoratedType
    chi: int | None

    @property
    def canonical(self) -> str:
        return canonical_type(self.decorated)

    @property
    def type_string(self) -> str:
        return format_type(self.decorated)


def _family_env(fam: Family, params: Mapping[str, Any]) -> dict[str, Any]:
    env: dict[str, Any] = {}
    for name, spec in fam.params:
        if name not in params:
            raise ValueError(f"family {fam.id}: missing parameter {name!r}")
        kind = spec.get("kind", "int")
        v = params[name]
        if kind == "int":
            v = int(v)
            if v < spec.get("min", 2):
                raise ValueError(f"parameter {name} = {v} below minimum")
            env[name] = v
        elif kind == "chain":
            t = _as_chain(v)
            if not is_admissible(t):
                raise ValueError(f"parameter {name} = {t} is not admissible")
            env[name] = t
        elif kind == "karray":
            arr = _as_chain(v)
            if any(x < 2 for x in arr):
                raise ValueError(f"parameter {name}: entries must be >= 2")
            start = spec.get("start", 1)
            nu = start - 1 + len(arr)
            if nu < spec.get("min_nu", 3):
                raise ValueError(f"parameter {name}: needs at least nu >= 3")
            env["nu"] = nu
            for i, kv in enumerate(arr):
                env[f"k{start + i}"] = kv
            for i in range(start, nu + 1):
                env[f"S{i}"] = sum(arr[i - start :])
        else:
            raise ValueError(f"unknown parameter kind {kind!r}")
    extra = set(params) - {n for n, _ in fam.params}
    if extra:
        raise ValueError(f"family {fam.id}: unknown parameters {sorted(extra)}")
    return env


def instantiate(
    fam: Family,
    params: Mapping[str, Any] | None = None,
    *,
    char: int | None = None,
    check_guards: bool = True,
) -> FamilyInstance:
    """Build the decorated type of a family member.

    Raises GuardViolation when a guard (or the characteristic gate)
    fails, ValueError on malformed parameters.
    """
    params = dict(params or {})
    if check_guards and char is not None and not fam.allows_char(char):
        raise GuardViolation(fam.id, f"characteristic {fam.char}", params)
    env = _family_env(fam, params)
    if check_guards:
        for guard in fam.guards:
            if not safe_eval(guard, env):
                raise GuardViolation(fam.id, guard, params)
    if fam.literal:
        dec = parse_type(fam.template)
    else:
        dec = expand_template(fam.template, env)
    chi = safe_eval(fam.chi, env) if fam.chi is not None else None
    if chi is not None and not isinstance(chi, int):
        raise TemplateError(f"chi expression of {fam.id} is not an integer")
    return FamilyInstance(family=fam, params=params, decorated=dec, chi=chi)


# -- library loading ----------------------------------------------------------


@dataclass(frozen=True)
class DebItem:
    id: str
    kinds: tuple[str, ...]
    params: tuple[tuple[str, Mapping[str, Any]], ...]
    template: str
    guards: tuple[str, ...]


@dataclass(frozen=True)
class Library:
    families: tuple[Family, ...]
    exceptions: tuple[Mapping[str, Any], ...]
    deb_items: Mapping[str, DebItem]
    deb_data: Mapping[str, Any]

    def family(self, fid: str) -> Family:
        for fam in self.families:
            if fam.id == fid:
                return fam
        raise KeyError(fid)

    def base_types(self) -> dict[str, Family]:
        """Canonical type string -> table row, for the parameter-free rows."""
        out = {}
        for fam in self.families:
            if fam.literal:
                out[canonical_type(parse_type(fam.template))] = fam
        return out


def _load_params(raw: Mapping[str, Any] | None) -> tuple:
    out = []
    for name, spec in (raw or {}).items():
        if isinstance(spec, str):
            spec = {"kind": spec}
        out.append((name, dict(spec)))
    return tuple(out)


@lru_cache(maxsize=None)
def load_library() -> Library:
    text = resources.files("delpezzo").joinpath("data/families.yaml").read_text()
    raw = yaml.safe_load(text)
    fams = []
    for row in raw["families"]:
        fams.append(
            Family(
                id=str(row["id"]),
                table=row["table"],
                height=row["height"],
                fibration=row.get("fibration", "none"),
                char=row.get("char", "any"),
                params=_load_params(row.get("params")),
                template=row["template"],
                guards=tuple(row.get("guards", ())),
                chi=str(row["chi"]) if "chi" in row and row["chi"] is not None else None,
                literal=bool(row.get("literal", False)),
                meta=dict(row.get("meta", {})),
            )
        )
    ids = [f.id for f in fams]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate family ids in data file")
    items = {}
    deb = raw.get("deb", {})
    for row in deb.get("items", ()):
        item = DebItem(
            id=str(row["id"]),
            kinds=tuple(row.get("kinds", ("nodal", "cuspidal"))),
            params=_load_params(row.get("params")),
            template=row["template"],
            guards=tuple(row.get("guards", ())),
        )
        items[item.id] = item
    return Library(
        families=tuple(fams),
        exceptions=tuple(raw.get("exceptions", ())),
        deb_items=items,
        deb_data={k: v for k, v in deb.items() if k != "items"},
    )


# -- fibers and verification --------------------------------------------------


def fiber_graphs(dec: DecoratedType) -> list[tuple[WeightedGraph, tuple[str, ...]]]:
    """Degenerate fibers: components of the vertical boundary plus the
    exceptional curves attached to it.

    Exceptional curves whose only recorded incidences are crossings on
    horizontal curves mark smooth fibers and are left out.  Components
    without any exceptional curve are fibers fully inside the boundary.
    Tied exceptional curves meet each other and share a fiber.
    """
    vertical = [v for v in dec.graph.ids() if v not in dec.horizontal]
    g = dec.graph.subgraph(vertical)
    added = set()
    for j, contacts in dec.meets.items():
        aid = f"a{j}"
        g.add_vertex(aid, -1)
        added.add(aid)
        for vid, times in contacts:
            g.add_edge(aid, vid, times)
    for i, j in dec.ties:
        for k in (i, j):
            if f"a{k}" not in g:
                g.add_vertex(f"a{k}", -1)
                added.add(f"a{k}")
        g.add_edge(f"a{i}", f"a{j}", 1)
    out = []
    for sub in g.components():
        acurves = tuple(sorted(v for v in sub.ids() if v in added))
        out.append((sub, acurves))
    return out


_FIBRATION_SHAPE = {"sections1": (1, 1), "sections2": (2, 1), "bisection": (1, 2)}


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    family: str
    params: Mapping[str, Any]
    type_string: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": {k: list(v) if isinstance(v, tuple) else v
                       for k, v in self.params.items()},
            "type": self.type_string,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "ok": c.ok, "detail": c.detail}
                for c in self.checks
            ],
        }


def verify_instance(inst: FamilyInstance) -> VerifyReport:
    """Run every structural and numerical check on a family member."""
    dec = inst.decorated
    g = dec.graph
    checks: list[Check] = []

    defin = g.definiteness()
    nd = defin.kind == "negative_definite"
    checks.append(Check("negative_definite", nd, str(defin)))

    cfs = None
    if nd:
        rep = classify_lc(g)
        cfs = rep.coefficients
        ok = rep.kind in ("canonical", "log_terminal", "log_canonical")
        checks.append(Check("log_canonical", ok, rep.kind))

    shape = _FIBRATION_SHAPE.get(inst.family.fibration)
    if shape is not None:
        nhor, degree = shape
        checks.append(
            Check(
                "horizontal_count",
                len(dec.horizontal) == nhor,
                f"{len(dec.horizontal)} horizontal, expected {nhor}",
            )
        )
        fibers = fiber_graphs(dec)
        bad: list[str] = []
        reports = []
        for sub, acurves in fibers:
            frep = fiber_analysis(sub, boundary=[v for v in sub.ids() if v not in acurves])
            reports.append((sub, acurves, frep))
            if not frep.valid:
                bad.append(f"{sorted(sub.ids())}: {'; '.join(frep.reasons)}")
        checks.append(
            Check("fibers", not bad, " | ".join(bad) if bad else f"{len(fibers)} fibers valid")
        )
        nu_inf = sum(1 for _, ac, _ in reports if not ac)
        sigmas = [len(ac) for _, ac, _ in reports if ac]
        ident = sigma_identity(len(g), len(dec.horizontal), nu_inf, sigmas)
        checks.append(
            Check("sigma_identity", ident.holds, f"lhs={ident.lhs} rhs={ident.rhs}")
        )
        euler_lhs = 4 + sum(len(sub) - 1 for sub, _, _ in reports)
        euler_rhs = 3 + len(g)
        checks.append(
            Check("euler", euler_lhs == euler_rhs, f"{euler_lhs} == {euler_rhs}")
        )
        if not bad:
            degs = []
            ok = True
            for sub, acurves, frep in reports:
                mult = frep.multiplicities or {}
                for h in sorted(dec.horizontal):
                    total = 0
                    for v in sub.ids():
                        if v in acurves:
                            j = int(v[1:])
                            for vid, times in dec.crossings.get(j, ()):
                                if vid == h:
                                    total += mult[v] * times
                        else:
                            total += mult[v] * g.edge_weight(h, v)
                    if total != degree:
                        ok = False
                        degs.append(f"{sorted(sub.ids())}.{h}: {total} != {degree}")
            checks.append(
                Check("fiber_degree", ok, " | ".join(degs) if degs else f"all fibers meet degree {degree}")
            )
        if cfs is not None:
            total = sum((cfs[h] * degree for h in dec.horizontal), Fraction(0))
            checks.append(
                Check("del_pezzo", total < 2, f"sum cf(H) deg(H) = {total} < 2")
            )

    if inst.chi is not None:
        try:
            val = chi_log_tangent(g)
            checks.append(Check("chi", val == inst.chi, f"{val} == {inst.chi}"))
        except ValueError as e:
            checks.append(Check("chi", False, str(e)))

    return VerifyReport(
        family=inst.family.id,
        params=inst.params,
        type_string=inst.type_string,
        checks=tuple(checks),
    )


# -- enumeration --------------------------------------------------------------


@lru_cache(maxsize=None)
def _chain_pool(max_weight: int, cap_mass: int) -> tuple[tuple[int, ...], ...]:
    """Admissible chains with entries <= max_weight and sum(a-1) <= cap_mass,
    in nondecreasing mass order (mass drives the vertex count of a chain
    together with its adjoint)."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], mass: int) -> None:
        if prefix:
            out.append(tuple(prefix))
        for a in range(2, max_weight + 1):
            if mass + a - 1 > cap_mass:
                break
            prefix.append(a)
            rec(prefix, mass + a - 1)
            prefix.pop()

    rec([], 0)
    out.sort(key=lambda t: (sum(a - 1 for a in t), len(t), t))
    return tuple(out)


@lru_cache(maxsize=None)
def _karray_pool(min_len: int, cap_sum: int) -> tuple[tuple[int, ...], ...]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], total: int) -> None:
        if len(prefix) >= min_len:
            out.append(tuple(prefix))
        for a in range(2, cap_sum - total + 1):
            prefix.append(a)
            rec(prefix, total + a)
            prefix.pop()

    rec([], 0)
    out.sort(key=lambda t: (sum(t), len(t), t))
    return tuple(out)


def _param_pool(spec: Mapping[str, Any], mv: int, mw: int) -> Sequence:
    kind = spec.get("kind", "int")
    if kind == "int":
        return range(spec.get("min", 2), max(mv, mw) + 3)
    if kind == "chain":
        return _chain_pool(mw, mv)
    if kind == "karray":
        start = spec.get("start", 1)
        min_len = spec.get("min_nu", 3) - start + 1
        return _karray_pool(min_len, mv + 4)
    raise ValueError(f"unknown parameter kind {kind!r}")


def _param_min(spec: Mapping[str, Any]):
    kind = spec.get("kind", "int")
    if kind == "int":
        return spec.get("min", 2)
    if kind == "chain":
        return (2,)
    start = spec.get("start", 1)
    return (2,) * (spec.get("min_nu", 3) - start + 1)


def _fits(dec: DecoratedType, mv: int, mw: int) -> bool:
    g = dec.graph
    if len(g) > mv:
        return False
    return all(-v.self_int <= mw for v in g.vertices.values())


def _family_instances(
    fam: Family, char: int, mv: int, mw: int
) -> Iterator[FamilyInstance]:
    if fam.literal:
        inst = instantiate(fam, {}, char=char)
        if _fits(inst.decorated, mv, mw):
            yield inst
        return
    names = list(fam.params)
    pools = [_param_pool(spec, mv, mw) for _, spec in names]

    def rec(i: int, bound: dict) -> Iterator[FamilyInstance]:
        if i == len(names):
            try:
                inst = instantiate(fam, dict(bound), char=char)
            except (GuardViolation, TemplateError, ValueError):
                return
            if _fits(inst.decorated, mv, mw):
                yield inst
            return
        name, _spec = names[i]
        for v in pools[i]:
            bound[name] = v
            probe = dict(bound)
            for n2, s2 in names[i + 1 :]:
                probe[n2] = _param_min(s2)
            try:
                pdec = instantiate(fam, probe, char=char, check_guards=False).decorated
            except (TemplateError, ValueError):
                pdec = None
            if pdec is not None and not _fits(pdec, mv, mw):
                break
            yield from rec(i + 1, bound)
        bound.pop(name, None)

    yield from rec(0, {})


def iter_instances(
    *,
    char: int = 0,
    heights: Iterable[int] | None = None,
    tables: Iterable[int] | None = None,
    families: Iterable[str] | None = None,
    max_vertices: int = 10,
    max_weight: int = 8,
    library: Library | None = None,
) -> Iterator[FamilyInstance]:
    """All family members within the vertex and weight budget.

    Parameter grids are swept in increasing size with monotone pruning,
    so the sweep is exhaustive for the given budget.
    """
    lib = library or load_library()
    hs = set(heights) if heights is not None else None
    ts = set(tables) if tables is not None else None
    fs = set(families) if families is not None else None
    for fam in lib.families:
        if hs is not None and fam.height not in hs:
            continue
        if ts is not None and fam.table not in ts:
            continue
        if fs is not None and fam.id not in fs:
            continue
        if not fam.allows_char(char):
            continue
        yield from _family_instances(fam, char, max_vertices, max_weight)


@dataclass(frozen=True)
class TypeRecord:
    canonical: str
    heights: tuple[int, ...]
    witnesses: tuple[tuple[str, tuple], ...]


def _param_key(params: Mapping[str, Any]) -> tuple:
    return tuple(sorted(
        (k, tuple(v) if isinstance(v, (tuple, list)) else v)
        for k, v in params.items()
    ))


def enumerate_types(
    *,
    char: int = 0,
    heights: Iterable[int] | None = None,
    tables: Iterable[int] | None = None,
    families: Iterable[str] | None = None,
    max_vertices: int = 10,
    max_weight: int = 8,
    library: Library | None = None,
) -> list[TypeRecord]:
    """Deduplicated canonical types reachable within the budget."""
    acc: dict[str, dict] = {}
    for inst in iter_instances(
        char=char,
        heights=heights,
        tables=tables,
        families=families,
        max_vertices=max_vertices,
        max_weight=max_weight,
        library=library,
    ):
        rec = acc.setdefault(inst.canonical, {"heights": set(), "witnesses": {}})
        rec["heights"].add(inst.family.height)
        rec["witnesses"].setdefault((inst.family.id, _param_key(inst.params)), None)
    out = [
        TypeRecord(
            canonical=key,
            heights=tuple(sorted(rec["heights"])),
            witnesses=tuple(rec["witnesses"]),
        )
        for key, rec in acc.items()
    ]
    out.sort(key=lambda r: (r.heights[0], len(r.canonical), r.canonical))
    return out


# -- recognition --------------------------------------------------------------


def _pick_column(spec: str, char: int) -> str:
    parts = [p.strip() for p in str(spec).split(",")]
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 3:
        idx = 2 if char == 2 else 1 if char == 3 else 0
    elif len(parts) == 4:
        idx = 3 if char == 2 else 2 if char == 3 else 1 if char == 5 else 0
    else:
        raise ValueError(f"malformed count column {spec!r}")
    return parts[idx]


def _match_count(
    lib: Library, inst: FamilyInstance, char: int
) -> str | None:
    spec = inst.family.meta.get("counts")
    env = None
    for exc in lib.exceptions:
        if exc.get("family") != inst.family.id:
            continue
        if env is None:
            env = _family_env(inst.family, inst.params)
        if safe_eval(exc["when"], env):
            spec = exc["counts"]
            break
    if spec is None:
        return None
    return _pick_column(str(spec), char)


def recognize(
    type_input: str | DecoratedType | WeightedGraph,
    *,
    char: int = 0,
    library: Library | None = None,
) -> list[dict]:
    """Match a singularity type against every family.

    Returns one record per matching witness: family id, parameters,
    height, chi and the number of deformation classes in the requested
    characteristic (``M1``/``M2`` stand for positive dimensional moduli).
    Rows of the height summary table are reported only when no
    parametric family realizes the type (heights above 2).
    """
    lib = library or load_library()
    if isinstance(type_input, str):
        dec = parse_type(type_input)
    elif isinstance(type_input, WeightedGraph):
        dec = DecoratedType(
            graph=type_input, horizontal=frozenset(), meets={}, crossings={}
        )
    else:
        dec = type_input
    target = canonical_type(dec)
    mv = len(dec.graph)
    mw = max((-v.self_int for v in dec.graph.vertices.values()), default=1)
    matches = []
    for inst in iter_instances(
        char=char, max_vertices=mv, max_weight=mw, library=lib
    ):
        if inst.canonical != target:
            continue
        matches.append(
            {
                "family": inst.family.id,
                "table": inst.family.table,
                "height": inst.family.height,
                "params": {
                    k: list(v) if isinstance(v, tuple) else v
                    for k, v in inst.params.items()
                },
                "chi": inst.chi,
                "count": _match_count(lib, inst, char),
                "meta": dict(inst.family.meta),
            }
        )
    if any(m["table"] != 7 for m in matches):
        matches = [m for m in matches if m["table"] != 7]
    matches.sort(key=lambda m: (m["height"], str(m["family"])))
    return matches


# -- composition with degenerate plane curves ---------------------------------


@dataclass(frozen=True)
class DebResult:
    base: str
    item: str
    kind: str
    params: Mapping[str, Any]
    tie: str
    composed: str
    height: int
    primitive: bool
    exception: str | None

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "item": self.item,
            "kind": self.kind,
            "params": {k: list(v) if isinstance(v, tuple) else v
                       for k, v in self.params.items()},
            "tie": self.tie,
            "composed": self.composed,
            "height": self.height,
            "primitive": self.primitive,
            "exception": self.exception,
        }


def _canon(text: str) -> str:
    return canonical_type(parse_type(text))


def _deb_env(item: DebItem, s: int, params: Mapping[str, Any]) -> dict:
    env: dict[str, Any] = {"s": s}
    for name, spec in item.params:
        if name not in params:
            raise ValueError(f"item {item.id}: missing parameter {name!r}")
        kind = spec.get("kind", "int")
        v = params[name]
        if kind == "int":
            v = int(v)
            if v < spec.get("min", 2):
                raise ValueError(f"parameter {name} = {v} below minimum")
            env[name] = v
        else:
            t = _as_chain(v)
            if not is_admissible(t):
                raise ValueError(f"parameter {name} = {t} is not admissible")
            env[name] = t
    extra = set(params) - {n for n, _ in item.params}
    if extra:
        raise ValueError(f"item {item.id}: unknown parameters {sorted(extra)}")
    return env


def _chars_match(spec: str, char: int) -> bool:
    spec = str(spec)
    if spec == "any":
        return True
    if spec == "not23":
        return char not in (2, 3)
    return char == int(spec)


def deb_primitives(char: int, library: Library | None = None) -> list[str]:
    """Canonical composed types that are primitive in the characteristic."""
    lib = library or load_library()
    out = []
    for row in lib.deb_data.get("primitives", ()):
        if _chars_match(row["chars"], char):
            out.append(_canon(f"{row['base']}+{row['tie']}"))
    return out


def deb_compose(
    base: str,
    item_id: str,
    *,
    kind: str = "nodal",
    params: Mapping[str, Any] | None = None,
    char: int = 0,
    library: Library | None = None,
) -> DebResult:
    """Attach a tie configuration to a parameter-free base type.

    The base must be one of the parameter-free table rows; the tie comes
    from the numbered item list.  Nodal ties exist in any characteristic
    but only items i and ii; cuspidal ties need characteristic 2, 3 or 5
    and a base that is not one of the E types.
    """
    lib = library or load_library()
    params = dict(params or {})
    bases = lib.base_types()
    base_canon = _canon(base)
    if base_canon not in bases:
        raise ValueError(f"base type {base!r} is not a parameter-free table row")
    base_fam = bases[base_canon]
    if not base_fam.allows_char(char):
        raise ValueError(f"base type {base!r} does not exist in characteristic {char}")
    if item_id not in lib.deb_items:
        raise ValueError(f"unknown item {item_id!r}")
    item = lib.deb_items[item_id]
    if kind not in item.kinds:
        raise ValueError(f"item {item_id} does not support a {kind} curve")
    e_types = {_canon(t) for t in ("E6", "E7", "E8")}
    if kind == "cuspidal":
        if char not in (2, 3, 5):
            raise ValueError("cuspidal curves need characteristic 2, 3 or 5")
        if base_canon in e_types:
            raise ValueError("cuspidal curves do not exist over an E type base")

    base_dec = parse_type(base)
    s = len(base_dec.graph)
    env = _deb_env(item, s, params)
    for guard in ("s >= 6", *item.guards):
        if not safe_eval(guard, env):
            raise GuardViolation(f"deb:{item_id}", guard, {**params, "s": s})
    tie_dec = expand_template(item.template, env)
    tie_graph = tie_dec.graph
    n_tie = len(tie_graph)

    combined = base_dec.graph.disjoint_union(
        tie_graph.relabel({v: f"x.{v}" for v in tie_graph.ids()})
    )
    composed = canonical_type(
        DecoratedType(graph=combined, horizontal=frozenset(), meets={}, crossings={})
    )
    tie_str = canonical_type(tie_dec)

    deb = lib.deb_data
    height = base_fam.height + 2
    if base_canon in {_canon(t) for t in deb.get("single_component_height3_bases", ())}:
        if n_tie == 1:
            height = 3
    if (
        kind == "cuspidal"
        and char == 3
        and item_id == "iii"
        and base_canon in {_canon(t) for t in deb.get("char3_item_iii_height3_bases", ())}
    ):
        height = 3

    exception = None
    if composed in {_canon(t) for t in deb.get("gk_low_height_composites", ())}:
        exception = "composed type already occurs at height <= 2"
    comps = tie_graph.components()
    single_chain = None
    if len(comps) == 1:
        shapes = tie_graph.recognize_shapes()
        if len(shapes) == 1 and shapes[0].kind == "chain":
            single_chain = tuple(shapes[0].weights)
    if base_canon in e_types and exception is None:
        for ell in (0, 1, 2):
            pattern = (2,) * ell + (s + ell - 5,)
            if single_chain in (pattern, tuple(reversed(pattern))):
                exception = "tie contracts into the E type base"
                break
    if (
        exception is None
        and single_chain in ((3,),)
        and base_canon in {_canon(t) for t in deb.get("gk_tie3_bases", ())}
    ):
        exception = "composed type already occurs at height <= 2"
    if (
        exception is None
        and kind == "cuspidal"
        and item_id == "iii"
        and base_canon in {_canon(t) for t in deb.get("gk_cusp_item_iii_bases", ())}
    ):
        exception = "composed type already occurs at height <= 2"

    return DebResult(
        base=base_canon,
        item=item_id,
        kind=kind,
        params=params,
        tie=tie_str,
        composed=composed,
        height=height,
        primitive=composed in deb_primitives(char, lib),
        exception=exception,
    )


def table10_discrepancies(library: Library | None = None) -> list[dict]:
    """Published height claims that disagree with the composition rule."""
    lib = library or load_library()
    out = []
    for row in lib.deb_data.get("height_flags", ()):
        res = deb_compose(
            row["base"],
            row["item"],
            kind=row.get("kind", "nodal"),
            params=row.get("params", {}),
            char=row.get("char", 0),
            library=lib,
        )
        claimed = row["claimed_height"]
        if res.height != claimed:
            out.append(
                {
                    "row": row.get("row"),
                    "base": row["base"],
                    "tie": res.tie,
                    "claimed_height": claimed,
                    "derived_height": res.height,
                }
            )
    return out
