"""Birational moves on weighted dual graphs.

Blowups and blowdowns act on simple normal crossing configurations only;
anything requiring tangency bookkeeping raises instead of guessing.  On
top of the two moves sit three derived gadgets: contraction of chains
carrying (-1)-curves, the fiber validity test for degenerate fibers of a
rational fibration, and the elementary swap that trades a section for a
boundary (-2)-curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .chains import Chain, adjoint, chain
from .graphs import WeightedGraph


def blowup_inner(g: WeightedGraph, a: str, b: str, new_id: str | None = None) -> WeightedGraph:
    """Blow up the intersection point of two curves meeting once.

    The new (-1)-curve separates a and b; both drop by one.
    """
    w = g.edge_weight(a, b)
    if w == 0:
        raise ValueError(f"curves {a!r} and {b!r} do not meet")
    if w > 1:
        raise ValueError(
            f"curves {a!r} and {b!r} meet {w} times: inner blowup needs a single"
            " transverse point"
        )
    out = g.copy()
    e = new_id or _fresh_id(out)
    del out.edges[(a, b) if a < b else (b, a)]
    out.vertices[a] = _bump(out.vertices[a], -1)
    out.vertices[b] = _bump(out.vertices[b], -1)
    out.add_vertex(e, -1)
    out.add_edge(e, a)
    out.add_edge(e, b)
    if out.c2 is not None:
        out.c2 += 1
    return out


def blowup_outer(g: WeightedGraph, v: str, new_id: str | None = None) -> WeightedGraph:
    """Blow up a point on a single curve away from all crossings."""
    if v not in g:
        raise KeyError(f"unknown vertex {v!r}")
    out = g.copy()
    e = new_id or _fresh_id(out)
    out.vertices[v] = _bump(out.vertices[v], -1)
    out.add_vertex(e, -1)
    out.add_edge(e, v)
    if out.c2 is not None:
        out.c2 += 1
    return out


def blowdown(g: WeightedGraph, v: str) -> WeightedGraph:
    """Contract a (-1)-curve meeting the rest simply.

    The curve must be rational with self-intersection -1 and meet at most
    two other curves, each once.  Its neighbours gain one and, if there
    were two of them, gain a mutual intersection.
    """
    if v not in g:
        raise KeyError(f"unknown vertex {v!r}")
    data = g.vertices[v]
    nbrs = g.neighbors(v)
    if data.self_int != -1 or data.genus != 0 or len(nbrs) > 2 or any(
        w != 1 for w in nbrs.values()
    ):
        raise ValueError(
            f"curve {v!r} is not a simply met (-1)-curve: blowdown of"
            " non-snc configurations is unsupported"
        )
    out = g.copy()
    del out.vertices[v]
    out.edges = {e: w for e, w in out.edges.items() if v not in e}
    for u in nbrs:
        out.vertices[u] = _bump(out.vertices[u], +1)
    ns = sorted(nbrs)
    if len(ns) == 2:
        out.add_edge(ns[0], ns[1])
    if out.c2 is not None:
        out.c2 -= 1
    return out


@dataclass(frozen=True)
class ContractionOutcome:
    kind: str  # "zero_curve", "smooth_point", "stuck"
    final: Chain


def contract_chain(t: Sequence[int], all_orders: bool = False) -> ContractionOutcome:
    """Run the chain through repeated contraction of its (-1)-entries.

    Entries use the positive convention (entry 1 is a (-1)-curve).  Each
    contraction removes one entry equal to 1 and lowers its neighbours by
    one.  Terminal states: a single 0 entry (the chain sweeps out a fiber),
    the empty chain (everything lands on a smooth point), or a chain with
    no 1 left (stuck).

    With ``all_orders`` every contraction order is explored and the
    outcome kind is required to be unambiguous (dead ends may differ in
    their final chain, but never in kind).

    >>> contract_chain((2, 1, 2)).kind
    'zero_curve'
    >>> contract_chain((2, 1, 3)).kind
    'smooth_point'
    """
    start = chain(t)
    cur = start
    while True:
        state = _terminal_state(cur)
        if state is not None:
            break
        cur = _contract_at(cur, cur.index(1))
    if not all_orders:
        return state
    kinds = set()
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        term = _terminal_state(node)
        if term is not None:
            kinds.add(term.kind)
            continue
        for i, x in enumerate(node):
            if x == 1:
                nxt = _contract_at(node, i)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    if kinds != {state.kind}:
        raise AssertionError(
            f"contraction outcome depends on order: {sorted(kinds)}"
        )
    return state


def _terminal_state(cur: Chain) -> ContractionOutcome | None:
    if cur == ():
        return ContractionOutcome("smooth_point", ())
    if cur == (0,):
        return ContractionOutcome("zero_curve", (0,))
    if 1 not in cur:
        return ContractionOutcome("stuck", cur)
    return None


def _contract_at(cur: Chain, i: int) -> Chain:
    out = list(cur)
    if i > 0:
        out[i - 1] -= 1
    if i + 1 < len(out):
        out[i + 1] -= 1
    del out[i]
    return tuple(out)


@dataclass(frozen=True)
class FiberReport:
    valid: bool
    reasons: tuple[str, ...]
    multiplicities: dict[str, int] | None
    columnar: tuple[Chain, Chain] | None
    minus_one_curves: tuple[str, ...]

    @property
    def sigma(self) -> int:
        return len(self.minus_one_curves)


def fiber_analysis(
    g: WeightedGraph, boundary: Iterable[str] | None = None
) -> FiberReport:
    """Decide whether a configuration is a full degenerate fiber.

    ``boundary`` lists the curves belonging to the boundary divisor; when
    omitted, every curve other than the (-1)-curves is assumed to.

    The test: the graph is a connected tree of rational curves, its
    intersection form is negative semidefinite of corank one, the radical
    is spanned by a positive primitive vector (the multiplicities), every
    vertex outside ``boundary`` is a non-branching (-1)-curve, and a
    multiplicity-one (-1)-curve must sit at a tip with a second (-1)-curve
    elsewhere in the fiber (otherwise it could be contracted inside a
    smooth fiber).

    When the fiber is a chain with a single (-1)-curve the two flanks form
    a companion pair; they are reported as the columnar witness.
    """
    if boundary is None:
        boundary = {v for v, d in g.vertices.items() if d.self_int != -1}
    else:
        boundary = set(boundary)
    reasons: list[str] = []
    minus_ones = tuple(sorted(set(g.vertices) - boundary))
    if len(g) == 0:
        return FiberReport(False, ("empty fiber",), None, None, ())
    if any(v.genus != 0 for v in g.vertices.values()):
        reasons.append("fiber contains a positive genus curve")
    if not g.is_connected():
        reasons.append("fiber is not connected")
    if any(w > 1 for w in g.edges.values()) or len(g.edges) != len(g) - 1:
        reasons.append("fiber is not a tree of simply crossing curves")
    for v in minus_ones:
        if g.vertices[v].self_int != -1:
            reasons.append(f"curve {v} outside the boundary is not a (-1)-curve")
        if g.degree(v) > 2:
            reasons.append(f"(-1)-curve {v} is branching")
    mults: dict[str, int] | None = None
    d = g.definiteness()
    if not (d.kind == "negative_semidefinite" and d.corank == 1):
        reasons.append("intersection form is not semidefinite of corank one")
    else:
        kv = g.kernel_vector()
        assert kv is not None
        mults = _primitive(kv)
        if mults is None or any(m <= 0 for m in mults.values()):
            reasons.append("radical has no positive generator")
            mults = None
    if mults:
        for v in minus_ones:
            if g.vertices[v].self_int != -1:
                continue
            if mults[v] == 1:
                if g.degree(v) != 1:
                    reasons.append(
                        f"multiplicity one (-1)-curve {v} is not at a tip"
                    )
                elif len(minus_ones) < 2:
                    reasons.append(
                        f"multiplicity one (-1)-curve {v} has no partner"
                    )
    columnar = None
    if not reasons and len(minus_ones) == 1:
        columnar = _columnar_witness(g, minus_ones[0])
    return FiberReport(not reasons, tuple(reasons), mults, columnar, minus_ones)


def _columnar_witness(g: WeightedGraph, a: str) -> tuple[Chain, Chain] | None:
    # fiber is connected, so exactly one shape; only plain chains qualify
    shape = g.recognize_shapes()[0]
    if shape.kind != "chain" or g.degree(a) != 2:
        return None
    i = shape.order.index(a)
    left = shape.weights[:i]
    right = shape.weights[i + 1 :]
    if not left or not right:
        return None
    try:
        if adjoint(left) == right:
            return (left, right)
        if adjoint(right) == left:
            return (right, left)
    except ValueError:
        return None
    return None


def _primitive(kv: dict[str, Fraction]) -> dict[str, int] | None:
    denom = 1
    for f in kv.values():
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = {v: int(f * denom) for v, f in kv.items()}
    g = 0
    for x in ints.values():
        g = gcd(g, x)
    if g == 0:
        return None
    ints = {v: x // g for v, x in ints.items()}
    if all(x < 0 for x in ints.values()):
        ints = {v: -x for v, x in ints.items()}
    return ints


@dataclass(frozen=True)
class SwapResult:
    graph: WeightedGraph
    boundary: frozenset[str]
    new_curve: str


def elementary_swap(
    g: WeightedGraph, boundary: Iterable[str], curve: str
) -> SwapResult:
    """Trade a (-1)-curve for the boundary (-2)-curve it crosses.

    Requirements, each reported by name when violated: the curve is a
    rational (-1)-curve outside the boundary meeting everything simply,
    it meets the boundary at most twice in total, and among the boundary
    curves it meets exactly one is a (-2)-curve met exactly once.  The
    move contracts the curve; the met (-2)-curve leaves the boundary and
    becomes the new (-1)-curve.
    """
    boundary = set(boundary)
    missing = (boundary | {curve}) - set(g.vertices)
    if missing:
        raise KeyError(f"unknown vertex ids {sorted(missing)}")
    if curve in boundary:
        raise ValueError("swap curve must lie outside the boundary")
    data = g.vertices[curve]
    if data.self_int != -1:
        raise ValueError("swap curve must have self-intersection -1")
    if data.genus != 0:
        raise ValueError("swap curve must be rational")
    nbrs = g.neighbors(curve)
    if any(w != 1 for w in nbrs.values()):
        raise ValueError("swap curve must meet every curve simply")
    b_meet = {u: w for u, w in nbrs.items() if u in boundary}
    if sum(b_meet.values()) > 2:
        raise ValueError("swap curve meets the boundary more than twice")
    targets = [
        u for u, w in b_meet.items() if w == 1 and g.vertices[u].self_int == -2
    ]
    if len(targets) != 1:
        raise ValueError(
            "swap curve must meet exactly one boundary (-2)-curve, exactly once"
        )
    target = targets[0]
    out = blowdown(g, curve)
    return SwapResult(out, frozenset(boundary - {target}), target)


@dataclass(frozen=True)
class SigmaIdentity:
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def sigma_identity(
    n_boundary: int,
    n_horizontal: int,
    nu_infinity: int,
    sigmas: Iterable[int],
) -> SigmaIdentity:
    """Count check tying horizontal curves to fiber degenerations.

    For a rational fibration with boundary of n_boundary curves (Picard
    rank n_boundary + 1) the degenerate fibers satisfy

        n_horizontal + nu_infinity + rank = n_boundary + 2 + sum(sigma - 1)

    where sigma ranges over the fibers containing curves outside the
    boundary and nu_infinity counts degenerate fibers fully inside it.
    """
    rank = n_boundary + 1
    lhs = n_horizontal + nu_infinity + rank
    rhs = n_boundary + 2 + sum(s - 1 for s in sigmas)
    return SigmaIdentity(lhs, rhs)


def _fresh_id(g: WeightedGraph) -> str:
    i = 0
    while f"x{i:02d}" in g.vertices:
        i += 1
    return f"x{i:02d}"


def _bump(v, delta: int):
    from .graphs import Vertex

    return Vertex(v.self_int + delta, v.genus)
