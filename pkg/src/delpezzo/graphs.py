"""Weighted dual graphs of curve configurations.

A graph records one vertex per irreducible curve (self-intersection and
genus) and one weighted edge per pair of meeting curves, the weight being
the total intersection number.  All linear algebra is exact: determinants
via fraction-free elimination, definiteness via rational symmetric
reduction.  Curve weights are kept as self-intersections (negative for the
configurations of interest); the positive-entry convention used by the
chain calculus lives in :mod:`delpezzo.chains`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping


@dataclass(frozen=True)
class Vertex:
    self_int: int
    genus: int = 0


@dataclass(frozen=True)
class Definiteness:
    # kind is one of "negative_definite", "negative_semidefinite", "indefinite"
    kind: str
    corank: int = 0

    def __str__(self) -> str:
        if self.kind == "negative_semidefinite":
            return f"negative semidefinite (corank {self.corank})"
        return self.kind.replace("_", " ")


@dataclass(frozen=True)
class Shape:
    """Recognized shape of one connected component.

    kind        one of "chain", "fork", "bench", "cycle", "genus1", "other"
    weights     positive weights; meaning depends on kind:
                chain: path entries in walk order
                fork:  (branch_weight,) only
                bench: central chain entries in walk order
                cycle: entries in canonical rotation
                genus1: (weight,)
    twigs       fork only: three twig tuples read outward from the branch,
                sorted by (length, entries)
    ids         sorted vertex ids of the component
    order       vertex ids matching ``weights`` entry for entry (the walk
                for chains and bench cores, the rotation for cycles, the
                branch vertex alone for forks)
    twig_order  fork only: twig vertex ids parallel to ``twigs``
    tips        bench only: the four (-2)-tips, the pair at order[0] then
                the pair at order[-1]
    """

    kind: str
    weights: tuple[int, ...] = ()
    twigs: tuple[tuple[int, ...], ...] = ()
    ids: tuple[str, ...] = ()
    order: tuple[str, ...] = ()
    twig_order: tuple[tuple[str, ...], ...] = ()
    tips: tuple[str, ...] = ()

    def canonical_weights(self) -> tuple[int, ...]:
        """Weights up to the symmetry of the shape (reversal, rotation)."""
        if self.kind in ("chain", "bench"):
            return min(self.weights, self.weights[::-1])
        return self.weights


def _edge_key(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise ValueError(f"loop edge at {a!r} not allowed")
    return (a, b) if a < b else (b, a)


class WeightedGraph:
    """Finite graph with integer vertex weights and merged positive edges."""

    def __init__(
        self,
        vertices: Mapping[str, Vertex | tuple[int, int] | int] | None = None,
        edges: Iterable[tuple[str, str, int] | tuple[str, str]] = (),
        c2: int | None = None,
    ) -> None:
        self.vertices: dict[str, Vertex] = {}
        self.edges: dict[tuple[str, str], int] = {}
        self.c2 = c2
        if vertices:
            for vid, data in vertices.items():
                if isinstance(data, Vertex):
                    v = data
                elif isinstance(data, tuple):
                    v = Vertex(data[0], data[1])
                else:
                    v = Vertex(int(data))
                self.vertices[str(vid)] = v
        for e in edges:
            a, b = e[0], e[1]
            w = e[2] if len(e) > 2 else 1
            self.add_edge(a, b, w)

    # -- construction ------------------------------------------------------

    def add_vertex(self, vid: str, self_int: int, genus: int = 0) -> None:
        if vid in self.vertices:
            raise ValueError(f"duplicate vertex id {vid!r}")
        self.vertices[vid] = Vertex(self_int, genus)

    def add_edge(self, a: str, b: str, weight: int = 1) -> None:
        if a not in self.vertices or b not in self.vertices:
            raise KeyError(f"edge endpoints {a!r}, {b!r} must be vertices")
        if weight < 1:
            raise ValueError("edge weight must be positive")
        key = _edge_key(a, b)
        self.edges[key] = self.edges.get(key, 0) + weight

    def copy(self) -> "WeightedGraph":
        g = WeightedGraph(c2=self.c2)
        g.vertices = dict(self.vertices)
        g.edges = dict(self.edges)
        return g

    # -- basic queries -----------------------------------------------------

    def ids(self) -> list[str]:
        return sorted(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vid: str) -> bool:
        return vid in self.vertices

    def neighbors(self, vid: str) -> dict[str, int]:
        out: dict[str, int] = {}
        for (a, b), w in self.edges.items():
            if a == vid:
                out[b] = w
            elif b == vid:
                out[a] = w
        return out

    def degree(self, vid: str) -> int:
        """Number of distinct neighbours (edge weights not counted)."""
        return len(self.neighbors(vid))

    def beta(self, vid: str) -> int:
        """Total intersection of the curve with the rest of the graph."""
        return sum(self.neighbors(vid).values())

    def edge_weight(self, a: str, b: str) -> int:
        return self.edges.get(_edge_key(a, b), 0)

    # -- linear algebra ----------------------------------------------------

    def intersection_matrix(self, order: list[str] | None = None) -> list[list[int]]:
        order = order or self.ids()
        index = {vid: i for i, vid in enumerate(order)}
        n = len(order)
        m = [[0] * n for _ in range(n)]
        for vid in order:
            i = index[vid]
            m[i][i] = self.vertices[vid].self_int
        for (a, b), w in self.edges.items():
            if a in index and b in index:
                i, j = index[a], index[b]
                m[i][j] += w
                m[j][i] += w
        return m

    def discriminant(self) -> int:
        """det(-M) as an exact integer; 1 for the empty graph."""
        m = self.intersection_matrix()
        return _det_bareiss([[-x for x in row] for row in m])

    def definiteness(self) -> Definiteness:
        """Sign type of the intersection form, decided exactly.

        Works on A = -M: the form is negative definite iff A is positive
        definite, etc.  Symmetric elimination on positive diagonal pivots;
        a zero diagonal entry with a nonzero row kills semidefiniteness.
        """
        m = self.intersection_matrix()
        n = len(m)
        a = [[Fraction(-m[i][j]) for j in range(n)] for i in range(n)]
        active = list(range(n))
        corank = 0
        while active:
            pivot = next((i for i in active if a[i][i] > 0), None)
            if pivot is None:
                for i in active:
                    if a[i][i] < 0:
                        return Definiteness("indefinite")
                    if any(a[i][j] != 0 for j in active if j != i):
                        return Definiteness("indefinite")
                corank += len(active)
                break
            active.remove(pivot)
            p = a[pivot][pivot]
            prow = [a[pivot][j] for j in active]
            for i in active:
                if a[i][pivot] == 0:
                    continue
                f = a[i][pivot] / p
                for j, pv in zip(active, prow):
                    a[i][j] -= f * pv
        if corank == 0:
            return Definiteness("negative_definite")
        return Definiteness("negative_semidefinite", corank)

    def kernel_vector(self) -> dict[str, Fraction] | None:
        """A nonzero solution of M x = 0 when the radical is 1-dimensional."""
        order = self.ids()
        m = self.intersection_matrix(order)
        basis = _nullspace([[Fraction(x) for x in row] for row in m])
        if len(basis) != 1:
            return None
        return dict(zip(order, basis[0]))

    # -- components --------------------------------------------------------

    def component_ids(self) -> list[list[str]]:
        seen: set[str] = set()
        comps: list[list[str]] = []
        for start in self.ids():
            if start in seen:
                continue
            stack = [start]
            comp = []
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self.neighbors(v):
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def components(self) -> list["WeightedGraph"]:
        return [self.subgraph(ids) for ids in self.component_ids()]

    def is_connected(self) -> bool:
        return len(self) <= 1 or len(self.component_ids()) == 1

    def subgraph(self, ids: Iterable[str]) -> "WeightedGraph":
        keep = set(ids)
        missing = keep - set(self.vertices)
        if missing:
            raise KeyError(f"unknown vertex ids {sorted(missing)}")
        g = WeightedGraph()
        g.vertices = {v: self.vertices[v] for v in keep}
        g.edges = {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep}
        return g

    def disjoint_union(self, other: "WeightedGraph") -> "WeightedGraph":
        clash = set(self.vertices) & set(other.vertices)
        if clash:
            raise ValueError(f"vertex ids {sorted(clash)} appear on both sides")
        g = WeightedGraph()
        g.vertices = {**self.vertices, **other.vertices}
        g.edges = {**self.edges, **other.edges}
        if self.c2 is not None and other.c2 is not None:
            g.c2 = self.c2 + other.c2
        return g

    def relabel(self, mapping: Mapping[str, str]) -> "WeightedGraph":
        table = {v: mapping.get(v, v) for v in self.vertices}
        if len(set(table.values())) != len(table):
            raise ValueError("relabeling collapses vertex ids")
        g = WeightedGraph(c2=self.c2)
        g.vertices = {table[v]: data for v, data in self.vertices.items()}
        g.edges = {_edge_key(table[a], table[b]): w for (a, b), w in self.edges.items()}
        return g

    # -- shape recognition -------------------------------------------------

    def recognize_shapes(self) -> list[Shape]:
        return [_component_shape(self, ids) for ids in self.component_ids()]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "vertices": [
                {"id": v, "self": self.vertices[v].self_int}
                | ({"genus": self.vertices[v].genus} if self.vertices[v].genus else {})
                for v in self.ids()
            ],
            "edges": [
                {"a": a, "b": b} | ({"w": w} if w != 1 else {})
                for (a, b), w in sorted(self.edges.items())
            ],
        }
        if self.c2 is not None:
            out["c2"] = self.c2
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "WeightedGraph":
        g = cls(c2=data.get("c2"))
        for v in data["vertices"]:
            g.add_vertex(str(v["id"]), int(v["self"]), int(v.get("genus", 0)))
        for e in data.get("edges", []):
            g.add_edge(str(e["a"]), str(e["b"]), int(e.get("w", 1)))
        return g

    @classmethod
    def from_json(cls, text: str) -> "WeightedGraph":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"WeightedGraph({len(self)} vertices, {len(self.edges)} edges)"


# -- deterministic constructors ------------------------------------------


def chain_graph(weights: Iterable[int], prefix: str = "c") -> WeightedGraph:
    """Path of curves; entry k means self-intersection -k."""
    ws = list(weights)
    g = WeightedGraph()
    for i, w in enumerate(ws):
        g.add_vertex(f"{prefix}{i:02d}", -w)
    for i in range(len(ws) - 1):
        g.add_edge(f"{prefix}{i:02d}", f"{prefix}{i + 1:02d}")
    return g


def fork_graph(
    branch: int, twigs: Iterable[Iterable[int]], prefix: str = "f"
) -> WeightedGraph:
    """Central curve of self-intersection -branch with three chains attached.

    Twig entries are read outward from the branch vertex.
    """
    tws = [list(t) for t in twigs]
    if len(tws) != 3 or any(not t for t in tws):
        raise ValueError("a fork needs three nonempty twigs")
    g = WeightedGraph()
    bid = f"{prefix}b"
    g.add_vertex(bid, -branch)
    for i, twig in enumerate(tws):
        prev = bid
        for j, w in enumerate(twig):
            vid = f"{prefix}t{i}.{j:02d}"
            g.add_vertex(vid, -w)
            g.add_edge(prev, vid)
            prev = vid
    return g


def bench_graph(central: Iterable[int], prefix: str = "b") -> WeightedGraph:
    """Central chain with a pair of (-2)-tips at each end."""
    ws = list(central)
    if not ws:
        raise ValueError("a bench needs a nonempty central chain")
    g = chain_graph(ws, prefix=f"{prefix}c")
    first, last = f"{prefix}c00", f"{prefix}c{len(ws) - 1:02d}"
    for i, anchor in enumerate((first, first, last, last)):
        vid = f"{prefix}t{i}"
        g.add_vertex(vid, -2)
        g.add_edge(anchor, vid)
    return g


def cycle_graph(weights: Iterable[int], prefix: str = "z") -> WeightedGraph:
    ws = list(weights)
    if len(ws) < 3:
        raise ValueError("a cycle needs at least three curves")
    g = WeightedGraph()
    for i, w in enumerate(ws):
        g.add_vertex(f"{prefix}{i:02d}", -w)
    for i in range(len(ws)):
        g.add_edge(f"{prefix}{i:02d}", f"{prefix}{(i + 1) % len(ws):02d}")
    return g


def genus1_graph(weight: int, prefix: str = "e") -> WeightedGraph:
    g = WeightedGraph()
    g.add_vertex(f"{prefix}0", -weight, genus=1)
    return g


# -- internals -------------------------------------------------------------


def _det_bareiss(m: list[list[int]]) -> int:
    """Fraction-free determinant; exact for integer input."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _nullspace(a: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the nullspace of a rational matrix (row reduction)."""
    if not a:
        return []
    n = len(a[0])
    rows = [row[:] for row in a]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -rows[i][fc]
        basis.append(vec)
    return basis


def _component_shape(g: WeightedGraph, ids: list[str]) -> Shape:
    idset = tuple(sorted(ids))
    verts = {v: g.vertices[v] for v in ids}
    if len(ids) == 1:
        v = ids[0]
        if verts[v].genus == 1 and verts[v].self_int < 0:
            return Shape("genus1", (-verts[v].self_int,), ids=idset, order=idset)
        if verts[v].genus == 0:
            return Shape("chain", (-verts[v].self_int,), ids=idset, order=idset)
        return Shape("other", ids=idset)
    if any(verts[v].genus != 0 for v in ids):
        return Shape("other", ids=idset)

    sub = g.subgraph(ids)
    degs = {v: sub.degree(v) for v in ids}
    unit_edges = all(w == 1 for w in sub.edges.values())
    n_edges = sum(sub.edges.values())

    # two curves meeting twice make the smallest cycle
    if len(ids) == 2 and n_edges == 2:
        order = idset
        ws = tuple(-verts[v].self_int for v in order)
        return Shape("cycle", ws, ids=idset, order=order)
    if unit_edges and all(d == 2 for d in degs.values()):
        walk = _cycle_order(sub)
        ws = tuple(-verts[v].self_int for v in walk)
        cws, rot = _canonical_cycle(ws)
        return Shape("cycle", cws, ids=idset, order=tuple(rot(walk)))
    if not unit_edges:
        return Shape("other", ids=idset)
    if len(sub.edges) != len(ids) - 1:
        return Shape("other", ids=idset)  # not a tree

    branch_vertices = [v for v in ids if degs[v] >= 3]
    if not branch_vertices:
        order = _path_order(sub)
        ws = tuple(-verts[v].self_int for v in order)
        return Shape("chain", ws, ids=idset, order=tuple(order))
    if len(branch_vertices) == 1 and degs[branch_vertices[0]] == 3:
        b = branch_vertices[0]
        twigs = []
        for start in sorted(sub.neighbors(b)):
            twig = [start]
            prev = b
            while True:
                nxt = [u for u in sub.neighbors(twig[-1]) if u != prev]
                if not nxt:
                    break
                prev = twig[-1]
                twig.append(nxt[0])
            twigs.append(
                (tuple(-verts[v].self_int for v in twig), tuple(twig))
            )
        twigs.sort(key=lambda t: (len(t[0]), t[0]))
        return Shape(
            "fork",
            (-verts[b].self_int,),
            twigs=tuple(t[0] for t in twigs),
            ids=idset,
            order=(b,),
            twig_order=tuple(t[1] for t in twigs),
        )
    shape = _try_bench(sub, verts, degs)
    if shape is not None:
        return shape
    return Shape("other", ids=idset)


def _try_bench(g, verts, degs) -> Shape | None:
    """Central chain with two (-2)-tips hanging at each end.

    A one-vertex central chain is a 4-valent star and is handled too.
    """
    idset = tuple(sorted(verts))
    tips = sorted(v for v in verts if degs[v] == 1)
    if len(verts) < 5 or len(tips) != 4:
        return None
    if any(verts[t].self_int != -2 for t in tips):
        return None
    core = [v for v in verts if v not in tips]
    coresub = g.subgraph(core)
    if len(core) == 1:
        v = core[0]
        if degs[v] != 4:
            return None
        order = [v]
    else:
        if any(coresub.degree(v) > 2 for v in core) or not coresub.is_connected():
            return None
        if len(coresub.edges) != len(core) - 1:
            return None
        order = _path_order(coresub)
    first, last = order[0], order[-1]
    left = sorted(t for t in tips if g.edge_weight(first, t))
    right = sorted(t for t in tips if g.edge_weight(last, t))
    if len(core) == 1:
        right = [t for t in tips if t not in left[:2]]
        left = left[:2]
    if len(left) != 2 or len(right) != 2 or set(left) & set(right):
        return None
    ws = tuple(-verts[v].self_int for v in order)
    return Shape(
        "bench",
        ws,
        ids=idset,
        order=tuple(order),
        tips=tuple(left + right),
    )


def _path_order(g: WeightedGraph) -> list[str]:
    ids = g.ids()
    if len(ids) == 1:
        return ids
    ends = sorted(v for v in ids if g.degree(v) == 1)
    order = [ends[0]]
    prev = None
    while len(order) < len(ids):
        nxt = [u for u in g.neighbors(order[-1]) if u != prev]
        prev = order[-1]
        order.append(nxt[0])
    return order


def _cycle_order(g: WeightedGraph) -> list[str]:
    start = g.ids()[0]
    order = [start]
    prev = None
    while True:
        nbrs = sorted(u for u in g.neighbors(order[-1]) if u != prev)
        nxt = nbrs[0]
        if nxt == start and len(order) > 1:
            break
        prev = order[-1]
        order.append(nxt)
        if len(order) > len(g):
            raise AssertionError("cycle walk failed")
    return order


def _canonical_cycle(ws: tuple[int, ...]):
    """Least rotation/reflection, plus the matching id permutation."""
    n = len(ws)
    best = None
    for rev in (False, True):
        seq = ws[::-1] if rev else ws
        for s in range(n):
            cand = tuple(seq[(s + i) % n] for i in range(n))
            if best is None or cand < best[0]:
                best = (cand, rev, s)
    cand, rev, s = best

    def rot(order: list[str]) -> list[str]:
        seq = order[::-1] if rev else order
        return [seq[(s + i) % n] for i in range(n)]

    return cand, rot
