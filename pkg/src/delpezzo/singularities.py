"""Classification of contractible curve configurations.

Everything here consumes a :class:`~delpezzo.graphs.WeightedGraph` whose
vertices are the exceptional curves of a resolution (or the components of
a boundary divisor).  Coefficient vectors solve the adjunction system
exactly over the rationals; the classifiers never touch floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .chains import classify_bench, classify_fork, is_admissible
from .graphs import WeightedGraph


@dataclass(frozen=True)
class LcReport:
    kind: str  # "canonical", "log_terminal", "log_canonical", "not_log_canonical"
    coefficients: dict[str, Fraction]


def coefficients(g: WeightedGraph) -> dict[str, Fraction]:
    """Coefficient (discrepancy) vector of the configuration.

    Solves M x = k where k_v = v.self + 2 - 2 genus(v), so that the
    adjoint divisor K + sum(x_v v) is numerically trivial on every curve.
    Defined only on negative definite graphs.

    >>> coefficients(WeightedGraph({"a": -3}))
    {'a': Fraction(1, 3)}
    """
    if g.definiteness().kind != "negative_definite":
        raise ValueError("coefficients undefined: graph is not negative definite")
    order = g.ids()
    m = g.intersection_matrix(order)
    k = [
        Fraction(g.vertices[v].self_int + 2 - 2 * g.vertices[v].genus)
        for v in order
    ]
    sol = _solve(m, k)
    return dict(zip(order, sol))


def classify_lc(g: WeightedGraph) -> LcReport:
    """Place the configuration in the log canonical hierarchy.

    canonical        every coefficient <= 0 (Du Val configurations)
    log_terminal     every coefficient < 1
    log_canonical    every coefficient <= 1
    not_log_canonical otherwise
    """
    cf = coefficients(g)
    vals = list(cf.values())
    if all(v <= 0 for v in vals):
        kind = "canonical"
    elif all(v < 1 for v in vals):
        kind = "log_terminal"
    elif all(v <= 1 for v in vals):
        kind = "log_canonical"
    else:
        kind = "not_log_canonical"
    return LcReport(kind, cf)


def structural_classify(g: WeightedGraph) -> list[str]:
    """Name each connected component by its contraction type.

    Returns one of "admissible_chain", "admissible_fork", "lc_fork",
    "lc_bench", "lc_cycle", "elliptic_curve", "non_lc" per component, in
    the order of :meth:`WeightedGraph.component_ids`.
    """
    out = []
    for shape in g.recognize_shapes():
        out.append(_structural_one(shape))
    return out


def _structural_one(shape) -> str:
    if shape.kind == "chain":
        return "admissible_chain" if is_admissible(shape.weights) else "non_lc"
    if shape.kind == "fork":
        branch = shape.weights[0]
        if branch < 2 or not all(is_admissible(t) for t in shape.twigs):
            return "non_lc"
        kind = classify_fork(branch, shape.twigs).kind
        if kind == "admissible":
            return "admissible_fork"
        if kind == "log_canonical":
            return "lc_fork"
        return "non_lc"
    if shape.kind == "bench":
        if classify_bench(shape.weights).kind == "log_canonical":
            return "lc_bench"
        return "non_lc"
    if shape.kind == "cycle":
        if all(w >= 2 for w in shape.weights) and any(w > 2 for w in shape.weights):
            return "lc_cycle"
        return "non_lc"
    if shape.kind == "genus1":
        return "elliptic_curve"
    return "non_lc"


def fundamental_cycle(g: WeightedGraph) -> dict[str, int]:
    """Smallest positive cycle with non-positive intersections (Laufer).

    Starts from the reduced cycle and bumps any curve meeting the current
    cycle positively; on a negative definite graph this terminates with
    the fundamental cycle regardless of bump order.
    """
    if g.definiteness().kind != "negative_definite":
        raise ValueError("fundamental cycle needs a negative definite graph")
    z = {v: 1 for v in g.vertices}
    while True:
        bump = None
        for v in g.ids():
            dot = z[v] * g.vertices[v].self_int + sum(
                z[u] * w for u, w in g.neighbors(v).items()
            )
            if dot > 0:
                bump = v
                break
        if bump is None:
            return z
        z[bump] += 1


def cycle_self_intersection(g: WeightedGraph, z: Mapping[str, int]) -> int:
    total = sum(z[v] * z[v] * g.vertices[v].self_int for v in g.vertices)
    total += 2 * sum(z[a] * z[b] * w for (a, b), w in g.edges.items())
    return total


def arithmetic_genus(g: WeightedGraph, z: Mapping[str, int]) -> Fraction:
    """p_a(Z) = 1 + (Z^2 + Z.K)/2 with Z.K from adjunction."""
    zk = sum(
        z[v] * (2 * g.vertices[v].genus - 2 - g.vertices[v].self_int)
        for v in g.vertices
    )
    return 1 + Fraction(cycle_self_intersection(g, z) + zk, 2)


def is_rational(g: WeightedGraph) -> bool:
    """True when every component has a fundamental cycle of genus zero."""
    for comp in g.components():
        if arithmetic_genus(comp, fundamental_cycle(comp)) != 0:
            return False
    return True


def chi_log_tangent(g: WeightedGraph) -> int:
    """Euler characteristic of the logarithmic tangent sheaf.

    For a rational tree boundary D on a rational surface with second
    Betti number (number of boundary curves + 1) this is

        2 * (9 - n) - 10 - sum over curves of (C^2 + 1 - 2 genus)

    where n is the number of boundary curves.  Demands a rational tree:
    positive genus or a closed loop of curves is out of scope.
    """
    if any(v.genus != 0 for v in g.vertices.values()):
        raise ValueError("chi out of scope: boundary has a positive genus curve")
    for ids in g.component_ids():
        sub = g.subgraph(ids)
        if sum(1 for _ in sub.edges) > len(ids) - 1 or any(
            w > 1 for w in sub.edges.values()
        ):
            raise ValueError("chi out of scope: boundary is not a tree of curves")
    n = len(g)
    correction = sum(v.self_int + 1 - 2 * v.genus for v in g.vertices.values())
    return 2 * (9 - n) - 10 - correction


def analyze(g: WeightedGraph) -> dict:
    """Full report on a configuration, JSON-serializable.

    Coefficient and cycle data appear only when the graph is negative
    definite; otherwise those entries are None.
    """
    d = g.definiteness()
    report: dict = {
        "vertices": len(g),
        "discriminant": g.discriminant(),
        "definiteness": {"kind": d.kind, "corank": d.corank},
        "structural": structural_classify(g),
    }
    if d.kind == "negative_definite":
        lc = classify_lc(g)
        z = fundamental_cycle(g)
        pas = [
            arithmetic_genus(comp, fundamental_cycle(comp))
            for comp in g.components()
        ]
        report["coefficients"] = {
            v: f"{c.numerator}/{c.denominator}" for v, c in lc.coefficients.items()
        }
        report["classification"] = lc.kind
        report["fundamental_cycle"] = z
        report["pa_Z"] = [str(p) for p in pas]
        report["rational"] = all(p == 0 for p in pas)
    else:
        report["coefficients"] = None
        report["classification"] = None
        report["fundamental_cycle"] = None
        report["pa_Z"] = None
        report["rational"] = None
    return report


def _solve(m: list[list[int]], k: list[Fraction]) -> list[Fraction]:
    """Exact Gaussian elimination for a nonsingular system."""
    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [k[i]] for i in range(n)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            raise ValueError("singular system")
        a[c], a[pivot] = a[pivot], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [a[i][n] for i in range(n)]
