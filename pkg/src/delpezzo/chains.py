"""Calculus of weighted chains.

Chains are tuples of positive integers read left to right; entry k stands
for a curve of self-intersection -k.  The empty chain is a valid value and
is distinct from (0,).  A chain is admissible when it is nonempty and all
entries are at least 2; admissible chains are exactly the resolutions of
cyclic quotient singularities, with the continued-fraction discriminant
``disc`` as their order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Chain = tuple[int, ...]


class _StarUnit:
    """Left operand ``(2)_{-1}`` for the composition law.

    Composing it with [b1, b2, ...] drops b1 and bumps b2 by one, which is
    the effect of splicing an empty run of (-2)-curves in front.
    """

    def __repr__(self) -> str:
        return "(2)_{-1}"


STAR_UNIT = _StarUnit()


def chain(entries: Iterable[int]) -> Chain:
    return tuple(int(x) for x in entries)


def is_admissible(t: Sequence[int]) -> bool:
    return len(t) > 0 and all(x >= 2 for x in t)


def transpose(t: Sequence[int]) -> Chain:
    return tuple(reversed(t))


def disc(t: Sequence[int]) -> int:
    """Chain discriminant by the three-term recursion.

    >>> disc(())
    1
    >>> disc((2,))
    2
    >>> disc((3, 2))
    5
    """
    prev, cur = 0, 1  # d(-1), d(0)
    for a in t:
        prev, cur = cur, a * cur - prev
    return cur


def disc_tail(t: Sequence[int]) -> int:
    """Discriminant of the chain with its first entry removed."""
    return disc(t[1:])


def coefficient_sum(t: Sequence[int]) -> Fraction:
    """Sum of the orbifold coefficients of an admissible chain.

    Uses the classical identity: the coefficient of the i-th curve is
    1 - d(head) * d(tail) / d(chain), heads and tails excluding entry i.
    """
    if not is_admissible(t):
        raise ValueError("coefficient sum needs an admissible chain")
    d = disc(t)
    total = Fraction(0)
    for i in range(len(t)):
        total += 1 - Fraction(disc(t[:i]) * disc(t[i + 1 :]), d)
    return total


def star(left: Sequence[int] | _StarUnit, right: Sequence[int]) -> Chain:
    """Composition splicing two chains across a contracted (-1)-curve.

    The formula merges the facing ends: the last entry of the left chain
    absorbs the first entry of the right one, minus 1.  Degenerate cases
    follow the contraction picture: an empty left operand eats the first
    entry of the right, an empty right operand leaves the left unchanged.

    >>> star((2,), (2, 2))
    (3, 2)
    >>> star((), (3, 4))
    (4,)
    >>> star(STAR_UNIT, (3, 4))
    (5,)
    """
    if isinstance(left, _StarUnit):
        r = chain(right)
        if not r:
            raise ValueError("star with the (2)_{-1} token needs a nonempty right operand")
        if len(r) == 1:
            return ()
        return (r[1] + 1,) + r[2:]
    l, r = chain(left), chain(right)
    if not l and not r:
        raise ValueError("star of two empty chains is undefined by convention")
    if not l:
        return r[1:]
    if not r:
        return l
    return l[:-1] + (l[-1] + r[0] - 1,) + r[1:]


def star_many(chains: Iterable[Sequence[int]]) -> Chain:
    """Left-associated composition of several chains."""
    items = list(chains)
    if not items:
        raise ValueError("star of no chains is undefined")
    acc = chain(items[0])
    for t in items[1:]:
        acc = star(acc, t)
    return acc


def adjoint(t: Sequence[int]) -> Chain:
    """The companion chain: same discriminant, complementary inverse.

    Defined for admissible chains and for (1,), whose companion is empty.
    The empty chain has no companion.

    >>> adjoint((3,))
    (2, 2)
    >>> adjoint((2, 2))
    (3,)
    >>> adjoint((1,))
    ()
    """
    tt = chain(t)
    if tt == (1,):
        return ()
    if not is_admissible(tt):
        raise ValueError(f"adjoint undefined for {list(tt)}: chain must be admissible or [1]")
    acc: Chain = (2,) * (tt[-1] - 1)
    for a in reversed(tt[:-1]):
        acc = star(acc, (2,) * (a - 1))
    return acc


def run(entry: int, length: int) -> Chain:
    """The chain (entry)_length; length 0 gives the empty chain."""
    if length < 0:
        raise ValueError("run length must be non-negative here")
    return (entry,) * length


@dataclass(frozen=True)
class ForkReport:
    kind: str  # "admissible", "log_canonical", "degenerate", "neither"
    delta: Fraction
    twig_discs: tuple[int, int, int]


def classify_fork(branch: int, twigs: Sequence[Sequence[int]]) -> ForkReport:
    """Classify a central curve with three admissible twigs.

    The decision is by the sum of reciprocal twig discriminants: above 1
    the fork contracts to a quotient singularity, exactly 1 is the log
    canonical edge case (degenerate when every curve is a (-2)), below 1
    the form is not negative definite and nothing contracts.
    """
    if branch < 2:
        raise ValueError("branch weight must be at least 2")
    ts = [chain(t) for t in twigs]
    if len(ts) != 3 or not all(is_admissible(t) for t in ts):
        raise ValueError("a fork needs three admissible twigs")
    discs = tuple(disc(t) for t in ts)
    delta = sum((Fraction(1, d) for d in discs), Fraction(0))
    if delta > 1:
        kind = "admissible"
    elif delta == 1:
        all_two = branch == 2 and all(x == 2 for t in ts for x in t)
        kind = "degenerate" if all_two else "log_canonical"
    else:
        kind = "neither"
    return ForkReport(kind, delta, discs)  # type: ignore[arg-type]


@dataclass(frozen=True)
class BenchReport:
    kind: str  # "log_canonical", "invalid"


def classify_bench(central: Sequence[int]) -> BenchReport:
    """A bench is log canonical iff its central chain is admissible and
    carries at least one entry above 2 (otherwise the form degenerates)."""
    c = chain(central)
    if is_admissible(c) and any(x > 2 for x in c):
        return BenchReport("log_canonical")
    return BenchReport("invalid")
