"""Segment connectives and the countable lattice they generate.

A segment connective is the canonical modulus-respecting interpolant on
the unit cube: it takes value ``a`` at an anchor point, ``b`` at a second
anchor, and in between scales the folded modulus distance from the first
anchor.  Meets and joins of segments form a lattice that is dense, in the
uniform norm at grid scale, among all functions respecting the modulus.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .moduli import Modulus, pi_fold
from .rationals import (
    ONE,
    RatGrid,
    Vec,
    format_rational,
    format_vec,
    require_unit,
    vec_sub,
)


@dataclass(frozen=True)
class SegmentConnective:
    """min(1, a + (b-a)/D(y-x) * D(z-x)) where D folds the modulus over
    coordinatewise absolute differences; constant ``a`` when D(y-x) = 0.

    Construction enforces a <= b <= a + D(pi(y-x)) (with a = b forced in
    the degenerate case), which makes the segment respect its modulus and
    interpolate a at x and b at y.
    """

    delta: Modulus
    x: Vec
    y: Vec
    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(Fraction(v) for v in self.x))
        object.__setattr__(self, "y", tuple(Fraction(v) for v in self.y))
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @property
    def arity(self) -> int:
        return self.delta.arity

    def span(self) -> Fraction:
        return self.delta(pi_fold(vec_sub(self.y, self.x)))

    @property
    def degenerate(self) -> bool:
        return self.span() == 0

    def slope(self) -> Fraction:
        """(b - a) / D(y - x); only for nondegenerate segments."""
        s = self.span()
        if s == 0:
            raise ValueError("degenerate segment has no slope")
        return (self.b - self.a) / s

    def __call__(self, z: Sequence[Fraction]) -> Fraction:
        zs = tuple(Fraction(v) for v in z)
        if len(zs) != self.arity:
            raise ValueError(f"segment of arity {self.arity} applied to {len(zs)} args")
        s = self.span()
        if s == 0:
            return self.a
        rise = (self.b - self.a) * self.delta(pi_fold(vec_sub(zs, self.x))) / s
        return min(ONE, self.a + rise)


def make_segment(
    delta: Modulus,
    x: Sequence[Fraction],
    y: Sequence[Fraction],
    a: Fraction,
    b: Fraction,
) -> SegmentConnective:
    """Validated segment constructor; raises ValueError naming the violated
    side condition."""
    xs = tuple(require_unit(Fraction(v), "anchor coordinate") for v in x)
    ys = tuple(require_unit(Fraction(v), "anchor coordinate") for v in y)
    if len(xs) != delta.arity or len(ys) != delta.arity:
        raise ValueError("anchor arity must match the modulus arity")
    a = require_unit(Fraction(a), "a")
    b = require_unit(Fraction(b), "b")
    if a > b:
        raise ValueError(f"need a <= b, got a={format_rational(a)} > b={format_rational(b)}")
    span = delta(pi_fold(vec_sub(ys, xs)))
    if span == 0:
        if a != b:
            raise ValueError(
                "anchors are modulus-indistinguishable "
                f"(D(pi(y-x)) = 0) so a = b is required; got "
                f"a={format_rational(a)}, b={format_rational(b)}"
            )
    elif b > a + span:
        raise ValueError(
            f"side condition violated: b = {format_rational(b)} > "
            f"{format_rational(a)} + {format_rational(span)} = a + D(pi(y-x))"
        )
    return SegmentConnective(delta, xs, ys, a, b)


def segment_norm_bound(
    s1: SegmentConnective, s2: SegmentConnective, grid: RatGrid
) -> Fraction:
    """Exact upper bound on the uniform distance of two nondegenerate
    segments over the same modulus:

        |a - a'| + slope * D(x - x') + M * |slope - slope'|

    with M the maximum of the modulus on the [0,1]^k check grid."""
    if s1.delta != s2.delta:
        raise ValueError("segments must share their modulus")
    if s1.degenerate or s2.degenerate:
        raise ValueError("norm bound needs nondegenerate segments")
    if grid.dimension != s1.arity:
        raise ValueError("grid dimension must match the segment arity")
    m_max = max(s1.delta(p) for p in grid.points())
    sl1, sl2 = s1.slope(), s2.slope()
    return (
        abs(s1.a - s2.a)
        + sl1 * s1.delta(pi_fold(vec_sub(s1.x, s2.x)))
        + m_max * abs(sl1 - sl2)
    )


# ---------------------------------------------------------------------------
# Lattice terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    segment: SegmentConnective


@dataclass(frozen=True)
class Meet:
    items: tuple["LatticeTerm", ...]


@dataclass(frozen=True)
class Join:
    items: tuple["LatticeTerm", ...]


LatticeTerm = Leaf | Meet | Join


def lattice_eval(term: LatticeTerm, z: Sequence[Fraction]) -> Fraction:
    """Recursive exact min/max of leaf evaluations."""
    if isinstance(term, Leaf):
        return term.segment(z)
    vals = [lattice_eval(t, z) for t in term.items]
    return min(vals) if isinstance(term, Meet) else max(vals)


def lattice_leaves(term: LatticeTerm) -> list[SegmentConnective]:
    if isinstance(term, Leaf):
        return [term.segment]
    out: list[SegmentConnective] = []
    for t in term.items:
        out.extend(lattice_leaves(t))
    return out


def lattice_size(term: LatticeTerm) -> int:
    return len(lattice_leaves(term))


# ---------------------------------------------------------------------------
# Lattice approximation of a modulus-respecting target
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproximationResult:
    term: LatticeTerm
    deviation: Fraction
    succeeded: bool
    leaves: int


def _respect_violation(
    u: Mapping[Vec, Fraction], delta: Modulus
) -> tuple[Vec, Vec] | None:
    pts = list(u)
    for p in pts:
        for q in pts:
            if abs(u[p] - u[q]) > delta(pi_fold(vec_sub(p, q))):
                return p, q
    return None


def lattice_approximate(
    u: Mapping[Vec, Fraction] | Callable[[Vec], Fraction],
    delta: Modulus,
    eps: Fraction,
    budget: int = 20000,
    grid: RatGrid | None = None,
) -> ApproximationResult:
    """Approximate a modulus-respecting target by a lattice term.

    For each anchor x the meet of the two-point interpolating segments
    through (x, u(x)) lies below u + 0 everywhere on the sample set and
    equals u(x) at x; the join of these meets then reproduces u exactly
    at every sample point.  The epsilon budget only matters when the
    leaf budget forces anchor subsampling, in which case the best
    achieved deviation is reported honestly.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if callable(u) and not isinstance(u, Mapping):
        if grid is None:
            raise ValueError("a callable target needs a grid")
        table = {p: Fraction(u(p)) for p in grid.points()}
    else:
        table = {tuple(Fraction(c) for c in p): Fraction(v) for p, v in u.items()}
    for p, v in table.items():
        require_unit(v, f"target value at {format_vec(p)}")
    bad = _respect_violation(table, delta)
    if bad is not None:
        p, q = bad
        raise ValueError(
            f"target does not respect the modulus: |u{format_vec(p)} - "
            f"u{format_vec(q)}| > D(pi(p-q))"
        )
    pts = sorted(table)
    anchors = pts
    # Honor the leaf budget by thinning anchors; segments per anchor = |pts|.
    while anchors and len(anchors) * len(pts) > budget:
        anchors = anchors[::2] if len(anchors) > 1 else anchors
        if len(anchors) * len(pts) <= budget or len(anchors) == 1:
            break
    meets = []
    for x in anchors:
        segs: dict[SegmentConnective, None] = {}
        for y in pts:
            if table[y] >= table[x]:
                seg = make_segment(delta, x, y, table[x], table[y])
            else:
                seg = make_segment(delta, y, x, table[y], table[x])
            segs[seg] = None
        meets.append(Meet(tuple(Leaf(s) for s in segs)))
    term: LatticeTerm = Join(tuple(meets))
    deviation = max(abs(lattice_eval(term, p) - table[p]) for p in pts)
    return ApproximationResult(
        term=term,
        deviation=deviation,
        succeeded=deviation < eps,
        leaves=lattice_size(term),
    )
