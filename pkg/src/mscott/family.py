"""Deterministic enumeration of the countable dense family of
weak-modulus-respecting basic formulas, and the respects-check.

For a fixed signature, weak modulus, and arity n the family interleaves,
by a diagonal over per-tuple streams, the lattice terms of segment
connectives over every finite tuple of atomic formulas in v0..v_{n-1}:

* the atomic pool drops atomics whose canonical modulus is identically
  zero (their value is pinned by the constant-substitution reduction;
  only ``d(t,t) = 0`` arises structure-free) and keeps one orientation
  of each metric atomic, ordered new-variable-last so the arity-n pool
  is a prefix of the arity-(n+1) pool;
* per tuple, the induced modulus is computed exactly as the value
  function of a small linear program over linear dominating rows of the
  atomic moduli.  That closed form is a certified lower bound for the
  largest modulus the connective may respect, so every emitted formula
  genuinely respects the weak modulus (not merely at grid resolution).
  Tuples with atomics outside the linear family are skipped here and
  served by the grid-certified respects-check instead;
* each stream emits, per level, the single segments of the next data
  height (rational anchors and endpoint values of bounded denominator)
  followed by binary meets and joins of previously emitted items;
  degenerate and slope-0 segments normalize to constants and duplicates
  are dropped by printed form.

With an empty pool (e.g. arity 1 over the empty signature) the family
degenerates to constant formulas in height order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .moduli import (
    Modulus,
    SumWeakModulus,
    induced_connective_modulus,
    induced_modulus_exact,
    is_zero_modulus,
    linear_upper_row,
    pi_fold,
)
from .parser import print_formula
from .rationals import ONE, ZERO, RatGrid, Vec, vec_sub
from .segments import make_segment
from .syntax import (
    Apply,
    Atomic,
    ConstF,
    ConstTerm,
    Formula,
    MaxF,
    MinF,
    Signature,
    Term,
    Var,
    SegF,
    canonical_modulus,
    eval_connective,
    formula_free_vars,
    is_basic,
    normalize_basic,
    substitute_constants,
    term_size,
)

METRIC = "d"


# ---------------------------------------------------------------------------
# Atomic pool
# ---------------------------------------------------------------------------


def _terms(sig: Signature, arity: int, depth: int) -> list[Term]:
    base: list[Term] = [Var(i) for i in range(arity)]
    base.extend(ConstTerm(c) for c in sig.constants)
    out = list(base)
    for _ in range(depth):
        new: list[Term] = []
        for f in sig.functions:
            for args in product(out, repeat=f.arity):
                new.append(Apply(f.name, tuple(args)))
        out = out + new
    return out


def _term_key(t: Term) -> tuple:
    from .parser import print_term

    return (term_size(t), print_term(t))


def _max_var(atom: Atomic) -> int:
    fv = formula_free_vars(atom)
    return max(fv) if fv else -1


def atomic_pool(sig: Signature, arity: int, term_depth: int = 1) -> list[Atomic]:
    """Atomic formulas in v0..v_{arity-1}, zero-modulus atomics dropped,
    metric atomics in one canonical orientation, new-variable-last order."""
    terms = sorted(_terms(sig, arity, term_depth), key=_term_key)
    atoms: list[Atomic] = []
    seen: set[str] = set()
    for i, t1 in enumerate(terms):
        for t2 in terms[i:]:
            atoms.append(Atomic(METRIC, (t1, t2)))
    for r in sig.relations:
        for args in product(terms, repeat=r.arity):
            atoms.append(Atomic(r.name, tuple(args)))
    pool: list[Atomic] = []
    for a in atoms:
        key = print_formula(a)
        if key in seen:
            continue
        seen.add(key)
        if is_zero_modulus(canonical_modulus(a, sig, arity)):
            continue
        pool.append(a)
    rel_rank = {r.name: i + 1 for i, r in enumerate(sig.relations)}
    rel_rank[METRIC] = 0
    pool.sort(
        key=lambda a: (
            _max_var(a),
            sum(term_size(t) for t in a.args),
            rel_rank[a.relation],
            print_formula(a),
        )
    )
    return pool


# ---------------------------------------------------------------------------
# Rational data of bounded height
# ---------------------------------------------------------------------------


def unit_rationals(height: int) -> list[Fraction]:
    """All p/q in [0,1] with q <= height, ascending."""
    vals = {ZERO, ONE}
    for q in range(2, height + 1):
        for p in range(1, q):
            vals.add(Fraction(p, q))
    return sorted(vals)


def _height(x: Fraction) -> int:
    return x.denominator


# ---------------------------------------------------------------------------
# Per-tuple streams
# ---------------------------------------------------------------------------


@dataclass
class _Stream:
    """Lazily materialized, deterministically ordered item list."""

    atomics: tuple[Atomic, ...] | None  # None: constant fallback stream
    delta: Modulus | None
    items: list[Formula]
    level: int
    level_starts: list[int]
    seen: set[str]

    @classmethod
    def for_tuple(cls, atomics: tuple[Atomic, ...], delta: Modulus) -> "_Stream":
        return cls(atomics, delta, [], 0, [0], set())

    @classmethod
    def constants(cls) -> "_Stream":
        return cls(None, None, [], 0, [0], set())

    @classmethod
    def empty(cls) -> "_Stream":
        s = cls(None, None, [], 0, [0], set())
        s.level = -1  # exhausted marker
        return s

    def _emit(self, phi: Formula) -> None:
        key = print_formula(phi)
        if key not in self.seen:
            self.seen.add(key)
            self.items.append(phi)

    def _segment_formula(self, x: Vec, y: Vec, a: Fraction, b: Fraction) -> Formula | None:
        assert self.delta is not None and self.atomics is not None
        try:
            seg = make_segment(self.delta, x, y, a, b)
        except ValueError:
            return None
        if seg.degenerate or seg.a == seg.b:
            return ConstF(seg.a)
        return SegF(seg, tuple(self.atomics))

    def _singles_of_height(self, h: int) -> list[Formula]:
        assert self.delta is not None
        k = self.delta.arity
        vals = unit_rationals(h)
        nondeg: list[Formula] = []
        consts: list[Formula] = []
        for combo in product(vals, repeat=2 * k + 2):
            if max(_height(c) for c in combo) != h:
                continue
            x, y = combo[:k], combo[k : 2 * k]
            a, b = combo[2 * k], combo[2 * k + 1]
            phi = self._segment_formula(x, y, a, b)
            if phi is None:
                continue
            (consts if isinstance(phi, ConstF) else nondeg).append(phi)
        return nondeg + consts

    def _advance(self) -> None:
        """Materialize one more level."""
        if self.level < 0:
            return
        L = self.level
        self.level += 1
        if self.atomics is None:
            for q in unit_rationals(L + 1):
                if _height(q) == L + 1:
                    self._emit(ConstF(q))
            self.level_starts.append(len(self.items))
            return
        for phi in self._singles_of_height(L + 1):
            self._emit(phi)
        if L >= 1:
            lo, hi = self.level_starts[L - 1], self.level_starts[L]
            for op in (MinF, MaxF):
                for j in range(lo, hi):
                    for i in range(j):
                        self._emit(op((self.items[i], self.items[j])))
        self.level_starts.append(len(self.items))

    def get(self, idx: int) -> Formula | None:
        if self.level < 0:
            return None
        guard = 0
        while len(self.items) <= idx:
            before = len(self.items)
            self._advance()
            guard = guard + 1 if len(self.items) == before else 0
            if guard > 8:  # stalled stream; treat as exhausted
                return None
        return self.items[idx]


def _tuple_at(pool_size: int, j: int) -> tuple[int, ...] | None:
    """j-th atomic-index tuple in (length, lex) order; None if pool empty."""
    if pool_size == 0:
        return None
    k = 1
    block = pool_size
    while j >= block:
        j -= block
        k += 1
        block = pool_size**k
    idx = []
    for _ in range(k):
        idx.append(j % pool_size)
        j //= pool_size
    return tuple(reversed(idx))


class FamilyEnumerator:
    """Deterministic cursor over the dense family at one arity.

    ``max_tuple_len`` bounds the number of atomics per connective; data
    heights and lattice sizes stay exhaustive in the limit, while longer
    tuples would multiply segment data combinatorially for no practical
    distinguishing power at this scale.
    """

    def __init__(
        self,
        signature: Signature,
        omega: SumWeakModulus,
        arity: int,
        term_depth: int = 1,
        max_tuple_len: int = 3,
    ):
        self.signature = signature
        self.omega = omega
        self.arity = arity
        self.max_tuple_len = max_tuple_len
        self.pool = atomic_pool(signature, arity, term_depth)
        self._streams: list[_Stream] = []
        self._emitted: list[Formula] = []
        self._diag = 0
        self._delta_cache: dict[tuple[Vec, ...], Modulus | None] = {}

    def _induced(self, atomics: tuple[Atomic, ...]) -> Modulus | None:
        rows = []
        for a in atomics:
            row = linear_upper_row(canonical_modulus(a, self.signature, self.arity))
            if row is None or not any(row):
                return None
            rows.append(row)
        key = tuple(rows)
        if key not in self._delta_cache:
            self._delta_cache[key] = induced_modulus_exact(rows, self.omega)
        return self._delta_cache[key]

    def _stream(self, j: int) -> _Stream:
        while len(self._streams) <= j:
            idx = len(self._streams)
            if not self.pool:
                self._streams.append(_Stream.constants() if idx == 0 else _Stream.empty())
                continue
            tup = _tuple_at(len(self.pool), idx)
            if len(tup) > self.max_tuple_len:
                self._streams.append(_Stream.empty())
                continue
            atomics = tuple(self.pool[i] for i in tup)
            delta = self._induced(atomics)
            if delta is None:
                self._streams.append(_Stream.empty())
            else:
                self._streams.append(_Stream.for_tuple(atomics, delta))
        return self._streams[j]

    def take(self, count: int) -> list[Formula]:
        """The first ``count`` family members, in enumeration order."""
        stalled = 0
        while len(self._emitted) < count:
            D = self._diag
            self._diag += 1
            got_any = False
            for j in range(D + 1):
                phi = self._stream(j).get(D - j)
                if phi is not None:
                    self._emitted.append(phi)
                    got_any = True
            stalled = 0 if got_any else stalled + 1
            if stalled > 64:  # every live stream exhausted; partial family
                break
        return self._emitted[:count]


_ENUM_CACHE: dict[tuple, FamilyEnumerator] = {}


def enumerate_family(
    signature: Signature,
    omega: SumWeakModulus,
    arity: int,
    count: int,
    term_depth: int = 1,
    max_tuple_len: int = 3,
) -> list[Formula]:
    """First ``count`` members of the dense family at the given arity."""
    key = (signature, omega, arity, term_depth, max_tuple_len)
    enum = _ENUM_CACHE.get(key)
    if enum is None:
        enum = FamilyEnumerator(signature, omega, arity, term_depth, max_tuple_len)
        _ENUM_CACHE[key] = enum
    return enum.take(count)


def family_stack(
    signature: Signature,
    omega: SumWeakModulus,
    arity: int,
    count: int,
    term_depth: int = 1,
) -> list[Formula]:
    """Family members at ``arity`` including every lower-arity member.

    A formula with free variables among v0..v_{m-1} is also an n-ary
    family member for n >= m, so inheriting them costs nothing and makes
    the truncated stage-0 distance monotone under tuple extension (the
    property the successor recursion leans on).
    """
    members: list[Formula] = []
    seen: set[str] = set()
    for n in range(1, arity + 1):
        for phi in enumerate_family(signature, omega, n, count, term_depth):
            key = print_formula(phi)
            if key not in seen:
                seen.add(key)
                members.append(phi)
    return members


# ---------------------------------------------------------------------------
# Respects-check (grid resolution)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RespectReport:
    respects: bool
    witness: tuple[Vec, Vec] | None
    gap: Fraction | None  # |u(z) - u(w)| - bound at the witness
    step: Fraction
    k_max: int
    reduced_atomics: int

    def __bool__(self) -> bool:
        return self.respects


def respects_weak_modulus(
    phi: Formula,
    signature: Signature,
    omega: SumWeakModulus,
    step: Fraction = Fraction(1, 16),
    k_max: int = 8,
) -> RespectReport:
    """Decide, at grid resolution, whether a basic formula's connective
    respects the modulus induced by its atomics under ``omega``.

    Zero-modulus atomics of the form d(t,t) are pinned to 0 first; other
    zero-modulus atomics are rejected (their constant value depends on
    the structure, so the caller must substitute it).
    """
    if not is_basic(phi):
        raise ValueError("the respects-check applies to basic formulas")
    step = Fraction(step)
    expr, atomics = normalize_basic(phi)
    fv = formula_free_vars(phi)
    n = (max(fv) + 1) if fv else 1
    deltas: list[Modulus] = []
    pinned: dict[int, Fraction] = {}
    kept: list[Modulus] = []
    for i, a in enumerate(atomics):
        m = canonical_modulus(a, signature, n)
        if is_zero_modulus(m):
            if a.relation == METRIC and a.args[0] == a.args[1]:
                pinned[i] = ZERO
            else:
                raise ValueError(
                    f"atomic {print_formula(a)} has zero modulus with a "
                    "structure-dependent value; substitute its constant first"
                )
        else:
            kept.append(m)
    if pinned:
        expr = substitute_constants(expr, pinned)
    if not kept:
        return RespectReport(True, None, None, step, k_max, len(pinned))
    k = len(kept)
    n_grid = RatGrid(n, step, ONE)
    induced = induced_connective_modulus(kept, omega, k_max, n_grid)
    check = RatGrid(k, step, ONE)
    pts = list(check.points())
    uvals = {z: eval_connective(expr, z) for z in pts}
    bound_cache: dict[Vec, Fraction] = {}
    for z in pts:
        for w in pts:
            dv = pi_fold(vec_sub(z, w))
            bound = bound_cache.get(dv)
            if bound is None:
                bound = induced(dv)
                bound_cache[dv] = bound
            gap = abs(uvals[z] - uvals[w])
            if gap > bound:
                return RespectReport(False, (z, w), gap - bound, step, k_max, len(pinned))
    return RespectReport(True, None, None, step, k_max, len(pinned))
