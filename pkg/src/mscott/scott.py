"""Back-and-forth pseudo-distances, Scott rank, and the threshold fixpoint.

The engine computes, for one finite structure:

* stage-0 distance: r0(a, b) = max over the first N enumerated family
  members phi of |phi(a) - phi(b)| (an exact lower bound for the true
  supremum, nondecreasing in N);
* successor stages, consuming arity n+1 to produce arity n:

      r_{alpha+1}(a, b) = max( max_c min_d r_alpha(ac, bd),
                               max_d min_c r_alpha(ac, bd) )

  i.e. the two-sided Hausdorff lift over one-point extensions (the
  inf over independent witnesses splits into the two one-sided terms);
* a triangular table family: stage alpha is available at arity n when
  n + alpha <= table_cap, making the inevitable truncation explicit;
* the threshold operator at a rational q > 0, whose stages collect,
  besides length-mismatched pairs, exactly the pairs with r_k > q; its
  least fixed point and entry stages are compared against the
  r-threshold predicate by ``oracle_equivalence``.

Arithmetic is exact throughout: tables hold integers over one common
denominator when that stays small, and Fraction objects otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .evaluation import Evaluator
from .family import family_stack
from .moduli import SumWeakModulus
from .parser import print_formula
from .rationals import ZERO, format_rational
from .structures import PreStructure
from .syntax import Formula, eval_connective, normalize_basic

_INT_DENOM_LIMIT = 1 << 40


_AUTO_TUPLE_BUDGET = 2000  # top-arity tuple count the auto cap will allow


@dataclass(frozen=True)
class EngineConfig:
    family_size: int = 200
    max_arity: int = 3
    stage_cap: int = 8
    table_cap: int | None = None  # arity + stage window; None picks a size-aware default
    term_depth: int = 1

    def resolved_cap(self, n_points: int) -> int:
        """Explicit cap wins; otherwise max_arity + min(stage_cap, 2),
        clamped so the top-arity tuple set stays within budget (but always
        leaving at least one successor stage above max_arity)."""
        if self.table_cap is not None:
            return self.table_cap
        cap = self.max_arity + min(self.stage_cap, 2)
        while cap > self.max_arity + 1 and n_points**cap > _AUTO_TUPLE_BUDGET:
            cap -= 1
        return cap

    def meta(self, resolved: int | None = None) -> dict:
        return {
            "family_size": self.family_size,
            "max_arity": self.max_arity,
            "stage_cap": self.stage_cap,
            "table_cap": self.table_cap if resolved is None else resolved,
            "term_depth": self.term_depth,
        }


@dataclass(frozen=True)
class RankReport:
    rank: int | None
    definitive: bool
    checkable_stages: int
    stable: dict[tuple[int, int], bool]
    meta: dict


@dataclass
class FixpointTrace:
    q: Fraction
    entry: dict[int, np.ndarray]  # arity -> entry stage per pair (-1: not within window)
    stage_sizes: list[dict[int, int]]  # per stage, per arity, members among equal-length pairs
    closed: bool
    closure_stage: int | None
    meta: dict

    def member(self, a: tuple[str, ...], b: tuple[str, ...], engine: "BFEngine") -> bool:
        if len(a) != len(b):
            return True  # length mismatch enters at stage 0
        n = len(a)
        ia, ib = engine.tuple_index(a), engine.tuple_index(b)
        return int(self.entry[n][ia, ib]) >= 0

    def entry_stage(self, a: tuple[str, ...], b: tuple[str, ...], engine: "BFEngine") -> int | None:
        if len(a) != len(b):
            return 0
        n = len(a)
        v = int(self.entry[n][engine.tuple_index(a), engine.tuple_index(b)])
        return v if v >= 0 else None


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    q: Fraction
    mismatches: tuple[tuple, ...]
    pairs_checked: int
    meta: dict


class BFEngine:
    """All back-and-forth computations for one validated structure."""

    def __init__(
        self,
        structure: PreStructure,
        omega: SumWeakModulus | None = None,
        config: EngineConfig | None = None,
    ):
        self.s = structure
        self.omega = omega or SumWeakModulus()
        self.config = config or EngineConfig()
        self.cap = self.config.resolved_cap(len(structure.points))
        self._families: dict[int, list[Formula]] = {}
        self._tuples: dict[int, list[tuple[str, ...]]] = {}
        self._tables: dict[tuple[int, int], np.ndarray] = {}
        self._denom: int | None = None
        self._built = False

    # -- construction -------------------------------------------------

    def tuples(self, n: int) -> list[tuple[str, ...]]:
        if n not in self._tuples:
            self._tuples[n] = self.s.tuples(n)
        return self._tuples[n]

    def tuple_index(self, t: tuple[str, ...]) -> int:
        m = len(self.s.points)
        idx = 0
        for p in t:
            idx = idx * m + self.s.points.index(p)
        return idx

    def family(self, n: int) -> list[Formula]:
        if n not in self._families:
            self._families[n] = family_stack(
                self.s.signature,
                self.omega,
                n,
                self.config.family_size,
                self.config.term_depth,
            )
        return self._families[n]

    def _formula_rows(self, n: int) -> list[list[Fraction]]:
        """One row of exact values per family member, over all n-tuples."""
        ev = Evaluator(self.s)
        tuples = self.tuples(n)
        atom_cols: dict[str, list[Fraction]] = {}
        rows: list[list[Fraction]] = []
        seen_rows: set[tuple[Fraction, ...]] = set()
        for phi in self.family(n):
            expr, atomics = normalize_basic(phi)
            cols = []
            for a in atomics:
                key = print_formula(a)
                if key not in atom_cols:
                    atom_cols[key] = [ev.formula(a, t) for t in tuples]
                cols.append(atom_cols[key])
            value_cache: dict[tuple[Fraction, ...], Fraction] = {}
            row = []
            for ti in range(len(tuples)):
                z = tuple(c[ti] for c in cols)
                v = value_cache.get(z)
                if v is None:
                    v = eval_connective(expr, z)
                    value_cache[z] = v
                row.append(v)
            key_row = tuple(row)
            if key_row not in seen_rows:
                seen_rows.add(key_row)
                rows.append(row)
        return rows

    def denominator(self) -> int:
        self._build()
        assert self._denom is not None
        return self._denom

    def _build(self) -> None:
        if self._built:
            return
        all_rows: dict[int, list[list[Fraction]]] = {}
        denom = 1
        for n in range(1, self.cap + 1):
            rows = self._formula_rows(n)
            all_rows[n] = rows
            for row in rows:
                for v in row:
                    denom = math.lcm(denom, v.denominator)
        self._denom = denom
        use_int = denom <= _INT_DENOM_LIMIT
        for n in range(1, self.cap + 1):
            rows = all_rows[n]
            t = len(self.tuples(n))
            if use_int:
                if rows:
                    V = np.array(
                        [[int(v * denom) for v in row] for row in rows], dtype=np.int64
                    )
                else:
                    V = np.zeros((1, t), dtype=np.int64)
                table = np.zeros((t, t), dtype=np.int64)
                chunk = max(1, (1 << 22) // max(1, V.shape[0] * t))
                for lo in range(0, t, chunk):
                    hi = min(t, lo + chunk)
                    diff = np.abs(V[:, :, None] - V[:, None, lo:hi])
                    table[:, lo:hi] = diff.max(axis=0)
            else:
                if rows:
                    V = np.array(rows, dtype=object)
                else:
                    V = np.full((1, t), ZERO, dtype=object)
                table = np.empty((t, t), dtype=object)
                for i in range(t):
                    col_i = V[:, i]
                    for j in range(t):
                        table[i, j] = max(abs(x - y) for x, y in zip(col_i, V[:, j]))
            self._tables[(n, 0)] = table
        self._built = True

    # -- stage tables ---------------------------------------------------

    def window(self, n: int) -> int:
        """Highest stage available at arity n."""
        return min(self.cap - n, self.config.stage_cap)

    def table(self, n: int, stage: int) -> np.ndarray:
        """Stage table at arity n, scaled by ``denominator()`` on the int path."""
        self._build()
        if n < 1 or n > self.cap:
            raise ValueError(f"arity {n} outside the table window 1..{self.cap}")
        if stage < 0 or stage > self.window(n):
            raise ValueError(
                f"stage {stage} at arity {n} outside the triangular window "
                f"(arity + stage <= {self.cap})"
            )
        key = (n, stage)
        if key not in self._tables:
            prev = self.table(n + 1, stage - 1)
            m = len(self.s.points)
            t = len(self.tuples(n))
            r4 = prev.reshape(t, m, t, m)
            h1 = r4.min(axis=3).max(axis=1)  # sup_c inf_d'
            h2 = r4.min(axis=1).max(axis=2)  # sup_d inf_c'
            self._tables[key] = np.maximum(h1, h2)
        return self._tables[key]

    def value(self, stage: int, a: tuple[str, ...], b: tuple[str, ...]) -> Fraction:
        """r_stage(a, b) as an exact rational."""
        if len(a) != len(b):
            raise ValueError("tuples must have equal length; unequal lengths are "
                             "flagged by the threshold operator instead")
        n = len(a)
        tab = self.table(n, stage)
        v = tab[self.tuple_index(a), self.tuple_index(b)]
        if tab.dtype == object:
            return v
        return Fraction(int(v), self.denominator())

    def pairs(self, n: int, stage: int) -> Iterator[tuple[tuple[str, ...], tuple[str, ...], Fraction]]:
        tab = self.table(n, stage)
        tuples = self.tuples(n)
        denom = self.denominator()
        for i, a in enumerate(tuples):
            for j, b in enumerate(tuples):
                v = tab[i, j]
                yield a, b, (v if tab.dtype == object else Fraction(int(v), denom))

    # -- r0 metadata ----------------------------------------------------

    def r0_pair(
        self, a: tuple[str, ...], b: tuple[str, ...], mapper=map
    ) -> tuple[Fraction, dict]:
        """Stage-0 value for one pair plus resolution metadata (family size,
        and the metric-only closed form where available).

        ``mapper`` may be an order-preserving parallel map; the result is
        a max, so scheduling never affects it."""
        if len(a) != len(b):
            raise ValueError("tuples must have equal length")
        n = len(a)
        family = self.family(n)
        ev = Evaluator(self.s)
        gaps = list(mapper(lambda phi: abs(ev.formula(phi, a) - ev.formula(phi, b)), family))
        best = max(gaps, default=ZERO)
        meta: dict = {"family_size": len(family), "arity": n}
        sig = self.s.signature
        if not sig.relations and not sig.functions and not sig.constants:
            oracle = ZERO
            for i in range(n):
                for j in range(n):
                    gap = abs(self.s.d(a[i], a[j]) - self.s.d(b[i], b[j]))
                    if gap > oracle:
                        oracle = gap
            meta["metric_oracle"] = format_rational(oracle)
            # The pairwise closed form is the exact supremum for pairs;
            # from arity 3 on, combined-difference connectives can exceed it.
            meta["metric_oracle_exact"] = n <= 2
            if n <= 2:
                meta["certified_slack"] = format_rational(oracle - best)
        return best, meta

    # -- Scott rank -------------------------------------------------------

    def scott_rank(self) -> RankReport:
        self._build()
        max_arity = min(self.config.max_arity, self.cap - 1)
        checkable = min(
            self.config.stage_cap - 1, self.cap - max_arity - 1
        )
        stable: dict[tuple[int, int], bool] = {}
        rank: int | None = None
        for alpha in range(checkable + 1):
            all_stable = True
            for n in range(1, max_arity + 1):
                eq = bool(np.array_equal(self.table(n, alpha), self.table(n, alpha + 1)))
                stable[(n, alpha)] = eq
                all_stable = all_stable and eq
            if all_stable and rank is None:
                rank = alpha
        return RankReport(
            rank=rank,
            definitive=rank is not None,
            checkable_stages=checkable,
            stable=stable,
            meta=self.config.meta(self.cap) | {"structure": self.s.name},
        )

    # -- threshold operator ------------------------------------------------

    def _threshold(self, n: int, stage: int, q: Fraction) -> np.ndarray:
        tab = self.table(n, stage)
        if tab.dtype == object:
            return np.vectorize(lambda v: v > q, otypes=[bool])(tab)
        return tab * q.denominator > q.numerator * self.denominator()

    def gamma_fixpoint(self, q: Fraction) -> FixpointTrace:
        """Least fixed point of the threshold operator at q, with entry stages.

        Clause 1 (length mismatch) is implicit: every unequal-length pair
        is a member from stage 0 and is reported by ``member`` without
        being stored.  Equal-length pairs at arity n carry valid entry
        stages up to the triangular window for that arity.
        """
        q = Fraction(q)
        if q <= 0:
            raise ValueError("the threshold must be a positive rational")
        self._build()
        arities = range(1, self.cap + 1)
        base = {n: self._threshold(n, 0, q) for n in arities}
        current = {n: np.zeros_like(base[n], dtype=bool) for n in arities}
        entry = {n: np.full(base[n].shape, -1, dtype=np.int64) for n in arities}
        sizes: list[dict[int, int]] = []
        closed = False
        closure_stage: int | None = None
        for k in range(self.config.stage_cap + 1):
            new = {}
            for n in arities:
                memb = base[n].copy()
                if n + 1 <= self.cap:
                    m = len(self.s.points)
                    t = len(self.tuples(n))
                    x4 = current[n + 1].reshape(t, m, t, m)
                    # exists c,d  forall c',d':  (a c', b d) in X  or  (a c, b d') in X
                    # the universal pair splits over the two disjuncts:
                    all_c = x4.all(axis=1)  # [a, b, d]: forall c' (a c', b d)
                    all_d = x4.all(axis=3)  # [a, c, b]: forall d' (a c, b d')
                    memb |= all_c.any(axis=2) | all_d.any(axis=1)
                new[n] = memb
                fresh = memb & (entry[n] < 0)
                entry[n][fresh] = k
            sizes.append({n: int(new[n].sum()) for n in arities})
            if all(np.array_equal(new[n], current[n]) for n in arities):
                closed = True
                closure_stage = k
                break
            current = new
        return FixpointTrace(
            q=q,
            entry=entry,
            stage_sizes=sizes,
            closed=closed,
            closure_stage=closure_stage,
            meta=self.config.meta(self.cap) | {"structure": self.s.name, "q": format_rational(q)},
        )

    def r_entry_stages(self, q: Fraction, n: int) -> np.ndarray:
        """Least stage alpha within the window with r_alpha > q, else -1."""
        out = np.full(self.table(n, 0).shape, -1, dtype=np.int64)
        for alpha in range(self.window(n) + 1):
            memb = self._threshold(n, alpha, q)
            fresh = memb & (out < 0)
            out[fresh] = alpha
        return out

    def oracle_equivalence(self, q: Fraction, max_report: int = 10) -> EquivalenceReport:
        """Check that threshold-fixpoint membership and entry stages coincide
        with the r-threshold predicate, within the shared triangular window."""
        q = Fraction(q)
        trace = self.gamma_fixpoint(q)
        mismatches: list[tuple] = []
        pairs = 0
        for n in range(1, self.cap + 1):
            w = self.window(n)
            gamma = trace.entry[n].copy()
            gamma[gamma > w] = -1
            rstages = self.r_entry_stages(q, n)
            pairs += gamma.size
            if np.array_equal(gamma, rstages):
                continue
            bad = np.argwhere(gamma != rstages)
            tuples = self.tuples(n)
            for i, j in bad[:max_report]:
                mismatches.append(
                    (n, tuples[i], tuples[j], int(gamma[i, j]), int(rstages[i, j]))
                )
        return EquivalenceReport(
            ok=not mismatches,
            q=q,
            mismatches=tuple(mismatches),
            pairs_checked=pairs,
            meta=self.config.meta(self.cap) | {"structure": self.s.name},
        )
