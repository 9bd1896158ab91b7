#!/usr/bin/env python3
"""Survey back-and-forth stages over a batch of random finite metric spaces.

Generates valid random spaces, computes the stage tables, and tabulates
where each structure's distinguishing power saturates.  Useful as a
smoke workload and for eyeballing how rank behaves with size.

Usage: python3 scripts/rank_survey.py [count] [max_points]
"""

import random
import sys
import time
from fractions import Fraction as F

from mscott.rationals import format_rational
from mscott.scott import BFEngine, EngineConfig
from mscott.structures import PreStructure, build_metric, validate
from mscott.syntax import Signature


def random_space(rng: random.Random, n: int, name: str) -> PreStructure:
    lower = [[F(rng.randint(16, 32), 32) for _ in range(i)] for i in range(1, n)]
    s = PreStructure(
        signature=Signature(),
        points=tuple(f"p{i}" for i in range(n)),
        metric=build_metric(tuple(f"p{i}" for i in range(n)), lower),
        name=name,
    )
    assert validate(s) == []
    return s


def main() -> None:
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    max_points = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    rng = random.Random(0x5EED)
    print(f"{'name':<10} {'pts':>3} {'rank':>5} {'r1 spread (arity 1)':>22} {'sec':>6}")
    for i in range(count):
        n = rng.randint(2, max_points)
        s = random_space(rng, n, f"space{i:02d}")
        t0 = time.time()
        eng = BFEngine(s, config=EngineConfig(family_size=160, max_arity=2, table_cap=4))
        report = eng.scott_rank()
        vals = sorted(
            {eng.value(1, a, b) for a in eng.tuples(1) for b in eng.tuples(1)}
        )
        spread = f"{format_rational(vals[0])}..{format_rational(vals[-1])}"
        rank = report.rank if report.rank is not None else f">{report.checkable_stages}"
        print(f"{s.name:<10} {n:>3} {str(rank):>5} {spread:>22} {time.time() - t0:>6.2f}")


if __name__ == "__main__":
    main()
