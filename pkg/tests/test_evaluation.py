from fractions import Fraction as F

import pytest

from mscott.evaluation import (
    Evaluator,
    UnassignedVariable,
    eval_dense_agreement,
    eval_formula,
    eval_formula_normalized,
    eval_term,
    subset_density,
)
from mscott.parser import parse_formula, parse_term
from mscott.structures import load_structure
from mscott.syntax import canonical_modulus, formula_free_vars


def test_eval_term_examples(data_dir):
    s = load_structure(data_dir / "rel_demo.ms")
    assert eval_term(parse_term("v0"), s, ("u", "v")) == "u"
    assert eval_term(parse_term("c"), s, ("v",)) == "u"
    assert eval_term(parse_term("f(v1)"), s, ("u", "v")) == "w"
    with pytest.raises(UnassignedVariable):
        eval_term(parse_term("v3"), s, ("u",))


def test_eval_formula_examples(three_point):
    sig = three_point.signature
    assert eval_formula(parse_formula("d(v0, v1)", sig), three_point, ("x", "y")) == F(1, 5)
    sup = parse_formula("sup v1 . d(v0, v1)", sig)
    assert eval_formula(sup, three_point, ("x",)) == F(2, 5)
    inf = parse_formula("inf v1 . d(v0, v1)", sig)
    assert eval_formula(inf, three_point, ("x",)) == 0


def test_eval_lattice_arithmetic(three_point):
    sig = three_point.signature
    # min(1, (1/2)(d(v0,v1) + d(v1,v2))) is the diagonal segment connective;
    # at d-values 1/5 and 3/5 it evaluates to 2/5
    mean = parse_formula(
        "seg(linear(1,1); (0,0); (1,1); 0; 1; d(v0, v1), d(v1, v2))", sig
    )
    assert eval_formula(mean, three_point, ("x", "y", "z")) == F(2, 5)
    halved = parse_formula("pwl((0,0),(1,1/2); latmax(d(v0, v1), d(v1, v2)))", sig)
    assert eval_formula(halved, three_point, ("x", "y", "z")) == F(3, 10)


def test_two_evaluator_passes_agree(three_point, corpus):
    sig = three_point.signature
    formulas = [
        "d(v0, v1)",
        "latmin(d(v0, v1), const(1/2))",
        "latmax(pwl((0,0),(1/2,1),(1,1); d(v0, v1)), d(v1, v0))",
        "seg(linear(1); (0); (1); 0; 1; d(v0, v1))",
    ]
    for s in [three_point] + corpus[:5]:
        for text in formulas:
            phi = parse_formula(text, s.signature)
            for t in s.tuples(2):
                assert eval_formula(phi, s, t) == eval_formula_normalized(phi, s, t)


def test_monotone_connectives(three_point):
    sig = three_point.signature
    phi_min = parse_formula("latmin(d(v0, v1), d(v1, v2))", sig)
    phi_max = parse_formula("latmax(d(v0, v1), d(v1, v2))", sig)
    for t in three_point.tuples(3):
        lo = eval_formula(phi_min, three_point, t)
        hi = eval_formula(phi_max, three_point, t)
        assert lo <= hi


def test_respects_canonical_modulus(corpus, three_point):
    texts = [
        "d(v0, v1)",
        "latmin(d(v0, v1), const(1/3))",
        "pwl((0,0),(1/2,1),(1,1); d(v0, v1))",
        "sup v1 . d(v0, v1)",
        "seg(linear(1); (0); (1); 0; 1; d(v0, v1))",
    ]
    for s in [three_point] + corpus[:6]:
        for text in texts:
            phi = parse_formula(text, s.signature)
            fv = formula_free_vars(phi)
            n = (max(fv) + 1) if fv else 1
            canon = canonical_modulus(phi, s.signature, n)
            for ta in s.tuples(n):
                for tb in s.tuples(n):
                    gap = abs(eval_formula(phi, s, ta) - eval_formula(phi, s, tb))
                    dists = tuple(s.d(a, b) for a, b in zip(ta, tb))
                    assert gap <= canon(dists)


def test_subset_density(data_dir):
    line = load_structure(data_dir / "line9.ms")
    assert subset_density(line, ("p0", "p4", "p8")) == F(1, 4)
    assert subset_density(line, line.points) == 0


def test_dense_agreement_full_subset(three_point):
    phi = parse_formula("sup v1 . d(v0, v1)", three_point.signature)
    a, b = eval_dense_agreement(phi, three_point, three_point.points, ("x",), F(1))
    assert a == b == F(2, 5)


def test_dense_agreement_quantifier_free(data_dir):
    line = load_structure(data_dir / "line9.ms")
    phi = parse_formula("d(v0, v1)", line.signature)
    a, b = eval_dense_agreement(phi, line, ("p0", "p8"), ("p0", "p8"), F(1, 2))
    assert a == b


def test_dense_agreement_sup_within_canonical_bound(data_dir):
    line = load_structure(data_dir / "line9.ms")
    # max over y of min(d(x,y), 1 - d(x,y)): the 1/2-dense subset {p0, p8}
    # misses the middle witness entirely
    phi = parse_formula(
        "sup v1 . latmin(d(v0, v1), pwl((0,1),(1,0); d(v0, v1)))", line.signature
    )
    body = parse_formula(
        "latmin(d(v0, v1), pwl((0,1),(1,0); d(v0, v1)))", line.signature
    )
    canon = canonical_modulus(body, line.signature, 2)
    sub, full = eval_dense_agreement(phi, line, ("p0", "p8"), ("p0",), F(1, 2))
    assert full == F(1, 2) and sub == F(0)
    assert abs(sub - full) <= canon((F(0), F(1, 2)))
    # a 1/4-dense subset of the nine-point segment stays within the
    # canonical bound at resolution 1/4
    quarter = ("p0", "p2", "p4", "p6", "p8")
    sub4, full4 = eval_dense_agreement(phi, line, quarter, ("p0",), F(1, 4))
    assert abs(sub4 - full4) <= canon((F(0), F(1, 4)))


def test_dense_agreement_validates_inputs(three_point):
    phi = parse_formula("d(v0, v0)", three_point.signature)
    with pytest.raises(ValueError):
        eval_dense_agreement(phi, three_point, ("x", "nope"), ("x",), F(1))
    with pytest.raises(ValueError):
        eval_dense_agreement(phi, three_point, ("x",), ("y",), F(1))
    with pytest.raises(ValueError):
        # {x} is only 3/5-dense, resolution claim 1/5 fails
        eval_dense_agreement(phi, three_point, ("x",), ("x",), F(1, 5))


def test_evaluator_cache_transparent(three_point):
    sig = three_point.signature
    phi = parse_formula("sup v1 . sup v2 . latmin(d(v0, v1), d(v1, v2))", sig)
    ev = Evaluator(three_point)
    first = ev.formula(phi, ("x",))
    again = ev.formula(phi, ("x",))
    fresh = Evaluator(three_point).formula(phi, ("x",))
    assert first == again == fresh
