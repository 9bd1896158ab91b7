"""Command-line front end.

Deterministic output: identical inputs and flags produce byte-identical
output (exact arithmetic, fixed enumeration order, sorted JSON keys),
independent of the parallelism degree.

Exit codes: 0 success, 1 domain rejection (validation or side-condition
failure), 2 usage error.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import click

from .evaluation import Evaluator
from .family import enumerate_family
from .moduli import largest_modulus_below, weak_modulus
from .parser import ParseError, parse_formula, parse_formula_file, print_formula
from .rationals import ONE, RatGrid, format_rational, parse_rational
from .scott import BFEngine, EngineConfig
from .structures import (
    PreStructure,
    StructureFormatError,
    StructureInvalid,
    load_structure,
    validate as validate_structure,
    parse_structure,
)
from .syntax import EMPTY_SIGNATURE, Signature


def _parallel_degree(opt: int | None) -> int:
    if opt is not None:
        return max(1, opt)
    env = os.environ.get("MSCOTT_PARALLEL")
    return max(1, int(env)) if env and env.isdigit() else 1


def _pmap(fn, items, degree: int) -> list:
    """Order-preserving map; the degree changes scheduling, never results."""
    items = list(items)
    if degree <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=degree) as pool:
        return list(pool.map(fn, items))


def _emit(payload: dict, as_json: bool, text_lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            click.echo(line)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load(path: str) -> PreStructure:
    try:
        return load_structure(path)
    except FileNotFoundError:
        _fail(f"no such file: {path}")
    except StructureFormatError as exc:
        _fail(f"{path}: {exc}")
    except StructureInvalid as exc:
        _fail(f"{path}: invalid structure: {exc}")
    raise AssertionError("unreachable")


def _tuple_arg(text: str, s: PreStructure) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    for p in parts:
        if p not in s.points:
            _fail(f"point {p!r} not in the structure (points: {' '.join(s.points)})")
    return parts


def _rat_arg(text: str, what: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        _fail(f"bad {what}: {exc}")
    raise AssertionError("unreachable")


def _decimal(q: Fraction) -> str:
    return f"{float(q):.6g}"


def _config(family: int, max_arity: int, stage_cap: int, table_cap: int | None) -> EngineConfig:
    return EngineConfig(
        family_size=family,
        max_arity=max_arity,
        stage_cap=stage_cap,
        table_cap=table_cap,
    )


@click.group()
def main() -> None:
    """Exact continuous-logic toolkit for finite metric structures."""


@main.command("validate")
@click.argument("structure", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
def cmd_validate(structure: str, as_json: bool) -> None:
    """Check every structure axiom exhaustively; exit 1 with witnesses on failure."""
    try:
        text = Path(structure).read_text(encoding="utf-8")
        parsed = parse_structure(text, name=Path(structure).stem)
    except FileNotFoundError:
        _fail(f"no such file: {structure}")
        return
    except StructureFormatError as exc:
        _fail(f"{structure}: {exc}")
        return
    violations = validate_structure(parsed)
    payload = {
        "command": "validate",
        "structure": parsed.name,
        "points": len(parsed.points),
        "violations": [
            {"kind": v.kind, "message": v.message, "witness": list(v.witness)}
            for v in violations
        ],
    }
    if violations:
        _emit(payload, as_json, [f"invalid: {v}" for v in violations])
        sys.exit(1)
    _emit(payload, as_json, [f"valid: {parsed.name} ({len(parsed.points)} points)"])


@main.command("eval")
@click.argument("structure", type=click.Path())
@click.argument("formula")
@click.argument("point_tuple")
@click.option("--json", "as_json", is_flag=True)
@click.option("--decimal", is_flag=True, help="append an approximate decimal rendering")
def cmd_eval(structure: str, formula: str, point_tuple: str, as_json: bool, decimal: bool) -> None:
    """Evaluate FORMULA (inline or @file) at POINT_TUPLE, e.g. "x,y"."""
    s = _load(structure)
    from_file = formula.startswith("@")
    if from_file:
        try:
            formula = Path(formula[1:]).read_text(encoding="utf-8")
        except FileNotFoundError:
            _fail(f"no such formula file: {formula[1:]}")
    try:
        phi = (parse_formula_file if from_file else parse_formula)(formula, s.signature)
    except ParseError as exc:
        _fail(f"formula: {exc}")
        return
    env = _tuple_arg(point_tuple, s)
    try:
        value = Evaluator(s).formula(phi, env)
    except ValueError as exc:
        _fail(str(exc))
        return
    text = f"{format_rational(value)}"
    if decimal:
        text += f"  (~ {_decimal(value)})"
    payload = {
        "command": "eval",
        "structure": s.name,
        "formula": print_formula(phi),
        "tuple": list(env),
        "value": format_rational(value),
    }
    _emit(payload, as_json, [text])


@main.command("dense-family")
@click.option("--arity", required=True, type=int)
@click.option("--count", required=True, type=int)
@click.option("--omega", "omega_name", default="sum", show_default=True)
@click.option("--signature", "sig_file", type=click.Path(), default=None,
              help="take the signature from this structure file (default: empty)")
@click.option("--json", "as_json", is_flag=True)
@click.option("--parallel", type=int, default=None, help="parallelism degree")
def cmd_dense_family(arity: int, count: int, omega_name: str, sig_file: str | None,
                     as_json: bool, parallel: int | None) -> None:
    """Print the first COUNT dense-family members at the given arity."""
    try:
        omega = weak_modulus(omega_name)
    except ValueError as exc:
        _fail(str(exc))
        return
    sig: Signature = EMPTY_SIGNATURE
    if sig_file is not None:
        sig = _load(sig_file).signature
    if arity < 1 or count < 0:
        _fail("need --arity >= 1 and --count >= 0")
    members = enumerate_family(sig, omega, arity, count)
    degree = _parallel_degree(parallel)
    lines = _pmap(print_formula, members, degree)
    payload = {
        "command": "dense-family",
        "arity": arity,
        "count": len(lines),
        "omega": omega.name,
        "formulas": lines,
    }
    _emit(payload, as_json, lines)


_FLOOR_TARGETS = ("identity", "square", "sqrt", "cap2")


@main.command("modulus-floor")
@click.option("--fn", "target", type=click.Choice(_FLOOR_TARGETS), required=True)
@click.option("--grid", "step_text", default="1/8", show_default=True, help="grid step")
@click.option("--bound", "bound_text", default="1", show_default=True)
@click.option("--kmax", default=8, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def cmd_modulus_floor(target: str, step_text: str, bound_text: str, kmax: int, as_json: bool) -> None:
    """Largest-modulus-below envelope of a sampled 1-d target function.

    'sqrt' samples x = (k*step)^2 with exact values k*step; the other
    targets sample directly on the grid."""
    step = _rat_arg(step_text, "--grid")
    bound = _rat_arg(bound_text, "--bound")
    grid = RatGrid(1, step, bound)
    try:
        if target == "sqrt":
            samples = {(v * v,): v for v in grid.axis()}
            env = largest_modulus_below(samples, kmax)
        else:
            fns = {
                "identity": lambda p: p[0],
                "square": lambda p: p[0] * p[0],
                "cap2": lambda p: min(ONE, 2 * p[0]),
            }
            env = largest_modulus_below(fns[target], kmax, grid=grid)
    except ValueError as exc:
        _fail(str(exc))
        return
    rows = [(format_rational(p[0]), format_rational(v)) for p, v in env.table()]
    payload = {
        "command": "modulus-floor",
        "target": target,
        "grid_step": format_rational(step),
        "bound": format_rational(bound),
        "k_max": kmax,
        "table": [{"x": x, "value": v} for x, v in rows],
    }
    _emit(payload, as_json, [f"{x} {v}" for x, v in rows])


@main.command("r0")
@click.argument("structure", type=click.Path())
@click.argument("tuple_a")
@click.argument("tuple_b")
@click.option("--family", default=200, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.option("--parallel", type=int, default=None)
def cmd_r0(structure: str, tuple_a: str, tuple_b: str, family: int,
           as_json: bool, parallel: int | None) -> None:
    """Stage-0 back-and-forth distance between two same-length tuples."""
    s = _load(structure)
    a, b = _tuple_arg(tuple_a, s), _tuple_arg(tuple_b, s)
    if len(a) != len(b):
        _fail("tuples must have the same length (unequal lengths are a "
              "threshold-operator clause, not an r0 input)")
    engine = BFEngine(s, config=EngineConfig(family_size=family))
    degree = _parallel_degree(parallel)
    value, meta = engine.r0_pair(a, b, mapper=lambda fn, xs: _pmap(fn, xs, degree))
    payload = {
        "command": "r0",
        "structure": s.name,
        "tuple_a": list(a),
        "tuple_b": list(b),
        "value": format_rational(value),
        "meta": meta | {"params": engine.config.meta(engine.cap)},
    }
    lines = [f"r0 = {format_rational(value)}  [family {meta['family_size']}]"]
    if "metric_oracle" in meta:
        lines.append(
            f"metric closed form = {meta['metric_oracle']}"
            + ("  (exact at this arity)" if meta["metric_oracle_exact"] else "  (lower bound)")
        )
    _emit(payload, as_json, lines)


@main.command("ralpha")
@click.argument("structure", type=click.Path())
@click.option("--stage", required=True, type=int)
@click.option("--arity", required=True, type=int)
@click.option("--family", default=200, show_default=True, type=int)
@click.option("--table-cap", default=None, type=int,
              help="arity+stage window (default: exactly arity+stage)")
@click.option("--json", "as_json", is_flag=True)
def cmd_ralpha(structure: str, stage: int, arity: int, family: int,
               table_cap: int | None, as_json: bool) -> None:
    """Print the full stage table at one arity (all tuple pairs)."""
    s = _load(structure)
    if stage < 0 or arity < 1:
        _fail("need --stage >= 0 and --arity >= 1")
    cap = table_cap if table_cap is not None else arity + stage
    if cap < arity + stage:
        _fail(f"--table-cap must be at least arity+stage = {arity + stage}")
    engine = BFEngine(
        s,
        config=EngineConfig(family_size=family, max_arity=arity, stage_cap=max(stage, 1), table_cap=cap),
    )
    rows = []
    for a, b, v in engine.pairs(arity, stage):
        rows.append({"a": list(a), "b": list(b), "value": format_rational(v)})
    payload = {
        "command": "ralpha",
        "structure": s.name,
        "stage": stage,
        "arity": arity,
        "meta": engine.config.meta(engine.cap),
        "pairs": rows,
    }
    lines = [
        f"({','.join(r['a'])}) ({','.join(r['b'])}) {r['value']}" for r in rows
    ]
    _emit(payload, as_json, lines)


@main.command("scott-rank")
@click.argument("structure", type=click.Path())
@click.option("--max-arity", default=3, show_default=True, type=int)
@click.option("--family", default=200, show_default=True, type=int)
@click.option("--stage-cap", default=8, show_default=True, type=int)
@click.option("--table-cap", default=None, type=int)
@click.option("--json", "as_json", is_flag=True)
def cmd_scott_rank(structure: str, max_arity: int, family: int, stage_cap: int,
                   table_cap: int | None, as_json: bool) -> None:
    """Least stage at which the computed stage tables stabilize."""
    s = _load(structure)
    engine = BFEngine(s, config=_config(family, max_arity, stage_cap, table_cap))
    report = engine.scott_rank()
    payload = {
        "command": "scott-rank",
        "structure": s.name,
        "rank": report.rank,
        "definitive": report.definitive,
        "checkable_stages": report.checkable_stages,
        "meta": report.meta,
    }
    if report.rank is not None:
        lines = [
            f"rank {report.rank} (stable through the computed window; "
            f"arity cap {engine.config.max_arity}, table cap {engine.cap})"
        ]
    else:
        lines = [
            f"rank not stabilized within the window (checked stages 0..{report.checkable_stages}; "
            f"raise --table-cap for a deeper run)"
        ]
    _emit(payload, as_json, lines)


@main.command("fixpoint")
@click.argument("structure", type=click.Path())
@click.option("--q", "q_text", required=True, help="positive rational threshold, e.g. 1/10")
@click.option("--stage-cap", default=8, show_default=True, type=int)
@click.option("--max-arity", default=3, show_default=True, type=int)
@click.option("--family", default=200, show_default=True, type=int)
@click.option("--table-cap", default=None, type=int)
@click.option("--limit", default=50, show_default=True, type=int,
              help="maximum number of member pairs to list")
@click.option("--json", "as_json", is_flag=True)
def cmd_fixpoint(structure: str, q_text: str, stage_cap: int, max_arity: int,
                 family: int, table_cap: int | None, limit: int, as_json: bool) -> None:
    """Least fixed point of the threshold operator at q, with entry stages."""
    s = _load(structure)
    q = _rat_arg(q_text, "--q")
    if q <= 0:
        _fail("--q must be positive")
    engine = BFEngine(s, config=_config(family, max_arity, stage_cap, table_cap))
    trace = engine.gamma_fixpoint(q)
    entries = []
    for n in range(1, engine.cap + 1):
        tuples = engine.tuples(n)
        arr = trace.entry[n]
        for i, a in enumerate(tuples):
            for j, b in enumerate(tuples):
                k = int(arr[i, j])
                if k >= 0:
                    entries.append((n, a, b, k))
    shown = entries[:limit]
    payload = {
        "command": "fixpoint",
        "structure": s.name,
        "q": format_rational(q),
        "closed": trace.closed,
        "closure_stage": trace.closure_stage,
        "stage_sizes": [
            {str(n): c for n, c in sizes.items()} for sizes in trace.stage_sizes
        ],
        "members_listed": len(shown),
        "members_total": len(entries),
        "members": [
            {"arity": n, "a": list(a), "b": list(b), "entry_stage": k}
            for n, a, b, k in shown
        ],
        "note": "length-mismatched pairs are members from stage 0 and are not listed",
        "meta": trace.meta,
    }
    lines = [
        f"threshold q = {format_rational(q)}; "
        + (f"closed at stage {trace.closure_stage}" if trace.closed else "not closed within the cap")
    ]
    for n, a, b, k in shown:
        lines.append(f"({','.join(a)}) ({','.join(b)}) enters at stage {k}")
    if len(entries) > len(shown):
        lines.append(f"(+{len(entries) - len(shown)} more members)")
    _emit(payload, as_json, lines)


if __name__ == "__main__":
    main()
