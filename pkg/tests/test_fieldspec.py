import math

import numpy as np
import pytest

from rcdirac import fieldspec as fs
from rcdirac.fieldspec import (
    BinOp,
    Call,
    Const,
    Coord,
    ExprDomainError,
    ExprNameError,
    ExprSyntaxError,
    Neg,
    Pow,
    Sampling,
    ScenarioError,
    eval_expr,
    load_scenario,
    parse_expr,
    print_expr,
)
from rcdirac.jets import ChartPoint

MINKOWSKI_TEXT = """
# flat frame
[tetrad]
e0_0 = 1
e1_1 = 1
e2_2 = 1
e3_3 = 1
"""


def test_parse_example_ast():
    e = parse_expr("x0^2 + sin(x1)")
    assert e == BinOp("+", Pow(Coord(0), 2), Call("sin", Coord(1)))


def test_parse_and_eval_example():
    e = parse_expr("2*(x2 - x3)")
    v = eval_expr(e, ChartPoint((0.0, 0.0, 5.0, 1.0)))
    assert v.value == 8.0


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr("x0 +")
    assert exc.value.offset == 4
    assert "expected" in str(exc.value)


def test_unknown_identifier():
    with pytest.raises(ExprNameError) as exc:
        parse_expr("x0 + y1")
    assert exc.value.name == "y1"


def test_precedence():
    # ^ binds tighter than unary minus, which binds tighter than *
    assert parse_expr("-x0^2") == Neg(Pow(Coord(0), 2))
    assert parse_expr("-x0*x1") == BinOp("*", Neg(Coord(0)), Coord(1))
    # left associativity
    assert parse_expr("x0 - x1 - x2") == BinOp(
        "-", BinOp("-", Coord(0), Coord(1)), Coord(2)
    )
    assert parse_expr("x0^2^3") == Pow(Pow(Coord(0), 2), 3)
    assert parse_expr("x0^-2") == Pow(Coord(0), -2)


def test_whitespace_insensitive():
    assert parse_expr("x0+x1 * x2") == parse_expr("  x0 + x1*x2 ")


def _random_expr(rng, depth):
    if depth == 0 or rng.uniform() < 0.3:
        if rng.uniform() < 0.5:
            return Coord(int(rng.integers(0, 4)))
        return Const(float(np.round(rng.uniform(0, 4), 3)))
    pick = rng.integers(0, 7)
    if pick <= 3:
        op = "+-*/"[pick]
        return BinOp(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if pick == 4:
        return Neg(_random_expr(rng, depth - 1))
    if pick == 5:
        return Pow(_random_expr(rng, depth - 1), int(rng.integers(0, 4)))
    fn = ("sin", "cos", "exp", "sqrt")[rng.integers(0, 4)]
    return Call(fn, _random_expr(rng, depth - 1))


def test_print_parse_round_trip():
    rng = np.random.default_rng(42)
    for _ in range(500):
        e = _random_expr(rng, 4)
        assert parse_expr(print_expr(e)) == e


def _float_eval(e, x):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Coord):
        return x[e.index]
    if isinstance(e, Neg):
        return -_float_eval(e.arg, x)
    if isinstance(e, Pow):
        return _float_eval(e.base, x) ** e.exponent
    if isinstance(e, Call):
        return getattr(math, e.fn)(_float_eval(e.arg, x))
    a, b = _float_eval(e.left, x), _float_eval(e.right, x)
    return {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[e.op]


def test_eval_matches_finite_differences():
    rng = np.random.default_rng(7)
    # division-free random expressions on a safe box
    srcs = [
        "x0^2*x1 + sin(x2)*cos(x3)",
        "exp(0.3*x0 - 0.2*x3) + x1*x2^2",
        "sqrt(2 + x0*x1) - x2",
        "(x0 + x1)*(x2 - x3) + cos(x0*x2)",
        "1/(2 + x0^2) + x3",
    ]
    h = 1e-4
    for src in srcs:
        e = parse_expr(src)
        for _ in range(20):
            x = rng.uniform(0.1, 0.9, 4)
            j = eval_expr(e, ChartPoint(tuple(x)))
            assert j.value == pytest.approx(_float_eval(e, x), rel=1e-12)
            for mu in range(4):
                up = x.copy(); up[mu] += h
                dn = x.copy(); dn[mu] -= h
                fd = (_float_eval(e, up) - _float_eval(e, dn)) / (2 * h)
                assert abs(j.grad[mu] - fd) <= 1e-6 * max(1.0, abs(fd))


def test_eval_examples():
    j = eval_expr(parse_expr("x0*x1"), ChartPoint((2.0, 3.0, 0.0, 0.0)))
    assert j.value == 6.0
    assert j.grad.tolist() == [3.0, 2.0, 0.0, 0.0]
    assert j.hess_at(0, 1) == 1.0
    j = eval_expr(parse_expr("sin(x1)"), ChartPoint((0.0, 0.0, 0.0, 0.0)))
    assert j.grad.tolist() == [0.0, 1.0, 0.0, 0.0]
    with pytest.raises(ExprDomainError):
        eval_expr(parse_expr("1/(x0-x0)"), ChartPoint((1.0, 0.0, 0.0, 0.0)))


def test_has_division():
    assert fs.has_division(parse_expr("x0/x1"))
    assert fs.has_division(parse_expr("x0^-1"))
    assert not fs.has_division(parse_expr("x0*x1 + sin(x2)"))


def test_minkowski_scenario_defaults():
    sc = load_scenario(MINKOWSKI_TEXT)
    assert sc.torsion == {}
    assert sc.torsion_expr(2, 0, 1) == Const(0.0)
    assert sc.checks == ()
    assert sc.sampling == Sampling()
    assert sc.chart_box == tuple(((0.0, 1.0),) * 4)
    assert sc.tetrad[0][0] == Const(1.0)
    assert sc.tetrad[0][1] == Const(0.0)


def test_torsion_antisymmetric_completion():
    sc = load_scenario(MINKOWSKI_TEXT + "[torsion]\nT2_01 = 0.3\n")
    p = ChartPoint((0.0, 0.0, 0.0, 0.0))
    assert eval_expr(sc.torsion_expr(2, 0, 1), p).value == 0.3
    assert eval_expr(sc.torsion_expr(2, 1, 0), p).value == -0.3
    assert eval_expr(sc.torsion_expr(2, 1, 1), p).value == 0.0


def test_checks_section():
    sc = load_scenario(
        MINKOWSKI_TEXT + "[checks]\nlichnerowicz = on\nbianchi = off\n",
        valid_checks={"lichnerowicz", "bianchi"},
    )
    assert sc.checks == ("lichnerowicz",)


def test_unknown_check_name_lists_valid():
    with pytest.raises(ScenarioError) as exc:
        load_scenario(
            MINKOWSKI_TEXT + "[checks]\nbogus = on\n",
            valid_checks={"lichnerowicz"},
        )
    assert "lichnerowicz" in str(exc.value)


def test_duplicate_key_rejected():
    with pytest.raises(ScenarioError) as exc:
        load_scenario(MINKOWSKI_TEXT + "[sampling]\nseed = 1\nseed = 2\n")
    assert "duplicate" in str(exc.value)


def test_torsion_index_order_rejected():
    with pytest.raises(ScenarioError):
        load_scenario(MINKOWSKI_TEXT + "[torsion]\nT2_10 = 0.3\n")
    with pytest.raises(ScenarioError):
        load_scenario(MINKOWSKI_TEXT + "[torsion]\nT2_11 = 0.3\n")


def test_missing_tetrad_row():
    with pytest.raises(ScenarioError) as exc:
        load_scenario("[tetrad]\ne0_0 = 1\ne1_1 = 1\ne2_2 = 1\n")
    assert "row" in str(exc.value)


def test_unknown_section_and_keys():
    with pytest.raises(ScenarioError):
        load_scenario("[garbage]\nx = 1\n")
    with pytest.raises(ScenarioError):
        load_scenario(MINKOWSKI_TEXT + "[sampling]\nbogus = 1\n")
    with pytest.raises(ScenarioError):
        load_scenario("e0_0 = 1\n")  # entry before a section header


def test_fields_section():
    sc = load_scenario(
        MINKOWSKI_TEXT
        + '[fields]\nf.scalar = "x0*x1"\nA.vector.1 = "sin(x0)"\nA.vector.4 = 2\n'
    )
    assert "scalar" in sc.scalar_fields
    mv = sc.multivector_fields["vector"]
    assert mv[1] == Call("sin", Coord(0))
    assert mv[4] == Const(2.0)
    assert mv[0] == Const(0.0)


def test_scenario_determinism():
    text = MINKOWSKI_TEXT + "[sampling]\nseed = 5\n"
    assert load_scenario(text) == load_scenario(text)
    assert load_scenario(text).digest == load_scenario(text).digest


def test_crlf_and_comments():
    text = MINKOWSKI_TEXT.replace("\n", "\r\n") + "# trailing comment\r\n"
    sc = load_scenario(text)
    assert sc.tetrad[3][3] == Const(1.0)


def test_quoted_expression_with_hash():
    sc = load_scenario(MINKOWSKI_TEXT + '[fields]\nf.g = "x0 + 2"  # comment\n')
    assert sc.scalar_fields["g"] == BinOp("+", Coord(0), Const(2.0))
