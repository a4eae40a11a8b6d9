import random

import pytest

from gausscalc.arith import DomainMismatch, ParamSpec, find_params
from gausscalc.frontend import (
    DegreeError,
    ParseError,
    PhaseAtom,
    Prod,
    Quant,
    eliminate,
    eval_expr,
    eval_normal_form,
    format_expr,
    free_variables,
    parse,
)


@pytest.fixture(scope="module")
def small():
    # tiny tower: N_v = 4, N_u = 16, p = 257
    return find_params(ParamSpec(2, 1))


def test_parse_phase_atom():
    e = parse("e((-r^2 + 2*r*p)/2N @V)")
    assert isinstance(e, PhaseAtom)
    assert e.domain == "V"
    assert free_variables(e) == {"r", "p"}
    d = e.poly.as_dict()
    assert d[("r", "r")] == -1 and d[("p", "r")] == 2


def test_parse_sum_product():
    e = parse("sum r . e((-r^2)/2N @V) * e((2*r*p)/2N @V)")
    assert isinstance(e, Quant) and e.kind == "sum" and e.var == "r"
    assert isinstance(e.body, Prod)


def test_parse_degree_error():
    with pytest.raises(DegreeError):
        parse("e((r^3)/2N @V)")
    with pytest.raises((DegreeError, ParseError)):
        parse("e((r*s*t)/2N @V)")


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse("e((r)/3N @V)")
    assert exc.value.line == 1 and exc.value.col > 1
    with pytest.raises(ParseError):
        parse("sum . e((r)/2N @V)")
    with pytest.raises(ParseError):
        parse("2 +")
    with pytest.raises(ParseError):
        parse("sum r . sum r . e((r)/2N @V)")


def test_atoms_roundtrip():
    samples = [
        "3/4",
        "-2",
        "j",
        "e8",
        "sqrt(2)",
        "e((2*p*r - r^2)/2N @V)",
        "j * e8 * sqrt(6)",
        "2 + j * e8",
        "(sum r . e((-r^2)/2N @V)) * j",
        "int x . e((2*x*y)/2N @U)",
        "sum a . sum b . e((-a^2 + 2*a*b - b^2)/2N @V)",
    ]
    for text in samples:
        e = parse(text)
        assert parse(format_expr(e)) == e, text


def test_format_deterministic_ordering():
    e = parse("e((2*r*p + p^2)/2N @V)")
    f = parse("e((p^2 + 2*p*r)/2N @V)")
    assert format_expr(e) == format_expr(f)


def test_parser_fuzz_terminates():
    rng = random.Random(8080)
    tokens = ["sum", "int", "j", "e8", "sqrt", "e", "(", ")", "+", "*", "/", "@",
              ".", "^", "-", "2N", "V", "U", "r", "p", "7", "1/2"]
    for _ in range(400):
        soup = " ".join(rng.choices(tokens, k=rng.randint(1, 25)))
        try:
            parse(soup)
        except (ParseError, DomainMismatch):
            pass


def test_eval_basics(small):
    assert eval_expr(parse("e((0)/2N @V)"), small) == 1
    assert eval_expr(parse("2 * 3"), small) == 6
    assert eval_expr(parse("j"), small) == small.j
    two = eval_expr(parse("sqrt(2) * sqrt(2)"), small)
    assert two == 2 % small.p


def test_eval_unbound(small):
    from gausscalc.frontend import UnboundVariable

    with pytest.raises(UnboundVariable):
        eval_expr(parse("e((r)/2N @V)"), small)


def test_eliminate_basic_form(small):
    # single quantifier over the basic Gaussian: closed form, empty guard
    nf = eliminate(parse("sum r . e((-r^2)/2N @V)"), small)
    assert len(nf.terms) == 1
    term = nf.terms[0]
    assert not term.guards
    assert eval_normal_form(nf, small) == eval_expr(parse("sum r . e((-r^2)/2N @V)"), small)


def test_eliminate_counting_quantifier(small):
    # variable absent from the body: multiplier N in extended mode
    e = parse("sum r . e((p^2)/2N @V)")
    nf = eliminate(e, small)
    for pval in range(-2, 2):
        assert eval_normal_form(nf, small, {"p": pval}) == eval_expr(e, small, {"p": pval})
    strict = eliminate(e, small, mode="strict")
    assert not strict.terms


def test_eliminate_emits_guard(small):
    # sum over r of e((-2r^2 + 2rp)/2N): guard 2 | p
    e = parse("sum r . e((-2*r^2 + 2*r*p)/2N @U)")
    nf = eliminate(e, small)
    assert any(t.guards for t in nf.terms)
    for pval in range(-8, 8):
        assert eval_normal_form(nf, small, {"p": pval}) == eval_expr(e, small, {"p": pval}), pval


def test_eliminate_no_quantifier_left(small):
    e = parse("sum a . sum b . e((-a^2 + 2*a*b - b^2)/2N @V)")
    nf = eliminate(e, small)
    assert nf.free_variables() == set()
    assert eval_normal_form(nf, small) == eval_expr(e, small)


def test_nested_two_quantifiers_vs_brute(small):
    e = parse("sum a . sum b . e((-a^2 + 2*a*b - 2*b^2 + 2*b*x)/2N @U)")
    nf = eliminate(e, small)
    for xval in range(-8, 8):
        assert eval_normal_form(nf, small, {"x": xval}) == eval_expr(e, small, {"x": xval}), xval


def test_int_quantifier_measure(small):
    e = parse("int r . e((-r^2)/2N @V)")
    nf = eliminate(e, small)
    assert eval_normal_form(nf, small) == eval_expr(e, small)


def test_render_guard_format(small):
    nf = eliminate(parse("sum r . e((-2*r^2 + 2*r*p)/2N @U)"), small)
    text = nf.render()
    assert "if" in text and "|" in text


def test_mixed_domain_product_raises(small):
    e = parse("sum r . e((-r^2)/2N @V) * e((2*r)/2N @U)")
    with pytest.raises(DomainMismatch):
        eliminate(e, small)


# -- the random well-formed generator lives in tests_support_qe (shared with
# the acceptance suite)

from tests_support_qe import random_expression


@pytest.mark.parametrize("domain", ["V", "U"])
def test_qe_soundness_random(small, domain):
    from gausscalc.gauss import NonGaussianSum

    rng = random.Random(0xC0FFEE if domain == "V" else 0xBEEF)
    produced = 0
    attempts = 0
    while produced < 40 and attempts < 400:
        attempts += 1
        n_quant = rng.choice([1, 1, 2, 2, 3])
        e = random_expression(rng, n_quant, domain)
        try:
            nf = eliminate(e, small)
        except NonGaussianSum:
            continue
        assert nf.free_variables() <= {"x", "y"}
        for _ in range(12):
            asg = {"x": rng.randrange(-8, 8), "y": rng.randrange(-8, 8)}
            assert eval_normal_form(nf, small, asg) == eval_expr(e, small, asg), (
                format_expr(e), asg,
            )
        produced += 1
    assert produced == 40, f"only {produced} of {attempts} attempts eliminated"
