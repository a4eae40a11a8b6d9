"""Expression language with a quantifier-eliminating rewriter.

Grammar (whitespace insensitive):

    expr  := product ('+' product)*
    product := atom ('*' atom)*
    atom  := rational | 'j' | 'e8' | 'sqrt(' rational ')'
           | 'e(' poly '/2N' '@' ('U'|'V') ')'
           | ('sum'|'int') ident '.' expr
           | '(' expr ')'
    poly  := ['-'] pterm (('+'|'-') pterm)*
    pterm := integer ['*' factors] | factors
    factors := ident ['^' power] ('*' ident ['^' power])*

Phase polynomials have integer coefficients and total degree <= 2; a
quantifier body extends maximally to the right.  'sum' is the domain
summation quantifier; 'int' is the same summation weighted by the lattice
measure 1/sqrt(N) (the x = r/sqrt(N) scaling).

Elimination rewrites each quantifier innermost-first by the Gauss
summation formula: a variable y entering as (A y^2 + 2 L(frees) y +
R(frees))/2N contributes the closed-form coefficient and the residual
phase (R - L^2/A)/2N, guarded by the congruence A | L(frees); guards are
first-class data in the normal form.  Quantified variables must carry
even linear coefficients (the 2L structure of the summation formula);
odd ones leave the Gaussian fragment and raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import ArithError, DomainMismatch, Params
from .coeffring import GaussCoeff, to_complex, to_fp
from .gauss import NonGaussianSum, sqrt_with_scale


class ParseError(ArithError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DegreeError(ParseError):
    pass


class UnboundVariable(ArithError):
    pass


# -- polynomials ----------------------------------------------------------------

Monomial = tuple[str, ...]


@dataclass(frozen=True)
class Poly:
    """Integer-coefficient polynomial of total degree <= 2; monomial keys
    are sorted variable tuples, () the constant."""

    coeffs: tuple[tuple[Monomial, int], ...]

    @classmethod
    def from_dict(cls, d: dict[Monomial, int]) -> "Poly":
        return cls(tuple(sorted((m, c) for m, c in d.items() if c)))

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls.from_dict({(): c})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls.from_dict({(name,): 1})

    def as_dict(self) -> dict[Monomial, int]:
        return dict(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        d = self.as_dict()
        for m, c in other.coeffs:
            d[m] = d.get(m, 0) + c
        return Poly.from_dict(d)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, int):
            return Poly.from_dict({m: c * other for m, c in self.coeffs})
        d: dict[Monomial, int] = {}
        for m1, c1 in self.coeffs:
            for m2, c2 in other.coeffs:
                m = tuple(sorted(m1 + m2))
                if len(m) > 2:
                    raise DegreeError("phase polynomial exceeds degree 2", 0, 0)
                d[m] = d.get(m, 0) + c1 * c2
        return Poly.from_dict(d)

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return self * -1

    def variables(self) -> set[str]:
        return {v for m, _ in self.coeffs for v in m}

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant(self) -> int:
        return self.as_dict().get((), 0)

    def eval(self, assignment: dict[str, int]) -> int:
        total = 0
        for m, c in self.coeffs:
            term = c
            for v in m:
                if v not in assignment:
                    raise UnboundVariable(f"unbound variable {v!r}")
                term *= assignment[v]
            total += term
        return total

    def split_var(self, y: str) -> tuple[int, "Poly", "Poly"]:
        """poly = A y^2 + ell(frees) y + R(frees); returns (A, ell, R)."""
        A = 0
        ell: dict[Monomial, int] = {}
        rest: dict[Monomial, int] = {}
        for m, c in self.coeffs:
            count = m.count(y)
            if count == 2:
                A += c
            elif count == 1:
                other = tuple(v for v in m if v != y)
                ell[other] = ell.get(other, 0) + c
            else:
                rest[m] = rest.get(m, 0) + c
        return A, Poly.from_dict(ell), Poly.from_dict(rest)

    def substitute(self, y: str, replacement: "Poly") -> "Poly":
        """Substitute y := replacement (replacement at most linear)."""
        A, ell, rest = self.split_var(y)
        out = Poly.from_dict(rest.as_dict())
        if not ell.is_zero():
            out = out + ell * replacement
        if A:
            out = out + replacement * replacement * A
        return out

    def content_divisible(self, k: int) -> bool:
        return all(c % k == 0 for _, c in self.coeffs)

    def exact_div(self, k: int) -> "Poly":
        return Poly.from_dict({m: c // k for m, c in self.coeffs})

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for m, c in self.coeffs:
            names: list[str] = []
            seen: dict[str, int] = {}
            for v in m:
                seen[v] = seen.get(v, 0) + 1
            for v in sorted(seen):
                names.append(v if seen[v] == 1 else f"{v}^{seen[v]}")
            if not names:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(names)
            else:
                body = "*".join([str(abs(c))] + names)
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


# -- AST --------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pos: tuple[int, int] | None = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class Rat(Expr):
    value: Fraction = Fraction(0)


@dataclass(frozen=True)
class JAtom(Expr):
    pass


@dataclass(frozen=True)
class E8Atom(Expr):
    pass


@dataclass(frozen=True)
class SqrtAtom(Expr):
    value: Fraction = Fraction(1)


@dataclass(frozen=True)
class PhaseAtom(Expr):
    poly: Poly = Poly.const(0)
    domain: str = "V"


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple = ()


@dataclass(frozen=True)
class Plus(Expr):
    terms: tuple = ()


@dataclass(frozen=True)
class Quant(Expr):
    kind: str = "sum"  # 'sum' or 'int'
    var: str = "r"
    body: Expr = Rat(Fraction(0))


_KEYWORDS = {"sum", "int", "j", "e8", "sqrt", "e", "N", "U", "V"}


# -- lexer ------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NUM IDENT SYM EOF
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(Token("NUM", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^@().":
            out.append(Token("SYM", ch, line, col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    out.append(Token("EOF", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # expr := product ('+' product)*
    def parse_expr(self) -> Expr:
        first = self.parse_product()
        terms = [first]
        while self.peek().kind == "SYM" and self.peek().text == "+":
            self.next()
            terms.append(self.parse_product())
        if len(terms) == 1:
            return first
        return Plus(tuple(terms), pos=(terms[0].pos or (0, 0)))

    def parse_product(self) -> Expr:
        first = self.parse_atom()
        factors = [first]
        while self.peek().kind == "SYM" and self.peek().text == "*":
            self.next()
            factors.append(self.parse_atom())
        if len(factors) == 1:
            return first
        return Prod(tuple(factors), pos=(factors[0].pos or (0, 0)))

    def parse_atom(self) -> Expr:
        tok = self.peek()
        at = (tok.line, tok.col)
        if tok.kind == "NUM" or (tok.kind == "SYM" and tok.text == "-"):
            return self.parse_rational()
        if tok.kind == "SYM" and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect("SYM", ")")
            return inner
        if tok.kind == "IDENT":
            if tok.text == "j":
                self.next()
                return JAtom(pos=at)
            if tok.text == "e8":
                self.next()
                return E8Atom(pos=at)
            if tok.text == "sqrt":
                self.next()
                self.expect("SYM", "(")
                value = self.parse_rational_value()
                self.expect("SYM", ")")
                if value <= 0:
                    raise ParseError("sqrt argument must be positive", *at)
                return SqrtAtom(value, pos=at)
            if tok.text == "e":
                self.next()
                self.expect("SYM", "(")
                wrapped = self.peek().kind == "SYM" and self.peek().text == "("
                if wrapped:
                    self.next()
                poly = self.parse_poly()
                if wrapped:
                    self.expect("SYM", ")")
                self.expect("SYM", "/")
                two = self.expect("NUM")
                if two.text != "2":
                    raise ParseError("phase denominator must be 2N", two.line, two.col)
                nn = self.expect("IDENT")
                if nn.text != "N":
                    raise ParseError("phase denominator must be 2N", nn.line, nn.col)
                self.expect("SYM", "@")
                dom = self.expect("IDENT")
                if dom.text not in ("U", "V"):
                    raise ParseError("domain must be U or V", dom.line, dom.col)
                self.expect("SYM", ")")
                return PhaseAtom(poly, dom.text, pos=at)
            if tok.text in ("sum", "int"):
                self.next()
                var = self.expect("IDENT")
                if var.text in _KEYWORDS:
                    raise ParseError(f"{var.text!r} is reserved", var.line, var.col)
                self.expect("SYM", ".")
                body = self.parse_expr()
                return Quant(tok.text, var.text, body, pos=at)
        self.fail(f"unexpected token {tok.text!r}")

    def parse_rational(self) -> Rat:
        tok = self.peek()
        at = (tok.line, tok.col)
        return Rat(self.parse_rational_value(), pos=at)

    def parse_rational_value(self) -> Fraction:
        sign = 1
        if self.peek().kind == "SYM" and self.peek().text == "-":
            self.next()
            sign = -1
        num = int(self.expect("NUM").text)
        if self.peek().kind == "SYM" and self.peek().text == "/":
            save = self.pos
            self.next()
            if self.peek().kind == "NUM":
                den = int(self.next().text)
                if den == 0:
                    self.fail("zero denominator")
                return Fraction(sign * num, den)
            self.pos = save
        return Fraction(sign * num)

    # poly := ['-'] pterm (('+'|'-') pterm)*
    def parse_poly(self) -> Poly:
        total = Poly.const(0)
        sign = 1
        if self.peek().kind == "SYM" and self.peek().text == "-":
            self.next()
            sign = -1
        total = total + self.parse_pterm() * sign
        while self.peek().kind == "SYM" and self.peek().text in "+-":
            op = self.next().text
            total = total + self.parse_pterm() * (1 if op == "+" else -1)
        return total

    def parse_pterm(self) -> Poly:
        tok = self.peek()
        coeff = 1
        parts: list[Poly] = []
        if tok.kind == "NUM":
            coeff = int(self.next().text)
            if not (self.peek().kind == "SYM" and self.peek().text == "*"):
                return Poly.const(coeff)
            self.next()
        while True:
            ident = self.expect("IDENT")
            if ident.text in _KEYWORDS:
                raise ParseError(
                    f"{ident.text!r} is reserved and cannot name a variable",
                    ident.line,
                    ident.col,
                )
            power = 1
            if self.peek().kind == "SYM" and self.peek().text == "^":
                self.next()
                power = int(self.expect("NUM").text)
                if power > 2:
                    raise DegreeError("power exceeds 2", ident.line, ident.col)
                if power < 1:
                    raise ParseError("power must be 1 or 2", ident.line, ident.col)
            parts.append(
                Poly.var(ident.text) if power == 1 else Poly.var(ident.text) * Poly.var(ident.text)
            )
            if self.peek().kind == "SYM" and self.peek().text == "*":
                save = self.pos
                self.next()
                if self.peek().kind == "IDENT" and self.peek().text not in _KEYWORDS:
                    continue
                self.pos = save
            break
        out = Poly.const(coeff)
        for part in parts:
            out = out * part
        return out


def parse(text: str) -> Expr:
    parser = _Parser(text)
    expr = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    _check_scoping(expr, set())
    return expr


def _check_scoping(e: Expr, bound: set[str]) -> set[str]:
    """Returns free variables; rejects rebinding a bound variable."""
    if isinstance(e, PhaseAtom):
        return e.poly.variables() - bound
    if isinstance(e, (Prod, Plus)):
        out: set[str] = set()
        for child in e.factors if isinstance(e, Prod) else e.terms:
            out |= _check_scoping(child, bound)
        return out
    if isinstance(e, Quant):
        if e.var in bound:
            raise ParseError(f"variable {e.var!r} bound twice", *(e.pos or (0, 0)))
        return _check_scoping(e.body, bound | {e.var}) - {e.var}
    return set()


def free_variables(e: Expr) -> set[str]:
    return _check_scoping(e, set())


# -- printer ----------------------------------------------------------------------


def format_expr(e: Expr) -> str:
    if isinstance(e, Rat):
        return str(e.value)
    if isinstance(e, JAtom):
        return "j"
    if isinstance(e, E8Atom):
        return "e8"
    if isinstance(e, SqrtAtom):
        return f"sqrt({e.value})"
    if isinstance(e, PhaseAtom):
        return f"e(({e.poly.render()})/2N @{e.domain})"
    if isinstance(e, Prod):
        return " * ".join(_fmt_child(f) for f in e.factors)
    if isinstance(e, Plus):
        return " + ".join(_fmt_child(t, in_sum=True) for t in e.terms)
    if isinstance(e, Quant):
        return f"{e.kind} {e.var} . {format_expr(e.body)}"
    raise ArithError(f"unknown node {type(e).__name__}")


def _fmt_child(e: Expr, in_sum: bool = False) -> str:
    if isinstance(e, Quant) or (isinstance(e, Plus) and not in_sum):
        return f"({format_expr(e)})"
    if isinstance(e, Plus):
        return f"({format_expr(e)})"
    return format_expr(e)


# -- direct evaluation (the oracle) -------------------------------------------------


def _expr_domain(e: Expr) -> str | None:
    if isinstance(e, PhaseAtom):
        return e.domain
    doms = set()
    children = ()
    if isinstance(e, Prod):
        children = e.factors
    elif isinstance(e, Plus):
        children = e.terms
    elif isinstance(e, Quant):
        children = (e.body,)
    for child in children:
        d = _expr_domain(child)
        if d:
            doms.add(d)
    if len(doms) > 1:
        raise DomainMismatch("expression mixes U and V phases")
    return doms.pop() if doms else None


def _domain_size(params: Params, domain: str) -> int:
    return params.N_v if domain == "V" else params.N_u


def _measure_coeff(params: Params, domain: str) -> GaussCoeff:
    # the 'int' quantifier weight 1/sqrt(N), kept symbolic
    unit = GaussCoeff.rational(Fraction(1, params.m))
    return unit if domain == "V" else unit * GaussCoeff.j_power(-1)


def eval_expr(
    e: Expr,
    params: Params,
    assignment: dict[str, int] | None = None,
    backend: str = "fp",
    domain: str | None = None,
):
    """Literal recursive evaluation; quantifiers are evaluated by explicit
    summation over the domain index range.  The QE correctness oracle."""
    assignment = dict(assignment or {})
    dom = domain or _expr_domain(e) or "V"
    if backend == "fp":
        return _eval_fp(e, params, assignment, dom)
    if backend == "complex":
        return _eval_complex(e, params, assignment, dom)
    raise ArithError("backend must be 'fp' or 'complex'")


def _eval_fp(e: Expr, params: Params, asg: dict[str, int], dom: str) -> int:
    p = params.p
    if isinstance(e, Rat):
        return e.value.numerator % p * pow(e.value.denominator, -1, p) % p
    if isinstance(e, JAtom):
        return params.j % p
    if isinstance(e, E8Atom):
        return params.char_e(Fraction(1, 8))
    if isinstance(e, SqrtAtom):
        return to_fp(params, GaussCoeff.sqrt(e.value))
    if isinstance(e, PhaseAtom):
        n = e.poly.eval(asg)
        return params.char_e(Fraction(n, 2 * _domain_size(params, e.domain)) % 1)
    if isinstance(e, Prod):
        out = 1
        for f in e.factors:
            out = out * _eval_fp(f, params, asg, dom) % p
        return out
    if isinstance(e, Plus):
        return sum(_eval_fp(t, params, asg, dom) for t in e.terms) % p
    if isinstance(e, Quant):
        sub_dom = _expr_domain(e.body) or dom
        N = _domain_size(params, sub_dom)
        total = 0
        for r in range(-N // 2, N // 2):
            asg[e.var] = r
            total = (total + _eval_fp(e.body, params, asg, sub_dom)) % p
        del asg[e.var]
        if e.kind == "int":
            total = total * to_fp(params, _measure_coeff(params, sub_dom)) % p
        return total
    raise ArithError(f"cannot evaluate {type(e).__name__}")


def _eval_complex(e: Expr, params: Params, asg: dict[str, int], dom: str) -> complex:
    import cmath

    if isinstance(e, Rat):
        return complex(e.value)
    if isinstance(e, JAtom):
        return cmath.exp(1j * math.pi / 4)
    if isinstance(e, E8Atom):
        return cmath.exp(-1j * math.pi / 4)
    if isinstance(e, SqrtAtom):
        return complex(math.sqrt(e.value))
    if isinstance(e, PhaseAtom):
        n = e.poly.eval(asg)
        return to_complex(
            params,
            GaussCoeff.phase_of(Fraction(n, 2 * _domain_size(params, e.domain)), e.domain),
        )
    if isinstance(e, Prod):
        out = 1 + 0j
        for f in e.factors:
            out *= _eval_complex(f, params, asg, dom)
        return out
    if isinstance(e, Plus):
        return sum(_eval_complex(t, params, asg, dom) for t in e.terms)
    if isinstance(e, Quant):
        sub_dom = _expr_domain(e.body) or dom
        N = _domain_size(params, sub_dom)
        total = 0j
        for r in range(-N // 2, N // 2):
            asg[e.var] = r
            total += _eval_complex(e.body, params, asg, sub_dom)
        del asg[e.var]
        if e.kind == "int":
            total *= to_complex(params, _measure_coeff(params, sub_dom))
        return total
    raise ArithError(f"cannot evaluate {type(e).__name__}")


# -- normal form and elimination -----------------------------------------------------


@dataclass(frozen=True)
class Guard:
    """Congruence condition k | poly(frees)."""

    modulus: int
    poly: Poly

    def holds(self, assignment: dict[str, int]) -> bool:
        return self.poly.eval(assignment) % self.modulus == 0

    def render(self) -> str:
        return f"if {self.modulus} | ({self.poly.render()})"


@dataclass(frozen=True)
class GaussTerm:
    coeff: GaussCoeff  # phase-free scalar part (j, e8, sqrt, rational)
    poly: Poly
    domain: str
    den: int = 1
    guards: tuple[Guard, ...] = ()

    def render(self) -> str:
        parts = [str(self.coeff)]
        if not self.poly.is_zero():
            den = "" if self.den == 1 else f"*{self.den}"
            parts.append(f"e(({self.poly.render()})/2N{den} @{self.domain})")
        text = " * ".join(parts)
        if self.guards:
            text += " [" + " and ".join(g.render() for g in self.guards) + "]"
        return text


@dataclass(frozen=True)
class NormalForm:
    terms: tuple[GaussTerm, ...]

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(t.render() for t in self.terms)

    def free_variables(self) -> set[str]:
        out: set[str] = set()
        for t in self.terms:
            out |= t.poly.variables()
            for g in t.guards:
                out |= g.poly.variables()
        return out


def eval_normal_form(
    nf: NormalForm,
    params: Params,
    assignment: dict[str, int] | None = None,
    backend: str = "fp",
):
    assignment = assignment or {}
    if backend == "fp":
        total = 0
        for t in nf.terms:
            if not all(g.holds(assignment) for g in t.guards):
                continue
            n = t.poly.eval(assignment)
            N = _domain_size(params, t.domain)
            val = to_fp(params, t.coeff) * params.char_e(
                Fraction(n, 2 * N * t.den) % 1
            )
            total = (total + val) % params.p
        return total
    total = 0j
    for t in nf.terms:
        if not all(g.holds(assignment) for g in t.guards):
            continue
        n = t.poly.eval(assignment)
        N = _domain_size(params, t.domain)
        phase = GaussCoeff.phase_of(Fraction(n, 2 * N * t.den), t.domain)
        total += to_complex(params, t.coeff * phase)
    return total


def _mul_terms(a: GaussTerm, b: GaussTerm) -> GaussTerm:
    if a.poly.is_zero():
        domain = b.domain
    elif b.poly.is_zero():
        domain = a.domain
    elif a.domain != b.domain:
        raise DomainMismatch("cannot multiply U-scale and V-scale phases")
    else:
        domain = a.domain
    den = math.lcm(a.den, b.den)
    poly = a.poly * (den // a.den) + b.poly * (den // b.den)
    return GaussTerm(a.coeff * b.coeff, poly, domain, den, a.guards + b.guards)


def _expand(e: Expr, params: Params, mode: str, dom: str) -> list[GaussTerm]:
    one = GaussTerm(GaussCoeff.one(), Poly.const(0), dom)
    if isinstance(e, Rat):
        return [GaussTerm(GaussCoeff.rational(e.value), Poly.const(0), dom)]
    if isinstance(e, JAtom):
        return [GaussTerm(GaussCoeff.j_power(1), Poly.const(0), dom)]
    if isinstance(e, E8Atom):
        return [GaussTerm(GaussCoeff.e8_power(1), Poly.const(0), dom)]
    if isinstance(e, SqrtAtom):
        return [GaussTerm(GaussCoeff.sqrt(e.value), Poly.const(0), dom)]
    if isinstance(e, PhaseAtom):
        return [GaussTerm(GaussCoeff.one(), e.poly, e.domain)]
    if isinstance(e, Plus):
        out: list[GaussTerm] = []
        for t in e.terms:
            out.extend(_expand(t, params, mode, dom))
        return out
    if isinstance(e, Prod):
        terms = [one]
        for f in e.factors:
            expanded = _expand(f, params, mode, dom)
            terms = [_mul_terms(t, u) for t in terms for u in expanded]
        return terms
    if isinstance(e, Quant):
        sub_dom = _expr_domain(e.body) or dom
        inner = _expand(e.body, params, mode, sub_dom)
        out = []
        for term in inner:
            result = _eliminate_var(term, e.var, params, mode)
            if result is not None:
                if e.kind == "int":
                    result = GaussTerm(
                        result.coeff * _measure_coeff(params, result.domain),
                        result.poly,
                        result.domain,
                        result.den,
                        result.guards,
                    )
                out.append(result)
        return out
    raise ArithError(f"cannot eliminate {type(e).__name__}")


def _resolve_guard_coset(term: GaussTerm, y: str, params: Params):
    """Consume the guards mentioning y into a coset y = base(frees) + step*Z,
    leaving residual guards on the other variables.

    Each such guard reads a*y + rest(frees) = 0 (mod g) with a constant a;
    when gcd(a, g) > 1 it must divide `rest` coefficient-wise (pointwise
    branching leaves the fragment)."""
    step, base = 1, Poly.const(0)
    others: list[Guard] = []
    for g in term.guards:
        if y not in g.poly.variables():
            others.append(g)
            continue
        a2, ell, rest = g.poly.split_var(y)
        if a2 != 0:
            raise NonGaussianSum("guard quadratic in a quantified variable")
        if ell.variables():
            raise NonGaussianSum("guard couples two quantified variables nonconstantly")
        coeff_y = ell.constant()
        gmod = g.modulus
        gg = math.gcd(coeff_y, gmod)
        if gg > 1:
            if not rest.content_divisible(gg):
                raise NonGaussianSum("guard gcd does not divide the free part")
            rest = rest.exact_div(gg)
            coeff_y //= gg
            gmod //= gg
        if gmod == 1:
            continue
        new_base = rest * (-pow(coeff_y, -1, gmod) % gmod)
        # merge with the running coset y = base (mod step)
        if step == 1:
            base, step = new_base, gmod
        elif math.gcd(step, gmod) == 1:
            u1 = gmod * pow(gmod, -1, step)
            u2 = step * pow(step, -1, gmod)
            base = base * u1 + new_base * u2
            step = step * gmod
        elif step % gmod == 0:
            # running coset finer: consistency becomes a residual guard
            others.append(Guard(gmod, base + new_base * -1))
        elif gmod % step == 0:
            others.append(Guard(step, base + new_base * -1))
            base, step = new_base, gmod
        else:
            raise NonGaussianSum("incomparable guard cosets")
    return step, base, others


def _eliminate_var(term: GaussTerm, y: str, params: Params, mode: str) -> GaussTerm | None:
    """One Gauss-summation step over y in the full domain window.
    Returns None for a structurally-zero result."""
    N = _domain_size(params, term.domain)
    step, base, guards = _resolve_guard_coset(term, y, params)
    poly = term.poly
    if step > 1 or not base.is_zero():
        if N % step:
            raise NonGaussianSum("guard coset incompatible with the domain")
        poly = poly.substitute(y, base + Poly.var(y) * step)
    window = N // step
    A, ell, rest = poly.split_var(y)
    den = term.den
    M = N * den
    if not ell.content_divisible(2):
        raise NonGaussianSum("odd linear coefficient of a quantified variable")
    L = ell.exact_div(2)
    if A == 0:
        if mode == "strict":
            return None
        if not L.content_divisible(den * step):
            raise NonGaussianSum("scaled geometric sum outside the fragment")
        # nonzero iff M | L(frees)
        new_guards = tuple(guards)
        if not L.is_zero():
            if not L.variables():
                if L.constant() % M:
                    return None  # constant, indivisible: identically zero
            else:
                new_guards += (Guard(M, L),)
        return GaussTerm(
            term.coeff * GaussCoeff.rational(window), rest, term.domain, den, new_guards
        )
    if M % abs(A):
        raise NonGaussianSum("period not integral in elimination")
    T = M // abs(A)
    if T % 4 or window % T:
        raise NonGaussianSum("window outside the closed-form fragment")
    mult = window // T
    if not L.content_divisible(den * step):
        raise NonGaussianSum("scaled quadratic sum outside the fragment")
    sgn = 1 if A > 0 else -1
    aa = abs(A)
    # residual phase (rest - L^2/A)/2M, held over the boosted denominator
    new_poly = rest * aa + L * L * (-sgn)
    new_guards = list(guards)
    if not L.is_zero():
        if not L.variables():
            if L.constant() % A:
                return None  # constant, indivisible: the sum telescopes to zero
        elif aa > 1:
            new_guards.append(Guard(aa, L))
    coeff = (
        term.coeff
        * GaussCoeff.rational(mult)
        * sqrt_with_scale(Fraction(T), term.domain, params)
        * GaussCoeff.e8_power(sgn)
    )
    g = math.gcd(_poly_content(new_poly), den * aa)
    if g > 1:
        new_poly = new_poly.exact_div(g)
        new_den = den * aa // g
    else:
        new_den = den * aa
    return GaussTerm(coeff, new_poly, term.domain, new_den, tuple(new_guards))


def _poly_content(poly: Poly) -> int:
    g = 0
    for _, c in poly.coeffs:
        g = math.gcd(g, c)
    return g


def eliminate(e: Expr, params: Params, mode: str = "extended") -> NormalForm:
    """Innermost-first quantifier elimination to a guarded, quantifier-free
    sum of Gaussian terms; eval-equivalent to the source expression."""
    free_variables(e)  # validates scoping
    dom = _expr_domain(e) or "V"
    terms = [t for t in _expand(e, params, mode, dom) if not t.coeff.is_zero()]
    return NormalForm(tuple(terms))
