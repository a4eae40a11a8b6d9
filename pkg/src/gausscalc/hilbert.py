"""Gaussian Hilbert space over a finite domain.

States are kept symbolic: a Gaussian ket is a coefficient together with an
integer quadratic phase (qA r^2 + 2 qL r + qC) / (2 N den) and a support
coset k Z + d outside which the coordinates vanish.  Operators carry a
quadratic kernel in (input q, output r) plus linear terms and a pair-coset
constraint aq*q + ar*r = d (mod k).  Nothing is materialised as a
length-N vector outside the brute-force oracles (DenseState).

Two summation conventions coexist, both exact:

* ``inner``  -- the formal inner product, summed over one period of the
  combined phase (the "units of scales" convention); when the combined
  quadratic coefficient does not divide the linear one the value is
  declared zero, which is what the full-domain sum gives.
* ``apply_operator`` / ``compose`` -- linearity sums over the whole
  domain, so closed forms carry the block multiplicity.

Denominators introduced by operator images (phases over 2tN and the like)
are tracked in ``den``; support cosets fall out of the divisibility case
of the Gauss summation formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .arith import ArithError, DomainMismatch, Params, solve_congruence
from .coeffring import GaussCoeff, to_fp
from .gauss import NonGaussianSum, sqrt_with_scale, quadratic_window_sum


class InadmissibleForm(ArithError):
    pass


class BadCoset(ArithError):
    pass


@dataclass(frozen=True)
class Domain:
    tag: str
    N: int
    unit_label: str = ""

    def __post_init__(self) -> None:
        if self.tag not in ("U", "V"):
            raise ArithError("domain tag must be 'U' or 'V'")

    def index_range(self) -> range:
        return range(-self.N // 2, self.N // 2)

    def wrap(self, r: int) -> int:
        return (r + self.N // 2) % self.N - self.N // 2


def domain_v(params: Params) -> Domain:
    return Domain("V", params.N_v, "v")


def domain_u(params: Params) -> Domain:
    return Domain("U", params.N_u, "u")


def unit_normalization(params: Params, domain: Domain) -> GaussCoeff:
    """1/sqrt(N) kept symbolic: 1/m on the V scale, (1/m) j^-1 on the U
    scale (sqrt(N_u) = m j with j the tower generator sqrt(i))."""
    if domain.tag == "V":
        return GaussCoeff.rational(Fraction(1, params.m))
    return GaussCoeff.rational(Fraction(1, params.m)) * GaussCoeff.j_power(-1)


@dataclass(frozen=True)
class QuadForm:
    A: int
    B: int
    C: int

    @property
    def admissible(self) -> bool:
        return self.A <= 0 and self.C <= 0

    def __call__(self, x: int, y: int) -> int:
        return self.A * x * x + 2 * self.B * x * y + self.C * y * y


@dataclass(frozen=True)
class PositionState:
    r: int
    domain: Domain

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", self.domain.wrap(self.r))


def _intersect_cosets(k1: int, d1: int, k2: int, d2: int) -> tuple[int, int] | None:
    g = math.gcd(k1, k2)
    if (d1 - d2) % g:
        return None
    lcm = k1 // g * k2
    sol = solve_congruence(k1, (d2 - d1) % lcm, k2)
    assert sol is not None
    _, t = sol
    return lcm, (d1 + k1 * t) % lcm


@dataclass(frozen=True)
class GaussState:
    """coeff * e((qA r^2 + 2 qL r + qC) / (2 N den)) on the coset k Z + d."""

    coeff: GaussCoeff
    qA: int
    qL: int
    qC: int
    domain: Domain
    den: int = 1
    support: tuple[int, int] = (1, 0)
    form: QuadForm | None = None
    p_param: int | None = None

    def __post_init__(self) -> None:
        k, d = self.support
        if k < 1 or self.domain.N % k:
            raise BadCoset(f"support step {k} must divide N={self.domain.N}")
        object.__setattr__(self, "support", (k, d % k))
        if self.den < 1:
            raise ArithError("den must be positive")
        g = math.gcd(math.gcd(self.qA, self.qL), math.gcd(self.qC, self.den))
        if g > 1 and self.den % g == 0:
            object.__setattr__(self, "qA", self.qA // g)
            object.__setattr__(self, "qL", self.qL // g)
            object.__setattr__(self, "qC", self.qC // g)
            object.__setattr__(self, "den", self.den // g)

    def is_zero(self) -> bool:
        return self.coeff.is_zero()

    def phase_at(self, r: int) -> Fraction:
        return Fraction(
            self.qA * r * r + 2 * self.qL * r + self.qC, 2 * self.domain.N * self.den
        )

    def coordinate(self, r: int) -> GaussCoeff:
        r = self.domain.wrap(r)
        k, d = self.support
        if self.is_zero() or (r - d) % k:
            return GaussCoeff.zero()
        return self.coeff * GaussCoeff.phase_of(self.phase_at(r), self.domain.tag)

    def to_descriptor(self) -> dict:
        return {
            "domain": self.domain.tag,
            "coeff": str(self.coeff),
            "form": [self.qA, self.qL, self.qC],
            "p_param": 1,
            "den": self.den,
            "support": list(self.support),
        }


def zero_state(domain: Domain) -> GaussState:
    return GaussState(GaussCoeff.zero(), 0, 0, 0, domain)


def gauss_ket(
    params: Params,
    domain: Domain,
    form: QuadForm,
    p_param: int = 0,
    coeff: GaussCoeff | None = None,
    den: int = 1,
    allow_inadmissible: bool = False,
) -> GaussState:
    """The ket with coordinates coeff * e(f(r, p)/2N), f = A r^2 + 2B r p + C p^2.

    coeff defaults to the 1/sqrt(N) normalisation."""
    if not form.admissible and not allow_inadmissible:
        raise InadmissibleForm(f"form {form} needs A <= 0 and C <= 0")
    if coeff is None:
        coeff = unit_normalization(params, domain)
    return GaussState(
        coeff,
        form.A,
        form.B * p_param,
        form.C * p_param * p_param,
        domain,
        den=den,
        form=form,
        p_param=p_param,
    )


def state_from_descriptor(params: Params, d: dict) -> GaussState:
    from .coeffring import parse_coeff

    domain = domain_v(params) if d["domain"] == "V" else domain_u(params)
    qa, ql, qc = (int(x) for x in d["form"])
    pp = int(d.get("p_param", 1))
    support = tuple(int(x) for x in d.get("support", (1, 0)))
    return GaussState(
        parse_coeff(d["coeff"]),
        qa,
        ql * pp,
        qc * pp * pp,
        domain,
        den=int(d.get("den", 1)),
        support=support,  # type: ignore[arg-type]
    )


@dataclass(frozen=True)
class GaussOperator:
    """u[q] |-> coeff * sum_r e(alpha(q, r)/(2 N den)) u[r] on the pair coset
    aq*q + ar*r = d (mod k), with

        alpha(q, r) = kA q^2 + 2 kB q r + kC r^2 + 2 kD q + 2 kE r.
    """

    coeff: GaussCoeff
    kA: int
    kB: int
    kC: int
    domain_in: Domain
    domain_out: Domain
    kD: int = 0
    kE: int = 0
    den: int = 1
    support: tuple[int, int, int, int] = (1, 0, 0, 0)  # (k, aq, ar, d)
    unitary: bool = False

    def __post_init__(self) -> None:
        k, aq, ar, _ = self.support
        if k < 1:
            raise BadCoset("support modulus must be positive")
        # the pair coset must be well-defined under index wraparound mod N
        if (aq * self.domain_in.N) % k or (ar * self.domain_out.N) % k:
            raise BadCoset("support coset not compatible with the domain period")

    def is_zero(self) -> bool:
        return self.coeff.is_zero()

    def on_support(self, q: int, r: int) -> bool:
        k, aq, ar, d = self.support
        return (aq * q + ar * r - d) % k == 0

    def kernel_value(self, q: int, r: int) -> GaussCoeff:
        if self.is_zero() or not self.on_support(q, r):
            return GaussCoeff.zero()
        num = (
            self.kA * q * q
            + 2 * self.kB * q * r
            + self.kC * r * r
            + 2 * self.kD * q
            + 2 * self.kE * r
        )
        return self.coeff * GaussCoeff.phase_of(
            Fraction(num, 2 * self.domain_in.N * self.den), self.domain_in.tag
        )


def identity_operator(domain: Domain) -> GaussOperator:
    return GaussOperator(
        GaussCoeff.one(), 0, 0, 0, domain, domain,
        support=(domain.N, 1, -1, 0), unitary=True,
    )


# -- formal inner products -----------------------------------------------------


def inner(params: Params, s1, s2, kind: str = "Hermitian", mode: str = "extended") -> GaussCoeff:
    """Formal inner product; Hermitian conjugates the second argument.

    Ket/ket pairs reduce by Gauss summation over one period of the combined
    phase.  The combined-quadratic-zero case follows `mode`: extended
    counts the full coset (character orthogonality), strict is zero.
    """
    if kind not in ("Euclidean", "Hermitian"):
        raise ArithError("kind must be 'Euclidean' or 'Hermitian'")
    if isinstance(s1, PositionState) and isinstance(s2, PositionState):
        _check_domains(s1.domain, s2.domain)
        return GaussCoeff.one() if s1.r == s2.r else GaussCoeff.zero()
    if isinstance(s1, GaussState) and isinstance(s2, PositionState):
        _check_domains(s1.domain, s2.domain)
        return s1.coordinate(s2.r)
    if isinstance(s1, PositionState) and isinstance(s2, GaussState):
        _check_domains(s1.domain, s2.domain)
        val = s2.coordinate(s1.r)
        return val.conj() if kind == "Hermitian" else val
    _check_domains(s1.domain, s2.domain)
    if s1.is_zero() or s2.is_zero():
        return GaussCoeff.zero()

    den = math.lcm(s1.den, s2.den)
    f1, f2 = den // s1.den, den // s2.den
    sign = -1 if kind == "Hermitian" else 1
    qA = s1.qA * f1 + sign * s2.qA * f2
    qL = s1.qL * f1 + sign * s2.qL * f2
    qC = s1.qC * f1 + sign * s2.qC * f2
    cf = s1.coeff * (s2.coeff.conj() if kind == "Hermitian" else s2.coeff)

    coset = _intersect_cosets(*s1.support, *s2.support)
    if coset is None:
        return GaussCoeff.zero()
    k, d = coset
    N = s1.domain.N
    tag = s1.domain.tag
    M = N * den
    # substitute r = d + k*sigma
    A_s = qA * k * k
    B_s = (qA * d + qL) * k
    C_s = qA * d * d + 2 * qL * d + qC
    if A_s == 0:
        if mode == "strict" or B_s % M:
            return GaussCoeff.zero()
        return (
            cf
            * GaussCoeff.rational(N // k)
            * GaussCoeff.phase_of(Fraction(C_s, 2 * M), tag)
        )
    if M % abs(A_s) or (M // abs(A_s)) % 4:
        raise NonGaussianSum("combined phase outside the closed-form fragment")
    if B_s % A_s:
        return GaussCoeff.zero()  # full-domain telescope; declared zero
    one_period = M // abs(A_s)
    if one_period > N // k:
        raise NonGaussianSum("period exceeds the domain; no reduced window")
    return cf * quadratic_window_sum(A_s, B_s, C_s, M, one_period, tag, mode, params)


def _check_domains(d1: Domain, d2: Domain) -> None:
    if d1 != d2:
        raise DomainMismatch(f"states on different domains: {d1.tag}/{d2.tag}")


def norm_squared(params: Params, s) -> GaussCoeff:
    """Hermitian self-pairing in extended mode (the tame sum over the coset)."""
    return inner(params, s, s, "Hermitian", "extended")


# -- operator application ------------------------------------------------------


def _merge_cosets_1d(c1: tuple[int, int] | None, c2: tuple[int, int] | None):
    """Intersect single-variable cosets; None means the whole domain.
    Returns the merged coset or 'empty'."""
    if c1 is None:
        return c2
    if c2 is None:
        return c1
    merged = _intersect_cosets(*c1, *c2)
    return merged if merged is not None else "empty"


def apply_operator(params: Params, op: GaussOperator, s) -> GaussState:
    """Sum the kernel against the state over the whole input domain;
    Gauss summation yields the image ket, its support coset solving the
    divisibility condition of the closed form."""
    if isinstance(s, PositionState):
        if s.domain != op.domain_in:
            raise DomainMismatch("operator input domain mismatch")
        k, aq, ar, dd = op.support
        sol = solve_congruence(ar, dd - aq * s.r, k)
        if sol is None:
            return zero_state(op.domain_out)
        step, base = sol
        if op.domain_out.N % step:
            raise NonGaussianSum("kernel coset incompatible with the domain")
        return GaussState(
            op.coeff,
            op.kC,
            op.kB * s.r + op.kE,
            op.kA * s.r * s.r + 2 * op.kD * s.r,
            op.domain_out,
            den=op.den,
            support=(step, base),
        )
    if not isinstance(s, GaussState):
        raise ArithError(f"cannot apply operator to {type(s).__name__}")
    if s.domain != op.domain_in:
        raise DomainMismatch("operator input domain mismatch")
    if s.is_zero() or op.is_zero():
        return zero_state(op.domain_out)

    N = s.domain.N
    den = math.lcm(s.den, op.den)
    fs, fo = den // s.den, den // op.den
    sA, sL, sC = s.qA * fs, s.qL * fs, s.qC * fs
    oA, oB, oC = op.kA * fo, op.kB * fo, op.kC * fo
    oD, oE = op.kD * fo, op.kE * fo
    ks, ds = s.support
    ko, aq, ar, do = op.support

    # Express the q-range as q = u0*r + v0 + L*sigma plus (optionally) an
    # extra coset condition on the output index r.
    extra: tuple[int, int] | None = None
    if ko == 1:
        u0, v0, L = 0, ds, ks
    elif abs(aq) == 1:
        u0, v0 = -aq * ar, aq * do  # kernel coset: q = u0 r + v0 (mod ko)
        if ks == 1:
            L = ko
        elif ks % ko == 0:
            # the state's coset is finer: q = ds + ks*sigma, and the kernel
            # coset becomes a condition on r
            sol = solve_congruence(u0, ds - v0, ko)
            if sol is None:
                return zero_state(op.domain_out)
            extra, (u0, v0, L) = sol, (0, ds, ks)
        elif ko % ks == 0:
            sol = solve_congruence(u0, ds - v0, ks)
            if sol is None:
                return zero_state(op.domain_out)
            extra, L = sol, ko
        else:
            raise NonGaussianSum("incomparable support cosets in apply")
    else:
        raise NonGaussianSum("unsupported support combination in apply")

    QA = sA + oA
    M = N * den
    b1 = L * (QA * u0 + oB)  # sigma-linear part: B_sig(r) = b1*r + b0
    b0 = L * (QA * v0 + sL + oD)
    c2 = QA * u0 * u0 + 2 * oB * u0 + oC  # C_sig(r) = c2 r^2 + 2 c1 r + c0
    c1 = QA * u0 * v0 + (sL + oD) * u0 + oB * v0 + oE
    c0 = QA * v0 * v0 + 2 * (sL + oD) * v0 + sC

    def finish(coeff, pA, pL, pC, dd, guard):
        support = _merge_cosets_1d(extra, guard)
        if support == "empty":
            return zero_state(op.domain_out)
        if support is None:
            support = (1, 0)
        if N % support[0]:
            raise NonGaussianSum("image coset incompatible with the domain")
        return GaussState(
            s.coeff * op.coeff * coeff, pA, pL, pC, op.domain_out,
            den=dd, support=support,
        )

    if L == N:
        # q pinned to a single index; polynomial substitution needs the
        # phase to be N-periodic, i.e. an unscaled modulus
        if den > 1:
            raise NonGaussianSum("pinned substitution with scaled modulus")
        return finish(GaussCoeff.one(), c2, c1, c0, den, None)

    A_sig = QA * L * L
    window = N // L

    if A_sig == 0:
        # geometric in sigma: need the off-coset telescope to close
        if den > 1 and (b1 % (L * den) or b0 % (L * den)):
            raise NonGaussianSum("scaled geometric sum outside the fragment")
        sol = solve_congruence(b1 % M, (-b0) % M, M)
        if sol is None:
            return zero_state(op.domain_out)
        step_r, base = sol
        k_r = math.gcd(step_r, N)
        guard = (k_r, base % k_r) if k_r > 1 else None
        return finish(GaussCoeff.rational(window), c2, c1, c0, den, guard)

    if M % abs(A_sig):
        raise NonGaussianSum("sigma-period not integral in apply")
    T = M // abs(A_sig)
    if T % 4 or window % T:
        raise NonGaussianSum("sigma-window outside the closed-form fragment")
    mult = window // T
    if den > 1 and ((b1 // L) % den or (b0 // L) % den):
        # off-coset blocks would not telescope to zero
        raise NonGaussianSum("scaled quadratic sum outside the fragment")
    sol = solve_congruence(b1, -b0, abs(A_sig))
    if sol is None:
        return zero_state(op.domain_out)
    step_r, base = sol
    k_r = math.gcd(step_r, N)
    guard = (k_r, base % k_r) if k_r > 1 else None
    sgn = 1 if A_sig > 0 else -1
    aa = abs(A_sig)
    pA = aa * c2 - sgn * b1 * b1
    pL = aa * c1 - sgn * b1 * b0
    pC = aa * c0 - sgn * b0 * b0
    factor = (
        GaussCoeff.rational(mult)
        * sqrt_with_scale(Fraction(T), s.domain.tag, params)
        * GaussCoeff.e8_power(sgn)
    )
    return finish(factor, pA, pL, pC, den * aa, guard)


# -- composition ---------------------------------------------------------------


def _reduce_pair_coset(c: tuple[int, int, int, int] | None):
    if c is None:
        return None
    k, a, b, d = c
    g = math.gcd(math.gcd(k, a), math.gcd(b, d))
    if g > 1:
        k, a, b, d = k // g, a // g, b // g, d // g
    if k == 1:
        return None
    return (k, a % k, b % k, d % k)


def _pair_implies(fine, coarse) -> bool:
    """Sufficient test that every (q, r) solving `fine` solves `coarse`."""
    kf, af, bf, df = fine
    kc, ac, bc, dc = coarse
    if kf % kc:
        return False
    return any(
        (ac - lam * af) % kc == 0
        and (bc - lam * bf) % kc == 0
        and (dc - lam * df) % kc == 0
        for lam in range(kc)
    )


def _merge_pair_cosets(c1, c2):
    c1, c2 = _reduce_pair_coset(c1), _reduce_pair_coset(c2)
    if c1 is None:
        return c2
    if c2 is None:
        return c1
    if _pair_implies(c2, c1):
        return c2
    if _pair_implies(c1, c2):
        return c1
    raise NonGaussianSum("pair cosets outside the single-congruence fragment")


def _divides_on_pair_coset(den: int, lin: tuple[int, int, int], coset) -> bool:
    """True when den | bq*q + br*r + bc for every (q, r) in the coset
    (sufficient tests: coefficient-wise, or via a multiple of the coset's
    own congruence)."""
    bq, br, bc = lin
    if den == 1 or (bq % den == 0 and br % den == 0 and bc % den == 0):
        return True
    if coset is None:
        return False
    kc, ac, rc, dc = coset
    if kc % den:
        return False
    return any(
        (bq - lam * ac) % den == 0
        and (br - lam * rc) % den == 0
        and (bc + lam * dc) % den == 0
        for lam in range(den)
    )


def compose(params: Params, op1: GaussOperator, op2: GaussOperator) -> GaussOperator:
    """op1 after op2: kernel(q, r) = sum_m k2(q, m) k1(m, r), Gauss-summed
    over the intermediate variable.  Support cosets must be nested (one
    constraint modulus dividing the other)."""
    if op1.domain_in != op2.domain_out:
        raise DomainMismatch("compose: op1 input must match op2 output")
    dom_in, dom_out = op2.domain_in, op1.domain_out
    if op1.is_zero() or op2.is_zero():
        return GaussOperator(GaussCoeff.zero(), 0, 0, 0, dom_in, dom_out)
    N = op1.domain_in.N
    den = math.lcm(op1.den, op2.den)
    f1, f2 = den // op1.den, den // op2.den
    A1, B1, C1, D1, E1 = (x * f1 for x in (op1.kA, op1.kB, op1.kC, op1.kD, op1.kE))
    A2, B2, C2, D2, E2 = (x * f2 for x in (op2.kA, op2.kB, op2.kC, op2.kD, op2.kE))
    k1, aq1, ar1, d1 = op1.support
    k2, aq2, ar2, d2 = op2.support
    both_unitary = op1.unitary and op2.unitary
    MA = C2 + A1  # m^2 coefficient
    b0 = E2 + D1  # m-linear part is 2*(B2 q + B1 r + b0)

    # Resolve both support constraints into m = uq*q + ur*r + u0 + L*sigma
    # plus an optional pair-coset condition on (q, r).
    consistency = None
    if k2 > 1 and abs(ar2) != 1:
        raise NonGaussianSum("op2 support does not pin the intermediate index")
    if k1 > 1 and abs(aq1) != 1:
        raise NonGaussianSum("op1 support does not pin the intermediate index")
    m2 = (-ar2 * aq2, 0, ar2 * d2, k2) if k2 > 1 else None  # m = uq q + u0 (mod k2)
    m1 = (0, -aq1 * ar1, aq1 * d1, k1) if k1 > 1 else None  # m = ur r + u0 (mod k1)
    if m2 is None and m1 is None:
        uq, ur, u0, L = 0, 0, 0, 1
    elif m1 is None:
        uq, ur, u0, L = m2[0], 0, m2[2], k2
    elif m2 is None:
        uq, ur, u0, L = 0, m1[1], m1[2], k1
    elif k1 % k2 == 0:
        # op1's constraint is finer: m follows it; op2's becomes consistency
        uq, ur, u0, L = 0, m1[1], m1[2], k1
        consistency = (k2, (aq2 + 0) % k2, (ar2 * m1[1]) % k2, (d2 - ar2 * m1[2]) % k2)
    elif k2 % k1 == 0:
        uq, ur, u0, L = m2[0], 0, m2[2], k2
        consistency = (k1, (aq1 * m2[0]) % k1, ar1 % k1, (d1 - aq1 * m2[2]) % k1)
    else:
        raise NonGaussianSum("incomparable support cosets in compose")

    # phase in m: MA m^2 + 2 (B2 q + B1 r + b0) m + Psi(q, r)
    # substitute m = m0 + L sigma, m0 = uq q + ur r + u0
    bq = MA * uq + B2  # sigma-linear: 2 L (bq q + br r + bc)
    br = MA * ur + B1
    bc = MA * u0 + b0
    qq = MA * uq * uq + 2 * B2 * uq + A2  # constant part, quadratic in (q, r)
    qr = MA * uq * ur + B2 * ur + B1 * uq
    rr = MA * ur * ur + 2 * B1 * ur + C1
    lq = MA * uq * u0 + B2 * u0 + b0 * uq + D2
    lr = MA * ur * u0 + B1 * u0 + b0 * ur + E1
    cc = MA * u0 * u0 + 2 * b0 * u0

    def build(coeff, qq, qr, rr, lq, lr, const, dd, guard):
        support = _merge_pair_cosets(consistency, guard)
        if support is None:
            support = (1, 0, 0, 0)
        phase = GaussCoeff.phase_of(Fraction(const, 2 * N * dd), op1.domain_in.tag)
        return GaussOperator(
            coeff * phase, qq, qr, rr, dom_in, dom_out,
            kD=lq, kE=lr, den=dd, support=support, unitary=both_unitary,
        )

    if L == N:
        if den > 1:
            raise NonGaussianSum("pinned composition with scaled modulus")
        return build(op1.coeff * op2.coeff, qq, qr, rr, lq, lr, cc, den, None)

    M = N * den
    window = N // L
    A_sig = MA * L * L
    if A_sig == 0:
        if not _divides_on_pair_coset(den, (bq, br, bc), _reduce_pair_coset(consistency)):
            raise NonGaussianSum("scaled A=0 composition outside the fragment")
        # nonzero iff (M/L) | bq q + br r + bc on the pair coset
        mod = M // math.gcd(M, L)
        guard = (mod, bq % mod, br % mod, (-bc) % mod)
        coeff = op1.coeff * op2.coeff * GaussCoeff.rational(window)
        return build(coeff, qq, qr, rr, lq, lr, cc, den, guard)
    if M % abs(A_sig):
        raise NonGaussianSum("composition period not integral")
    T = M // abs(A_sig)
    if T % 4 or window % T:
        raise NonGaussianSum("composition window outside the fragment")
    if not _divides_on_pair_coset(den, (bq, br, bc), _reduce_pair_coset(consistency)):
        raise NonGaussianSum("scaled composition outside the fragment")
    mult = window // T
    sgn = 1 if A_sig > 0 else -1
    # guard |MA| L | bq q + br r + bc
    gm = abs(MA) * L
    guard = (gm, bq % gm, br % gm, (-bc) % gm)
    aa = abs(MA)
    qq2 = aa * qq - sgn * bq * bq
    qr2 = aa * qr - sgn * bq * br
    rr2 = aa * rr - sgn * br * br
    lq2 = aa * lq - sgn * bq * bc
    lr2 = aa * lr - sgn * br * bc
    cc2 = aa * cc - sgn * bc * bc
    coeff = (
        op1.coeff
        * op2.coeff
        * GaussCoeff.rational(mult)
        * sqrt_with_scale(Fraction(T), op1.domain_in.tag, params)
        * GaussCoeff.e8_power(sgn)
    )
    return build(coeff, qq2, qr2, rr2, lq2, lr2, cc2, den * aa, guard)


# -- unitarity -----------------------------------------------------------------


@dataclass
class UnitarityReport:
    ok: bool
    column_failures: list
    pairing_failures: list


def check_unitary(params: Params, op: GaussOperator, sample_pairs=None) -> UnitarityReport:
    """Hermitian unitarity: every column has squared norm 1 (exact, via
    conjugate pairing in F_p) and the operator preserves position-state
    pairings on a sample (brute force)."""
    p = params.p
    N = op.domain_in.N
    col_fail = []
    k, aq, ar, d = op.support
    norm2 = to_fp(params, op.coeff * op.coeff.conj())
    qs = list(op.domain_in.index_range()) if N <= 256 else list(range(-8, 8))
    for q in qs:
        sol = solve_congruence(ar, d - aq * q, k)
        count = 0 if sol is None else N // math.gcd(sol[0], N)
        if count * norm2 % p != 1:
            col_fail.append((q, count * norm2 % p))
    pair_fail = []
    if sample_pairs is None:
        sample_pairs = [(0, 0), (1, 1), (0, 1), (2, 5), (-3, 7)]
    for r1, r2 in sample_pairs:
        lhs = _pairing_after(params, op, r1, r2)
        rhs = 1 if op.domain_in.wrap(r1) == op.domain_in.wrap(r2) else 0
        if lhs != rhs:
            pair_fail.append((r1, r2, lhs, rhs))
    return UnitarityReport(not col_fail and not pair_fail, col_fail, pair_fail)


def _pairing_after(params: Params, op: GaussOperator, r1: int, r2: int) -> int:
    """<A u[r1] | A u[r2]>_H over the full output domain, brute force."""
    p = params.p
    total = 0
    for s in op.domain_out.index_range():
        a = op.kernel_value(r1, s)
        b = op.kernel_value(r2, s)
        if not a.is_zero() and not b.is_zero():
            total = (total + to_fp(params, a * b.conj())) % p
    return total


# -- restriction, permutation, tensor -------------------------------------------


def restrict(params: Params, s: GaussState, k: int, d: int = 0) -> GaussState:
    """Coordinates outside kZ + d zeroed, coefficient renormalised by sqrt(k)."""
    if k < 1 or s.domain.N % k:
        raise BadCoset(f"restriction step {k} must divide N={s.domain.N}")
    if k == 1:
        return s
    coset = _intersect_cosets(*s.support, k, d % k)
    if coset is None:
        return zero_state(s.domain)
    return replace(s, coeff=s.coeff * GaussCoeff.sqrt(k), support=coset)


def permutation_unitary(params: Params, sigma, s):
    """psi^sigma(r) = psi(sigma(r)).  Position states stay symbolic; Gaussian
    states come back as dense oracles (a permuted Gaussian is generally not
    a Gaussian ket)."""
    domain = s.domain
    rng = list(domain.index_range())
    image = {r: domain.wrap(sigma(r)) for r in rng}
    if len(set(image.values())) != len(rng):
        raise ArithError("sigma is not a bijection of the domain")
    if isinstance(s, PositionState):
        inv = {v: k for k, v in image.items()}
        return PositionState(inv[s.r], domain)
    dense = DenseState.from_state(params, s)
    return dense.permute(image)


@dataclass(frozen=True)
class TensorState:
    factors: tuple

    def __post_init__(self) -> None:
        doms = {f.domain for f in self.factors}
        if len(doms) > 1:
            raise DomainMismatch("tensor factors must share a domain")
        if not (1 <= len(self.factors) <= 4):
            raise ArithError("tensor arity must be between 1 and 4")

    @property
    def domain(self) -> Domain:
        return self.factors[0].domain


def tensor(states) -> TensorState:
    return TensorState(tuple(states))


def tensor_inner(params: Params, t1: TensorState, t2: TensorState, kind: str = "Hermitian") -> GaussCoeff:
    """Separable pairing: the product of componentwise inner products."""
    if len(t1.factors) != len(t2.factors):
        raise ArithError("tensor arity mismatch")
    out = GaussCoeff.one()
    for f1, f2 in zip(t1.factors, t2.factors):
        out = out * inner(params, f1, f2, kind)
    return out


# -- brute-force oracle --------------------------------------------------------


@dataclass(frozen=True)
class DenseState:
    """Coordinate vector of F_p residues; the brute-force side of every check.
    Conjugation is symbolic, so conjugated vectors are built at construction
    (``conjugate=True``), not derived from residues."""

    domain: Domain
    coords: dict

    @classmethod
    def from_state(cls, params: Params, s, conjugate: bool = False) -> "DenseState":
        domain = s.domain
        if isinstance(s, PositionState):
            coords = {r: 0 for r in domain.index_range()}
            coords[s.r] = 1
            return cls(domain, coords)
        def val(r):
            c = s.coordinate(r)
            return to_fp(params, c.conj() if conjugate else c)
        return cls(domain, {r: val(r) for r in domain.index_range()})

    def permute(self, image: dict) -> "DenseState":
        return DenseState(self.domain, {r: self.coords[image[r]] for r in self.coords})

    def pair_full(self, params: Params, other: "DenseState") -> int:
        """sum_r phi(r) * psi(r); conjugate `other` at construction for the
        Hermitian pairing."""
        p = params.p
        total = 0
        for r in self.domain.index_range():
            total = (total + self.coords[r] * other.coords[r]) % p
        return total

    def add(self, params: Params, other: "DenseState", scale: int = 1) -> "DenseState":
        p = params.p
        return DenseState(
            self.domain,
            {r: (self.coords[r] + scale * other.coords[r]) % p for r in self.coords},
        )


def apply_dense(params: Params, op: GaussOperator, dense: DenseState, conjugate_kernel: bool = False) -> DenseState:
    """Literal matrix action, O(N^2) kernel evaluations."""
    p = params.p
    out = {}
    nonzero = [(q, v) for q, v in dense.coords.items() if v]
    for r in op.domain_out.index_range():
        acc = 0
        for q, v in nonzero:
            kv = op.kernel_value(q, r)
            if not kv.is_zero():
                if conjugate_kernel:
                    kv = kv.conj()
                acc = (acc + v * to_fp(params, kv)) % p
        out[r] = acc
    return DenseState(op.domain_out, out)
