"""Gauss quadratic sums: brute-force backends and exact closed forms.

The working identity, for integer a != 0, b with 4|a| dividing M and a
2M-th root of unity available (2M | p-1):

    sum_{0 < n <= M} e((a n^2 + 2 b n) / 2M)
        = sqrt(|a| M) * e(sign(a)/8) * e(-b^2 / 2aM)   if a | b
        = 0                                            otherwise

Sums here run over the *full* window of M consecutive integers.  The
summand has quasi-period T = M/|a| with block factor e(b/|a|); over |a|
consecutive blocks the factors telescope, which is what makes the
"0 otherwise" case true (a single block generally does not vanish when
a does not divide b).  Closed forms therefore carry the block
multiplicity |a| relative to the one-period normalisation: |a| *
sqrt(M/|a|) = sqrt(|a| M).

For a = 0 the sum is the plain character sum: M when M | b, else 0
("extended" mode).  "strict" mode reproduces the declared-zero
convention for a = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import ArithError, Params
from .coeffring import GaussCoeff


class PreconditionViolation(ArithError):
    pass


class NonGaussianSum(ArithError):
    """Window/coefficient combination outside the closed-form fragment."""


@dataclass(frozen=True)
class GaussSumSpec:
    a: int
    b: int
    M: int
    domain: str = "V"
    backend: str = "Fp"

    def __post_init__(self) -> None:
        if self.M < 1:
            raise PreconditionViolation("modulus M must be positive")
        if self.a and self.M % (4 * abs(self.a)):
            raise PreconditionViolation("need 4|a| dividing M")
        if self.domain not in ("U", "V"):
            raise PreconditionViolation("domain must be 'U' or 'V'")
        if self.backend not in ("Fp", "Complex"):
            raise PreconditionViolation("backend must be 'Fp' or 'Complex'")


def _brute_fp(params: Params, a: int, b: int, M: int, chunks: int = 1) -> int:
    """sum_{0<n<=M} xi_2M^(a n^2 + 2 b n), incremental products, chunked
    associative reduction (bit-identical for any partitioning)."""
    p = params.p
    xi = params.xi(2 * M)
    two_m = 2 * M
    bounds = [M * k // max(chunks, 1) for k in range(max(chunks, 1) + 1)]
    total = 0
    for lo, hi in zip(bounds, bounds[1:]):
        n = lo + 1
        x = pow(xi, (a * n * n + 2 * b * n) % two_m, p)
        r = pow(xi, (a * (2 * n + 1) + 2 * b) % two_m, p)
        rr = pow(xi, (2 * a) % two_m, p)
        sub = 0
        for _ in range(hi - lo):
            sub = (sub + x) % p
            x = x * r % p
            r = r * rr % p
        total = (total + sub) % p
    return total


def _brute_complex(a: int, b: int, M: int, chunks: int = 1) -> complex:
    """Same sum with zeta = e^{i pi / M}, Kahan-compensated per chunk."""
    bounds = [M * k // max(chunks, 1) for k in range(max(chunks, 1) + 1)]
    total = 0j
    for lo, hi in zip(bounds, bounds[1:]):
        sub = 0j
        comp = 0j
        for n in range(lo + 1, hi + 1):
            term = cmath.exp(1j * math.pi * ((a * n * n + 2 * b * n) % (2 * M)) / M)
            y = term - comp
            t = sub + y
            comp = (t - sub) - y
            sub = t
        total += sub
    return total


def gauss_brute(params: Params, spec: GaussSumSpec, chunks: int = 1):
    """Literal evaluation of the full-window sum in the requested backend."""
    if spec.backend == "Fp":
        return _brute_fp(params, spec.a, spec.b, spec.M, chunks)
    return _brute_complex(spec.a, spec.b, spec.M, chunks)


def sqrt_with_scale(value: Fraction, domain: str, params: Params | None) -> GaussCoeff:
    """sqrt(value) as a GaussCoeff; on the U scale the single factor of
    i = N_u/N_v carried by the domain size is extracted symbolically as the
    generator j (sqrt(N_u) = m * j).  Exactly one factor: the scale ratio
    appears once in sqrt(N_u/|A| * den); any remaining numeric coincidence
    with i stays numeric."""
    coeff = GaussCoeff.one()
    if domain == "U" and params is not None and value % params.i == 0:
        value = value / params.i
        coeff = GaussCoeff.j_power(1)
    return coeff * GaussCoeff.sqrt(value)


def gauss_closed(
    spec: GaussSumSpec, mode: str = "extended", params: Params | None = None
) -> GaussCoeff:
    """Closed form of the full-window sum as a normal-form coefficient."""
    a, b, M = spec.a, spec.b, spec.M
    if a == 0:
        if mode == "strict":
            return GaussCoeff.zero()
        if b % M == 0:
            return GaussCoeff.rational(M)
        return GaussCoeff.zero()
    if b % a:
        return GaussCoeff.zero()
    sgn = 1 if a > 0 else -1
    out = sqrt_with_scale(Fraction(abs(a) * M), spec.domain, params)
    out = out * GaussCoeff.e8_power(sgn)
    out = out * GaussCoeff.phase_of(Fraction(-b * b, 2 * a * M), spec.domain)
    return out


# -- the statistical-mechanics one-period sum ---------------------------------


def sm_brute(params: Params, a: int) -> int:
    """(1/m) * sum over the a-sublattice of V_u of e(a n^2 / 2 N_u), in F_p.

    One period (N_u/a terms).  The positive-quadratic reading is the one
    that reproduces the closed form e(1/8) * j / sqrt(a); see gauss_closed_sm.
    """
    if a < 1 or params.N_u % a:
        raise PreconditionViolation("need a >= 1 dividing N_u")
    p = params.p
    M = params.N_u
    xi = params.xi(2 * M)
    total = 0
    x = pow(xi, a % (2 * M), p)  # n = 1
    r = pow(xi, (3 * a) % (2 * M), p)
    rr = pow(xi, (2 * a) % (2 * M), p)
    for _ in range(M // a):
        total = (total + x) % p
        x = x * r % p
        r = r * rr % p
    return total * pow(params.m, -1, p) % p


def gauss_closed_sm(params: Params, a: int) -> GaussCoeff:
    """Closed form of sm_brute: e(1/8) * j * sqrt(1/a).

    Exact in F_p: (1/m) * e(1/8) sqrt(N_u/a) = e(1/8) * (m j / (m sqrt(a)))
    = e(1/8) j / sqrt(a).  Under the limit map j |-> e^{i pi/4} and
    e8 |-> e^{-i pi/4} pair to the real value 1/sqrt(a).
    """
    if a < 1 or params.N_u % (4 * a):
        raise PreconditionViolation("need a >= 1 with 4a dividing N_u")
    return (
        GaussCoeff.e8_power(1)
        * GaussCoeff.j_power(1)
        * GaussCoeff.sqrt(Fraction(1, a))
    )


# -- core summation primitive used by hilbert and the rewriter ----------------


def quadratic_window_sum(
    A: int,
    B: int,
    C: int,
    M: int,
    window: int,
    domain: str,
    mode: str = "extended",
    params: Params | None = None,
) -> GaussCoeff:
    """Exact closed form for sums of e((A x^2 + 2 B x + C)/2M) over any
    `window` consecutive integers, provided the window is a whole number
    of quasi-periods.  Raises NonGaussianSum outside the fragment.

    A != 0: needs T = M/|A| a positive integer with 4 | T and T | window.
    The value is zero unless |A| divides B when window covers a multiple
    of |A| blocks; a partial block count that does not telescope raises.
    A == 0: geometric sum; zero unless M | B (then window * e(C/2M)).
    """
    if window < 1:
        raise NonGaussianSum("empty summation window")
    phase_c = GaussCoeff.phase_of(Fraction(C, 2 * M), domain)
    if A == 0:
        if mode == "strict":
            return GaussCoeff.zero()
        if B % M == 0:
            return GaussCoeff.rational(window) * phase_c
        # ratio e(B/M): the geometric sum vanishes iff window*B = 0 mod M
        if (window * B) % M == 0:
            return GaussCoeff.zero()
        raise NonGaussianSum("geometric tail outside the fragment")
    if M % abs(A):
        raise NonGaussianSum(f"period M/|A| not integral (A={A}, M={M})")
    T = M // abs(A)
    if T % 4:
        raise NonGaussianSum(f"period {T} not divisible by 4 (A={A}, M={M})")
    if window % T:
        raise NonGaussianSum(f"window {window} not a multiple of the period {T}")
    mult = window // T
    if B % A == 0:
        sgn = 1 if A > 0 else -1
        out = GaussCoeff.rational(mult) * sqrt_with_scale(Fraction(T), domain, params)
        out = out * GaussCoeff.e8_power(sgn)
        out = out * GaussCoeff.phase_of(Fraction(-B * B, 2 * A * M), domain)
        return out * phase_c
    # block factors e(k B/|A|): telescope to zero iff mult*B = 0 mod |A|
    if (mult * B) % A == 0:
        return GaussCoeff.zero()
    raise NonGaussianSum("partial quasi-period blocks outside the fragment")
