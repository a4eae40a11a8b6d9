"""Parameter tower and exact arithmetic in F_p.

The engine computes over a prime field F_p whose multiplicative group
contains a root of unity of order 2M for every modulus M the calculus
touches.  A tower of divisibility-linked integers

    l = m**2,  j = m*k,  i = j**2,  N_v = l,  N_u = l*i

fixes the two domain sizes, and the prime is the smallest p with
8*N_u | p - 1, so that e(1/8) and every e(n/2M) with M | 4*N_u exist.
Both N_v and N_u are perfect squares (sqrt(N_v) = m, sqrt(N_u) = m*j),
which keeps all 1/sqrt(N) normalisations exact.

All residues are plain Python ints in [0, p); ``FpElem`` is an alias.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

FpElem = int

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ArithError(ValueError):
    pass


class SearchExhausted(ArithError):
    """No prime found within the candidate budget."""


class IncompatiblePhase(ArithError):
    """Phase denominator does not divide p - 1."""


class DomainMismatch(ArithError):
    """U-scale and V-scale objects combined outside the Wick map."""


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (fixed base set)."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation by trial division (inputs here are smooth or small)."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_split(n: int) -> tuple[int, int]:
    """n = s**2 * r with r squarefree; returns (s, r).  Requires n >= 1."""
    if n < 1:
        raise ArithError("squarefree_split needs a positive integer")
    s, r = 1, 1
    for q, e in factorize(n).items():
        s *= q ** (e // 2)
        if e % 2:
            r *= q
    return s, r


def solve_congruence(a: int, b: int, m: int) -> tuple[int, int] | None:
    """Solve a*x = b (mod m); returns (step, base) with x = base + step*Z, or None.

    step = m // gcd(a, m); base is the least nonnegative representative.
    """
    if m <= 0:
        raise ArithError("modulus must be positive")
    a %= m
    b %= m
    if a == 0:
        return (1, 0) if b == 0 else None
    import math

    g = math.gcd(a, m)
    if b % g:
        return None
    m1 = m // g
    x0 = (b // g) * pow(a // g, -1, m1) % m1
    return (m1, x0)


@dataclass(frozen=True)
class ParamSpec:
    """Input to the tower search.

    ``seed`` is reserved; the search is fully deterministic.
    """

    m_base: int = 12
    k_mult: int = 2
    prime_search_limit: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m_base < 2 or self.m_base % 2:
            raise ArithError("m_base must be an even integer >= 2 (so 4 | m_base**2)")
        if self.k_mult < 1:
            raise ArithError("k_mult must be >= 1")
        if self.prime_search_limit < 1:
            raise ArithError("prime_search_limit must be >= 1")


@dataclass(frozen=True)
class Phase:
    """A rational phase q (mod 1) naming the root of unity e(q) = exp_p((p-1)q).

    ``domain`` tags which scale the phase lives on: 'V' (quantum/Hermitian),
    'U' (statistical/Euclidean) or None for scale-free roots of unity.
    """

    q: Fraction
    domain: str | None = None

    def __post_init__(self) -> None:
        if self.domain not in (None, "U", "V"):
            raise ArithError("domain tag must be 'U', 'V' or None")
        q = Fraction(self.q) % 1
        object.__setattr__(self, "q", q)
        # canonical: q = 0 carries no scale; nonzero untagged phases are
        # scale-free roots of unity and behave like the V (unit-circle) rule
        if q == 0:
            object.__setattr__(self, "domain", None)
        elif self.domain is None:
            object.__setattr__(self, "domain", "V")

    @property
    def balanced(self) -> Fraction:
        """Representative in [-1/2, 1/2) -- used by the real (U-scale) limit."""
        return self.q - 1 if self.q >= Fraction(1, 2) else self.q

    def __add__(self, other: "Phase") -> "Phase":
        if self.domain is not None and other.domain is not None and self.domain != other.domain:
            raise DomainMismatch("cannot combine U-scale and V-scale phases")
        return Phase(self.q + other.q, self.domain or other.domain)

    def __neg__(self) -> "Phase":
        return Phase(-self.q, self.domain)

    def is_zero(self) -> bool:
        return self.q == 0


class Params:
    """The realised tower.  Immutable after construction apart from a lazy
    cache of xi_2M roots (ep^((p-1)/2M)), which is safe to share."""

    def __init__(self, m: int, k_mult: int, p: int, epsilon: int):
        self.m = m
        self.k_mult = k_mult
        self.l = m * m
        self.j = m * k_mult
        self.i = self.j * self.j
        self.N_v = self.l
        self.N_u = self.l * self.i
        self.p = p
        self.epsilon = epsilon
        self._xi: dict[int, int] = {}
        self._sqrt_cache: dict[int, int] = {}
        self._p1_factors: dict[int, int] | None = None
        self._validate()

    def _validate(self) -> None:
        if (self.p - 1) % (8 * self.N_u):
            raise ArithError("8*N_u must divide p - 1")
        if self.p >= 1 << 63:
            raise ArithError("p must fit in 63 bits")
        if self.N_v % 4:
            raise ArithError("4 must divide N_v")

    # -- characters ---------------------------------------------------------

    def exp_p(self, eta: int) -> FpElem:
        """epsilon**eta mod p; kernel exactly (p-1)Z."""
        return pow(self.epsilon, eta % (self.p - 1), self.p)

    def xi(self, two_m: int) -> FpElem:
        """The canonical 2M-th root of unity, epsilon**((p-1)/2M)."""
        if two_m <= 0 or (self.p - 1) % two_m:
            raise IncompatiblePhase(f"order {two_m} does not divide p - 1")
        w = self._xi.get(two_m)
        if w is None:
            w = pow(self.epsilon, (self.p - 1) // two_m, self.p)
            self._xi[two_m] = w
        return w

    def char_e(self, phase: Phase | Fraction) -> FpElem:
        """e(q) = exp_p((p-1) * q); multiplicative in q."""
        q = phase.q if isinstance(phase, Phase) else Fraction(phase) % 1
        if (self.p - 1) % q.denominator:
            raise IncompatiblePhase(
                f"phase denominator {q.denominator} incompatible with p - 1"
            )
        return pow(self.xi(q.denominator), q.numerator, self.p) if q else 1

    # -- orders and square roots -------------------------------------------

    def p1_factorization(self) -> dict[int, int]:
        if self._p1_factors is None:
            self._p1_factors = factorize(self.p - 1)
        return self._p1_factors

    def element_order(self, x: FpElem) -> int:
        """Least d >= 1 with x**d = 1, via the factorisation of p - 1."""
        x %= self.p
        if x == 0:
            raise ArithError("zero element has no multiplicative order")
        order = self.p - 1
        for q in self.p1_factorization():
            while order % q == 0 and pow(x, order // q, self.p) == 1:
                order //= q
        return order

    def sqrt_canonical(self, M: int) -> FpElem:
        """Canonical square root of M mod p: e(-1/8) * sum_{0<n<=M} xi_2M^(n*n).

        This is the image of the positive real sqrt(M) under the ring
        homomorphism Z[zeta_2M] -> F_p, zeta |-> xi_2M, so products of
        canonical roots agree with canonical roots of products.
        """
        if M % 4:
            raise ArithError("sqrt_canonical needs 4 | M")
        cached = self._sqrt_cache.get(M)
        if cached is not None:
            return cached
        xi = self.xi(2 * M)  # raises if 2M does not divide p - 1
        p = self.p
        total = 0
        x = xi  # xi^(1)
        r = pow(xi, 3, p)  # ratio into n=2: xi^(2n+1)
        rr = xi * xi % p
        for _ in range(M):
            total = (total + x) % p
            x = x * r % p
            r = r * rr % p
        root = total * self.char_e(Fraction(-1, 8)) % p
        if root * root % p != M % p:
            raise ArithError(f"canonical sqrt failed for M={M}")  # unreachable if tower valid
        self._sqrt_cache[M] = root
        return root

    def sqrt_squarefree(self, r: int) -> FpElem:
        """Canonical sqrt of a squarefree r >= 1, via sqrt_canonical(4r)/2."""
        if r == 1:
            return 1
        half = pow(2, -1, self.p)
        return self.sqrt_canonical(4 * r) * half % self.p

    def tonelli_shanks(self, n: int) -> FpElem | None:
        """Any square root of n mod p (branch not canonical); cross-check only."""
        p = self.p
        n %= p
        if n == 0:
            return 0
        if pow(n, (p - 1) // 2, p) != 1:
            return None
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        c = pow(z, q, p)
        x = pow(n, (q + 1) // 2, p)
        t = pow(n, q, p)
        m = s
        while t != 1:
            t2, k = t * t % p, 1
            while t2 != 1:
                t2 = t2 * t2 % p
                k += 1
            b = pow(c, 1 << (m - k - 1), p)
            x = x * b % p
            c = b * b % p
            t = t * c % p
            m = k
        return x

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict[str, int]:
        return {
            "m": self.m,
            "k_mult": self.k_mult,
            "l": self.l,
            "j": self.j,
            "i": self.i,
            "N_v": self.N_v,
            "N_u": self.N_u,
            "p": self.p,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        params = cls(int(d["m"]), int(d["k_mult"]), int(d["p"]), int(d["epsilon"]))
        for key in ("l", "j", "i", "N_v", "N_u"):
            if key in d and int(d[key]) != getattr(params, key):
                raise ArithError(f"inconsistent field {key!r} in serialized Params")
        return params

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_toml(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in sorted(self.to_dict().items()))

    def __repr__(self) -> str:
        return f"Params(m={self.m}, k={self.k_mult}, N_v={self.N_v}, N_u={self.N_u}, p={self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Params) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash((self.m, self.k_mult, self.p, self.epsilon))


def load_params(text: str) -> Params:
    """Parse a Params document, JSON or TOML (flat integer fields)."""
    text = text.strip()
    if text.startswith("{"):
        return Params.from_dict(json.loads(text))
    fields: dict[str, int] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        if not _:
            raise ArithError(f"bad TOML line in Params document: {line!r}")
        fields[key.strip()] = int(value.strip())
    return Params.from_dict(fields)


def smallest_primitive_root(p: int, p1_factors: dict[int, int]) -> int:
    primes = list(p1_factors)
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in primes):
            return g
        g += 1


@lru_cache(maxsize=None)
def _find_params_cached(m_base: int, k_mult: int, limit: int) -> Params:
    modulus = 8 * m_base * m_base * (m_base * k_mult) ** 2 * m_base * m_base
    # modulus = 8 * N_u with N_u = l*i = m^4 * k^2 ... computed explicitly below
    l = m_base * m_base
    i = (m_base * k_mult) ** 2
    modulus = 8 * l * i
    p = 0
    for c in range(1, limit + 1):
        cand = modulus * c + 1
        if is_probable_prime(cand):
            p = cand
            break
    if not p:
        raise SearchExhausted(
            f"no prime = 1 mod {modulus} among the first {limit} candidates"
        )
    if p >= 1 << 63:
        raise SearchExhausted("smallest admissible prime exceeds 63 bits")
    factors = factorize(modulus)
    c_found = (p - 1) // modulus
    for q, e in factorize(c_found).items():
        factors[q] = factors.get(q, 0) + e
    epsilon = smallest_primitive_root(p, factors)
    params = Params(m_base, k_mult, p, epsilon)
    params._p1_factors = factors
    return params


def find_params(spec: ParamSpec) -> Params:
    """Deterministic tower search: smallest prime p = 1 (mod 8*N_u) by
    ascending scan over 8*N_u*c + 1, then the smallest primitive root."""
    return _find_params_cached(spec.m_base, spec.k_mult, spec.prime_search_limit)


def default_params() -> Params:
    """The default desk-scale tower (m=12, k=2): N_v=144, N_u=82944."""
    return find_params(ParamSpec())


# Convenience functional forms mirroring the operation names.

def exp_p(params: Params, eta: int) -> FpElem:
    return params.exp_p(eta)


def char_e(params: Params, phase: Phase | Fraction) -> FpElem:
    return params.char_e(phase)


def element_order(params: Params, x: FpElem) -> int:
    return params.element_order(x)


def sqrt_canonical(params: Params, M: int) -> FpElem:
    return params.sqrt_canonical(M)
