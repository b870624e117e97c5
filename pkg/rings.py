"""
Truncated q-base rings

Elements of Z/p^N[v]/(v^M) with v = q^(1/p^s) - 1, carrying effective
precision (eff_N, eff_M); the Frobenius lift and delta-structure; q-analogues
and the special elements mu, mu_j, xi_r, [p]_q; exact division with certified
precision; and truncated divided-power rings in mu in two bases.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

from errors import (
    DenominatorTooDeep,
    NoSolution,
    NotDivisible,
    NotInPDIdeal,
    PrecisionExhausted,
    PreconditionViolation,
    SchemaError,
    UnrecognizedDivisor,
)
from linalg import solve_mod, valuations

LOGGER = logging.getLogger(__name__)

Exponent = Union[int, Fraction]


def gbinom(e: int, i: int) -> int:
    """Binomial coefficient binom(e, i) for any integer e and i >= 0."""
    num, den = 1, 1
    for k in range(i):
        num *= e - k
        den *= k + 1
    return num // den


def vp(n: int, p: int, cap: int = None) -> int:
    """p-adic valuation of an integer, capped for zero."""
    if n == 0:
        return cap if cap is not None else 10 ** 9
    v = 0
    while n % p == 0:
        n //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


def frac_mod(x: Fraction, p: int, N: int) -> int:
    """Image of a p-integral rational in Z/p^N."""
    x = Fraction(x)
    if x.denominator % p == 0:
        raise NotDivisible(f"{x} is not p-integral", {"value": str(x), "p": p})
    m = p ** N
    return (x.numerator * pow(x.denominator, -1, m)) % m


def split_exponent(k: Exponent, p: int) -> Tuple[int, int]:
    """Write k = a / p^j with j minimal."""
    k = Fraction(k)
    den = k.denominator
    j = 0
    while den % p == 0:
        den //= p
        j += 1
    if den != 1:
        raise DenominatorTooDeep(f"exponent {k} has a denominator prime to p", {"exponent": str(k)})
    return k.numerator, j


def _poly_mul(a: Sequence[int], b: Sequence[int], M: int) -> List[int]:
    out = [0] * M
    for i, x in enumerate(a[:M]):
        if x == 0:
            continue
        for j, y in enumerate(b[: M - i]):
            if y:
                out[i + j] += x * y
    return out


def _poly_pow_binomial(e: int, M: int) -> List[int]:
    """(1 + v)^e truncated at v^M, e any integer."""
    return [gbinom(e, i) for i in range(M)]


@dataclass(frozen=True)
class RingParams:
    """Parameters (p, N, s, M) of the ring Z/p^N[v]/(v^M), v = q^(1/p^s) - 1."""

    p: int
    N: int
    s: int = 0
    M: int = 6

    def __post_init__(self):
        if not isinstance(self.p, int) or not isprime(self.p):
            raise PreconditionViolation(f"p={self.p} is not prime", {"p": self.p})
        if self.N < 1 or self.M < 1 or self.s < 0:
            raise PreconditionViolation("precision bounds must be positive", {"N": self.N, "M": self.M, "s": self.s})

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    # Element factories
    def element(self, coeffs: Sequence[int], eff_N: int = None, eff_M: int = None, exact: bool = False) -> "QElem":
        return QElem.make(self, list(coeffs), self.N if eff_N is None else eff_N, self.M if eff_M is None else eff_M, exact)

    def zero(self) -> "QElem":
        return self.element([0] * self.M, exact=True)

    def one(self) -> "QElem":
        return self.from_int(1)

    def from_int(self, n: int) -> "QElem":
        return self.element([n] + [0] * (self.M - 1), exact=True)

    def v(self) -> "QElem":
        return self.element([0, 1] + [0] * (self.M - 2) if self.M > 1 else [0], exact=True)

    def q(self) -> "QElem":
        return self.q_power(1)

    def q_power(self, k: Exponent) -> "QElem":
        """q^k = (1+v)^(k p^s); k may be a fraction with denominator dividing p^s."""
        a, j = split_exponent(k, self.p)
        if j > self.s:
            raise DenominatorTooDeep(f"q^{k} needs level {j} > s={self.s}", {"exponent": str(k), "s": self.s})
        return self.element(_poly_pow_binomial(a * self.p ** (self.s - j), self.M), exact=True)

    def _root_analog(self, a: int, j: int) -> "QElem":
        # sum_{i<a} q^{i/p^j} = ((1 + mu_j)^a - 1) / mu_j
        if j > self.s:
            raise DenominatorTooDeep(f"q^(1/{self.p}^{j}) needs level {j} > s={self.s}", {"level": j, "s": self.s})
        mu_j = _poly_pow_binomial(self.p ** (self.s - j), self.M)
        mu_j[0] -= 1
        total = [0] * self.M
        power = [1] + [0] * (self.M - 1)
        for i in range(1, self.M + 1):
            c = gbinom(a, i)
            if c:
                total = [t + c * x for t, x in zip(total, power)]
            power = _poly_mul(power, mu_j, self.M)
            if not any(power):
                break
        return self.element(total, exact=True)

    def q_analog(self, k: Exponent) -> "QElem":
        """[k]_q in closed form; for k = a/p^j this is sum_{i<a} q^{i/p^j}."""
        a, j = split_exponent(k, self.p)
        return self._root_analog(a, j)

    def mu(self) -> "QElem":
        return self.mu_level(0)

    def mu_level(self, j: int) -> "QElem":
        if j > self.s:
            raise DenominatorTooDeep(f"mu_{j} needs level {j} > s={self.s}", {"level": j, "s": self.s})
        coeffs = _poly_pow_binomial(self.p ** (self.s - j), self.M)
        coeffs[0] -= 1
        return self.element(coeffs, exact=True)

    def xi(self, r: int) -> "QElem":
        """xi_r = sum_{a<p^r} q^{a/p^r}, so that xi_r * mu_r = mu."""
        return self._root_analog(self.p ** r, r)

    def tilde_xi(self) -> "QElem":
        return self.q_analog(self.p)

    def from_json(self, data: Dict) -> "QElem":
        return QElem.from_json(data)

    def to_json(self) -> Dict:
        return {"p": self.p, "N": self.N, "s": self.s, "M": self.M}


@dataclass(frozen=True, eq=False)
class QElem:
    """Element of a truncated q-base ring with effective precision."""

    params: RingParams
    coeffs: Tuple[int, ...]
    eff_N: int
    eff_M: int
    exact: bool = False

    @staticmethod
    def make(params: RingParams, raw: Sequence[int], eff_N: int, eff_M: int, exact: bool = False) -> "QElem":
        eff_N = min(eff_N, params.N)
        eff_M = min(eff_M, params.M)
        if eff_N < 1 or eff_M < 1:
            raise PrecisionExhausted("no precision left", {"eff_N": eff_N, "eff_M": eff_M})
        raw = list(raw)[: params.M] + [0] * max(0, params.M - len(raw))
        mod = params.p ** eff_N
        exact = (exact and eff_N == params.N and eff_M == params.M
                 and all(0 <= c < mod for c in raw))
        coeffs = tuple(int(c) % mod if i < eff_M else 0 for i, c in enumerate(raw))
        return QElem(params, coeffs, eff_N, eff_M, exact)

    # Precision
    def with_precision(self, eff_N: int, eff_M: int) -> "QElem":
        return QElem.make(self.params, self.coeffs, min(eff_N, self.eff_N), min(eff_M, self.eff_M), self.exact)

    def _joint(self, other: "QElem") -> Tuple[int, int]:
        return min(self.eff_N, other.eff_N), min(self.eff_M, other.eff_M)

    def _coerce(self, other) -> "QElem":
        if isinstance(other, QElem):
            if other.params != self.params:
                raise PreconditionViolation("mixed ring parameters", {"left": self.params.to_json(), "right": other.params.to_json()})
            return other
        if isinstance(other, (int, np.integer)):
            return self.params.from_int(int(other))
        return NotImplemented

    # Arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n, m = self._joint(other)
        raw = [a + b for a, b in zip(self.coeffs, other.coeffs)]
        return QElem.make(self.params, raw, n, m, self.exact and other.exact)

    __radd__ = __add__

    def __neg__(self):
        return QElem.make(self.params, [-c for c in self.coeffs], self.eff_N, self.eff_M, False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n, m = self._joint(other)
        raw = [a - b for a, b in zip(self.coeffs, other.coeffs)]
        return QElem.make(self.params, raw, n, m, self.exact and other.exact)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n, m = self._joint(other)
        raw = _poly_mul(self.coeffs, other.coeffs, m)
        return QElem.make(self.params, raw, n, m, self.exact and other.exact)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.params.one().with_precision(self.eff_N, self.eff_M), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        n, m = self._joint(other)
        mod = self.params.p ** n
        return all((a - b) % mod == 0 for a, b in list(zip(self.coeffs, other.coeffs))[:m])

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.params.p != 0

    def valuation(self) -> int:
        """min over coefficients of v_p, capped at eff_N."""
        return min(vp(c, self.params.p, self.eff_N) for c in self.coeffs[: self.eff_M])

    def v_order(self) -> int:
        """Index of the lowest non-zero coefficient, eff_M for zero."""
        for i, c in enumerate(self.coeffs[: self.eff_M]):
            if c:
                return i
        return self.eff_M

    def inverse(self) -> "QElem":
        if not self.is_unit():
            raise NotDivisible("element is not a unit", {"element": self.to_json()})
        m = self.params.p ** self.eff_N
        c0_inv = pow(self.coeffs[0], -1, m)
        w = [(-c * c0_inv) for c in self.coeffs]
        w[0] = 0
        total = [1] + [0] * (self.params.M - 1)
        term = list(total)
        for _ in range(1, self.eff_M):
            term = [c % m for c in _poly_mul(term, w, self.eff_M)]
            if not any(term):
                break
            total = [a + b for a, b in zip(total, term)]
        return QElem.make(self.params, [c0_inv * t for t in total], self.eff_N, self.eff_M, False)

    def scale(self, c: int) -> "QElem":
        return QElem.make(self.params, [c * x for x in self.coeffs], self.eff_N, self.eff_M, self.exact and c >= 0)

    # Frobenius and delta
    def frobenius(self) -> "QElem":
        """Ring endomorphism v -> (1+v)^p - 1, so q^(1/p^s) -> q^(1/p^(s-1))."""
        return QElem.make(self.params, self._frobenius_lift(), self.eff_N, self.eff_M, self.exact)

    def _frobenius_lift(self) -> List[int]:
        M = self.eff_M
        w = _poly_pow_binomial(self.params.p, M)
        w[0] -= 1
        acc = [0] * M
        for c in reversed(self.coeffs[:M]):
            acc = _poly_mul(acc, w, M)
            acc[0] += c
        return acc

    def delta(self) -> "QElem":
        """(phi(x) - x^p) / p on the integral lift of the stored representatives."""
        p, M = self.params.p, self.eff_M
        phi = self._frobenius_lift()
        power = [1] + [0] * (M - 1)
        for _ in range(p):
            power = _poly_mul(power, list(self.coeffs[:M]), M)
        diff = [a - b for a, b in zip(phi, power)]
        if any(c % p for c in diff):
            raise NotDivisible("Frobenius lift congruence failed", {"element": self.to_json()})
        eff_N = self.eff_N if self.exact else self.eff_N - 1
        if eff_N < 1:
            raise PrecisionExhausted("delta needs one more p-adic digit", {"eff_N": self.eff_N})
        return QElem.make(self.params, [c // p for c in diff], eff_N, M, self.exact)

    # Division
    def mult_matrix(self, M0: int) -> np.ndarray:
        """Matrix of y -> self * y on coefficient vectors of length M0."""
        A = np.zeros((M0, M0), dtype=object)
        for i in range(M0):
            for j in range(i + 1):
                A[i, j] = self.coeffs[i - j]
        return A

    def divide_exact(self, g: "QElem") -> "QElem":
        return divide_exact(self, g)

    # Serialization
    def to_json(self) -> Dict:
        return {"p": self.params.p, "N": self.params.N, "s": self.params.s, "M": self.params.M,
                "effN": self.eff_N, "effM": self.eff_M, "coeffs": list(self.coeffs)}

    @staticmethod
    def from_json(data: Dict) -> "QElem":
        try:
            params = RingParams(int(data["p"]), int(data["N"]), int(data.get("s", 0)), int(data["M"]))
            coeffs = [int(c) for c in data["coeffs"]]
            return QElem.make(params, coeffs, int(data.get("effN", params.N)), int(data.get("effM", params.M)))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad QElem JSON: {e}", {"data": data})

    def __repr__(self) -> str:
        terms = [f"{c}*v^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return f"QElem({' + '.join(terms) or '0'} | p={self.params.p} N={self.eff_N} M={self.eff_M})"


def divide_exact(x: QElem, g: QElem) -> QElem:
    """Solve g*y = x and certify the precision of y.

    Content of g is (a, b): b the v-order, a the valuation of that coefficient.
    The nominal result precision is (eff_N - a, eff_M - b); the v-precision is
    lowered further until every solution of the truncated system agrees to
    the nominal p-adic precision.
    """
    p = x.params.p
    N0, M0 = x._joint(g)
    mod = p ** N0
    gc = [c % mod for c in g.coeffs[:M0]]
    b = next((i for i, c in enumerate(gc) if c), None)
    if b is None:
        raise UnrecognizedDivisor("divisor vanishes at the available precision", {"divisor": g.to_json()})
    a = vp(gc[b], p, N0)
    A = g.mult_matrix(M0)
    try:
        y, kernel = solve_mod(A, list(x.coeffs[:M0]), p, N0)
    except NoSolution as e:
        raise NotDivisible("residual non-zero within precision",
                           {"dividend": x.to_json(), "divisor": g.to_json(), **e.details})
    target_N = N0 - a
    M1 = M0 - b
    if kernel:
        K = np.column_stack(kernel)
        vals = valuations(K, p, N0)
        while M1 >= 1 and int(vals[:M1].min()) < target_N:
            M1 -= 1
        if M1 < 1:
            M1 = M0 - b
            target_N = int(vals[:M1].min())
    if target_N < 1 or M1 < 1:
        raise PrecisionExhausted("division leaves no certified digits",
                                 {"dividend": x.to_json(), "divisor": g.to_json()})
    LOGGER.debug(f"divide_exact: content (a={a}, b={b}), precision ({N0},{M0}) -> ({target_N},{M1})")
    return QElem.make(x.params, [int(c) for c in y], target_N, M1)


def solve_multiple(x: QElem, g: QElem) -> QElem:
    """One solution y of g*y = x at the joint precision of x and g.

    The digits are not certified: y is fixed only up to the annihilator of g,
    and g*y == x holds on the full representative. Raises NotDivisible.
    """
    N0, M0 = x._joint(g)
    try:
        y, _ = solve_mod(g.mult_matrix(M0), list(x.coeffs[:M0]), x.params.p, N0)
    except NoSolution as e:
        raise NotDivisible("residual non-zero within precision",
                           {"dividend": x.to_json(), "divisor": g.to_json(), **e.details})
    return QElem.make(x.params, [int(c) for c in y], N0, M0)


def ideal_contains(x: QElem, gens: Sequence[QElem]) -> bool:
    """Membership of x in the ideal generated by gens, at the joint precision."""
    if not gens:
        return x.is_zero()
    N0, M0 = x.eff_N, x.eff_M
    for g in gens:
        N0, M0 = min(N0, g.eff_N), min(M0, g.eff_M)
    A = np.hstack([g.mult_matrix(M0) for g in gens])
    try:
        solve_mod(A, list(x.coeffs[:M0]), x.params.p, N0)
    except NoSolution:
        return False
    return True


def q_analog(k: Exponent, params: RingParams) -> QElem:
    return params.q_analog(k)


def mu(params: RingParams) -> QElem:
    return params.mu()


def mu_level(j: int, params: RingParams) -> QElem:
    return params.mu_level(j)


def xi(r: int, params: RingParams) -> QElem:
    return params.xi(r)


def tilde_xi(params: RingParams) -> QElem:
    return params.tilde_xi()


def frobenius(x: QElem) -> QElem:
    return x.frobenius()


def delta(x: QElem) -> QElem:
    return x.delta()


# ---------------------------------------------------------------------------
# Divided-power rings in mu
# ---------------------------------------------------------------------------

BASES = ("divided", "crystalline")


@lru_cache(maxsize=None)
def _scale(p: int, basis: str, n: int) -> int:
    # mu^n = scale(n) * e_n for the basis element e_n
    if basis == "divided":
        f = 1
        for k in range(2, n + 1):
            f *= k
        return f
    m = n // (p - 1)
    f = 1
    for k in range(2, m + 1):
        f *= k
    return p ** m * f


@lru_cache(maxsize=None)
def _structure_constants(p: int, N: int, K: int, basis: str) -> Tuple[Tuple[int, ...], ...]:
    mod = p ** N
    table = []
    for a in range(K):
        row = []
        for b in range(K - a):
            row.append((_scale(p, basis, a + b) // (_scale(p, basis, a) * _scale(p, basis, b))) % mod)
        table.append(tuple(row))
    return tuple(table)


@dataclass(frozen=True)
class PDParams:
    """Truncated divided-power ring in mu over Z/p^N.

    basis="divided" has basis mu^[n]; basis="crystalline" has basis
    mu^n / (p^m m!) with m = floor(n/(p-1)), the ring generated by mu and the
    divided powers of mu^(p-1)/p. Both are truncated at degree K.
    """

    p: int
    N: int
    K: int
    basis: str = "crystalline"

    def __post_init__(self):
        if not isinstance(self.p, int) or not isprime(self.p):
            raise PreconditionViolation(f"p={self.p} is not prime", {"p": self.p})
        if self.N < 1 or self.K < 1:
            raise PreconditionViolation("N and K must be positive", {"N": self.N, "K": self.K})
        if self.basis not in BASES:
            raise PreconditionViolation(f"unknown PD basis {self.basis!r}", {"basis": self.basis})

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def scale(self, n: int) -> int:
        return _scale(self.p, self.basis, n)

    def element(self, coeffs: Sequence[int]) -> "PDElem":
        coeffs = list(coeffs)[: self.K] + [0] * max(0, self.K - len(coeffs))
        return PDElem(self, tuple(int(c) % self.modulus for c in coeffs))

    def zero(self) -> "PDElem":
        return self.element([])

    def one(self) -> "PDElem":
        return self.from_int(1)

    def from_int(self, n: int) -> "PDElem":
        return self.element([n])

    def mu_power(self, n: int) -> "PDElem":
        if n >= self.K:
            return self.zero()
        c = [0] * self.K
        c[n] = self.scale(n)
        return self.element(c)

    def mu(self) -> "PDElem":
        return self.mu_power(1)

    def mu_divided(self, n: int) -> "PDElem":
        """mu^[n] = mu^n / n!."""
        if n >= self.K:
            return self.zero()
        c = [0] * self.K
        c[n] = frac_mod(Fraction(self.scale(n), _scale(self.p, "divided", n)), self.p, self.N)
        return self.element(c)

    def q_power(self, k: int) -> "PDElem":
        """(1 + mu)^k."""
        return self.element([gbinom(k, j) * self.scale(j) for j in range(self.K)])

    def q_analog(self, k: int) -> "PDElem":
        """((1 + mu)^k - 1) / mu = sum_{j>=1} binom(k, j) mu^(j-1)."""
        return self.element([gbinom(k, j + 1) * self.scale(j) for j in range(self.K)])

    def to_json(self) -> Dict:
        return {"p": self.p, "N": self.N, "K": self.K, "basis": self.basis}


@dataclass(frozen=True, eq=False)
class PDElem:
    """Element of a truncated divided-power ring."""

    params: PDParams
    coeffs: Tuple[int, ...]

    def _coerce(self, other):
        if isinstance(other, PDElem):
            if other.params != self.params:
                raise PreconditionViolation("mixed PD parameters")
            return other
        if isinstance(other, (int, np.integer)):
            return self.params.from_int(int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.params.element([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return self.params.element([-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.params.element([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        P = self.params
        table = _structure_constants(P.p, P.N, P.K, P.basis)
        out = [0] * P.K
        for a, x in enumerate(self.coeffs):
            if not x:
                continue
            for b, y in enumerate(other.coeffs[: P.K - a]):
                if y:
                    out[a + b] += x * y * table[a][b]
        return P.element(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = self.params.one()
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def in_pd_ideal(self) -> bool:
        return self.coeffs[0] == 0

    def order(self) -> int:
        """Smallest basis index with non-zero coefficient, K for zero."""
        return next((i for i, c in enumerate(self.coeffs) if c), self.params.K)

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.params.p != 0

    def inverse(self) -> "PDElem":
        if not self.is_unit():
            raise NotDivisible("PD element is not a unit")
        P = self.params
        c0_inv = pow(self.coeffs[0], -1, P.modulus)
        w = self * c0_inv - 1
        total, term = P.one(), P.one()
        for _ in range(1, P.K):
            term = term * (-w)
            if term.is_zero():
                break
            total = total + term
        return total * c0_inv

    def to_basis(self, basis: str) -> "PDElem":
        """Re-express in another basis; crystalline -> divided is always integral.

        Raises NotDivisible when a coefficient leaves the target ring.
        """
        P = self.params
        target = PDParams(P.p, P.N, P.K, basis)
        out = [frac_mod(Fraction(c * target.scale(n), P.scale(n)), P.p, P.N) if c else 0
               for n, c in enumerate(self.coeffs)]
        return target.element(out)

    def to_json(self) -> Dict:
        P = self.params
        return {"p": P.p, "N": P.N, "K": P.K, "basis": P.basis, "coeffs": list(self.coeffs)}

    @staticmethod
    def from_json(data: Dict) -> "PDElem":
        try:
            P = PDParams(int(data["p"]), int(data["N"]), int(data["K"]), data.get("basis", "divided"))
            return P.element([int(c) for c in data["coeffs"]])
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad PDElem JSON: {e}", {"data": data})

    def __repr__(self) -> str:
        return f"PDElem({list(self.coeffs)} | {self.params.basis} p={self.params.p} N={self.params.N} K={self.params.K})"


def pd_gamma_basis(P: PDParams, n: int, k: int) -> PDElem:
    """gamma_k of the n-th basis element."""
    if k == 0:
        return P.one()
    if n == 0:
        raise NotInPDIdeal("divided powers of a unit", {"index": n})
    if n * k >= P.K:
        return P.zero()
    ratio = Fraction(P.scale(n * k), P.scale(n) ** k * _scale(P.p, "divided", k))
    if ratio.denominator % P.p == 0:
        raise NotInPDIdeal(f"gamma_{k} of basis element {n} is not integral", {"index": n, "k": k})
    c = [0] * P.K
    c[n * k] = frac_mod(ratio, P.p, P.N)
    return P.element(c)


def pd_divided_power(x: PDElem, k: int) -> PDElem:
    """gamma_k(x) for x in the PD ideal, via gamma_k(a+b) = sum gamma_i(a) gamma_(k-i)(b)."""
    P = x.params
    if not x.in_pd_ideal():
        raise NotInPDIdeal("element has non-zero constant term", {"element": x.to_json()})
    acc = [P.one()] + [P.zero()] * k
    for n, c in enumerate(x.coeffs):
        if not c:
            continue
        # gamma_j(c e_n) = c^j gamma_j(e_n)
        term = [pd_gamma_basis(P, n, j) * pow(c, j, P.modulus) for j in range(k + 1)]
        acc = [sum((acc[i] * term[j - i] for i in range(j + 1)), P.zero()) for j in range(k + 1)]
    return acc[k]


def pd_log_q(P: PDParams) -> PDElem:
    """t = log(1 + mu) = sum_{m>=1} (-1)^(m-1) mu^m / m."""
    out = [0] * P.K
    for m in range(1, P.K):
        out[m] = (-1) ** (m - 1) * frac_mod(Fraction(P.scale(m), m), P.p, P.N)
    return P.element(out)


def pd_exp(u: PDElem) -> PDElem:
    """Truncated exponential sum_n gamma_n(u)."""
    P = u.params
    if not u.in_pd_ideal():
        raise NotInPDIdeal("exp needs an element of the PD ideal", {"element": u.to_json()})
    total = P.zero()
    for n in range(P.K):
        total = total + pd_divided_power(u, n)
    return total


@dataclass
class MuDivision:
    """Solution of mu*x = y together with generators of ann(mu)."""

    solution: PDElem
    ambiguity: List[PDElem] = field(default_factory=list)

    def ambiguous_below(self, K: int) -> bool:
        return any(g.order() < K for g in self.ambiguity)


def pd_solve_mu(y: PDElem) -> MuDivision:
    P = y.params
    p, N = P.p, P.N
    if y.coeffs[0] != 0:
        raise NoSolution("constant term is not divisible by mu", {"element": y.to_json()})
    x = [0] * P.K
    ambiguity = []
    for n in range(P.K - 1):
        f = P.scale(n + 1) // P.scale(n)
        e = vp(f, p, N)
        target = y.coeffs[n + 1]
        if target % (p ** e) != 0:
            raise NoSolution("coefficient not divisible in the PD ring", {"index": n + 1, "exponent": e})
        if e < N:
            unit = (f // p ** e) % P.modulus
            x[n] = (target // p ** e) * pow(unit, -1, P.modulus)
        if e > 0:
            g = [0] * P.K
            g[n] = p ** (N - e) if e < N else 1
            ambiguity.append(P.element(g))
    top = [0] * P.K
    top[P.K - 1] = 1
    ambiguity.append(P.element(top))
    return MuDivision(P.element(x), ambiguity)


def t_over_mu(P: PDParams) -> PDElem:
    """t / mu = sum_{m>=1} (-1)^(m-1) mu^(m-1) / m, a unit in the crystalline basis."""
    out = [0] * P.K
    for m in range(1, P.K + 1):
        try:
            out[m - 1] = (-1) ** (m - 1) * frac_mod(Fraction(P.scale(m - 1), m), P.p, P.N)
        except NotDivisible:
            raise NoSolution(f"mu^{m - 1}/{m} is not in the {P.basis} ring", {"m": m})
    return P.element(out)


def verify_log_identity(p: int, N: int, K: int, bound: int = 16) -> bool:
    """sum T^[m] prod_{j<m} (X - j) == sum (log(1+T))^[m] X^m, PD in T, X truncated at K."""
    if K > bound:
        raise PreconditionViolation(f"K={K} exceeds the configured bound {bound}", {"K": K, "bound": bound})
    P = PDParams(p, N, K, "divided")
    mod = P.modulus
    lhs = np.zeros((K, K), dtype=object)
    falling = [1]
    for m in range(K):
        for b, c in enumerate(falling[:K]):
            lhs[m, b] = c % mod
        # falling *= (X - m)
        nxt = [0] * (len(falling) + 1)
        for b, c in enumerate(falling):
            nxt[b + 1] += c
            nxt[b] -= m * c
        falling = nxt
    t = pd_log_q(P)
    rhs = np.zeros((K, K), dtype=object)
    for m in range(K):
        g = pd_divided_power(t, m)
        for a, c in enumerate(g.coeffs):
            rhs[a, m] = c % mod
    ok = bool((lhs == rhs).all())
    LOGGER.info(f"log identity p={p} N={N} K={K}: {'ok' if ok else 'MISMATCH'}")
    return ok
