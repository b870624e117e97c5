"""
Framed Laurent algebras

A^box = R[U_1^{+-1}, ..., U_d^{+-1}] over a truncated q-base ring (or a PD ring),
its root extensions of level l (exponents k / p^l) and its Frobenius twist
A^box(1), with the Z^d-action, q-logarithmic derivations, Frobenius maps and
the integral / non-integral decomposition. LaurentMatrix carries the matrix
arithmetic used by the module layers.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from errors import (
    NotDivisible,
    PreconditionViolation,
    SchemaError,
    Singular,
)
from rings import PDElem, PDParams, QElem, RingParams, divide_exact, frac_mod, ideal_contains

LOGGER = logging.getLogger(__name__)

Coeff = Union[QElem, PDElem]
Exp = Tuple[int, ...]


@dataclass(frozen=True)
class AlgebraDesc:
    """Which Laurent algebra: coefficient ring, number of variables, twist and root level."""

    params: Union[RingParams, PDParams]
    d: int
    twist: int = 0
    level: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise PreconditionViolation("need at least one framed variable", {"d": self.d})
        if self.twist not in (0, 1):
            raise PreconditionViolation("twist must be 0 or 1", {"twist": self.twist})
        if self.twist == 1 and self.level != 0:
            raise PreconditionViolation("the Frobenius twist carries integral exponents only", {"level": self.level})
        if self.level < 0 or self.level > getattr(self.params, "s", 0):
            raise PreconditionViolation("root level exceeds the ring's root level", {"level": self.level})
        if isinstance(self.params, PDParams) and self.twist != 0:
            raise PreconditionViolation("PD coefficients only support the untwisted algebra")

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def denom(self) -> int:
        return self.p ** self.level

    def with_(self, twist: int = None, level: int = None) -> "AlgebraDesc":
        return AlgebraDesc(self.params, self.d, self.twist if twist is None else twist,
                           self.level if level is None else level)

    def to_json(self) -> Dict:
        return {"d": self.d, "twist": self.twist, "level": self.level, "ring": self.params.to_json()}

    @staticmethod
    def from_json(data: Dict) -> "AlgebraDesc":
        try:
            ring = data["ring"]
            if "K" in ring:
                params = PDParams(int(ring["p"]), int(ring["N"]), int(ring["K"]), ring.get("basis", "crystalline"))
            else:
                params = RingParams(int(ring["p"]), int(ring["N"]), int(ring.get("s", 0)), int(ring["M"]))
            return AlgebraDesc(params, int(data["d"]), int(data.get("twist", 0)), int(data.get("level", 0)))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad algebra descriptor: {e}", {"data": data})


class LaurentElem:
    """Finitely supported Laurent polynomial; exponent vectors are numerators over p^level."""

    __slots__ = ("desc", "terms")

    def __init__(self, desc: AlgebraDesc, terms: Dict[Exp, Coeff] = None):
        self.desc = desc
        clean = {}
        for k, c in (terms or {}).items():
            if len(k) != desc.d:
                raise PreconditionViolation("exponent vector has the wrong length", {"exp": list(k), "d": desc.d})
            if not c.is_zero():
                clean[tuple(int(x) for x in k)] = c
        self.terms = clean

    # Constructors
    @staticmethod
    def zero(desc: AlgebraDesc) -> "LaurentElem":
        return LaurentElem(desc)

    @staticmethod
    def constant(desc: AlgebraDesc, c: Union[Coeff, int]) -> "LaurentElem":
        if isinstance(c, int):
            c = desc.params.from_int(c)
        return LaurentElem(desc, {(0,) * desc.d: c})

    @staticmethod
    def one(desc: AlgebraDesc) -> "LaurentElem":
        return LaurentElem.constant(desc, 1)

    @staticmethod
    def monomial(desc: AlgebraDesc, exp: Sequence[int], c: Union[Coeff, int] = 1) -> "LaurentElem":
        if isinstance(c, int):
            c = desc.params.from_int(c)
        return LaurentElem(desc, {tuple(exp): c})

    @staticmethod
    def variable(desc: AlgebraDesc, i: int, power: int = 1) -> "LaurentElem":
        """U_i^power (power in units of 1/p^level)."""
        exp = [0] * desc.d
        exp[i - 1] = power * desc.denom
        return LaurentElem.monomial(desc, exp)

    # Levels
    def at_level(self, level: int) -> "LaurentElem":
        if level == self.desc.level:
            return self
        if level < self.desc.level:
            raise PreconditionViolation("cannot lower the root level", {"from": self.desc.level, "to": level})
        f = self.desc.p ** (level - self.desc.level)
        return LaurentElem(self.desc.with_(level=level), {tuple(x * f for x in k): c for k, c in self.terms.items()})

    def _align(self, other: "LaurentElem") -> Tuple["LaurentElem", "LaurentElem"]:
        if other.desc.params != self.desc.params or other.desc.d != self.desc.d or other.desc.twist != self.desc.twist:
            raise PreconditionViolation("mixed Laurent algebras", {"left": self.desc.to_json(), "right": other.desc.to_json()})
        level = max(self.desc.level, other.desc.level)
        return self.at_level(level), other.at_level(level)

    def _coerce(self, other) -> Optional["LaurentElem"]:
        if isinstance(other, LaurentElem):
            return other
        if isinstance(other, (int, QElem, PDElem)):
            return LaurentElem.constant(self.desc, other)
        return None

    def exponent(self, k: Exp) -> Tuple[Fraction, ...]:
        return tuple(Fraction(x, self.desc.denom) for x in k)

    def is_integral(self) -> bool:
        return all(x % self.desc.denom == 0 for k in self.terms for x in k)

    def normalize_level(self) -> "LaurentElem":
        """Lowest level able to hold every exponent."""
        level = self.desc.level
        while level > 0 and all(x % self.desc.p ** (self.desc.level - level + 1) == 0 for k in self.terms for x in k):
            level -= 1
        f = self.desc.p ** (self.desc.level - level)
        return LaurentElem(self.desc.with_(level=level), {tuple(x // f for x in k): c for k, c in self.terms.items()})

    # Arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(other)
        terms = dict(a.terms)
        for k, c in b.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return LaurentElem(a.desc, terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentElem(self.desc, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, QElem, PDElem)):
            return LaurentElem(self.desc, {k: c * other for k, c in self.terms.items()})
        if not isinstance(other, LaurentElem):
            return NotImplemented
        a, b = self._align(other)
        terms: Dict[Exp, Coeff] = {}
        for k1, c1 in a.terms.items():
            for k2, c2 in b.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                c = c1 * c2
                terms[k] = terms[k] + c if k in terms else c
        return LaurentElem(a.desc, terms)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = LaurentElem.one(self.desc)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return False
        a, b = self._align(other)
        zero = a.desc.params.zero()
        for k in set(a.terms) | set(b.terms):
            if not a.terms.get(k, zero) == b.terms.get(k, zero):
                return False
        return True

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.terms.values())

    def coefficient(self, k: Exp) -> Coeff:
        return self.terms.get(tuple(k), self.desc.params.zero())

    def map_coefficients(self, fn: Callable[[Coeff], Coeff]) -> "LaurentElem":
        return LaurentElem(self.desc, {k: fn(c) for k, c in self.terms.items()})

    def divide(self, g: QElem) -> "LaurentElem":
        """Coefficientwise exact division by a base element."""
        return self.map_coefficients(lambda c: divide_exact(c, g))

    def divisible_by(self, gens: Sequence[QElem]) -> bool:
        return all(ideal_contains(c, gens) for c in self.terms.values())

    def leading_monomial_unit(self) -> Optional[Tuple[Exp, Coeff]]:
        """The single monomial surviving modulo (p, v), if there is exactly one and its coefficient is a unit."""
        units = [(k, c) for k, c in self.terms.items() if c.is_unit()]
        if len(units) != 1:
            return None
        return units[0]

    def inverse(self) -> "LaurentElem":
        lead = self.leading_monomial_unit()
        if lead is None:
            raise NotDivisible("Laurent element is not a unit", {"element": self.to_json()})
        k, c = lead
        inv_lead = LaurentElem(self.desc, {tuple(-x for x in k): c.inverse()})
        w = self * inv_lead - 1
        total, term = LaurentElem.one(self.desc), LaurentElem.one(self.desc)
        P = self.desc.params
        for _ in range(getattr(P, "N", 1) + getattr(P, "M", getattr(P, "K", 1)) + 1):
            term = term * (-w)
            if term.is_zero():
                break
            total = total + term
        else:
            raise NotDivisible("geometric series for the inverse did not terminate")
        return total * inv_lead

    def support(self) -> List[Exp]:
        return sorted(self.terms)

    # Group action and derivations
    def _gamma_coeff(self, i: int, k: Exp) -> Coeff:
        P = self.desc.params
        e = Fraction(k[i - 1], self.desc.denom)
        if self.desc.twist == 1:
            e *= self.desc.p
        if isinstance(P, PDParams):
            return P.q_power(int(e))
        return P.q_power(e)

    def gamma_act(self, i: int, power: int = 1) -> "LaurentElem":
        """gamma_i^power: U^k -> q^(power k_i) U^k (q^(p power k_i) on the twist)."""
        out = {}
        for k, c in self.terms.items():
            g = self._gamma_coeff(i, k)
            if power != 1:
                g = g ** power
            out[k] = c * g
        return LaurentElem(self.desc, out)

    def dq_log(self, i: int) -> "LaurentElem":
        """(gamma_i - 1)/mu, monomialwise [k_i]_q (or [p k_i]_q on the twist).

        A fractional exponent within the level raises NotDivisible, since
        (q^k - 1)/mu is not integral there. Exponents beyond the ring's root
        level never reach this point: AlgebraDesc rejects such a level, and
        fractional powers of q past s raise DenominatorTooDeep in rings.
        """
        P = self.desc.params
        out = {}
        for k, c in self.terms.items():
            num = k[i - 1]
            if num % self.desc.denom:
                raise NotDivisible("(q^k - 1)/mu is not integral for fractional k",
                                   {"exponent": str(Fraction(num, self.desc.denom))})
            e = num // self.desc.denom
            if self.desc.twist == 1:
                e *= self.desc.p
            out[k] = c * P.q_analog(e)
        return LaurentElem(self.desc, out)

    def log_derivation(self, i: int) -> "LaurentElem":
        """U_i d/dU_i: U^k -> k_i U^k."""
        p, N = self.desc.p, self.desc.params.N
        return LaurentElem(self.desc, {k: c * frac_mod(Fraction(k[i - 1], self.desc.denom), p, N)
                                       for k, c in self.terms.items()})

    def derivative(self, i: int) -> "LaurentElem":
        """d/dU_i at integral level."""
        if self.desc.level != 0:
            raise PreconditionViolation("derivative needs integral exponents")
        out = {}
        for k, c in self.terms.items():
            if k[i - 1]:
                k2 = list(k)
                k2[i - 1] -= 1
                out[tuple(k2)] = c * k[i - 1]
        return LaurentElem(self.desc, out)

    # Frobenius maps
    def frob_endo(self) -> "LaurentElem":
        """phi: U_i -> U_i^p, phi on coefficients."""
        if self.desc.twist != 0:
            raise PreconditionViolation("frob_endo acts on the untwisted algebra")
        p = self.desc.p
        return LaurentElem(self.desc, {tuple(p * x for x in k): c.frobenius() for k, c in self.terms.items()})

    def rel_frobenius_F(self) -> "LaurentElem":
        """F: A^box(1) -> A^box, U_i^(1) -> U_i^p, coefficients unchanged."""
        if self.desc.twist != 1:
            raise PreconditionViolation("F starts from the Frobenius twist")
        p = self.desc.p
        return LaurentElem(self.desc.with_(twist=0), {tuple(p * x for x in k): c for k, c in self.terms.items()})

    def rel_frobenius_F_inverse(self) -> "LaurentElem":
        if self.desc.twist != 0 or self.desc.level != 0:
            raise PreconditionViolation("F^-1 reads integral untwisted elements")
        p = self.desc.p
        if any(x % p for k in self.terms for x in k):
            raise NotDivisible("exponents are not divisible by p", {"element": self.to_json()})
        return LaurentElem(self.desc.with_(twist=1), {tuple(x // p for x in k): c for k, c in self.terms.items()})

    def twist_W(self) -> "LaurentElem":
        """W: A^box -> A^box(1), U_i -> U_i^(1), phi on coefficients."""
        if self.desc.twist != 0 or self.desc.level != 0:
            raise PreconditionViolation("W starts from the integral untwisted algebra")
        return LaurentElem(self.desc.with_(twist=1), {k: c.frobenius() for k, c in self.terms.items()})

    def frobenius_components(self) -> Dict[Exp, "LaurentElem"]:
        """f = sum_kappa F(g_kappa) U^kappa over 0 <= kappa_i < p."""
        if self.desc.twist != 0 or self.desc.level != 0:
            raise PreconditionViolation("Frobenius components need integral untwisted elements")
        p = self.desc.p
        buckets: Dict[Exp, Dict[Exp, Coeff]] = {}
        for k, c in self.terms.items():
            kappa = tuple(x % p for x in k)
            buckets.setdefault(kappa, {})[tuple((x - r) // p for x, r in zip(k, kappa))] = c
        twisted = self.desc.with_(twist=1)
        return {kappa: LaurentElem(twisted, terms) for kappa, terms in buckets.items()}

    # Integral decomposition
    def decompose_integral(self) -> Tuple["LaurentElem", Dict[Tuple[Fraction, ...], "LaurentElem"]]:
        D = self.desc.denom
        base = self.desc.with_(level=0)
        buckets: Dict[Tuple[int, ...], Dict[Exp, Coeff]] = {}
        for k, c in self.terms.items():
            r = tuple(x % D for x in k)
            buckets.setdefault(r, {})[tuple((x - ri) // D for x, ri in zip(k, r))] = c
        zero_key = (0,) * self.desc.d
        integral = LaurentElem(base, buckets.pop(zero_key, {}))
        parts = {tuple(Fraction(ri, D) for ri in r): LaurentElem(base, terms) for r, terms in buckets.items()}
        return integral, {k: v for k, v in parts.items() if not v.is_zero()}

    # Serialization
    def to_json(self) -> Dict:
        out = self.desc.to_json()
        out["terms"] = [{"exp": list(k), "coef": self.terms[k].to_json()} for k in sorted(self.terms)]
        return out

    @staticmethod
    def from_json(data: Dict) -> "LaurentElem":
        desc = AlgebraDesc.from_json(data)
        try:
            cls = PDElem if isinstance(desc.params, PDParams) else QElem
            terms = {tuple(int(x) for x in t["exp"]): cls.from_json(t["coef"]) for t in data.get("terms", [])}
        except (KeyError, TypeError) as e:
            raise SchemaError(f"bad Laurent term: {e}", {"data": data})
        return LaurentElem(desc, terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            mono = "*".join(f"U{i + 1}^{Fraction(x, self.desc.denom)}" for i, x in enumerate(k) if x)
            parts.append(f"({self.terms[k]!r}){'*' + mono if mono else ''}")
        return " + ".join(parts)


def reassemble(integral: LaurentElem, parts: Dict[Tuple[Fraction, ...], LaurentElem], level: int) -> LaurentElem:
    """Inverse of decompose_integral."""
    total = integral.at_level(level)
    D = integral.desc.p ** level
    for frac, comp in parts.items():
        shift = LaurentElem.monomial(total.desc, [int(x * D) for x in frac])
        total = total + comp.at_level(level) * shift
    return total


def gamma_act(i: int, f: LaurentElem) -> LaurentElem:
    return f.gamma_act(i)


def dq_log(i: int, f: LaurentElem) -> LaurentElem:
    return f.dq_log(i)


def frob_endo(f: LaurentElem) -> LaurentElem:
    return f.frob_endo()


def rel_frobenius_F(f: LaurentElem) -> LaurentElem:
    return f.rel_frobenius_F()


def twist_W(f: LaurentElem) -> LaurentElem:
    return f.twist_W()


def decompose_integral(f: LaurentElem):
    return f.decompose_integral()


class LaurentMatrix:
    """Dense matrix of Laurent polynomials over a single algebra."""

    __slots__ = ("desc", "rows")

    def __init__(self, desc: AlgebraDesc, rows: Sequence[Sequence[LaurentElem]]):
        self.desc = desc
        self.rows = [list(r) for r in rows]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> LaurentElem:
        i, j = ij
        return self.rows[i][j]

    @staticmethod
    def zeros(desc: AlgebraDesc, n: int, m: int = None) -> "LaurentMatrix":
        m = n if m is None else m
        return LaurentMatrix(desc, [[LaurentElem.zero(desc) for _ in range(m)] for _ in range(n)])

    @staticmethod
    def identity(desc: AlgebraDesc, n: int) -> "LaurentMatrix":
        return LaurentMatrix.scalar(desc, n, LaurentElem.one(desc))

    @staticmethod
    def scalar(desc: AlgebraDesc, n: int, c) -> "LaurentMatrix":
        if not isinstance(c, LaurentElem):
            c = LaurentElem.constant(desc, c)
        return LaurentMatrix(desc, [[c if i == j else LaurentElem.zero(desc) for j in range(n)] for i in range(n)])

    @staticmethod
    def diagonal(desc: AlgebraDesc, entries: Sequence[LaurentElem]) -> "LaurentMatrix":
        n = len(entries)
        return LaurentMatrix(desc, [[entries[i] if i == j else LaurentElem.zero(desc) for j in range(n)] for i in range(n)])

    def map(self, fn: Callable[[LaurentElem], LaurentElem], desc: AlgebraDesc = None) -> "LaurentMatrix":
        rows = [[fn(x) for x in r] for r in self.rows]
        if desc is None:
            desc = rows[0][0].desc if rows and rows[0] else self.desc
        return LaurentMatrix(desc, rows)

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix(self.desc, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix(self.desc, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self) -> "LaurentMatrix":
        return self.map(lambda x: -x, self.desc)

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise PreconditionViolation("matrix shapes do not compose", {"left": [n, k], "right": [k2, m]})
        desc = self.rows[0][0].desc if n and k else self.desc
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = LaurentElem.zero(desc)
                for t in range(k):
                    a = self.rows[i][t]
                    if a.terms:
                        b = other.rows[t][j]
                        if b.terms:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LaurentMatrix(desc, out)

    def __mul__(self, c) -> "LaurentMatrix":
        return self.map(lambda x: x * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrix) or self.shape != other.shape:
            return False
        return all(a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.rows for x in r)

    def transpose(self) -> "LaurentMatrix":
        return LaurentMatrix(self.desc, [list(c) for c in zip(*self.rows)])

    def column(self, j: int) -> List[LaurentElem]:
        return [r[j] for r in self.rows]

    @staticmethod
    def from_columns(desc: AlgebraDesc, cols: Sequence[Sequence[LaurentElem]]) -> "LaurentMatrix":
        return LaurentMatrix(desc, [list(r) for r in zip(*cols)])

    def kron(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n, m = self.shape
        n2, m2 = other.shape
        rows = []
        for i in range(n):
            for i2 in range(n2):
                rows.append([self.rows[i][j] * other.rows[i2][j2] for j in range(m) for j2 in range(m2)])
        return LaurentMatrix(self.desc, rows)

    # Entrywise operators
    def gamma(self, i: int, power: int = 1) -> "LaurentMatrix":
        return self.map(lambda x: x.gamma_act(i, power))

    def dq_log(self, i: int) -> "LaurentMatrix":
        return self.map(lambda x: x.dq_log(i))

    def frob_endo(self) -> "LaurentMatrix":
        return self.map(lambda x: x.frob_endo())

    def rel_frobenius_F(self) -> "LaurentMatrix":
        return self.map(lambda x: x.rel_frobenius_F(), self.desc.with_(twist=0))

    def rel_frobenius_F_inverse(self) -> "LaurentMatrix":
        return self.map(lambda x: x.rel_frobenius_F_inverse(), self.desc.with_(twist=1))

    def twist_W(self) -> "LaurentMatrix":
        return self.map(lambda x: x.twist_W(), self.desc.with_(twist=1))

    def divide(self, g: QElem) -> "LaurentMatrix":
        return self.map(lambda x: x.divide(g))

    def divisible_by(self, gens: Sequence[QElem]) -> bool:
        return all(x.divisible_by(gens) for r in self.rows for x in r)

    # Determinant and inverses
    def det(self) -> LaurentElem:
        n, m = self.shape
        if n != m:
            raise PreconditionViolation("determinant of a non-square matrix")
        if n == 0:
            return LaurentElem.one(self.desc)
        if n == 1:
            return self.rows[0][0]
        total = LaurentElem.zero(self.desc)
        for j in range(n):
            a = self.rows[0][j]
            if a.is_zero():
                continue
            minor = LaurentMatrix(self.desc, [r[:j] + r[j + 1:] for r in self.rows[1:]])
            term = a * minor.det()
            total = total + term if j % 2 == 0 else total - term
        return total

    def adjugate(self) -> "LaurentMatrix":
        n = self.n
        if n == 1:
            return LaurentMatrix.identity(self.desc, 1)
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                minor = LaurentMatrix(self.desc, [r[:i] + r[i + 1:] for t, r in enumerate(self.rows) if t != j])
                c = minor.det()
                row.append(c if (i + j) % 2 == 0 else -c)
            rows.append(row)
        return LaurentMatrix(self.desc, rows)

    def inverse(self) -> "LaurentMatrix":
        det = self.det()
        try:
            det_inv = det.inverse()
        except NotDivisible:
            raise Singular("determinant is not a unit", {"det": det.to_json()})
        return self.adjugate() * det_inv

    def neumann_inverse(self, bound: int = 64) -> "LaurentMatrix":
        """Inverse of I + X with X nilpotent."""
        n = self.n
        eye = LaurentMatrix.identity(self.desc, n)
        X = self - eye
        total, term = eye, eye
        for _ in range(bound):
            term = term @ (-X)
            if term.is_zero():
                return total
            total = total + term
        raise Singular("geometric series did not terminate", {"bound": bound})

    def at_level(self, level: int) -> "LaurentMatrix":
        return self.map(lambda x: x.at_level(level), self.desc.with_(level=level))

    def with_precision(self, eff_N: int, eff_M: int) -> "LaurentMatrix":
        return self.map(lambda x: x.map_coefficients(lambda c: c.with_precision(eff_N, eff_M)))

    def support(self) -> List[Exp]:
        return sorted({k for r in self.rows for x in r for k in x.terms})

    def to_json(self) -> List[List[Dict]]:
        return [[x.to_json() for x in r] for r in self.rows]

    @staticmethod
    def from_json(desc: AlgebraDesc, data: Sequence[Sequence[Dict]]) -> "LaurentMatrix":
        rows = []
        for r in data:
            row = []
            for x in r:
                x = dict(x)
                x.setdefault("ring", desc.params.to_json())
                x.setdefault("d", desc.d)
                x.setdefault("twist", desc.twist)
                x.setdefault("level", desc.level)
                row.append(LaurentElem.from_json(x))
            rows.append(row)
        return LaurentMatrix(desc, rows)

    def __repr__(self) -> str:
        return "LaurentMatrix(" + "; ".join(", ".join(repr(x) for x in r) for r in self.rows) + ")"


def monomials_in_window(d: int, radius: int, level: int = 0, p: int = 2) -> List[Exp]:
    """All exponent numerators with |k_i| <= radius * p^level, lexicographic."""
    R = radius * p ** level
    return [tuple(k) for k in product(range(-R, R + 1), repeat=d)]


def matrix_from_ints(desc: AlgebraDesc, rows: Sequence[Sequence[int]]) -> LaurentMatrix:
    return LaurentMatrix(desc, [[LaurentElem.constant(desc, int(x)) for x in r] for r in rows])
