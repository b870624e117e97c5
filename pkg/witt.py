"""
Truncated Witt vectors

Arithmetic through the universal sum / product / negation / Frobenius
polynomials (solved once from the ghost equations with sympy and cached),
Verschiebung, Teichmueller lifts, ghost components, and the Artin-Schreier-Witt
fixed points of a Frobenius-semilinear map on W_r(F_{p^k})^n.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import Poly, Rational, symbols

from errors import GhostUndefined, PreconditionViolation, SchemaError, SingularMatrix
from linalg import kernel_mod

LOGGER = logging.getLogger(__name__)

# Conway polynomials, coefficients little-endian, monic
CONWAY = {
    (2, 1): (1, 1), (2, 2): (1, 1, 1), (2, 3): (1, 1, 0, 1), (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1), (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (3, 1): (1, 1), (3, 2): (2, 2, 1), (3, 3): (1, 2, 0, 1), (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1), (5, 2): (2, 4, 1), (5, 3): (3, 3, 0, 1),
    (7, 1): (4, 1), (7, 2): (3, 6, 1),
}


def _is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    x = sympy.Symbol("x")
    return Poly(list(reversed(coeffs)), x, modulus=p).is_irreducible


@lru_cache(maxsize=None)
def field_modulus(p: int, k: int) -> Tuple[int, ...]:
    """Monic irreducible polynomial of degree k over F_p."""
    shipped = CONWAY.get((p, k))
    if shipped is not None and _is_irreducible(shipped, p):
        return shipped
    LOGGER.debug(f"searching an irreducible polynomial of degree {k} over F_{p}")
    for n in range(p ** k):
        low = [(n // p ** i) % p for i in range(k)]
        cand = tuple(low) + (1,)
        if cand[0] and _is_irreducible(cand, p):
            return cand
    raise PreconditionViolation(f"no irreducible polynomial of degree {k} over F_{p}")


@dataclass(frozen=True)
class WittBase:
    """Coefficient ring: 'Z', 'Zmod' (Z/p^N) or 'Fq' (F_{p^k})."""

    kind: str
    p: int
    N: int = 0
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("Z", "Zmod", "Fq"):
            raise PreconditionViolation(f"unknown Witt base {self.kind!r}")
        if not sympy.isprime(self.p):
            raise PreconditionViolation(f"p={self.p} is not prime")

    @property
    def q(self) -> int:
        return self.p ** self.k

    @property
    def torsion_free(self) -> bool:
        return self.kind == "Z"

    def zero(self):
        return (0,) * self.k if self.kind == "Fq" else 0

    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        if self.kind == "Fq":
            return (n % self.p,) + (0,) * (self.k - 1)
        if self.kind == "Zmod":
            return n % self.p ** self.N
        return n

    def add(self, a, b):
        if self.kind == "Fq":
            return tuple((x + y) % self.p for x, y in zip(a, b))
        if self.kind == "Zmod":
            return (a + b) % self.p ** self.N
        return a + b

    def neg(self, a):
        if self.kind == "Fq":
            return tuple((-x) % self.p for x in a)
        if self.kind == "Zmod":
            return (-a) % self.p ** self.N
        return -a

    def mul(self, a, b):
        if self.kind == "Fq":
            k, p = self.k, self.p
            mod = field_modulus(p, k)
            prod = [0] * (2 * k - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] += x * y
            for deg in range(2 * k - 2, k - 1, -1):
                c = prod[deg] % p
                if c:
                    for t in range(k + 1):
                        prod[deg - k + t] -= c * mod[t]
            return tuple(c % p for c in prod[:k])
        if self.kind == "Zmod":
            return (a * b) % self.p ** self.N
        return a * b

    def power(self, a, e: int):
        result, base = self.one(), a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_zero(self, a) -> bool:
        return not any(a) if self.kind == "Fq" else a == 0

    def inverse(self, a):
        if self.kind != "Fq" or self.is_zero(a):
            raise SingularMatrix("inverse needs a non-zero field element")
        return self.power(a, self.q - 2)

    def frob(self, a):
        return self.power(a, self.p)

    def frob_inverse(self, a):
        return self.power(a, self.p ** (self.k - 1)) if self.kind == "Fq" else a

    def generator(self):
        """Class of x in F_p[x]/(modulus)."""
        if self.k == 1:
            return self.from_int(-field_modulus(self.p, 1)[0])
        return (0, 1) + (0,) * (self.k - 2)

    def to_json(self) -> Dict:
        out = {"kind": self.kind, "k": self.k}
        if self.kind == "Zmod":
            out["N"] = self.N
        return out


# Universal polynomials


def _ghost_poly(xs, p: int, n: int):
    return sum(p ** i * xs[i] ** (p ** (n - i)) for i in range(n + 1))


def _solve_ghost(target: Callable[[int], Any], xs, p: int, r: int, name: str) -> List[Poly]:
    out = []
    for n in range(r):
        rest = sum(p ** i * out[i] ** (p ** (n - i)) for i in range(n))
        expr = sympy.expand((target(n) - rest) * Rational(1, p ** n))
        poly = Poly(expr, *xs) if xs else Poly(expr)
        if any(c.q != 1 for c in poly.coeffs()):
            raise PreconditionViolation(f"universal polynomial {name}_{n} is not integral")
        out.append(expr)
    return out


def _compile(exprs, gens) -> List[List[Tuple[int, Tuple[int, ...]]]]:
    compiled = []
    for e in exprs:
        poly = Poly(e, *gens)
        compiled.append([(int(c), tuple(m)) for m, c in poly.terms()])
    return compiled


@lru_cache(maxsize=None)
def universal_polynomials(p: int, r: int, op: str):
    """Integer polynomials of the Witt operation op in 'add', 'mul', 'neg', 'frob'.

    Variables are X_0..X_{r-1} then Y_0..Y_{r-1} (binary ops) or X_0..X_r
    (frob, which reads one more component).
    """
    if op in ("add", "mul"):
        X = symbols(f"X0:{r}")
        Y = symbols(f"Y0:{r}")
        gens = X + Y
        if op == "add":
            target = lambda n: _ghost_poly(X, p, n) + _ghost_poly(Y, p, n)
        else:
            target = lambda n: _ghost_poly(X, p, n) * _ghost_poly(Y, p, n)
    elif op == "neg":
        X = symbols(f"X0:{r}")
        gens = X
        target = lambda n: -_ghost_poly(X, p, n)
    elif op == "frob":
        X = symbols(f"X0:{r + 1}")
        gens = X
        target = lambda n: _ghost_poly(X, p, n + 1)
    else:
        raise PreconditionViolation(f"unknown Witt operation {op!r}")
    LOGGER.debug(f"solving universal {op} polynomials for p={p}, r={r}")
    exprs = _solve_ghost(target, gens, p, r, op)
    return _compile(exprs, gens)


class OperatorRing:
    """Adapter evaluating universal polynomials in any ring with + and *."""

    def __init__(self, one):
        self._one = one

    def from_int(self, n: int):
        return self._one * n

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def power(self, a, e: int):
        result = self._one
        for _ in range(e):
            result = result * a
        return result


def evaluate(poly: Sequence[Tuple[int, Tuple[int, ...]]], values: Sequence, ring) -> Any:
    total = ring.from_int(0)
    cache: Dict[Tuple[int, int], Any] = {}
    for coeff, mono in poly:
        term = ring.from_int(coeff)
        for idx, e in enumerate(mono):
            if e:
                key = (idx, e)
                if key not in cache:
                    cache[key] = ring.power(values[idx], e)
                term = ring.mul(term, cache[key])
        total = ring.add(total, term)
    return total


@dataclass(frozen=True)
class WittVec:
    """Length-r Witt vector over a WittBase."""

    base: WittBase
    components: Tuple

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def p(self) -> int:
        return self.base.p

    def _check(self, other: "WittVec"):
        if other.base != self.base or other.r != self.r:
            raise PreconditionViolation("Witt vectors of different length or base", {"left": self.r, "right": other.r})

    def _binary(self, other: "WittVec", op: str) -> "WittVec":
        self._check(other)
        polys = universal_polynomials(self.p, self.r, op)
        values = list(self.components) + list(other.components)
        return WittVec(self.base, tuple(evaluate(P, values, self.base) for P in polys))

    def __add__(self, other: "WittVec") -> "WittVec":
        return self._binary(other, "add")

    def __mul__(self, other: "WittVec") -> "WittVec":
        return self._binary(other, "mul")

    def __neg__(self) -> "WittVec":
        polys = universal_polynomials(self.p, self.r, "neg")
        return WittVec(self.base, tuple(evaluate(P, self.components, self.base) for P in polys))

    def __sub__(self, other: "WittVec") -> "WittVec":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, WittVec) and self.base == other.base and self.components == other.components

    def __hash__(self):
        return hash((self.base, self.components))

    def scale(self, n: int) -> "WittVec":
        return self * witt_from_int(self.base, self.r, n)

    def __pow__(self, e: int) -> "WittVec":
        result, base = witt_from_int(self.base, self.r, 1), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return all(self.base.is_zero(c) for c in self.components)

    def is_unit(self) -> bool:
        c = self.components[0]
        if self.base.kind == "Fq":
            return not self.base.is_zero(c)
        return c % self.p != 0

    def inverse(self) -> "WittVec":
        """Unit inverse over F_q: u^{-1} = u^{|W_r(F_q)^x| - 1}."""
        if self.base.kind != "Fq":
            raise PreconditionViolation("Witt inverses are provided over finite fields")
        if not self.is_unit():
            raise SingularMatrix("Witt vector is not a unit", {"components": list(self.components)})
        q = self.base.q
        return self ** ((q - 1) * q ** (self.r - 1) - 1)

    def truncate(self, r: int) -> "WittVec":
        return WittVec(self.base, self.components[:r])

    def to_json(self) -> Dict:
        return {"p": self.p, "r": self.r, "base": self.base.to_json(),
                "components": [list(c) if isinstance(c, tuple) else c for c in self.components]}

    @staticmethod
    def from_json(data: Dict) -> "WittVec":
        try:
            b = data["base"]
            base = WittBase(b["kind"], int(data["p"]), int(b.get("N", 0)), int(b.get("k", 1)))
            comps = tuple(tuple(int(x) for x in c) if base.kind == "Fq" else int(c) for c in data["components"])
            if len(comps) != int(data["r"]):
                raise ValueError("length mismatch")
            return WittVec(base, comps)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad Witt vector JSON: {e}", {"data": data})


def witt_vec(base: WittBase, components: Sequence) -> WittVec:
    if base.kind == "Fq":
        comps = tuple(tuple(int(x) % base.p for x in c) for c in components)
    else:
        comps = tuple(base.from_int(int(c)) for c in components)
    return WittVec(base, comps)


def witt_from_int(base: WittBase, r: int, n: int) -> WittVec:
    """Image of the integer n, via its Witt components over Z."""
    comps = []
    for k in range(r):
        rest = sum(base.p ** i * comps[i] ** (base.p ** (k - i)) for i in range(k))
        comps.append((n - rest) // base.p ** k)
    return WittVec(base, tuple(base.from_int(c) for c in comps))


def witt_add(x: WittVec, y: WittVec) -> WittVec:
    return x + y


def witt_mul(x: WittVec, y: WittVec) -> WittVec:
    return x * y


def teichmuller(base: WittBase, r: int, a) -> WittVec:
    return WittVec(base, (a,) + (base.zero(),) * (r - 1))


def verschiebung_V(x: WittVec) -> WittVec:
    """(x_0, ..., x_{r-1}) -> (0, x_0, ..., x_{r-1}), length r + 1."""
    return WittVec(x.base, (x.base.zero(),) + x.components)


def frobenius_F(x: WittVec) -> WittVec:
    """Witt Frobenius: componentwise p-th power over F_q, else W_r -> W_{r-1} via universal polynomials."""
    if x.base.kind == "Fq":
        return WittVec(x.base, tuple(x.base.frob(c) for c in x.components))
    if x.r < 2:
        raise PreconditionViolation("Frobenius needs length at least 2 over this base")
    polys = universal_polynomials(x.p, x.r - 1, "frob")
    return WittVec(x.base, tuple(evaluate(P, x.components, x.base) for P in polys))


def frobenius_F_inverse(x: WittVec) -> WittVec:
    if x.base.kind != "Fq":
        raise PreconditionViolation("F is invertible only over a perfect field")
    return WittVec(x.base, tuple(x.base.frob_inverse(c) for c in x.components))


def ghost(x: WittVec) -> Tuple[int, ...]:
    if not x.base.torsion_free:
        raise GhostUndefined("ghost map needs a p-torsion-free base", {"base": x.base.to_json()})
    p = x.p
    return tuple(sum(p ** i * x.components[i] ** (p ** (n - i)) for i in range(n + 1)) for n in range(x.r))


def delta_pair_sum(x, y, delta_x, delta_y, p: int, one):
    """Second component of (x, delta x) + (y, delta y) in any ring, for the delta-law cross-check."""
    polys = universal_polynomials(p, 2, "add")
    return evaluate(polys[1], [x, delta_x, y, delta_y], OperatorRing(one))


# Frobenius-semilinear maps over W_r(F_q)


@dataclass
class SemilinearMap:
    """x -> Phi * F(x) on W_r(F_{p^k})^n."""

    r: int
    k: int
    p: int
    matrix: List[List[WittVec]]

    def __post_init__(self):
        self.base = WittBase("Fq", self.p, 0, self.k)
        self.n = len(self.matrix)
        self.invertible = field_det(self.base, [[e.components[0] for e in row] for row in self.matrix]) is not None

    def apply(self, vec: Sequence[WittVec]) -> List[WittVec]:
        fx = [frobenius_F(v) for v in vec]
        out = []
        for row in self.matrix:
            acc = witt_from_int(self.base, self.r, 0)
            for a, b in zip(row, fx):
                acc = acc + a * b
            out.append(acc)
        return out


def field_det(base: WittBase, rows: Sequence[Sequence]) -> Optional[Any]:
    """Determinant over F_q by elimination; None when zero."""
    A = [list(r) for r in rows]
    n = len(A)
    det = base.one()
    for c in range(n):
        piv = next((i for i in range(c, n) if not base.is_zero(A[i][c])), None)
        if piv is None:
            return None
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = base.neg(det)
        det = base.mul(det, A[c][c])
        inv = base.inverse(A[c][c])
        for i in range(c + 1, n):
            if not base.is_zero(A[i][c]):
                f = base.mul(A[i][c], inv)
                A[i] = [base.add(x, base.neg(base.mul(f, y))) for x, y in zip(A[i], A[c])]
    return det


def witt_matrix_inverse(M: Sequence[Sequence[WittVec]]) -> List[List[WittVec]]:
    """Gauss-Jordan over the local ring W_r(F_q) with unit pivots."""
    n = len(M)
    base, r = M[0][0].base, M[0][0].r
    zero, one = witt_from_int(base, r, 0), witt_from_int(base, r, 1)
    A = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c].is_unit()), None)
        if piv is None:
            raise SingularMatrix("matrix over W_r(F_q) is not invertible", {"column": c})
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for i in range(n):
            if i != c and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return [row[n:] for row in A]


def teichmuller_basis(base: WittBase, r: int) -> List[WittVec]:
    """[alpha^j], j < k: a Z/p^r-basis of W_r(F_q)."""
    a = base.generator()
    return [teichmuller(base, r, base.power(a, j)) for j in range(base.k)]


def asw_coordinates(x: WittVec) -> List[int]:
    """Coordinates of x in the Teichmueller basis, modulo p^r."""
    base, r, p = x.base, x.r, x.p
    if r == 0:
        return [0] * base.k
    digits = [int(c) for c in x.components[0]]
    basis = teichmuller_basis(base, r)
    lead = witt_from_int(base, r, 0)
    for c, b in zip(digits, basis):
        if c:
            lead = lead + b.scale(c)
    rest = x - lead
    if r == 1:
        return digits
    # rest = V(y) = p * F^{-1}(y)
    y = WittVec(base, rest.components[1:])
    sub = asw_coordinates(frobenius_F_inverse(y))
    mod = p ** r
    return [(d + p * s) % mod for d, s in zip(digits, sub)]


def from_coordinates(base: WittBase, r: int, coords: Sequence[int]) -> WittVec:
    total = witt_from_int(base, r, 0)
    for c, b in zip(coords, teichmuller_basis(base, r)):
        if c % base.p ** r:
            total = total + b.scale(int(c))
    return total


@dataclass
class FixedPoints:
    """Generators of {x : Phi F(x) = x} with their additive orders."""

    generators: List[List[WittVec]]
    orders: List[int]
    free_rank: int
    is_free_rank_n: bool
    spans: bool


def asw_fixed_points(phi: SemilinearMap) -> FixedPoints:
    if not phi.invertible:
        raise SingularMatrix("Phi is not invertible over W_r(F_q)")
    base, r, n, k, p = phi.base, phi.r, phi.n, phi.k, phi.p
    basis = teichmuller_basis(base, r)
    zero = witt_from_int(base, r, 0)
    cols = []
    for b in range(n):
        for j in range(k):
            vec = [basis[j] if t == b else zero for t in range(n)]
            img = phi.apply(vec)
            diff = [u - v for u, v in zip(img, vec)]
            cols.append([c for w in diff for c in asw_coordinates(w)])
    A = np.array(cols, dtype=object).T
    gens = kernel_mod(A, p, r)
    generators, orders = [], []
    for g, e in gens:
        vec = [from_coordinates(base, r, [int(g[b * k + j]) for j in range(k)]) for b in range(n)]
        generators.append(vec)
        orders.append(e)
    free_rank = sum(1 for e in orders if e == r)
    is_free = free_rank == n and len(orders) == n
    spans = False
    if is_free:
        spans = field_det(base, [[generators[c][b].components[0] for c in range(n)] for b in range(n)]) is not None
    LOGGER.info(f"ASW fixed points: orders={orders}, free rank {free_rank}/{n}, spans={spans}")
    return FixedPoints(generators, orders, free_rank, is_free, spans)


def manufactured_phi(X: Sequence[Sequence[WittVec]]) -> SemilinearMap:
    """Phi = X * F(X)^{-1}; its fixed module is spanned by the columns of X."""
    n = len(X)
    FX = [[frobenius_F(e) for e in row] for row in X]
    FXinv = witt_matrix_inverse(FX)
    base, r = X[0][0].base, X[0][0].r
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = witt_from_int(base, r, 0)
            for t in range(n):
                acc = acc + X[i][t] * FXinv[t][j]
            row.append(acc)
        rows.append(row)
    return SemilinearMap(r, base.k, base.p, rows)
