"""
Mod-mu stratifications

Taylor expansion of flat connections over Z/p^N[U^{+-1}] into stratifications
over truncated PD-polynomial algebras, the cocycle check through the three
face maps, extraction, the Higgs-side analogue, and the finite bijectivity
check for the PD-polynomial isomorphism T_i -> T_i, V_i -> u_i T_i^[p] + b_i.
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb, factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import NotAStratification, PreconditionViolation, SchemaError
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from linalg import rank_mod_p
from rings import RingParams

LOGGER = logging.getLogger(__name__)

Index = Tuple[int, ...]


def base_desc(p: int, N: int, d: int) -> AlgebraDesc:
    """Z/p^N[U^{+-1}]: the q-base ring with v^1 = 0, so q = 1."""
    return AlgebraDesc(RingParams(p, N, 0, 1), d)


def _unit(d: int, i: int) -> Index:
    return tuple(1 if t == i else 0 for t in range(d))


def _sub(a: Index, b: Index) -> Index:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class PDPolyAlg:
    """Z/p^N[U^{+-1}]<tau^(1), ..., tau^(nu)>, zero in total PD-degree >= K."""

    p: int
    N: int
    d: int
    nu: int
    K: int

    def __post_init__(self):
        if self.nu not in (1, 2):
            raise PreconditionViolation("only one or two tau-blocks are modelled", {"nu": self.nu})
        if self.K < 1:
            raise PreconditionViolation("PD truncation must be positive", {"K": self.K})

    @property
    def desc(self) -> AlgebraDesc:
        return base_desc(self.p, self.N, self.d)

    @property
    def nvars(self) -> int:
        return self.nu * self.d

    def indices(self) -> List[Index]:
        out = [j for j in itertools.product(range(self.K), repeat=self.nvars) if sum(j) < self.K]
        return sorted(out, key=lambda j: (sum(j), j))

    def mul_index(self, a: Index, b: Index) -> Optional[Tuple[int, Index]]:
        """tau^[a] tau^[b] = prod binom(a_i + b_i, a_i) tau^[a+b], or None past the truncation."""
        c = tuple(x + y for x, y in zip(a, b))
        if sum(c) >= self.K:
            return None
        coef = 1
        for x, y in zip(a, b):
            coef *= comb(x + y, x)
        return coef, c

    def to_json(self) -> Dict:
        return {"p": self.p, "N": self.N, "d": self.d, "nu": self.nu, "K": self.K}


class PDPolyMatrix:
    """Square matrix over a PDPolyAlg, stored as tau^[j] -> Laurent coefficient matrix."""

    def __init__(self, alg: PDPolyAlg, n: int, terms: Dict[Index, LaurentMatrix] = None):
        self.alg = alg
        self.n = n
        self.terms = {}
        for j, E in (terms or {}).items():
            if len(j) != alg.nvars:
                raise PreconditionViolation("PD index has the wrong length", {"index": list(j), "nvars": alg.nvars})
            if sum(j) < alg.K and not E.is_zero():
                self.terms[tuple(j)] = E

    @staticmethod
    def identity(alg: PDPolyAlg, n: int) -> "PDPolyMatrix":
        return PDPolyMatrix(alg, n, {(0,) * alg.nvars: LaurentMatrix.identity(alg.desc, n)})

    def coefficient(self, j: Index) -> LaurentMatrix:
        return self.terms.get(tuple(j), LaurentMatrix.zeros(self.alg.desc, self.n))

    def __add__(self, other: "PDPolyMatrix") -> "PDPolyMatrix":
        out = dict(self.terms)
        for j, E in other.terms.items():
            out[j] = out[j] + E if j in out else E
        return PDPolyMatrix(self.alg, self.n, out)

    def __sub__(self, other: "PDPolyMatrix") -> "PDPolyMatrix":
        return self + PDPolyMatrix(other.alg, other.n, {j: -E for j, E in other.terms.items()})

    def __matmul__(self, other: "PDPolyMatrix") -> "PDPolyMatrix":
        if self.alg != other.alg or self.n != other.n:
            raise PreconditionViolation("PD matrices over different algebras", {"left": self.alg.to_json(), "right": other.alg.to_json()})
        out: Dict[Index, LaurentMatrix] = {}
        for a, Ea in self.terms.items():
            for b, Eb in other.terms.items():
                hit = self.alg.mul_index(a, b)
                if hit is None:
                    continue
                coef, c = hit
                prod = (Ea @ Eb) * coef
                out[c] = out[c] + prod if c in out else prod
        return PDPolyMatrix(self.alg, self.n, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PDPolyMatrix) or self.alg != other.alg or self.n != other.n:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def at_zero(self) -> LaurentMatrix:
        """Delta^*: set every tau to zero."""
        return self.coefficient((0,) * self.alg.nvars)

    # Serialization
    def entry_json(self, a: int, b: int) -> Dict:
        terms = []
        d = self.alg.d
        for j in sorted(self.terms):
            x = self.terms[j][a, b]
            for k in sorted(x.terms):
                pd = [list(j[t * d:(t + 1) * d]) for t in range(self.alg.nu)]
                terms.append({"umon": list(k), "pd": pd, "coef": int(x.terms[k].coeffs[0])})
        return {**self.alg.to_json(), "terms": terms}

    def to_json(self) -> Dict:
        return {**self.alg.to_json(), "rank": self.n,
                "entries": [[self.entry_json(a, b) for b in range(self.n)] for a in range(self.n)]}

    @staticmethod
    def from_json(data: Dict) -> "PDPolyMatrix":
        try:
            alg = PDPolyAlg(int(data["p"]), int(data["N"]), int(data["d"]), int(data["nu"]), int(data["K"]))
            n = int(data["rank"])
            desc = alg.desc
            terms: Dict[Index, List[List[Dict]]] = {}
            for a, row in enumerate(data["entries"]):
                for b, entry in enumerate(row):
                    for t in entry["terms"]:
                        j = tuple(x for block in t["pd"] for x in block)
                        grid = terms.setdefault(j, [[{} for _ in range(n)] for _ in range(n)])
                        grid[a][b][tuple(t["umon"])] = desc.params.from_int(int(t["coef"]))
            mats = {j: LaurentMatrix(desc, [[LaurentElem(desc, e) for e in r] for r in grid]) for j, grid in terms.items()}
            return PDPolyMatrix(alg, n, mats)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad PD-polynomial matrix JSON: {e}")

    def __repr__(self) -> str:
        return f"PDPolyMatrix(rank={self.n}, nu={self.alg.nu}, K={self.alg.K}, terms={len(self.terms)})"


# Connections and Higgs fields mod mu
@dataclass
class ModPConnection:
    """nabla_i = d/dU_i + N_i on column vectors over Z/p^N[U^{+-1}]."""

    desc: AlgebraDesc
    N: List[LaurentMatrix]

    def __post_init__(self):
        if len(self.N) != self.desc.d:
            raise PreconditionViolation("need one matrix per variable", {"d": self.desc.d, "given": len(self.N)})

    @property
    def rank(self) -> int:
        return self.N[0].n

    def apply(self, i: int, E: LaurentMatrix) -> LaurentMatrix:
        """nabla_i applied to each column of E."""
        return E.map(lambda x: x.derivative(i)) + self.N[i - 1] @ E

    def curvature(self, i: int, j: int) -> LaurentMatrix:
        Ni, Nj = self.N[i - 1], self.N[j - 1]
        return Nj.map(lambda x: x.derivative(i)) - Ni.map(lambda x: x.derivative(j)) + Ni @ Nj - Nj @ Ni

    def is_flat(self) -> bool:
        d = self.desc.d
        return all(self.curvature(i, j).is_zero() for i in range(1, d + 1) for j in range(i + 1, d + 1))

    def is_quasi_nilpotent(self, bound: int = 32) -> bool:
        """Some power nabla_i^m, m <= bound, kills the basis modulo p, for every i."""
        p = self.desc.p
        for i in range(1, self.desc.d + 1):
            E = LaurentMatrix.identity(self.desc, self.rank)
            for _ in range(bound):
                E = self.apply(i, E)
                if all(int(c.coeffs[0]) % p == 0 for r in E.rows for x in r for c in x.terms.values()):
                    break
            else:
                return False
        return True

    def to_json(self) -> Dict:
        return {"desc": self.desc.to_json(), "matrices": [m.to_json() for m in self.N]}

    @staticmethod
    def from_json(data: Dict) -> "ModPConnection":
        desc = AlgebraDesc.from_json(data["desc"])
        return ModPConnection(desc, [LaurentMatrix.from_json(desc, m) for m in data["matrices"]])


@dataclass
class ModPHiggs:
    """Commuting linear Higgs fields Theta_i."""

    desc: AlgebraDesc
    theta: List[LaurentMatrix]

    @property
    def rank(self) -> int:
        return self.theta[0].n

    def is_commuting(self) -> bool:
        T = self.theta
        return all((T[i] @ T[j] - T[j] @ T[i]).is_zero() for i in range(len(T)) for j in range(i + 1, len(T)))

    def is_nilpotent(self, bound: int = 32) -> bool:
        p = self.desc.p
        for Ti in self.theta:
            E = Ti
            for _ in range(bound):
                if all(int(c.coeffs[0]) % p == 0 for r in E.rows for x in r for c in x.terms.values()):
                    break
                E = E @ Ti
            else:
                return False
        return True


# Taylor expansion
def _recursive_fill(alg: PDPolyAlg, n: int, step) -> PDPolyMatrix:
    d = alg.d
    coeffs: Dict[Index, LaurentMatrix] = {(0,) * d: LaurentMatrix.identity(alg.desc, n)}
    for j in alg.indices():
        if sum(j) == 0:
            continue
        i = next(t for t in range(d) if j[t] > 0)
        coeffs[j] = step(i + 1, coeffs[_sub(j, _unit(d, i))])
    return PDPolyMatrix(alg, n, coeffs)


def taylor(N: ModPConnection, K: int) -> PDPolyMatrix:
    """epsilon = sum_{|j|<K} nabla^j tau^[j]."""
    params = N.desc.params
    alg = PDPolyAlg(N.desc.p, params.N, N.desc.d, 1, K)
    if not N.is_flat():
        LOGGER.warning("taylor: connection is not flat, the expansion depends on the order of the operators")
    return _recursive_fill(alg, N.rank, N.apply)


def higgs_taylor(H: ModPHiggs, K: int) -> PDPolyMatrix:
    """epsilon = sum_{|j|<K} (-1)^{|j|} Theta^j tau^[j]."""
    params = H.desc.params
    alg = PDPolyAlg(H.desc.p, params.N, H.desc.d, 1, K)
    return _recursive_fill(alg, H.rank, lambda i, E: -(H.theta[i - 1] @ E))


# Face maps into the two-block algebra
def _two_block(alg: PDPolyAlg) -> PDPolyAlg:
    return PDPolyAlg(alg.p, alg.N, alg.d, 2, alg.K)


def p12(eps: PDPolyMatrix) -> PDPolyMatrix:
    """tau -> tau^(1)."""
    alg2 = _two_block(eps.alg)
    zero = (0,) * eps.alg.d
    return PDPolyMatrix(alg2, eps.n, {j + zero: E for j, E in eps.terms.items()})


def p13(eps: PDPolyMatrix) -> PDPolyMatrix:
    """tau -> tau^(1) + tau^(2), using (x + y)^[m] = sum x^[i] y^[m-i]."""
    alg2 = _two_block(eps.alg)
    out: Dict[Index, LaurentMatrix] = {}
    for j, E in eps.terms.items():
        for a in itertools.product(*(range(x + 1) for x in j)):
            key = tuple(a) + _sub(j, a)
            out[key] = out[key] + E if key in out else E
    return PDPolyMatrix(alg2, eps.n, out)


def _taylor_shift(E: LaurentMatrix, k: Index) -> LaurentMatrix:
    for i, m in enumerate(k, start=1):
        for _ in range(m):
            E = E.map(lambda x: x.derivative(i))
    return E


def p23(eps: PDPolyMatrix, shift: bool = True) -> PDPolyMatrix:
    """tau -> tau^(2), coefficients f(U) -> f(U + tau^(1)) = sum d^k f tau^(1)[k]."""
    alg2 = _two_block(eps.alg)
    d, K = eps.alg.d, eps.alg.K
    zero = (0,) * d
    out: Dict[Index, LaurentMatrix] = {}
    for j, E in eps.terms.items():
        if not shift:
            out[zero + j] = E
            continue
        room = K - sum(j)
        for k in itertools.product(range(room), repeat=d):
            if sum(k) >= room:
                continue
            D = _taylor_shift(E, k)
            if not D.is_zero():
                out[tuple(k) + j] = D
    return PDPolyMatrix(alg2, eps.n, out)


def check_strat(eps: PDPolyMatrix, higgs: bool = False) -> bool:
    """Delta^* eps = I and p12^* eps . p23^* eps = p13^* eps."""
    if eps.alg.nu != 1:
        raise PreconditionViolation("stratifications live over the one-block algebra", {"nu": eps.alg.nu})
    if not eps.at_zero() == LaurentMatrix.identity(eps.alg.desc, eps.n):
        LOGGER.debug("check_strat: Delta^* eps is not the identity")
        return False
    ok = p12(eps) @ p23(eps, shift=not higgs) == p13(eps)
    if not ok:
        LOGGER.debug("check_strat: cocycle identity fails")
    return ok


def extract(eps: PDPolyMatrix) -> ModPConnection:
    if not check_strat(eps):
        raise NotAStratification("input violates the cocycle identity", {"K": eps.alg.K})
    d = eps.alg.d
    return ModPConnection(eps.alg.desc, [eps.coefficient(_unit(d, i)) for i in range(d)])


def higgs_extract(eps: PDPolyMatrix) -> ModPHiggs:
    if not check_strat(eps, higgs=True):
        raise NotAStratification("input violates the Higgs cocycle identity", {"K": eps.alg.K})
    d = eps.alg.d
    return ModPHiggs(eps.alg.desc, [-eps.coefficient(_unit(d, i)) for i in range(d)])


def check_recursion(eps: PDPolyMatrix, N: ModPConnection) -> bool:
    """tau^[j + 1_i] coefficient equals nabla_i of the tau^[j] coefficient, for every |j| < K - 1."""
    d = eps.alg.d
    for j in eps.alg.indices():
        if sum(j) + 1 >= eps.alg.K:
            continue
        for i in range(d):
            nxt = tuple(x + (1 if t == i else 0) for t, x in enumerate(j))
            if not eps.coefficient(nxt) == N.apply(i + 1, eps.coefficient(j)):
                return False
    return True


# PD-polynomial isomorphism over F_p
def _round_truncation(p: int, K: int) -> Tuple[int, int]:
    if K < p:
        raise PreconditionViolation(f"truncation K={K} is below p={p}", {"K": K, "p": p})
    s = 0
    while p ** (s + 2) <= K:
        s += 1
    return s, p ** (s + 1)


class _DividedPowers:
    """F_p<T_1..T_n> with basis T^[j], truncated at j_i >= K (an ideal)."""

    def __init__(self, p: int, n: int, K: int):
        self.p, self.n, self.K = p, n, K

    def mul(self, x: Dict[Index, int], y: Dict[Index, int]) -> Dict[Index, int]:
        out: Dict[Index, int] = {}
        for a, ca in x.items():
            for b, cb in y.items():
                c = tuple(s + t for s, t in zip(a, b))
                if any(e >= self.K for e in c):
                    continue
                coef = ca * cb
                for s, t in zip(a, b):
                    coef *= comb(s + t, s)
                coef %= self.p
                if coef:
                    out[c] = (out.get(c, 0) + coef) % self.p
        return {k: v for k, v in out.items() if v}

    def add(self, x: Dict[Index, int], y: Dict[Index, int]) -> Dict[Index, int]:
        out = dict(x)
        for k, v in y.items():
            out[k] = (out.get(k, 0) + v) % self.p
        return {k: v for k, v in out.items() if v}

    def one(self) -> Dict[Index, int]:
        return {(0,) * self.n: 1}

    def gamma_basis(self, j: Index, k: int) -> Dict[Index, int]:
        """gamma_k(T^[j]) for j != 0."""
        if k == 0:
            return self.one()
        i0 = next(t for t, e in enumerate(j) if e > 0)
        coef = factorial(j[i0] * k) // (factorial(j[i0]) ** k * factorial(k))
        for t, e in enumerate(j):
            if t != i0:
                coef *= factorial(e * k) // factorial(e) ** k
        target = tuple(e * k for e in j)
        if any(e >= self.K for e in target) or coef % self.p == 0:
            return {}
        return {target: coef % self.p}

    def gamma(self, x: Dict[Index, int], k: int) -> Dict[Index, int]:
        """gamma_k of an element of the augmentation ideal."""
        acc = [self.one()] + [{} for _ in range(k)]
        for j, c in x.items():
            term = [{m: v * pow(c, t, self.p) % self.p for m, v in self.gamma_basis(j, t).items()} for t in range(k + 1)]
            acc = [self._sum(self.mul(acc[i], term[t - i]) for i in range(t + 1)) for t in range(k + 1)]
        return acc[k]

    def _sum(self, parts: Iterable[Dict[Index, int]]) -> Dict[Index, int]:
        out: Dict[Index, int] = {}
        for x in parts:
            out = self.add(out, x)
        return out

    def from_polynomial(self, poly: Dict[Index, int]) -> Dict[Index, int]:
        """T^a = a! T^[a]."""
        out = {}
        for a, c in poly.items():
            coef = c
            for e in a:
                coef *= factorial(e)
            if coef % self.p:
                out[tuple(a)] = coef % self.p
        return out


def pd_poly_iso_check(p: int, n_vars: int, u: Sequence[int], b: Sequence[Dict[Index, int]], K: int) -> bool:
    """Bijectivity of T_i -> T_i, V_i -> u_i T_i^[p] + b_i on the truncated bases.

    With K rounded down to p^(s+1), the span of T^a V^[m] (a_i < p, m_i < p^s)
    is compared with the span of T^[j] (j_i < K) by an F_p rank computation.
    """
    if len(u) != n_vars or len(b) != n_vars:
        raise PreconditionViolation("need one unit and one correction per variable", {"n": n_vars})
    if any(int(x) % p == 0 for x in u):
        raise PreconditionViolation("u_i must be units of F_p", {"u": [int(x) for x in u]})
    for bi in b:
        for a in bi:
            if len(a) != n_vars or any(e < 0 or e >= p for e in a):
                raise PreconditionViolation("b_i must be a polynomial in T with exponents below p", {"exp": list(a)})
            if sum(a) == 0 and int(bi[a]) % p:
                raise PreconditionViolation("b_i must lie in the augmentation ideal", {"constant": int(bi[a])})
    s, K = _round_truncation(p, K)
    D = _DividedPowers(p, n_vars, K)
    basis_D = list(itertools.product(range(K), repeat=n_vars))
    position = {j: t for t, j in enumerate(basis_D)}
    V_images = []
    for i in range(n_vars):
        lead = {tuple(p if t == i else 0 for t in range(n_vars)): int(u[i]) % p}
        V_images.append(D.add(lead, D.from_polynomial({tuple(a): int(c) for a, c in b[i].items()})))
    V_powers = [[D.gamma(V_images[i], m) for m in range(p ** s)] for i in range(n_vars)]
    columns = []
    for a in itertools.product(range(p), repeat=n_vars):
        Ta = D.from_polynomial({a: 1})
        for m in itertools.product(range(p ** s), repeat=n_vars):
            img = Ta
            for i, mi in enumerate(m):
                img = D.mul(img, V_powers[i][mi])
            col = np.zeros(len(basis_D), dtype=object)
            for j, c in img.items():
                col[position[j]] = c
            columns.append(col)
    A = np.column_stack(columns)
    rank = rank_mod_p(A, p)
    LOGGER.debug(f"pd_poly_iso_check: p={p} n={n_vars} K={K} rank {rank}/{len(basis_D)}")
    return rank == len(basis_D) == len(columns)
