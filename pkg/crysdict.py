"""
Crystalline log/exp dictionary

Group actions gamma_i = I + mu B_i over Laurent polynomials with divided-power
coefficients against honest connections L_i = (1/t) log(gamma_i), the two
series that rebuild gamma_i from L_i, Griffiths transversality on weight
filtrations, and saturation of f-adic filtrations on Z-lattices.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    NoSolution,
    NotMultiplicative,
    NotTrivialModMu,
    PreconditionViolation,
    SchemaError,
    TDivisionAmbiguous,
)
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from linalg import as_int_matrix, lattice_basis, lattice_equal, lattice_leq, lattice_preimage
from rings import PDElem, PDParams, frac_mod, pd_divided_power, pd_log_q, pd_solve_mu, t_over_mu

LOGGER = logging.getLogger(__name__)


def crys_desc(p: int, N: int, K: int, d: int) -> AlgebraDesc:
    return AlgebraDesc(PDParams(p, N, K, "crystalline"), d)


def _require_pd(desc: AlgebraDesc):
    if not isinstance(desc.params, PDParams) or desc.level != 0:
        raise PreconditionViolation("crystalline modules need PD coefficients and integral exponents", desc.to_json())


@dataclass
class CrysGroupModule:
    """gamma_i(e x) = e G_i gamma_i(x), stored as B_i with G_i = I + mu B_i."""

    desc: AlgebraDesc
    B: List[LaurentMatrix]

    def __post_init__(self):
        _require_pd(self.desc)
        if len(self.B) != self.desc.d:
            raise PreconditionViolation("need one matrix per generator", {"d": self.desc.d, "given": len(self.B)})

    @property
    def rank(self) -> int:
        return self.B[0].n

    @property
    def G(self) -> List[LaurentMatrix]:
        mu = self.desc.params.mu()
        return [LaurentMatrix.identity(self.desc, self.rank) + Bi * mu for Bi in self.B]

    def check_commuting(self) -> bool:
        G = self.G
        d = self.desc.d
        return all(G[i - 1] @ G[j - 1].gamma(i) == G[j - 1] @ G[i - 1].gamma(j)
                   for i in range(1, d + 1) for j in range(i + 1, d + 1))

    @staticmethod
    def from_G(desc: AlgebraDesc, G: Sequence[LaurentMatrix], precision: int = None) -> "CrysGroupModule":
        """Recover B_i = (G_i - I)/mu; the answer must be unique below PD-degree `precision`."""
        _require_pd(desc)
        P = desc.params
        precision = P.K - 1 if precision is None else precision
        out = []
        for i, Gi in enumerate(G, start=1):
            D = Gi - LaurentMatrix.identity(desc, Gi.n)

            def solve(x: LaurentElem) -> LaurentElem:
                terms = {}
                for k, c in x.terms.items():
                    try:
                        sol = pd_solve_mu(c)
                    except NoSolution as e:
                        raise NotTrivialModMu("generator is not the identity modulo mu", {"generator": i, **e.details})
                    if sol.ambiguous_below(precision):
                        raise TDivisionAmbiguous("mu-division is not unique at the requested precision",
                                                 {"generator": i, "precision": precision})
                    terms[k] = sol.solution
                return LaurentElem(desc, terms)

            out.append(D.map(solve, desc))
        return CrysGroupModule(desc, out)

    def to_json(self) -> Dict:
        return {"kind": "crys-group", "desc": self.desc.to_json(), "matrices": [b.to_json() for b in self.B]}


@dataclass
class CrysConnModule:
    """Honest connection nabla_i^log(e x) = e (L_i x + U_i d/dU_i x)."""

    desc: AlgebraDesc
    L: List[LaurentMatrix]

    def __post_init__(self):
        _require_pd(self.desc)
        if len(self.L) != self.desc.d:
            raise PreconditionViolation("need one matrix per variable", {"d": self.desc.d, "given": len(self.L)})

    @property
    def rank(self) -> int:
        return self.L[0].n

    def apply(self, i: int, E: LaurentMatrix) -> LaurentMatrix:
        return self.L[i - 1] @ E + E.map(lambda x: x.log_derivation(i))

    def is_flat(self) -> bool:
        d = self.desc.d
        for i in range(1, d + 1):
            for j in range(i + 1, d + 1):
                Li, Lj = self.L[i - 1], self.L[j - 1]
                lhs = Li @ Lj + Lj.map(lambda x: x.log_derivation(i))
                rhs = Lj @ Li + Li.map(lambda x: x.log_derivation(j))
                if not lhs == rhs:
                    return False
        return True

    def to_json(self) -> Dict:
        return {"kind": "crys-conn", "desc": self.desc.to_json(), "matrices": [m.to_json() for m in self.L]}


def crys_module_from_json(data: Dict):
    try:
        desc = AlgebraDesc.from_json(data["desc"])
        mats = [LaurentMatrix.from_json(desc, m) for m in data["matrices"]]
        kind = data.get("kind", "crys-group")
    except (KeyError, TypeError) as e:
        raise SchemaError(f"bad crystalline module JSON: {e}")
    if kind == "crys-group":
        return CrysGroupModule(desc, mats)
    if kind == "crys-conn":
        return CrysConnModule(desc, mats)
    raise SchemaError(f"unknown crystalline module kind {kind!r}")


def _mu_power_over(P: PDParams, m: int) -> PDElem:
    """mu^(m-1) / m."""
    if m - 1 >= P.K:
        return P.zero()
    c = [0] * P.K
    c[m - 1] = frac_mod(Fraction(P.scale(m - 1), m), P.p, P.N)
    return P.element(c)


def q_connection_powers(module: CrysGroupModule, i: int, count: int) -> List[LaurentMatrix]:
    """D_1 = B_i, D_(m+1) = B_i gamma_i(D_m) + d_i(D_m): matrices of (nabla_i^q)^m on the basis."""
    Bi = module.B[i - 1]
    out = [Bi]
    for _ in range(count - 1):
        D = out[-1]
        out.append(Bi @ D.gamma(i) + D.dq_log(i))
    return out


def log_conn(module: CrysGroupModule) -> CrysConnModule:
    """L_i = (t/mu)^(-1) sum_{m>=1} (-1)^(m-1) (mu^(m-1)/m) D_m."""
    P = module.desc.params
    unit = t_over_mu(P).inverse()
    L = []
    for i in range(1, module.desc.d + 1):
        total = LaurentMatrix.zeros(module.desc, module.rank)
        for m, D in enumerate(q_connection_powers(module, i, P.K), start=1):
            c = _mu_power_over(P, m)
            if c.is_zero():
                continue
            total = total + D * (c if m % 2 else -c)
        L.append(total * unit)
    LOGGER.debug(f"log_conn: rank {module.rank}, K={P.K}")
    return CrysConnModule(module.desc, L)


def exp_action(module: CrysConnModule) -> List[LaurentMatrix]:
    """G_i = sum_{m<K} t^[m] E_m with E_0 = I, E_(m+1) = L_i E_m + d^log(E_m)."""
    P = module.desc.params
    t = pd_log_q(P)
    t_div = [pd_divided_power(t, m) for m in range(P.K)]
    out = []
    for i in range(1, module.desc.d + 1):
        E = LaurentMatrix.identity(module.desc, module.rank)
        G = E
        for m in range(1, P.K):
            E = module.apply(i, E)
            if not t_div[m].is_zero():
                G = G + E * t_div[m]
        out.append(G)
    return out


def dp_action_formula(module: CrysConnModule) -> List[LaurentMatrix]:
    """G_i = sum_{m<K} mu^[m] U_i^m V_m with V_0 = I, V_(m+1) = U_i^(-1)(L_i V_m + d^log V_m)."""
    P = module.desc.params
    desc = module.desc
    out = []
    for i in range(1, desc.d + 1):
        U_inv = LaurentElem.variable(desc, i, -1)
        V = LaurentMatrix.identity(desc, module.rank)
        G = V
        for m in range(1, P.K):
            V = module.apply(i, V) * U_inv
            coef = P.mu_divided(m)
            if not coef.is_zero():
                G = G + V * (LaurentElem.variable(desc, i, m) * coef)
        out.append(G)
    return out


def group_from_conn(module: CrysConnModule, precision: int = None) -> CrysGroupModule:
    return CrysGroupModule.from_G(module.desc, exp_action(module), precision)


# Griffiths transversality on weight filtrations
def _order(x: LaurentElem) -> int:
    K = x.desc.params.K
    return min((c.order() for c in x.terms.values()), default=K)


def is_transversal(matrices: Sequence[LaurentMatrix], weights: Sequence[int]) -> bool:
    """Each operator maps Fil^r into Fil^(r-1), with Fil^r(D^n) = sum_b Fil^(r - w_b)(D) e_b.

    Fil^r(D) is spanned by the basis elements of PD-degree >= r, so the (a, b)
    entry must have PD-order at least w_b - 1 - w_a.
    """
    for M in matrices:
        for a, row in enumerate(M.rows):
            for b, x in enumerate(row):
                need = weights[b] - 1 - weights[a]
                if need > 0 and _order(x) < need:
                    return False
    return True


# Saturated filtrations on Z-lattices
def _full(n: int) -> np.ndarray:
    return np.eye(n, dtype=object)


@dataclass
class FilteredModule:
    """Fil^r of Z^n for r in [lo, hi]; Fil^r = Z^n below lo and f^(r-hi) Fil^hi above hi."""

    rank: int
    f: int
    lo: int
    hi: int
    fil: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.f in (0, 1, -1):
            raise PreconditionViolation("f must be a non-unit non-zero-divisor", {"f": self.f})
        if self.lo > self.hi:
            raise PreconditionViolation("empty filtration window", {"window": [self.lo, self.hi]})
        self.fil = {r: lattice_basis(as_int_matrix(self.fil.get(r, _full(self.rank)), rows=self.rank), self.rank)
                    for r in range(self.lo, self.hi + 1)}
        for r in range(self.lo - 1, self.hi + 1):
            if not lattice_leq(self.level(r + 1), self.level(r)):
                raise NotMultiplicative("filtration is not decreasing", {"r": r})
            if not lattice_leq(self.f * self.level(r), self.level(r + 1)):
                raise NotMultiplicative("f Fil^r is not contained in Fil^(r+1)", {"r": r})

    def level(self, r: int) -> np.ndarray:
        if r < self.lo:
            return _full(self.rank)
        if r > self.hi:
            return (self.f ** (r - self.hi)) * self.fil[self.hi]
        return self.fil[r]

    def contains(self, r: int, x: Sequence[int]) -> bool:
        return lattice_leq(np.array(x, dtype=object).reshape(-1, 1), self.level(r))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FilteredModule) or self.rank != other.rank or self.f != other.f:
            return False
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return all(lattice_equal(self.level(r), other.level(r)) for r in range(lo - 1, hi + 2))

    __hash__ = None

    def to_json(self) -> Dict:
        return {"rank": self.rank, "f": self.f, "window": [self.lo, self.hi],
                "generators": {str(r): [[int(v) for v in self.fil[r][:, j]] for j in range(self.fil[r].shape[1])]
                               for r in range(self.lo, self.hi + 1)}}

    @staticmethod
    def from_json(data: Dict) -> "FilteredModule":
        try:
            n = int(data["rank"])
            lo, hi = (int(x) for x in data["window"])
            fil = {}
            for r, gens in data["generators"].items():
                fil[int(r)] = np.array(gens, dtype=object).T.reshape(n, -1) if gens else np.zeros((n, 0), dtype=object)
            return FilteredModule(n, int(data["f"]), lo, hi, fil)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad filtered module JSON: {e}")


def saturate(F: FilteredModule) -> FilteredModule:
    """Fil_sat^r = {x : f^s x in Fil^(r+s) for some s}; s = hi - r suffices."""
    fil = {}
    for r in range(F.lo, F.hi + 1):
        s = F.hi - r
        fil[r] = lattice_preimage(F.f ** s, F.level(r + s), F.rank)
    return FilteredModule(F.rank, F.f, F.lo, F.hi, fil)


def is_saturated(F: FilteredModule) -> bool:
    return saturate(F) == F


def satisfies_f4(F: FilteredModule) -> bool:
    """x with f x in Fil^(r+1) lies in Fil^r."""
    return all(lattice_leq(lattice_preimage(F.f, F.level(r + 1), F.rank), F.level(r))
               for r in range(F.lo - 1, F.hi + 1))


@dataclass
class PlusModule:
    """The lattice f^(-e) span(B) inside Q^n."""

    basis: np.ndarray
    e: int
    f: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlusModule) or self.f != other.f:
            return False
        e = max(self.e, other.e)
        return lattice_equal(self.basis * self.f ** (e - self.e), other.basis * other.f ** (e - other.e))

    __hash__ = None


def plus_module(F: FilteredModule) -> PlusModule:
    """N^+ = union of f^(-r) Fil^r, which stabilizes at r = hi."""
    return PlusModule(F.level(F.hi), F.hi, F.f)


def from_plus(rank: int, plus: PlusModule, search: int = 64) -> FilteredModule:
    """Fil^r = f^r N^+ intersected with Z^n."""
    B = as_int_matrix(plus.basis, rows=rank)
    fil = {}
    lo = plus.e
    for step in range(search):
        r = plus.e - step
        L = lattice_preimage(plus.f ** step, B, rank)
        fil[r] = L
        lo = r
        if lattice_equal(L, _full(rank)):
            break
    else:
        raise PreconditionViolation("N^+ does not contain Z^n within the search bound", {"search": search})
    return FilteredModule(rank, plus.f, lo, plus.e, fil)
