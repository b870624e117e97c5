"""
Bounded complexes of finitely generated abelian groups

Complexes of free Z- or Z/m-modules (optionally with relation lattices, i.e.
finitely presented terms), Koszul complexes of commuting endomorphisms,
cohomology through Smith normal forms, the decalage functor eta_f, cones and
quasi-isomorphism checks, and the Bockstein complex of C/f.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint

from errors import (
    FZeroDivisor,
    NoSolution,
    NonCommuting,
    NotAChainMap,
    PreconditionViolation,
    SchemaError,
    UnsupportedCoefficients,
)
from linalg import (
    as_int_matrix,
    integer_kernel,
    integer_solve,
    invariant_factors,
    lattice_basis,
    modular_cohomology_invariants,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Coefficients:
    """'Z', or 'Zmod' with modulus m."""

    kind: str = "Z"
    m: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Zmod"):
            raise UnsupportedCoefficients(f"unsupported coefficient ring {self.kind!r}", {"kind": self.kind})
        if self.kind == "Zmod" and self.m < 2:
            raise UnsupportedCoefficients("modulus must be at least 2", {"m": self.m})

    @property
    def prime_power(self) -> Optional[Tuple[int, int]]:
        if self.kind != "Zmod":
            return None
        f = factorint(self.m)
        if len(f) != 1:
            return None
        (p, N), = f.items()
        return int(p), int(N)

    def reduce(self, A: np.ndarray) -> np.ndarray:
        return A % self.m if self.kind == "Zmod" else A

    def to_json(self) -> Dict:
        return {"kind": self.kind, "m": self.m}


Z = Coefficients("Z")


def Zmod(m: int) -> Coefficients:
    return Coefficients("Zmod", m)


@dataclass
class FreeComplex:
    """C^lo -> ... -> C^hi with C^i = coeff^{ranks[i-lo]} / relations.

    diffs[i] is the matrix of d: C^{lo+i} -> C^{lo+i+1}, shape (ranks[i+1], ranks[i]).
    """

    coeff: Coefficients
    lo: int
    ranks: List[int]
    diffs: List[np.ndarray]
    relations: Optional[List[np.ndarray]] = None

    def __post_init__(self):
        self.diffs = [self.coeff.reduce(as_int_matrix(d, rows=self.ranks[i + 1], cols=self.ranks[i]))
                      for i, d in enumerate(self.diffs)]
        if len(self.diffs) != max(0, len(self.ranks) - 1):
            raise PreconditionViolation("need one differential between consecutive degrees",
                                        {"ranks": self.ranks, "diffs": len(self.diffs)})
        for i, d in enumerate(self.diffs):
            if d.shape != (self.ranks[i + 1], self.ranks[i]):
                raise PreconditionViolation("differential has the wrong shape", {"degree": self.lo + i})
        if self.relations is not None:
            self.relations = [as_int_matrix(R, rows=self.ranks[i]) for i, R in enumerate(self.relations)]
        self.check_dd()

    @property
    def hi(self) -> int:
        return self.lo + len(self.ranks) - 1

    def rank(self, i: int) -> int:
        k = i - self.lo
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    def diff(self, i: int) -> np.ndarray:
        """d: C^i -> C^{i+1}."""
        k = i - self.lo
        if 0 <= k < len(self.diffs):
            return self.diffs[k]
        return np.zeros((self.rank(i + 1), self.rank(i)), dtype=object)

    def relation(self, i: int) -> np.ndarray:
        n = self.rank(i)
        rel = []
        if self.relations is not None and 0 <= i - self.lo < len(self.relations):
            rel.append(self.relations[i - self.lo])
        if self.coeff.kind == "Zmod":
            rel.append(self.coeff.m * np.eye(n, dtype=int).astype(object))
        if not rel:
            return np.zeros((n, 0), dtype=object)
        return np.hstack(rel)

    def check_dd(self):
        for i in range(len(self.diffs) - 1):
            dd = self.diffs[i + 1].dot(self.diffs[i])
            if not _in_span(self.relation(self.lo + i + 2), dd):
                raise PreconditionViolation("d o d is not zero", {"degree": self.lo + i})

    def to_json(self) -> Dict:
        out = {"coeff": self.coeff.to_json(), "lo": self.lo, "hi": self.hi, "ranks": list(self.ranks),
               "diffs": [[[int(x) for x in row] for row in d] for d in self.diffs]}
        if self.relations is not None:
            out["relations"] = [[[int(x) for x in row] for row in R] for R in self.relations]
        return out

    @staticmethod
    def from_json(data: Dict) -> "FreeComplex":
        try:
            c = data.get("coeff", {"kind": "Z"})
            coeff = Coefficients(c.get("kind", "Z"), int(c.get("m", 0)))
            ranks = [int(r) for r in data["ranks"]]
            diffs = [np.array(d, dtype=object).reshape(ranks[i + 1], ranks[i]) for i, d in enumerate(data["diffs"])]
            rels = data.get("relations")
            if rels is not None:
                rels = [np.array(R, dtype=object).reshape(ranks[i], -1) if len(R) else np.zeros((ranks[i], 0), dtype=object)
                        for i, R in enumerate(rels)]
            return FreeComplex(coeff, int(data.get("lo", 0)), ranks, diffs, rels)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad complex JSON: {e}", {"data": data})


def _in_span(R: np.ndarray, X: np.ndarray) -> bool:
    """Every column of X lies in the Z-span of the columns of R."""
    X = as_int_matrix(X)
    if not X.any():
        return True
    if R.shape[1] == 0:
        return False
    for j in range(X.shape[1]):
        if X[:, j].any():
            try:
                integer_solve(R, X[:, j])
            except NoSolution:
                return False
    return True


@dataclass
class AbInvariants:
    """Per-degree cohomology: free rank plus torsion invariant factors."""

    lo: int
    groups: List[Tuple[int, Tuple[int, ...]]] = field(default_factory=list)

    def degree(self, i: int) -> Tuple[int, Tuple[int, ...]]:
        k = i - self.lo
        return self.groups[k] if 0 <= k < len(self.groups) else (0, ())

    def is_zero(self) -> bool:
        return all(r == 0 and not t for r, t in self.groups)

    def order(self, i: int) -> Optional[int]:
        r, t = self.degree(i)
        if r:
            return None
        out = 1
        for f in t:
            out *= f
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, AbInvariants):
            return False
        lo = min(self.lo, other.lo)
        hi = max(self.lo + len(self.groups), other.lo + len(other.groups))
        return all(self.degree(i) == other.degree(i) for i in range(lo, hi))

    def to_json(self) -> Dict:
        return {"lo": self.lo, "degrees": [{"free": r, "torsion": list(t)} for r, t in self.groups]}


def _quotient_invariants(rank: int, X: np.ndarray) -> Tuple[int, Tuple[int, ...]]:
    """Z^rank / span(X)."""
    if rank == 0:
        return 0, ()
    if X.shape[1] == 0:
        return rank, ()
    fs = invariant_factors(X)
    return rank - len(fs), tuple(f for f in fs if f != 1)


def _presented_degree(C: FreeComplex, i: int) -> Tuple[int, Tuple[int, ...]]:
    n = C.rank(i)
    if n == 0:
        return 0, ()
    d = C.diff(i)
    R_next = C.relation(i + 1)
    # cycles: {x : d x in span(R_next)}
    if d.shape[0] == 0:
        cycles = np.eye(n, dtype=int).astype(object)
    else:
        K = integer_kernel(np.hstack([d, -R_next]) if R_next.shape[1] else d)
        cycles = lattice_basis(K[:n, :], n)
    k = cycles.shape[1]
    if k == 0:
        return 0, ()
    bounds = np.hstack([C.diff(i - 1), C.relation(i)])
    if bounds.shape[1] == 0:
        return k, ()
    X = np.column_stack([integer_solve(cycles, bounds[:, j]) for j in range(bounds.shape[1])])
    return _quotient_invariants(k, X)


def cohomology(C: FreeComplex) -> AbInvariants:
    pp = C.coeff.prime_power
    groups = []
    for i in range(C.lo, C.hi + 1):
        if pp is not None and C.relations is None:
            p, N = pp
            n = C.rank(i)
            d_prev = C.diff(i - 1) if C.rank(i - 1) else None
            d_next = C.diff(i) if C.rank(i + 1) else None
            groups.append((0, tuple(modular_cohomology_invariants(d_prev, d_next, p, N, n))))
        else:
            groups.append(_presented_degree(C, i))
    inv = AbInvariants(C.lo, groups)
    LOGGER.debug(f"cohomology of complex with ranks {C.ranks}: {inv.groups}")
    return inv


def koszul(endos: Sequence, coeff: Coefficients = Z) -> FreeComplex:
    """Koszul complex of commuting endomorphisms delta_1..delta_d of coeff^n, degrees 0..d."""
    endos = [coeff.reduce(as_int_matrix(e)) for e in endos]
    d = len(endos)
    if d == 0:
        raise PreconditionViolation("need at least one endomorphism")
    n = endos[0].shape[0]
    for a in range(d):
        for b in range(a + 1, d):
            comm = coeff.reduce(endos[a].dot(endos[b]) - endos[b].dot(endos[a]))
            if comm.any():
                raise NonCommuting("endomorphisms do not commute", {"pair": [a + 1, b + 1]})
    subsets = [list(combinations(range(d), k)) for k in range(d + 1)]
    ranks = [len(s) * n for s in subsets]
    diffs = []
    for k in range(d):
        index = {S: t for t, S in enumerate(subsets[k + 1])}
        D = np.zeros((ranks[k + 1], ranks[k]), dtype=object)
        for s, S in enumerate(subsets[k]):
            for j in range(d):
                if j in S:
                    continue
                sign = -1 if sum(1 for i in S if i < j) % 2 else 1
                T = index[tuple(sorted(S + (j,)))]
                D[T * n:(T + 1) * n, s * n:(s + 1) * n] += sign * endos[j]
        diffs.append(D)
    return FreeComplex(coeff, 0, ranks, diffs)


def shift(C: FreeComplex, k: int) -> FreeComplex:
    """C[k]^i = C^{i+k}, d -> (-1)^k d."""
    sign = -1 if k % 2 else 1
    return FreeComplex(C.coeff, C.lo - k, list(C.ranks), [sign * d for d in C.diffs],
                       None if C.relations is None else list(C.relations))


@dataclass
class ChainMap:
    source: FreeComplex
    target: FreeComplex
    maps: Dict[int, np.ndarray]

    def component(self, i: int) -> np.ndarray:
        f = self.maps.get(i)
        if f is None:
            return np.zeros((self.target.rank(i), self.source.rank(i)), dtype=object)
        return as_int_matrix(f, rows=self.target.rank(i), cols=self.source.rank(i))


def chain_map_check(f: ChainMap) -> bool:
    A, B = f.source, f.target
    for i in range(min(A.lo, B.lo) - 1, max(A.hi, B.hi) + 1):
        lhs = B.diff(i).dot(f.component(i)) if B.rank(i) and A.rank(i) else None
        rhs = f.component(i + 1).dot(A.diff(i)) if A.rank(i) and A.rank(i + 1) else None
        if lhs is None and rhs is None:
            continue
        if lhs is None:
            lhs = np.zeros_like(rhs)
        if rhs is None:
            rhs = np.zeros_like(lhs)
        if not _in_span(B.relation(i + 1), lhs - rhs):
            return False
    return True


def cone(f: ChainMap) -> FreeComplex:
    """cone^i = A^{i+1} + B^i, d(a, b) = (-d a, f a + d b)."""
    if not chain_map_check(f):
        raise NotAChainMap("map does not commute with the differentials")
    A, B = f.source, f.target
    if A.coeff != B.coeff:
        raise PreconditionViolation("cone of complexes over different coefficients")
    lo = min(A.lo - 1, B.lo)
    hi = max(A.hi - 1, B.hi)
    ranks = [A.rank(i + 1) + B.rank(i) for i in range(lo, hi + 1)]
    diffs = []
    for i in range(lo, hi):
        a0, b0, a1, b1 = A.rank(i + 1), B.rank(i), A.rank(i + 2), B.rank(i + 1)
        D = np.zeros((a1 + b1, a0 + b0), dtype=object)
        if a0 and a1:
            D[:a1, :a0] = -A.diff(i + 1)
        if a0 and b1:
            D[a1:, :a0] = f.component(i + 1)
        if b0 and b1:
            D[a1:, a0:] = B.diff(i)
        diffs.append(D)
    relations = None
    if A.relations is not None or B.relations is not None:
        relations = []
        for i in range(lo, hi + 1):
            ra = _own_relations(A, i + 1)
            rb = _own_relations(B, i)
            block = np.zeros((ra.shape[0] + rb.shape[0], ra.shape[1] + rb.shape[1]), dtype=object)
            block[:ra.shape[0], :ra.shape[1]] = ra
            block[ra.shape[0]:, ra.shape[1]:] = rb
            relations.append(block)
    return FreeComplex(A.coeff, lo, ranks, diffs, relations)


def _own_relations(C: FreeComplex, i: int) -> np.ndarray:
    n = C.rank(i)
    if C.relations is not None and 0 <= i - C.lo < len(C.relations):
        return C.relations[i - C.lo]
    return np.zeros((n, 0), dtype=object)


def quasi_iso_check(f: ChainMap) -> bool:
    return cohomology(cone(f)).is_zero()


def _require_integral(C: FreeComplex, f: int):
    if C.coeff.kind != "Z" or C.relations is not None:
        raise UnsupportedCoefficients("decalage needs a complex of free Z-modules", {"coeff": C.coeff.to_json()})
    if f == 0:
        raise FZeroDivisor("decalage along zero")


def _mod_f_cycles(C: FreeComplex, i: int, f: int) -> np.ndarray:
    """Basis of {y in Z^{r_i} : d y in f Z^{r_{i+1}}}."""
    n = C.rank(i)
    d = C.diff(i)
    if d.shape[0] == 0:
        return np.eye(n, dtype=int).astype(object)
    K = integer_kernel(np.hstack([d, -f * np.eye(d.shape[0], dtype=int).astype(object)]))
    return lattice_basis(K[:n, :], n)


def eta(C: FreeComplex, f: int) -> FreeComplex:
    """(eta_f C)^i = {x in f^i C^i : d x in f^{i+1} C^{i+1}}, with degrees counted from lo."""
    _require_integral(C, f)
    f = abs(f)
    bases = []
    for t, i in enumerate(range(C.lo, C.hi + 1)):
        bases.append((f ** t) * _mod_f_cycles(C, i, f))
    diffs = []
    for t, i in enumerate(range(C.lo, C.hi)):
        image = C.diff(i).dot(bases[t])
        diffs.append(np.column_stack([integer_solve(bases[t + 1], image[:, j]) for j in range(image.shape[1])])
                     if image.shape[1] else np.zeros((C.rank(i + 1), 0), dtype=object))
    return FreeComplex(Z, C.lo, list(C.ranks), diffs)


def reduce_mod(C: FreeComplex, f: int) -> FreeComplex:
    """C/f as a presented complex over Z."""
    _require_integral(C, f)
    rels = [abs(f) * np.eye(n, dtype=int).astype(object) for n in C.ranks]
    return FreeComplex(Z, C.lo, list(C.ranks), list(C.diffs), rels)


def bockstein_complex(C: FreeComplex, f: int) -> FreeComplex:
    """(H^*(C/f), Bock_f) as a presented complex: [x] -> [d x / f]."""
    _require_integral(C, f)
    f = abs(f)
    cycles = {i: _mod_f_cycles(C, i, f) for i in range(C.lo, C.hi + 1)}
    ranks, diffs, rels = [], [], []
    for i in range(C.lo, C.hi + 1):
        Zi = cycles[i]
        n = Zi.shape[1]
        ranks.append(n)
        bounds = np.hstack([f * np.eye(C.rank(i), dtype=int).astype(object), C.diff(i - 1)])
        rels.append(np.column_stack([integer_solve(Zi, bounds[:, j]) for j in range(bounds.shape[1])])
                    if n else np.zeros((0, 0), dtype=object))
    for i in range(C.lo, C.hi):
        Zi, Zn = cycles[i], cycles[i + 1]
        image = C.diff(i).dot(Zi)
        cols = []
        for j in range(image.shape[1]):
            col = image[:, j]
            if any(x % f for x in col):
                raise PreconditionViolation("cycle lattice is not closed mod f", {"degree": i})
            cols.append(integer_solve(Zn, np.array([x // f for x in col], dtype=object)))
        diffs.append(np.column_stack(cols) if cols else np.zeros((Zn.shape[1], 0), dtype=object))
    return FreeComplex(Z, C.lo, ranks, diffs, rels)


def bockstein_comparison(C: FreeComplex, f: int) -> Tuple[bool, AbInvariants, AbInvariants]:
    """Cohomology of (eta_f C)/f against cohomology of the Bockstein complex."""
    lhs = cohomology(reduce_mod(eta(C, f), f))
    rhs = cohomology(bockstein_complex(C, f))
    ok = lhs == rhs
    LOGGER.info(f"Bockstein comparison f={f}: {'ok' if ok else 'MISMATCH'}")
    return ok, lhs, rhs


def complex_from_endomorphism(A, coeff: Coefficients = Z) -> FreeComplex:
    """Two-term complex [R^n --A--> R^n]."""
    A = as_int_matrix(A)
    return FreeComplex(coeff, 0, [A.shape[1], A.shape[0]], [A])
