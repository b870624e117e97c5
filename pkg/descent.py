"""
1-cocycle descent

Cocycles A_i = alpha(gamma_i) over the level-s Laurent algebra, twisting by
invertible matrices, and the successive approximation that moves a cocycle
A_i in I + c1 M_n(level s) into I + c1 M_n(A^box) up to the precision ideal.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from errors import (
    MembershipViolated,
    NotDivisible,
    PrecisionExhausted,
    PreconditionViolation,
    SchemaError,
    Singular,
    SingularTwist,
)
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from rings import QElem, RingParams, ideal_contains, solve_multiple, split_exponent

LOGGER = logging.getLogger(__name__)


@dataclass
class Cocycle:
    """Values A_i of a 1-cocycle on the generators of Z^d, with the pair (c0, c1)."""

    desc: AlgebraDesc
    A: List[LaurentMatrix]
    c0: QElem
    c1: QElem

    def __post_init__(self):
        if self.desc.twist != 0 or self.desc.level < 1:
            raise PreconditionViolation("cocycles live on an untwisted algebra of level >= 1", self.desc.to_json())
        if len(self.A) != self.desc.d:
            raise PreconditionViolation("need one matrix per generator", {"d": self.desc.d, "given": len(self.A)})
        self.A = [a.at_level(self.desc.level) for a in self.A]

    @property
    def rank(self) -> int:
        return self.A[0].n

    @property
    def params(self) -> RingParams:
        return self.desc.params

    def to_json(self) -> Dict:
        return {"desc": self.desc.to_json(), "rank": self.rank, "matrices": [a.to_json() for a in self.A],
                "c0": self.c0.to_json(), "c1": self.c1.to_json()}

    @staticmethod
    def from_json(data: Dict, c0: QElem = None, c1: QElem = None) -> "Cocycle":
        try:
            desc = AlgebraDesc.from_json(data["desc"])
            mats = [LaurentMatrix.from_json(desc, m) for m in data["matrices"]]
            if c0 is None:
                c0 = QElem.from_json(data["c0"]) if "c0" in data else desc.params.xi(1)
            if c1 is None:
                c1 = QElem.from_json(data["c1"]) if "c1" in data else desc.params.mu()
            return Cocycle(desc, mats, c0, c1)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad cocycle JSON: {e}", {"keys": sorted(data) if isinstance(data, dict) else None})


def default_pair(params: RingParams) -> Tuple[QElem, QElem]:
    """(c0, c1) = (xi_1, mu)."""
    return params.xi(1), params.mu()


def check_pair(c0: QElem, c1: QElem) -> bool:
    """c1 = c0 mu_1, mu in (c1), c1 in (mu_1)."""
    P = c0.params
    return (c1 == c0 * P.mu_level(1) and ideal_contains(P.mu(), [c1]) and ideal_contains(c1, [P.mu_level(1)]))


def _entries(M: LaurentMatrix):
    for a, row in enumerate(M.rows):
        for b, x in enumerate(row):
            yield a, b, x


def in_congruence(M: LaurentMatrix, c1: QElem, c0: QElem, m: Optional[int]) -> bool:
    """M - I in c1 M_n(A^box) + c1 c0^m M_n(level s); m=None asks for no non-integral part."""
    D = M - LaurentMatrix.identity(M.desc, M.n)
    tail = None if m is None else c1 * (c0 ** m)
    for _, _, x in _entries(D):
        for k, c in x.terms.items():
            integral = all(e % x.desc.denom == 0 for e in k)
            if integral:
                if not ideal_contains(c, [c1]):
                    return False
            elif tail is None or not ideal_contains(c, [tail]):
                return False
    return True


def validate(c: Cocycle) -> bool:
    if not check_pair(c.c0, c.c1):
        LOGGER.debug("(c0, c1) is not an admissible pair")
        return False
    for i, Ai in enumerate(c.A, start=1):
        if not in_congruence(Ai, c.c1, c.c0, 0):
            LOGGER.debug(f"A_{i} is not the identity modulo c1")
            return False
    d = c.desc.d
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            if not c.A[i - 1] @ c.A[j - 1].gamma(i) == c.A[j - 1] @ c.A[i - 1].gamma(j):
                LOGGER.debug(f"cocycle condition fails for generators {i}, {j}")
                return False
    return True


def twist(c: Cocycle, X: LaurentMatrix, X_inv: LaurentMatrix = None) -> Cocycle:
    """(alpha X)(gamma_i) = X^{-1} A_i gamma_i(X)."""
    X = X.at_level(c.desc.level)
    if X_inv is None:
        try:
            X_inv = X.neumann_inverse() if (X - LaurentMatrix.identity(X.desc, X.n)).divisible_by(
                [c.params.from_int(c.params.p), c.params.v()]) else X.inverse()
        except Singular as e:
            raise SingularTwist("twisting matrix is not invertible", e.details)
    X_inv = X_inv.at_level(c.desc.level)
    A = [X_inv @ Ai @ X.gamma(i) for i, Ai in enumerate(c.A, start=1)]
    return Cocycle(c.desc, A, c.c0, c.c1)


def _solving_index(k: Tuple[int, ...], denom: int, p: int) -> Optional[int]:
    best, best_v = None, None
    for i, e in enumerate(k):
        if e % denom == 0:
            continue
        a, j = split_exponent(Fraction(e, denom), p)
        if best is None or -j < best_v:
            best, best_v = i, -j
    return best


def _check_precision(c: Cocycle, m: int):
    target = c.c1 * (c.c0 ** (m + 1))
    P = c.params
    for Ai in c.A:
        for _, _, x in _entries(Ai):
            for coeff in x.terms.values():
                if coeff.eff_N < P.N and not ideal_contains(P.from_int(P.p ** coeff.eff_N), [target]):
                    raise PrecisionExhausted("p-adic precision below the next congruence", {"m": m, "effN": coeff.eff_N})
                if coeff.eff_M < P.M:
                    vpow = P.element([0] * coeff.eff_M + [1])
                    if not ideal_contains(vpow, [target]):
                        raise PrecisionExhausted("v-adic precision below the next congruence", {"m": m, "effM": coeff.eff_M})


def improve_once(c: Cocycle, m: int) -> Tuple[LaurentMatrix, Cocycle]:
    """One step: X_m in I + c0^{m+1} M_n with twist(c, X_m) in the class of exponent m + 1."""
    if not all(in_congruence(Ai, c.c1, c.c0, m) for Ai in c.A):
        raise MembershipViolated("cocycle is not in I + c1 M(A^box) + c1 c0^m M", {"m": m})
    _check_precision(c, m)
    P, desc, n, p = c.params, c.desc, c.rank, c.desc.p
    denom = desc.denom
    Y_entries = [[LaurentElem.zero(desc) for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            terms = {}
            candidates = {}
            for i, Ai in enumerate(c.A):
                for k, coeff in Ai[a, b].terms.items():
                    if all(e % denom == 0 for e in k):
                        continue
                    if _solving_index(k, denom, p) == i:
                        candidates[k] = coeff
            for k, Q in candidates.items():
                i = _solving_index(k, denom, p)
                num, j = split_exponent(Fraction(k[i], denom), p)
                u = P._root_analog(num, j)
                scale = P._root_analog(p ** (j - 1), j)
                try:
                    R = solve_multiple(Q, c.c1)
                except NotDivisible as e:
                    raise MembershipViolated("non-integral term is not divisible by c1", e.details)
                terms[k] = -(c.c0 * scale * u.inverse() * R)
            Y_entries[a][b] = LaurentElem(desc, terms)
    Y = LaurentMatrix(desc, Y_entries)
    X = LaurentMatrix.identity(desc, n) + Y
    twisted = twist(c, X)
    if not all(in_congruence(Ai, c.c1, c.c0, m + 1) for Ai in twisted.A):
        raise MembershipViolated("improved cocycle misses the next congruence", {"m": m + 1})
    LOGGER.debug(f"descent step m={m}: Y has {sum(len(x.terms) for r in Y.rows for x in r)} terms")
    return X, twisted


@dataclass
class DescentResult:
    X: LaurentMatrix
    cocycle: Cocycle
    m: Optional[int]
    precision_ideal: Optional[QElem]
    steps: int

    def to_json(self) -> Dict:
        return {"X": self.X.to_json(), "descended": self.cocycle.to_json(), "m": self.m,
                "precision_ideal": None if self.precision_ideal is None else self.precision_ideal.to_json()}


def non_integral_vanishes(c: Cocycle) -> bool:
    return all(in_congruence(Ai, c.c1, c.c0, None) for Ai in c.A)


def descend(c: Cocycle, max_steps: int = None) -> DescentResult:
    """Iterate improve_once until the non-integral part vanishes or precision runs out."""
    if not all(in_congruence(Ai, c.c1, c.c0, 0) for Ai in c.A):
        raise MembershipViolated("cocycle is not the identity modulo c1")
    P = c.params
    if max_steps is None:
        max_steps = P.N * P.M + 2
    X = LaurentMatrix.identity(c.desc, c.rank)
    current, m, steps = c, 0, 0
    while not non_integral_vanishes(current) and steps < max_steps:
        try:
            Xm, current = improve_once(current, m)
        except PrecisionExhausted as e:
            LOGGER.info(f"descent stopped at m={m}: {e}")
            break
        X = X @ Xm
        m += 1
        steps += 1
    if non_integral_vanishes(current):
        m_out, ideal = None, None
    else:
        m_out, ideal = m, c.c1 * (c.c0 ** m)
    result = DescentResult(X, current, m_out, ideal, steps)
    if not twist(c, X).A == current.A:
        raise MembershipViolated("descended cocycle is not the twist of the input by X")
    LOGGER.info(f"descent: {steps} steps, m={m_out}")
    return result


def integral_part(c: Cocycle) -> List[LaurentMatrix]:
    """Matrices restricted to integral exponents, at level 0."""
    out = []
    for Ai in c.A:
        out.append(Ai.map(lambda x: x.decompose_integral()[0], c.desc.with_(level=0)))
    return out
