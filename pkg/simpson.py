"""
Local q-Simpson transport

push sends a q-Higgs module H over A^box(1) to the q-connection F^*H over
A^box; pull recovers a Higgs module from a q-connection with Frobenius
structure through the lattice Fil^b of the Frobenius pullback. Also: the
operators alpha_i^(k), three-valued quasi-nilpotence checks, the p-fold power
formula of the pushed connection, formula-level full faithfulness and the
Higgs -> de Rham embedding with its quasi-isomorphism verdict.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    BadExponentB,
    BoundExceeded,
    NoBasisWithinBound,
    NotDivisible,
    PreconditionViolation,
    Singular,
    WindowExceeded,
)
from homcomplex import ChainMap, cohomology, quasi_iso_check
from laurent import LaurentElem, LaurentMatrix
from linalg import kernel_mod, rref_mod_p
from qconn import (
    FrobStructure,
    QConnModule,
    QHiggsModule,
    Window,
    apply_connection,
    check_flat,
    gauge,
    gauge_frobenius,
    horizontal_maps,
    qde_rham,
    qhiggs_complex,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class NygaardConfig:
    """Exponent b of Fil^b and the U-degree bound D of the basis search."""

    b: int = 0
    D: int = 1
    max_subsets: int = 5000

    def __post_init__(self):
        if self.b < 0 or self.D < 0:
            raise PreconditionViolation("b and D must be non-negative", {"b": self.b, "D": self.D})


def push(H: QHiggsModule, fs: FrobStructure = None):
    """B_i = F(T_i).

    A Frobenius structure hosted on H or on its push is carried to the push;
    matrices written over the Frobenius twist are sent through F.
    """
    N = QConnModule(H.desc.with_(twist=0), [T.rel_frobenius_F() for T in H.T])
    if fs is None:
        return N
    if not (fs.host is H or fs.host == H or fs.host == N):
        raise PreconditionViolation("Frobenius structure belongs to another module",
                                    {"host": type(fs.host).__name__, "rank": H.rank})
    Pm, Qm = fs.P, fs.Q
    if Pm.desc.twist == 1:
        Pm = Pm.rel_frobenius_F()
        Qm = Qm.rel_frobenius_F() if Qm is not None else None
    return N, FrobStructure(N, Pm, fs.r, Qm, fs.c)


def alpha(i: int, k: int, H: QHiggsModule) -> Tuple[LaurentMatrix, LaurentMatrix]:
    """alpha_i^(k) = q^k T_i + [k]_q I and its inverse."""
    P = H.desc.params
    if k % P.p == 0:
        raise PreconditionViolation(f"[{k}]_q is not a unit", {"k": k})
    eye = LaurentMatrix.identity(H.desc, H.rank)
    A = H.T[i - 1] * P.q_power(k) + eye * P.q_analog(k)
    try:
        A_inv = A.inverse()
    except Singular as e:
        raise Singular(f"alpha_{i}^({k}) is singular", {"i": i, "k": k, **e.details})
    if not A @ A_inv == eye:
        raise Singular(f"alpha_{i}^({k}) inverse leaves a residual", {"i": i, "k": k})
    return A, A_inv


def alpha_apply(H: QHiggsModule, i: int, k: int, column: Sequence[LaurentElem]) -> List[LaurentElem]:
    """q^k Theta_i^log(e x) + [k]_q e x, on coordinates."""
    P = H.desc.params
    theta = apply_connection(H, i, column)
    return [t * P.q_power(k) + x * P.q_analog(k) for t, x in zip(theta, column)]


def nonlog_apply(module, i: int, column: Sequence[LaurentElem]) -> List[LaurentElem]:
    inv = LaurentElem.variable(module.B[0].desc, i, -1)
    return [x * inv for x in apply_connection(module, i, column)]


def _ideal(module, mode: str):
    P = module.desc.params
    if mode == "[p]_q":
        return [P.tilde_xi()]
    if mode == "(p,[p]_q)":
        return [P.from_int(P.p), P.tilde_xi()]
    raise PreconditionViolation(f"unknown nilpotence mode {mode!r}")


def check_nilpotent(module, mode: str = "[p]_q", bound: int = 16) -> bool:
    """True when every basis vector reaches the ideal; False on a cycle outside it."""
    ideal = _ideal(module, mode)
    desc = module.B[0].desc
    n = module.rank
    for i in range(1, module.desc.d + 1):
        for b in range(n):
            x = [LaurentElem.one(desc) if t == b else LaurentElem.zero(desc) for t in range(n)]
            seen: List[List[LaurentElem]] = []
            for step in range(bound + 1):
                if all(c.divisible_by(ideal) for c in x):
                    LOGGER.debug(f"e_{b} reaches the ideal under operator {i} after {step} steps")
                    break
                if any(all(a == c for a, c in zip(s, x)) for s in seen):
                    LOGGER.debug(f"e_{b} cycles outside the ideal under operator {i}")
                    return False
                seen.append(x)
                x = nonlog_apply(module, i, x)
            else:
                raise BoundExceeded("nilpotence undecided within the bound", {"i": i, "basis": b, "bound": bound})
    return True


@dataclass
class PullResult:
    higgs: QHiggsModule
    frob: FrobStructure
    witness: LaurentMatrix
    witness_inv: LaurentMatrix


def _fil_lattice_candidates(N: QConnModule, Qs: LaurentMatrix, D: int) -> List[List[LaurentElem]]:
    """Columns y with Qs y having p-divisible exponents, reduced to an F_p-independent family."""
    desc, n, p = N.desc, N.rank, N.desc.p
    window = Window(desc, n, D)
    rows: Dict[Tuple, int] = {}
    images = []
    for _, col in window.basis():
        y = LaurentMatrix(desc, [[c] for c in col])
        z = Qs @ y
        img = {}
        for a in range(n):
            for k, c in z[a, 0].terms.items():
                if all(x % p == 0 for x in k):
                    continue
                for j, x in enumerate(c.coeffs):
                    if x:
                        img[rows.setdefault((a, k, j), len(rows))] = x
        images.append(img)
    A = np.zeros((max(1, len(rows)), window.dim), dtype=object)
    for col, img in enumerate(images):
        for r, x in img.items():
            A[r, col] = x
    Nexp = desc.params.N
    gens = [g for g, e in kernel_mod(A, p, Nexp) if e == Nexp]
    if not gens:
        return []
    # reductions modulo (p, v): the v^0 coefficient of each monomial slot
    slots = sorted({(b, k) for (b, k, j) in window._index})
    slot_index = {s: t for t, s in enumerate(slots)}
    red = np.zeros((len(gens), len(slots)), dtype=object)
    for g_i, g in enumerate(gens):
        for (b, k, j), idx in window._index.items():
            if j == 0:
                red[g_i, slot_index[(b, k)]] = int(g[idx]) % p
    R, pivots, T = rref_mod_p(red, p)
    m = p ** Nexp
    G = np.column_stack(gens).astype(object)
    candidates = []
    for r in range(len(pivots)):
        vec = G.dot(np.array([int(t) for t in T[r]], dtype=object)) % m
        support = [slots[c] for c in range(len(slots)) if R[r, c]]
        weight = (len(support), sum(abs(x) for (_, k) in support for x in k))
        candidates.append((weight, window.from_vector(vec)))
    candidates.sort(key=lambda t: t[0])
    LOGGER.debug(f"Fil lattice: {len(gens)} generators, {len(candidates)} independent reductions")
    return [c for _, c in candidates]


def pull(N: QConnModule, fs: FrobStructure, cfg: NygaardConfig = NygaardConfig()) -> PullResult:
    """Higgs module H with push(H) = gauge(N, Y) for an emitted invertible Y."""
    if fs.Q is None or not fs.check_witness():
        raise PreconditionViolation("Frobenius structure needs a valid witness P Q = [p]_q^c I")
    if not check_flat(N):
        raise PreconditionViolation("pull needs a flat q-connection")
    e = cfg.b + fs.r - fs.c
    if e < 0:
        raise BadExponentB(f"b={cfg.b} is below c - r = {fs.c - fs.r}", {"b": cfg.b, "r": fs.r, "c": fs.c})
    P = N.desc.params
    Qs = fs.Q * (P.tilde_xi() ** e)
    candidates = _fil_lattice_candidates(N, Qs, cfg.D)
    n = N.rank
    tried = 0
    for subset in combinations(candidates, n):
        tried += 1
        if tried > cfg.max_subsets:
            break
        Y = LaurentMatrix.from_columns(N.desc, subset)
        if Y.det().leading_monomial_unit() is None:
            continue
        Y_inv = Y.inverse()
        gauged = gauge(N, Y, Y_inv)
        try:
            T = [B.rel_frobenius_F_inverse() for B in gauged.B]
        except NotDivisible:
            LOGGER.debug("candidate basis gives exponents outside F(A^box(1)); trying the next one")
            continue
        H = QHiggsModule(N.desc.with_(twist=1), T)
        if not all(a == b for a, b in zip(push(H).B, gauged.B)):
            continue
        moved = gauge_frobenius(fs, Y, Y_inv)
        LOGGER.info(f"pull: basis found after {tried} candidate subsets")
        return PullResult(H, FrobStructure(H, moved.P, moved.r, moved.Q, moved.c), Y, Y_inv)
    raise NoBasisWithinBound("no basis of Fil^b within the degree bound", {"D": cfg.D, "b": cfg.b, "tried": tried})


def connection_power_formula(H: QHiggsModule, i: int) -> Tuple[bool, LaurentMatrix, LaurentMatrix]:
    """p-fold non-log operator of push(H) against U_i^{-p} F(alpha^(-p+1) ... alpha^(-1) T_i), per basis vector."""
    N = push(H)
    p, n = H.desc.p, H.rank
    desc0, desc1 = N.desc, H.desc
    lhs_cols, rhs_cols = [], []
    for b in range(n):
        x = [LaurentElem.one(desc0) if t == b else LaurentElem.zero(desc0) for t in range(n)]
        for _ in range(p):
            x = nonlog_apply(N, i, x)
        lhs_cols.append(x)
        y = H.T[i - 1].column(b)
        for k in range(1, p):
            y = alpha_apply(H, i, -k, y)
        shift = LaurentElem.variable(desc0, i, -p)
        rhs_cols.append([c.rel_frobenius_F() * shift for c in y])
    lhs = LaurentMatrix.from_columns(desc0, lhs_cols)
    rhs = LaurentMatrix.from_columns(desc0, rhs_cols)
    return lhs == rhs, lhs, rhs


def fully_faithful_check(H: QHiggsModule, H2: QHiggsModule, radius: int = 1) -> bool:
    """Horizontal maps push(H) -> push(H2) have no Frobenius components away from kappa = 0."""
    maps = horizontal_maps(push(H), push(H2), radius)
    zero = (0,) * H.desc.d
    for F, _ in maps:
        for row in F.rows:
            for entry in row:
                for kappa, comp in entry.frobenius_components().items():
                    if kappa != zero and not comp.is_zero():
                        LOGGER.info(f"horizontal map with non-integral component at {kappa}")
                        return False
    return True


@dataclass
class EmbedReport:
    chain_map: ChainMap
    quasi_iso: bool
    failures: List[Tuple[Tuple[int, ...], int]] = field(default_factory=list)


def higgs_derham_embed(H: QHiggsModule, radius: int = 1) -> EmbedReport:
    """F_H: Higgs complex on the window |k| <= radius into the q-de Rham complex on |k| <= p*radius."""
    p, d, n = H.desc.p, H.desc.d, H.rank
    N = push(H)
    source = qhiggs_complex(H, radius)
    target = qde_rham(N, p * radius)
    w_src = Window(H.desc, n, radius)
    w_tgt = Window(N.desc, n, p * radius)
    block = np.zeros((w_tgt.dim, w_src.dim), dtype=object)
    for (b, k, j), idx in w_src._index.items():
        block[w_tgt._index[(b, tuple(p * x for x in k), j)], idx] = 1
    maps = {}
    for deg in range(d + 1):
        copies = comb(d, deg)
        M = np.zeros((copies * w_tgt.dim, copies * w_src.dim), dtype=object)
        for c in range(copies):
            M[c * w_tgt.dim:(c + 1) * w_tgt.dim, c * w_src.dim:(c + 1) * w_src.dim] = block
        maps[deg] = M
    fmap = ChainMap(source, target, maps)
    failures = []
    for kappa in product(range(p), repeat=d):
        for i in range(1, d + 1):
            if kappa[i - 1] == 0:
                continue
            try:
                alpha(i, kappa[i - 1], H)
            except Singular:
                failures.append((kappa, i))
    verdict = quasi_iso_check(fmap)
    LOGGER.info(f"Higgs -> de Rham embedding: quasi-iso={verdict}, singular alphas at {failures}")
    return EmbedReport(fmap, verdict, failures)
