"""
Verification suites

Seeded property batteries over manufactured instances, one per module, plus
the instance generators they share with the test-suite and the CLI. Each
trial draws from random.Random(seed * 1_000_003 + t); trials may run on a
thread pool and failures are reported sorted by seed.
"""

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Settings, get_settings
from crysdict import (
    CrysGroupModule,
    FilteredModule,
    crys_desc,
    dp_action_formula,
    exp_action,
    from_plus,
    is_transversal,
    log_conn,
    plus_module,
    satisfies_f4,
    saturate,
)
from descent import Cocycle, default_pair, descend, in_congruence, twist, validate
from errors import QPrismError, SingularMatrix
from homcomplex import AbInvariants, FreeComplex, Z, bockstein_comparison, cohomology, eta, koszul
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix, matrix_from_ints
from linalg import as_int_matrix, integer_kernel, lattice_basis, lattice_leq, lattice_preimage
from qconn import (
    FrobStructure,
    QConnModule,
    QHiggsModule,
    check_flat,
    check_horizontal,
    from_gamma,
    gauge,
    gauge_frobenius,
    hom_module,
    tensor,
    to_gamma,
    volte,
)
from rings import PDElem, PDParams, QElem, RingParams, ideal_contains, t_over_mu, verify_log_identity
from simpson import (
    NygaardConfig,
    check_nilpotent,
    connection_power_formula,
    higgs_derham_embed,
    pull,
    push,
)
from strat import (
    ModPConnection,
    ModPHiggs,
    base_desc,
    check_recursion,
    check_strat,
    extract,
    higgs_extract,
    higgs_taylor,
    pd_poly_iso_check,
    taylor,
)
from witt import (
    WittBase,
    asw_fixed_points,
    delta_pair_sum,
    frobenius_F,
    ghost,
    manufactured_phi,
    verschiebung_V,
    witt_matrix_inverse,
    witt_vec,
)

LOGGER = logging.getLogger(__name__)

SUITE_NAMES = ("rings", "witt", "complex", "qconn", "simpson", "descent", "strat", "crys")

Findings = List[Tuple[str, Dict]]


@dataclass
class Failure:
    seed: int
    prop: str
    payload: Dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    params: Dict
    trials: int
    failures: List[Failure] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def table(self) -> pd.DataFrame:
        """One row per failure; empty frame with the same columns when clean."""
        rows = [{"seed": f.seed, "property": f.prop, "payload": f.payload} for f in self.failures]
        return pd.DataFrame(rows, columns=["seed", "property", "payload"])

    def to_json(self) -> Dict:
        return {
            "suite": self.suite,
            "params": self.params,
            "trials": self.trials,
            "failures": [{"seed": f.seed, "property": f.prop, "payload": f.payload} for f in self.failures],
            "elapsed": round(self.elapsed, 3),
            "ok": self.ok,
        }


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------


def random_qelem(P: RingParams, rng: random.Random) -> QElem:
    return P.element([rng.randrange(P.modulus) for _ in range(P.M)])


def random_pdelem(P: PDParams, rng: random.Random, order: int = 0) -> PDElem:
    return P.element([rng.randrange(P.modulus) if i >= order else 0 for i in range(P.K)])


def commuting_int_matrices(rng: random.Random, n: int, count: int, bound: int = 3) -> List[np.ndarray]:
    """Integer polynomials in one random matrix C, so they commute."""
    C = np.array([[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)], dtype=object)
    powers = [np.eye(n, dtype=int).astype(object)]
    for _ in range(1, n):
        powers.append(powers[-1].dot(C))
    out = []
    for _ in range(count):
        M = np.zeros((n, n), dtype=object)
        for Pk in powers:
            M = M + rng.randint(-bound, bound) * Pk
        out.append(M)
    return out


def unitriangular(desc: AlgebraDesc, n: int, rng: random.Random, coeff: Callable[[], object],
                  radius: int = 1) -> Tuple[LaurentMatrix, LaurentMatrix]:
    """X = I + E with E strictly upper triangular monomials, and X^{-1} = sum (-E)^k."""
    rows = [[LaurentElem.zero(desc) for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            exp = tuple(rng.randint(-radius, radius) for _ in range(desc.d))
            rows[a][b] = LaurentElem.monomial(desc, exp, coeff())
    E = LaurentMatrix(desc, rows)
    eye = LaurentMatrix.identity(desc, n)
    X_inv, term = eye, eye
    for _ in range(1, n):
        term = term @ (-E)
        X_inv = X_inv + term
    return eye + E, X_inv


def flat_qconn(P: RingParams, d: int, n: int, rng: random.Random) -> QConnModule:
    """Constant commuting B gauged by a unitriangular Laurent matrix."""
    desc = AlgebraDesc(P, d)
    B = [matrix_from_ints(desc, M.tolist()) for M in commuting_int_matrices(rng, n, d)]
    X, X_inv = unitriangular(desc, n, rng, lambda: random_qelem(P, rng))
    return gauge(QConnModule(desc, B), X, X_inv)


def curved_qconn(P: RingParams, d: int, n: int, rng: random.Random) -> QConnModule:
    """Constant B_1, B_2 with B_1 B_2 != B_2 B_1 (when n >= 2), hence not flat."""
    desc = AlgebraDesc(P, d)
    B = [LaurentMatrix.zeros(desc, n) for _ in range(d)]
    if n >= 2 and d >= 2:
        e12 = [[1 if (a, b) == (0, 1) else 0 for b in range(n)] for a in range(n)]
        e21 = [[1 if (a, b) == (1, 0) else 0 for b in range(n)] for a in range(n)]
        B[0] = matrix_from_ints(desc, e12)
        B[1] = matrix_from_ints(desc, e21) * rng.choice([1, 2])
    return QConnModule(desc, B)


def flat_higgs(P: RingParams, d: int, n: int, rng: random.Random) -> QHiggsModule:
    desc = AlgebraDesc(P, d, twist=1)
    T = [matrix_from_ints(desc, M.tolist()) for M in commuting_int_matrices(rng, n, d)]
    X, X_inv = unitriangular(desc, n, rng, lambda: random_qelem(P, rng))
    return gauge(QHiggsModule(desc, T), X, X_inv)


def frobenius_constant(P: RingParams, a: int) -> QElem:
    """Fixed point c of c -> q^(-pa) (phi([p]_q) phi(c) - phi([a]_q)).

    Then B = [p]_q c on a rank-one module is horizontal for P = U^(pa).
    """
    shift = P.q_power(-P.p * a)
    lead = P.tilde_xi().frobenius()
    corr = P.q_analog(a).frobenius()
    c = P.from_int(-a)
    for _ in range(4 * (P.N + P.M) + 4):
        nxt = shift * (lead * c.frobenius() - corr)
        if nxt == c:
            return nxt
        c = nxt
    return c


def frobenius_higgs(P: RingParams, d: int, n: int, rng: random.Random,
                    mix: bool = True) -> Tuple[QHiggsModule, FrobStructure]:
    """Direct sum of rank-one Frobenius modules, mixed by a constant unitriangular integer matrix.

    Returns the Higgs module and a Frobenius structure (P, Q, r=0, c=0) on its push.
    """
    desc1 = AlgebraDesc(P, d, twist=1)
    desc0 = desc1.with_(twist=0)
    tx = P.tilde_xi()
    avecs = [tuple(rng.randint(-1, 1) for _ in range(d)) for _ in range(n)]
    T = []
    for i in range(d):
        diag = [LaurentElem.constant(desc1, tx * frobenius_constant(P, a[i])) for a in avecs]
        T.append(LaurentMatrix.diagonal(desc1, diag))
    Pm = LaurentMatrix.diagonal(desc0, [LaurentElem.monomial(desc0, tuple(P.p * x for x in a)) for a in avecs])
    Qm = LaurentMatrix.diagonal(desc0, [LaurentElem.monomial(desc0, tuple(-P.p * x for x in a)) for a in avecs])
    H = QHiggsModule(desc1, T)
    fs = FrobStructure(push(H), Pm, 0, Qm, 0)
    if mix and n >= 2:
        X1, X1_inv = unitriangular(desc1, n, rng, lambda: rng.randint(-2, 2), radius=0)
        H = gauge(H, X1, X1_inv)
        X0 = X1.map(lambda x: x.rel_frobenius_F(), desc0)
        X0_inv = X1_inv.map(lambda x: x.rel_frobenius_F(), desc0)
        moved = gauge_frobenius(fs, X0, X0_inv)
        fs = FrobStructure(push(H), moved.P, 0, moved.Q, 0)
    return H, fs


def manufactured_cocycle(P: RingParams, d: int, n: int, rng: random.Random) -> Cocycle:
    """Integral b_i = I + mu C_i twisted by X0 = I + xi_1 Y0, Y0 with exponents in (1/p) Z \\ Z."""
    desc = AlgebraDesc(P, d, 0, 1)
    c0, c1 = default_pair(P)
    mu = P.mu()
    eye = LaurentMatrix.identity(desc, n)
    b = [eye + matrix_from_ints(desc, M.tolist()) * mu for M in commuting_int_matrices(rng, n, d)]
    p = P.p
    rows = [[LaurentElem.zero(desc) for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for c in range(n):
            terms = LaurentElem.zero(desc)
            for _ in range(rng.randint(0, 2)):
                exp = [rng.randint(-p, p) for _ in range(d)]
                j = rng.randrange(d)
                if exp[j] % p == 0:
                    exp[j] += rng.choice([-1, 1])
                terms = terms + LaurentElem.monomial(desc, tuple(exp), random_qelem(P, rng))
            rows[a][c] = terms
    X0 = eye + LaurentMatrix(desc, rows) * c0
    return twist(Cocycle(desc, b, c0, c1), X0)


def flat_modp_connection(p: int, N: int, d: int, n: int, rng: random.Random) -> ModPConnection:
    """Constant commuting N_i gauged by X: N' = X^{-1}(N X + dX)."""
    desc = base_desc(p, N, d)
    base = [matrix_from_ints(desc, M.tolist()) for M in commuting_int_matrices(rng, n, d)]
    X, X_inv = unitriangular(desc, n, rng, lambda: rng.randint(-3, 3))
    gauged = [X_inv @ (Ni @ X + X.map(lambda x: x.derivative(i))) for i, Ni in enumerate(base, start=1)]
    return ModPConnection(desc, gauged)


def commuting_higgs_field(p: int, N: int, d: int, n: int, rng: random.Random) -> ModPHiggs:
    desc = base_desc(p, N, d)
    return ModPHiggs(desc, [matrix_from_ints(desc, M.tolist()) for M in commuting_int_matrices(rng, n, d)])


def crys_group_module(p: int, N: int, K: int, d: int, n: int, rng: random.Random) -> CrysGroupModule:
    """Constant commuting B gauged by X; G = I + mu B is again a commuting family."""
    desc = crys_desc(p, N, K, d)
    B = [matrix_from_ints(desc, M.tolist()) for M in commuting_int_matrices(rng, n, d)]
    X, X_inv = unitriangular(desc, n, rng, lambda: random_pdelem(desc.params, rng))
    return gauge(CrysGroupModule(desc, B), X, X_inv)


def transversal_group_module(p: int, N: int, K: int, n: int, weights: Sequence[int],
                             rng: random.Random) -> CrysGroupModule:
    """d = 1, constant B whose (a, b) entry has PD-order >= w_b - 1 - w_a."""
    desc = crys_desc(p, N, K, 1)
    P = desc.params
    rows = [[LaurentElem.constant(desc, random_pdelem(P, rng, max(0, weights[b] - 1 - weights[a])))
             for b in range(n)] for a in range(n)]
    return CrysGroupModule(desc, [LaurentMatrix(desc, rows)])


def random_filtration(rng: random.Random, n: int, f: int, lo: int, hi: int) -> FilteredModule:
    """Top-down: Fil^r = Fil^(r+1) + f^(r-lo+1) Z^n + random part of {x : f x in Fil^(r+1)}."""
    h = hi - lo + 1
    k = rng.randint(0, n)
    extra = np.array([[rng.randint(-3, 3) for _ in range(k)] for _ in range(n)], dtype=object).reshape(n, k)
    top = np.hstack([(f ** h) * np.eye(n, dtype=int).astype(object), extra])
    fil = {hi: lattice_basis(top, n)}
    for r in range(hi - 1, lo - 1, -1):
        allowed = lattice_preimage(f, fil[r + 1], n)
        pick = [allowed[:, j] for j in range(allowed.shape[1]) if rng.random() < 0.5]
        cols = [fil[r + 1], (f ** (r - lo + 1)) * np.eye(n, dtype=int).astype(object)]
        if pick:
            cols.append(np.column_stack(pick))
        fil[r] = lattice_basis(np.hstack(cols), n)
    return FilteredModule(n, f, lo, hi, fil)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


def _rings_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    P = RingParams(S.p, S.N, S.s, S.M)
    x, y, z = (random_qelem(P, rng) for _ in range(3))
    if not (x * y) * z == x * (y * z):
        out.append(("ring-assoc", {"x": x.to_json(), "y": y.to_json(), "z": z.to_json()}))
    if not x * (y + z) == x * y + x * z:
        out.append(("ring-distrib", {"x": x.to_json(), "y": y.to_json(), "z": z.to_json()}))
    if not x * y == y * x:
        out.append(("ring-commut", {"x": x.to_json(), "y": y.to_json()}))
    if not x.frobenius() == x ** P.p + x.delta() * P.p:
        out.append(("phi-delta", {"x": x.to_json()}))
    if not (x * y).frobenius() == x.frobenius() * y.frobenius():
        out.append(("phi-mult", {"x": x.to_json(), "y": y.to_json()}))
    law = delta_pair_sum(x, y, x.delta(), y.delta(), P.p, P.one())
    if not law == (x + y).delta():
        out.append(("delta-add", {"x": x.to_json(), "y": y.to_json()}))
    if t == 0:
        mu = P.mu()
        for r in range(1, P.s + 1):
            if not P.xi(r) * P.mu_level(r) == mu:
                out.append(("xi-mu", {"r": r}))
            if not ideal_contains(P.xi(r) - P.from_int(P.p ** r), [P.mu_level(r)]):
                out.append(("xi-congruence", {"r": r}))
        if not ideal_contains(P.tilde_xi() - P.from_int(P.p), [mu]):
            out.append(("pq-congruence", {}))
        for p in (2, 3, 5):
            if not verify_log_identity(p, 5, 12):
                out.append(("pd-log-identity", {"p": p}))
    return out


def _random_invertible_witt(base: WittBase, r: int, n: int, rng: random.Random):
    while True:
        X = [[witt_vec(base, [tuple(rng.randrange(base.p) for _ in range(base.k)) for _ in range(r)])
              for _ in range(n)] for _ in range(n)]
        try:
            witt_matrix_inverse(X)
            return X
        except SingularMatrix:
            continue


def _witt_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    p, r = S.p, 3
    base = WittBase("Z", p)
    x = witt_vec(base, [rng.randint(-9, 9) for _ in range(r)])
    y = witt_vec(base, [rng.randint(-9, 9) for _ in range(r)])
    gx, gy = ghost(x), ghost(y)
    if ghost(x + y) != tuple(a + b for a, b in zip(gx, gy)):
        out.append(("ghost-add", {"x": x.to_json(), "y": y.to_json()}))
    if ghost(x * y) != tuple(a * b for a, b in zip(gx, gy)):
        out.append(("ghost-mul", {"x": x.to_json(), "y": y.to_json()}))
    if not frobenius_F(verschiebung_V(x)) == x.scale(p):
        out.append(("FV=p", {"x": x.to_json()}))
    zbase = WittBase("Zmod", p, S.N)
    xm = witt_vec(zbase, [rng.randrange(p ** S.N) for _ in range(r)])
    if not frobenius_F(verschiebung_V(xm)) == xm.scale(p):
        out.append(("FV=p-mod", {"x": xm.to_json()}))
    if t < 10:
        fbase = WittBase("Fq", 2, 0, 4)
        X = _random_invertible_witt(fbase, 2, 2, rng)
        phi = manufactured_phi(X)
        fp = asw_fixed_points(phi)
        if not (fp.is_free_rank_n and fp.spans):
            out.append(("asw-free", {"orders": fp.orders}))
        for g in fp.generators:
            if phi.apply(g) != g:
                out.append(("asw-fixed", {"generator": [w.to_json() for w in g]}))
        cols = [[X[a][b] for a in range(2)] for b in range(2)]
        for col in cols:
            if phi.apply(col) != col:
                out.append(("asw-columns", {"column": [w.to_json() for w in col]}))
    return out


def _koszul_expected(d: int, m: int, g: int) -> AbInvariants:
    from math import comb
    groups = [(0, ())]
    for k in range(1, d + 1):
        groups.append((0, (g,) * (m * comb(d - 1, k - 1))))
    return AbInvariants(0, groups)


def _random_three_term(rng: random.Random) -> FreeComplex:
    r0, r1, r2 = rng.randint(1, 3), rng.randint(2, 4), rng.randint(1, 3)
    d0 = as_int_matrix([[rng.randint(-4, 4) for _ in range(r0)] for _ in range(r1)])
    L = integer_kernel(d0.T).T
    if L.shape[0] == 0:
        d1 = np.zeros((r2, r1), dtype=object)
    else:
        R = as_int_matrix([[rng.randint(-3, 3) for _ in range(L.shape[0])] for _ in range(r2)])
        d1 = R.dot(L)
    return FreeComplex(Z, 0, [r0, r1, r2], [d0, d1])


def _complex_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    d = rng.randint(1, 3)
    m = rng.randint(1, 2)
    g = rng.choice([2, 3, 4, 5, 6])
    rest = commuting_int_matrices(rng, m, d)
    endos = [g * np.eye(m, dtype=int).astype(object)] + [g * A for A in rest[1:]]
    got = cohomology(koszul(endos))
    if not got == _koszul_expected(d, m, g):
        out.append(("koszul-unit", {"d": d, "m": m, "g": g, "got": got.to_json()}))
    A = commuting_int_matrices(rng, m, d)
    scaled = koszul([g * a for a in A])
    if not cohomology(eta(scaled, g)) == cohomology(koszul(A)):
        out.append(("eta-koszul", {"g": g, "A": [a.tolist() for a in A]}))
    C = _random_three_term(rng)
    f = rng.choice([2, 3, 4])
    ok, lhs, rhs = bockstein_comparison(C, f)
    if not ok:
        out.append(("bockstein", {"complex": C.to_json(), "f": f, "lhs": lhs.to_json(), "rhs": rhs.to_json()}))
    return out


def _qconn_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    P = RingParams(S.p, S.N, 0, S.M)
    n = max(1, min(S.rank, 2))
    N = flat_qconn(P, S.d, n, rng) if t % 2 == 0 else curved_qconn(P, S.d, n, rng)
    G = to_gamma(N)
    if not all(a == b for a, b in zip(from_gamma(G).B, N.B)):
        out.append(("gamma-roundtrip", {"module": [b.to_json() for b in N.B]}))
    if check_flat(N) != check_flat(G):
        out.append(("flat-iff-commuting", {"module": [b.to_json() for b in N.B]}))
    if t % 2 == 0:
        if not check_flat(N):
            out.append(("manufactured-flat", {}))
        N2 = flat_qconn(P, S.d, 1, rng)
        if not check_flat(tensor(N, N2)):
            out.append(("tensor-flat", {}))
        if not check_flat(hom_module(N, N2)):
            out.append(("hom-flat", {}))
        eye = LaurentMatrix.identity(N.desc, N.rank)
        for Gi, Gi_inv in volte(N):
            if not Gi @ Gi_inv == eye:
                out.append(("volte-inverse", {}))
    return out


def _simpson_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    P = RingParams(S.p, S.N, 0, S.M)
    n = max(1, min(S.rank, 2))
    if t < 50:
        H = flat_higgs(P, S.d, n, rng)
        N = push(H)
        if check_flat(H) and not check_flat(N):
            out.append(("push-flat", {"higgs": [T.to_json() for T in H.T]}))
        if N.rank != H.rank:
            out.append(("push-rank", {}))
        ok, _, _ = connection_power_formula(H, 1)
        if not ok:
            out.append(("p-fold-power", {"higgs": [T.to_json() for T in H.T]}))
    if t < 25:
        H, fs = frobenius_higgs(P, 1, n, rng)
        N, fsN = fs.host, fs
        if not check_horizontal(fsN):
            out.append(("frobenius-horizontal", {"higgs": [T.to_json() for T in H.T]}))
        if not check_nilpotent(N, "[p]_q"):
            out.append(("frobenius-nilpotent", {}))
        res = pull(N, fsN, NygaardConfig(b=0, D=max(S.degree_bound, P.p)))
        if not all(a == b for a, b in zip(push(res.higgs).B, gauge(N, res.witness, res.witness_inv).B)):
            out.append(("pull-push", {"higgs": [T.to_json() for T in H.T]}))
        if res.higgs.rank != H.rank or not res.frob.check_witness():
            out.append(("pull-frobenius", {}))
    if t < 10:
        desc1 = AlgebraDesc(P, 1, twist=1)
        T = np.eye(n, k=1, dtype=int).astype(object) * rng.randint(-2, 2) + P.p * rng.randint(-1, 1) * np.eye(n, dtype=int).astype(object)
        H = QHiggsModule(desc1, [matrix_from_ints(desc1, T.tolist())])
        rep = higgs_derham_embed(H, 1)
        if not rep.quasi_iso or rep.failures:
            out.append(("embed-quasi-iso", {"T": T.tolist(), "failures": [list(k) for k, _ in rep.failures]}))
    if t == 0:
        desc1 = AlgebraDesc(P, 1, twist=1)
        bad = LaurentMatrix.scalar(desc1, 1, -P.q_power(-1))
        rep = higgs_derham_embed(QHiggsModule(desc1, [bad]), 1)
        if not rep.failures:
            out.append(("embed-negative-control", {}))
    return out


def _descent_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    P = RingParams(S.p, S.N, max(1, S.s), S.M)
    n = max(1, min(S.rank, 2))
    c = manufactured_cocycle(P, S.d, n, rng)
    if not validate(c):
        out.append(("cocycle-valid", {"cocycle": c.to_json()}))
        return out
    res = descend(c)
    if not all(in_congruence(A, c.c1, c.c0, res.m) for A in res.cocycle.A):
        out.append(("descent-post", {"cocycle": c.to_json(), "m": res.m}))
    if not twist(c, res.X).A == res.cocycle.A:
        out.append(("descent-twist", {"cocycle": c.to_json()}))
    return out


def _strat_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    d = max(1, min(S.d, 2))
    n = max(1, min(S.rank, 2))
    K = min(S.pd_trunc, 6)
    N = flat_modp_connection(S.p, S.N, d, n, rng)
    eps = taylor(N, K)
    if not check_strat(eps):
        out.append(("strat-cocycle", {"connection": N.to_json()}))
    if not all(a == b for a, b in zip(extract(eps).N, N.N)):
        out.append(("taylor-extract", {"connection": N.to_json()}))
    if not check_recursion(eps, N):
        out.append(("taylor-recursion", {"connection": N.to_json()}))
    H = commuting_higgs_field(S.p, S.N, d, n, rng)
    heps = higgs_taylor(H, K)
    if not check_strat(heps, higgs=True):
        out.append(("higgs-strat-cocycle", {}))
    if not all(a == b for a, b in zip(higgs_extract(heps).theta, H.theta)):
        out.append(("higgs-extract", {}))
    if t < 25:
        nv = rng.randint(1, 2)
        u = [rng.choice([1, 3, 5, 7]) for _ in range(nv)]
        b = []
        for _ in range(nv):
            poly = {}
            for a in product(range(2), repeat=nv):
                if sum(a) and rng.random() < 0.5:
                    poly[a] = rng.randint(0, 1)
            b.append(poly)
        if not pd_poly_iso_check(2, nv, u, b, 8):
            out.append(("pd-poly-iso", {"u": u, "b": [{",".join(map(str, k)): v for k, v in bi.items()} for bi in b]}))
    return out


def _brute_saturation(F: FilteredModule, sat: FilteredModule, box: int = 2) -> Optional[Dict]:
    n = F.rank
    for r in range(F.lo, F.hi + 1):
        for x in product(range(-box, box + 1), repeat=n):
            vec = np.array(x, dtype=object).reshape(n, 1)
            expected = any(lattice_leq((F.f ** s) * vec, F.level(r + s)) for s in range(F.hi - r + 2))
            if expected != sat.contains(r, x):
                return {"r": r, "x": list(x)}
    return None


def _crys_trial(rng: random.Random, S: Settings, t: int) -> Findings:
    out: Findings = []
    d = max(1, min(S.d, 2))
    n = max(1, min(S.rank, 2))
    K = min(S.pd_trunc, 10)
    if t < 50:
        module = crys_group_module(S.p, S.N, K, d, n, rng)
        L = log_conn(module)
        G = exp_action(L)
        if not all(a == b for a, b in zip(G, module.G)):
            out.append(("exp-log", {"module": module.to_json()}))
        if not all(a == b for a, b in zip(dp_action_formula(L), G)):
            out.append(("dp-formula", {"module": module.to_json()}))
        if not L.is_flat():
            out.append(("log-flat", {"module": module.to_json()}))
        weights = sorted(rng.randint(0, 2) for _ in range(n))
        T = transversal_group_module(S.p, S.N, K, n, weights, rng)
        if not is_transversal(log_conn(T).L, weights):
            out.append(("transversality", {"weights": weights, "module": T.to_json()}))
    if t == 0 and not t_over_mu(PDParams(S.p, S.N, K, "crystalline")).is_unit():
        out.append(("t-over-mu-unit", {}))
    rank = rng.randint(1, 3)
    f = rng.choice([2, 3])
    lo = rng.randint(0, 1)
    hi = lo + rng.randint(0, 2)
    F = random_filtration(rng, rank, f, lo, hi)
    sat = saturate(F)
    if not satisfies_f4(sat):
        out.append(("saturate-f4", {"filtration": F.to_json()}))
    if not saturate(sat) == sat:
        out.append(("saturate-idempotent", {"filtration": F.to_json()}))
    if not plus_module(sat) == plus_module(F):
        out.append(("plus-invariant", {"filtration": F.to_json()}))
    if not from_plus(rank, plus_module(sat)) == sat:
        out.append(("plus-roundtrip", {"filtration": F.to_json()}))
    if t < 10:
        bad = _brute_saturation(F, sat)
        if bad is not None:
            out.append(("saturate-oracle", {"filtration": F.to_json(), **bad}))
    return out


# suite name -> (trial function, stated trial count or None)
SUITES: Dict[str, Tuple[Callable[[random.Random, Settings, int], Findings], Optional[int]]] = {
    "rings": (_rings_trial, 200),
    "witt": (_witt_trial, 100),
    "complex": (_complex_trial, 50),
    "qconn": (_qconn_trial, 100),
    "simpson": (_simpson_trial, 50),
    "descent": (_descent_trial, 100),
    "strat": (_strat_trial, 100),
    "crys": (_crys_trial, 50),
}


def trial_seed(seed: int, t: int) -> int:
    return seed * 1_000_003 + t


def run_suite(name: str, settings: Settings = None) -> SuiteReport:
    """Run one suite; an exception inside a trial is reported as a failure of that trial."""
    settings = settings or get_settings()
    if name not in SUITES:
        raise QPrismError(f"unknown suite {name!r}", {"known": list(SUITES)})
    fn, stated = SUITES[name]
    trials = settings.trials if stated is None else min(settings.trials, stated)
    start = time.perf_counter()

    def one(t: int) -> List[Failure]:
        seed = trial_seed(settings.seed, t)
        rng = random.Random(seed)
        try:
            found = fn(rng, settings, t)
        except QPrismError as e:
            LOGGER.warning(f"{name} trial {t} raised {type(e).__name__}: {e}")
            found = [("raised", {"error": e.to_json()})]
        return [Failure(seed, prop, payload) for prop, payload in found]

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            batches = list(pool.map(one, range(trials)))
    else:
        batches = [one(t) for t in range(trials)]
    failures = sorted((f for batch in batches for f in batch), key=lambda f: (f.seed, f.prop))
    report = SuiteReport(name, asdict(settings), trials, failures, time.perf_counter() - start)
    LOGGER.info(f"suite {name}: {trials} trials, {len(failures)} failures, {report.elapsed:.2f}s")
    return report


def run_all(settings: Settings = None) -> SuiteReport:
    settings = settings or get_settings()
    start = time.perf_counter()
    reports = [run_suite(name, settings) for name in SUITE_NAMES]
    failures = [replace(f, prop=f"{r.suite}/{f.prop}") for r in reports for f in r.failures]
    failures.sort(key=lambda f: (f.seed, f.prop))
    return SuiteReport("all", asdict(settings), sum(r.trials for r in reports), failures,
                       time.perf_counter() - start)


def verify(suite: str, settings: Settings = None) -> SuiteReport:
    return run_all(settings) if suite == "all" else run_suite(suite, settings)
