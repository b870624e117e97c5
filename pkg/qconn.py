"""
Modules with flat q-connection

Finite free modules over a framed Laurent algebra described on a basis e by
logarithmic coordinate matrices: nabla_i^log(e x) = e (B_i gamma_i(x) + d_i(x)),
equivalently gamma_i(e x) = e G_i gamma_i(x) with G_i = I + mu B_i. The same
shape on the Frobenius twist gives q-Higgs fields. Includes the Gamma <-> nabla
dictionary, tensor / hom / volte, Frobenius pullback and structures, window
realizations of the q-de Rham and Higgs complexes, and horizontal maps.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import (
    NotDivisible,
    NotTrivialModMu,
    PreconditionViolation,
    SchemaError,
    Singular,
    VolteSingular,
    WindowExceeded,
)
from homcomplex import FreeComplex, Zmod, koszul
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix, monomials_in_window
from linalg import kernel_mod
from rings import QElem, RingParams

LOGGER = logging.getLogger(__name__)


@dataclass
class GammaModule:
    """Semilinear Z^d-action gamma_i(e) = e G_i."""

    desc: AlgebraDesc
    G: List[LaurentMatrix]
    G_inv: List[LaurentMatrix] = field(default_factory=list)

    def __post_init__(self):
        if self.desc.twist != 0:
            raise PreconditionViolation("group actions live on the untwisted algebra")
        if len(self.G) != self.desc.d:
            raise PreconditionViolation("need one matrix per generator", {"d": self.desc.d, "given": len(self.G)})
        mu = self.desc.params.mu()
        for i, Gi in enumerate(self.G, start=1):
            if not (Gi - LaurentMatrix.identity(self.desc, self.rank)).divisible_by([mu]):
                raise NotTrivialModMu("generator is not the identity modulo mu", {"generator": i})
        if not self.G_inv:
            try:
                self.G_inv = [Gi.neumann_inverse() for Gi in self.G]
            except Singular as e:
                raise VolteSingular("group generator is not invertible", e.details)

    @property
    def rank(self) -> int:
        return self.G[0].n

    def check_commuting(self) -> bool:
        for i in range(1, self.desc.d + 1):
            for j in range(i + 1, self.desc.d + 1):
                lhs = self.G[i - 1] @ self.G[j - 1].gamma(i)
                rhs = self.G[j - 1] @ self.G[i - 1].gamma(j)
                if not lhs == rhs:
                    return False
        return True


@dataclass
class QConnModule:
    """nabla_i^log(e) = e B_i."""

    desc: AlgebraDesc
    B: List[LaurentMatrix]

    def __post_init__(self):
        if self.desc.twist != 0:
            raise PreconditionViolation("q-connections live on the untwisted algebra")
        if len(self.B) != self.desc.d:
            raise PreconditionViolation("need one matrix per coordinate", {"d": self.desc.d, "given": len(self.B)})

    @property
    def rank(self) -> int:
        return self.B[0].n


@dataclass
class QHiggsModule:
    """Theta_i^log(e) = e T_i over the Frobenius twist."""

    desc: AlgebraDesc
    T: List[LaurentMatrix]

    def __post_init__(self):
        if self.desc.twist != 1:
            raise PreconditionViolation("q-Higgs fields live on the Frobenius twist")
        if len(self.T) != self.desc.d:
            raise PreconditionViolation("need one matrix per coordinate", {"d": self.desc.d, "given": len(self.T)})

    @property
    def rank(self) -> int:
        return self.T[0].n

    @property
    def B(self) -> List[LaurentMatrix]:
        return self.T


Module = Union[QConnModule, QHiggsModule]


@dataclass
class FrobStructure:
    """phi(e (x) 1) = [p]_q^{-r} e P, with witness P Q = [p]_q^c I."""

    host: Module
    P: LaurentMatrix
    r: int = 0
    Q: Optional[LaurentMatrix] = None
    c: int = 0

    def check_witness(self) -> bool:
        if self.Q is None:
            return False
        tx = self.P.desc.params.tilde_xi()
        return self.P @ self.Q == LaurentMatrix.scalar(self.P.desc, self.P.n, tx ** self.c)


# Gamma <-> nabla


def from_gamma(G: GammaModule) -> QConnModule:
    mu = G.desc.params.mu()
    eye = LaurentMatrix.identity(G.desc, G.rank)
    try:
        B = [(Gi - eye).divide(mu) for Gi in G.G]
    except NotDivisible as e:
        raise NotTrivialModMu("generator is not the identity modulo mu", e.details)
    return QConnModule(G.desc, B)


def to_gamma(N: QConnModule) -> GammaModule:
    mu = N.desc.params.mu()
    eye = LaurentMatrix.identity(N.desc, N.rank)
    return GammaModule(N.desc, [eye + Bi * mu for Bi in N.B])


# Flatness


def flatness_defect(module: Module, i: int, j: int) -> LaurentMatrix:
    """B_i gamma_i(B_j) + d_i(B_j) - (B_j gamma_j(B_i) + d_j(B_i))."""
    Bi, Bj = module.B[i - 1], module.B[j - 1]
    lhs = Bi @ Bj.gamma(i) + Bj.dq_log(i)
    rhs = Bj @ Bi.gamma(j) + Bi.dq_log(j)
    return lhs - rhs


def check_flat(module: Union[Module, GammaModule]) -> bool:
    if isinstance(module, GammaModule):
        return module.check_commuting()
    d = module.desc.d
    return all(flatness_defect(module, i, j).is_zero() for i in range(1, d + 1) for j in range(i + 1, d + 1))


# Tensor, hom, volte


def _same_algebra(N: Module, N2: Module):
    if N.desc != N2.desc:
        raise PreconditionViolation("modules over different algebras", {"left": N.desc.to_json(), "right": N2.desc.to_json()})


def tensor(N: QConnModule, N2: QConnModule) -> QConnModule:
    """G (x) G' on e (x) e', so B = B (x) I + I (x) B' + mu B (x) B'."""
    _same_algebra(N, N2)
    mu = N.desc.params.mu()
    I1, I2 = LaurentMatrix.identity(N.desc, N.rank), LaurentMatrix.identity(N.desc, N2.rank)
    B = [Bi.kron(I2) + I1.kron(Bj) + Bi.kron(Bj) * mu for Bi, Bj in zip(N.B, N2.B)]
    return QConnModule(N.desc, B)


def volte(N: QConnModule) -> List[Tuple[LaurentMatrix, LaurentMatrix]]:
    """(I + mu B_i, its inverse) for each i."""
    mu = N.desc.params.mu()
    eye = LaurentMatrix.identity(N.desc, N.rank)
    out = []
    for i, Bi in enumerate(N.B, start=1):
        G = eye + Bi * mu
        try:
            out.append((G, G.neumann_inverse()))
        except Singular as e:
            raise VolteSingular(f"I + mu B_{i} is not invertible", e.details)
    return out


def hom_module(N: QConnModule, N2: QConnModule) -> QConnModule:
    """Hom(N, N') on matrix units E_ab (column-major), gamma(F) = G' gamma(F) G^{-1}.

    With G^{-1} = I + mu C, C = -G^{-1} B, the coordinates are
    C^T (x) I + I (x) B' + mu C^T (x) B'.
    """
    _same_algebra(N, N2)
    mu = N.desc.params.mu()
    I2 = LaurentMatrix.identity(N.desc, N2.rank)
    I1 = LaurentMatrix.identity(N.desc, N.rank)
    B = []
    for (G, G_inv), Bi, Bj in zip(volte(N), N.B, N2.B):
        C = -(G_inv @ Bi)
        Ct = C.transpose()
        B.append(Ct.kron(I2) + I1.kron(Bj) + Ct.kron(Bj) * mu)
    return QConnModule(N.desc, B)


def apply_connection(N: Module, i: int, column: Sequence[LaurentElem]) -> List[LaurentElem]:
    """Coordinates of nabla_i^log(e x) for the column x."""
    x = LaurentMatrix(N.B[0].desc, [[c] for c in column])
    out = N.B[i - 1] @ x.gamma(i) + x.dq_log(i)
    return out.column(0)


# Frobenius


def frob_pullback(N: QConnModule) -> QConnModule:
    tx = N.desc.params.tilde_xi()
    return QConnModule(N.desc, [Bi.frob_endo() * tx for Bi in N.B])


def gauge(N: Module, X: LaurentMatrix, X_inv: LaurentMatrix = None) -> Module:
    """Connection matrices on the basis e X: X^{-1}(B gamma(X) + d(X))."""
    if X_inv is None:
        X_inv = X.inverse()
    B = [X_inv @ (Bi @ X.gamma(i) + X.dq_log(i)) for i, Bi in enumerate(N.B, start=1)]
    return type(N)(N.desc, B)


def gauge_frobenius(fs: FrobStructure, X: LaurentMatrix, X_inv: LaurentMatrix = None) -> FrobStructure:
    if X_inv is None:
        X_inv = X.inverse()
    phiX = X.frob_endo()
    P = X_inv @ fs.P @ phiX
    Q = None
    if fs.Q is not None:
        Q = phiX.inverse() @ fs.Q @ X
    return FrobStructure(gauge(fs.host, X, X_inv), P, fs.r, Q, fs.c)


def horizontality_defect(N: QConnModule, P: LaurentMatrix, i: int) -> LaurentMatrix:
    tx = N.desc.params.tilde_xi()
    Bi = N.B[i - 1]
    return Bi @ P.gamma(i) + P.dq_log(i) - (P @ Bi.frob_endo()) * tx


def check_horizontal(fs: FrobStructure) -> bool:
    host = fs.host
    if isinstance(host, QHiggsModule):
        from simpson import push
        host = push(host)
    ok = all(horizontality_defect(host, fs.P, i).is_zero() for i in range(1, host.desc.d + 1))
    LOGGER.debug(f"horizontality: {ok}")
    return ok


# Window realizations


class Window:
    """Finite additive basis e_b * v^j * U^k of a rank-n module, k in a monomial window."""

    def __init__(self, desc: AlgebraDesc, n: int, radius: int = 1, monomials: Sequence[Tuple[int, ...]] = None):
        if not isinstance(desc.params, RingParams):
            raise PreconditionViolation("windows are built over truncated q-base rings")
        self.desc = desc
        self.n = n
        self.monomials = list(monomials) if monomials is not None else monomials_in_window(desc.d, radius, desc.level, desc.p)
        self.M = desc.params.M
        self._index = {}
        for b in range(n):
            for k in self.monomials:
                for j in range(self.M):
                    self._index[(b, k, j)] = len(self._index)

    @property
    def dim(self) -> int:
        return len(self._index)

    def basis(self) -> List[Tuple[Tuple[int, Tuple[int, ...], int], List[LaurentElem]]]:
        P = self.desc.params
        out = []
        for (b, k, j) in self._index:
            c = [0] * self.M
            c[j] = 1
            col = [LaurentElem.zero(self.desc) for _ in range(self.n)]
            col[b] = LaurentElem.monomial(self.desc, k, P.element(c, exact=True))
            out.append(((b, k, j), col))
        return out

    def to_vector(self, column: Sequence[LaurentElem], strict: bool = True) -> np.ndarray:
        v = np.zeros(self.dim, dtype=object)
        for b, x in enumerate(column):
            for k, c in x.at_level(self.desc.level).terms.items():
                for j, a in enumerate(c.coeffs):
                    if a == 0:
                        continue
                    idx = self._index.get((b, k, j))
                    if idx is None:
                        if strict:
                            raise WindowExceeded("operator leaves the monomial window", {"exp": list(k)})
                        continue
                    v[idx] = a
        return v

    def from_vector(self, v: Sequence[int]) -> List[LaurentElem]:
        P = self.desc.params
        buckets: Dict[Tuple[int, Tuple[int, ...]], List[int]] = {}
        for (b, k, j), idx in self._index.items():
            if int(v[idx]) % P.modulus:
                buckets.setdefault((b, k), [0] * self.M)[j] = int(v[idx])
        col = [LaurentElem.zero(self.desc) for _ in range(self.n)]
        for (b, k), coeffs in buckets.items():
            col[b] = col[b] + LaurentElem.monomial(self.desc, k, P.element(coeffs))
        return col

    def operator_matrix(self, fn: Callable[[List[LaurentElem]], List[LaurentElem]]) -> np.ndarray:
        cols = [self.to_vector(fn(col)) for _, col in self.basis()]
        return np.column_stack(cols) if cols else np.zeros((0, 0), dtype=object)


def connection_operators(module: Module, window: Window) -> List[np.ndarray]:
    return [window.operator_matrix(lambda col, i=i: apply_connection(module, i, col))
            for i in range(1, module.desc.d + 1)]


def qde_rham(N: QConnModule, radius: int = 1) -> FreeComplex:
    """Koszul complex of the nabla_i^log on a monomial window."""
    window = Window(N.desc, N.rank, radius)
    ops = connection_operators(N, window)
    LOGGER.debug(f"q-de Rham complex on a window of dimension {window.dim}")
    return koszul(ops, Zmod(N.desc.params.modulus))


def qhiggs_complex(H: QHiggsModule, radius: int = 1) -> FreeComplex:
    window = Window(H.desc, H.rank, radius)
    ops = connection_operators(H, window)
    return koszul(ops, Zmod(H.desc.params.modulus))


def horizontal_maps(N: QConnModule, N2: QConnModule, radius: int = 1) -> List[Tuple[LaurentMatrix, int]]:
    """Generators of {F : B' gamma_i(F) + d_i(F) = F B_i for all i} with F entries in a window."""
    _same_algebra(N, N2)
    n, n2 = N.rank, N2.rank
    window = Window(N.desc, n * n2, radius)

    def as_matrix(col):
        return LaurentMatrix(N.desc, [[col[a + b * n2] for b in range(n)] for a in range(n2)])

    rows: Dict[Tuple, int] = {}
    images = []
    for _, col in window.basis():
        F = as_matrix(col)
        img = {}
        for i in range(1, N.desc.d + 1):
            E = N2.B[i - 1] @ F.gamma(i) + F.dq_log(i) - F @ N.B[i - 1]
            for a in range(n2):
                for b in range(n):
                    for k, c in E[a, b].terms.items():
                        for j, x in enumerate(c.coeffs):
                            if x:
                                key = (i, a, b, k, j)
                                img[rows.setdefault(key, len(rows))] = x
        images.append(img)
    A = np.zeros((max(1, len(rows)), window.dim), dtype=object)
    for col, img in enumerate(images):
        for r, x in img.items():
            A[r, col] = x
    p, Nexp = N.desc.p, N.desc.params.N
    out = []
    for g, e in kernel_mod(A, p, Nexp):
        out.append((as_matrix(window.from_vector(g)), e))
    return out


# Serialization


def module_to_json(module: Union[Module, GammaModule], frob: FrobStructure = None) -> Dict:
    if isinstance(module, GammaModule):
        kind, mats = "gamma", module.G
    elif isinstance(module, QHiggsModule):
        kind, mats = "qhiggs", module.T
    else:
        kind, mats = "qconn", module.B
    out = {"kind": kind, "rank": module.rank, "desc": module.desc.to_json(), "matrices": [m.to_json() for m in mats]}
    if frob is not None:
        out["frob"] = {"P": frob.P.to_json(), "r": frob.r, "c": frob.c,
                       "Q": None if frob.Q is None else frob.Q.to_json(), "Pdesc": frob.P.desc.to_json()}
    return out


def module_from_json(data: Dict) -> Tuple[Union[Module, GammaModule], Optional[FrobStructure]]:
    try:
        kind = data["kind"]
        desc = AlgebraDesc.from_json(data["desc"])
        mats = [LaurentMatrix.from_json(desc, m) for m in data["matrices"]]
        if any(m.n != int(data["rank"]) for m in mats):
            raise SchemaError("matrix size does not match the rank", {"rank": data["rank"]})
        cls = {"gamma": GammaModule, "qconn": QConnModule, "qhiggs": QHiggsModule}[kind]
        module = cls(desc, mats)
        frob = None
        if data.get("frob"):
            f = data["frob"]
            pdesc = AlgebraDesc.from_json(f["Pdesc"]) if "Pdesc" in f else desc.with_(twist=0)
            P = LaurentMatrix.from_json(pdesc, f["P"])
            Q = LaurentMatrix.from_json(pdesc, f["Q"]) if f.get("Q") is not None else None
            frob = FrobStructure(module, P, int(f.get("r", 0)), Q, int(f.get("c", 0)))
        return module, frob
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad module JSON: {e}", {"keys": sorted(data) if isinstance(data, dict) else None})
