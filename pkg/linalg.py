"""
Exact linear algebra over Z, Z/p^N and F_p

Integer Smith normal form with tracked transforms, a Smith form over the
chain ring Z/p^N (pivots of minimal valuation), modular solving with an
explicit kernel, row reduction over F_p with tracked combinations, and the
lattice helpers used by the filtration and decalage code.
"""

import logging
from typing import List, Tuple

import numpy as np

from errors import NoSolution

LOGGER = logging.getLogger(__name__)

_INT64_SAFE = 2 ** 62


def as_int_matrix(A, rows: int = None, cols: int = None) -> np.ndarray:
    """Object-dtype integer matrix; empty inputs need explicit shape."""
    if isinstance(A, np.ndarray) and A.ndim == 2:
        return A.astype(object)
    A = list(A)
    if not A:
        return np.zeros((rows or 0, cols or 0), dtype=object)
    out = np.array([[int(x) for x in row] for row in A], dtype=object)
    if out.ndim == 1:
        out = out.reshape(len(A), 0 if cols is None else cols)
    return out


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=int).astype(object)


# ---------------------------------------------------------------------------
# Integer Smith normal form
# ---------------------------------------------------------------------------

def smith_normal_form(A) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form over Z.

    Returns (D, U, U_inv, V) with U @ A @ V == D, D diagonal with
    non-negative entries d_0 | d_1 | ..., U and V unimodular.
    """
    D = as_int_matrix(A).copy()
    m, n = D.shape
    U, U_inv, V = _eye(m), _eye(m), _eye(n)

    def swap_rows(i, j):
        if i != j:
            D[[i, j]] = D[[j, i]]
            U[[i, j]] = U[[j, i]]
            U_inv[:, [i, j]] = U_inv[:, [j, i]]

    def swap_cols(i, j):
        if i != j:
            D[:, [i, j]] = D[:, [j, i]]
            V[:, [i, j]] = V[:, [j, i]]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        D[dst] = D[dst] + c * D[src]
        U[dst] = U[dst] + c * U[src]
        U_inv[:, src] = U_inv[:, src] - c * U_inv[:, dst]

    def add_col(dst, src, c):
        D[:, dst] = D[:, dst] + c * D[:, src]
        V[:, dst] = V[:, dst] + c * V[:, src]

    for t in range(min(m, n)):
        while True:
            candidates = [(abs(D[i, t]), i, t) for i in range(t, m) if D[i, t] != 0]
            candidates += [(abs(D[t, j]), t, j) for j in range(t + 1, n) if D[t, j] != 0]
            if not candidates:
                block = [(abs(D[i, j]), i, j) for i in range(t, m) for j in range(t, n) if D[i, j] != 0]
                if not block:
                    break
                candidates = [min(block)]
            _, i, j = min(candidates)
            swap_rows(t, i)
            swap_cols(t, j)
            piv = D[t, t]
            for i in range(t + 1, m):
                if D[i, t] != 0:
                    add_row(i, t, -(D[i, t] // piv))
            for j in range(t + 1, n):
                if D[t, j] != 0:
                    add_col(j, t, -(D[t, j] // piv))
            if any(D[i, t] != 0 for i in range(t + 1, m)) or any(D[t, j] != 0 for j in range(t + 1, n)):
                continue
            bad = [i for i in range(t + 1, m) for j in range(t + 1, n) if D[i, j] % piv != 0]
            if bad:
                add_row(t, bad[0], 1)
                continue
            break
        if t < m and t < n and D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
            U_inv[:, t] = -U_inv[:, t]
    return D, U, U_inv, V


def invariant_factors(A) -> List[int]:
    """Non-zero diagonal of the Smith form, in divisibility order."""
    D = smith_normal_form(A)[0]
    return [int(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]


def integer_kernel(A, cols: int = None) -> np.ndarray:
    """Basis of {x in Z^n : A x = 0} as columns."""
    A = as_int_matrix(A, cols=cols)
    n = A.shape[1]
    if A.shape[0] == 0:
        return _eye(n)
    D, _, _, V = smith_normal_form(A)
    r = sum(1 for i in range(min(D.shape)) if D[i, i] != 0)
    return V[:, r:]


def integer_solve(A, b) -> np.ndarray:
    """One integer solution of A x = b, or NoSolution."""
    A = as_int_matrix(A)
    b = np.array([int(x) for x in b], dtype=object)
    m, n = A.shape
    if n == 0:
        if any(x != 0 for x in b):
            raise NoSolution("empty system with non-zero right-hand side")
        return np.zeros(0, dtype=object)
    D, U, _, V = smith_normal_form(A)
    c = U.dot(b)
    y = np.zeros(n, dtype=object)
    for i in range(m):
        d = D[i, i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                raise NoSolution("inconsistent integer system", {"row": i})
        else:
            if c[i] % d != 0:
                raise NoSolution("integer system has only rational solutions", {"row": i})
            y[i] = c[i] // d
    return V.dot(y)


def lattice_basis(G, n: int = None) -> np.ndarray:
    """Column basis of the lattice spanned by the columns of G."""
    G = as_int_matrix(G, rows=n)
    if G.shape[1] == 0:
        return np.zeros((G.shape[0], 0), dtype=object)
    D, _, U_inv, _ = smith_normal_form(G)
    r = sum(1 for i in range(min(D.shape)) if D[i, i] != 0)
    return np.column_stack([U_inv[:, i] * D[i, i] for i in range(r)]) if r else np.zeros((G.shape[0], 0), dtype=object)


def lattice_contains(B, x) -> bool:
    try:
        integer_solve(B, x)
    except NoSolution:
        return False
    return True


def lattice_leq(B1, B2) -> bool:
    """span(B1) is contained in span(B2)."""
    B1 = as_int_matrix(B1)
    return all(lattice_contains(B2, B1[:, j]) for j in range(B1.shape[1]))


def lattice_equal(B1, B2) -> bool:
    return lattice_leq(B1, B2) and lattice_leq(B2, B1)


def lattice_intersection(B1, B2) -> np.ndarray:
    B1, B2 = as_int_matrix(B1), as_int_matrix(B2)
    n = B1.shape[0]
    if B1.shape[1] == 0 or B2.shape[1] == 0:
        return np.zeros((n, 0), dtype=object)
    K = integer_kernel(np.hstack([B1, -B2]))
    return lattice_basis(B1.dot(K[: B1.shape[1], :]), n)


def lattice_preimage(k: int, B, n: int) -> np.ndarray:
    """Basis of {x in Z^n : k*x in span(B)}."""
    B = as_int_matrix(B, rows=n)
    if B.shape[1] == 0:
        return np.zeros((n, 0), dtype=object) if k != 0 else _eye(n)
    K = integer_kernel(np.hstack([k * _eye(n), -B]))
    return lattice_basis(K[:n, :], n)


# ---------------------------------------------------------------------------
# Smith form over Z/p^N
# ---------------------------------------------------------------------------

def _dtype_for(m: int):
    return np.int64 if m * m < _INT64_SAFE else object


def mat_mod(A, m: int) -> np.ndarray:
    dt = _dtype_for(m)
    A = np.array(A, dtype=object) if not isinstance(A, np.ndarray) else A
    return (A.astype(object) % m).astype(dt)


def matmul_mod(A: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    dt = _dtype_for(m)
    inner = A.shape[1] if A.ndim == 2 else A.shape[0]
    if dt is np.int64 and inner * m * m < 2 ** 63:
        return (A.astype(np.int64) @ B.astype(np.int64)) % m
    return ((A.astype(object) @ B.astype(object)) % m).astype(dt)


def valuations(A: np.ndarray, p: int, N: int) -> np.ndarray:
    """Entrywise p-adic valuation in Z/p^N, with 0 mapped to N."""
    v = np.zeros(A.shape, dtype=int)
    for k in range(1, N + 1):
        v += (A % (p ** k) == 0).astype(int)
    return v


def modular_snf(A, p: int, N: int):
    """Smith form over Z/p^N.

    Returns (exps, U, V, V_inv) with U @ A @ V == diag(p^exps) mod p^N; an
    exponent equal to N stands for a zero diagonal entry.
    """
    m = p ** N
    D = mat_mod(A, m).copy()
    rows, cols = D.shape
    dt = D.dtype
    U = np.eye(rows, dtype=int).astype(dt)
    V = np.eye(cols, dtype=int).astype(dt)
    V_inv = np.eye(cols, dtype=int).astype(dt)
    exps: List[int] = []
    for t in range(min(rows, cols)):
        sub = D[t:, t:]
        if not sub.any():
            break
        vals = valuations(sub, p, N)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        e = int(vals[i, j])
        i, j = i + t, j + t
        if i != t:
            D[[t, i]] = D[[i, t]]
            U[[t, i]] = U[[i, t]]
        if j != t:
            D[:, [t, j]] = D[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
            V_inv[[t, j]] = V_inv[[j, t]]
        pe = p ** e
        unit = int(D[t, t]) // pe
        u_inv = pow(unit, -1, m)
        D[t] = (D[t] * u_inv) % m
        U[t] = (U[t] * u_inv) % m
        if t + 1 < rows:
            f = D[t + 1:, t] // pe
            D[t + 1:] = (D[t + 1:] - np.outer(f, D[t])) % m
            U[t + 1:] = (U[t + 1:] - np.outer(f, U[t])) % m
        if t + 1 < cols:
            g = D[t, t + 1:] // pe
            D[:, t + 1:] = (D[:, t + 1:] - np.outer(D[:, t], g)) % m
            V[:, t + 1:] = (V[:, t + 1:] - np.outer(V[:, t], g)) % m
            V_inv[t] = (V_inv[t] + ((g[:, None] * V_inv[t + 1:]) % m).sum(axis=0)) % m
        exps.append(e)
    exps += [N] * (min(rows, cols) - len(exps))
    LOGGER.debug(f"modular SNF {rows}x{cols} over Z/{p}^{N}: exponents {exps}")
    return exps, U, V, V_inv


def kernel_mod(A, p: int, N: int) -> List[Tuple[np.ndarray, int]]:
    """Cyclic decomposition of ker(A) over Z/p^N as (generator, order exponent)."""
    m = p ** N
    A = mat_mod(A, m)
    cols = A.shape[1]
    if A.shape[0] == 0:
        return [(np.eye(cols, dtype=int)[:, j].astype(A.dtype), N) for j in range(cols)]
    exps, _, V, _ = modular_snf(A, p, N)
    gens = []
    for j in range(cols):
        e = exps[j] if j < len(exps) else N
        if e == 0:
            continue
        gens.append(((V[:, j] * (p ** (N - e))) % m, e))
    return gens


def solve_mod(A, b, p: int, N: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Solve A x = b over Z/p^N; returns (x, kernel generators) or NoSolution."""
    m = p ** N
    A = mat_mod(A, m)
    rows, cols = A.shape
    b = mat_mod(np.array(b, dtype=object).reshape(rows, 1), m)
    if cols == 0:
        if b.any():
            raise NoSolution("empty system with non-zero right-hand side")
        return np.zeros(0, dtype=A.dtype), []
    exps, U, V, _ = modular_snf(A, p, N)
    c = matmul_mod(U, b, m)[:, 0]
    y = np.zeros(cols, dtype=object)
    for i in range(rows):
        e = exps[i] if i < len(exps) else N
        ci = int(c[i])
        if e >= N:
            if ci != 0:
                raise NoSolution("inconsistent modular system", {"row": i})
            continue
        if ci % (p ** e) != 0:
            raise NoSolution("right-hand side not divisible by the pivot", {"row": i, "exponent": e})
        y[i] = ci // (p ** e)
    x = matmul_mod(V, y.reshape(cols, 1).astype(V.dtype), m)[:, 0]
    kernel = []
    for j in range(cols):
        e = exps[j] if j < len(exps) else N
        if e == 0:
            continue
        kernel.append((V[:, j] * (p ** (N - e))) % m)
    return x, kernel


def modular_cohomology_invariants(d_prev, d_next, p: int, N: int, dim: int) -> List[int]:
    """Invariant factors of ker(d_next)/im(d_prev) over Z/p^N."""
    m = p ** N
    if dim == 0:
        return []
    if d_next is None or d_next.shape[0] == 0:
        orders = [N] * dim
        V_inv = np.eye(dim, dtype=int).astype(_dtype_for(m))
    else:
        exps, _, _, V_inv = modular_snf(d_next, p, N)
        # ker(d_next) is the sum of Z/p^{e_j} in V-coordinates
        orders = [exps[j] if j < len(exps) else N for j in range(dim)]
    live = [j for j in range(dim) if orders[j] > 0]
    if not live:
        return []
    if d_prev is None or d_prev.shape[1] == 0:
        Z = np.zeros((len(live), 0), dtype=object)
    else:
        Y = matmul_mod(V_inv, mat_mod(d_prev, m), m).astype(object)
        Z = np.array([[(int(Y[j, c]) // (p ** (N - orders[j]))) % (p ** orders[j])
                       for c in range(Y.shape[1])] for j in live], dtype=object).reshape(len(live), Y.shape[1])
    rel = np.hstack([np.diag([p ** orders[j] for j in live]).astype(object), Z])
    return [f for f in invariant_factors(rel) if f != 1]


# ---------------------------------------------------------------------------
# F_p row reduction
# ---------------------------------------------------------------------------

def rref_mod_p(A, p: int) -> Tuple[np.ndarray, List[int], np.ndarray]:
    """Reduced row echelon form over F_p; returns (R, pivots, T) with T @ A == R."""
    R = (np.array(A, dtype=object) % p).astype(np.int64)
    rows, cols = R.shape
    T = np.eye(rows, dtype=np.int64)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = [i for i in range(r, rows) if R[i, c] % p != 0]
        if not nz:
            continue
        i = nz[0]
        R[[r, i]] = R[[i, r]]
        T[[r, i]] = T[[i, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = (R[r] * inv) % p
        T[r] = (T[r] * inv) % p
        for k in range(rows):
            if k != r and R[k, c] != 0:
                f = R[k, c]
                R[k] = (R[k] - f * R[r]) % p
                T[k] = (T[k] - f * T[r]) % p
        pivots.append(c)
        r += 1
    return R, pivots, T


def rank_mod_p(A, p: int) -> int:
    A = np.array(A, dtype=object)
    if A.size == 0:
        return 0
    return len(rref_mod_p(A, p)[1])
