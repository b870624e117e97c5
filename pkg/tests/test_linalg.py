from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from errors import NoSolution
from linalg import (
    as_int_matrix,
    integer_kernel,
    integer_solve,
    invariant_factors,
    kernel_mod,
    lattice_equal,
    lattice_intersection,
    lattice_leq,
    lattice_preimage,
    rank_mod_p,
    smith_normal_form,
    solve_mod,
)

small_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)))


class TestSmithForm:
    @given(small_matrices)
    def test_transforms_diagonalize(self, rows):
        A = as_int_matrix(rows)
        D, U, U_inv, V = smith_normal_form(A)
        assert (U.dot(A).dot(V) == D).all()
        assert (U.dot(U_inv) == np.eye(A.shape[0], dtype=int)).all()
        diag = [D[i, i] for i in range(min(D.shape))]
        off = D.copy()
        for i in range(min(D.shape)):
            off[i, i] = 0
        assert not off.any()
        nonzero = [x for x in diag if x]
        assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))

    @given(small_matrices)
    def test_product_matches_determinantal_divisor(self, rows):
        M = sympy.Matrix(rows)
        r = M.rank()
        factors = invariant_factors(rows)
        assert len(factors) == r
        if r == 0:
            return
        minors = [M.extract(list(I), list(J)).det()
                  for I in combinations(range(M.rows), r) for J in combinations(range(M.cols), r)]
        product = 1
        for f in factors:
            product *= f
        assert product == abs(sympy.gcd_list(minors))

    def test_known_example(self):
        assert invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]


class TestSolves:
    @given(small_matrices)
    def test_kernel_is_annihilated(self, rows):
        A = as_int_matrix(rows)
        K = integer_kernel(A)
        assert not A.dot(K).any()
        assert K.shape[1] == A.shape[1] - len(invariant_factors(A))

    def test_integer_solve(self):
        x = integer_solve([[2, 0], [0, 3]], [4, 9])
        assert list(x) == [2, 3]
        with pytest.raises(NoSolution):
            integer_solve([[2]], [1])

    def test_solve_mod_reports_kernel(self):
        x, kernel = solve_mod([[3]], [6], 3, 2)
        assert (3 * int(x[0]) - 6) % 9 == 0
        assert kernel and all((3 * int(k[0])) % 9 == 0 for k in kernel)

    def test_kernel_mod_orders(self):
        gens = kernel_mod(np.array([[3]], dtype=object), 3, 2)
        assert [e for _, e in gens] == [1]
        assert (3 * int(gens[0][0][0])) % 9 == 0

    def test_rank_mod_p(self):
        assert rank_mod_p([[1, 1], [1, 1]], 2) == 1
        assert rank_mod_p([[2, 0], [0, 1]], 2) == 1
        assert rank_mod_p([[2, 0], [0, 1]], 3) == 2


class TestLattices:
    def test_leq_and_equal(self):
        A = np.array([[2, 0], [0, 2]], dtype=object)
        B = np.array([[1, 0], [0, 1]], dtype=object)
        assert lattice_leq(A, B)
        assert not lattice_leq(B, A)
        assert lattice_equal(np.array([[2, 2], [0, 2]], dtype=object), A)

    def test_preimage(self):
        B = np.array([[4, 0], [0, 2]], dtype=object)
        pre = lattice_preimage(2, B, 2)
        assert lattice_equal(pre, np.array([[2, 0], [0, 1]], dtype=object))

    def test_intersection(self):
        A = np.array([[2, 0], [0, 1]], dtype=object)
        B = np.array([[1, 0], [0, 3]], dtype=object)
        assert lattice_equal(lattice_intersection(A, B), np.array([[2, 0], [0, 3]], dtype=object))
