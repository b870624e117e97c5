import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import GhostUndefined, PreconditionViolation, SingularMatrix
from witt import (
    SemilinearMap,
    WittBase,
    WittVec,
    asw_coordinates,
    asw_fixed_points,
    delta_pair_sum,
    frobenius_F,
    from_coordinates,
    ghost,
    manufactured_phi,
    teichmuller,
    verschiebung_V,
    witt_add,
    witt_from_int,
    witt_matrix_inverse,
    witt_mul,
    witt_vec,
)

ZZ = WittBase("Z", 3)
ZMOD = WittBase("Zmod", 3, 4)
F4 = WittBase("Fq", 2, 0, 2)
F9 = WittBase("Fq", 3, 0, 2)

small = st.lists(st.integers(-6, 6), min_size=3, max_size=3)
f9_elems = st.tuples(st.integers(0, 2), st.integers(0, 2))


class TestGhostComponents:
    @given(small, small)
    def test_sum(self, a, b):
        x, y = witt_vec(ZZ, a), witt_vec(ZZ, b)
        assert ghost(witt_add(x, y)) == tuple(u + v for u, v in zip(ghost(x), ghost(y)))

    @given(small, small)
    def test_product(self, a, b):
        x, y = witt_vec(ZZ, a), witt_vec(ZZ, b)
        assert ghost(witt_mul(x, y)) == tuple(u * v for u, v in zip(ghost(x), ghost(y)))

    @given(st.integers(-50, 50))
    def test_integers(self, n):
        assert ghost(witt_from_int(ZZ, 3, n)) == (n, n, n)

    def test_second_component_of_sum(self):
        # s_1 = a + b - (x^2 y + x y^2) for p = 3
        x, y, a, b = 2, -1, 4, 7
        total = witt_vec(ZZ, [x, a]) + witt_vec(ZZ, [y, b])
        assert total.components[1] == a + b - (x * x * y + x * y * y)
        assert delta_pair_sum(x, y, a, b, 3, 1) == total.components[1]

    def test_ghost_needs_torsion_free_base(self):
        with pytest.raises(GhostUndefined):
            ghost(witt_vec(ZMOD, [1, 2]))


class TestFrobeniusVerschiebung:
    @given(small)
    def test_fv_is_p_over_integers(self, a):
        x = witt_vec(ZZ, a)
        assert frobenius_F(verschiebung_V(x)) == x.scale(3)

    @given(small)
    def test_fv_is_p_mod_p_power(self, a):
        x = witt_vec(ZMOD, a)
        assert frobenius_F(verschiebung_V(x)) == x.scale(3)

    @given(st.lists(f9_elems, min_size=2, max_size=2))
    def test_vf_is_p_over_finite_field(self, comps):
        x = witt_vec(F9, comps)
        assert verschiebung_V(frobenius_F(x)).truncate(2) == x.scale(3)

    def test_short_frobenius(self):
        with pytest.raises(PreconditionViolation):
            frobenius_F(witt_vec(ZZ, [5]))


class TestFiniteField:
    @given(f9_elems, f9_elems)
    def test_teichmuller_multiplicative(self, a, b):
        lhs = teichmuller(F9, 3, a) * teichmuller(F9, 3, b)
        assert lhs == teichmuller(F9, 3, F9.mul(a, b))

    @given(st.lists(f9_elems, min_size=2, max_size=2))
    def test_unit_inverse(self, comps):
        if F9.is_zero(comps[0]):
            comps[0] = (1, 0)
        x = witt_vec(F9, comps)
        assert x * x.inverse() == witt_from_int(F9, 2, 1)

    @given(st.lists(f9_elems, min_size=3, max_size=3))
    def test_coordinates_roundtrip(self, comps):
        x = witt_vec(F9, comps)
        coords = asw_coordinates(x)
        assert all(0 <= c < 27 for c in coords)
        assert from_coordinates(F9, 3, coords) == x

    def test_integer_coordinates(self):
        assert asw_coordinates(witt_from_int(F9, 2, 5)) == [5, 0]


class TestFixedPoints:
    def test_rank_one(self):
        X = [[teichmuller(F4, 2, F4.generator())]]
        fixed = asw_fixed_points(manufactured_phi(X))
        assert fixed.orders == [2]
        assert fixed.is_free_rank_n
        assert fixed.spans

    def test_unitriangular_rank_two(self):
        one, zero = witt_from_int(F4, 2, 1), witt_from_int(F4, 2, 0)
        X = [[one, teichmuller(F4, 2, F4.generator())], [zero, one]]
        phi = manufactured_phi(X)
        fixed = asw_fixed_points(phi)
        assert fixed.free_rank == 2
        assert fixed.spans
        for vec in fixed.generators:
            assert phi.apply(vec) == vec

    def test_singular_phi(self):
        zero = witt_from_int(F4, 2, 0)
        phi = SemilinearMap(2, 2, 2, [[zero]])
        assert not phi.invertible
        with pytest.raises(SingularMatrix):
            asw_fixed_points(phi)

    def test_singular_matrix_inverse(self):
        two = witt_from_int(F4, 2, 2)
        with pytest.raises(SingularMatrix):
            witt_matrix_inverse([[two]])

    def test_json_roundtrip(self):
        x = witt_vec(F9, [(1, 2), (0, 1)])
        assert WittVec.from_json(x.to_json()) == x
