import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import NotDivisible, PreconditionViolation
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix, reassemble
from rings import RingParams

P = RingParams(3, 3, 1, 5)
A = AlgebraDesc(P, 2)
TWIST = A.with_(twist=1)

exps = st.tuples(st.integers(-2, 2), st.integers(-2, 2))
coeffs = st.lists(st.integers(0, 26), min_size=5, max_size=5)


@st.composite
def laurent(draw, desc=A):
    terms = draw(st.dictionaries(exps, coeffs, max_size=3))
    return LaurentElem(desc, {k: P.element(c, exact=True) for k, c in terms.items()})


def U(*exp, desc=A):
    return LaurentElem.monomial(desc, exp)


class TestGroupAction:
    @given(laurent(), st.sampled_from([1, 2]))
    def test_gamma_is_one_plus_mu_dq_log(self, f, i):
        assert f.gamma_act(i) == f + f.dq_log(i) * P.mu()

    @given(laurent(), laurent())
    def test_gamma_multiplicative(self, f, g):
        assert (f * g).gamma_act(1) == f.gamma_act(1) * g.gamma_act(1)

    @given(laurent(), laurent(), st.sampled_from([1, 2]))
    def test_q_leibniz(self, f, g, i):
        lhs = (f * g).dq_log(i)
        rhs = f.dq_log(i) * g + f.gamma_act(i) * g.dq_log(i)
        assert lhs == rhs

    @given(laurent())
    def test_gamma_powers_compose(self, f):
        assert f.gamma_act(2, 2) == f.gamma_act(2).gamma_act(2)

    def test_gamma_on_root_monomial(self):
        root = A.with_(level=1)
        f = U(1, 0, desc=root)
        assert f.gamma_act(1) == LaurentElem.monomial(root, (1, 0), 1 + P.v())
        with pytest.raises(NotDivisible):
            f.dq_log(1)
        assert U(3, 0, desc=root).dq_log(1) == U(3, 0, desc=root)

    def test_twisted_action_uses_q_to_the_p(self):
        f = U(1, 0, desc=TWIST)
        assert f.gamma_act(1) == LaurentElem.monomial(TWIST, (1, 0), P.q_power(3))
        assert f.dq_log(1) == LaurentElem.monomial(TWIST, (1, 0), P.tilde_xi())

    def test_derivations(self):
        f = U(3, -1)
        assert f.log_derivation(1) == f * 3
        assert f.derivative(1) == U(2, -1) * 3
        assert f.derivative(2) == U(3, -2) * -1


class TestFrobenius:
    @given(laurent())
    def test_components_reassemble(self, f):
        total = LaurentElem.zero(A)
        for kappa, g in f.frobenius_components().items():
            total = total + g.rel_frobenius_F() * U(*kappa)
        assert total == f

    @given(laurent(TWIST))
    def test_relative_frobenius_roundtrip(self, g):
        assert g.rel_frobenius_F().rel_frobenius_F_inverse() == g

    @given(laurent())
    def test_w_then_f_is_phi(self, f):
        assert f.twist_W().rel_frobenius_F() == f.frob_endo()

    def test_f_inverse_needs_p_divisible_exponents(self):
        with pytest.raises(NotDivisible):
            U(1, 0).rel_frobenius_F_inverse()

    def test_f_starts_from_twist(self):
        with pytest.raises(PreconditionViolation):
            U(1, 0).rel_frobenius_F()


class TestLevels:
    @given(st.dictionaries(exps, coeffs, max_size=4))
    def test_decompose_reassemble(self, terms):
        root = A.with_(level=1)
        f = LaurentElem(root, {k: P.element(c, exact=True) for k, c in terms.items()})
        integral, parts = f.decompose_integral()
        assert integral.desc.level == 0
        assert reassemble(integral, parts, 1) == f

    def test_integral_element_has_no_parts(self):
        f = U(3, -3, desc=A.with_(level=1))
        integral, parts = f.decompose_integral()
        assert parts == {}
        assert integral == U(1, -1)

    def test_normalize_level(self):
        root = A.with_(level=1)
        assert U(3, -3, desc=root).is_integral()
        assert U(3, -3, desc=root).normalize_level() == U(1, -1)
        assert not U(1, 0, desc=root).is_integral()
        assert U(1, 0, desc=root).normalize_level().desc.level == 1

    def test_level_bound(self):
        with pytest.raises(PreconditionViolation):
            A.with_(level=2)


class TestInverses:
    def test_unit_with_nilpotent_tail(self):
        f = U(1, 0) + U(1, 1) * P.mu()
        assert f * f.inverse() == 1

    def test_non_unit(self):
        with pytest.raises(NotDivisible):
            (U(1, 0) + U(0, 1)).inverse()

    def test_matrix_inverse(self):
        X = LaurentMatrix(A, [[U(1, 0), LaurentElem.constant(A, P.mu())],
                              [LaurentElem.zero(A), U(0, 1)]])
        assert X @ X.inverse() == LaurentMatrix.identity(A, 2)
        assert X.inverse() @ X == LaurentMatrix.identity(A, 2)

    def test_json_roundtrip(self):
        f = U(2, -1) * P.xi(1) + 5
        assert LaurentElem.from_json(f.to_json()) == f
