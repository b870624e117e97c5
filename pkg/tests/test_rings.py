from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import DenominatorTooDeep, NotDivisible, NotInPDIdeal, NoSolution, PreconditionViolation
from rings import (
    PDParams,
    QElem,
    RingParams,
    divide_exact,
    ideal_contains,
    pd_divided_power,
    pd_exp,
    pd_log_q,
    pd_solve_mu,
    solve_multiple,
    t_over_mu,
    verify_log_identity,
)

P = RingParams(3, 3, 1, 5)
coeff_lists = st.lists(st.integers(0, 26), min_size=5, max_size=5)


def elem(coeffs):
    return P.element(coeffs, exact=True)


class TestRingLaws:
    @given(coeff_lists, coeff_lists, coeff_lists)
    def test_associative(self, a, b, c):
        x, y, z = elem(a), elem(b), elem(c)
        assert (x * y) * z == x * (y * z)
        assert (x + y) + z == x + (y + z)

    @given(coeff_lists, coeff_lists, coeff_lists)
    def test_distributive(self, a, b, c):
        x, y, z = elem(a), elem(b), elem(c)
        assert x * (y + z) == x * y + x * z

    @given(coeff_lists, coeff_lists)
    def test_commutative(self, a, b):
        x, y = elem(a), elem(b)
        assert x * y == y * x

    @given(coeff_lists)
    def test_unit_inverse(self, a):
        a = [a[0] if a[0] % 3 else a[0] + 1] + a[1:]
        x = elem(a)
        assert x * x.inverse() == 1

    def test_non_unit_has_no_inverse(self):
        with pytest.raises(NotDivisible):
            P.mu().inverse()


class TestFrobeniusLift:
    @given(coeff_lists)
    def test_phi_is_pth_power_plus_p_delta(self, a):
        x = elem(a)
        assert x.frobenius() == x ** 3 + x.delta().scale(3)

    @given(coeff_lists, coeff_lists)
    def test_phi_multiplicative(self, a, b):
        x, y = elem(a), elem(b)
        assert (x * y).frobenius() == x.frobenius() * y.frobenius()

    def test_phi_sends_root_variable_to_mu(self):
        assert P.v().frobenius() == P.mu()

    def test_delta_of_integer(self):
        # (2 - 2^3) / 3
        assert P.from_int(2).delta() == -2


class TestSpecialElements:
    def test_xi_times_mu_r_is_mu(self):
        assert P.xi(1) * P.mu_level(1) == P.mu()
        assert P.xi(0) == 1

    def test_xi_one_coefficients(self):
        assert P.xi(1) == P.element([3, 3, 1, 0, 0])

    def test_tilde_xi_congruent_to_p_mod_mu(self):
        assert ideal_contains(P.tilde_xi() - 3, [P.mu()])
        assert not ideal_contains(P.tilde_xi(), [P.mu()])

    @pytest.mark.parametrize("k", [1, 2, 5, -1, -4])
    def test_q_analog_times_mu(self, k):
        assert P.q_analog(k) * P.mu() == P.q_power(k) - 1

    def test_fractional_q_power(self):
        assert P.q_power(Fraction(1, 3)) == 1 + P.v()
        with pytest.raises(DenominatorTooDeep):
            P.q_power(Fraction(1, 9))

    def test_level_too_deep(self):
        with pytest.raises(DenominatorTooDeep):
            P.mu_level(2)

    def test_bad_prime(self):
        with pytest.raises(PreconditionViolation):
            RingParams(4, 3)


class TestDivision:
    def test_mu_over_root_variable(self):
        y = divide_exact(P.mu(), P.v())
        assert y == P.xi(1)
        assert y.eff_M == P.M - 1

    def test_v_order(self):
        assert P.v().v_order() == 1
        assert P.mu().v_order() == 1
        assert P.one().v_order() == 0
        assert P.zero().v_order() == P.M

    def test_unit_not_divisible_by_mu(self):
        with pytest.raises(NotDivisible):
            divide_exact(P.one(), P.mu())

    def test_division_by_three_loses_a_digit(self):
        y = divide_exact(P.element([6, 3]), P.from_int(3))
        assert y.eff_N == P.N - 1
        assert y == P.element([2, 1])

    def test_full_precision_multiple(self):
        x = P.mu() * P.element([5, 7, 2, 1, 4])
        y = solve_multiple(x, P.mu())
        assert (y.eff_N, y.eff_M) == (P.N, P.M)
        assert P.mu() * y == x
        assert divide_exact(x, P.mu()).eff_M < P.M
        with pytest.raises(NotDivisible):
            solve_multiple(P.one(), P.mu())

    def test_json_roundtrip(self):
        x = P.xi(1)
        assert QElem.from_json(x.to_json()) == x


Q = PDParams(3, 4, 8, "crystalline")
D = PDParams(3, 4, 8, "divided")


class TestDividedPowers:
    @pytest.mark.parametrize("a,b", [(1, 2), (2, 2), (3, 4), (5, 5)])
    def test_mu_powers_multiply(self, a, b):
        assert Q.mu_power(a) * Q.mu_power(b) == Q.mu_power(a + b)
        assert D.mu_power(a) * D.mu_power(b) == D.mu_power(a + b)

    def test_gamma_of_mu_is_divided_power(self):
        for k in range(D.K):
            assert pd_divided_power(D.mu(), k) == D.mu_divided(k)

    def test_gamma_of_unit(self):
        with pytest.raises(NotInPDIdeal):
            pd_divided_power(D.one(), 2)

    def test_exp_of_log_is_q(self):
        assert pd_exp(pd_log_q(D)) == D.q_power(1)

    def test_t_over_mu(self):
        u = t_over_mu(Q)
        assert u.is_unit()
        assert u * Q.mu() == pd_log_q(Q)

    def test_t_over_mu_not_in_divided_ring(self):
        with pytest.raises(NoSolution):
            t_over_mu(D)

    def test_crystalline_to_divided(self):
        x = Q.mu_power(2) + Q.mu_power(4)
        assert x.to_basis("divided") == D.mu_power(2) + D.mu_power(4)

    def test_solve_mu(self):
        x = D.element([1, 2, 0, 1])
        res = pd_solve_mu(D.mu() * x)
        assert D.mu() * res.solution == D.mu() * x
        assert res.ambiguity

    def test_log_identity(self):
        assert verify_log_identity(3, 4, 8)
        assert verify_log_identity(2, 5, 10)

    def test_log_identity_bound(self):
        with pytest.raises(PreconditionViolation):
            verify_log_identity(3, 4, 20, bound=16)
