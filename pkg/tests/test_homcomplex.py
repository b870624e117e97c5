import json

import numpy as np
import pytest

from errors import FZeroDivisor, NonCommuting, PreconditionViolation, UnsupportedCoefficients
from homcomplex import (
    AbInvariants,
    ChainMap,
    FreeComplex,
    Z,
    Zmod,
    bockstein_comparison,
    cohomology,
    complex_from_endomorphism,
    eta,
    koszul,
    quasi_iso_check,
    shift,
)


def eye(n):
    return np.eye(n, dtype=int).astype(object)


@pytest.fixture
def times_two(fixture_path):
    with open(fixture_path("complex_multiplication_by_two.json")) as fh:
        return FreeComplex.from_json(json.load(fh)["complex"])


class TestCohomology:
    def test_two_term(self):
        C = complex_from_endomorphism([[2]])
        assert cohomology(C) == AbInvariants(0, [(0, ()), (0, (2,))])

    def test_three_term(self, times_two):
        assert cohomology(times_two) == AbInvariants(0, [(0, ()), (0, (2,)), (1, ())])

    def test_modular_coefficients(self):
        C = complex_from_endomorphism([[2]], Zmod(4))
        assert cohomology(C) == AbInvariants(0, [(0, (2,)), (0, (2,))])

    def test_shift_moves_degrees(self, times_two):
        H = cohomology(shift(times_two, 1))
        assert H.lo == -1
        assert H.degree(0) == (0, (2,))
        assert H.order(0) == 2

    def test_dd_must_vanish(self):
        with pytest.raises(PreconditionViolation):
            FreeComplex(Z, 0, [1, 1, 1], [[[1]], [[1]]])

    def test_json_roundtrip(self, times_two):
        again = FreeComplex.from_json(times_two.to_json())
        assert cohomology(again) == cohomology(times_two)


class TestKoszul:
    def test_scalar_pair(self, fixture_path):
        with open(fixture_path("koszul_scalar.json")) as fh:
            data = json.load(fh)
        C = koszul(data["endomorphisms"])
        assert C.ranks == [2, 4, 2]
        assert cohomology(C) == AbInvariants(0, [(0, ()), (0, (2, 2)), (0, (2, 2))])

    def test_identity_is_acyclic(self):
        assert cohomology(koszul([eye(2), 3 * eye(2)])).is_zero()

    def test_non_commuting(self):
        with pytest.raises(NonCommuting):
            koszul([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])

    def test_commuting_modulo(self):
        C = koszul([[[0, 2], [0, 0]], [[0, 0], [2, 0]]], Zmod(2))
        assert cohomology(C) == AbInvariants(0, [(0, (2, 2)), (0, (2, 2, 2, 2)), (0, (2, 2))])


class TestDecalage:
    def test_eta_kills_the_two(self, times_two):
        assert cohomology(eta(times_two, 2)) == AbInvariants(0, [(0, ()), (0, ()), (1, ())])

    def test_eta_of_scaled_koszul(self):
        A = [eye(2), np.array([[1, 1], [0, 1]], dtype=object)]
        scaled = koszul([3 * a for a in A])
        assert cohomology(eta(scaled, 3)) == cohomology(koszul(A))

    def test_bockstein(self, times_two):
        ok, lhs, rhs = bockstein_comparison(times_two, 2)
        assert ok
        assert lhs == AbInvariants(0, [(0, ()), (0, ()), (0, (2,))])

    def test_zero_divisor(self, times_two):
        with pytest.raises(FZeroDivisor):
            eta(times_two, 0)

    def test_needs_integral_complex(self):
        with pytest.raises(UnsupportedCoefficients):
            eta(complex_from_endomorphism([[2]], Zmod(4)), 2)


class TestChainMaps:
    def test_identity_is_quasi_iso(self, times_two):
        f = ChainMap(times_two, times_two, {0: eye(1), 1: eye(1), 2: eye(1)})
        assert quasi_iso_check(f)

    def test_zero_map_is_not(self, times_two):
        assert not quasi_iso_check(ChainMap(times_two, times_two, {}))
