import json

import pytest

from errors import NotAStratification, PreconditionViolation
from laurent import matrix_from_ints
from strat import (
    ModPConnection,
    ModPHiggs,
    PDPolyAlg,
    PDPolyMatrix,
    base_desc,
    check_recursion,
    check_strat,
    extract,
    higgs_extract,
    higgs_taylor,
    pd_poly_iso_check,
    taylor,
)
from suites import commuting_higgs_field, flat_modp_connection


@pytest.fixture
def trivial(fixture_path):
    with open(fixture_path("modp_connection_trivial.json")) as fh:
        data = json.load(fh)
    return ModPConnection.from_json(data), data["K"]


def curved(p=3, N=2):
    desc = base_desc(p, N, 2)
    return ModPConnection(desc, [matrix_from_ints(desc, [[0, 1], [0, 0]]),
                                 matrix_from_ints(desc, [[0, 0], [1, 0]])])


class TestTaylor:
    def test_trivial_connection(self, trivial):
        N, K = trivial
        eps = taylor(N, K)
        assert eps == PDPolyMatrix.identity(PDPolyAlg(3, 2, 1, 1, K), 1)
        assert check_strat(eps)
        assert N.is_quasi_nilpotent()

    @pytest.mark.parametrize("d,n", [(1, 2), (2, 1), (2, 2)])
    def test_flat_roundtrip(self, rng, d, n):
        N = flat_modp_connection(3, 2, d, n, rng)
        assert N.is_flat()
        eps = taylor(N, 5)
        assert check_strat(eps)
        assert extract(eps).N == N.N
        assert check_recursion(eps, N)

    def test_curved_is_not_a_stratification(self):
        N = curved()
        assert not N.is_flat()
        eps = taylor(N, 3)
        assert not check_strat(eps)
        with pytest.raises(NotAStratification):
            extract(eps)

    def test_json_roundtrip(self, rng):
        eps = taylor(flat_modp_connection(3, 2, 1, 2, rng), 4)
        assert PDPolyMatrix.from_json(eps.to_json()) == eps

    def test_two_block_input_rejected(self):
        alg = PDPolyAlg(3, 2, 1, 2, 3)
        with pytest.raises(PreconditionViolation):
            check_strat(PDPolyMatrix.identity(alg, 1))


class TestHiggs:
    def test_roundtrip(self, rng):
        H = commuting_higgs_field(3, 2, 2, 2, rng)
        assert H.is_commuting()
        eps = higgs_taylor(H, 4)
        assert check_strat(eps, higgs=True)
        assert higgs_extract(eps).theta == H.theta

    def test_nilpotence(self):
        desc = base_desc(3, 2, 1)
        assert ModPHiggs(desc, [matrix_from_ints(desc, [[0, 1], [0, 0]])]).is_nilpotent()
        assert not ModPHiggs(desc, [matrix_from_ints(desc, [[1]])]).is_nilpotent()


class TestDividedPowerPolynomials:
    def test_single_variable(self):
        assert pd_poly_iso_check(2, 1, [1], [{}], 8)
        assert pd_poly_iso_check(3, 1, [2], [{(1,): 1}], 9)

    def test_two_variables(self):
        assert pd_poly_iso_check(2, 2, [1, 1], [{(1, 0): 1}, {(1, 1): 1}], 8)

    def test_unit_required(self):
        with pytest.raises(PreconditionViolation):
            pd_poly_iso_check(3, 1, [3], [{}], 9)

    def test_constant_term_rejected(self):
        with pytest.raises(PreconditionViolation):
            pd_poly_iso_check(3, 1, [1], [{(0,): 1}], 9)

    def test_exponent_below_p(self):
        with pytest.raises(PreconditionViolation):
            pd_poly_iso_check(2, 1, [1], [{(2,): 1}], 8)

    def test_truncation_below_p(self):
        with pytest.raises(PreconditionViolation):
            pd_poly_iso_check(3, 1, [1], [{}], 2)
