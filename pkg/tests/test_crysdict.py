import json

import numpy as np
import pytest

from crysdict import (
    CrysGroupModule,
    FilteredModule,
    crys_desc,
    crys_module_from_json,
    dp_action_formula,
    exp_action,
    group_from_conn,
    from_plus,
    is_saturated,
    is_transversal,
    log_conn,
    plus_module,
    satisfies_f4,
    saturate,
)
from errors import NotMultiplicative, PreconditionViolation, SchemaError, TDivisionAmbiguous
from laurent import LaurentElem, LaurentMatrix
from suites import crys_group_module


@pytest.fixture
def rank_one(fixture_path):
    with open(fixture_path("crys_group_rank1.json")) as fh:
        return crys_module_from_json(json.load(fh))


def cols(*vectors):
    return np.array(vectors, dtype=object).T


class TestLogExp:
    def test_q_action_has_unit_connection(self, rank_one):
        conn = log_conn(rank_one)
        assert conn.L[0] == LaurentMatrix.identity(rank_one.desc, 1)

    def test_exp_of_log(self, rank_one):
        conn = log_conn(rank_one)
        assert exp_action(conn) == rank_one.G
        assert dp_action_formula(conn) == rank_one.G

    def test_random_module(self, rng):
        module = crys_group_module(3, 3, 8, 2, 2, rng)
        assert module.check_commuting()
        conn = log_conn(module)
        assert conn.is_flat()
        assert exp_action(conn) == module.G
        assert dp_action_formula(conn) == module.G

    def test_mu_division_is_ambiguous(self, rank_one):
        with pytest.raises(TDivisionAmbiguous):
            CrysGroupModule.from_G(rank_one.desc, rank_one.G)

    def test_mu_division_at_low_precision(self, rank_one):
        again = CrysGroupModule.from_G(rank_one.desc, rank_one.G, precision=1)
        assert again.G == rank_one.G

    def test_group_from_connection(self, rank_one):
        assert group_from_conn(log_conn(rank_one), precision=1).G == rank_one.G

    def test_unknown_kind(self, fixture_path):
        with open(fixture_path("crys_group_rank1.json")) as fh:
            data = json.load(fh)
        data["kind"] = "crys-sheaf"
        with pytest.raises(SchemaError):
            crys_module_from_json(data)


class TestTransversality:
    def test_weight_gap(self):
        desc = crys_desc(3, 3, 6, 1)
        P = desc.params
        one = LaurentElem.one(desc)
        zero = LaurentElem.zero(desc)
        steep = LaurentMatrix(desc, [[zero, one], [zero, zero]])
        assert is_transversal([steep], [0, 0])
        assert is_transversal([steep], [0, 1])
        assert not is_transversal([steep], [0, 3])
        divided = LaurentMatrix(desc, [[zero, LaurentElem.constant(desc, P.mu_power(2))], [zero, zero]])
        assert is_transversal([divided], [0, 3])


class TestSaturation:
    @pytest.fixture
    def example(self):
        return FilteredModule(2, 2, 0, 2, {0: np.eye(2, dtype=object), 1: 2 * np.eye(2, dtype=object),
                                           2: cols((4, 0), (0, 2))})

    def test_saturate(self, example):
        sat = saturate(example)
        assert not satisfies_f4(example)
        assert satisfies_f4(sat)
        expected = FilteredModule(2, 2, 0, 2, {0: np.eye(2, dtype=object), 1: cols((2, 0), (0, 1)),
                                               2: cols((4, 0), (0, 2))})
        assert sat == expected
        assert is_saturated(sat)
        assert saturate(sat) == sat

    def test_plus_roundtrip(self, example):
        sat = saturate(example)
        assert from_plus(2, plus_module(sat)) == sat
        assert plus_module(sat) == plus_module(example)

    def test_contains(self, example):
        assert example.contains(2, [0, 2])
        assert not example.contains(2, [2, 0])
        assert example.contains(3, [8, 0])

    def test_not_multiplicative(self):
        with pytest.raises(NotMultiplicative):
            FilteredModule(1, 2, 0, 1, {0: [[1]], 1: [[4]]})
        with pytest.raises(NotMultiplicative):
            FilteredModule(1, 2, 0, 1, {0: [[2]], 1: [[1]]})

    def test_unit_f(self):
        with pytest.raises(PreconditionViolation):
            FilteredModule(1, 1, 0, 0)

    def test_json_roundtrip(self, example):
        assert FilteredModule.from_json(example.to_json()) == example
