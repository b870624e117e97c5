import json

import pytest

from errors import BadExponentB, PreconditionViolation, Singular
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from qconn import FrobStructure, QHiggsModule, check_flat, check_horizontal, gauge, module_from_json
from rings import RingParams
from simpson import (
    NygaardConfig,
    alpha,
    check_nilpotent,
    connection_power_formula,
    fully_faithful_check,
    higgs_derham_embed,
    pull,
    push,
)
from suites import flat_higgs, frobenius_higgs

P = RingParams(3, 2, 0, 3)
TWIST = AlgebraDesc(P, 1, twist=1)


@pytest.fixture
def frobenius_module(fixture_path):
    with open(fixture_path("higgs_frobenius_rank1.json")) as fh:
        return module_from_json(json.load(fh))


class TestPush:
    def test_coefficients_unchanged(self, frobenius_module):
        H, _ = frobenius_module
        N = push(H)
        assert N.desc.twist == 0
        assert N.B[0] == LaurentMatrix.identity(N.desc, 1)

    def test_flat_stays_flat(self, rng):
        H = flat_higgs(P, 2, 2, rng)
        assert check_flat(H)
        assert check_flat(push(H))

    def test_p_fold_power(self, rng):
        ok, lhs, rhs = connection_power_formula(flat_higgs(P, 1, 2, rng), 1)
        assert ok

    def test_zero_field_maps_are_integral(self):
        H = QHiggsModule(TWIST, [LaurentMatrix.zeros(TWIST, 1)])
        assert fully_faithful_check(H, H)

    def test_frobenius_module_is_nilpotent(self, frobenius_module):
        H, _ = frobenius_module
        assert check_nilpotent(push(H), "[p]_q")
        assert check_nilpotent(push(H), "(p,[p]_q)")

    def test_unknown_nilpotence_mode(self, frobenius_module):
        H, _ = frobenius_module
        with pytest.raises(PreconditionViolation):
            check_nilpotent(push(H), "p-adic")


class TestPull:
    def test_fixture(self, frobenius_module):
        H, fs = frobenius_module
        N, fsN = push(H, fs)
        res = pull(N, fsN, NygaardConfig(b=0, D=3))
        assert res.witness @ res.witness_inv == LaurentMatrix.identity(N.desc, 1)
        assert push(res.higgs).B == gauge(N, res.witness, res.witness_inv).B
        assert res.frob.check_witness()
        assert check_horizontal(res.frob)

    def test_manufactured_rank_two(self, rng):
        H, fs = frobenius_higgs(P, 1, 2, rng)
        assert check_horizontal(fs)
        N = fs.host
        res = pull(N, fs, NygaardConfig(b=0, D=3))
        assert res.higgs.rank == 2
        assert push(res.higgs).B == gauge(N, res.witness, res.witness_inv).B

    def test_push_keeps_horizontality(self, frobenius_module):
        H, fs = frobenius_module
        assert fs.host is H
        N, fsN = push(H, fs)
        assert fsN.host is N
        assert check_horizontal(fsN)

    def test_push_transports_twisted_matrices(self, rng):
        H, fs = frobenius_higgs(P, 1, 2, rng)
        twisted = FrobStructure(H, fs.P.rel_frobenius_F_inverse(), 0, fs.Q.rel_frobenius_F_inverse(), 0)
        assert twisted.P.desc.twist == 1
        N, fsN = push(H, twisted)
        assert fsN.P == fs.P
        assert fsN.Q == fs.Q
        assert check_horizontal(fsN)

    def test_push_rejects_foreign_structure(self, frobenius_module, rng):
        H, _ = frobenius_module
        _, other = frobenius_higgs(P, 1, 2, rng)
        with pytest.raises(PreconditionViolation):
            push(H, other)

    def test_exponent_below_witness(self, frobenius_module):
        H, fs = frobenius_module
        N, fsN = push(H, fs)
        fsN.c = 1
        fsN.Q = fsN.Q * P.tilde_xi()
        with pytest.raises(BadExponentB):
            pull(N, fsN, NygaardConfig(b=0, D=3))

    def test_needs_witness(self, frobenius_module):
        H, fs = frobenius_module
        N, fsN = push(H, fs)
        fsN.Q = None
        with pytest.raises(PreconditionViolation):
            pull(N, fsN)


class TestEmbedding:
    def test_zero_field_is_quasi_iso(self):
        H = QHiggsModule(TWIST, [LaurentMatrix.zeros(TWIST, 1)])
        rep = higgs_derham_embed(H, 1)
        assert rep.quasi_iso
        assert rep.failures == []

    def test_singular_alpha_is_reported(self):
        H = QHiggsModule(TWIST, [LaurentMatrix.scalar(TWIST, 1, -P.q_power(-1))])
        with pytest.raises(Singular):
            alpha(1, 1, H)
        rep = higgs_derham_embed(H, 1)
        assert ((1,), 1) in rep.failures

    def test_alpha_needs_unit_analog(self):
        H = QHiggsModule(TWIST, [LaurentMatrix.zeros(TWIST, 1)])
        with pytest.raises(PreconditionViolation):
            alpha(1, 3, H)
        A, A_inv = alpha(1, 2, H)
        assert A[0, 0] == LaurentElem.constant(TWIST, P.q_analog(2))
