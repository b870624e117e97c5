import json

import pytest

from descent import (
    Cocycle,
    check_pair,
    default_pair,
    descend,
    improve_once,
    in_congruence,
    integral_part,
    non_integral_vanishes,
    twist,
    validate,
)
from errors import MembershipViolated, PreconditionViolation
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from rings import RingParams
from suites import manufactured_cocycle

P = RingParams(3, 3, 1, 4)
ROOT = AlgebraDesc(P, 1, 0, 1)


@pytest.fixture
def identity_cocycle(fixture_path):
    with open(fixture_path("cocycle_identity.json")) as fh:
        return Cocycle.from_json(json.load(fh))


class TestPairs:
    def test_default_pair(self):
        c0, c1 = default_pair(P)
        assert check_pair(c0, c1)
        assert c1 == P.mu()

    def test_swapped_pair(self):
        c0, c1 = default_pair(P)
        assert not check_pair(c1, c0)


class TestCocycles:
    def test_identity(self, identity_cocycle):
        assert validate(identity_cocycle)
        assert non_integral_vanishes(identity_cocycle)
        res = descend(identity_cocycle)
        assert res.m is None
        assert res.steps == 0
        assert res.precision_ideal is None
        assert res.X == LaurentMatrix.identity(ROOT, 1)

    def test_level_zero_is_rejected(self):
        desc = AlgebraDesc(P, 1)
        c0, c1 = default_pair(P)
        with pytest.raises(PreconditionViolation):
            Cocycle(desc, [LaurentMatrix.identity(desc, 1)], c0, c1)

    def test_non_integral_unit_term(self):
        c0, c1 = default_pair(P)
        A = LaurentMatrix.identity(ROOT, 1) + LaurentMatrix.scalar(ROOT, 1, LaurentElem.monomial(ROOT, (1,)))
        c = Cocycle(ROOT, [A], c0, c1)
        assert not validate(c)
        with pytest.raises(MembershipViolated):
            descend(c)

    def test_integral_part(self, identity_cocycle):
        (B,) = integral_part(identity_cocycle)
        assert B.desc.level == 0
        assert B == LaurentMatrix.identity(ROOT.with_(level=0), 1)

    def test_json_defaults(self, identity_cocycle):
        assert identity_cocycle.c0 == P.xi(1)
        again = Cocycle.from_json(identity_cocycle.to_json())
        assert again.A == identity_cocycle.A


class TestDescent:
    @pytest.mark.parametrize("d,n", [(1, 1), (1, 2), (2, 1)])
    def test_manufactured(self, rng, d, n):
        c = manufactured_cocycle(P, d, n, rng)
        assert validate(c)
        res = descend(c)
        assert all(in_congruence(A, c.c1, c.c0, res.m) for A in res.cocycle.A)
        assert twist(c, res.X).A == res.cocycle.A
        if res.m is None:
            assert non_integral_vanishes(res.cocycle)

    def test_twist_by_identity(self, identity_cocycle):
        same = twist(identity_cocycle, LaurentMatrix.identity(ROOT, 1))
        assert same.A == identity_cocycle.A

    def test_step_budget(self, rng):
        c = manufactured_cocycle(P, 1, 1, rng)
        res = descend(c, max_steps=0)
        assert res.steps == 0
        assert res.X == LaurentMatrix.identity(ROOT, 1)

    def test_single_root_term(self):
        c0, c1 = default_pair(P)
        eye = LaurentMatrix.identity(ROOT, 1)
        X0 = eye + LaurentMatrix.scalar(ROOT, 1, LaurentElem.monomial(ROOT, (1,), c0))
        c = twist(Cocycle(ROOT, [eye], c0, c1), X0)
        assert validate(c)
        assert not non_integral_vanishes(c)
        X1, nxt = improve_once(c, 0)
        assert all(in_congruence(A, c1, c0, 1) for A in nxt.A)
        res = descend(c)
        assert res.steps >= 1
        assert res.m is None
        assert non_integral_vanishes(res.cocycle)
        assert twist(c, res.X).A == res.cocycle.A
