import json

import pytest

from errors import NotTrivialModMu, SchemaError
from homcomplex import cohomology
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from qconn import (
    GammaModule,
    QConnModule,
    Window,
    check_flat,
    check_horizontal,
    frob_pullback,
    from_gamma,
    gauge,
    hom_module,
    horizontal_maps,
    module_from_json,
    module_to_json,
    qde_rham,
    tensor,
    to_gamma,
    volte,
)
from rings import RingParams
from suites import curved_qconn, flat_qconn, unitriangular, random_qelem

P = RingParams(3, 2, 0, 3)


def load(fixture_path, name):
    with open(fixture_path(name)) as fh:
        return module_from_json(json.load(fh))


class TestGammaDictionary:
    def test_roundtrip(self, rng):
        N = flat_qconn(P, 2, 2, rng)
        G = to_gamma(N)
        assert from_gamma(G).B == N.B

    def test_flat_iff_commuting(self, rng):
        N = flat_qconn(P, 2, 2, rng)
        assert check_flat(N)
        assert check_flat(to_gamma(N))
        curved = curved_qconn(P, 2, 2, rng)
        assert not check_flat(curved)
        assert not check_flat(to_gamma(curved))

    def test_generator_must_be_trivial_mod_mu(self):
        desc = AlgebraDesc(P, 1)
        G = LaurentMatrix.scalar(desc, 1, 2)
        with pytest.raises(NotTrivialModMu):
            GammaModule(desc, [G])


class TestConstructions:
    def test_tensor_and_hom_stay_flat(self, rng):
        N, N2 = flat_qconn(P, 2, 2, rng), flat_qconn(P, 2, 1, rng)
        assert check_flat(tensor(N, N2))
        assert check_flat(hom_module(N, N2))
        assert tensor(N, N2).rank == 2

    def test_volte_inverts(self, rng):
        N = flat_qconn(P, 2, 2, rng)
        eye = LaurentMatrix.identity(N.desc, 2)
        for G, G_inv in volte(N):
            assert G @ G_inv == eye

    def test_gauge_by_inverse_undoes(self, rng):
        N = flat_qconn(P, 1, 2, rng)
        X, X_inv = unitriangular(N.desc, 2, rng, lambda: random_qelem(P, rng))
        back = gauge(gauge(N, X, X_inv), X_inv, X)
        assert back.B == N.B

    def test_frobenius_pullback_stays_flat(self, rng):
        assert check_flat(frob_pullback(flat_qconn(P, 2, 2, rng)))


class TestFrobeniusStructures:
    def test_fixture_is_horizontal(self, fixture_path):
        H, fs = load(fixture_path, "higgs_frobenius_rank1.json")
        assert check_horizontal(fs)
        assert fs.check_witness()

    def test_wrong_frobenius_is_not_horizontal(self, fixture_path):
        H, fs = load(fixture_path, "higgs_frobenius_rank1.json")
        fs.P = fs.P * LaurentElem.variable(fs.P.desc, 1)
        assert not check_horizontal(fs)

    def test_json_roundtrip(self, fixture_path):
        H, fs = load(fixture_path, "higgs_frobenius_rank1.json")
        again, fs2 = module_from_json(module_to_json(H, fs))
        assert again.T == H.T
        assert fs2.P == fs.P

    def test_bad_kind(self, fixture_path):
        with open(fixture_path("trivial_qconn_d2.json")) as fh:
            data = json.load(fh)
        data["kind"] = "spline"
        with pytest.raises(SchemaError):
            module_from_json(data)


class TestDeRham:
    def test_trivial_module(self, fixture_path):
        N, _ = load(fixture_path, "trivial_qconn_d2.json")
        assert isinstance(N, QConnModule)
        assert check_flat(N)
        C = qde_rham(N, 1)
        W = Window(N.desc, 1, 1).dim
        assert C.ranks == [W, 2 * W, W]
        assert not cohomology(C).degree(0) == (0, ())

    def test_constants_are_horizontal(self, fixture_path):
        N, _ = load(fixture_path, "trivial_qconn_d2.json")
        one = LaurentElem.one(N.desc)
        assert one.dq_log(1).is_zero() and one.dq_log(2).is_zero()


class TestHorizontalMaps:
    def test_trivial_connection_has_constant_endomorphisms(self):
        desc = AlgebraDesc(P, 1)
        N = QConnModule(desc, [LaurentMatrix.zeros(desc, 1)])
        gens = horizontal_maps(N, N, radius=1)
        assert len(gens) == P.M
        for F, e in gens:
            assert e == P.N
            assert set(F[0, 0].terms) <= {(0,)}
            assert F.dq_log(1) == LaurentMatrix.zeros(desc, 1)
