from __future__ import annotations

import numpy as np
import pytest

from helpers import PRICES_4, Q_SPLIT, disconnected_dataset, random_dataset, rel_dev
from multindex import (
    DadTriplet,
    Disconnected,
    IncompatibleTriplet,
    Method,
    MethodSpec,
    UnsupportedMethod,
    build_dad,
    dad_fixed_point,
    residual,
    solve_share_system,
    uniqueness_probe,
    validate_dataset,
)
from multindex.dad import dad_operator, gen_mean_log

SHARE = (Method.RAO, Method.IDB, Method.ARITH)


class TestGenMean:
    @pytest.mark.parametrize("rho", [-3.0, -1.0, -1e-7, 0.0, 1e-7, 0.5, 1.0, 4.0])
    def test_matches_definition(self, rho):
        rng = np.random.default_rng(41)
        z = rng.normal(size=(5, 3))
        w = rng.random((5, 3))
        w /= w.sum(axis=0)
        expected = np.sum(w * z, axis=0) if rho == 0 else np.log(np.sum(w * np.exp(rho * z), axis=0)) / rho
        tol = 1e-6 if 0 < abs(rho) < 1e-3 else 1e-13
        np.testing.assert_allclose(gen_mean_log(z, w, rho, axis=0), expected, rtol=tol, atol=tol)

    def test_zero_weights_drop(self):
        z = np.array([[0.0], [1e300]])
        w = np.array([[1.0], [0.0]])
        assert gen_mean_log(z, w, 2.0, axis=0)[0] == 0.0

    def test_large_spread(self):
        z = np.array([[0.0], [50.0]])
        w = np.array([[0.5], [0.5]])
        np.testing.assert_allclose(gen_mean_log(z, w, 3.0, 0), (np.log(0.5) + 150.0) / 3.0, rtol=1e-14)


class TestBuildDad:
    def test_arith_unit_column_sums(self):
        t = build_dad(random_dataset(np.random.default_rng(42), 5, 4, density=0.5), MethodSpec(Method.ARITH))
        np.testing.assert_allclose(t.d, 1.0, rtol=1e-14)
        assert abs(t.c.sum() - t.d.sum()) <= 1e-12

    def test_idb_equals_gen_mean(self):
        d = random_dataset(np.random.default_rng(43), 5, 4)
        a = build_dad(d, MethodSpec(Method.IDB))
        b = build_dad(d, MethodSpec(Method.GEN_MEAN, rho=-1.0))
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.c, b.c)

    def test_uniform_constant(self):
        t = build_dad(validate_dataset(np.ones((3, 4)), np.ones((3, 4))), MethodSpec(Method.RAO))
        assert np.ptp(t.A) == 0

    def test_support(self):
        d = random_dataset(np.random.default_rng(44), 6, 5, density=0.4)
        np.testing.assert_array_equal(build_dad(d, MethodSpec(Method.IDB)).A > 0, d.quantities > 0)

    def test_unsupported(self):
        with pytest.raises(UnsupportedMethod):
            build_dad(random_dataset(np.random.default_rng(45), 3, 3), MethodSpec(Method.GK))


class TestDadFixedPoint:
    def test_single_commodity(self):
        t = DadTriplet(np.array([[0.5, 0.5]]), np.array([1.0]), np.array([0.5, 0.5]), 1.0)
        r = dad_fixed_point(t, x0=[1.0, 1.0])
        np.testing.assert_allclose(r.x, [0.5, 0.5], rtol=1e-15)

    def test_uniform(self):
        t = build_dad(validate_dataset(np.ones((3, 3)), np.ones((3, 3))), MethodSpec(Method.ARITH))
        x = dad_fixed_point(t).x
        np.testing.assert_allclose(x / x[0], 1.0, rtol=1e-14)

    @pytest.mark.parametrize("method,rho", [(Method.ARITH, None), (Method.IDB, None), (Method.GEN_MEAN, 2.5)])
    def test_fixed_point_is_ppp_power(self, method, rho):
        d = random_dataset(np.random.default_rng(46), 6, 4, density=0.6)
        spec = MethodSpec(method, rho=rho)
        t = build_dad(d, spec)
        r = dad_fixed_point(t)
        assert np.max(np.abs(dad_operator(t, r.x) - r.x) / r.x) <= 1e-11
        ppp = np.asarray(solve_share_system(d, spec).ppp)
        x = r.x ** (1.0 / spec.effective_rho)
        assert rel_dev(x / x[0], ppp) <= 1e-9

    def test_incompatible(self):
        t = DadTriplet(np.eye(2), np.array([1.0, 2.0]), np.array([2.0, 1.0]), 1.0)
        with pytest.raises(IncompatibleTriplet):
            dad_fixed_point(t)

    def test_disconnected(self):
        t = DadTriplet(np.eye(2), np.array([1.0, 1.0]), np.array([1.0, 1.0]), 1.0)
        with pytest.raises(Disconnected):
            dad_fixed_point(t)


class TestSolveShareSystem:
    def test_uniform_prices(self):
        rng = np.random.default_rng(47)
        d0 = random_dataset(rng, 5, 4, density=0.5)
        row = np.exp(rng.normal(size=5))
        d = validate_dataset(np.repeat(row[:, None], 4, axis=1), d0.quantities)
        for spec in [MethodSpec(m) for m in SHARE] + [MethodSpec(Method.GEN_MEAN, rho=1.7)]:
            s = solve_share_system(d, spec)
            np.testing.assert_allclose(s.ppp, 1.0, rtol=1e-10)
            np.testing.assert_allclose(s.p_int, row, rtol=1e-10)

    def test_idb_is_gen_mean(self):
        d = random_dataset(np.random.default_rng(48), 6, 5)
        a = solve_share_system(d, MethodSpec(Method.IDB))
        b = solve_share_system(d, MethodSpec(Method.GEN_MEAN, rho=-1.0))
        assert rel_dev(a.ppp, b.ppp) <= 1e-10

    def test_rho_limit(self):
        d = random_dataset(np.random.default_rng(49), 6, 5, density=0.5)
        rao = solve_share_system(d, MethodSpec(Method.RAO))
        near = solve_share_system(d, MethodSpec(Method.GEN_MEAN, rho=1e-6))
        assert rel_dev(rao.ppp, near.ppp) <= 1e-4

    def test_rao_direct_matches_iteration(self):
        d = random_dataset(np.random.default_rng(50), 6, 5, density=0.5)
        direct = solve_share_system(d, MethodSpec(Method.RAO))
        iterated = solve_share_system(d, MethodSpec(Method.RAO), x0=np.ones(5))
        assert direct.diagnostics["direct"] and not iterated.diagnostics["direct"]
        assert rel_dev(direct.ppp, iterated.ppp) <= 1e-10

    def test_residuals(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            d = random_dataset(rng, 6, 5, density=0.5)
            for spec in [MethodSpec(m) for m in SHARE] + [MethodSpec(Method.GEN_MEAN, rho=rng.uniform(-3, 3))]:
                s = solve_share_system(d, spec)
                assert s.residual_norm <= 1e-9
                assert s.residual_norm == residual(d, spec, s)

    def test_monotone_flag(self):
        s = solve_share_system(random_dataset(np.random.default_rng(52), 5, 4), MethodSpec(Method.ARITH))
        assert isinstance(s.diagnostics["monotone"], bool)

    def test_disconnected(self):
        with pytest.raises(Disconnected):
            solve_share_system(validate_dataset(PRICES_4, Q_SPLIT), MethodSpec(Method.IDB))

    def test_commodity_unit_invariance(self):
        rng = np.random.default_rng(53)
        d = random_dataset(rng, 5, 4)
        p, q = np.array(d.prices), np.array(d.quantities)
        p[3] *= 4.2
        q[3] /= 4.2
        moved_d = validate_dataset(p, q)
        for spec in [MethodSpec(m) for m in SHARE] + [MethodSpec(Method.GEN_MEAN, rho=0.3)]:
            a, b = solve_share_system(d, spec), solve_share_system(moved_d, spec)
            np.testing.assert_allclose(b.ppp, a.ppp, rtol=1e-10)
            np.testing.assert_allclose(b.p_int, a.p_int * [1, 1, 1, 4.2, 1], rtol=1e-10)


class TestProbe:
    @pytest.mark.parametrize("method", SHARE)
    def test_connected_unique(self, method):
        r = uniqueness_probe(random_dataset(np.random.default_rng(54), 5, 4), MethodSpec(method), k_starts=8)
        assert r.unique and r.spread <= 1e-6 and r.seed == 0

    @pytest.mark.parametrize("method", SHARE)
    def test_split_example(self, method):
        r = uniqueness_probe(validate_dataset(PRICES_4, Q_SPLIT), MethodSpec(method), k_starts=8)
        assert not r.unique and r.spread > 1e-3

    def test_identical_starts(self):
        d = disconnected_dataset(np.random.default_rng(55))
        r = uniqueness_probe(d, MethodSpec(Method.IDB), starts=np.ones((2, 4)))
        assert r.spread == 0 and r.k_starts == 2

    def test_needs_two(self):
        with pytest.raises(ValueError):
            uniqueness_probe(random_dataset(np.random.default_rng(56), 3, 3), MethodSpec(Method.IDB), k_starts=1)

    def test_seed_reproducible(self):
        d = random_dataset(np.random.default_rng(57), 4, 4)
        a = uniqueness_probe(d, MethodSpec(Method.ARITH), seed=9)
        b = uniqueness_probe(d, MethodSpec(Method.ARITH), seed=9)
        assert a.spread == b.spread
