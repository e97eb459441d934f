"""Property tests over randomly generated datasets."""

from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import all_specs, random_dataset, random_support, rel_dev
from multindex import (
    Method,
    MethodSpec,
    Normalization,
    Solution,
    binary_parities,
    build_cd,
    build_dad,
    build_F,
    compatibility_check,
    connectedness_oracle,
    expenditure_shares,
    is_connected,
    is_irreducible,
    normalize_solution,
    residual,
    solve,
    subset_compatibility_oracle,
    validate_dataset,
)
from multindex.linear import build_B

seeds = st.integers(0, 2**32 - 1)
small = st.integers(1, 6)
PROPS = settings(max_examples=40, deadline=None)


def dataset(seed, n, m, density=0.6):
    return random_dataset(np.random.default_rng(seed), n, m, density=density)


@PROPS
@given(seeds, small, small, st.integers(-8, 8))
def test_shares_stochastic_and_currency_exact(seed, n, m, k):
    d = dataset(seed, n, m)
    sv = expenditure_shares(d)
    np.testing.assert_allclose(sv.w.sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(sv.w_star.sum(axis=1), 1.0, atol=1e-12)
    p = np.array(d.prices)
    p[:, m - 1] *= 2.0**k
    moved = expenditure_shares(validate_dataset(p, d.quantities))
    np.testing.assert_array_equal(moved.w, sv.w)
    np.testing.assert_array_equal(moved.w_star, sv.w_star)


@PROPS
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=8))
def test_parity_transitive(ppp):
    pm = binary_parities(Solution(np.array(ppp), np.ones(1), Normalization.FIRST_COUNTRY_ONE, 1)).values
    m = len(ppp)
    np.testing.assert_array_equal(np.diag(pm), 1.0)
    for j in range(m):
        for k in range(m):
            np.testing.assert_allclose(pm[j, k] * pm[k, j], 1.0, rtol=4e-16)
            for l in range(m):
                tol = 4 * np.spacing(max(abs(pm[j, k] * pm[k, l]), abs(pm[j, l])))
                assert abs(pm[j, k] * pm[k, l] - pm[j, l]) <= tol * 4


@PROPS
@given(seeds, small, st.integers(2, 6))
def test_residual_scale_free_and_normalization(seed, n, m):
    d = dataset(seed, n, m)
    for spec in all_specs(m):
        if spec.method is Method.RAO76:
            continue
        s = solve(d, spec)
        r0 = residual(d, spec, s)
        for g in (0.1, 1.0, 7.3):
            assert abs(residual(d, spec, (g * np.asarray(s.ppp), np.asarray(s.p_int) / g)) - r0) <= 1e-12
        t = normalize_solution(s, Normalization.GEOMEAN_ONE)
        assert abs(np.mean(np.log(t.ppp))) <= 1e-12
        assert abs(residual(d, spec, t) - r0) <= 1e-12


@PROPS
@given(seeds, st.integers(1, 8), st.integers(1, 8), st.floats(0.05, 0.7))
def test_connectivity_agrees(seed, n, m, density):
    s = random_support(np.random.default_rng(seed), n, m, density)
    rep = is_connected(s)
    assert rep.connected == connectedness_oracle(s)
    assert rep.connected == (len(rep.country_components) == 1)
    assert (rep.witness is None) == rep.connected
    if n + m <= 12:
        q = np.where(s, 1.0, 0.0)
        f = build_F(build_cd(validate_dataset(np.ones((n, m)), q), MethodSpec(Method.GK)))
        assert is_irreducible(f) == rep.connected


@PROPS
@given(seeds, small, small)
def test_operators_column_stochastic(seed, n, m):
    d = dataset(seed, n, m)
    for spec in all_specs(m)[:4]:
        w = build_cd(d, spec)
        np.testing.assert_allclose(build_F(w).sum(axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(build_B(w).sum(axis=0), 1.0, atol=1e-12)


@PROPS
@given(seeds, small, st.integers(2, 6))
def test_gk_additivity(seed, n, m):
    d = dataset(seed, n, m)
    s = solve(d, MethodSpec(Method.GK))
    p, q = np.asarray(d.prices), np.asarray(d.quantities)
    lhs = (p * q).sum(axis=0) / np.asarray(s.ppp)
    rhs = np.asarray(s.p_int) @ q
    assert rel_dev(lhs, rhs) <= 1e-10


@PROPS
@given(seeds, st.integers(1, 6), st.integers(1, 6), st.floats(0.2, 0.8))
def test_compatibility_matches_oracle(seed, n, m, density):
    rng = np.random.default_rng(seed)
    a = random_support(rng, n, m, density).astype(float)
    # Small integer margins make tight and violated subset pairs common.
    c = rng.integers(1, 4, size=n).astype(float) * m
    d = rng.multinomial(int(c.sum()) - m, np.ones(m) / m).astype(float) + 1.0
    rep = compatibility_check(a, c, d)
    oracle = subset_compatibility_oracle(a, c, d)
    assert rep.compatible == oracle.compatible
    assert rep.strict == oracle.strict
    if rep.compatible:
        assert abs(rep.flow_value - c.sum()) <= 1e-9 * c.sum()


@PROPS
@given(seeds, small, small, st.sampled_from([Method.RAO, Method.IDB, Method.ARITH]))
def test_shares_triplet_strictly_compatible(seed, n, m, method):
    t = build_dad(dataset(seed, n, m, density=0.5), MethodSpec(method))
    rep = compatibility_check(t.A, t.c, t.d)
    assert rep.compatible and rep.strict


@PROPS
@given(seeds, small, st.integers(2, 6), st.floats(-3, 3))
def test_gen_mean_commodity_unit_invariance(seed, n, m, rho):
    d = dataset(seed, n, m)
    i = n - 1
    p, q = np.array(d.prices), np.array(d.quantities)
    p[i] *= 3.5
    q[i] /= 3.5
    spec = MethodSpec(Method.GEN_MEAN, rho=rho)
    a, b = solve(d, spec), solve(validate_dataset(p, q), spec)
    assert rel_dev(a.ppp, b.ppp) <= 1e-10
    scale = np.ones(n)
    scale[i] = 3.5
    assert rel_dev(np.asarray(a.p_int) * scale, b.p_int) <= 1e-10
