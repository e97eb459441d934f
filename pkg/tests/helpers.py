"""Dataset generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from multindex import Method, MethodSpec, PreferenceSpec, is_connected, validate_dataset

# Quantity matrices of the three worked 4x4 connectedness examples.
Q_COMPLETE = np.array([[10, 5, 100, 25], [6, 3, 75, 35], [80, 25, 250, 125], [8, 6, 35, 40]], dtype=float)
Q_STAR = np.array([[10, 5, 0, 0], [6, 0, 75, 0], [80, 25, 0, 0], [8, 0, 0, 40]], dtype=float)
Q_SPLIT = np.array([[10, 5, 0, 0], [6, 3, 0, 0], [0, 0, 250, 125], [0, 0, 35, 40]], dtype=float)

PRICES_4 = np.array([[1.0, 2.1, 14.0, 0.9], [3.0, 5.5, 40.0, 2.8], [2.0, 3.9, 30.5, 2.2], [0.5, 1.2, 6.0, 0.45]])


def random_support(rng, n, m, density=0.5):
    """Random support pattern with no empty row or column."""
    s = rng.random((n, m)) < density
    for i in np.flatnonzero(~s.any(axis=1)):
        s[i, rng.integers(m)] = True
    for j in np.flatnonzero(~s.any(axis=0)):
        s[rng.integers(n), j] = True
    return s


def random_dataset(rng, n, m, density=0.6, connected=True):
    """Random positive prices with country price levels, and a (by default connected) quantity matrix."""
    while True:
        s = random_support(rng, n, m, density)
        if not connected or is_connected(s).connected:
            break
    level = np.exp(rng.normal(0.0, 1.5, size=m))
    p = level[None, :] * np.exp(rng.normal(0.0, 0.4, size=(n, m)))
    q = np.where(s, np.exp(rng.normal(0.0, 1.0, size=(n, m))), 0.0)
    return validate_dataset(p, q)


def dense_dataset(rng, n, m):
    return random_dataset(rng, n, m, density=1.0)


def disconnected_dataset(rng, n1=2, m1=2, n2=2, m2=2):
    """Two independent blocks, so the quantity matrix is not connected."""
    n, m = n1 + n2, m1 + m2
    p = np.exp(rng.normal(0.0, 0.5, size=(n, m)))
    q = np.zeros((n, m))
    q[:n1, :m1] = np.exp(rng.normal(size=(n1, m1)))
    q[n1:, m1:] = np.exp(rng.normal(size=(n2, m2)))
    return validate_dataset(p, q)


def cd_consistent_dataset(rng, a, m):
    """Quantities generated by Cobb-Douglas demand: ``q_im = a_i E_m / p_im``."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    p = np.exp(rng.normal(0.0, 0.5, size=(n, m)))
    e = np.exp(rng.normal(0.0, 1.0, size=m))
    return validate_dataset(p, a[:, None] * e[None, :] / p)


LEONTIEF = PreferenceSpec("leontief")

# One representative spec per supported method (rho / beta chosen away from the special cases).
def all_specs(m, pref=LEONTIEF):
    beta = np.linspace(0.5, 2.0, m)
    return [
        MethodSpec(Method.GK),
        MethodSpec(Method.GGK, beta=beta),
        MethodSpec(Method.EWGK),
        MethodSpec(Method.GK_MEAN, rho=0.5, beta=beta),
        MethodSpec(Method.GK_MEAN, rho=0.0, beta=beta),
        MethodSpec(Method.RAO),
        MethodSpec(Method.IDB),
        MethodSpec(Method.ARITH),
        MethodSpec(Method.GEN_MEAN, rho=2.0),
        MethodSpec(Method.GEN_MEAN, rho=-0.5),
        MethodSpec(Method.NEARY, preference=pref),
        MethodSpec(Method.RAO76, preference=pref),
    ]


def spec_id(spec):
    return f"{spec.method.name}" + ("" if spec.rho is None else f"[rho={spec.rho:g}]")


def geomean_one(x):
    x = np.asarray(x, dtype=float)
    return x / np.exp(np.mean(np.log(x)))


def rel_dev(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return float(np.max(np.abs(x - y) / np.maximum(np.abs(x), np.abs(y))))
