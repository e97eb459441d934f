"""Brute-force references for small instances.

Slow on purpose: dense elimination instead of power iteration, subset
enumeration instead of max-flow and graph search. Used only to certify the
main solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .core import LINEAR_METHODS, PREFERENCE_METHODS, Array, Dataset, Method, MethodSpec, Normalization
from .exceptions import TooLarge

MAX_COUNTRIES = 12
MAX_TOTAL = 12
MAX_CROSS = 6
RANK_RTOL = 1e-10
TIGHT_RTOL = 1e-9
AGREE_TOL = 1e-8


@dataclass(frozen=True)
class OracleVerdict:
    agrees: bool
    max_rel_dev: float
    detail: str = ""


@dataclass(frozen=True)
class SubsetVerdict:
    """Exhaustive compatibility verdict.

    ``binding`` maps every tight pair ``(I_c, J)`` (as sorted tuples) to whether
    ``A[I, J]`` has a nonzero entry; strictness requires that it never does.
    """

    compatible: bool
    strict: bool
    violating: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    binding: dict[tuple[tuple[int, ...], tuple[int, ...]], bool] = field(default_factory=dict)


def null_space(a: ArrayLike, rtol: float = RANK_RTOL, scale: Optional[float] = None) -> Array:
    """Basis of the null space of ``a`` (one vector per row) by full-pivot Gaussian elimination.

    Pivots at most ``rtol * scale`` count as zero; ``scale`` defaults to ``max|a|``.
    """
    r = np.array(a, dtype=float)
    n_rows, n_cols = r.shape
    if scale is None:
        scale = np.max(np.abs(r)) if r.size else 0.0
    thresh = rtol * scale
    cols = np.arange(n_cols)
    rank = 0
    for k in range(min(n_rows, n_cols)):
        sub = np.abs(r[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= thresh:
            break
        i, j = i + k, j + k
        r[[k, i]] = r[[i, k]]
        r[:, [k, j]] = r[:, [j, k]]
        cols[[k, j]] = cols[[j, k]]
        r[k] /= r[k, k]
        others = np.arange(n_rows) != k
        r[others] -= np.outer(r[others, k], r[k])
        rank += 1
    basis = []
    for free in range(rank, n_cols):
        v = np.zeros(n_cols)
        v[free] = 1.0
        v[:rank] = -r[:rank, free]
        out = np.zeros(n_cols)
        out[cols] = v
        basis.append(out)
    return np.array(basis).reshape(len(basis), n_cols)


def nullspace_oracle(f_mat: ArrayLike) -> Array:
    """Basis of the eigenvalue-one eigenspace of a column-stochastic ``f_mat``.

    A one-dimensional result is scaled to sum to one.

    Raises:
        TooLarge: for more than 12 countries.
    """
    f_mat = np.asarray(f_mat, dtype=float)
    m = f_mat.shape[0]
    if m > MAX_COUNTRIES:
        raise TooLarge(f"null-space oracle is capped at {MAX_COUNTRIES} countries, got {m}")
    # Scale by F, not F - I: for one country F - I is pure rounding.
    basis = null_space(f_mat - np.eye(m), scale=max(1.0, float(np.max(np.abs(f_mat)))))
    if basis.shape[0] == 1:
        basis = basis / basis[0].sum()
    return basis


def connectedness_oracle(q: ArrayLike) -> bool:
    """Check every nonempty proper country subset for a commodity bridging it to its complement."""
    support = np.asarray(q) > 0
    m = support.shape[1]
    if m > MAX_COUNTRIES:
        raise TooLarge(f"connectedness oracle is capped at {MAX_COUNTRIES} countries, got {m}")
    for mask in range(1, 2**m - 1):
        inside = np.array([(mask >> j) & 1 for j in range(m)], dtype=bool)
        bridged = support[:, inside].any(axis=1) & support[:, ~inside].any(axis=1)
        if not bridged.any():
            return False
    return True


def _bits(mask: int, width: int) -> tuple[int, ...]:
    return tuple(k for k in range(width) if (mask >> k) & 1)


def subset_compatibility_oracle(a: ArrayLike, c: ArrayLike, d: ArrayLike) -> SubsetVerdict:
    """Enumerate every pair ``(I, J)`` with ``A[I_c, J_c] = 0`` and test ``sum c[I_c] <= sum d[J]``.

    Raises:
        TooLarge: if ``N + M > 12``.
    """
    support = np.asarray(a) > 0
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    n, m = support.shape
    if n + m > MAX_TOTAL:
        raise TooLarge(f"subset oracle is capped at N + M = {MAX_TOTAL}, got {n + m}")
    tol = TIGHT_RTOL * c.sum()
    row_touch = np.array([sum(1 << int(j) for j in np.flatnonzero(support[i])) for i in range(n)], dtype=np.int64)
    j_masks = np.arange(2**m, dtype=np.int64)
    d_sums = np.array([d[list(_bits(int(k), m))].sum() for k in j_masks])

    compatible, strict = True, True
    violating, binding = [], {}
    full = (1 << n) - 1
    for ic in range(2**n):
        rows_c = _bits(ic, n)
        rows_i = _bits(full & ~ic, n)
        touch_c = int(np.bitwise_or.reduce(row_touch[list(rows_c)])) if rows_c else 0
        touch_i = int(np.bitwise_or.reduce(row_touch[list(rows_i)])) if rows_i else 0
        valid = (j_masks & touch_c) == touch_c
        lhs = c[list(rows_c)].sum()
        over = valid & (lhs > d_sums + tol)
        tight = valid & (np.abs(lhs - d_sums) <= tol)
        for jm in np.flatnonzero(over):
            compatible = False
            violating.append((rows_c, _bits(int(jm), m)))
        for jm in np.flatnonzero(tight):
            nonzero = bool(touch_i & int(jm))
            binding[(rows_c, _bits(int(jm), m))] = nonzero
            strict = strict and not nonzero
    return SubsetVerdict(compatible, compatible and strict, violating, binding)


def _rel_dev(x: Array, y: Array) -> float:
    return float(np.max(np.abs(x - y) / np.maximum(np.abs(x), np.abs(y))))


def _geomean_one(x: Array) -> Array:
    return x / np.exp(np.mean(np.log(x)))


def _linear_oracle_ppp(d: Dataset, spec: MethodSpec):
    """Oracle PPP vector for a linear method, or ``(None, dimension)`` when not unique."""
    from .linear import _geometric_gk_weights, build_cd, build_F

    if spec.method is Method.GK_MEAN and spec.effective_rho == 0:
        u_w, v_w = _geometric_gk_weights(d, spec)
        logp = np.log(np.asarray(d.prices))
        s = u_w.T @ v_w
        r = (u_w * logp).sum(axis=0) - u_w.T @ (v_w * logp).sum(axis=1)
        basis = null_space(np.hstack([np.eye(d.n_countries) - s, -r[:, None]]),
                           scale=max(1.0, float(np.max(np.abs(r)))))
        if basis.shape[0] != 2:
            return None, basis.shape[0] - 1
        v = basis[np.argmax(np.abs(basis[:, -1]))]
        return _geomean_one(np.exp(v[:-1] / v[-1])), 1
    w = build_cd(d, spec)
    basis = nullspace_oracle(build_F(w))
    if basis.shape[0] != 1:
        return None, basis.shape[0]
    f_val = basis[0] / w.C.sum(axis=0)
    f_val = f_val / np.exp(np.mean(np.log(f_val)))  # keeps f**(-1/rho) finite for small rho
    return _geomean_one(w.f.inverse(f_val)), 1


def cross_validate(d: Dataset, spec: MethodSpec) -> OracleVerdict:
    """Compare the main solver with the matching oracle after GEOMEAN_ONE normalization.

    Linear methods are checked against the dense null space; nonlinear ones
    against an 8-start uniqueness probe plus the residual of the solution.
    """
    from .dad import uniqueness_probe
    from .solve import solve

    if d.n_countries > MAX_CROSS or d.n_commodities > MAX_CROSS:
        raise TooLarge(f"cross validation is capped at {MAX_CROSS}x{MAX_CROSS}")
    spec = spec.with_(normalization=Normalization.GEOMEAN_ONE)
    if spec.method in LINEAR_METHODS:
        expected, dim = _linear_oracle_ppp(d, spec)
        if expected is None:
            return OracleVerdict(False, float("inf"), f"eigenvalue-one eigenspace has dimension {dim}")
        sol = solve(d, spec)
        dev = _rel_dev(np.asarray(sol.ppp), expected)
        return OracleVerdict(dev <= AGREE_TOL, dev, "dense null space")
    if spec.method is Method.RAO76 or spec.method not in PREFERENCE_METHODS | {
        Method.RAO, Method.IDB, Method.ARITH, Method.GEN_MEAN
    }:
        return OracleVerdict(False, float("nan"), f"no oracle for {spec.method}")
    probe = uniqueness_probe(d, spec, k_starts=8, seed=0)
    if not probe.unique:
        return OracleVerdict(False, probe.spread, f"multi-start spread {probe.spread:.3g}: solution not unique")
    sol = solve(d, spec, precheck=False)
    dev = max(probe.spread, sol.residual_norm)
    return OracleVerdict(dev <= AGREE_TOL, dev, "8-start probe and residual")
