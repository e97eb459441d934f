"""Share-weighted systems (Rao, IDB, arithmetic, generalized mean of order rho).

In the generalized-mean system

    PPP_j = M_rho(p_.j / P; w_.j),     P_i = M_rho(p_i. / PPP; w*_i.)

the substitution ``x_j = PPP_j**rho`` turns the composed map into the DAD
fixed point ``x = A'(c / A(d / x))`` with ``a_ij = w_ij p_ij**rho / c_i``,
``c_i = sum_j w_ij`` and ``d_j = 1``. :func:`dad_fixed_point` iterates that
form directly. :func:`solve_share_system` runs the same alternating
substitution in log coordinates ``u = log PPP``, ``v = log P``, which stays
accurate as ``rho -> 0``; at ``rho = 0`` the system is linear in logs and is
solved directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .connectivity import compatibility_check, is_connected
from .core import (
    SHARE_METHODS,
    Array,
    Dataset,
    Method,
    MethodSpec,
    Normalization,
    Solution,
    expenditure_shares,
    normalize_solution,
    residual,
)
from .core import system_images as _images
from .exceptions import Disconnected, IncompatibleTriplet, NoConvergence, UnsupportedMethod

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
UNIQUE_SPREAD = 1e-6


@dataclass(frozen=True, eq=False)
class DadTriplet:
    A: Array
    c: Array
    d: Array
    rho: float


@dataclass(frozen=True, eq=False)
class DadResult:
    x: Array
    iterations: int
    residual: float


def build_dad(d: Dataset, spec: MethodSpec) -> DadTriplet:
    if spec.method not in SHARE_METHODS:
        raise UnsupportedMethod(spec.method, "build_dad")
    rho = spec.effective_rho
    w = np.asarray(expenditure_shares(d).w)
    e = np.where(w > 0, np.asarray(d.prices) ** rho, 0.0)
    row = w.sum(axis=1)
    col = w.sum(axis=0)
    a = w * e / (row[:, None] * col[None, :])
    return DadTriplet(a, row, col, rho)


def dad_operator(t: DadTriplet, x: Array) -> Array:
    y = t.c / (t.A @ (t.d / x))
    return t.A.T @ y


def dad_fixed_point(
    t: DadTriplet,
    x0: Optional[ArrayLike] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    check: bool = True,
) -> DadResult:
    """Alternating substitution for ``x = A'(c / A(d / x))``.

    The map is homogeneous of degree one, so the iterate is rescaled to
    ``sum(x) = sum(d)`` after each sweep. With
    ``check=True`` the compatibility and connectedness preconditions are
    verified first.

    Raises:
        IncompatibleTriplet, Disconnected, NoConvergence
    """
    if check:
        report = compatibility_check(t.A, t.c, t.d)
        if not report.compatible:
            raise IncompatibleTriplet(report)
        conn = is_connected(t.A)
        if not conn.connected:
            raise Disconnected(conn)
    m = t.A.shape[1]
    x = np.ones(m) if x0 is None else np.asarray(x0, dtype=float).copy()
    scale = t.d.sum()
    x *= scale / x.sum()
    history: list[float] = []
    for it in range(1, max_iter + 1):
        new = dad_operator(t, x)
        new *= scale / new.sum()
        change = float(np.max(np.abs(new - x) / new))
        x = new
        history.append(change)
        if change < tol:
            tx = dad_operator(t, x)
            return DadResult(x, it, float(np.max(np.abs(tx - x) / x)))
    raise NoConvergence(max_iter, history[-10:])


def gen_mean_log(z: Array, wts: Array, rho: float, axis: int) -> Array:
    """Log of the weighted power mean of ``exp(z)`` along ``axis``.

    Weights must sum to one along ``axis``; zero weights drop their terms exactly.
    """
    zbar = (wts * z).sum(axis=axis)
    if rho == 0:
        return zbar
    on = wts > 0
    t = np.where(on, rho * (z - np.expand_dims(zbar, axis)), 0.0)
    if np.max(np.abs(t)) <= 1.0:
        return zbar + np.log1p((wts * np.expm1(t)).sum(axis=axis)) / rho
    tmax = np.where(on, t, -np.inf).max(axis=axis, keepdims=True)
    s = np.where(on, wts * np.exp(t - tmax), 0.0).sum(axis=axis)
    return zbar + (np.squeeze(tmax, axis) + np.log(s)) / rho


def _share_weights(d: Dataset) -> tuple[Array, Array]:
    sh = expenditure_shares(d)
    return np.asarray(sh.w), np.asarray(sh.w_star)


def log_linear_images(d: Dataset, u_w: Array, v_w: Array, ppp: Array, p_int: Array, rho: float = 0.0):
    logp = np.log(np.asarray(d.prices))
    ppp_hat = np.exp(gen_mean_log(logp - np.log(p_int)[:, None], u_w, rho, axis=0))
    p_hat = np.exp(gen_mean_log(logp - np.log(ppp)[None, :], v_w, rho, axis=1))
    return ppp_hat, p_hat


def system_images(d: Dataset, spec: MethodSpec, ppp: Array, p_int: Array) -> tuple[Array, Array]:
    w, w_star = _share_weights(d)
    return log_linear_images(d, w, w_star, ppp, p_int, spec.effective_rho)


def _finish(d: Dataset, spec: MethodSpec, u: Array, v: Array, iterations: int, diagnostics: dict) -> Solution:
    ppp, p_int = np.exp(u), np.exp(v)
    ppp_hat, _ = _images(d, spec, ppp, p_int)
    lam = float(np.exp(np.mean(np.log(ppp_hat / ppp))))
    sol = Solution(ppp, p_int, Normalization.FIRST_COUNTRY_ONE, iterations, lambda_estimate=lam,
                   method=spec.method, diagnostics=diagnostics)
    sol = normalize_solution(sol, spec.normalization)
    return replace(sol, residual_norm=residual(d, spec, sol))


def _iterate_logs(logp, u_w, v_w, rho, u0, tol, max_iter):
    u = np.asarray(u0, dtype=float) - np.mean(u0)
    history: list[float] = []
    for it in range(1, max_iter + 1):
        v = gen_mean_log(logp - u[None, :], v_w, rho, axis=1)
        new = gen_mean_log(logp - v[:, None], u_w, rho, axis=0)
        new -= new.mean()
        change = float(np.max(np.abs(new - u)))
        u = new
        history.append(change)
        if change < tol:
            v = gen_mean_log(logp - u[None, :], v_w, rho, axis=1)
            tail = history[5:]
            monotone = all(b <= a for a, b in zip(tail, tail[1:]))
            return u, v, it, monotone
    raise NoConvergence(max_iter, history[-10:])


def solve_log_linear(
    d: Dataset,
    spec: MethodSpec,
    u_w: Array,
    v_w: Array,
    u0: Optional[ArrayLike] = None,
) -> Solution:
    """Solve ``u = U'(L - v)``, ``v = V(L - u)`` row/column-wise, with ``L = log p``.

    Without a start the system is solved directly: eliminating ``v`` gives
    ``(I - U'V) u = U'(L)diag - U'V(L)diag`` whose matrix is row-stochastic, so the
    solution is pinned by ``sum(u) = 0``. With ``u0`` the alternating iteration is
    run instead (the uniqueness probe needs start dependence).
    """
    logp = np.log(np.asarray(d.prices))
    if u0 is not None:
        u, v, it, monotone = _iterate_logs(logp, u_w, v_w, 0.0, u0, spec.tol or DEFAULT_TOL,
                                           spec.max_iter or DEFAULT_MAX_ITER)
        return _finish(d, spec, u, v, it, {"monotone": monotone, "direct": False})
    m = d.n_countries
    a = (u_w * logp).sum(axis=0)
    b = (v_w * logp).sum(axis=1)
    s = u_w.T @ v_w
    lhs = np.vstack([np.eye(m) - s, np.ones((1, m))])
    rhs = np.concatenate([a - u_w.T @ b, [0.0]])
    u = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    v = b - v_w @ u
    return _finish(d, spec, u, v, 1, {"direct": True})


def solve_share_system(
    d: Dataset,
    spec: MethodSpec,
    x0: Optional[ArrayLike] = None,
    precheck: bool = True,
) -> Solution:
    """Solve RAO, IDB, ARITH or GEN_MEAN.

    ``x0`` is an optional positive starting PPP vector; ``precheck=False``
    skips the connectivity refusal.

    Raises:
        Disconnected, NoConvergence
    """
    if spec.method not in SHARE_METHODS:
        raise UnsupportedMethod(spec.method, "solve_share_system")
    if precheck:
        report = is_connected(d.quantities)
        if not report.connected:
            raise Disconnected(report)
    w, w_star = _share_weights(d)
    rho = spec.effective_rho
    u0 = None if x0 is None else np.log(np.asarray(x0, dtype=float))
    if rho == 0:
        return solve_log_linear(d, spec, w, w_star, u0)
    if u0 is None:
        u0 = np.zeros(d.n_countries)
    logp = np.log(np.asarray(d.prices))
    u, v, it, monotone = _iterate_logs(logp, w, w_star, rho, u0, spec.tol or DEFAULT_TOL,
                                       spec.max_iter or DEFAULT_MAX_ITER)
    return _finish(d, spec, u, v, it, {"monotone": monotone, "direct": False})


@dataclass(frozen=True)
class ProbeResult:
    unique: bool
    spread: float
    seed: Optional[int]
    k_starts: int


def uniqueness_probe(
    d: Dataset,
    spec: MethodSpec,
    k_starts: int = 8,
    seed: Optional[int] = 0,
    starts: Optional[ArrayLike] = None,
) -> ProbeResult:
    """Solve from ``k_starts`` log-uniform random starts in ``[1e-2, 1e2]`` and measure the spread.

    The spread is the largest pairwise ``max_j |x_j - y_j| / max(x_j, y_j)`` between
    GEOMEAN_ONE-normalized PPP vectors; the solution is declared unique when it is
    at most 1e-6. Connectivity is not prechecked, so disconnected inputs show up
    as a large spread. ``starts`` overrides the random draw.
    """
    if k_starts < 2:
        raise ValueError("the probe needs at least two starts")
    from .linear import solve_linear
    from .neary import solve_neary

    method = spec.method
    size = d.n_commodities if method is Method.NEARY else d.n_countries
    if starts is None:
        rng = np.random.default_rng(seed)
        starts = 10.0 ** rng.uniform(-2.0, 2.0, size=(k_starts, size))
    else:
        starts = np.asarray(starts, dtype=float)
        k_starts = starts.shape[0]
    norm = spec.with_(normalization=Normalization.GEOMEAN_ONE)

    vectors = []
    for start in starts:
        if method in SHARE_METHODS:
            sol = solve_share_system(d, norm, x0=start, precheck=False)
        elif method is Method.NEARY:
            sol = solve_neary(d, norm.preference, norm, p0=start, precheck=False)
        elif method in (Method.GK, Method.GGK, Method.EWGK, Method.GK_MEAN):
            sol = solve_linear(d, norm, x0=start, precheck=False)
        else:
            raise UnsupportedMethod(method, "uniqueness_probe")
        vectors.append(np.asarray(sol.ppp))

    spread = 0.0
    for i in range(len(vectors)):
        for k in range(i + 1, len(vectors)):
            a, b = vectors[i], vectors[k]
            spread = max(spread, float(np.max(np.abs(a - b) / np.maximum(a, b))))
    return ProbeResult(spread <= UNIQUE_SPREAD, spread, seed, k_starts)
