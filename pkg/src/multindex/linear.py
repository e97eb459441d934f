"""Linear index systems: GK, generalized GK, EWGK and the generalized-mean GK.

All four are written as

    f_j(PPP_j) = sum_n a_nj g_n(P_n),    g_i(P_i) = sum_m b_im f_m(PPP_m)

with ``a = D / colsum(C)`` and ``b = C / rowsum(D)`` for nonnegative ``C, D``
sharing the support of ``q``. Eliminating ``g`` leaves a column-stochastic
eigenproblem ``F x = x`` on the countries, with ``x_j = f_j * colsum(C)_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .connectivity import is_connected, is_irreducible
from .core import (
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
from .exceptions import Disconnected, NoConvergence, TransformDomain, UnsupportedMethod

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class PowerTransform:
    """``x -> scale * x**exponent`` on the positive reals.

    These are the only transforms for which rescaling every PPP by ``gamma``
    and every international price by ``1/gamma`` maps solutions to solutions.
    """

    exponent: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.exponent == 0 or not self.scale > 0:
            raise ValueError("power transform needs a nonzero exponent and positive scale")

    def __call__(self, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise TransformDomain("power transform applied to a nonpositive value")
        return self.scale * x**self.exponent

    def inverse(self, y: ArrayLike) -> Array:
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise TransformDomain("inverse power transform applied to a nonpositive value")
        return (y / self.scale) ** (1.0 / self.exponent)


@dataclass(frozen=True, eq=False)
class LinearWeights:
    C: Array
    D: Array
    f: PowerTransform
    g: PowerTransform

    @property
    def a(self) -> Array:
        """PPP-equation weights ``a_ij = d_ij / sum_n c_nj``."""
        return self.D / self.C.sum(axis=0, keepdims=True)

    @property
    def b(self) -> Array:
        """International-price weights ``b_ij = c_ij / sum_m d_im``."""
        return self.C / self.D.sum(axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class EigenResult:
    x: Array
    lam: float
    iterations: int
    converged: bool
    unique: bool = True
    shifted: bool = False


def build_cd(d: Dataset, spec: MethodSpec) -> LinearWeights:
    """Weights ``C, D`` and transforms ``f, g`` for one of the four linear systems."""
    p, q = np.asarray(d.prices), np.asarray(d.quantities)
    method = spec.method
    if method is Method.GK:
        return LinearWeights(p * q, q.copy(), PowerTransform(-1.0), PowerTransform(1.0))
    if method is Method.GGK:
        beta = spec.beta_for(d.n_countries)[None, :]
        return LinearWeights(beta * p * q, beta * q, PowerTransform(-1.0), PowerTransform(1.0))
    if method is Method.GK_MEAN:
        rho = spec.effective_rho
        if rho == 0:
            raise UnsupportedMethod("GK_MEAN with rho=0", "build_cd (solved in logs)")
        beta = spec.beta_for(d.n_countries)[None, :]
        return LinearWeights(beta * p**rho * q, beta * q, PowerTransform(-rho), PowerTransform(rho))
    if method is Method.EWGK:
        w = np.asarray(expenditure_shares(d).w)
        return LinearWeights(w.copy(), w / p, PowerTransform(-1.0), PowerTransform(1.0))
    raise UnsupportedMethod(method, "build_cd")


def build_F(w: LinearWeights) -> Array:
    """Country-by-country matrix ``F[k, j] = sum_n (d_nk / sum_m d_nm) c_nj / sum_n c_nj``."""
    c_norm = w.C / w.C.sum(axis=0, keepdims=True)
    d_norm = w.D / w.D.sum(axis=1, keepdims=True)
    return d_norm.T @ c_norm


def build_B(w: LinearWeights) -> Array:
    """Stacked ``(N + M)`` system ``[[0, C~], [D~, 0]]`` acting on ``(g * rowsum(D), f * colsum(C))``."""
    n, m = w.C.shape
    c_norm = w.C / w.C.sum(axis=0, keepdims=True)
    d_norm = w.D / w.D.sum(axis=1, keepdims=True)
    b = np.zeros((n + m, n + m))
    b[:n, n:] = c_norm
    b[n:, :n] = d_norm.T
    return b


def solve_eigen(
    a: ArrayLike,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: Optional[ArrayLike] = None,
    shift: bool = False,
) -> EigenResult:
    """Power iteration for the unit eigenvector of a column-stochastic matrix.

    With ``shift=True`` the iteration runs on ``(A + I) / 2``, which has the same
    eigenvectors but no periodic part. Converged means
    ``max|A x - lam x| / max|x| <= tol``.

    Raises:
        NoConvergence: after ``max_iter`` sweeps.
    """
    a = np.asarray(a, dtype=float)
    m = a.shape[0]
    colsum = a.sum(axis=0)
    if np.any(np.abs(colsum - 1.0) > 1e-9):
        raise ValueError("matrix is not column-stochastic")
    op = 0.5 * (a + np.eye(m)) if shift else a
    x = np.full(m, 1.0 / m) if x0 is None else np.asarray(x0, dtype=float) / np.sum(x0)
    history: list[float] = []
    for it in range(1, max_iter + 1):
        y = op @ x
        y /= y.sum()
        ax = a @ y
        lam = float(y @ ax / (y @ y))
        err = float(np.max(np.abs(ax - lam * y)) / np.max(np.abs(y)))
        x = y
        history.append(err)
        if err <= tol:
            return EigenResult(x, lam, it, True, is_irreducible(a), shift)
    raise NoConvergence(max_iter, history[-10:])


def recover_solution(w: LinearWeights, e: EigenResult, d: Dataset, spec: MethodSpec) -> Solution:
    f_val = e.x / w.C.sum(axis=0)
    if np.any(f_val <= 0):
        raise TransformDomain("eigenvector has a nonpositive coordinate")
    # Rescaling f only moves along the (gamma PPP, P / gamma) ray, and keeps
    # f**(-1/rho) representable when rho is small.
    f_val = f_val / np.exp(np.mean(np.log(f_val)))
    g_val = w.b @ f_val
    ppp = w.f.inverse(f_val)
    p_int = w.g.inverse(g_val)
    sol = Solution(ppp, p_int, Normalization.FIRST_COUNTRY_ONE, e.iterations, method=spec.method,
                   lambda_estimate=e.lam, diagnostics={"shifted": e.shifted, "unique": e.unique})
    sol = normalize_solution(sol, spec.normalization)
    return replace(sol, residual_norm=residual(d, spec, sol))


def solve_linear(d: Dataset, spec: MethodSpec, x0: Optional[ArrayLike] = None, precheck: bool = True) -> Solution:
    """Solve GK, GGK, EWGK or GK_MEAN on ``d``.

    ``x0`` seeds the power iteration (used by the uniqueness probe); ``precheck=False``
    skips the connectivity refusal, which only makes sense for diagnostics.

    Raises:
        Disconnected: if ``q`` is not connected.
        NoConvergence: if neither the raw nor the shifted iteration converges.
    """
    if spec.method not in (Method.GK, Method.GGK, Method.EWGK, Method.GK_MEAN):
        raise UnsupportedMethod(spec.method, "solve_linear")
    if precheck:
        report = is_connected(d.quantities)
        if not report.connected:
            raise Disconnected(report)
    tol = spec.tol or DEFAULT_TOL
    max_iter = spec.max_iter or DEFAULT_MAX_ITER
    if spec.method is Method.GK_MEAN and spec.effective_rho == 0:
        from .dad import solve_log_linear

        return solve_log_linear(d, spec, *_geometric_gk_weights(d, spec), u0=None if x0 is None else np.log(x0))

    w = build_cd(d, spec)
    f_mat = build_F(w)
    try:
        e = solve_eigen(f_mat, tol, max_iter, x0)
    except NoConvergence:
        e = solve_eigen(f_mat, tol, max_iter, x0, shift=True)
    return recover_solution(w, e, d, spec)


def _geometric_gk_weights(d: Dataset, spec: MethodSpec) -> tuple[Array, Array]:
    # rho -> 0 limit of GK_MEAN: log PPP_j = sum_n U_nj (log p_nj - log P_n),
    # log P_i = sum_m V_im (log p_im - log PPP_m).
    q = np.asarray(d.quantities)
    beta = spec.beta_for(d.n_countries)[None, :]
    u = q / q.sum(axis=0, keepdims=True)
    v = beta * q / (beta * q).sum(axis=1, keepdims=True)
    return u, v


def system_images(d: Dataset, spec: MethodSpec, ppp: Array, p_int: Array) -> tuple[Array, Array]:
    if spec.method is Method.GK_MEAN and spec.effective_rho == 0:
        from .dad import log_linear_images

        return log_linear_images(d, *_geometric_gk_weights(d, spec), ppp, p_int)
    w = build_cd(d, spec)
    ppp_hat = w.f.inverse(w.a.T @ w.g(p_int))
    p_hat = w.g.inverse(w.b @ w.f(ppp))
    return ppp_hat, p_hat
