"""Systems whose weights depend on the international prices: Neary and Rao (1976).

Both use the PPP equation ``1/PPP_j = sum_n q*_nj P_n / E_j`` where ``q*`` is
the cost-minimizing bundle reaching country ``j``'s observed utility at prices
``P``. They differ in the price equation:

    Neary:  P_i = sum_m q_im p_im / PPP_m / sum_m q*_im
    Rao76:  P_i = sum_m q_im p_im / PPP_m / sum_m q_im

Substituting the PPP equation gives a map ``G`` on ``P`` that is homogeneous of
degree one, which is iterated with damping and geometric-mean renormalization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .connectivity import is_connected
from .core import Array, Dataset, Method, MethodSpec, Normalization, Solution, normalize_solution, residual
from .exceptions import (
    Disconnected,
    DimensionMismatch,
    NoConvergence,
    UnsupportedMethod,
    ZeroQuantityUnderInteriorPreference,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 20_000
DEFAULT_DAMPING = 0.5
LAMBDA_TOL = 1e-8
# Give up once international prices span more than e**100.
MAX_LOG_RANGE = 100.0


class Family(str, enum.Enum):
    LEONTIEF = "leontief"
    COBB_DOUGLAS = "cobb_douglas"
    CES = "ces"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class PreferenceSpec:
    """Utility family shared by every country.

    Cobb-Douglas is ``U(x) = prod x_n**a_n``; CES is
    ``U(x) = (sum a_n x_n**((sigma-1)/sigma))**(sigma/(sigma-1))``. Leontief needs no
    parameters: country ``j``'s indifference set is anchored at its own bundle.
    """

    family: Family
    share_params: Optional[Array] = None
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.LEONTIEF:
            return
        if self.share_params is None:
            raise ValueError(f"{self.family} needs share parameters")
        a = np.array(self.share_params, dtype=float)
        if a.ndim != 1 or not np.all(a > 0):
            raise ValueError("share parameters must be a positive vector")
        if abs(a.sum() - 1.0) > 1e-12:
            raise ValueError(f"share parameters sum to {a.sum()!r}, not 1")
        a.setflags(write=False)
        object.__setattr__(self, "share_params", a)
        if self.family is Family.CES:
            if self.sigma is None or not self.sigma > 0 or self.sigma == 1:
                raise ValueError("CES needs a positive sigma different from 1")
            object.__setattr__(self, "sigma", float(self.sigma))

    def params_for(self, n: int) -> Array:
        if self.share_params.shape != (n,):
            raise DimensionMismatch(f"{self.share_params.shape[0]} share parameters for {n} commodities")
        return np.asarray(self.share_params)


@dataclass(frozen=True, eq=False)
class DemandEvaluation:
    q_star: Array


@dataclass(frozen=True, eq=False)
class Rao76Diagnostic:
    """Converged eigenpair of the Rao (1976) map; ``p_int`` is geomean-normalized."""

    lambda_estimate: float
    p_int: Array
    iterations: int
    lambda_is_one: bool


def _require_interior(q: Array, family: Family) -> None:
    zero = np.argwhere(q <= 0)
    if zero.size:
        i, j = zero[0]
        raise ZeroQuantityUnderInteriorPreference(str(family), int(i), int(j))


def utility(x: ArrayLike, pref: PreferenceSpec, reference: Optional[ArrayLike] = None) -> Array:
    """Utility of the bundle(s) ``x`` (commodities along axis 0).

    Leontief utility is measured against ``reference`` (the observed bundle):
    ``min_n x_n / reference_n`` over its support.
    """
    x = np.asarray(x, dtype=float)
    if pref.family is Family.LEONTIEF:
        if reference is None:
            raise ValueError("Leontief utility needs the reference bundle")
        ref = np.asarray(reference, dtype=float)
        if ref.ndim < x.ndim:
            ref = ref.reshape(ref.shape + (1,) * (x.ndim - ref.ndim))
        ratio = np.where(ref > 0, x / np.where(ref > 0, ref, 1.0), np.inf)
        return ratio.min(axis=0)
    a = pref.params_for(x.shape[0]).reshape((-1,) + (1,) * (x.ndim - 1))
    if pref.family is Family.COBB_DOUGLAS:
        return np.exp((a * np.log(x)).sum(axis=0))
    r = (pref.sigma - 1.0) / pref.sigma
    return (a * x**r).sum(axis=0) ** (1.0 / r)


def unit_cost(p_int: ArrayLike, pref: PreferenceSpec) -> float:
    """Minimum cost of one unit of utility (Cobb-Douglas and CES)."""
    p = np.asarray(p_int, dtype=float)
    a = pref.params_for(p.shape[0])
    if pref.family is Family.COBB_DOUGLAS:
        return float(np.exp(np.sum(a * np.log(p / a))))
    if pref.family is Family.CES:
        s = pref.sigma
        return float(np.sum(a**s * p ** (1.0 - s)) ** (1.0 / (1.0 - s)))
    raise UnsupportedMethod(pref.family, "unit_cost")


def hicksian_demand(p_int: ArrayLike, d: Dataset, pref: PreferenceSpec) -> DemandEvaluation:
    """Cost-minimizing bundles ``q*[:, j]`` at prices ``p_int`` reaching ``U(q[:, j])``.

    Raises:
        ZeroQuantityUnderInteriorPreference: for Cobb-Douglas or CES when ``q`` has a zero entry.
    """
    p = np.asarray(p_int, dtype=float)
    if p.shape != (d.n_commodities,):
        raise DimensionMismatch("price vector does not match the commodity count")
    if np.any(p <= 0):
        raise ValueError("international prices must be strictly positive")
    q = np.asarray(d.quantities)
    if pref.family is Family.LEONTIEF:
        return DemandEvaluation(q.copy())
    _require_interior(q, pref.family)
    a = pref.params_for(d.n_commodities)
    u = utility(q, pref)
    e = unit_cost(p, pref)
    if pref.family is Family.COBB_DOUGLAS:
        per_unit = a * e / p
    else:
        per_unit = (a / p) ** pref.sigma * e**pref.sigma
    return DemandEvaluation(per_unit[:, None] * u[None, :])


def _ppp_from(d: Dataset, q_star: Array, p_int: Array) -> Array:
    return d.expenditure / (q_star.T @ p_int)


def _price_map(d: Dataset, q_star: Array, ppp: Array, rao76: bool) -> Array:
    q = np.asarray(d.quantities)
    num = (q * np.asarray(d.prices) / ppp[None, :]).sum(axis=1)
    den = q.sum(axis=1) if rao76 else q_star.sum(axis=1)
    return num / den


def system_images(d: Dataset, spec: MethodSpec, ppp: Array, p_int: Array) -> tuple[Array, Array]:
    q_star = hicksian_demand(p_int, d, spec.preference).q_star
    return _ppp_from(d, q_star, p_int), _price_map(d, q_star, ppp, spec.method is Method.RAO76)


def _error_bound(history: list[float]) -> float:
    # Distance to the fixed point is about change / (1 - r) for contraction ratio r;
    # a small change alone says little when the damped map contracts slowly.
    if history[-1] == 0.0:
        return 0.0
    if len(history) < 2 or history[-2] == 0.0:
        return float("inf")
    r = history[-1] / history[-2]
    return history[-1] / (1.0 - r) if r < 1.0 else float("inf")


def _iterate(d, pref, p0, tol, max_iter, theta, rao76):
    p = np.ones(d.n_commodities) if p0 is None else np.asarray(p0, dtype=float).copy()
    if p.shape != (d.n_commodities,) or np.any(p <= 0):
        raise ValueError("starting prices must be a positive vector of length N")
    p /= np.exp(np.mean(np.log(p)))
    history: list[float] = []
    for it in range(1, max_iter + 1):
        with np.errstate(all="ignore"):
            q_star = hicksian_demand(p, d, pref).q_star
            g = _price_map(d, q_star, _ppp_from(d, q_star, p), rao76)
            new = (1.0 - theta) * p + theta * g
            new /= np.exp(np.mean(np.log(new)))
        if not np.all(np.isfinite(new)) or np.any(new <= 0):
            raise NoConvergence(it, history[-10:], "iterate left the positive orthant")
        if np.log(new.max() / new.min()) > MAX_LOG_RANGE:
            raise NoConvergence(it, history[-10:], "relative prices diverge")
        change = float(np.max(np.abs(new - p) / new))
        p = new
        history.append(change)
        if change < tol and _error_bound(history) < tol:
            q_star = hicksian_demand(p, d, pref).q_star
            g = _price_map(d, q_star, _ppp_from(d, q_star, p), rao76)
            lam = float(np.exp(np.mean(np.log(g / p))))
            return p, lam, it
    raise NoConvergence(max_iter, history[-10:])


def solve_neary(
    d: Dataset,
    pref: PreferenceSpec,
    spec: Optional[MethodSpec] = None,
    p0: Optional[ArrayLike] = None,
    precheck: bool = True,
    damping: float = DEFAULT_DAMPING,
) -> Solution:
    """Neary PPPs via the damped iteration ``P <- (1 - theta) P + theta G(P)``.

    Raises:
        Disconnected, NoConvergence, ZeroQuantityUnderInteriorPreference
    """
    spec = spec if spec is not None else MethodSpec(Method.NEARY, preference=pref)
    spec = spec.with_(method=Method.NEARY, preference=pref)
    if precheck:
        report = is_connected(d.quantities)
        if not report.connected:
            raise Disconnected(report)
    p, lam, it = _iterate(d, pref, p0, spec.tol or DEFAULT_TOL, spec.max_iter or DEFAULT_MAX_ITER, damping, False)
    q_star = hicksian_demand(p, d, pref).q_star
    ppp = _ppp_from(d, q_star, p)
    sol = Solution(ppp, p, Normalization.GEOMEAN_ONE, it, lambda_estimate=lam, method=Method.NEARY,
                   diagnostics={"damping": damping, "family": str(pref.family)})
    sol = normalize_solution(sol, spec.normalization)
    return replace(sol, residual_norm=residual(d, spec, sol))


def solve_rao76(
    d: Dataset,
    pref: PreferenceSpec,
    spec: Optional[MethodSpec] = None,
    p0: Optional[ArrayLike] = None,
    precheck: bool = True,
    damping: float = DEFAULT_DAMPING,
) -> tuple[Optional[Solution], Rao76Diagnostic]:
    """Rao (1976) eigenpair; a :class:`Solution` only when the eigenvalue is one.

    The map has no compatibility constraint forcing ``lambda = 1``, so the
    eigenvector is always returned in the diagnostic and PPPs are recovered only
    when ``|lambda - 1| <= 1e-8``.
    """
    spec = spec if spec is not None else MethodSpec(Method.RAO76, preference=pref)
    spec = spec.with_(method=Method.RAO76, preference=pref)
    if precheck:
        report = is_connected(d.quantities)
        if not report.connected:
            raise Disconnected(report)
    p, lam, it = _iterate(d, pref, p0, spec.tol or DEFAULT_TOL, spec.max_iter or DEFAULT_MAX_ITER, damping, True)
    one = abs(lam - 1.0) <= LAMBDA_TOL
    diag = Rao76Diagnostic(lam, p, it, one)
    if not one:
        return None, diag
    q_star = hicksian_demand(p, d, pref).q_star
    sol = Solution(_ppp_from(d, q_star, p), p, Normalization.GEOMEAN_ONE, it, lambda_estimate=lam,
                   method=Method.RAO76, diagnostics={"damping": damping, "family": str(pref.family)})
    sol = normalize_solution(sol, spec.normalization)
    return replace(sol, residual_norm=residual(d, spec, sol)), diag
