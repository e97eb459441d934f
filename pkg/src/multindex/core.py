"""Validated data model shared by every solver.

Arrays are stored commodity-by-country (``N x M``) and frozen after
construction, so every object here can be shared freely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    DimensionMismatch,
    EmptyCommodityRow,
    EmptyCountryColumn,
    NegativeQuantity,
    NonPositivePrice,
    UnsupportedMethod,
)

Array = NDArray[np.float64]


def _frozen(a: ArrayLike) -> Array:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


class Method(str, enum.Enum):
    GK = "gk"
    GGK = "ggk"
    EWGK = "ewgk"
    GK_MEAN = "gk_mean"
    RAO = "rao"
    IDB = "idb"
    ARITH = "arith"
    GEN_MEAN = "gen_mean"
    NEARY = "neary"
    RAO76 = "rao76"

    def __str__(self) -> str:
        return self.name


LINEAR_METHODS = frozenset({Method.GK, Method.GGK, Method.EWGK, Method.GK_MEAN})
SHARE_METHODS = frozenset({Method.RAO, Method.IDB, Method.ARITH, Method.GEN_MEAN})
PREFERENCE_METHODS = frozenset({Method.NEARY, Method.RAO76})

# Exponent of the generalized mean used by the fixed-order share systems.
FIXED_RHO = {Method.RAO: 0.0, Method.IDB: -1.0, Method.ARITH: 1.0}


class Normalization(str, enum.Enum):
    FIRST_COUNTRY_ONE = "first"
    GEOMEAN_ONE = "geomean"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class Dataset:
    """Strictly positive prices and nonnegative quantities, ``N`` commodities by ``M`` countries.

    Build instances with :func:`validate_dataset`; the constructor itself does not check the rules.
    """

    prices: Array
    quantities: Array
    commodity_labels: tuple[str, ...]
    country_labels: tuple[str, ...]

    @property
    def n_commodities(self) -> int:
        return self.prices.shape[0]

    @property
    def n_countries(self) -> int:
        return self.prices.shape[1]

    @property
    def expenditure(self) -> Array:
        """Nominal expenditure of each country, in its own currency."""
        return (self.prices * self.quantities).sum(axis=0)

    @property
    def support(self) -> NDArray[np.bool_]:
        return self.quantities > 0


@dataclass(frozen=True, eq=False)
class SharesView:
    """Expenditure shares ``w`` (columns sum to one) and cross-country shares ``w_star`` (rows sum to one)."""

    w: Array
    w_star: Array


@dataclass(frozen=True, eq=False)
class MethodSpec:
    """Which index system to solve and how.

    ``rho`` is read only by GK_MEAN and GEN_MEAN, ``beta`` only by GGK and GK_MEAN
    (unit weights when omitted) and ``preference`` only by NEARY and RAO76.
    ``tol``/``max_iter`` default per solver family when left as ``None``.
    """

    method: Method
    rho: Optional[float] = None
    beta: Optional[Array] = None
    preference: Any = None
    normalization: Normalization = Normalization.FIRST_COUNTRY_ONE
    tol: Optional[float] = None
    max_iter: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.beta is not None:
            beta = _frozen(self.beta)
            if beta.ndim != 1 or not np.all(beta > 0):
                raise ValueError("beta must be a strictly positive vector")
            object.__setattr__(self, "beta", beta)
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.method in (Method.GK_MEAN, Method.GEN_MEAN) and self.rho is None:
            raise ValueError(f"{self.method} needs rho")
        if self.method in PREFERENCE_METHODS and self.preference is None:
            raise ValueError(f"{self.method} needs a preference")

    @property
    def effective_rho(self) -> float:
        if self.method in FIXED_RHO:
            return FIXED_RHO[self.method]
        if self.method in (Method.GK_MEAN, Method.GEN_MEAN):
            return float(self.rho)
        return 1.0

    def beta_for(self, n_countries: int) -> Array:
        if self.beta is None:
            return np.ones(n_countries)
        if self.beta.shape != (n_countries,):
            raise DimensionMismatch(f"beta has length {self.beta.shape[0]}, expected {n_countries}")
        return np.asarray(self.beta)

    def with_(self, **changes: Any) -> "MethodSpec":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Solution:
    """PPPs (one per country) and international prices (one per commodity)."""

    ppp: Array
    p_int: Array
    normalization: Normalization
    iterations: int = 0
    residual_norm: float = float("nan")
    lambda_estimate: float = float("nan")
    method: Optional[Method] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ppp", _frozen(self.ppp))
        object.__setattr__(self, "p_int", _frozen(self.p_int))


@dataclass(frozen=True, eq=False)
class ParityMatrix:
    """``values[j, k] = PPP_k / PPP_j``: currency units of ``k`` per unit of ``j``."""

    values: Array

    def __getitem__(self, key):
        return self.values[key]


def validate_dataset(
    prices: ArrayLike,
    quantities: ArrayLike,
    commodity_labels: Optional[Sequence[str]] = None,
    country_labels: Optional[Sequence[str]] = None,
) -> Dataset:
    """Check the dataset rules and return a frozen :class:`Dataset`.

    Rules are checked in a fixed order (shape, prices, quantities, rows, columns)
    and the first violation found, scanning row-major, is raised.

    Raises:
        DimensionMismatch, NonPositivePrice, NegativeQuantity,
        EmptyCommodityRow, EmptyCountryColumn
    """
    p = np.asarray(prices, dtype=float)
    q = np.asarray(quantities, dtype=float)
    if p.ndim != 2 or q.ndim != 2:
        raise DimensionMismatch("prices and quantities must be two-dimensional")
    if p.shape != q.shape:
        raise DimensionMismatch(f"prices are {p.shape[0]}x{p.shape[1]}, quantities {q.shape[0]}x{q.shape[1]}")
    n, m = p.shape
    if n < 1 or m < 1:
        raise DimensionMismatch("need at least one commodity and one country")

    bad = np.argwhere(~(p > 0) | ~np.isfinite(p))
    if bad.size:
        i, j = bad[0]
        raise NonPositivePrice(int(i), int(j), float(p[i, j]))
    bad = np.argwhere(~(q >= 0) | ~np.isfinite(q))
    if bad.size:
        i, j = bad[0]
        raise NegativeQuantity(int(i), int(j), float(q[i, j]))
    support = q > 0
    empty = np.flatnonzero(~support.any(axis=1))
    if empty.size:
        raise EmptyCommodityRow(int(empty[0]))
    empty = np.flatnonzero(~support.any(axis=0))
    if empty.size:
        raise EmptyCountryColumn(int(empty[0]))

    commodity_labels = tuple(commodity_labels) if commodity_labels is not None else tuple(f"c{i + 1}" for i in range(n))
    country_labels = tuple(country_labels) if country_labels is not None else tuple(f"k{j + 1}" for j in range(m))
    if len(commodity_labels) != n or len(country_labels) != m:
        raise DimensionMismatch("label counts do not match the matrix shape")
    return Dataset(_frozen(p), _frozen(q), commodity_labels, country_labels)


def expenditure_shares(d: Dataset) -> SharesView:
    e = d.prices * d.quantities
    w = e / e.sum(axis=0, keepdims=True)
    w_star = w / w.sum(axis=1, keepdims=True)
    return SharesView(_frozen(w), _frozen(w_star))


def binary_parities(s: Solution) -> ParityMatrix:
    ppp = np.asarray(s.ppp)
    return ParityMatrix(_frozen(ppp[None, :] / ppp[:, None]))


def normalize_solution(s: Solution, convention: Normalization | str) -> Solution:
    """Rescale ``(ppp, p_int)`` to ``(g * ppp, p_int / g)`` so that the convention holds."""
    convention = Normalization(convention)
    ppp = np.asarray(s.ppp)
    if convention is Normalization.FIRST_COUNTRY_ONE:
        g = 1.0 / ppp[0]
    else:
        g = np.exp(-np.mean(np.log(ppp)))
    return replace(s, ppp=ppp * g, p_int=np.asarray(s.p_int) / g, normalization=convention)


def relative_error(x: ArrayLike, x_hat: ArrayLike) -> float:
    x, x_hat = np.asarray(x, dtype=float), np.asarray(x_hat, dtype=float)
    return float(np.max(np.abs(x - x_hat) / np.abs(x_hat)))


def residual(d: Dataset, spec: MethodSpec, s: Solution | tuple) -> float:
    """Largest relative violation over all ``M + N`` defining equations of ``spec.method``.

    Each equation is evaluated in the form ``PPP_j = H_j(P)`` / ``P_i = H_i(PPP)``
    and compared as ``|x - H| / |H|``. ``s`` may be a :class:`Solution` or a
    ``(ppp, p_int)`` pair.
    """
    ppp, p_int = (s.ppp, s.p_int) if isinstance(s, Solution) else s
    ppp, p_int = np.asarray(ppp, dtype=float), np.asarray(p_int, dtype=float)
    if ppp.shape != (d.n_countries,) or p_int.shape != (d.n_commodities,):
        raise DimensionMismatch("solution vectors do not match the dataset")
    ppp_hat, p_hat = system_images(d, spec, ppp, p_int)
    return max(relative_error(ppp, ppp_hat), relative_error(p_int, p_hat))


def system_images(d: Dataset, spec: MethodSpec, ppp: Array, p_int: Array) -> tuple[Array, Array]:
    """Right-hand sides ``(H2(P), H1(PPP))`` of the chosen system at ``(ppp, p_int)``."""
    method = spec.method
    if method in LINEAR_METHODS:
        from .linear import system_images as images
    elif method in SHARE_METHODS:
        from .dad import system_images as images
    elif method in PREFERENCE_METHODS:
        from .neary import system_images as images
    else:  # pragma: no cover - Method is a closed enum
        raise UnsupportedMethod(method, "residual")
    return images(d, spec, ppp, p_int)
