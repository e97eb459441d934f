"""Single entry point dispatching a :class:`MethodSpec` to its solver."""

from __future__ import annotations

from typing import Optional

from numpy.typing import ArrayLike

from .core import LINEAR_METHODS, SHARE_METHODS, Dataset, Method, MethodSpec, Solution
from .exceptions import EigenvalueNotOne


def solve(d: Dataset, spec: MethodSpec, x0: Optional[ArrayLike] = None, precheck: bool = True) -> Solution:
    """Solve ``spec`` on ``d``.

    ``x0`` is a start in the solver's own coordinates: the eigenvector guess for
    linear methods, PPPs for share methods and international prices for the
    preference methods.

    Raises:
        Disconnected, NoConvergence, EigenvalueNotOne (RAO76 only)
    """
    if spec.method in LINEAR_METHODS:
        from .linear import solve_linear

        return solve_linear(d, spec, x0=x0, precheck=precheck)
    if spec.method in SHARE_METHODS:
        from .dad import solve_share_system

        return solve_share_system(d, spec, x0=x0, precheck=precheck)
    from .neary import solve_neary, solve_rao76

    if spec.method is Method.NEARY:
        return solve_neary(d, spec.preference, spec, p0=x0, precheck=precheck)
    sol, diag = solve_rao76(d, spec.preference, spec, p0=x0, precheck=precheck)
    if sol is None:
        raise EigenvalueNotOne(diag)
    return sol
