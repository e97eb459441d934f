"""Multilateral purchasing-power-parity index systems."""

from .connectivity import (
    CompatibilityReport,
    ConnectivityReport,
    CountryGraph,
    adjacency_graph,
    compatibility_check,
    is_connected,
    is_irreducible,
)
from .core import (
    Dataset,
    Method,
    MethodSpec,
    Normalization,
    ParityMatrix,
    SharesView,
    Solution,
    binary_parities,
    expenditure_shares,
    normalize_solution,
    residual,
    validate_dataset,
)
from .dad import DadTriplet, ProbeResult, build_dad, dad_fixed_point, solve_share_system, uniqueness_probe
from .exceptions import (
    DimensionMismatch,
    Disconnected,
    EigenvalueNotOne,
    EmptyCommodityRow,
    EmptyCountryColumn,
    IncompatibleTriplet,
    MultindexError,
    NegativeQuantity,
    NoConvergence,
    NonPositivePrice,
    ParseError,
    ScaleMismatch,
    TooLarge,
    TransformDomain,
    UnsupportedMethod,
    ValidationError,
    ZeroQuantityUnderInteriorPreference,
)
from .linear import EigenResult, LinearWeights, PowerTransform, build_B, build_cd, build_F, recover_solution, solve_eigen, solve_linear
from .neary import DemandEvaluation, Family, PreferenceSpec, Rao76Diagnostic, hicksian_demand, solve_neary, solve_rao76, utility
from .oracle import (
    OracleVerdict,
    connectedness_oracle,
    cross_validate,
    nullspace_oracle,
    subset_compatibility_oracle,
)
from .solve import solve

__version__ = "0.1.0"
