"""Structural existence conditions.

Everything here looks at support patterns only: an entry counts as present iff
it is strictly greater than zero, with no tolerance.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike
from scipy.sparse import bmat, csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import ScaleMismatch

FEASIBILITY_RTOL = 1e-9
# Flows below this (after scaling capacities to total 1) are treated as zero when
# building the residual network.
FLOW_ATOL = 1e-12


@dataclass(frozen=True)
class ConnectivityReport:
    connected: bool
    country_components: list[list[int]]
    commodity_components: list[list[int]]
    witness: Optional[list[int]] = None

    def labelled(self, country_labels, commodity_labels) -> dict:
        return {
            "connected": self.connected,
            "country_components": [[country_labels[j] for j in c] for c in self.country_components],
            "commodity_components": [[commodity_labels[i] for i in c] for c in self.commodity_components],
            "witness": None if self.witness is None else [country_labels[j] for j in self.witness],
        }


@dataclass(frozen=True)
class CountryGraph:
    """Quantity-adjacent graph: countries ``j < k`` share an edge when some commodity is consumed by both.

    ``edges`` maps each pair to the lowest-indexed commodity witnessing it.
    """

    n_vertices: int
    edges: dict[tuple[int, int], int] = field(default_factory=dict)

    def neighbours(self, j: int) -> list[int]:
        return sorted({b if a == j else a for (a, b) in self.edges if j in (a, b)})

    def is_connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == self.n_vertices


@dataclass(frozen=True)
class CompatibilityReport:
    """Outcome of the transport-feasibility test for a DAD triplet.

    ``violating_sets`` is ``(I_c, J)``: commodity rows ``I_c`` whose support lies
    inside countries ``J``, with ``sum(c[I_c]) > sum(d[J])`` when incompatible, or
    a tight pair with ``A[I, J] != 0`` when compatible but not strict.
    """

    compatible: bool
    strict: bool
    violating_sets: Optional[tuple[list[int], list[int]]]
    flow_value: float
    total_c: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "compatible": self.compatible,
            "strict": self.strict,
            "violating_sets": None if self.violating_sets is None else [list(s) for s in self.violating_sets],
            "flow_value": self.flow_value,
            "total_c": self.total_c,
        }


def _components(labels: np.ndarray) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(idx)
    return sorted(groups.values(), key=lambda g: g[0])


def is_connected(q: ArrayLike) -> ConnectivityReport:
    """Connectedness of the commodity-country support graph of ``q``."""
    support = np.asarray(q) > 0
    n, m = support.shape
    s = csr_matrix(support.astype(np.int8))
    graph = bmat([[None, s], [s.T, None]], format="csr")
    _, labels = connected_components(graph, directed=False)
    commodity_labels, country_labels = labels[:n], labels[n:]

    countries = _components(country_labels)
    commodities = []
    for comp in countries:
        lab = country_labels[comp[0]]
        commodities.append([int(i) for i in np.flatnonzero(commodity_labels == lab)])
    connected = len(countries) == 1
    return ConnectivityReport(
        connected=connected,
        country_components=countries,
        commodity_components=commodities,
        witness=None if connected else list(countries[0]),
    )


def adjacency_graph(q: ArrayLike) -> CountryGraph:
    support = np.asarray(q) > 0
    m = support.shape[1]
    edges: dict[tuple[int, int], int] = {}
    for j in range(m - 1):
        both = support[:, j : j + 1] & support[:, j + 1 :]
        has = both.any(axis=0)
        first = both.argmax(axis=0)
        for off in np.flatnonzero(has):
            edges[(j, j + 1 + int(off))] = int(first[off])
    return CountryGraph(m, edges)


def is_irreducible(a: ArrayLike) -> bool:
    """True iff the digraph with an edge ``i -> j`` for every ``a[i, j] > 0`` is strongly connected."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("irreducibility is defined for square matrices")
    if a.shape[0] == 1:
        return True
    n_comp, _ = connected_components(csr_matrix((a > 0).astype(np.int8)), directed=True, connection="strong")
    return n_comp == 1


def compatibility_check(a: ArrayLike, c: ArrayLike, d: ArrayLike) -> CompatibilityReport:
    """Decide whether a matrix supported on ``a > 0`` can have row sums ``c`` and column sums ``d``.

    Solved as a max-flow problem: source -> commodity ``i`` (capacity ``c_i``),
    commodity ``i`` -> country ``j`` (unbounded, iff ``a_ij > 0``), country ``j`` ->
    sink (capacity ``d_j``), with every capacity divided by ``sum(c)``. The
    triplet is compatible iff the flow saturates the source. Tight subset pairs
    are exactly the closed vertex sets of the residual network, so strictness is
    decided from its strongly connected components.

    Raises:
        ScaleMismatch: if ``sum(c)`` and ``sum(d)`` differ by more than 1e-9 relative.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    n, m = a.shape
    total_c, total_d = float(c.sum()), float(d.sum())
    if not np.isclose(total_c, total_d, rtol=FEASIBILITY_RTOL, atol=0.0):
        raise ScaleMismatch(total_c, total_d)
    cs, ds = c / total_c, d / total_c
    support = a > 0

    # Nodes: 0..n-1 commodities, n..n+m-1 countries, then source and sink.
    src, sink = n + m, n + m + 1
    g = nx.DiGraph()
    g.add_nodes_from(range(n + m + 2))
    for i in range(n):
        g.add_edge(src, i, capacity=cs[i])
    for j in range(m):
        g.add_edge(n + j, sink, capacity=ds[j])
    rows, cols = np.nonzero(support)
    g.add_edges_from((int(i), n + int(j)) for i, j in zip(rows, cols))
    value, flow = nx.maximum_flow(g, src, sink, flow_func=nx.algorithms.flow.preflow_push)
    compatible = abs(value - 1.0) <= FEASIBILITY_RTOL

    # Residual network restricted to commodity/country vertices.
    res = nx.DiGraph()
    res.add_nodes_from(range(n + m))
    res.add_edges_from((int(i), n + int(j)) for i, j in zip(rows, cols))
    res.add_edges_from(
        (n + int(j), int(i)) for i, j in zip(rows, cols) if flow[int(i)][n + int(j)] > FLOW_ATOL
    )

    if not compatible:
        reach = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            if v == src:
                nxt = [i for i in range(n) if cs[i] - flow[src][i] > FLOW_ATOL]
            elif v < n + m:
                nxt = list(res.successors(v))
                if v >= n and ds[v - n] - flow[v][sink] > FLOW_ATOL:
                    nxt.append(sink)
            else:
                nxt = []
            for u in nxt:
                if u not in reach:
                    reach.add(u)
                    stack.append(u)
        ic = sorted(v for v in reach if v < n)
        jj = sorted(v - n for v in reach if n <= v < n + m)
        return CompatibilityReport(False, False, (ic, jj), value * total_c, total_c)

    violation = _tight_violation(res, support, n, m)
    return CompatibilityReport(True, violation is None, violation, value * total_c, total_c)


def _tight_violation(res: nx.DiGraph, support: np.ndarray, n: int, m: int) -> Optional[tuple[list[int], list[int]]]:
    # Closed sets are unions of descendant-closures of SCCs; these generate all
    # tight pairs, and A_IJ = 0 is preserved under unions, so checking the
    # generators is enough.
    cond = nx.condensation(res)
    members = nx.get_node_attributes(cond, "members")
    for comp in nx.topological_sort(cond):
        closure = set(members[comp])
        for desc in nx.descendants(cond, comp):
            closure |= members[desc]
        if len(closure) == n + m:
            continue
        ic = sorted(v for v in closure if v < n)
        jj = sorted(v - n for v in closure if v >= n)
        rest = [i for i in range(n) if i not in set(ic)]
        if rest and jj and support[np.ix_(rest, jj)].any():
            return ic, jj
    return None
