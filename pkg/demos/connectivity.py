"""Which quantity patterns support a multilateral comparison.

Run: python3 demos/connectivity.py
"""

from __future__ import annotations

from pathlib import Path

from multindex import Method, MethodSpec, build_cd, build_F, is_connected, is_irreducible
from multindex.cli import ingest

DATA = Path(__file__).parent / "data"

for name in ("full", "star", "split"):
    d = ingest(DATA / "prices.csv", DATA / f"quantities_{name}.csv")
    rep = is_connected(d.quantities)
    f_mat = build_F(build_cd(d, MethodSpec(Method.GK)))
    comps = [[d.country_labels[j] for j in c] for c in rep.country_components]
    print(f"{name:6s} connected={rep.connected!s:5s} irreducible F={is_irreducible(f_mat)!s:5s} components={comps}")
    if rep.witness is not None:
        print(f"       witness: commodities {[d.commodity_labels[i] for i in rep.witness]} touch only one group")
