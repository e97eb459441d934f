"""Every index system on one connected dataset, side by side.

Run: python3 demos/methods.py
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from multindex import Method, MethodSpec, PreferenceSpec, binary_parities, solve
from multindex.cli import ingest, read_vector

DATA = Path(__file__).parent / "data"
d = ingest(DATA / "prices.csv", DATA / "quantities_full.csv")
beta = read_vector(DATA / "beta.csv", d.country_labels)
leontief = PreferenceSpec("leontief")
ces = PreferenceSpec("ces", read_vector(DATA / "shares.csv", d.commodity_labels), 0.5)

specs = {
    "GK": MethodSpec(Method.GK),
    "GGK": MethodSpec(Method.GGK, beta=beta),
    "EWGK": MethodSpec(Method.EWGK),
    "GK_MEAN rho=0.5": MethodSpec(Method.GK_MEAN, rho=0.5, beta=beta),
    "RAO": MethodSpec(Method.RAO),
    "IDB": MethodSpec(Method.IDB),
    "ARITH": MethodSpec(Method.ARITH),
    "GEN_MEAN rho=2": MethodSpec(Method.GEN_MEAN, rho=2.0),
    "NEARY Leontief": MethodSpec(Method.NEARY, preference=leontief),
    "NEARY CES 0.5": MethodSpec(Method.NEARY, preference=ces),
}

print(f"{'method':16s}" + "".join(f"{c:>10s}" for c in d.country_labels) + f"{'residual':>11s}")
for name, spec in specs.items():
    s = solve(d, spec)
    print(f"{name:16s}" + "".join(f"{x:10.4f}" for x in s.ppp) + f"{s.residual_norm:11.1e}")

# Leontief preferences reproduce GK exactly.
gk, neary = solve(d, specs["GK"]), solve(d, specs["NEARY Leontief"])
print("\nNEARY(Leontief) vs GK max rel dev:", float(np.max(np.abs(neary.ppp / gk.ppp - 1))))

# Binary parities are ratios of PPPs, hence transitive.
pm = binary_parities(solve(d, specs["RAO"]))
print("RAO parity of C relative to B:", pm.values[1, 2])
