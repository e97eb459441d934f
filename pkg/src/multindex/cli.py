"""Batch front-end.

Reads a price and a quantity CSV (commodities as rows, countries as columns,
labels in the first row and column), solves one or all index systems and
writes a JSON or CSV report.

Exit codes: 0 success, 1 input error, 2 disconnected data, 3 no convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .connectivity import compatibility_check, is_connected
from .core import (
    PREFERENCE_METHODS,
    SHARE_METHODS,
    Dataset,
    Method,
    MethodSpec,
    Normalization,
    binary_parities,
    validate_dataset,
)
from .exceptions import (
    DimensionMismatch,
    EigenvalueNotOne,
    MultindexError,
    NoConvergence,
    ParseError,
    ValidationError,
)

SCHEMA = "multindex/1"
EXIT_OK, EXIT_INPUT, EXIT_DISCONNECTED, EXIT_NO_CONVERGENCE = 0, 1, 2, 3
# Order used by --all-methods.
ALL_METHODS = (
    Method.GK, Method.GGK, Method.EWGK, Method.GK_MEAN, Method.RAO,
    Method.IDB, Method.ARITH, Method.GEN_MEAN, Method.NEARY, Method.RAO76,
)
RHO_METHODS = frozenset({Method.GK_MEAN, Method.GEN_MEAN})
BETA_METHODS = frozenset({Method.GGK, Method.GK_MEAN})
LIMIT_RHO = 1e-6
LIMIT_RTOL = 1e-4

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class InputError(MultindexError, ValueError):
    """Inconsistent command-line configuration."""


# ---------------------------------------------------------------------------
# ingestion


def _number(text: str, path: str, line: int, col: int) -> float:
    s = text.strip()
    if not s:
        raise ParseError(path, line, col, "empty cell")
    if not _NUMBER.match(s):
        raise ParseError(path, line, col, f"not a decimal number: {text!r}")
    return float(s)


def read_matrix(path: str | Path) -> tuple[np.ndarray, list[str], list[str]]:
    """Parse a labelled matrix CSV into ``(values, row_labels, column_labels)``."""
    path = str(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, 1, "file is empty")
    header = rows[0]
    width = len(header)
    if width < 2:
        raise ParseError(path, 1, 2, "header needs at least one column label")
    col_labels = [h.strip() for h in header[1:]]
    row_labels, values = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            raise ParseError(path, line, 1, "blank line")
        if len(row) != width:
            raise ParseError(path, line, min(len(row), width) + 1, f"expected {width} fields, found {len(row)}")
        row_labels.append(row[0].strip())
        values.append([_number(cell, path, line, col) for col, cell in enumerate(row[1:], start=2)])
    if not values:
        raise ParseError(path, 2, 1, "no data rows")
    return np.array(values), row_labels, col_labels


def read_vector(path: str | Path, labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """Parse a one-value-per-row file; rows are ``value`` or ``label,value`` with no header.

    Labelled rows are reordered to match ``labels``.
    """
    path = str(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    keyed: dict[str, float] = {}
    plain: list[float] = []
    for line, row in enumerate(rows, start=1):
        if len(row) == 1:
            plain.append(_number(row[0], path, line, 1))
        elif len(row) == 2:
            keyed[row[0].strip()] = _number(row[1], path, line, 2)
        else:
            raise ParseError(path, line, 1, "expected 'value' or 'label,value'")
    if plain and keyed:
        raise ParseError(path, 1, 1, "mixes labelled and unlabelled rows")
    if not keyed:
        return np.array(plain)
    if labels is None or set(keyed) != set(labels):
        raise DimensionMismatch(f"labels in {path} do not match the dataset")
    return np.array([keyed[k] for k in labels])


def ingest(prices_path: str | Path, quantities_path: str | Path) -> Dataset:
    """Read both matrices, check that their labels agree and validate the dataset."""
    p, p_rows, p_cols = read_matrix(prices_path)
    q, q_rows, q_cols = read_matrix(quantities_path)
    if p.shape != q.shape:
        raise DimensionMismatch(f"prices are {p.shape[0]}x{p.shape[1]}, quantities {q.shape[0]}x{q.shape[1]}")
    if p_rows != q_rows or p_cols != q_cols:
        raise DimensionMismatch("price and quantity files carry different labels")
    return validate_dataset(p, q, p_rows, p_cols)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    prices: str
    quantities: str
    out: str
    method: Optional[Method] = None
    beta: Optional[str] = None
    rho: Optional[float] = None
    preference: Optional[str] = None
    share_params: Optional[str] = None
    sigma: Optional[float] = None
    normalization: Normalization = Normalization.FIRST_COUNTRY_ONE
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    probe: Optional[int] = None
    check_only: bool = False
    all_methods: bool = False
    seed: int = 0
    fmt: str = "json"
    notes: list[str] = field(default_factory=list)

    def check(self) -> None:
        for path in (self.prices, self.quantities, self.beta, self.share_params):
            if path is not None and not Path(path).is_file():
                raise InputError(f"no such file: {path}")
        if not self.all_methods and self.method is None:
            raise InputError("give --method or --all-methods")
        if self.probe is not None and self.probe < 2:
            raise InputError("--probe-uniqueness needs at least 2 starts")
        if self.preference is not None and self.preference != "leontief" and self.share_params is None:
            raise InputError(f"--preference {self.preference} needs --share-params")
        if self.preference == "ces" and self.sigma is None:
            raise InputError("--preference ces needs --sigma")
        if self.all_methods:
            return
        m = self.method
        if (self.rho is not None) != (m in RHO_METHODS):
            raise InputError(f"--rho is required for GK_MEAN/GEN_MEAN and only for them (method {m})")
        if (self.beta is not None) != (m in BETA_METHODS):
            raise InputError(f"--beta is required for GGK/GK_MEAN and only for them (method {m})")
        if (self.preference is not None) != (m in PREFERENCE_METHODS):
            raise InputError(f"--preference is required for NEARY/RAO76 and only for them (method {m})")


def _preference(cfg: RunConfig, d: Dataset):
    if cfg.preference is None:
        return None
    from .neary import PreferenceSpec

    share = None if cfg.share_params is None else read_vector(cfg.share_params, d.commodity_labels)
    try:
        return PreferenceSpec(cfg.preference, share, cfg.sigma)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def method_specs(cfg: RunConfig, d: Dataset) -> list[MethodSpec]:
    beta = None if cfg.beta is None else read_vector(cfg.beta, d.country_labels)
    pref = _preference(cfg, d)
    common = dict(normalization=cfg.normalization, tol=cfg.tol, max_iter=cfg.max_iter)
    methods = ALL_METHODS if cfg.all_methods else (cfg.method,)
    specs = []
    for m in methods:
        if m in RHO_METHODS and cfg.rho is None:
            cfg.notes.append(f"{m} skipped: no --rho given")
            continue
        if m in PREFERENCE_METHODS and pref is None:
            cfg.notes.append(f"{m} skipped: no --preference given")
            continue
        try:
            specs.append(MethodSpec(
                m,
                rho=cfg.rho if m in RHO_METHODS else None,
                beta=beta if m in BETA_METHODS else None,
                preference=pref if m in PREFERENCE_METHODS else None,
                **common,
            ))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if cfg.all_methods and beta is None:
        cfg.notes.append("GGK/GK_MEAN use unit beta weights")
    return specs


# ---------------------------------------------------------------------------
# running


def _compatibility(d: Dataset, spec: MethodSpec) -> Optional[dict]:
    if spec.method not in SHARE_METHODS:
        return None
    from .dad import build_dad

    t = build_dad(d, spec)
    rep = compatibility_check(t.A, t.c, t.d).as_dict()
    if rep["violating_sets"] is not None:
        ic, jj = rep["violating_sets"]
        rep["violating_sets"] = [[d.commodity_labels[i] for i in ic], [d.country_labels[j] for j in jj]]
    return rep


def _spec_header(spec: MethodSpec) -> dict:
    return {
        "method": spec.method.name,
        "rho": spec.rho,
        "normalization": spec.normalization.name,
    }


def run_method(d: Dataset, spec: MethodSpec, cfg: RunConfig) -> dict:
    from .dad import uniqueness_probe
    from .solve import solve

    out = _spec_header(spec)
    out["compatibility"] = _compatibility(d, spec)
    try:
        sol = solve(d, spec)
    except NoConvergence as exc:
        out.update(status="no_convergence", iterations=exc.iterations, history=exc.history, message=str(exc))
        return out
    except EigenvalueNotOne as exc:
        diag = exc.diagnostic
        out.update(status="eigenvalue_not_one", lambda_estimate=diag.lambda_estimate,
                   iterations=diag.iterations, p_int=list(diag.p_int))
        return out
    out.update(
        status="ok",
        ppp=list(sol.ppp),
        p_int=list(sol.p_int),
        parity_matrix=[list(r) for r in binary_parities(sol).values],
        residual=sol.residual_norm,
        lambda_estimate=sol.lambda_estimate,
        iterations=sol.iterations,
    )
    if cfg.probe is not None and spec.method is not Method.RAO76:
        try:
            probe = uniqueness_probe(d, spec, k_starts=cfg.probe, seed=cfg.seed)
            out["probe"] = {"k_starts": probe.k_starts, "seed": probe.seed, "spread": probe.spread, "unique": probe.unique}
        except NoConvergence as exc:
            out["probe"] = {"k_starts": cfg.probe, "seed": cfg.seed, "error": str(exc)}
    return out


def _limit_check(d: Dataset, results: list[dict], cfg: RunConfig) -> Optional[dict]:
    from .solve import solve

    rao = next((r for r in results if r["method"] == "RAO" and r["status"] == "ok"), None)
    if rao is None:
        return None
    spec = MethodSpec(Method.GEN_MEAN, rho=LIMIT_RHO, normalization=cfg.normalization, tol=cfg.tol, max_iter=cfg.max_iter)
    near = np.asarray(solve(d, spec).ppp)
    ref = np.asarray(rao["ppp"])
    dev = float(np.max(np.abs(near - ref) / ref))
    return {"check": "RAO equals GEN_MEAN(rho=1e-6)", "max_rel_dev": dev, "tolerance": LIMIT_RTOL, "passed": dev <= LIMIT_RTOL}


def build_report(cfg: RunConfig) -> tuple[dict, int]:
    """Run the configured work; return the report and the exit code."""
    d = ingest(cfg.prices, cfg.quantities)
    specs = method_specs(cfg, d)
    conn = is_connected(d.quantities)
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "seed": cfg.seed,
        "inputs": {
            "prices": cfg.prices,
            "quantities": cfg.quantities,
            "commodity_labels": list(d.commodity_labels),
            "country_labels": list(d.country_labels),
        },
        "connectivity": conn.labelled(d.country_labels, d.commodity_labels),
        "results": [],
        "checks": [],
        "notes": cfg.notes,
    }
    if cfg.check_only or not conn.connected:
        report["results"] = [dict(_spec_header(s), compatibility=_compatibility(d, s), status="not_solved") for s in specs]
        return report, EXIT_OK if conn.connected else EXIT_DISCONNECTED

    results = [run_method(d, s, cfg) for s in specs]
    report["results"] = results
    if cfg.all_methods:
        check = _limit_check(d, results, cfg)
        if check is not None:
            report["checks"].append(check)
    code = EXIT_NO_CONVERGENCE if any(r["status"] == "no_convergence" for r in results) else EXIT_OK
    return report, code


# ---------------------------------------------------------------------------
# output


def _scalar(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(obj: Any, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_scalar(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + f"\n{pad}]"
    return _scalar(obj)


def write_csv(report: dict, path: str) -> None:
    countries = report["inputs"]["country_labels"]
    commodities = report["inputs"]["commodity_labels"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "quantity", "label", "value"])
        w.writerow(["", "connected", "", _scalar(report["connectivity"]["connected"])])
        for k, comp in enumerate(report["connectivity"]["country_components"]):
            w.writerow(["", "country_component", str(k), " ".join(comp)])
        for r in report["results"]:
            name = r["method"] if r["rho"] is None else f"{r['method']}(rho={_scalar(r['rho'])})"
            w.writerow([name, "status", "", r["status"]])
            for lab, v in zip(countries, r.get("ppp", [])):
                w.writerow([name, "ppp", lab, _scalar(v)])
            for lab, v in zip(commodities, r.get("p_int", [])):
                w.writerow([name, "p_int", lab, _scalar(v)])
            for j, row in enumerate(r.get("parity_matrix", [])):
                for k, v in enumerate(row):
                    w.writerow([name, "parity", f"{countries[j]}/{countries[k]}", _scalar(v)])
            for key in ("residual", "lambda_estimate", "iterations"):
                if key in r:
                    w.writerow([name, key, "", _scalar(r[key])])
            if r.get("probe") and "spread" in r["probe"]:
                w.writerow([name, "probe_spread", "", _scalar(r["probe"]["spread"])])
        for c in report["checks"]:
            w.writerow(["", "check", c["check"], _scalar(c["passed"])])


def write_report(report: dict, path: str, fmt: str) -> None:
    if fmt == "json":
        Path(path).write_text(to_json(report) + "\n")
    else:
        write_csv(report, path)


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 2 is reserved for disconnected data
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _method(text: str) -> Method:
    try:
        return Method(text.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method {text!r}") from None


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="multindex", description="Solve multilateral PPP index systems.")
    ap.add_argument("--prices", required=True, metavar="FILE")
    ap.add_argument("--quantities", required=True, metavar="FILE")
    ap.add_argument("--beta", metavar="FILE")
    ap.add_argument("--method", type=_method, metavar="NAME", help=", ".join(m.value for m in Method))
    ap.add_argument("--rho", type=float, metavar="R")
    ap.add_argument("--preference", choices=["leontief", "cobb_douglas", "ces"], metavar="FAMILY")
    ap.add_argument("--share-params", metavar="FILE")
    ap.add_argument("--sigma", type=float, metavar="S")
    ap.add_argument("--normalize", choices=["first", "geomean"], default="first")
    ap.add_argument("--tol", type=float, metavar="T")
    ap.add_argument("--max-iter", type=int, metavar="K")
    ap.add_argument("--probe-uniqueness", type=int, metavar="K")
    ap.add_argument("--check-only", action="store_true")
    ap.add_argument("--all-methods", action="store_true")
    ap.add_argument("--seed", type=int, default=0, metavar="S")
    ap.add_argument("--out", required=True, metavar="FILE")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    return ap


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    a = make_parser().parse_args(argv)
    return RunConfig(
        prices=a.prices, quantities=a.quantities, out=a.out, method=a.method, beta=a.beta, rho=a.rho,
        preference=a.preference, share_params=a.share_params, sigma=a.sigma,
        normalization=Normalization(a.normalize), tol=a.tol, max_iter=a.max_iter, probe=a.probe_uniqueness,
        check_only=a.check_only, all_methods=a.all_methods, seed=a.seed, fmt=a.format,
    )


def run(cfg: RunConfig) -> int:
    try:
        cfg.check()
        report, code = build_report(cfg)
    except (ParseError, ValidationError, InputError) as exc:
        print(f"multindex: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_report(report, cfg.out, cfg.fmt)
    if code == EXIT_DISCONNECTED:
        comps = report["connectivity"]["country_components"]
        print(f"multindex: quantity matrix is disconnected; components {comps}", file=sys.stderr)
    elif code == EXIT_NO_CONVERGENCE:
        print("multindex: at least one method did not converge; see the report", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
