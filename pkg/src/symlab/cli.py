"""Command-line front end.

Every command writes one report (JSON by default, or a flat text rendering)
headed by the seed, budget and tolerances that produced it.  Exit codes:
0 success, 1 input error, 2 a verification failed or the catalog table
disagrees with the expected verdicts.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field, is_dataclass
from importlib import resources
from typing import Any

import numpy as np

from . import __version__, kernels
from .classify import (
    DEFAULT_BUDGET,
    PAIR_TOL,
    Budget,
    ClassificationReport,
    CancelingVerdict,
    EllipticityVerdict,
    MixingVerdict,
    SpectralPair,
    classify_operator,
    essential_nullspace,
    extract_spectral_pair,
    find_witness,
    rank_one_cone_search,
)
from .errors import (
    AnomalyError,
    FieldSpecError,
    InvalidDimensionError,
    NumericalDegeneracyError,
    OperatorSpecError,
    UnsupportedOrderError,
)
from .linearize import check_linearization_properties, linearize
from .operators import CATALOG_NAMES, Operator, catalog
from .tensor_core import DEFAULT_TOL, Subspace

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2
COMMANDS = ("classify", "spectrum", "slice", "linearize", "verify-slicing", "verify-hyperplane", "catalog-table")

# default identity tolerance per command
IDENTITY_TOL = {
    "slice": 1e-8,
    "linearize": 1e-12,
    "verify-slicing": 1e-6,
    "verify-hyperplane": 1e-6,
}


class InputError(Exception):
    """Bad command-line input; reported with exit code 1."""


@dataclass
class RunConfig:
    command: str
    catalog: str | None = None
    params: dict = field(default_factory=dict)
    operator_path: str | None = None
    field_path: str | None = None
    xi: list[float] | None = None
    e: list[float] | None = None
    seed: int = 0
    budget: Budget = DEFAULT_BUDGET
    rank_tol: float = DEFAULT_TOL
    pair_tol: float = PAIR_TOL
    tol: float | None = None
    lines: int = 256
    only: list[str] = field(default_factory=list)
    output: str | None = None
    format: str = "json"

    def tolerances(self) -> dict:
        out = {"rank": self.rank_tol, "pair": self.pair_tol}
        if self.command in IDENTITY_TOL:
            out["identity"] = self.identity_tol
        return out

    @property
    def identity_tol(self) -> float:
        return IDENTITY_TOL.get(self.command, 0.0) if self.tol is None else self.tol


# ---------------------------------------------------------------------------
# serialisation


def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data from numpy arrays, dataclasses and subspaces (non-finite floats become null)."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
        return to_jsonable(obj.tolist())
    if isinstance(obj, Subspace):
        return {"dim": obj.dim, "ambient_dim": obj.ambient_dim, "basis": to_jsonable(obj.basis.T)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if is_dataclass(obj):
        return to_jsonable(dict(obj.__dict__))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list) and all(isinstance(x, (int, float)) or x is None for x in v):
        return "[" + ", ".join("null" if x is None else _fmt(x) for x in v) + "]"
    if v is None:
        return "null"
    return str(v)


def _flatten(prefix: str, v: Any, out: list[str]):
    if isinstance(v, dict):
        for k in sorted(v):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], out)
    elif isinstance(v, list) and v and not all(isinstance(x, (int, float)) or x is None for x in v):
        for i, x in enumerate(v):
            _flatten(f"{prefix}[{i}]", x, out)
    else:
        out.append(f"{prefix}: {_fmt(v)}")


def render_text(report: dict) -> str:
    data = to_jsonable(report)
    lines: list[str] = []
    if data.get("command") == "catalog-table":
        lines.append(_table_text(data["result"]))
        data = {k: v for k, v in data.items() if k != "result"}
    _flatten("", data, lines)
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str):
    """Write through a temporary file in the target directory, then rename over the target."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(prefix=".symlab-", suffix=".tmp", dir=os.path.dirname(target))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# inputs


def read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def resolve_operator(cfg: RunConfig) -> Operator:
    if (cfg.catalog is None) == (cfg.operator_path is None):
        raise InputError("give exactly one of --catalog NAME or --operator FILE")
    if cfg.operator_path is not None:
        return Operator.from_json(read_json(cfg.operator_path))
    if cfg.catalog not in CATALOG_NAMES:
        raise InputError(f"unknown catalog name {cfg.catalog!r}; valid names: {', '.join(CATALOG_NAMES)}")
    return catalog(cfg.catalog, cfg.params)


def resolve_field(cfg: RunConfig):
    from .measure import SyntheticField

    if cfg.field_path is None:
        raise InputError("this command needs --field FILE")
    return SyntheticField.from_json(read_json(cfg.field_path))


def _vector(values, length: int, flag: str) -> np.ndarray:
    if values is None:
        raise InputError(f"this command needs {flag}")
    v = np.asarray(values, dtype=float)
    if v.shape != (length,):
        raise InputError(f"{flag} needs {length} numbers, got {v.size}")
    if not np.any(v):
        raise InputError(f"{flag} must be nonzero")
    return v


def _coordinate_length(op: Operator) -> int:
    from .tensor_core import sym_dim

    return sym_dim(op.n, op.order - 1) * op.dimV


def _header(cfg: RunConfig, op: Operator | None) -> dict:
    inp: dict[str, Any] = {}
    if cfg.catalog is not None:
        inp["catalog"] = cfg.catalog
        inp["params"] = cfg.params
    if cfg.operator_path is not None:
        inp["operator_file"] = os.path.basename(cfg.operator_path)
    if cfg.field_path is not None:
        inp["field_file"] = os.path.basename(cfg.field_path)
    if cfg.xi is not None:
        inp["xi"] = cfg.xi
    if cfg.e is not None:
        inp["e"] = cfg.e
    if op is not None:
        inp["operator"] = op.to_json()
    return {
        "schema_version": SCHEMA_VERSION,
        "symlab_version": __version__,
        "backend": kernels.BACKEND,
        "command": cfg.command,
        "input": inp,
        "seed": cfg.seed,
        "budget": cfg.budget.to_json(),
        "tolerances": cfg.tolerances(),
    }


# ---------------------------------------------------------------------------
# report pieces


def ellipticity_json(v: EllipticityVerdict) -> dict:
    return {
        "status": v.status,
        "constant": v.constant,
        "relative": v.relative,
        "argmin": v.argmin,
        "witness_v": v.witness_v,
        "field": "complex" if v.complex_field else "real",
        "tolerance": v.tolerance,
        "samples": v.samples,
    }


def canceling_json(v: CancelingVerdict) -> dict:
    return {
        "status": v.status,
        "intersection": v.intersection,
        "directions_used": v.directions_used,
        "elliptic_assumed": v.elliptic_assumed,
    }


def mixing_json(v: MixingVerdict) -> dict:
    return {
        "status": v.status,
        "pairs": [p.to_json() for p in v.pairs],
        "nontrivial_pairs": sum(not p.trivial for p in v.pairs),
        "span_dim": v.span_dim,
        "essential_dim": v.essential_dim,
        "dual_intersection_dim": v.dual_intersection_dim,
        "nullspace_sum_dim": v.nullspace_sum_dim,
        "de_morgan_consistent": v.de_morgan_consistent,
        "directions_tried": v.search.directions_tried,
        "restarts_used": v.search.restarts_used,
    }


def classification_json(r: ClassificationReport) -> dict:
    return {
        "elliptic": ellipticity_json(r.elliptic),
        "complex_elliptic": ellipticity_json(r.complex_elliptic),
        "canceling": canceling_json(r.canceling),
        "mixing": mixing_json(r.mixing),
        "essential_range_dim": r.essential_range_dim,
        "consistency": r.consistency(),
    }


# ---------------------------------------------------------------------------
# catalog table


def load_expected_table() -> dict:
    text = resources.files("symlab").joinpath("data/expected_table.json").read_text(encoding="utf-8")
    return json.loads(text)


def _params_label(params: dict) -> str:
    return ", ".join(f"{k}={json.dumps(v, separators=(',', ':'))}" for k, v in sorted(params.items()))


def catalog_table(budget: Budget = DEFAULT_BUDGET, seed: int = 0, rank_tol: float = DEFAULT_TOL,
                  only: list[str] | None = None) -> dict:
    """Classify every catalog row and compare the pinned cells with the expected verdicts."""
    expected = load_expected_table()
    rows = []
    mismatches = 0
    for entry in expected["rows"]:
        if only and entry["name"] not in only:
            continue
        op = catalog(entry["name"], entry["params"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = classify_operator(op, budget, seed, rank_tol)
        observed = {
            "elliptic": rep.elliptic.status,
            "complex_elliptic": rep.complex_elliptic.status,
            "canceling": rep.canceling.status,
            "mixing": rep.mixing.status,
        }
        bad = []
        for col, cell in sorted(entry["cells"].items()):
            if observed[col] != cell["expected"]:
                bad.append({"column": col, "expected": cell["expected"], "observed": observed[col],
                            "claim": cell["claim"]})
        mismatches += len(bad)
        rows.append({
            "name": entry["name"],
            "params": entry["params"],
            "n": op.n,
            "k": op.order,
            "observed": observed,
            "expected": {c: cell["expected"] for c, cell in entry["cells"].items()},
            "elliptic_constant": rep.elliptic.constant,
            "mixing_pairs": sum(not p.trivial for p in rep.mixing.pairs),
            "consistency": rep.consistency(),
            "mismatches": bad,
        })
    return {"rows": rows, "mismatches": mismatches, "matches": mismatches == 0}


_TABLE_COLS = ("elliptic", "complex_elliptic", "canceling", "mixing")


def _table_text(result: dict) -> str:
    head = ["name", "params", "n", "k", "elliptic", "complex-elliptic", "canceling", "mixing", "check"]
    body = []
    for r in result["rows"]:
        cells = []
        for c in _TABLE_COLS:
            obs = r["observed"][c]
            cells.append(obs if c in r["expected"] else f"({obs})")
        body.append([r["name"], _params_label(r["params"]), str(r["n"]), str(r["k"]), *cells,
                     "ok" if not r["mismatches"] else "MISMATCH"])
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in [head, *body]]
    for r in result["rows"]:
        for m in r["mismatches"]:
            lines.append(f"mismatch {r['name']} {_params_label(r['params'])} {m['column']}: "
                         f"expected {m['expected']}, observed {m['observed']} ({m['claim']})")
    lines.append("parenthesised verdicts are not pinned by the expected table")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def _pair_for(op: Operator, xi: np.ndarray, e: np.ndarray, tol: float) -> tuple[SpectralPair | None, float]:
    return find_witness(op, xi, e, tol=tol)


def cmd_classify(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = classify_operator(op, cfg.budget, cfg.seed, cfg.rank_tol)
    out = classification_json(rep)
    out["warnings"] = sorted({str(w.message) for w in caught})
    return out, all(rep.consistency().values())


def cmd_spectrum(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    if cfg.xi is None:
        if cfg.e is not None:
            raise InputError("--e needs --xi")
        search = rank_one_cone_search(op, cfg.budget, cfg.seed, cfg.pair_tol)
        return {
            "pairs": [p.to_json() for p in search.pairs],
            "span_dim": search.span_dim,
            "essential_dim": search.target_dim,
            "complete": search.complete,
            "directions_tried": search.directions_tried,
            "restarts_used": search.restarts_used,
        }, True
    xi = _vector(cfg.xi, op.n, "--xi")
    N = essential_nullspace(op, xi, seed=cfg.seed, tol=cfg.rank_tol)
    pairs = []
    for c in range(N.dim):
        p = extract_spectral_pair(op, N.basis[:, c], xi, cfg.pair_tol, cfg.budget.validation_samples)
        if p is not None:
            pairs.append(p.to_json())
    out: dict[str, Any] = {"hyperplane_nullspace": N, "pairs": pairs}
    ok = True
    if cfg.e is not None:
        e = _vector(cfg.e, _coordinate_length(op), "--e")
        pair, fit = _pair_for(op, xi, e, cfg.pair_tol)
        out["requested_pair"] = {"found": pair is not None, "fit": fit,
                                 "pair": pair.to_json() if pair is not None else None}
        ok = pair is not None
    return out, ok


def cmd_slice(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    from .slicing import build_slice, check_slice_properties

    if op.order != 1:
        raise UnsupportedOrderError("slices are built for first-order operators; linearize first")
    xi = _vector(cfg.xi, op.n, "--xi")
    e = _vector(cfg.e, op.dimV, "--e")
    pair, fit = _pair_for(op, xi, e, cfg.pair_tol)
    if pair is None:
        return {"pair": None, "fit": fit, "reason": "(xi, e) is not a spectral pair"}, False
    sl = build_slice(op, pair)
    rep = check_slice_properties(op, pair, cfg.budget, cfg.seed)
    tol = cfg.identity_tol
    checks = {
        "dimension_audit": rep.dimension_audit,
        "vanishing": rep.vanishing_residual <= tol,
        "invariance": rep.invariance_residual <= tol,
        "restriction": rep.restriction_residual <= tol,
        "containment": rep.containment_failures == 0 and rep.containment_residual <= tol,
    }
    return {"pair": pair.to_json(), "restricted_operator": sl.restricted.to_json(),
            "report": rep.to_json(), "checks": checks}, all(checks.values())


def cmd_linearize(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    lin = linearize(op)
    rep = check_linearization_properties(op, cfg.budget, cfg.seed)
    checks = {
        "pure_power_identity": rep.pure_power_residual <= cfg.identity_tol,
        "elliptic_agree": rep.elliptic_agree,
        "spectrum": rep.spectrum_ok,
    }
    return {"linearized_operator": lin.d_op.to_json(), "split": lin.split,
            "report": rep.to_json(), "checks": checks}, all(checks.values())


def _slicing_pair(cfg: RunConfig, op: Operator) -> tuple[Operator, SpectralPair | None, float]:
    target = op if op.order == 1 else linearize(op).d_op
    xi = _vector(cfg.xi, op.n, "--xi")
    e = _vector(cfg.e, _coordinate_length(op), "--e")
    pair, fit = _pair_for(target, xi, e, cfg.pair_tol)
    return target, pair, fit


def cmd_verify_slicing(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    from .measure import verify_line_slicing

    f = resolve_field(cfg)
    target, pair, fit = _slicing_pair(cfg, op)
    if pair is None:
        return {"pair": None, "fit": fit, "reason": "(xi, e) is not a spectral pair"}, False
    out: dict[str, Any] = {"pair": pair.to_json(), "pair_operator": "linearized" if op.order > 1 else "original"}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rep = verify_line_slicing(op, f, pair, lines=cfg.lines, total_variation=True)
        except FieldSpecError as exc:
            if "total variation" not in str(exc):
                raise
            rep = verify_line_slicing(op, f, pair, lines=cfg.lines, total_variation=False)
            out["total_variation_skipped"] = str(exc)
    out["warnings"] = sorted({str(w.message) for w in caught})
    out["report"] = rep.to_json()
    err = max(rep.max_error(), rep.max_error(tv=True))
    out["max_abs_err"] = err
    return out, err <= cfg.identity_tol


def cmd_verify_hyperplane(cfg: RunConfig, op: Operator) -> tuple[dict, bool]:
    from .measure import verify_hyperplane_slicing

    f = resolve_field(cfg)
    _, pair, fit = _slicing_pair(cfg, op)
    if pair is None:
        return {"pair": None, "fit": fit, "reason": "(xi, e) is not a spectral pair"}, False
    rep = verify_hyperplane_slicing(op, f, pair, stations=cfg.lines)
    err = rep.max_error()
    return {"pair": pair.to_json(), "report": rep.to_json(), "max_abs_err": err}, err <= cfg.identity_tol


HANDLERS = {
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "slice": cmd_slice,
    "linearize": cmd_linearize,
    "verify-slicing": cmd_verify_slicing,
    "verify-hyperplane": cmd_verify_hyperplane,
}


def execute(cfg: RunConfig) -> tuple[dict, int]:
    """Build the report for ``cfg``; raises on input errors."""
    if cfg.command == "catalog-table":
        if cfg.catalog or cfg.operator_path:
            raise InputError("catalog-table takes no operator")
        unknown = sorted(set(cfg.only) - set(CATALOG_NAMES))
        if unknown:
            raise InputError(f"unknown catalog name(s) {', '.join(unknown)}; valid names: {', '.join(CATALOG_NAMES)}")
        result = catalog_table(cfg.budget, cfg.seed, cfg.rank_tol, cfg.only)
        report = _header(cfg, None)
        report["result"] = result
        report["ok"] = result["matches"]
        return report, EXIT_OK if result["matches"] else EXIT_FAILED
    op = resolve_operator(cfg)
    result, ok = HANDLERS[cfg.command](cfg, op)
    report = _header(cfg, op)
    report["result"] = result
    report["ok"] = bool(ok)
    return report, EXIT_OK if ok else EXIT_FAILED


def run(cfg: RunConfig) -> int:
    try:
        report, code = execute(cfg)
    except (InputError, OperatorSpecError, FieldSpecError, InvalidDimensionError, UnsupportedOrderError) as exc:
        print(f"symlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AnomalyError, NumericalDegeneracyError) as exc:
        print(f"symlab: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    text = dumps(report) if cfg.format == "json" else render_text(report)
    if cfg.output:
        try:
            write_atomic(cfg.output, text)
        except OSError as exc:
            print(f"symlab: error: cannot write {cfg.output}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    return code


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="symlab",
        description="Classify constant-coefficient operators and verify slicing identities on synthetic fields.",
    )
    parser.add_argument("--version", action="version", version=f"symlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("operator")
    g.add_argument("--catalog", metavar="NAME", help=f"catalog operator: {', '.join(CATALOG_NAMES)}")
    g.add_argument("--n", type=int, help="number of variables")
    g.add_argument("--N", type=int, help="dimension of the source space (gradient, Dk)")
    g.add_argument("--k", type=int, help="order (Dk, scrDk, Ek)")
    g.add_argument("--R", metavar="JSON", help="matrix for div_form, e.g. '[[1,0],[0,1]]'")
    g.add_argument("--operator", metavar="FILE", help="operator JSON file")

    run_opts = argparse.ArgumentParser(add_help=False)
    r = run_opts.add_argument_group("run")
    r.add_argument("--seed", type=int, default=None, help="random seed (default: $SYMLAB_SEED or 0)")
    r.add_argument("--sphere-samples", type=int, default=None)
    r.add_argument("--refine-iters", type=int, default=DEFAULT_BUDGET.refine_iters)
    r.add_argument("--random-directions", type=int, default=DEFAULT_BUDGET.random_directions)
    r.add_argument("--stable-run", type=int, default=DEFAULT_BUDGET.stable_run)
    r.add_argument("--restarts", type=int, default=DEFAULT_BUDGET.restarts)
    r.add_argument("--rank-tol", type=float, default=DEFAULT_TOL)
    r.add_argument("--pair-tol", type=float, default=PAIR_TOL)
    r.add_argument("--format", choices=("json", "text"), default="json")
    r.add_argument("--output", "-o", metavar="FILE", help="write the report here instead of stdout")

    pair_opts = argparse.ArgumentParser(add_help=False)
    p = pair_opts.add_argument_group("pair")
    p.add_argument("--xi", type=float, nargs="+", help="direction")
    p.add_argument("--e", type=float, nargs="+", help="coordinate (flattened tensor for order >= 2)")

    field_opts = argparse.ArgumentParser(add_help=False)
    f = field_opts.add_argument_group("field")
    f.add_argument("--field", metavar="FILE", help="synthetic field JSON file")
    f.add_argument("--tol", type=float, default=None, help="identity tolerance")

    sub.add_parser("classify", parents=[common, run_opts], help="ellipticity, canceling and mixing verdicts")
    sub.add_parser("spectrum", parents=[common, run_opts, pair_opts],
                   help="spectral pairs (rank-one search, or at a given direction)")
    sp = sub.add_parser("slice", parents=[common, run_opts, pair_opts], help="slice operator and its properties")
    sp.add_argument("--tol", type=float, default=None, help="identity tolerance")
    lp = sub.add_parser("linearize", parents=[common, run_opts], help="first-order linearization checks")
    lp.add_argument("--tol", type=float, default=None, help="identity tolerance")
    vs = sub.add_parser("verify-slicing", parents=[common, run_opts, pair_opts, field_opts],
                        help="line slicing identity on a synthetic field")
    vs.add_argument("--lines", type=int, default=256, help="grid points per hyperplane axis")
    vh = sub.add_parser("verify-hyperplane", parents=[common, run_opts, pair_opts, field_opts],
                        help="hyperplane slicing identity (n=2, first order)")
    vh.add_argument("--stations", type=int, default=256, help="stations along xi")
    ct = sub.add_parser("catalog-table", parents=[run_opts], help="classify the catalog and compare with the expected table")
    ct.add_argument("--only", action="append", default=[], metavar="NAME", help="restrict to these catalog names")
    return parser


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    raw = os.environ.get("SYMLAB_SEED", "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"SYMLAB_SEED must be an integer, got {raw!r}") from exc


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params: dict[str, Any] = {}
    for key in ("n", "N", "k"):
        if getattr(ns, key, None) is not None:
            params[key] = getattr(ns, key)
    if getattr(ns, "R", None) is not None:
        try:
            params["R"] = json.loads(ns.R)
        except json.JSONDecodeError as exc:
            raise InputError(f"--R: malformed JSON at column {exc.colno}: {exc.msg}") from exc
    budget = Budget(
        sphere_samples=ns.sphere_samples,
        refine_iters=ns.refine_iters,
        random_directions=ns.random_directions,
        stable_run=ns.stable_run,
        restarts=ns.restarts,
    )
    lines = getattr(ns, "lines", None) or getattr(ns, "stations", None) or 256
    return RunConfig(
        command=ns.command,
        catalog=getattr(ns, "catalog", None),
        params=params,
        operator_path=getattr(ns, "operator", None),
        field_path=getattr(ns, "field", None),
        xi=getattr(ns, "xi", None),
        e=getattr(ns, "e", None),
        seed=_seed(ns.seed),
        budget=budget,
        rank_tol=ns.rank_tol,
        pair_tol=ns.pair_tol,
        tol=getattr(ns, "tol", None),
        lines=lines,
        only=getattr(ns, "only", []) or [],
        output=ns.output,
        format=ns.format,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except InputError as exc:
        print(f"symlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
