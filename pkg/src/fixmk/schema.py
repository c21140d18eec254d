"""Strict JSON schema for problem files and machine-readable reports.

One schema for everything: vectors are flat arrays, matrices are row-major
arrays of rows, semigroup trees are nested ``{"leaf": [...]}`` /
``{"product": {"normal": ..., "quotient": ...}}`` objects.  Unknown fields
are rejected so typos fail loudly.  Serialization is canonical (sorted
keys, two-space indent, trailing newline): parsing a canonical file and
serializing it back is byte-identical, which keeps fixtures diffable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError
from .extension import ExtensionCheck, ExtensionProblem, ExtensionResult
from .geometry import AffineMap, NormKind, NormSpec, Polytope
from .semigroup import Leaf, Product, SemigroupNode, ValidationReport
from .solver import ConvergenceCertificate, FipReport, FixedPointResult

KIND_FIXED_POINT = "fixed-point"
KIND_STRUCTURE_CHECK = "structure-check"
KIND_FIP_CHECK = "fip-check"
KIND_EXTENSION = "extension"
KINDS = (KIND_FIXED_POINT, KIND_STRUCTURE_CHECK, KIND_FIP_CHECK, KIND_EXTENSION)

MODES = ("exact", "cesaro", "cross-check")
FAMILIES = ("cof", "coh-coq")

_NORM_NAMES = {"max-abs": NormKind.MAX_ABS, "sum-abs": NormKind.SUM_ABS}


@dataclass
class Options:
    tol: float = 1e-8
    n_max: int = 1048576
    word_budget: int = 6
    seed: int = 0
    mode: str = "cross-check"


@dataclass
class SolvePayload:
    node: SemigroupNode
    polytope: Polytope
    start: np.ndarray | None = None


@dataclass
class CheckPayload:
    node: SemigroupNode
    polytope: Polytope


@dataclass
class FipPayload:
    node: SemigroupNode
    polytope: Polytope
    family: str
    sample_count: int


@dataclass
class ExtensionPayload:
    problem: ExtensionProblem


@dataclass
class ProblemFile:
    kind: str
    payload: SolvePayload | CheckPayload | FipPayload | ExtensionPayload
    options: Options = field(default_factory=Options)


# ---------------------------------------------------------------------------
# parsing


def _check_keys(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError(f"{path}: unknown field {key!r}")
    for key in required:
        if key not in obj:
            raise SchemaError(f"{path}: missing field {key!r}")


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number")
    return float(value)


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}: expected an integer")
    return value


def _vector(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{path}: expected a nonempty array of numbers")
    return np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(value)])


def _matrix(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{path}: expected a nonempty array of rows")
    rows = [_vector(row, f"{path}[{i}]") for i, row in enumerate(value)]
    width = rows[0].shape[0]
    if any(r.shape[0] != width for r in rows):
        raise SchemaError(f"{path}: ragged rows")
    return np.array(rows)


def _affine_map(value, path) -> AffineMap:
    _check_keys(value, path, required=("matrix", "offset"))
    return AffineMap(_matrix(value["matrix"], f"{path}.matrix"),
                     _vector(value["offset"], f"{path}.offset"))


def _tree(value, path) -> SemigroupNode:
    if not isinstance(value, dict) or len(value) != 1:
        raise SchemaError(f"{path}: expected exactly one of 'leaf' or 'product'")
    if "leaf" in value:
        gens = value["leaf"]
        if not isinstance(gens, list) or not gens:
            raise SchemaError(f"{path}.leaf: expected a nonempty array of maps")
        return Leaf(tuple(_affine_map(g, f"{path}.leaf[{i}]") for i, g in enumerate(gens)))
    if "product" in value:
        inner = value["product"]
        _check_keys(inner, f"{path}.product", required=("normal", "quotient"))
        return Product(
            _tree(inner["normal"], f"{path}.product.normal"),
            _tree(inner["quotient"], f"{path}.product.quotient"),
        )
    raise SchemaError(f"{path}: expected exactly one of 'leaf' or 'product'")


def _polytope(value, path) -> Polytope:
    _check_keys(value, path, required=("vertices",))
    return Polytope(_matrix(value["vertices"], f"{path}.vertices"))


def _norm(value, path, dim) -> NormSpec:
    if value not in _NORM_NAMES:
        raise SchemaError(f"{path}: expected one of {sorted(_NORM_NAMES)}")
    return NormSpec(_NORM_NAMES[value], dim)


def _options(value, path) -> Options:
    opts = Options()
    if value is None:
        return opts
    _check_keys(value, path, required=(), optional=("tol", "n_max", "word_budget", "seed", "mode"))
    if "tol" in value:
        opts.tol = _number(value["tol"], f"{path}.tol")
    if "n_max" in value:
        opts.n_max = _integer(value["n_max"], f"{path}.n_max")
    if "word_budget" in value:
        opts.word_budget = _integer(value["word_budget"], f"{path}.word_budget")
    if "seed" in value:
        opts.seed = _integer(value["seed"], f"{path}.seed")
    if "mode" in value:
        if value["mode"] not in MODES:
            raise SchemaError(f"{path}.mode: expected one of {MODES}")
        opts.mode = value["mode"]
    return opts


def parse_problem(data) -> ProblemFile:
    _check_keys(data, "$", required=("kind", "payload"), optional=("options",))
    kind = data["kind"]
    if kind not in KINDS:
        raise SchemaError(f"$.kind: expected one of {KINDS}")
    options = _options(data.get("options"), "$.options")
    payload = data["payload"]

    if kind == KIND_FIXED_POINT:
        _check_keys(payload, "$.payload", required=("semigroup", "polytope"), optional=("start",))
        node = _tree(payload["semigroup"], "$.payload.semigroup")
        K = _polytope(payload["polytope"], "$.payload.polytope")
        start = _vector(payload["start"], "$.payload.start") if "start" in payload else None
        parsed = SolvePayload(node, K, start)
    elif kind == KIND_STRUCTURE_CHECK:
        _check_keys(payload, "$.payload", required=("semigroup", "polytope"))
        parsed = CheckPayload(
            _tree(payload["semigroup"], "$.payload.semigroup"),
            _polytope(payload["polytope"], "$.payload.polytope"),
        )
    elif kind == KIND_FIP_CHECK:
        _check_keys(
            payload, "$.payload",
            required=("semigroup", "polytope", "family", "sample_count"),
        )
        family = payload["family"]
        if family not in FAMILIES:
            raise SchemaError(f"$.payload.family: expected one of {FAMILIES}")
        parsed = FipPayload(
            _tree(payload["semigroup"], "$.payload.semigroup"),
            _polytope(payload["polytope"], "$.payload.polytope"),
            family,
            _integer(payload["sample_count"], "$.payload.sample_count"),
        )
    else:
        _check_keys(
            payload, "$.payload",
            required=("dim", "norm", "subspace_basis", "functional_on_subspace", "operators"),
        )
        dim = _integer(payload["dim"], "$.payload.dim")
        problem = ExtensionProblem(
            dim=dim,
            norm=_norm(payload["norm"], "$.payload.norm", dim),
            subspace_basis=_matrix(payload["subspace_basis"], "$.payload.subspace_basis"),
            functional_on_subspace=_vector(
                payload["functional_on_subspace"], "$.payload.functional_on_subspace"
            ),
            operators=_tree(payload["operators"], "$.payload.operators"),
        )
        parsed = ExtensionPayload(problem)
    return ProblemFile(kind, parsed, options)


def load_problem(path) -> ProblemFile:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    try:
        return parse_problem(data)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# serialization


def _vec_out(v) -> list:
    return [float(x) for x in np.asarray(v)]


def _mat_out(m) -> list:
    return [[float(x) for x in row] for row in np.asarray(m)]


def _map_out(m: AffineMap) -> dict:
    return {"matrix": _mat_out(m.matrix), "offset": _vec_out(m.offset)}


def _tree_out(node: SemigroupNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": [_map_out(g) for g in node.generators]}
    return {"product": {"normal": _tree_out(node.normal), "quotient": _tree_out(node.quotient)}}


def _norm_out(norm: NormSpec) -> str:
    return norm.kind.value


def problem_to_dict(pf: ProblemFile) -> dict:
    opts = {
        "tol": pf.options.tol,
        "n_max": pf.options.n_max,
        "word_budget": pf.options.word_budget,
        "seed": pf.options.seed,
        "mode": pf.options.mode,
    }
    p = pf.payload
    if isinstance(p, SolvePayload):
        payload = {"semigroup": _tree_out(p.node), "polytope": {"vertices": _mat_out(p.polytope.vertices)}}
        if p.start is not None:
            payload["start"] = _vec_out(p.start)
    elif isinstance(p, CheckPayload):
        payload = {"semigroup": _tree_out(p.node), "polytope": {"vertices": _mat_out(p.polytope.vertices)}}
    elif isinstance(p, FipPayload):
        payload = {
            "semigroup": _tree_out(p.node),
            "polytope": {"vertices": _mat_out(p.polytope.vertices)},
            "family": p.family,
            "sample_count": p.sample_count,
        }
    else:
        prob = p.problem
        payload = {
            "dim": prob.dim,
            "norm": _norm_out(prob.norm),
            "subspace_basis": _mat_out(prob.subspace_basis),
            "functional_on_subspace": _vec_out(prob.functional_on_subspace),
            "operators": _tree_out(prob.operators),
        }
    return {"kind": pf.kind, "payload": payload, "options": opts}


def dumps_canonical(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def serialize_problem(pf: ProblemFile) -> str:
    return dumps_canonical(problem_to_dict(pf))


# ---------------------------------------------------------------------------
# report payloads


def validation_report_dict(report: ValidationReport) -> dict:
    return {
        "ok": report.ok,
        "depth": report.depth,
        "failures": [
            {"kind": f.kind, "witness": list(f.witness), "residual": f.residual}
            for f in report.failures
        ],
    }


def certificate_dict(cert: ConvergenceCertificate) -> dict:
    return {
        "n_final": cert.n_final,
        "residual_history": [[n, r] for n, r in cert.residual_history],
        "bound_history": [[n, b] for n, b in cert.bound_history],
    }


def fixed_point_dict(result: FixedPointResult) -> dict:
    return {
        "point": _vec_out(result.point),
        "residuals": {k: float(v) for k, v in result.residuals.items()},
        "method": result.method,
        "certificate": certificate_dict(result.certificate) if result.certificate else None,
    }


def fip_dict(report: FipReport) -> dict:
    return {
        "feasible": report.feasible,
        "witness": _vec_out(report.witness) if report.witness is not None else None,
        "family": report.family,
        "sample_count": report.sample_count,
        "seed": report.seed,
    }


def extension_result_dict(result: ExtensionResult) -> dict:
    return {
        "functional": _vec_out(result.functional),
        "dual_norm": result.dual_norm,
        "invariance_residuals": {k: float(v) for k, v in result.invariance_residuals.items()},
        "restriction_residual": result.restriction_residual,
    }


def extension_check_dict(check: ExtensionCheck) -> dict:
    return {
        "ok": check.ok,
        "restriction_residual": check.restriction_residual,
        "dual_norm": check.dual_norm,
        "subspace_norm": check.subspace_norm,
        "invariance_residuals": {k: float(v) for k, v in check.invariance_residuals.items()},
        "failures": list(check.failures),
    }
