"""JSON schemas for bodies, measures, groups and solver reports.

All file formats live here and in the CLI; the math modules stay purely
in-memory.  Serialization is canonical (sorted keys, shortest round-trip
decimals), so persisted objects re-parse to values equal within 1e-12 and
reruns produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .coxeter import ReflectionGroup, generate_group
from .errors import SerializationError
from .geometry import HPolytope
from .measures import DiscreteSphericalMeasure
from .solver import SolveReport


def _plain(value):
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def canonical_dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SerializationError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _require(data, field, kind=None):
    if field not in data:
        raise SerializationError(f"missing field {field!r}")
    value = data[field]
    if kind is not None and not isinstance(value, kind):
        raise SerializationError(f"field {field!r} has the wrong type")
    return value


def body_to_dict(p: HPolytope) -> dict:
    return {
        "dim": p.dim,
        "normals": _plain(p.normals),
        "supports": _plain(p.supports),
    }


def body_from_dict(data: dict) -> HPolytope:
    """Accepts ``{dim, normals, supports}`` or ``{vertices}``; the vertex form
    is converted through a convex hull and must contain the origin strictly."""
    if "vertices" in data:
        return _body_from_vertices(np.asarray(data["vertices"], dtype=float))
    dim = _require(data, "dim", int)
    normals = np.asarray(_require(data, "normals", list), dtype=float)
    supports = np.asarray(_require(data, "supports", list), dtype=float)
    try:
        return HPolytope(dim, normals, supports)
    except ValueError as exc:
        raise SerializationError(f"invalid body: {exc}") from exc


def _body_from_vertices(vertices):
    if vertices.ndim != 2:
        raise SerializationError("vertices must be a list of points")
    n = vertices.shape[1]
    try:
        hull = ConvexHull(vertices)
    except QhullError as exc:
        raise SerializationError(f"vertices are degenerate: {exc}") from exc
    # Qhull rows are [normal, offset] with normal.x + offset <= 0 inside.
    eqs = hull.equations
    normals = []
    supports = []
    for row in eqs:
        u, off = row[:-1], -row[-1]
        if off <= 1e-12:
            raise SerializationError("origin must be interior to the vertex hull")
        if any(np.linalg.norm(u - v) <= 1e-9 for v in normals):
            continue
        normals.append(u)
        supports.append(off)
    try:
        return HPolytope(n, np.array(normals), np.array(supports))
    except ValueError as exc:
        raise SerializationError(f"invalid vertex body: {exc}") from exc


def measure_to_dict(m: DiscreteSphericalMeasure) -> dict:
    return {
        "dim": m.dim,
        "atoms": [
            {"u": _plain(u), "w": float(w)} for u, w in zip(m.dirs, m.weights)
        ],
    }


def measure_from_dict(data: dict) -> DiscreteSphericalMeasure:
    dim = _require(data, "dim", int)
    atoms = _require(data, "atoms", list)
    dirs = []
    weights = []
    for i, atom in enumerate(atoms):
        if not isinstance(atom, dict) or "u" not in atom or "w" not in atom:
            raise SerializationError(f"atom {i} must be an object with 'u' and 'w'")
        dirs.append(atom["u"])
        weights.append(atom["w"])
    try:
        return DiscreteSphericalMeasure.from_atoms(dim, np.array(dirs, dtype=float), weights)
    except ValueError as exc:
        raise SerializationError(f"invalid measure: {exc}") from exc


def group_to_dict(g: ReflectionGroup) -> dict:
    return {"dim": g.dim, "generator_normals": _plain(g.generator_normals)}


def group_from_dict(data: dict, order_cap: int = 1024) -> ReflectionGroup:
    _require(data, "dim", int)
    normals = np.asarray(_require(data, "generator_normals", list), dtype=float)
    return generate_group(normals, order_cap=order_cap)


def report_to_dict(report: SolveReport, verification=None) -> dict:
    out = {
        "body": body_to_dict(report.body),
        "residual": report.residual,
        "iterations": report.iterations,
        "objective_trace": list(report.objective_trace),
        "invariance_defect": report.invariance_defect,
        "converged": report.converged,
        "degenerate": report.degenerate,
        "radii_check": _plain(report.radii_check),
    }
    if report.degenerate_subspace is not None:
        out["degenerate_subspace"] = _plain(report.degenerate_subspace)
    if verification is not None:
        out["verification"] = {
            "passed": verification.passed,
            "branch": verification.constants.branch,
            "r0": verification.constants.r0,
            "R0": verification.constants.R0,
            "gamma0": verification.constants.gamma0,
            "max_weight_error": verification.max_weight_error,
            "min_support": verification.min_support,
            "max_support": verification.max_support,
            "circumradius": verification.circumradius,
            "scc_verdict": verification.scc_verdict,
        }
    return out
