"""Sweep harness for the stability experiments.

Each experiment walks a parameter grid, measures distances between measures
and between bodies, and emits analysis-ready rows plus a small summary.
Sweeps are deterministic under a fixed seed and every row carries a hash of
its inputs; the inputs themselves are persisted next to the CSV so any row
can be recomputed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .constructions import (
    chopped_cube,
    diagonal_stretch,
    stability_constants,
    stretched_direct_sum,
    two_point_measure,
    unit_cube,
)
from .coxeter import generate_group, symmetrize_supports
from .errors import ParameterOutOfRange
from .geometry import HPolytope, hausdorff_distance, volume
from .measures import (
    DiscreteSphericalMeasure,
    bounded_lipschitz,
    check_quantitative_concentration,
    cone_volume_measure,
    tube_mass,
    wasserstein,
)
from .serialize import canonical_dumps
from .solver import SolveOptions, solve_log_minkowski

SCHEMA_VERSION = "logmink-sweep-v1"

EXPERIMENTS = ("inverse_stability", "forward_continuity", "phi_s_degeneration", "qt_divergence")


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep parameters; ``grid`` is the swept value list (eps, s or t)."""

    experiment: str
    grid: tuple
    n: int = 2
    delta: float = 0.1
    tau: float = 0.3
    seed: int = 0
    tol: float = 1e-10
    c: float = 1.0
    family: str = "chopped_cube"  # forward continuity: or "support_jitter"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ParameterOutOfRange(f"unknown experiment {self.experiment!r}")
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ParameterOutOfRange("grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterOutOfRange("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if not (0.0 < self.delta < 0.5) or not (0.0 < self.tau < 0.5):
            raise ParameterOutOfRange("delta and tau must lie in (0, 1/2)")


def _hash_inputs(payload) -> str:
    return hashlib.sha256(canonical_dumps(payload).encode()).hexdigest()[:16]


def _octagon_measure(w_e1, w_e2, w_diag):
    ang = np.arange(8) * np.pi / 4
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    weights = np.empty(8)
    weights[[0, 4]] = w_e1
    weights[[2, 6]] = w_e2
    weights[[1, 3, 5, 7]] = w_diag
    return DiscreteSphericalMeasure.from_atoms(2, dirs, weights)


def run_inverse_stability(cfg: ExperimentConfig):
    """Solve pairs of nearby invariant measures and compare body distance
    against the Hoelder bound ``gamma0 * d_W^(1/(95 n))``.

    The perturbation reweights atom masses within the invariant class
    (axis orbits traded against each other, diagonals fixed), so both
    measures stay admissible for the quantitative concentration condition.
    """
    if cfg.n != 2:
        raise ParameterOutOfRange("the inverse sweep is implemented for n = 2")
    group = generate_group(np.eye(2))
    consts = stability_constants(2, cfg.delta, cfg.tau, irreducible=False, c=cfg.c)
    base = _octagon_measure(0.15, 0.15, 0.10)
    if check_quantitative_concentration(base, group, cfg.delta, cfg.tau).verdict == "violated":
        raise ParameterOutOfRange("base measure fails the quantitative condition")
    opts = SolveOptions(tol_residual=cfg.tol, seed=cfg.seed)
    rep1 = solve_log_minkowski(base, group, opts)
    exponent = 1.0 / (95.0 * cfg.n)
    rows = []
    for eps in cfg.grid:
        mu2 = _octagon_measure(0.15 * (1 + eps), 0.15 * (1 - eps), 0.10)
        q2 = check_quantitative_concentration(mu2, group, cfg.delta, cfg.tau)
        if q2.verdict == "violated":
            raise ParameterOutOfRange(f"perturbed measure at eps={eps} inadmissible")
        rep2 = solve_log_minkowski(mu2, group, opts)
        d_w = wasserstein(base, mu2)
        d_inf = hausdorff_distance(rep1.body, rep2.body)
        bound = consts.gamma0 * d_w**exponent if d_w > 0 else 0.0
        h_all = np.concatenate([rep1.body.supports, rep2.body.supports])
        radii_ok = bool(consts.r0 <= h_all.min() and h_all.max() <= consts.R0)
        payload = {"experiment": cfg.experiment, "eps": eps, "config": asdict(cfg)}
        rows.append(
            {
                "schema": SCHEMA_VERSION,
                "input_hash": _hash_inputs(payload),
                "eps": eps,
                "d_w": d_w,
                "d_inf": d_inf,
                "holder_bound": bound,
                "ratio_to_bound": d_inf / bound if bound > 0 else 0.0,
                "residual_1": rep1.residual,
                "residual_2": rep2.residual,
                "r0": consts.r0,
                "R0": consts.R0,
                "radii_ok": radii_ok,
                "_inputs": payload,
            }
        )
    pts = [(math.log(r["d_w"]), math.log(r["d_inf"])) for r in rows if r["d_w"] > 1e-14 and r["d_inf"] > 1e-14]
    slope = float("nan")
    if len(pts) >= 2:
        xs, ys = zip(*pts)
        slope = float(np.polyfit(xs, ys, 1)[0])
    summary = {"slope": slope, "required_slope": exponent, "rows": len(rows)}
    return rows, summary


def run_forward_continuity(cfg: ExperimentConfig):
    """Perturb a unit-volume cube and test ``d_bL(V_K, V_C) <= gamma * sqrt(d_inf)``.

    The default family chops cube corners at volume ``eps``; the alternative
    jitters supports symmetrically.  ``gamma`` is fitted as the largest
    observed ratio.
    """
    if cfg.family == "chopped_cube":
        base = unit_cube(cfg.n)
    elif cfg.family == "support_jitter":
        # Boxes all share one cone-volume measure (the direct-sum family), so
        # the jitter base needs diagonal facets to make the measure move.
        base = chopped_cube(cfg.n, 0.5**cfg.n / math.factorial(cfg.n) / 4.0)
    else:
        raise ParameterOutOfRange(f"unknown family {cfg.family!r}")
    v_base = cone_volume_measure(base)
    rng = np.random.default_rng(cfg.seed)
    group = generate_group(np.eye(cfg.n))
    rows = []
    for eps in cfg.grid:
        if cfg.family == "chopped_cube":
            other = chopped_cube(cfg.n, eps)
        else:
            bump = 1.0 + eps * rng.uniform(0.5, 1.0, size=base.n_facets)
            jittered = HPolytope(cfg.n, base.normals, base.supports * bump)
            other = symmetrize_supports(jittered, group)
            other = other.scale(volume(other) ** (-1.0 / cfg.n))
        d_inf = hausdorff_distance(base, other)
        d_bl = bounded_lipschitz(v_base, cone_volume_measure(other))
        payload = {"experiment": cfg.experiment, "eps": eps, "family": cfg.family, "config": asdict(cfg)}
        rows.append(
            {
                "schema": SCHEMA_VERSION,
                "input_hash": _hash_inputs(payload),
                "eps": eps,
                "d_inf": d_inf,
                "d_bl": d_bl,
                "ratio": d_bl / math.sqrt(d_inf) if d_inf > 0 else 0.0,
                "_inputs": payload,
            }
        )
    ratios = [r["ratio"] for r in rows if r["ratio"] > 0]
    summary = {
        "fitted_gamma": max(ratios) if ratios else 0.0,
        "median_ratio": float(np.median(ratios)) if ratios else 0.0,
        "rows": len(rows),
    }
    return rows, summary


def _rotated_diamond(angle_offset):
    ang = np.deg2rad(np.array([45.0, 135.0, 225.0, 315.0]) + angle_offset)
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    return HPolytope(2, normals, np.full(4, 0.5))


def run_phi_s_degeneration(cfg: ExperimentConfig):
    """Stretch two distinct unit-volume bodies and watch their cone-volume
    measures merge toward the two-point limit while the bodies diverge.

    The bases need zero cone-volume mass on the equator of the stretch axis;
    a diamond and a pre-stretched copy of it qualify, and their sup-distance
    then grows linearly in ``s`` (the copy stays twice as tall) while both
    measures collapse onto the pole pair.
    """
    if cfg.n != 2:
        raise ParameterOutOfRange("the stretch sweep is implemented for n = 2")
    axis = np.array([1.0, 0.0])
    body_k = _rotated_diamond(0.0)
    body_c = diagonal_stretch(body_k, axis, 2.0)
    limit = two_point_measure(axis)
    rows = []
    for s in cfg.grid:
        ks = diagonal_stretch(body_k, axis, s)
        cs = diagonal_stretch(body_c, axis, s)
        vk, vc = cone_volume_measure(ks), cone_volume_measure(cs)
        payload = {"experiment": cfg.experiment, "s": s, "config": asdict(cfg)}
        rows.append(
            {
                "schema": SCHEMA_VERSION,
                "input_hash": _hash_inputs(payload),
                "s": s,
                "d_w_pair": wasserstein(vk, vc),
                "d_w_limit": wasserstein(vk, limit),
                "d_inf_pair": hausdorff_distance(ks, cs),
                "_inputs": payload,
            }
        )
    summary = {
        "final_d_w_limit": rows[-1]["d_w_limit"],
        "final_d_inf_pair": rows[-1]["d_inf_pair"],
        "rows": len(rows),
    }
    return rows, summary


def run_qt_divergence(cfg: ExperimentConfig):
    """Stretched direct sums: cone-volume distance stays exactly zero while
    the body distance grows at least linearly in ``t``.

    The base is the unit square as a sum of two segments, the sharpest
    equality instance: the full axis mass ``dim L / n`` sits on the swept
    subspace.
    """
    if cfg.n != 2:
        raise ParameterOutOfRange("the stretched-sum sweep is implemented for n = 2")
    seg = HPolytope(1, [[1.0], [-1.0]], [0.5, 0.5])
    b1 = np.array([[1.0], [0.0]])
    b2 = np.array([[0.0], [1.0]])
    base = unit_cube(2)
    v_base = cone_volume_measure(base)
    axis_mass = tube_mass(v_base, b1, cfg.delta)
    rows = []
    for t in cfg.grid:
        qt = stretched_direct_sum(seg, b1, seg, b2, t)
        v_qt = cone_volume_measure(qt)
        payload = {"experiment": cfg.experiment, "t": t, "config": asdict(cfg)}
        rows.append(
            {
                "schema": SCHEMA_VERSION,
                "input_hash": _hash_inputs(payload),
                "t": t,
                "d_inf": hausdorff_distance(base, qt),
                "d_w": wasserstein(v_base, v_qt),
                "volume": volume(qt),
                "axis_tube_mass": axis_mass,
                "equality_gap": abs(axis_mass - 0.5),
                "_inputs": payload,
            }
        )
    summary = {"max_d_w": max(r["d_w"] for r in rows), "rows": len(rows)}
    return rows, summary


RUNNERS = {
    "inverse_stability": run_inverse_stability,
    "forward_continuity": run_forward_continuity,
    "phi_s_degeneration": run_phi_s_degeneration,
    "qt_divergence": run_qt_divergence,
}


def run_experiment(cfg: ExperimentConfig):
    return RUNNERS[cfg.experiment](cfg)


def rows_to_csv(rows) -> str:
    """Render rows as deterministic CSV (shortest round-trip decimals)."""
    if not rows:
        return ""
    columns = [k for k in rows[0] if not k.startswith("_")]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def write_rows(rows, path):
    """Write the CSV and, alongside it, the per-row inputs keyed by hash."""
    with open(path, "w") as fh:
        fh.write(rows_to_csv(rows))
    inputs = {row["input_hash"]: row["_inputs"] for row in rows}
    with open(str(path) + ".inputs.json", "w") as fh:
        fh.write(canonical_dumps(inputs))
