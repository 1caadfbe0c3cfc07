"""Discrete logarithmic Minkowski solver.

Given a group-invariant discrete probability measure satisfying the subspace
concentration condition, find the invariant polytope whose cone-volume
measure matches it, normalized to unit volume.  The iteration is a damped
multiplicative fixed point on the support numbers,

    h_i  <-  h_i * (v_i / alpha_i)^damping,

where ``v_i`` is the current normalized cone-volume weight and ``alpha_i``
the target weight, followed by orbit symmetrization and volume
renormalization.  A step is only accepted when the functional
``sum_i alpha_i log h_i`` (evaluated at unit volume) does not increase, which
makes that functional a Lyapunov certificate: the update is a diagonally
scaled descent direction for it within the invariant class, and its unique
minimizer under strict concentration is the solution.  Multiplicative steps
keep every support positive automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .coxeter import direction_orbits, invariant_decomposition, require_invariant
from .errors import (
    ConditionViolated,
    LogMinkError,
    MaxIterExceeded,
    ParameterOutOfRange,
    Stalled,
    UnboundedBody,
    VerificationFailed,
)
from .geometry import HPolytope, build_facet_complex, positively_spans
from .measures import (
    DiscreteSphericalMeasure,
    check_quantitative_concentration,
    check_subspace_concentration,
    cone_volume_measure,
)

# Facet areas below this count as dead; targets cannot be met on dead facets.
_DEAD_FACET = 1e-12

# Per-step bound on |log(v/alpha)| before damping; the full step at damping d
# then moves each support by at most a factor 4^d, so shrinking the damping
# genuinely shrinks the step (dead facets included).
_LOG_STEP_CAP = math.log(4.0)

# Relative objective slack absorbing float noise in the acceptance test.
_OBJ_SLACK = 1e-13

_STALL_WINDOW = 400
_STALL_FACTOR = 0.99


@dataclass(frozen=True)
class SolveOptions:
    """Iteration controls; ``seed`` jitters the start within the invariant class."""

    tol_residual: float = 1e-8
    max_iter: int = 50_000
    damping: float = 0.5
    init: str = "unit_supports"  # or "inball_scaled"
    seed: int = 0

    def __post_init__(self):
        if self.tol_residual <= 0:
            raise ParameterOutOfRange("tol_residual must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ParameterOutOfRange("damping must lie in (0, 1]")
        if self.init not in ("unit_supports", "inball_scaled"):
            raise ParameterOutOfRange(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class SolveReport:
    """Solver output: the body, residuals and the accepted-step trace."""

    body: HPolytope
    residual: float
    iterations: int
    objective_trace: tuple
    invariance_defect: float
    radii_check: tuple | None
    converged: bool
    degenerate: bool = False
    degenerate_subspace: np.ndarray | None = None


@dataclass(frozen=True)
class VerificationRecord:
    passed: bool
    constants: object
    max_weight_error: float
    min_support: float
    max_support: float
    circumradius: float
    scc_verdict: str


def _cone_weights(dirs, supports, n):
    body = HPolytope(n, dirs, supports)
    fc = build_facet_complex(body)
    v = np.zeros(supports.shape[0])
    for (i, _), area in zip(fc.facets, fc.facet_areas):
        v[i] = supports[i] * area / n
    return v, fc.volume, fc


def _objective(alpha, supports):
    return float(np.sum(alpha * np.log(supports)))


def _normalize_volume(dirs, supports, n):
    _, vol, _ = _cone_weights(dirs, supports, n)
    return supports * vol ** (-1.0 / n)


def solve_log_minkowski(
    measure: DiscreteSphericalMeasure,
    group,
    options: SolveOptions = SolveOptions(),
) -> SolveReport:
    """Solve ``V_K = measure`` for a group-invariant probability measure.

    Raises ``ConditionViolated`` when the concentration condition fails (no
    solution exists), ``Stalled`` when the residual plateaus near an equality
    instance, and ``MaxIterExceeded`` at the iteration cap; the latter two
    carry the partial report.
    """
    if abs(measure.total_mass() - 1.0) > 1e-9:
        raise ParameterOutOfRange("measure must be a probability measure")
    require_invariant(measure, group)
    if not positively_spans(measure.dirs):
        raise UnboundedBody("atom directions do not positively span the space")
    scc = check_subspace_concentration(measure, group)
    if scc.verdict == "violated":
        raise ConditionViolated(
            "subspace concentration condition fails; no solution exists",
            witness=scc.witness,
        )
    degenerate = scc.verdict == "equality"
    degenerate_basis = scc.witness.basis if degenerate else None

    n = measure.dim
    dirs = measure.dirs
    alpha = measure.weights
    orbits = direction_orbits(group, dirs)
    counts = np.bincount(orbits)

    def orbit_average(h):
        return (np.bincount(orbits, weights=h) / counts)[orbits]

    h = np.ones(dirs.shape[0])
    if options.init == "inball_scaled":
        # Start from the polytope circumscribing the unit-volume ball.
        h *= math.pi ** (-0.5) * math.gamma(n / 2.0 + 1.0) ** (1.0 / n)
    if options.seed:
        rng = np.random.default_rng(options.seed)
        h *= np.exp(rng.uniform(-0.2, 0.2, size=h.shape))
    h = _normalize_volume(dirs, orbit_average(h), n)

    trust = options.damping
    damping_floor = options.damping / 64.0
    trace = []
    best_residual = np.inf
    best_h = h
    stall_marker = (0, np.inf)

    # One facet-complex build serves residual, volume and objective per
    # candidate: cone weights are degree-n homogeneous, so the weights of the
    # volume-normalized body are v/vol without rebuilding.
    v, vol, _ = _cone_weights(dirs, h, n)
    prev_residual = None
    last_damping = None

    iteration = 0
    while True:
        v = v / vol
        residual = float(np.max(np.abs(v - alpha)))
        if last_damping is not None:
            if residual <= prev_residual:
                trust = min(last_damping * 1.25, 1.0)
            else:
                trust = max(last_damping / 2.0, damping_floor)
        obj = _objective(alpha, h)
        trace.append(obj)
        if residual < best_residual:
            best_residual = residual
            best_h = h
        if residual <= options.tol_residual:
            recomputed, final_vol, _ = _cone_weights(dirs, h, n)
            residual = float(np.max(np.abs(recomputed / final_vol - alpha)))
            return _final_report(
                measure, group, dirs, h, residual, iteration, trace,
                orbits, degenerate, degenerate_basis,
            )
        if iteration >= options.max_iter:
            raise MaxIterExceeded(
                f"no convergence after {iteration} iterations "
                f"(residual {residual:.3e})",
                report=_partial_report(
                    dirs, best_h, best_residual, iteration, trace, n,
                    orbits, degenerate,
                    degenerate_basis
                    if degenerate_basis is not None
                    else _nearest_subspace(scc),
                ),
            )
        # Plateau detection: legitimate near-equality instances push facets
        # toward extinction and stop making progress.
        marker_iter, marker_res = stall_marker
        if iteration - marker_iter >= _STALL_WINDOW:
            if best_residual > marker_res * _STALL_FACTOR:
                raise Stalled(
                    f"residual plateaued at {best_residual:.3e}; "
                    "instance is at or near an equality (direct-sum) case",
                    report=_partial_report(
                        dirs, best_h, best_residual, iteration, trace, n,
                        orbits, degenerate,
                        degenerate_basis
                        if degenerate_basis is not None
                        else _nearest_subspace(scc),
                    ),
                )
            stall_marker = (iteration, best_residual)

        dead = v <= _DEAD_FACET
        log_ratio = np.where(
            dead,
            -_LOG_STEP_CAP,
            np.clip(
                np.log(np.maximum(v, 1e-300) / alpha),
                -_LOG_STEP_CAP,
                _LOG_STEP_CAP,
            ),
        )
        accepted = False
        damping = trust
        slack = _OBJ_SLACK * max(1.0, abs(obj))
        while damping >= damping_floor:
            factor = np.exp(damping * log_ratio)
            raw = orbit_average(h * factor)
            try:
                v_raw, vol_raw, _ = _cone_weights(dirs, raw, n)
            except LogMinkError:
                damping /= 2.0
                continue
            candidate_obj = _objective(alpha, raw) - math.log(vol_raw) / n
            if candidate_obj <= obj + slack:
                h = raw * vol_raw ** (-1.0 / n)
                v, vol = v_raw / vol_raw, 1.0
                accepted = True
                break
            damping /= 2.0
        if not accepted:
            raise Stalled(
                "no damping in the admissible range decreases the objective",
                report=_partial_report(
                    dirs, best_h, best_residual, iteration, trace, n,
                    orbits, degenerate,
                    degenerate_basis
                    if degenerate_basis is not None
                    else _nearest_subspace(scc),
                ),
            )
        # The objective flattens quadratically near the solution, so trust is
        # steered by the residual comparison at the top of the next pass:
        # shrink when the step made it worse, grow gently otherwise.
        prev_residual = residual
        last_damping = damping
        iteration += 1


def _nearest_subspace(scc):
    if not scc.records:
        return None
    rec = min(scc.records, key=lambda r: r.slack)
    return rec.basis


def _invariance_defect_supports(h, orbits):
    spread = 0.0
    for label in np.unique(orbits):
        vals = h[orbits == label]
        spread = max(spread, float(vals.max() - vals.min()))
    return spread


def _final_report(
    measure, group, dirs, h, residual, iteration, trace, orbits,
    degenerate, degenerate_basis,
):
    n = measure.dim
    body = HPolytope(n, dirs, h)
    radii_check = None
    dec = invariant_decomposition(group)
    if dec.n_components == 1:
        fc = build_facet_complex(body)
        circ = float(np.max(np.linalg.norm(fc.vertices, axis=1)))
        r0, big_r0 = 1.0 / math.e, float(n)
        radii_check = (r0, big_r0, bool(r0 < h.min() and circ < big_r0))
    return SolveReport(
        body=body,
        residual=residual,
        iterations=iteration,
        objective_trace=tuple(trace),
        invariance_defect=_invariance_defect_supports(h, orbits),
        radii_check=radii_check,
        converged=True,
        degenerate=degenerate,
        degenerate_subspace=degenerate_basis,
    )


def _partial_report(
    dirs, h, residual, iteration, trace, n, orbits, degenerate, degenerate_basis
):
    return SolveReport(
        body=HPolytope(n, dirs, h),
        residual=residual,
        iterations=iteration,
        objective_trace=tuple(trace),
        invariance_defect=_invariance_defect_supports(h, orbits),
        radii_check=None,
        converged=False,
        degenerate=degenerate,
        degenerate_subspace=degenerate_basis,
    )


def solve_any_mass(measure, group, options: SolveOptions = SolveOptions()):
    """Solve for a finite measure of arbitrary mass ``M``.

    Normalizes to a probability measure, solves, and rescales the body by
    ``M^(1/n)``, matching the homogeneity ``V_{tK} = t^n V_K``.  The reported
    residual is in the original mass units; the objective trace is that of
    the normalized run.
    """
    mass = measure.total_mass()
    normalized = measure.scaled(1.0 / mass)
    report = solve_log_minkowski(normalized, group, options)
    scaled_body = report.body.scale(mass ** (1.0 / measure.dim))
    return replace(report, body=scaled_body, residual=report.residual * mass)


def _match_weights(body_measure, target):
    tree = cKDTree(body_measure.dirs)
    dist, idx = tree.query(target.dirs)
    if np.max(dist) > 1e-8 or len(set(idx.tolist())) != len(idx):
        return None
    return float(np.max(np.abs(body_measure.weights[idx] - target.weights)))


def verify_solution(
    report: SolveReport,
    measure,
    group,
    delta: float,
    tau: float,
    c: float = 1.0,
    tol: float = 1e-8,
) -> VerificationRecord:
    """Recheck a solve end to end; raise ``VerificationFailed`` on any clause.

    Clauses, in order: unit volume, atomwise cone-volume match against the
    measure (also confirming the reported residual), the quantitative
    concentration condition at ``(delta, tau)``, and the support bounds
    ``r0 <= h <= R0`` from the stability constants of the appropriate branch.
    """
    from .constructions import stability_constants

    fc = build_facet_complex(report.body)
    if abs(fc.volume - 1.0) > 1e-9:
        raise VerificationFailed(
            f"body volume {fc.volume!r} is not 1 within 1e-9", clause="volume"
        )
    vk = cone_volume_measure(report.body)
    err = _match_weights(vk, measure)
    if err is None:
        raise VerificationFailed(
            "cone-volume support does not match the measure atoms",
            clause="cone_volume_support",
        )
    if err > report.residual + 1e-12:
        raise VerificationFailed(
            f"recomputed residual {err:.3e} exceeds reported {report.residual:.3e}",
            clause="residual_consistent",
        )
    if err > tol:
        raise VerificationFailed(
            f"atomwise cone-volume error {err:.3e} exceeds {tol:.1e}",
            clause="cone_volume_match",
        )
    qscc = check_quantitative_concentration(measure, group, delta, tau)
    if qscc.verdict == "violated":
        raise VerificationFailed(
            "quantitative concentration condition fails at (delta, tau)",
            clause="quantitative_scc",
        )
    dec = invariant_decomposition(group)
    consts = stability_constants(
        measure.dim, delta=delta, tau=tau, irreducible=dec.n_components == 1, c=c
    )
    h_min = float(report.body.supports.min())
    h_max = float(report.body.supports.max())
    if not (consts.r0 <= h_min and h_max <= consts.R0):
        raise VerificationFailed(
            f"supports [{h_min:.3e}, {h_max:.3e}] escape "
            f"[{consts.r0:.3e}, {consts.R0:.3e}]",
            clause="radii",
        )
    circ = float(np.max(np.linalg.norm(fc.vertices, axis=1)))
    return VerificationRecord(
        passed=True,
        constants=consts,
        max_weight_error=err,
        min_support=h_min,
        max_support=h_max,
        circumradius=circ,
        scc_verdict=qscc.verdict,
    )
