"""Discrete measures on the unit sphere and distances between them.

Cone-volume and surface-area measures of polytopes, tube masses around
invariant subspaces, subspace-concentration checks, and the two measure
distances used throughout: the l1 Wasserstein distance (equal masses,
solved as an exact finite transport LP) and the bounded-Lipschitz distance
(arbitrary masses, solved as an exact potential LP).  The ground metric is
the chordal distance ``||a - b||`` in the ambient space, not the geodesic
one; libraries often default to the latter, so callers should not mix the
two.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .errors import MassMismatch, ParameterOutOfRange
from .geometry import HPolytope, _as_unit_rows, build_facet_complex

ATOM_CAP = 512
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteSphericalMeasure:
    """Finitely many weighted atoms on the unit sphere."""

    dim: int
    dirs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dirs = _as_unit_rows(self.dirs)
        weights = np.asarray(self.weights, dtype=float).ravel()
        if dirs.shape[0] != weights.shape[0]:
            raise ValueError("directions and weights must have equal length")
        if dirs.shape[1] != self.dim:
            raise ValueError("direction length does not match dim")
        if dirs.shape[0] > ATOM_CAP:
            raise ParameterOutOfRange(f"atom count {dirs.shape[0]} exceeds {ATOM_CAP}")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be positive and finite")
        from .geometry import _min_pairwise_distance

        if _min_pairwise_distance(dirs) <= MERGE_TOL:
            raise ValueError("atom directions must be pairwise distinct; merge first")
        dirs.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_atoms(cls, dim, dirs, weights, tol=MERGE_TOL):
        """Build a measure, merging directions that coincide within ``tol``."""
        dirs = _as_unit_rows(np.atleast_2d(np.asarray(dirs, dtype=float)))
        weights = np.asarray(weights, dtype=float).ravel()
        k = dirs.shape[0]
        parent = list(range(k))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        tree = cKDTree(dirs)
        for i, j in tree.query_pairs(r=tol):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
        groups = {}
        for i in range(k):
            groups.setdefault(find(i), []).append(i)
        merged_dirs = []
        merged_w = []
        for idx in groups.values():
            merged_dirs.append(dirs[idx].mean(axis=0))
            merged_w.append(weights[idx].sum())
        merged = _as_unit_rows(np.array(merged_dirs))
        order = np.lexsort(merged.T[::-1])
        return cls(dim, merged[order], np.array(merged_w)[order])

    @property
    def n_atoms(self):
        return self.dirs.shape[0]

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, factor: float) -> "DiscreteSphericalMeasure":
        return DiscreteSphericalMeasure(self.dim, self.dirs, self.weights * factor)


@dataclass(frozen=True)
class SubspaceRecord:
    basis: np.ndarray
    subspace_dim: int
    tube_mass: float
    threshold: float
    slack: float
    radius: float = 0.0
    support_split_ok: bool | None = None


@dataclass(frozen=True)
class SCCReport:
    """Outcome of a subspace concentration check."""

    verdict: str  # "strict" | "equality" | "violated"
    records: tuple = field(default_factory=tuple)
    witness: SubspaceRecord | None = None
    irreducible: bool = False

    def min_slack(self):
        if not self.records:
            return None
        return min(r.slack for r in self.records)


def cone_volume_measure(p: HPolytope) -> DiscreteSphericalMeasure:
    """Cone-volume measure: atom ``h_i * area_i / n`` at each facet normal.

    The total mass equals the volume of the body.
    """
    fc = build_facet_complex(p)
    idx = [i for i, _ in fc.facets]
    weights = p.supports[idx] * fc.facet_areas / p.dim
    return DiscreteSphericalMeasure.from_atoms(p.dim, p.normals[idx], weights)


def surface_area_measure(p: HPolytope) -> DiscreteSphericalMeasure:
    """Surface-area measure: atom ``area_i`` at each facet normal."""
    fc = build_facet_complex(p)
    idx = [i for i, _ in fc.facets]
    return DiscreteSphericalMeasure.from_atoms(p.dim, p.normals[idx], fc.facet_areas)


def tube_mass(measure, basis, radius, atol=1e-9) -> float:
    """Mass within chordal distance ``radius`` of ``L`` intersected with the sphere.

    The chordal distance from a unit vector to the subspace sphere is
    ``sqrt(2 - 2 ||u|L||)``; a zero projection gives ``sqrt(2)``, still within
    the admissible range ``[0, 2]``.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[0] == measure.dim:
        proj_norm = np.linalg.norm(measure.dirs @ basis, axis=1)
    else:
        raise ValueError("basis must be given as columns in the ambient space")
    dist = np.sqrt(np.maximum(2.0 - 2.0 * np.clip(proj_norm, 0.0, 1.0), 0.0))
    return float(measure.weights[dist <= radius + atol].sum())


def subspace_mass(measure, basis, tol=1e-9) -> float:
    """Mass carried by atoms lying on the subspace itself.

    Membership is tested as ``1 - ||u|L|| <= tol``: the chord distance of an
    atom that is exactly on ``L`` already rounds to ``sqrt(2) * 1e-8`` in
    double precision, so a chord-scale cutoff cannot express a 1e-9
    tolerance; the projection defect can.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    proj_norm = np.linalg.norm(measure.dirs @ basis, axis=1)
    return float(measure.weights[proj_norm >= 1.0 - tol].sum())


def _support_split_ok(measure, basis, tol=1e-9):
    """Whether every atom lies on L or on its orthogonal complement."""
    proj_norm = np.linalg.norm(measure.dirs @ basis, axis=1)
    on_l = proj_norm >= 1.0 - tol
    on_perp = proj_norm <= tol
    return bool(np.all(on_l | on_perp))


def check_subspace_concentration(measure, group, tol=1e-9) -> SCCReport:
    """Classify a group-invariant measure against the concentration condition.

    For each proper invariant subspace ``L``, the mass on ``L`` intersected
    with the sphere must not exceed ``dim L / n`` of the total; equality
    additionally requires the support to split between ``L`` and its
    complement.  Verdicts: ``strict`` (solvable, unique), ``equality``
    (solvable, direct-sum degeneracy), ``violated`` (no solution).
    """
    from .coxeter import (
        enumerate_invariant_subspaces,
        invariant_decomposition,
        require_invariant,
    )

    require_invariant(measure, group)
    dec = invariant_decomposition(group)
    if dec.n_components == 1:
        return SCCReport(verdict="strict", irreducible=True)
    total = measure.total_mass()
    n = measure.dim
    records = []
    verdict = "strict"
    witness = None
    for basis in enumerate_invariant_subspaces(dec):
        d = basis.shape[1]
        mass = subspace_mass(measure, basis, tol=tol)
        threshold = (d / n) * total
        slack = threshold - mass
        split_ok = None
        if abs(slack) <= tol:
            split_ok = _support_split_ok(measure, basis)
        rec = SubspaceRecord(
            basis=basis,
            subspace_dim=d,
            tube_mass=mass,
            threshold=threshold,
            slack=slack,
            support_split_ok=split_ok,
        )
        records.append(rec)
        if slack < -tol or (split_ok is False):
            verdict = "violated"
            if witness is None:
                witness = rec
        elif abs(slack) <= tol and verdict != "violated":
            verdict = "equality"
            if witness is None:
                witness = rec
    return SCCReport(verdict=verdict, records=tuple(records), witness=witness)


def check_quantitative_concentration(measure, group, delta, tau, tol=1e-12) -> SCCReport:
    """Check the tube-mass strengthening used by the stability bounds.

    Requires a probability measure and ``delta, tau`` in ``(0, 1/2)``; each
    proper invariant subspace's ``delta``-tube may carry at most
    ``(1 - tau) * dim L / n`` of the mass.  For an irreducible action there
    is nothing to check and the report says so.
    """
    from .coxeter import (
        enumerate_invariant_subspaces,
        invariant_decomposition,
        require_invariant,
    )

    if not (0.0 < delta < 0.5) or not (0.0 < tau < 0.5):
        raise ParameterOutOfRange("delta and tau must lie in (0, 1/2)")
    if abs(measure.total_mass() - 1.0) > 1e-9:
        raise ParameterOutOfRange(
            "quantitative check needs a probability measure; normalize first"
        )
    require_invariant(measure, group)
    dec = invariant_decomposition(group)
    if dec.n_components == 1:
        return SCCReport(verdict="strict", irreducible=True)
    n = measure.dim
    records = []
    verdict = "strict"
    witness = None
    for basis in enumerate_invariant_subspaces(dec):
        d = basis.shape[1]
        mass = tube_mass(measure, basis, delta)
        bound = (1.0 - tau) * d / n
        slack = bound - mass
        rec = SubspaceRecord(
            basis=basis,
            subspace_dim=d,
            tube_mass=mass,
            threshold=bound,
            slack=slack,
            radius=delta,
        )
        records.append(rec)
        if slack < -tol:
            verdict = "violated"
            if witness is None:
                witness = rec
        elif abs(slack) <= tol and verdict == "strict":
            verdict = "equality"
            if witness is None:
                witness = rec
    return SCCReport(verdict=verdict, records=tuple(records), witness=witness)


def wasserstein(mu, nu, mass_tol=1e-9) -> float:
    """l1 Wasserstein distance with chordal ground cost, as an exact LP.

    Raises ``MassMismatch`` when the total masses differ; use
    ``bounded_lipschitz`` for measures of different mass.
    """
    if abs(mu.total_mass() - nu.total_mass()) > mass_tol:
        raise MassMismatch(
            f"masses differ by {abs(mu.total_mass() - nu.total_mass()):.3e}; "
            "use the bounded-Lipschitz distance for unequal masses"
        )
    a, b = mu.weights, nu.weights
    cost = np.linalg.norm(mu.dirs[:, None, :] - nu.dirs[None, :, :], axis=2)
    m, k = cost.shape
    if m == 1 or k == 1:
        return float(np.sum(cost * np.outer(a, b)) / mu.total_mass())
    # Transport LP: row sums a, column sums b (last column dropped: redundant).
    rows_i = np.repeat(np.arange(m), k)
    cols_j = np.tile(np.arange(k), m)
    var = np.arange(m * k)
    A_eq = sparse.coo_matrix(
        (
            np.ones(2 * m * k - m),
            (
                np.concatenate([rows_i, m + cols_j[cols_j < k - 1]]),
                np.concatenate([var, var[cols_j < k - 1]]),
            ),
        ),
        shape=(m + k - 1, m * k),
    ).tocsr()
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise MassMismatch(f"transport LP failed: {res.message}")
    return float(res.fun)


def bounded_lipschitz(mu, nu) -> float:
    """Bounded-Lipschitz distance: sup over 1-Lipschitz potentials capped at 1.

    Solved exactly as a finite LP over atom potentials; any feasible atom
    assignment extends to the whole sphere by a clipped Lipschitz extension,
    so the finite optimum equals the true distance.
    """
    dirs = np.vstack([mu.dirs, nu.dirs])
    signed = np.concatenate([mu.weights, -nu.weights])
    # Merge coincident directions, combining signed weights.
    tree = cKDTree(dirs)
    k = dirs.shape[0]
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in tree.query_pairs(r=MERGE_TOL):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    pts = np.array([dirs[idx].mean(axis=0) for idx in groups.values()])
    w = np.array([signed[idx].sum() for idx in groups.values()])
    m = pts.shape[0]
    if m == 1:
        return float(abs(w[0]))
    ii, jj = np.triu_indices(m, k=1)
    d = np.linalg.norm(pts[ii] - pts[jj], axis=1)
    n_pairs = ii.size
    rows = np.concatenate([np.arange(n_pairs), np.arange(n_pairs)])
    cols = np.concatenate([ii, jj])
    vals = np.concatenate([np.ones(n_pairs), -np.ones(n_pairs)])
    A1 = sparse.coo_matrix((vals, (rows, cols)), shape=(n_pairs, m))
    A_ub = sparse.vstack([A1, -A1]).tocsr()
    b_ub = np.concatenate([d, d])
    res = linprog(
        -w, A_ub=A_ub, b_ub=b_ub, bounds=(-1.0, 1.0), method="highs"
    )
    if not res.success:
        raise ParameterOutOfRange(f"bounded-Lipschitz LP failed: {res.message}")
    return float(-res.fun)
