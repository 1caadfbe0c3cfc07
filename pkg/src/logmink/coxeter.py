"""Finite reflection groups acting without nonzero fixed points.

Groups are generated explicitly as orthogonal matrices from mirror normals,
with a configurable order cap so that irrational mirror angles fail loudly
instead of looping.  The irreducible invariant-subspace decomposition is
found by averaging random symmetric matrices over the group: the average
commutes with every element, so its eigenspaces are invariant, and repeating
with fresh random matrices splits every reducible block almost surely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    MeasureNotInvariant,
    NormalsDegenerate,
    NumericalRankAmbiguity,
    OrderCapExceeded,
)
from .geometry import HPolytope, _as_unit_rows
from .measures import DiscreteSphericalMeasure

MATRIX_TOL = 1e-10
DEFAULT_ORDER_CAP = 1024

# Eigenvalue gaps below _GAP_SAME merge, above _GAP_SPLIT separate; the band
# in between is ambiguous and reported rather than guessed.
_GAP_SAME = 1e-9
_GAP_SPLIT = 1e-7


@dataclass(frozen=True)
class ReflectionGroup:
    """Finite orthogonal group with its generating mirror normals."""

    dim: int
    generator_normals: np.ndarray
    elements: np.ndarray

    def __post_init__(self):
        self.generator_normals.flags.writeable = False
        self.elements.flags.writeable = False

    @property
    def order(self):
        return self.elements.shape[0]

    def fixed_point_defect(self) -> float:
        """Operator norm of the group average; zero means no fixed directions."""
        avg = self.elements.mean(axis=0)
        return float(np.linalg.norm(avg, 2))


@dataclass(frozen=True)
class InvariantDecomposition:
    """Orthonormal bases of the irreducible invariant subspaces."""

    subspaces: tuple
    dims: tuple

    @property
    def n_components(self):
        return len(self.subspaces)


def reflection_matrix(normal) -> np.ndarray:
    u = np.asarray(normal, dtype=float)
    u = u / np.linalg.norm(u)
    return np.eye(u.size) - 2.0 * np.outer(u, u)


def _contains(elements, candidate):
    if len(elements) == 0:
        return False
    stack = np.asarray(elements)
    return bool(
        np.any(np.max(np.abs(stack - candidate[None]), axis=(1, 2)) < MATRIX_TOL)
    )


def close_under_products(matrices, order_cap=DEFAULT_ORDER_CAP):
    """Breadth-first closure of a matrix set under multiplication."""
    n = matrices[0].shape[0]
    elements = [np.eye(n)]
    frontier = []
    for m in matrices:
        if not _contains(elements, m):
            elements.append(m)
            frontier.append(m)
    gens = list(matrices)
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = g @ m
                if not _contains(elements, prod):
                    if len(elements) >= order_cap:
                        raise OrderCapExceeded(
                            f"group order exceeds cap {order_cap}; "
                            "mirror angles may be incommensurable"
                        )
                    elements.append(prod)
                    nxt.append(prod)
        frontier = nxt
    return np.array(elements)


def generate_group(normals, order_cap: int = DEFAULT_ORDER_CAP) -> ReflectionGroup:
    """Generate the reflection group of the given mirror normals.

    The normals must span the whole space, which forces the group to act
    without nonzero fixed points.
    """
    normals = _as_unit_rows(np.atleast_2d(np.asarray(normals, dtype=float)))
    n = normals.shape[1]
    if np.linalg.matrix_rank(normals, tol=1e-10) < n:
        raise NormalsDegenerate("mirror normals do not span the space")
    gens = [reflection_matrix(u) for u in normals]
    elements = close_under_products(gens, order_cap=order_cap)
    group = ReflectionGroup(dim=n, generator_normals=normals, elements=elements)
    defect = group.fixed_point_defect()
    if defect > 1e-8:
        raise NormalsDegenerate(
            f"group average has operator norm {defect:.2e}; fixed directions remain"
        )
    return group


def _averaged_conjugation(group, sym):
    """(1/|G|) sum of A^T S A over the group; commutes with every element."""
    E = group.elements
    return np.einsum("gji,jk,gkl->il", E, sym, E) / group.order


def _split_block(basis, averaged):
    """Split one invariant block by eigenvalue clusters of the restriction.

    Returns (sub-bases, had_ambiguous_gap).
    """
    restricted = basis.T @ averaged @ basis
    w, v = np.linalg.eigh((restricted + restricted.T) / 2.0)
    gaps = np.diff(w)
    ambiguous = bool(np.any((gaps > _GAP_SAME) & (gaps < _GAP_SPLIT)))
    pieces = []
    start = 0
    for i, gap in enumerate(gaps):
        if gap >= _GAP_SPLIT:
            pieces.append(basis @ v[:, start : i + 1])
            start = i + 1
    pieces.append(basis @ v[:, start:])
    return pieces, ambiguous


def _canonical_basis(block):
    """Deterministic orthonormal basis of a subspace (QR with sign fix)."""
    q, _ = np.linalg.qr(block)
    for j in range(q.shape[1]):
        lead = np.flatnonzero(np.abs(q[:, j]) > 1e-12)
        if lead.size and q[lead[0], j] < 0:
            q[:, j] = -q[:, j]
    return q


def invariant_decomposition(
    group: ReflectionGroup, seed: int = 0, trials: int = 10
) -> InvariantDecomposition:
    """Irreducible invariant subspaces via randomized symmetric averaging.

    Deterministic for a fixed seed.  Raises ``NumericalRankAmbiguity`` when a
    block keeps an eigenvalue gap inside the undecidable band across all
    trials.
    """
    n = group.dim
    rng = np.random.default_rng(seed)
    blocks = [np.eye(n)]
    always_ambiguous = [True]
    for _ in range(trials):
        sym = rng.standard_normal((n, n))
        sym = (sym + sym.T) / 2.0
        averaged = _averaged_conjugation(group, sym)
        new_blocks = []
        new_flags = []
        for basis, flag in zip(blocks, always_ambiguous):
            pieces, ambiguous = _split_block(basis, averaged)
            for piece in pieces:
                new_blocks.append(piece)
                new_flags.append(flag and ambiguous)
        blocks, always_ambiguous = new_blocks, new_flags
    if any(flag for flag, b in zip(always_ambiguous, blocks) if b.shape[1] > 1):
        raise NumericalRankAmbiguity(
            "eigenvalue gaps stayed between 1e-9 and 1e-7 across all trials"
        )
    bases = [_canonical_basis(b) for b in blocks]
    for basis in bases:
        defect = _invariance_defect(group, basis)
        if defect > 1e-8:
            raise NumericalRankAmbiguity(
                f"candidate subspace fails invariance check ({defect:.2e})"
            )
    order = sorted(
        range(len(bases)),
        key=lambda i: (bases[i].shape[1], tuple(np.round(bases[i][:, 0], 9))),
    )
    bases = [bases[i] for i in order]
    return InvariantDecomposition(
        subspaces=tuple(bases), dims=tuple(b.shape[1] for b in bases)
    )


def _invariance_defect(group, basis):
    proj = basis @ basis.T
    imgs = group.elements @ basis
    off = imgs - np.einsum("ij,gjk->gik", proj, imgs)
    return float(np.max(np.abs(off)))


def enumerate_invariant_subspaces(dec: InvariantDecomposition):
    """All proper invariant subspaces: the 2^m - 2 partial direct sums."""
    m = dec.n_components
    out = []
    for mask in range(1, 2**m - 1):
        parts = [dec.subspaces[i] for i in range(m) if mask & (1 << i)]
        out.append(np.hstack(parts))
    out.sort(key=lambda b: (b.shape[1], tuple(np.round(b[:, 0], 9))))
    return out


def symmetrize_measure(
    measure: DiscreteSphericalMeasure, group: ReflectionGroup
) -> DiscreteSphericalMeasure:
    """Average the pushforwards over the group; a projection onto the
    invariant measures, preserving total mass."""
    imgs = np.einsum("gij,mj->gmi", group.elements, measure.dirs)
    dirs = imgs.reshape(-1, group.dim)
    weights = np.tile(measure.weights / group.order, group.order)
    return DiscreteSphericalMeasure.from_atoms(measure.dim, dirs, weights)


def invariance_defect_measure(measure, group) -> float:
    """How far the measure is from its symmetrization (matched atomwise)."""
    sym = symmetrize_measure(measure, group)
    if sym.dirs.shape[0] != measure.dirs.shape[0]:
        return float("inf")
    tree = cKDTree(sym.dirs)
    dist, idx = tree.query(measure.dirs)
    if np.max(dist) > 1e-8 or len(set(idx)) != len(idx):
        return float("inf")
    return float(np.max(np.abs(sym.weights[idx] - measure.weights)))


def require_invariant(measure, group, tol=1e-10):
    defect = invariance_defect_measure(measure, group)
    if defect > tol:
        raise MeasureNotInvariant(
            f"measure differs from its symmetrization by {defect:.2e}"
        )


def direction_orbits(group: ReflectionGroup, dirs: np.ndarray, tol: float = 1e-9):
    """Orbit labels for a direction set closed under the group.

    Returns an integer label per direction; raises ``MeasureNotInvariant``
    when some image leaves the set.
    """
    m = dirs.shape[0]
    tree = cKDTree(dirs)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for A in group.elements:
        imgs = dirs @ A.T
        dist, idx = tree.query(imgs)
        if np.max(dist) > tol:
            raise MeasureNotInvariant("direction set is not closed under the group")
        for i, j in enumerate(idx):
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[rj] = ri
    labels = np.array([find(i) for i in range(m)])
    _, relabeled = np.unique(labels, return_inverse=True)
    return relabeled


def symmetrize_supports(p: HPolytope, group: ReflectionGroup) -> HPolytope:
    """Average supports over each normal orbit; the result is group invariant.

    When the normal set is already closed under the group the directions and
    their order are kept; otherwise the orbit completion is added first.
    """
    try:
        labels = direction_orbits(group, p.normals)
    except MeasureNotInvariant:
        return _symmetrize_supports_completed(p, group)
    sums = np.bincount(labels, weights=p.supports)
    counts = np.bincount(labels)
    return HPolytope(p.dim, p.normals, (sums / counts)[labels])


def _symmetrize_supports_completed(p, group):
    imgs = np.einsum("gij,mj->gmi", group.elements, p.normals).reshape(-1, p.dim)
    contrib = np.tile(p.supports, group.order)
    # Cluster coincident directions, then pool contributions per orbit.
    order = np.lexsort(imgs.T[::-1])
    reps = []
    values = []
    used = np.zeros(imgs.shape[0], dtype=bool)
    tree = cKDTree(imgs)
    for i in order:
        if used[i]:
            continue
        members = tree.query_ball_point(imgs[i], r=1e-9)
        used[members] = True
        reps.append(imgs[members].mean(axis=0))
        values.append(contrib[members].mean())
    reps = _as_unit_rows(np.array(reps))
    values = np.array(values)
    body = HPolytope(p.dim, reps, values)
    labels = direction_orbits(group, body.normals)
    sums = np.bincount(labels, weights=body.supports)
    counts = np.bincount(labels)
    return HPolytope(p.dim, body.normals, (sums / counts)[labels])
