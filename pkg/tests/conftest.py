import itertools

import hypothesis
import numpy as np
import pytest

from logmink import (
    DiscreteSphericalMeasure,
    HPolytope,
    generate_group,
    symmetrize_measure,
)

hypothesis.settings.register_profile(
    "suite", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("suite")


@pytest.fixture
def coord_group_2():
    return generate_group(np.eye(2))


@pytest.fixture
def coord_group_3():
    return generate_group(np.eye(3))


@pytest.fixture
def dihedral_8():
    return generate_group([[1.0, 0.0], [-np.sin(np.pi / 4), np.cos(np.pi / 4)]])


@pytest.fixture
def unit_square():
    return HPolytope(2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [0.5] * 4)


@pytest.fixture
def unit_cube_3():
    normals = np.vstack([np.eye(3), -np.eye(3)])
    return HPolytope(3, normals, [0.5] * 6)


def octagon_body(support_axis=0.5, support_diag=0.5):
    ang = np.arange(8) * np.pi / 4
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    supports = np.where(np.arange(8) % 2 == 0, support_axis, support_diag)
    return HPolytope(2, normals, supports)


def octagon_measure(w_axis, w_diag):
    """B2-invariant octagon measure; pass weights with 4*(w_axis + w_diag) = 1."""
    ang = np.arange(8) * np.pi / 4
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    weights = np.where(np.arange(8) % 2 == 0, w_axis, w_diag)
    return DiscreteSphericalMeasure.from_atoms(2, dirs, weights)


def rotated_coordinate_group(n, rng):
    """Coordinate-reflection group conjugated by a random rotation."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return generate_group(q.T), q


def random_invariant_measure(group, rng, n_orbits=2):
    """Strictly admissible measure from generic orbits (no mass on any
    proper invariant subspace)."""
    dirs = []
    weights = []
    for _ in range(n_orbits):
        u = rng.standard_normal(group.dim)
        u /= np.linalg.norm(u)
        seed = DiscreteSphericalMeasure.from_atoms(group.dim, [u], [1.0])
        orbit = symmetrize_measure(seed, group)
        dirs.append(orbit.dirs)
        weights.append(orbit.weights * rng.uniform(0.5, 2.0))
    dirs = np.vstack(dirs)
    weights = np.concatenate(weights)
    weights /= weights.sum()
    return DiscreteSphericalMeasure.from_atoms(group.dim, dirs, weights)


def _tree_flow(edges, supply_rows, demand_cols):
    """Unique flow on a spanning tree of the bipartite transport graph, found
    by leaf stripping; returns None when the edge set is not a spanning tree."""
    m, k = len(supply_rows), len(demand_cols)
    nodes = m + k
    if len(edges) != nodes - 1:
        return None
    remaining = list(supply_rows) + [-d for d in demand_cols]
    incident = {v: [] for v in range(nodes)}
    for e, (i, j) in enumerate(edges):
        incident[i].append(e)
        incident[m + j].append(e)
    alive_edges = set(range(len(edges)))
    alive_nodes = set(range(nodes))
    flows = [0.0] * len(edges)
    while alive_edges:
        leaf = next(
            (
                v
                for v in alive_nodes
                if sum(1 for e in incident[v] if e in alive_edges) == 1
            ),
            None,
        )
        if leaf is None:
            return None  # a cycle remains
        e = next(e for e in incident[leaf] if e in alive_edges)
        i, j = edges[e]
        if leaf < m:
            flow = remaining[leaf]
        else:
            flow = -remaining[leaf]
        flows[e] = flow
        remaining[i] -= flow
        remaining[m + j] += flow
        alive_edges.remove(e)
        alive_nodes.remove(leaf)
    if any(abs(r) > 1e-9 for v, r in enumerate(remaining) if v in alive_nodes):
        return None  # disconnected
    return flows


def brute_force_wasserstein(mu, nu):
    """Independent oracle: enumerate every spanning-tree basis of the
    transport polytope, keep the feasible ones, take the cheapest.  The LP
    optimum is attained at a basic solution, so this is exact."""
    a, b = mu.weights, nu.weights
    cost = np.linalg.norm(mu.dirs[:, None, :] - nu.dirs[None, :, :], axis=2)
    m, k = len(a), len(b)
    cells = [(i, j) for i in range(m) for j in range(k)]
    best = np.inf
    for subset in itertools.combinations(cells, m + k - 1):
        flows = _tree_flow(subset, a, b)
        if flows is None or min(flows) < -1e-12:
            continue
        total = sum(f * cost[i, j] for f, (i, j) in zip(flows, subset))
        best = min(best, total)
    return best


def shoelace_area(vertices_2d):
    """Polygon area oracle: order by angle, apply the shoelace formula."""
    pts = np.asarray(vertices_2d, dtype=float)
    center = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    pts = pts[np.argsort(ang)]
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def hull_volume(vertices):
    from scipy.spatial import ConvexHull

    return ConvexHull(np.asarray(vertices, dtype=float)).volume
