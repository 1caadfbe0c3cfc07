"""Exact convex-polytope geometry in ambient dimensions 1 through 4.

A body is kept in halfspace form: unit outward normals ``u_i`` and offsets
``h_i > 0``, so ``K = {x : <u_i, x> <= h_i}`` always has the origin in its
interior.  From that representation we enumerate vertices, build the facet
complex (facet areas, volume, centroid via the pyramid decomposition over the
origin), evaluate support functions, and compute certified Hausdorff
distances.  Dimensions above four are rejected loudly instead of being
approximated.

All types are immutable after construction and every operation is a pure
function, so values can be shared freely between concurrent workers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree
from scipy.spatial import QhullError

from .errors import (
    DegenerateBody,
    DimensionUnsupported,
    SubspacesNotOrthogonal,
    ToleranceUnreachable,
    UnboundedBody,
)

# Default absolute tolerance for geometric coincidence tests.
GEOM_TOL = 1e-9

# Vertex-on-hyperplane slack; looser than GEOM_TOL because merged vertex
# clusters can drift by the merge radius.
_INCIDENCE_TOL = 1e-8

# Facets with less area than this are treated as empty (redundant halfspace).
_AREA_FLOOR = 1e-12

MAX_DIM = 4


def _as_unit_rows(arr, tol=1e-12):
    a = np.asarray(arr, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array of row vectors")
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms < 1e-12):
        raise ValueError("zero vector cannot be normalized")
    if np.any(np.abs(norms - 1.0) > tol):
        a = a / norms[:, None]
    return a


@dataclass(frozen=True)
class HPolytope:
    """Convex body as unit facet normals plus positive support numbers."""

    dim: int
    normals: np.ndarray
    supports: np.ndarray

    def __post_init__(self):
        normals = _as_unit_rows(self.normals)
        supports = np.asarray(self.supports, dtype=float).ravel()
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if normals.shape[1] != self.dim:
            raise ValueError("normal length does not match dim")
        if normals.shape[0] != supports.shape[0]:
            raise ValueError("normals and supports must have equal length")
        if normals.shape[0] < 2:
            raise ValueError("a bounded body needs at least two halfspaces")
        if np.any(supports <= 0):
            raise ValueError("supports must be positive (origin interior)")
        if _min_pairwise_distance(normals) <= GEOM_TOL:
            raise ValueError("facet normals must be pairwise distinct")
        normals.flags.writeable = False
        supports.flags.writeable = False
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "supports", supports)

    @property
    def n_facets(self):
        return self.normals.shape[0]

    def scale(self, t: float) -> "HPolytope":
        """Dilate about the origin: ``t * K``."""
        if t <= 0:
            raise ValueError("scale factor must be positive")
        return HPolytope(self.dim, self.normals, self.supports * t)

    def translate(self, z) -> "HPolytope":
        """Translate by ``z``; the origin must remain interior."""
        z = np.asarray(z, dtype=float)
        shifted = self.supports + self.normals @ z
        if np.any(shifted <= 0):
            raise ValueError("translation would move the origin outside the body")
        return HPolytope(self.dim, self.normals, shifted)


@dataclass(frozen=True)
class FacetComplex:
    """Vertices and facet incidences of a bounded halfspace intersection.

    ``facets`` pairs each surviving normal index with the ids of its vertices;
    ``facet_areas`` is aligned with ``facets``.  ``dropped`` lists normal
    indices whose halfspace turned out to be redundant.
    """

    vertices: np.ndarray
    facets: tuple
    facet_areas: np.ndarray
    volume: float
    centroid: np.ndarray
    dropped: tuple

    def area_by_normal(self, n_normals: int) -> np.ndarray:
        """Facet area for every original normal index, zero when dropped."""
        out = np.zeros(n_normals)
        for (idx, _), area in zip(self.facets, self.facet_areas):
            out[idx] = area
        return out


@dataclass(frozen=True)
class BodyMetrics:
    inradius_o: float
    circumradius_o: float
    centroid: np.ndarray


def _min_pairwise_distance(points):
    if points.shape[0] < 2:
        return np.inf
    tree = cKDTree(points)
    d, _ = tree.query(points, k=2)
    return float(d[:, 1].min())


def _merge_close_points(points, tol):
    """Average together point clusters of radius ``tol`` (union-find)."""
    k = points.shape[0]
    if k == 0:
        return points
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree = cKDTree(points)
    for i, j in tree.query_pairs(r=tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return np.array([points[idx].mean(axis=0) for idx in groups.values()])


def positively_spans(directions, tol=1e-10) -> bool:
    """True when the directions positively span, i.e. the origin is interior
    to their convex hull."""
    dirs = np.asarray(directions, dtype=float)
    n = dirs.shape[1]
    if n == 1:
        return dirs.max() > tol and dirs.min() < -tol
    if dirs.shape[0] < n + 1 or np.linalg.matrix_rank(dirs, tol=1e-10) < n:
        return False
    try:
        hull = ConvexHull(dirs)
    except QhullError:
        return False
    # hull.equations rows are [a, b] with a.x + b <= 0 inside.
    return bool(np.all(hull.equations[:, -1] < -tol))


def _enumerate_vertices(normals, supports, tol):
    """All vertices of the (bounded) intersection, merged within ``tol``."""
    m, n = normals.shape
    n_combos = math.comb(m, n)
    if n >= 3 and n_combos > 200_000:
        hs = np.hstack([normals, -supports[:, None]])
        try:
            hsi = HalfspaceIntersection(hs, np.zeros(n))
        except QhullError as exc:
            raise DegenerateBody(f"halfspace intersection failed: {exc}") from exc
        candidates = hsi.intersections
    else:
        combos = np.array(list(itertools.combinations(range(m), n)))
        A = normals[combos]
        dets = np.abs(np.linalg.det(A))
        good = dets > 1e-10
        if not np.any(good):
            raise DegenerateBody("no non-degenerate hyperplane intersections")
        X = np.linalg.solve(A[good], supports[combos][good][..., None])[..., 0]
        feas = np.all(normals @ X.T <= supports[:, None] + _INCIDENCE_TOL, axis=0)
        candidates = X[feas]
    if candidates.shape[0] == 0:
        raise DegenerateBody("halfspace intersection has no vertices")
    return _merge_close_points(candidates, tol)


def _facet_measure_and_centroid(points, normal):
    """(n-1)-measure and centroid of a facet given its vertices in R^n."""
    n = points.shape[1]
    if n == 1:
        return 1.0, points[0]
    # Orthonormal basis of the hyperplane normal^perp.
    _, _, vt = np.linalg.svd(normal[None, :])
    basis = vt[1:]
    coords = (points - points.mean(axis=0)) @ basis.T
    if n == 2:
        t = coords[:, 0]
        lo, hi = t.argmin(), t.argmax()
        length = float(t[hi] - t[lo])
        centroid = 0.5 * (points[lo] + points[hi])
        return length, centroid
    if n == 3:
        ang = np.arctan2(coords[:, 1], coords[:, 0])
        order = np.argsort(ang)
        xy = coords[order]
        x, y = xy[:, 0], xy[:, 1]
        xs, ys = np.roll(x, -1), np.roll(y, -1)
        cross = x * ys - xs * y
        area2 = cross.sum()  # twice the signed area
        area = 0.5 * float(abs(area2))
        if area < _AREA_FLOOR:
            return 0.0, points.mean(axis=0)
        # Shoelace centroid in plane coordinates, lifted back to R^n.
        cx = np.sum((x + xs) * cross) / (3.0 * area2)
        cy = np.sum((y + ys) * cross) / (3.0 * area2)
        centroid = points.mean(axis=0) + basis.T @ np.array([cx, cy])
        return area, centroid
    # n == 4: the facet is a 3-polytope in hyperplane coordinates.
    if points.shape[0] < 4:
        return 0.0, points.mean(axis=0)
    try:
        hull = ConvexHull(coords)
    except QhullError:
        return 0.0, points.mean(axis=0)
    ref = coords[hull.vertices].mean(axis=0)
    total = 0.0
    acc = np.zeros(3)
    for simplex in hull.simplices:
        tri = coords[simplex]
        vol = abs(np.linalg.det(tri - ref)) / 6.0
        total += vol
        acc += vol * (tri.sum(axis=0) + ref) / 4.0
    if total < _AREA_FLOOR:
        return 0.0, points.mean(axis=0)
    centroid = points.mean(axis=0) + basis.T @ (acc / total)
    return float(total), centroid


def build_facet_complex(p: HPolytope, tol: float = GEOM_TOL) -> FacetComplex:
    """Enumerate vertices and facets; compute areas, volume and centroid.

    Raises ``UnboundedBody`` when the normals do not positively span,
    ``DimensionUnsupported`` above dimension four, and ``DegenerateBody``
    when the intersection has volume below 1e-12.
    """
    n = p.dim
    if n > MAX_DIM:
        raise DimensionUnsupported(f"exact geometry supports dim <= {MAX_DIM}, got {n}")
    if n == 1:
        return _facet_complex_1d(p)
    if not positively_spans(p.normals):
        raise UnboundedBody("facet normals do not positively span the space")
    vertices = _enumerate_vertices(p.normals, p.supports, tol)
    if vertices.shape[0] < n + 1:
        raise DegenerateBody("fewer than dim + 1 vertices")
    on_facet = np.abs(p.normals @ vertices.T - p.supports[:, None]) <= _INCIDENCE_TOL

    facets = []
    areas = []
    dropped = []
    volume = 0.0
    centroid_acc = np.zeros(n)
    for i in range(p.n_facets):
        ids = np.nonzero(on_facet[i])[0]
        if ids.size < n:
            dropped.append(i)
            continue
        area, fc = _facet_measure_and_centroid(vertices[ids], p.normals[i])
        if area < _AREA_FLOOR:
            dropped.append(i)
            continue
        facets.append((i, tuple(int(j) for j in ids)))
        areas.append(area)
        pyramid_vol = p.supports[i] * area / n
        volume += pyramid_vol
        centroid_acc += pyramid_vol * fc * n / (n + 1)
    if volume < 1e-12:
        raise DegenerateBody(f"volume {volume:.3e} below threshold")
    return FacetComplex(
        vertices=vertices,
        facets=tuple(facets),
        facet_areas=np.array(areas),
        volume=float(volume),
        centroid=centroid_acc / volume,
        dropped=tuple(dropped),
    )


def _facet_complex_1d(p):
    plus = [i for i in range(p.n_facets) if p.normals[i, 0] > 0]
    minus = [i for i in range(p.n_facets) if p.normals[i, 0] < 0]
    if not plus or not minus:
        raise UnboundedBody("a segment needs a +1 and a -1 normal")
    i_plus, i_minus = plus[0], minus[0]
    hi, lo = p.supports[i_plus], -p.supports[i_minus]
    length = hi - lo
    if length < 1e-12:
        raise DegenerateBody("segment has zero length")
    vertices = np.array([[hi], [lo]])
    return FacetComplex(
        vertices=vertices,
        facets=((i_plus, (0,)), (i_minus, (1,))),
        facet_areas=np.array([1.0, 1.0]),
        volume=float(length),
        centroid=np.array([(hi + lo) / 2.0]),
        dropped=(),
    )


def volume(p: HPolytope) -> float:
    """Lebesgue volume via the pyramid decomposition over the origin."""
    return build_facet_complex(p).volume


def reduce_body(p: HPolytope) -> HPolytope:
    """Drop redundant halfspaces so every remaining pair carries a facet."""
    fc = build_facet_complex(p)
    if not fc.dropped:
        return p
    keep = [i for i in range(p.n_facets) if i not in set(fc.dropped)]
    return HPolytope(p.dim, p.normals[keep], p.supports[keep])


def support_eval(p: HPolytope, u) -> float:
    """Support function ``h_K(u) = max_x <u, x>`` over the body."""
    fc = build_facet_complex(p)
    return float(np.max(fc.vertices @ np.asarray(u, dtype=float)))


def support_values(vertices: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Support function of ``conv(vertices)`` at many directions at once."""
    return np.max(dirs @ vertices.T, axis=1)


def radii_and_centroid(p: HPolytope) -> BodyMetrics:
    """Origin-centered inradius (min essential support), circumradius and centroid.

    The inradius is measured about the origin, which agrees with the largest
    inscribed ball for the reflection-invariant bodies this package targets.
    """
    fc = build_facet_complex(p)
    essential = [i for i, _ in fc.facets]
    inr = float(np.min(p.supports[essential]))
    circ = float(np.max(np.linalg.norm(fc.vertices, axis=1)))
    return BodyMetrics(inradius_o=inr, circumradius_o=circ, centroid=fc.centroid)


def contains(outer: HPolytope, inner: HPolytope, tol: float = GEOM_TOL) -> bool:
    """Whether every vertex of ``inner`` satisfies all halfspaces of ``outer``."""
    fc = build_facet_complex(inner)
    return bool(
        np.all(outer.normals @ fc.vertices.T <= outer.supports[:, None] + tol)
    )


def transform_orthogonal(p: HPolytope, q_matrix) -> HPolytope:
    """Image of the body under an orthogonal map."""
    Q = np.asarray(q_matrix, dtype=float)
    return HPolytope(p.dim, p.normals @ Q.T, p.supports)


def linear_image(p: HPolytope, m_matrix) -> HPolytope:
    """Image under an invertible linear map.

    Normals map by the inverse transpose (renormalized) and supports are
    divided by the pre-normalization length.
    """
    M = np.asarray(m_matrix, dtype=float)
    Minv_t = np.linalg.inv(M).T
    raw = p.normals @ Minv_t.T
    lengths = np.linalg.norm(raw, axis=1)
    return HPolytope(p.dim, raw / lengths[:, None], p.supports / lengths)


def direct_sum(a: HPolytope, basis_a, b: HPolytope, basis_b) -> HPolytope:
    """Orthogonal direct sum ``A + B`` of bodies living in complementary
    subspaces, given by orthonormal basis columns embedding each factor."""
    Ba = np.asarray(basis_a, dtype=float)
    Bb = np.asarray(basis_b, dtype=float)
    n = Ba.shape[0]
    if Bb.shape[0] != n:
        raise SubspacesNotOrthogonal("bases live in different ambient spaces")
    if Ba.shape[1] != a.dim or Bb.shape[1] != b.dim:
        raise SubspacesNotOrthogonal("basis width must match factor dimension")
    if a.dim + b.dim != n:
        raise SubspacesNotOrthogonal("factor dimensions must fill the space")
    for B in (Ba, Bb):
        if np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) > 1e-9:
            raise SubspacesNotOrthogonal("basis columns are not orthonormal")
    if np.max(np.abs(Ba.T @ Bb)) > 1e-9:
        raise SubspacesNotOrthogonal("subspaces are not orthogonal")
    normals = np.vstack([a.normals @ Ba.T, b.normals @ Bb.T])
    supports = np.concatenate([a.supports, b.supports])
    return HPolytope(n, normals, supports)


def norm_in_difference_body(x, q: HPolytope) -> float:
    """Gauge of the difference body: ``min{t >= 0 : x in t(Q - Q)}``."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) < 1e-14:
        return 0.0
    n = q.dim
    # Maximize s subject to y in Q and y - s*x in Q; the gauge is 1/s*.
    U, h = q.normals, q.supports
    A_ub = np.vstack(
        [
            np.hstack([U, np.zeros((U.shape[0], 1))]),
            np.hstack([U, -(U @ x)[:, None]]),
        ]
    )
    b_ub = np.concatenate([h, h])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise DegenerateBody(f"gauge LP failed: {res.message}")
    s_star = -res.fun
    return float(1.0 / s_star)


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------


def _active_normal_sets(p, fc, tol=_INCIDENCE_TOL):
    """For each vertex, the facet normals meeting it (columns of a matrix)."""
    act = np.abs(p.normals @ fc.vertices.T - p.supports[:, None]) <= tol
    return [p.normals[np.nonzero(act[:, j])[0]].T for j in range(fc.vertices.shape[0])]


def _cone_projection_candidates(verts_a, verts_b, cones_b):
    """Directions maximizing ``h_A - h_B`` on each normal cone of B.

    On the normal cone of a vertex ``w`` of B the difference equals
    ``max_v <v - w, u>``, whose maximum over the unit vectors of the cone is
    attained at the normalized cone projection of ``v - w``.
    """
    dirs = []
    for w, G in zip(verts_b, cones_b):
        if G.shape[1] == 0:
            continue
        diffs = verts_a - w
        for c in diffs:
            coeff, _ = nnls(G, c)
            proj = G @ coeff
            norm = np.linalg.norm(proj)
            if norm > 1e-12:
                dirs.append(proj / norm)
    return dirs


def _sphere_mesh(n, width):
    """Sample directions covering the sphere to chordal radius <= width."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        count = max(8, int(np.ceil(2 * np.pi / width)))
        ang = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        alpha = width
        rows = max(4, int(np.ceil(np.pi / alpha)))
        pts = []
        for i in range(rows + 1):
            theta = np.pi * i / rows
            r = np.sin(theta)
            cols = max(1, int(np.ceil(2 * np.pi * r / alpha)))
            phi = 2 * np.pi * np.arange(cols) / cols
            pts.append(
                np.column_stack(
                    [np.full(cols, np.cos(theta)), r * np.cos(phi), r * np.sin(phi)]
                )
            )
        return np.vstack(pts)
    # n == 4: nested hyperspherical grid, total angular error <= 3*alpha/2.
    alpha = 2.0 * width / 3.0
    rows = max(4, int(np.ceil(np.pi / alpha)))
    pts = []
    for i in range(rows + 1):
        psi = np.pi * i / rows
        r = np.sin(psi)
        inner = _sphere_mesh(3, max(alpha, 1e-12) / max(r, 1e-12))
        block = np.column_stack([np.full(inner.shape[0], np.cos(psi)), r * inner])
        pts.append(block)
    return np.vstack(pts)


def _mesh_size_needed(n, width):
    if n == 2:
        return int(np.ceil(2 * np.pi / width))
    if n == 3:
        return int(4 * np.pi / width**2) + 1
    alpha = 2.0 * width / 3.0
    return int(4 * np.pi**2 / alpha**3) + 1


def hausdorff_distance(
    p: HPolytope,
    q: HPolytope,
    tol: float = GEOM_TOL,
    method: str = "exact",
    budget: int = 2_000_000,
) -> float:
    """Sup-norm distance of support functions, ``max_u |h_p(u) - h_q(u)|``.

    ``method="exact"`` evaluates the difference at every direction that can
    carry the maximum (facet normals, vertex directions, and normal-cone
    projections of vertex differences), which pins the value down to solver
    precision.  ``method="sampling"`` instead certifies the value by a sphere
    mesh of width ``tol / (2R)`` using the Lipschitz bound
    ``|h(u) - h(v)| <= R ||u - v||`` with ``R`` the larger circumradius, and
    raises ``ToleranceUnreachable`` when that mesh exceeds ``budget``.
    """
    if p.dim != q.dim:
        raise ValueError("bodies must share a dimension")
    fp = build_facet_complex(p)
    fq = build_facet_complex(q)
    if p.dim == 1:
        return float(
            max(
                abs(fp.vertices[:, 0].max() - fq.vertices[:, 0].max()),
                abs(fp.vertices[:, 0].min() - fq.vertices[:, 0].min()),
            )
        )
    radius = max(
        np.linalg.norm(fp.vertices, axis=1).max(),
        np.linalg.norm(fq.vertices, axis=1).max(),
    )
    if method == "exact":
        if tol < 1e-12:
            raise ToleranceUnreachable("cannot certify below 1e-12 in float64")
        cand = [p.normals, q.normals]
        for fc in (fp, fq):
            vnorm = np.linalg.norm(fc.vertices, axis=1)
            keep = vnorm > 1e-12
            cand.append(fc.vertices[keep] / vnorm[keep, None])
        cones_p = _active_normal_sets(p, fp)
        cones_q = _active_normal_sets(q, fq)
        cand.extend(_cone_projection_candidates(fp.vertices, fq.vertices, cones_q))
        cand.extend(_cone_projection_candidates(fq.vertices, fp.vertices, cones_p))
        dirs = np.vstack([np.atleast_2d(c) for c in cand if len(c)])
    elif method == "sampling":
        width = tol / (2.0 * radius)
        if _mesh_size_needed(p.dim, width) > budget:
            raise ToleranceUnreachable(
                f"certifying {tol:g} needs more than {budget} sphere samples"
            )
        dirs = np.vstack([_sphere_mesh(p.dim, width), p.normals, q.normals])
    else:
        raise ValueError(f"unknown method {method!r}")
    diff = support_values(fp.vertices, dirs) - support_values(fq.vertices, dirs)
    return float(np.max(np.abs(diff)))
