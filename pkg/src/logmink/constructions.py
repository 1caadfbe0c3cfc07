"""Explicit bodies, transforms and constants for the stability experiments.

The chopped cube (corner simplices of prescribed volume removed, rescaled
back to unit volume), the volume-preserving diagonal stretch that
concentrates cone-volume mass at a pole pair, the two-point limit measure,
the stretched direct sum whose cone-volume measure is independent of the
stretch, and the closed-form stability constants for the irreducible and
reducible branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutsOverlap, ParameterOutOfRange
from .geometry import (
    HPolytope,
    build_facet_complex,
    direct_sum,
    linear_image,
    reduce_body,
)
from .measures import DiscreteSphericalMeasure


@dataclass(frozen=True)
class StabilityConstants:
    """Support bounds and the stability prefactor for one branch.

    ``c`` is an absolute constant that the underlying theory does not pin
    down; it defaults to 1 and every assertion involving ``gamma0`` should be
    reported as a ratio, never as a hard pass/fail on ``c``.
    """

    branch: str  # "irreducible" | "reducible"
    delta: float | None
    tau: float | None
    R0: float
    r0: float
    gamma0: float
    c: float = 1.0


def stability_constants(
    n: int,
    delta: float | None = None,
    tau: float | None = None,
    irreducible: bool = False,
    c: float = 1.0,
) -> StabilityConstants:
    """Closed-form constants bounding the solution's support numbers.

    Irreducible branch: ``R0 = n``, ``r0 = 1/e``, ``gamma0 = c^n`` with no
    dependence on ``(delta, tau)``.  Reducible branch:
    ``R0 = (n^6/delta)^(1/tau)``,
    ``r0 = (n^(n/2)/5^n) * (delta/n^6)^((n-1)/tau)``,
    ``gamma0 = (c^n/tau) * delta^(-3n/tau) * n^(12n/tau)``.
    """
    if n < 2:
        raise ParameterOutOfRange("dimension must be at least 2")
    if c <= 0:
        raise ParameterOutOfRange("c must be positive")
    if irreducible:
        return StabilityConstants(
            branch="irreducible",
            delta=delta,
            tau=tau,
            R0=float(n),
            r0=1.0 / math.e,
            gamma0=c**n,
            c=c,
        )
    if delta is None or tau is None:
        raise ParameterOutOfRange("reducible branch needs delta and tau")
    if not (0.0 < delta < 0.5) or not (0.0 < tau < 0.5):
        raise ParameterOutOfRange("delta and tau must lie in (0, 1/2)")
    # Evaluated in log space: the exponents 1/tau blow past double range for
    # small tau.  r0 and R0 must stay representable; gamma0 only ever enters
    # ratio reports and may saturate at infinity.
    log_r0 = (n / 2.0) * math.log(n) - n * math.log(5.0) + ((n - 1.0) / tau) * (
        math.log(delta) - 6.0 * math.log(n)
    )
    log_big_r0 = (6.0 * math.log(n) - math.log(delta)) / tau
    if log_r0 < -700.0 or log_big_r0 > 700.0:
        raise ParameterOutOfRange(
            "stability constants overflow double precision for these parameters"
        )
    log_gamma0 = (
        n * math.log(c)
        - math.log(tau)
        + (-3.0 * n / tau) * math.log(delta)
        + (12.0 * n / tau) * math.log(n)
    )
    gamma0 = math.exp(log_gamma0) if log_gamma0 < 700.0 else math.inf
    return StabilityConstants(
        branch="reducible",
        delta=delta,
        tau=tau,
        R0=math.exp(log_big_r0),
        r0=math.exp(log_r0),
        gamma0=gamma0,
        c=c,
    )


def non_splitting_margin(n: int, delta: float, tau: float) -> float:
    """Margin ``eta`` below which an invariant body cannot shrink onto a
    direct sum of its invariant sections:
    ``eta = (delta*tau/4n) * (n^(n/2)/5^n) * (delta/n^6)^(n/tau)``.

    Always below ``tau / (4n)`` since the trailing factor is ``r0/R0 < 1``.
    """
    if n < 2:
        raise ParameterOutOfRange("dimension must be at least 2")
    if not (0.0 < delta < 0.5) or not (0.0 < tau < 0.5):
        raise ParameterOutOfRange("delta and tau must lie in (0, 1/2)")
    return (
        (delta * tau / (4.0 * n))
        * (n ** (n / 2.0) / 5.0**n)
        * (delta / n**6) ** (n / tau)
    )


def unit_cube(n: int) -> HPolytope:
    normals = np.vstack([np.eye(n), -np.eye(n)])
    return HPolytope(n, normals, np.full(2 * n, 0.5))


def chopped_cube(n: int, eps: float) -> HPolytope:
    """Unit cube with a corner simplex of volume ``eps`` removed at every
    vertex (cut planes orthogonal to the vertex diagonals), rescaled back to
    unit volume.  Invariant under the coordinate-reflection group.

    ``eps`` must stay below ``(1/2)^n / n!`` so the cuts are disjoint.
    """
    if eps < 0:
        raise ParameterOutOfRange("eps must be nonnegative")
    if eps == 0.0:
        return unit_cube(n)
    leg = (math.factorial(n) * eps) ** (1.0 / n)
    if leg >= 0.5:
        raise CutsOverlap(
            f"corner cuts of volume {eps:g} overlap; need eps < {(0.5**n) / math.factorial(n):g}"
        )
    signs = np.array(
        [[1 - 2 * ((k >> j) & 1) for j in range(n)] for k in range(2**n)],
        dtype=float,
    )
    corner_normals = signs / math.sqrt(n)
    corner_supports = np.full(2**n, (n / 2.0 - leg) / math.sqrt(n))
    cube = unit_cube(n)
    body = HPolytope(
        n,
        np.vstack([cube.normals, corner_normals]),
        np.concatenate([cube.supports, corner_supports]),
    )
    pre_volume = 1.0 - (2**n) * eps
    return body.scale(pre_volume ** (-1.0 / n))


def diagonal_stretch(p: HPolytope, axis, s: float) -> HPolytope:
    """Volume-preserving diagonal map: ``axis`` shrinks by ``s^-(n-1)`` while
    its orthogonal complement stretches by ``s``.

    The determinant is 1, so volume is preserved exactly; as ``s`` grows the
    cone-volume measure of the image concentrates at the two poles of
    ``axis`` whenever the original measure puts no mass on the equator.
    """
    if s <= 0:
        raise ParameterOutOfRange("s must be positive")
    e = np.asarray(axis, dtype=float)
    e = e / np.linalg.norm(e)
    n = p.dim
    M = s * (np.eye(n) - np.outer(e, e)) + s ** (-(n - 1.0)) * np.outer(e, e)
    return linear_image(p, M)


def two_point_measure(axis) -> DiscreteSphericalMeasure:
    """Probability measure with mass 1/2 at each of the two poles of ``axis``."""
    e = np.asarray(axis, dtype=float)
    e = e / np.linalg.norm(e)
    return DiscreteSphericalMeasure.from_atoms(e.size, np.vstack([e, -e]), [0.5, 0.5])


def stretched_direct_sum(
    part_low: HPolytope,
    basis_low,
    part_high: HPolytope,
    basis_high,
    t: float,
) -> HPolytope:
    """Direct sum with one factor stretched and the other shrunk so that both
    the volume and the cone-volume measure are unchanged.

    With ``rho`` the origin-centered inradius of the low factor within its
    subspace and ``d`` its dimension, the low factor scales by
    ``(t + rho)/rho`` and the high factor by ``(rho/(t + rho))^(d/(n-d))``,
    which leaves every cone-volume atom weight exactly where it was while the
    sup-distance to the unstretched sum grows at least linearly in ``t``.
    """
    if t < 0:
        raise ParameterOutOfRange("t must be nonnegative")
    base = direct_sum(part_low, basis_low, part_high, basis_high)
    base_volume = build_facet_complex(base).volume
    if abs(base_volume - 1.0) > 1e-9:
        raise ParameterOutOfRange(
            f"the unstretched sum must have unit volume, got {base_volume!r}"
        )
    rho = float(np.min(reduce_body(part_low).supports))
    d = part_low.dim
    co_d = part_high.dim
    lam = (t + rho) / rho
    return direct_sum(
        part_low.scale(lam),
        basis_low,
        part_high.scale(lam ** (-d / co_d)),
        basis_high,
    )
