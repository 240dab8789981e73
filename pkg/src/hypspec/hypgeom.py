"""Closed-form trigonometry for geodesic triangles and pants on the
hyperbolic plane (curvature -1).

All lengths are hyperbolic, all angles in radians.  The formulas are
written in cancellation-free arrangements so they stay accurate down to
very short sides: half-angle quotients instead of the raw law of
cosines, the hyperbolic analogue of l'Huilier's formula for areas, and
products of sinh terms where cosh differences would cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometryError

#: Relative tolerance for the right-angled hexagon identity residual.
HEXAGON_IDENTITY_TOL = 1e-12


def _acosh1p(t):
    """arccosh(1 + t) for t >= 0, stable as t -> 0."""
    if t < 0:
        if t > -1e-12:
            t = 0.0
        else:
            raise InvalidGeometryError(f"arccosh argument below 1 by {-t:.3e}")
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def _cosh_diff(x, y):
    """cosh(x) - cosh(y) without cancellation: 2 sinh((x+y)/2) sinh((x-y)/2)."""
    return 2.0 * math.sinh(0.5 * (x + y)) * math.sinh(0.5 * (x - y))


@dataclass(frozen=True)
class TriangleSides:
    """Geodesic triangle given by side lengths; ``a`` is opposite vertex 0."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        for name, v in (("a", a), ("b", b), ("c", c)):
            if not (v > 0.0) or not math.isfinite(v):
                raise InvalidGeometryError(f"side {name} must be positive and finite, got {v!r}")
        if a + b <= c or b + c <= a or c + a <= b:
            raise InvalidGeometryError(
                f"sides ({a}, {b}, {c}) violate the strict triangle inequality"
            )

    def as_tuple(self):
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class TriangleAngles:
    """Interior angles of a hyperbolic triangle; sum must be below pi."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if not (v > 0.0) or not math.isfinite(v):
                raise InvalidGeometryError(f"angle {name} must be positive and finite, got {v!r}")
        if self.alpha + self.beta + self.gamma >= math.pi:
            raise InvalidGeometryError(
                f"angle sum {self.alpha + self.beta + self.gamma} is not below pi"
            )

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class CuffLengths:
    """Boundary lengths of a pair of pants."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for name, v in (("l1", self.l1), ("l2", self.l2), ("l3", self.l3)):
            if not (v > 0.0) or not math.isfinite(v):
                raise InvalidGeometryError(f"cuff {name} must be positive and finite, got {v!r}")

    def as_tuple(self):
        return (self.l1, self.l2, self.l3)


def _angle_from_sides(opp, adj1, adj2):
    """Angle opposite ``opp`` via the half-angle quotient.

    sin^2(t/2) = sinh(s-adj1) sinh(s-adj2) / (sinh adj1 sinh adj2), with
    cos^2(t/2) carrying sinh(s) sinh(s-opp); both are subtraction-free.
    """
    s = 0.5 * (opp + adj1 + adj2)
    num = math.sqrt(math.sinh(s - adj1) * math.sinh(s - adj2))
    den = math.sqrt(math.sinh(s) * math.sinh(s - opp))
    return 2.0 * math.atan2(num, den)


def triangle_angles(sides: TriangleSides) -> TriangleAngles:
    """Interior angles of the triangle with the given side lengths."""
    a, b, c = sides.as_tuple()
    return TriangleAngles(
        alpha=_angle_from_sides(a, b, c),
        beta=_angle_from_sides(b, c, a),
        gamma=_angle_from_sides(c, a, b),
    )


def triangle_area(angles: TriangleAngles) -> float:
    """Area as the angle deficit pi - (alpha + beta + gamma)."""
    return math.pi - (angles.alpha + angles.beta + angles.gamma)


def triangle_area_from_sides(a, b, c):
    """Area straight from side lengths.

    Hyperbolic l'Huilier: tan(area/4) is the geometric mean of
    tanh(s/2), tanh((s-a)/2), tanh((s-b)/2), tanh((s-c)/2).  Unlike the
    deficit this loses no digits on small triangles.
    """
    s = 0.5 * (a + b + c)
    t = math.tanh(0.5 * s) * math.tanh(0.5 * (s - a)) * math.tanh(0.5 * (s - b)) * math.tanh(0.5 * (s - c))
    if t < 0.0:
        raise InvalidGeometryError(f"sides ({a}, {b}, {c}) violate the triangle inequality")
    return 4.0 * math.atan(math.sqrt(t))


def side_from_sides_angle(a, b, gamma):
    """Third side from two sides and the included angle.

    Law of cosines rearranged as cosh(c) - 1 = (cosh(a-b) - 1)
    + sinh(a) sinh(b) (1 - cos gamma); both addends are nonnegative.
    """
    t = (math.cosh(a - b) - 1.0) + math.sinh(a) * math.sinh(b) * 2.0 * math.sin(0.5 * gamma) ** 2
    return _acosh1p(t)


def median_length(sides: TriangleSides, vertex: int) -> float:
    """Length of the median from ``vertex`` to the midpoint of the
    opposite side: 2 cosh(m) cosh(opposite/2) = cosh of the two adjacent
    sides summed."""
    if vertex not in (0, 1, 2):
        raise InvalidGeometryError(f"vertex must be 0, 1 or 2, got {vertex!r}")
    a, b, c = sides.as_tuple()
    opp = (a, b, c)[vertex]
    adj1, adj2 = [(b, c), (c, a), (a, b)][vertex]
    half = 0.5 * opp
    # cosh(m) - 1, with each cosh difference expanded as a sinh product
    t = (_cosh_diff(adj1, half) + _cosh_diff(adj2, half)) / (2.0 * math.cosh(half))
    return _acosh1p(t)


def midline_length(sides: TriangleSides, vertex: int) -> float:
    """Geodesic segment joining the midpoints of the two sides adjacent
    to ``vertex`` (the edge that cuts off that corner in a 4-way
    subdivision).  Strictly shorter than half the opposite side."""
    a, b, c = sides.as_tuple()
    adj1, adj2 = [(b, c), (c, a), (a, b)][vertex]
    alpha = _angle_from_sides((a, b, c)[vertex], adj1, adj2)
    return side_from_sides_angle(0.5 * adj1, 0.5 * adj2, alpha)


def pants_seams(cuffs: CuffLengths):
    """Common perpendiculars between the cuff pairs of a pair of pants.

    Returns (s1, s2, s3) where s_k joins the two cuffs other than k:

        cosh(s_k) = (cosh(L_k/2) + cosh(L_i/2) cosh(L_j/2))
                    / (sinh(L_i/2) sinh(L_j/2)).
    """
    l1, l2, l3 = cuffs.as_tuple()

    def seam(lk, li, lj):
        hi, hj = 0.5 * li, 0.5 * lj
        # cosh(s) - 1 = (cosh(lk/2) + cosh(hi - hj)) / (sinh hi sinh hj)
        t = (math.cosh(0.5 * lk) + math.cosh(hi - hj)) / (math.sinh(hi) * math.sinh(hj))
        return _acosh1p(t)

    return seam(l1, l2, l3), seam(l2, l3, l1), seam(l3, l1, l2)


def hexagon_identity_residual(half_cuffs, seams):
    """Max relative residual of the right-angled hexagon relation
    cosh(c) = sinh(a) sinh(b) cosh(c~) - cosh(a) cosh(b) over the three
    cyclic rotations of a hexagon with alternating sides
    (h1, s3, h2, s1, h3, s2)."""
    h1, h2, h3 = half_cuffs
    s1, s2, s3 = seams
    worst = 0.0
    for a, ct, b, c in ((h1, s3, h2, h3), (h2, s1, h3, h1), (h3, s2, h1, h2)):
        lhs = math.cosh(c)
        rhs = math.sinh(a) * math.sinh(b) * math.cosh(ct) - math.cosh(a) * math.cosh(b)
        worst = max(worst, abs(lhs - rhs) / lhs)
    return worst


def right_hexagon_fan(side_lengths):
    """Diagonals (d02, d03, d04) of a right-angled hexagon P0..P5 fanned
    from P0, given the six consecutive side lengths.

    Raises InvalidGeometryError when the sides cannot close up into a
    right-angled hexagon (checked via the P5 right angle, relative
    residual 1e-9).
    """
    s01, s12, s23, s34, s45, s50 = side_lengths
    # right angle at P1
    d02 = _acosh1p(math.cosh(s01) * math.cosh(s12) - 1.0)
    # angle P0-P2-P1 inside the right triangle (P0,P1,P2)
    theta = math.atan2(math.tanh(s01), math.sinh(s12))
    d03 = side_from_sides_angle(d02, s23, 0.5 * math.pi - theta)
    psi = _angle_from_sides(d02, s23, d03)
    d04 = side_from_sides_angle(d03, s34, 0.5 * math.pi - psi)
    closure = abs(math.cosh(d04) - math.cosh(s45) * math.cosh(s50)) / math.cosh(d04)
    if closure > 1e-9:
        raise InvalidGeometryError(
            f"hexagon sides do not close into right angles (residual {closure:.3e})"
        )
    return d02, d03, d04


# ---------------------------------------------------------------------------
# vectorized variants used by mesh refinement and matrix assembly


def tri_angles_arr(a, b, c):
    """Angles opposite sides ``a``, ``b``, ``c`` (array-valued)."""
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    s = 0.5 * (a + b + c)

    def ang(opp, adj1, adj2):
        num = np.sqrt(np.sinh(s - adj1) * np.sinh(s - adj2))
        den = np.sqrt(np.sinh(s) * np.sinh(s - opp))
        return 2.0 * np.arctan2(num, den)

    return ang(a, b, c), ang(b, c, a), ang(c, a, b)


def tri_area_arr(a, b, c):
    """Areas of hyperbolic triangles from side lengths (array-valued)."""
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    s = 0.5 * (a + b + c)
    t = (np.tanh(0.5 * s) * np.tanh(0.5 * (s - a))
         * np.tanh(0.5 * (s - b)) * np.tanh(0.5 * (s - c)))
    if np.any(t < -1e-12):
        raise InvalidGeometryError("side lengths violate the triangle inequality")
    return 4.0 * np.arctan(np.sqrt(np.maximum(t, 0.0)))


def side_from_angle_arr(a, b, gamma):
    """Third side from two sides and the included angle (array-valued)."""
    a, b, gamma = np.asarray(a, float), np.asarray(b, float), np.asarray(gamma, float)
    half = np.sin(0.5 * gamma)
    t = (np.cosh(a - b) - 1.0) + 2.0 * np.sinh(a) * np.sinh(b) * half * half
    return np.log1p(t + np.sqrt(t * (t + 2.0)))


def midline_arr(adj1, adj2, opp):
    """Geodesic joining the midpoints of two sides of a triangle.

    ``adj1`` and ``adj2`` meet at the corner the midline cuts off;
    ``opp`` is the remaining side.  Strictly shorter than ``opp / 2``.
    """
    adj1 = np.asarray(adj1, float)
    adj2 = np.asarray(adj2, float)
    opp = np.asarray(opp, float)
    s = 0.5 * (adj1 + adj2 + opp)
    num = np.sqrt(np.sinh(s - adj1) * np.sinh(s - adj2))
    den = np.sqrt(np.sinh(s) * np.sinh(s - opp))
    gamma = 2.0 * np.arctan2(num, den)
    return side_from_angle_arr(0.5 * adj1, 0.5 * adj2, gamma)
