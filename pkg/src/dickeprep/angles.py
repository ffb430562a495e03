"""Rotation-angle policies.

Three ways to pick the rotation angle applied from state |j,m> when aiming
for |j,m_t>:

* geometric_angle: the ring-tangency formula
  theta = arcsin[(m r_{m_t} - m_t r_m) / r_0^2], which tilts the Husimi ring
  of |j,m> until it touches the target ring with a shared tangent.
* approx_angle_mt0: the m_t = 0 simplification theta = arcsin(m/j).
* optimal_angle: deterministic numerical maximization of the overlap
  |d^j_{m_t,m}(theta)|^2 (coarse grid at resolution pi/(8j+16), then
  golden-section refinement to 1e-10 rad).

Angle signs: for m < m_t the same formulas produce negative angles; the
optimizer mirrors through (m_t, m) -> (-m_t, -m), which leaves the overlap
invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Angle,
    AnglePolicy,
    DomainError,
    OutOfRange,
    ring_radius,
    validate_spin,
)
from . import wigner

_CLAMP_TOL = 1e-12
_GOLDEN_TOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AnglePolicyResult:
    """An angle choice together with the overlap probability it achieves."""

    angle: Angle
    overlap_probability: float
    policy: str
    fell_back: bool = False  # optimizer degraded to the geometric angle


def geometric_angle(two_j: int, two_mt: int, two_m: int) -> Angle:
    """Ring-tangency angle arcsin[(m r_{m_t} - m_t r_m) / r_0^2].

    For m_t = 0 this reduces to arcsin(m / sqrt(j(j+1))).  The arcsin
    argument is clamped when within 1e-12 of +-1; beyond that it is a
    DomainError.
    """
    target = validate_spin(two_j, two_mt)
    source = validate_spin(two_j, two_m)
    j = two_j / 2.0
    r0_sq = j * (j + 1.0)
    arg = (source.m * ring_radius(target) - target.m * ring_radius(source)) / r0_sq
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 > _CLAMP_TOL:
            raise DomainError(f"tangency arcsin argument {arg} out of [-1, 1]")
        arg = math.copysign(1.0, arg)
    return Angle(math.asin(arg))


def approx_angle_mt0(two_j: int, two_m: int) -> Angle:
    """The m_t = 0 approximation theta_m = arcsin(m/j)."""
    spec = validate_spin(two_j, two_m)
    if two_j == 0:
        return Angle(0.0)
    return Angle(math.asin(spec.m / spec.j))


def _overlap(two_j: int, two_mt: int, two_m: int, theta: float) -> float:
    """|d^j_{m_t,m}(theta)|^2 via the O(j) row evaluation."""
    row = wigner.row_probabilities(two_j, two_mt, theta)
    return float(row[(two_m + two_j) // 2])


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
    return ((x1, f1) if f1 >= f2 else (x2, f2))


def _coarse_grid(two_j: int) -> np.ndarray:
    """Interior theta grid on (0, pi) at resolution ~pi/(8j+16).

    The overlap oscillates in theta on a scale O(1/j); this grid samples
    roughly eight points per finest oscillation so the global maximum's
    basin is always bracketed.
    """
    points = 4 * two_j + 16
    return np.linspace(0.0, math.pi, points + 2)[1:-1]


def optimal_angle(two_j: int, two_mt: int, two_m: int) -> AnglePolicyResult:
    """Deterministically maximize the overlap |d^j_{m_t,m}(theta)|^2.

    Coarse grid scan over (0, pi), ties broken toward the smaller theta,
    then golden-section refinement to 1e-10 rad.  The geometric angle is
    always a candidate, so the returned overlap is >= the geometric one;
    if refinement somehow degrades below it, the geometric angle is
    returned with fell_back=True.
    """
    validate_spin(two_j, two_mt)
    validate_spin(two_j, two_m)
    if two_m == two_mt:
        raise OutOfRange("optimal_angle requires m != m_t")
    if two_m < two_mt:
        mirrored = optimal_angle(two_j, -two_mt, -two_m)
        return AnglePolicyResult(
            angle=Angle(-mirrored.angle.radians),
            overlap_probability=mirrored.overlap_probability,
            policy=AnglePolicy.NUMERIC_OPTIMAL,
            fell_back=mirrored.fell_back,
        )

    grid = _coarse_grid(two_j)
    row_at = lambda th: _overlap(two_j, two_mt, two_m, th)
    values = np.array([row_at(th) for th in grid])
    best = int(np.argmax(values))  # first (smallest-theta) maximum wins ties
    lo = grid[best - 1] if best > 0 else grid[0] / 2.0
    hi = grid[best + 1] if best + 1 < len(grid) else 0.5 * (grid[-1] + math.pi)
    theta_star, overlap_star = _golden_max(row_at, lo, hi, _GOLDEN_TOL)

    theta_geo = geometric_angle(two_j, two_mt, two_m).radians
    overlap_geo = row_at(theta_geo)
    if overlap_star < overlap_geo:
        return AnglePolicyResult(
            angle=Angle(theta_geo),
            overlap_probability=overlap_geo,
            policy=AnglePolicy.NUMERIC_OPTIMAL,
            fell_back=True,
        )
    return AnglePolicyResult(
        angle=Angle(theta_star),
        overlap_probability=overlap_star,
        policy=AnglePolicy.NUMERIC_OPTIMAL,
    )


def _optimal_above_target(two_j: int, two_mt: int) -> tuple[np.ndarray, np.ndarray]:
    """Optimal (angle, overlap) per source state, filled only for m > m_t.

    One coarse scan is shared across all m: each grid theta yields the whole
    row |d^j_{m_t,.}(theta)|^2 in O(j), after which every m is refined in
    its own one-cell bracket.
    """
    n = two_j + 1
    grid = _coarse_grid(two_j)
    best_val = np.full(n, -1.0)
    best_idx = np.zeros(n, dtype=np.int64)
    for gi, th in enumerate(grid):
        row = wigner.row_probabilities(two_j, two_mt, th)
        better = row > best_val  # strict: the smallest-theta maximum wins ties
        best_val[better] = row[better]
        best_idx[better] = gi

    angles = np.zeros(n)
    overlaps = np.ones(n)
    for i in range((two_mt + two_j) // 2 + 1, n):
        two_m = 2 * i - two_j
        b = int(best_idx[i])
        lo = grid[b - 1] if b > 0 else grid[0] / 2.0
        hi = grid[b + 1] if b + 1 < len(grid) else 0.5 * (grid[-1] + math.pi)
        f = lambda th, _i=i: float(wigner.row_probabilities(two_j, two_mt, th)[_i])
        theta_star, overlap_star = _golden_max(f, lo, hi, _GOLDEN_TOL)
        theta_geo = geometric_angle(two_j, two_mt, two_m).radians
        overlap_geo = f(theta_geo)
        if overlap_star < overlap_geo:
            theta_star, overlap_star = theta_geo, overlap_geo
        angles[i] = theta_star
        overlaps[i] = overlap_star
    return angles, overlaps


def optimal_angles_for_target(two_j: int, two_mt: int) -> tuple[np.ndarray, np.ndarray]:
    """Optimal angles and overlaps for every source m at a fixed target.

    Returns (angles, overlaps) indexed like the amplitude grid; the target
    entry gets angle 0 and overlap 1.  Sources below the target come from
    the mirror symmetry theta*(m_t, m) = -theta*(-m_t, -m), which leaves
    the overlap invariant.
    """
    validate_spin(two_j, two_mt)
    n = two_j + 1
    angles, overlaps = _optimal_above_target(two_j, two_mt)
    if (two_mt + two_j) // 2 > 0:  # any source states below the target?
        neg_angles, neg_overlaps = (
            (angles, overlaps) if two_mt == 0 else _optimal_above_target(two_j, -two_mt)
        )
        for i in range((two_mt + two_j) // 2):
            mirror_i = n - 1 - i  # index of -m
            angles[i] = -neg_angles[mirror_i]
            overlaps[i] = neg_overlaps[mirror_i]
    return angles, overlaps


def policy_angles(two_j: int, two_mt: int, policy: str) -> np.ndarray:
    """Per-source-state rotation angles for a whole chain, indexed by m.

    The target entry is 0 (absorbing, no rotation applied).
    """
    n = two_j + 1
    out = np.zeros(n)
    if policy == AnglePolicy.GEOMETRIC:
        for i in range(n):
            two_m = 2 * i - two_j
            if two_m != two_mt:
                out[i] = geometric_angle(two_j, two_mt, two_m).radians
    elif policy == AnglePolicy.APPROX_MT0:
        if two_mt != 0:
            raise DomainError("approx_mt0 policy requires target_two_mt = 0")
        for i in range(n):
            two_m = 2 * i - two_j
            if two_m != 0:
                out[i] = approx_angle_mt0(two_j, two_m).radians
    elif policy == AnglePolicy.NUMERIC_OPTIMAL:
        out, _ = optimal_angles_for_target(two_j, two_mt)
    else:
        raise OutOfRange(f"unknown angle policy {policy!r}")
    return out
