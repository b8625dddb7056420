"""Planar geometry for a bounded square world with compass headings.

Conventions shared by the whole simulator:

* positions are continuous 2D points measured in world units;
* headings are compass bearings in degrees, normalized into [0, 360):
  0 points along +y ("north") and angles grow clockwise, so 90 points
  along +x;
* the world is the square [-half_extent, +half_extent]^2 with the patrol
  target at the origin, and moves are clamped at the boundary (no
  wraparound -- a torus would make angular gaps around the target
  ambiguous).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Heading = float  # compass degrees in [0, 360)


@dataclass(frozen=True)
class Vec2:
    """A point or displacement in world units."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates: ({self.x}, {self.y})")


@dataclass(frozen=True)
class WorldConfig:
    """Square world bounds around the target; out-of-bounds moves are clamped."""

    half_extent: float = 50.0
    target: Vec2 = Vec2(0.0, 0.0)
    boundary_policy: str = "clamp"


def normalize_heading(degrees: float) -> Heading:
    """Map any angle in degrees into [0, 360)."""
    r = math.fmod(degrees, 360.0)
    return r + 360.0 if r < 0.0 else r


def distance(a: Vec2, b: Vec2) -> float:
    return math.hypot(b.x - a.x, b.y - a.y)


def heading_towards(a: Vec2, b: Vec2) -> Heading:
    """Compass bearing from `a` to `b`; raises for coincident points."""
    if a.x == b.x and a.y == b.y:
        raise ValueError("undefined heading: coincident points")
    return normalize_heading(math.degrees(math.atan2(b.x - a.x, b.y - a.y)))


def rotate_clockwise(heading: Heading, amount: float) -> Heading:
    return normalize_heading(heading + amount)


def advance(pos: Vec2, heading: Heading, units: float, world: WorldConfig) -> Vec2:
    """Displace `pos` by `units` along `heading`, clamped to the world square.

    Negative `units` moves backwards along the heading.
    """
    rad = math.radians(heading)
    h = world.half_extent
    return Vec2(
        min(max(pos.x + units * math.sin(rad), -h), h),
        min(max(pos.y + units * math.cos(rad), -h), h),
    )


def annulus_area(delta: float, epsilon: float) -> float:
    """Area of the ring band [delta - epsilon, delta + epsilon]: 4*pi*delta*epsilon.

    Requires delta > epsilon so the inner radius is positive; degenerate
    bands are handled by :func:`band_area`.
    """
    if delta <= epsilon:
        raise ValueError(
            f"delta must exceed epsilon for a ring-shaped band (delta={delta}, epsilon={epsilon})"
        )
    return 4.0 * math.pi * delta * epsilon


def band_area(delta: float, epsilon: float) -> float:
    """Band area with the inner radius clamped at zero.

    Equals annulus_area whenever delta >= epsilon; for delta < epsilon the
    band degenerates to the disc of radius delta + epsilon.
    """
    inner = max(delta - epsilon, 0.0)
    return math.pi * ((delta + epsilon) ** 2 - inner**2)
