"""Run observables: angular gaps, stability detection, and percent access.

The security metric is the largest angular gap between adjacent agents
around the target, as a fraction of the full circle. Every active agent is
a ring member for this measurement: the ring the attack tears open is the
one formed by all of the agents, and an arc held open by adversaries is
bounded by (and split at) the adversaries standing in it, so the reported
gap is the largest arc genuinely empty of agents. Stability, by contrast,
describes how evenly the regular swarm itself has spread, so its gap
statistics use regular agents only. Measurement starts once the swarm has
both organized (first stable round) and come under attack (adversary
activation round).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .geometry import Vec2, band_area
from .model import AgentKind, AgentState, ConfigError, StabilityParams


@dataclass(frozen=True)
class RoundMetrics:
    """Observables for one completed round."""

    round: int
    max_gap_fraction: float
    in_band_count: int
    stable: bool
    collisions: int


@dataclass(frozen=True)
class SimResult:
    """Outcome of one run."""

    config_digest: str
    percent_access: float
    first_stable_at: Optional[int]
    adversaries_activated_at: Optional[int]
    total_collisions: int
    congestion: float


class StabilitySample(NamedTuple):
    """Per-round inputs to the stability predicate."""

    all_in_band: bool
    gap_cv: float


def ring_bearings(agents: Iterable[AgentState], target: Vec2, regular_only: bool = True) -> np.ndarray:
    """Compass bearings of active agents about the target.

    Agents sitting exactly on the target have no bearing and are skipped.
    """
    out = []
    for a in agents:
        if not a.active:
            continue
        if regular_only and a.kind != AgentKind.REGULAR:
            continue
        dx = a.pos.x - target.x
        dy = a.pos.y - target.y
        if dx == 0.0 and dy == 0.0:
            continue
        out.append(math.degrees(math.atan2(dx, dy)) % 360.0)
    return np.asarray(out, dtype=float)


def circular_gaps(bearings_deg: np.ndarray) -> np.ndarray:
    """Consecutive angular gaps around the circle, including wraparound.

    For n >= 1 bearings there are exactly n gaps and they sum to 360.
    """
    b = np.sort(np.asarray(bearings_deg, dtype=float) % 360.0)
    if b.size == 0:
        return np.empty(0)
    if b.size == 1:
        return np.array([360.0])
    return np.append(np.diff(b), 360.0 - (b[-1] - b[0]))


def gap_cv(bearings_deg: np.ndarray) -> float:
    """Coefficient of variation (population stddev / mean) of the gaps.

    No bearings at all yields +inf so the caller never declares an empty
    ring stable.
    """
    gaps = circular_gaps(bearings_deg)
    if gaps.size == 0:
        return math.inf
    mean = 360.0 / gaps.size
    return float(np.sqrt(np.mean((gaps - mean) ** 2)) / mean)


def max_gap_fraction(agents: Iterable[AgentState], target: Vec2) -> float:
    """Largest angular gap between adjacent active agents, over 360.

    Both kinds are ring members here; an adversary standing inside an arc
    it cleared bounds the measured gap at its own position. One lone agent
    leaves the whole circle open (1.0); so does an empty ring, by
    convention.
    """
    bearings = ring_bearings(agents, target, regular_only=False)
    if bearings.size == 0:
        return 1.0
    return float(np.max(circular_gaps(bearings))) / 360.0


def detect_stability(samples: Sequence[StabilitySample], params: StabilityParams) -> bool:
    """True iff the last `window` rounds each had every regular agent in
    band and gap CV at most the threshold."""
    if len(samples) < params.window:
        return False
    recent = samples[-params.window :]
    return all(s.all_in_band and s.gap_cv <= params.gap_cv_threshold for s in recent)


def percent_access(per_round: Sequence[RoundMetrics], activation: Optional[int]) -> float:
    """Largest gap fraction observed once measurement begins.

    Measurement starts at max(first stable round, activation round); if the
    swarm never stabilizes or the adversaries never enter, no attack was
    measured and the result is 0.
    """
    if activation is None:
        return 0.0
    first_stable = next((m.round for m in per_round if m.stable), None)
    if first_stable is None:
        return 0.0
    start = max(first_stable, activation)
    peak = 0.0
    for m in per_round:
        if m.round >= start and m.max_gap_fraction > peak:
            peak = m.max_gap_fraction
    return peak


def congestion(delta: float, epsilon: float, population: int) -> float:
    """Band area per regular agent; lower means a more tightly packed ring."""
    if population < 1:
        raise ConfigError(f"population must be at least 1 (got {population})")
    return band_area(delta, epsilon) / population


def count_collisions(agents: Iterable[AgentState], radius: float) -> int:
    """Unordered pairs of active agents strictly closer than `radius`."""
    live = [a for a in agents if a.active]
    r2 = radius * radius
    n = 0
    for i in range(len(live)):
        for j in range(i + 1, len(live)):
            dx = live[i].pos.x - live[j].pos.x
            dy = live[i].pos.y - live[j].pos.y
            if dx * dx + dy * dy < r2:
                n += 1
    return n
