"""Simulator for a decentralized perimeter-patrol swarm (the SHARKS rules)
and an adversarial corralling counter-swarm, plus the metrics and sweep
harness used to score how much of the perimeter an attack can open up."""

from .geometry import Vec2, WorldConfig, distance, heading_towards, rotate_clockwise, advance, annulus_area, band_area
from .model import (
    AgentKind,
    AgentState,
    ConfigError,
    DelayPolicy,
    NO_DELAY,
    NoNeighborError,
    ON_STABILITY,
    SimConfig,
    StabilityParams,
    SwarmParams,
    stability_plus,
)
from .metrics import RoundMetrics, SimResult, max_gap_fraction, percent_access, congestion, count_collisions, detect_stability
from .engine import SimState, MoveProposal, initialize, step_round, run
from .sweep import SweepSpec, expand_grid, run_sweep, aggregate

__version__ = "0.1.0"
