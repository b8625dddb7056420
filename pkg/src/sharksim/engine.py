"""The round-based protocol engine for the patrol swarm and its attackers.

Regular agents follow two rules every round:

* Center rule: if the distance to the target leaves the tolerated band
  [delta - epsilon, delta + epsilon], step c units straight away from or
  straight toward the target, but only onto an empty location.
* Dispersion rule: face the nearest active agent (regular agents cannot
  tell kinds apart), rotate the heading clockwise by 180 + r degrees, and
  step d units if the destination is empty. The rotation bias is what makes
  the settled ring orbit instead of freezing.

Adversaries run the same center rule but a modified dispersion rule: they
flee only the nearest fellow adversary, move at d * disperse_factor, and
ignore occupancy entirely, which lets them press into the ring and corral
regular agents aside. They sit off the field (inactive) until their delay
policy fires, then all enter at a single point on the ideal circle.

Rounds update agents sequentially in a freshly shuffled order drawn from
the run's deterministic generator; each agent sees the positions already
updated this round, and on its turn disperses first and centers second, so
the center rule corrects any radial drift the flee move introduced before
the round's observables are taken. A run is therefore a pure function of
its SimConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _kernel as _k
from .geometry import Vec2, WorldConfig
from .metrics import RoundMetrics, SimResult, congestion
from .model import (
    AgentKind,
    AgentState,
    ConfigError,
    NoNeighborError,
    SimConfig,
    SwarmParams,
)

PLACEMENT_MAX_ATTEMPTS = 10000

_DELAY_CODES = {
    "none": _k.DELAY_NONE,
    "stability": _k.DELAY_ON_STABILITY,
    "stability-plus": _k.DELAY_STABILITY_PLUS,
}


@dataclass(frozen=True)
class MoveProposal:
    """Outcome of one rule application: where the agent would go, its new
    heading, and whether the occupancy check blocked the move (in which
    case new_pos equals the current position)."""

    agent_id: int
    new_pos: Vec2
    new_heading: float
    blocked: bool


@dataclass
class SimState:
    """Complete simulation state between rounds.

    Arrays are indexed by agent id: regular agents occupy ids
    0..population-1, adversaries follow. `stability_streak` counts how many
    consecutive completed rounds satisfied the stability predicate's
    per-round conditions.
    """

    round: int
    pos: np.ndarray
    heading: np.ndarray
    kind: np.ndarray
    active: np.ndarray
    rng_state: int
    first_stable_at: Optional[int] = None
    adversaries_activated_at: Optional[int] = None
    stability_streak: int = 0

    def copy(self) -> "SimState":
        return SimState(
            round=self.round,
            pos=self.pos.copy(),
            heading=self.heading.copy(),
            kind=self.kind.copy(),
            active=self.active.copy(),
            rng_state=self.rng_state,
            first_stable_at=self.first_stable_at,
            adversaries_activated_at=self.adversaries_activated_at,
            stability_streak=self.stability_streak,
        )

    @property
    def agents(self) -> tuple[AgentState, ...]:
        return tuple(
            AgentState(
                id=i,
                kind=AgentKind(int(self.kind[i])),
                pos=Vec2(float(self.pos[i, 0]), float(self.pos[i, 1])),
                heading=float(self.heading[i]),
                active=bool(self.active[i]),
            )
            for i in range(self.pos.shape[0])
        )


def _as_arrays(agents: Iterable[AgentState]):
    """Arrays sorted by id, so kernel index order matches id order."""
    ordered = sorted(agents, key=lambda a: a.id)
    ids = [a.id for a in ordered]
    pos = np.array([[a.pos.x, a.pos.y] for a in ordered], dtype=float).reshape(len(ordered), 2)
    heading = np.array([a.heading for a in ordered], dtype=float)
    kind = np.array([int(a.kind) for a in ordered], dtype=np.uint8)
    active = np.array([a.active for a in ordered], dtype=np.bool_)
    return ids, pos, heading, kind, active


def is_empty(loc: Vec2, agents: Iterable[AgentState], radius: float, self_id: int) -> bool:
    """True iff no active agent other than self_id lies strictly within
    `radius` of `loc`."""
    ids, pos, _, _, active = _as_arrays(agents)
    skip = ids.index(self_id) if self_id in ids else -1
    return bool(_k.is_empty_xy(loc.x, loc.y, pos, active, skip, radius))


def nearest_neighbor(agent: AgentState, agents: Iterable[AgentState], adversaries_only: bool = False) -> int:
    """Id of the closest active agent (optionally: adversary) other than
    `agent`; ties break toward the lowest id. Raises NoNeighborError when
    nothing qualifies."""
    ids, pos, _, kind, active = _as_arrays(agents)
    i = ids.index(agent.id)
    j = _k.nearest_index(i, pos, kind, active, adversaries_only)
    if j < 0:
        raise NoNeighborError("no neighbor")
    return ids[j]


def center_rule(agent: AgentState, params: SwarmParams, world: WorldConfig,
                agents: Iterable[AgentState]) -> MoveProposal:
    """Hold the band [delta - epsilon, delta + epsilon] around the target.

    Too close moves c units straight away from the target, too far moves c
    units straight toward it, each only onto an empty location; inside the
    band the agent stays put. An agent exactly on the target keeps its
    current heading and is pushed outward along it. Identical for both
    kinds, occupancy check included.
    """
    ids, pos, heading, _, active = _as_arrays(agents)
    i = ids.index(agent.id)
    nx, ny, blocked, _ = _k.center_proposal(
        i, pos, heading, active,
        params.delta, params.epsilon, params.c, params.collision_radius,
        world.half_extent, world.target.x, world.target.y,
    )
    return MoveProposal(agent.id, Vec2(float(nx), float(ny)), agent.heading, bool(blocked))


def dispersion_rule(agent: AgentState, agents: Iterable[AgentState], params: SwarmParams,
                    world: WorldConfig) -> MoveProposal:
    """Regular-agent dispersion: face the nearest active agent of any kind,
    rotate clockwise by 180 + r, and step d units if the destination is
    empty. A blocked move keeps the position but the heading update
    persists; with no neighbor at all nothing changes."""
    ids, pos, heading, kind, active = _as_arrays(agents)
    i = ids.index(agent.id)
    nx, ny, nh, blocked, _ = _k.disperse_proposal(
        i, pos, heading, kind, active,
        params.r, params.d, params.collision_radius, world.half_extent,
        False, True,
    )
    return MoveProposal(agent.id, Vec2(float(nx), float(ny)), float(nh), bool(blocked))


def adversarial_dispersion_rule(agent: AgentState, agents: Iterable[AgentState],
                                params: SwarmParams, world: WorldConfig) -> MoveProposal:
    """Adversary dispersion: face the nearest active adversary, rotate
    clockwise by 180 + r, and step d * disperse_factor units with no
    occupancy check -- adversaries shove through anyone in the way."""
    ids, pos, heading, kind, active = _as_arrays(agents)
    i = ids.index(agent.id)
    nx, ny, nh, blocked, _ = _k.disperse_proposal(
        i, pos, heading, kind, active,
        params.r, params.d * params.adversary_disperse_factor,
        params.collision_radius, world.half_extent,
        True, False,
    )
    return MoveProposal(agent.id, Vec2(float(nx), float(ny)), float(nh), bool(blocked))


def initialize(config: SimConfig) -> SimState:
    """Seeded initial state: regular agents scattered uniformly over the
    world (none within a collision radius of the target or of each other),
    adversaries created inactive. Under the no-delay policy the adversaries
    are activated immediately at their entry point."""
    config.validate()
    p = config.params
    w = config.world
    n = config.population + config.num_adversaries

    rng, reg_pos, reg_head, attempts, ok = _k.place_uniform(
        np.uint64(config.seed), config.population, w.half_extent,
        p.collision_radius, w.target.x, w.target.y, PLACEMENT_MAX_ATTEMPTS,
    )
    if not ok:
        raise ConfigError(
            f"world too crowded: placed fewer than {config.population} agents "
            f"in {PLACEMENT_MAX_ATTEMPTS} attempts"
        )

    pos = np.zeros((n, 2))
    heading = np.zeros(n)
    pos[: config.population] = reg_pos
    heading[: config.population] = reg_head
    kind = np.zeros(n, dtype=np.uint8)
    kind[config.population :] = _k.ADVERSARY
    active = np.zeros(n, dtype=np.bool_)
    active[: config.population] = True

    state = SimState(
        round=0,
        pos=pos,
        heading=heading,
        kind=kind,
        active=active,
        rng_state=int(rng),
    )
    if config.delay.kind == "none" and config.num_adversaries > 0:
        _k.place_adversaries(
            pos, heading, kind, active, p.delta, config.adversary_entry_angle,
            p.collision_radius, w.half_extent, w.target.x, w.target.y,
        )
        state.adversaries_activated_at = 0
    return state


def activate_adversaries(state: SimState, config: SimConfig) -> SimState:
    """All adversaries enter at the single entry point (distance delta from
    the target at the configured angle, fanned out tangentially by one
    collision radius each) and become active; the activation round is the
    state's current round."""
    if state.adversaries_activated_at is not None:
        raise ValueError("adversaries already activated")
    p = config.params
    w = config.world
    new = state.copy()
    _k.place_adversaries(
        new.pos, new.heading, new.kind, new.active, p.delta,
        config.adversary_entry_angle, p.collision_radius,
        w.half_extent, w.target.x, w.target.y,
    )
    new.adversaries_activated_at = state.round
    return new


def step_round(state: SimState, config: SimConfig) -> tuple[SimState, RoundMetrics]:
    """Advance one round and report its observables.

    Equivalent, round for round, to the batched full-run loop in
    :func:`run`; both paths execute the same compiled kernel.
    """
    if state.round >= config.max_rounds:
        raise ValueError(f"round {state.round} is at or beyond max_rounds={config.max_rounds}")
    p = config.params
    w = config.world
    new = state.copy()
    order_buf = np.empty(new.pos.shape[0], np.int64)
    bearings_buf = np.empty(new.pos.shape[0])
    (rng, streak, first_stable, activated, gap_fraction, _cv, in_band,
     stable, collisions, _clamps) = _k.advance_round(
        new.pos, new.heading, new.kind, new.active,
        np.uint64(new.rng_state), new.round, new.stability_streak,
        -1 if new.first_stable_at is None else new.first_stable_at,
        -1 if new.adversaries_activated_at is None else new.adversaries_activated_at,
        p.delta, p.epsilon, p.c, p.d, p.r, p.adversary_disperse_factor,
        p.collision_radius, w.half_extent, w.target.x, w.target.y,
        _DELAY_CODES[config.delay.kind], config.delay.extra_rounds,
        config.adversary_entry_angle,
        config.stability.window, config.stability.gap_cv_threshold,
        order_buf, bearings_buf,
    )
    metrics = RoundMetrics(
        round=state.round,
        max_gap_fraction=float(gap_fraction),
        in_band_count=int(in_band),
        stable=bool(stable),
        collisions=int(collisions),
    )
    new.round = state.round + 1
    new.rng_state = int(rng)
    new.stability_streak = int(streak)
    new.first_stable_at = None if first_stable < 0 else int(first_stable)
    new.adversaries_activated_at = None if activated < 0 else int(activated)
    return new, metrics


@dataclass
class RunOutput:
    """Full-run record: the result plus per-round series.

    Arrays are indexed by round (0-based, one entry per completed round).
    `gap_cv` is the per-round gap coefficient of variation the stability
    predicate consumed; `boundary_clamp_events` counts applied moves that
    the world boundary clamped, a flag that results were boundary-sensitive.
    """

    config: SimConfig
    result: SimResult
    gap_fraction: np.ndarray
    gap_cv: np.ndarray
    in_band: np.ndarray
    stable: np.ndarray
    collisions: np.ndarray
    boundary_clamp_events: int
    final_state: SimState = field(repr=False, default=None)

    @property
    def degenerate_band(self) -> bool:
        return self.config.params.delta <= self.config.params.epsilon

    @property
    def congestion_formula(self) -> float:
        """4*pi*delta*epsilon per agent, with no inner-radius clamping."""
        p = self.config.params
        return 4.0 * math.pi * p.delta * p.epsilon / self.config.population

    def round_metrics(self) -> list[RoundMetrics]:
        return [
            RoundMetrics(
                round=t,
                max_gap_fraction=float(self.gap_fraction[t]),
                in_band_count=int(self.in_band[t]),
                stable=bool(self.stable[t]),
                collisions=int(self.collisions[t]),
            )
            for t in range(self.gap_fraction.shape[0])
        ]


def run(config: SimConfig) -> RunOutput:
    """Execute a full run of config.max_rounds rounds."""
    config.validate()
    state = initialize(config)
    p = config.params
    w = config.world
    rounds = config.max_rounds
    out_gap = np.empty(rounds)
    out_cv = np.empty(rounds)
    out_in_band = np.empty(rounds, np.int64)
    out_stable = np.empty(rounds, np.bool_)
    out_collisions = np.empty(rounds, np.int64)

    rng, streak, first_stable, activated, clamp_total = _k.run_rounds(
        state.pos, state.heading, state.kind, state.active,
        np.uint64(state.rng_state), state.stability_streak,
        -1 if state.first_stable_at is None else state.first_stable_at,
        -1 if state.adversaries_activated_at is None else state.adversaries_activated_at,
        0, rounds,
        p.delta, p.epsilon, p.c, p.d, p.r, p.adversary_disperse_factor,
        p.collision_radius, w.half_extent, w.target.x, w.target.y,
        _DELAY_CODES[config.delay.kind], config.delay.extra_rounds,
        config.adversary_entry_angle,
        config.stability.window, config.stability.gap_cv_threshold,
        out_gap, out_cv, out_in_band, out_stable, out_collisions,
    )

    state.round = rounds
    state.rng_state = int(rng)
    state.stability_streak = int(streak)
    state.first_stable_at = None if first_stable < 0 else int(first_stable)
    state.adversaries_activated_at = None if activated < 0 else int(activated)

    if state.first_stable_at is None or state.adversaries_activated_at is None:
        pa = 0.0
    else:
        start = max(state.first_stable_at, state.adversaries_activated_at)
        pa = float(out_gap[start:].max())

    result = SimResult(
        config_digest=config.digest(),
        percent_access=pa,
        first_stable_at=state.first_stable_at,
        adversaries_activated_at=state.adversaries_activated_at,
        total_collisions=int(out_collisions.sum()),
        congestion=congestion(p.delta, p.epsilon, config.population),
    )
    return RunOutput(
        config=config,
        result=result,
        gap_fraction=out_gap,
        gap_cv=out_cv,
        in_band=out_in_band,
        stable=out_stable,
        collisions=out_collisions,
        boundary_clamp_events=int(clamp_total),
        final_state=state,
    )


def warm_kernels() -> None:
    """Force one tiny run through every compiled kernel so forked sweep
    workers inherit warm machine code."""
    cfg = SimConfig(population=2, num_adversaries=2, max_rounds=2, seed=0)
    run(cfg)
