"""Shared test constructors."""

from sharksim.geometry import Vec2, WorldConfig
from sharksim.model import AgentKind, AgentState, ON_STABILITY, SimConfig, SwarmParams


def make_params(**overrides) -> SwarmParams:
    return SwarmParams(**overrides)


def make_config(**overrides) -> SimConfig:
    defaults = dict(
        population=8,
        num_adversaries=2,
        params=SwarmParams(),
        world=WorldConfig(),
        delay=ON_STABILITY,
        max_rounds=200,
        seed=1,
    )
    defaults.update(overrides)
    return SimConfig(**defaults)


def regular(agent_id: int, x: float, y: float, heading: float = 0.0) -> AgentState:
    return AgentState(id=agent_id, kind=AgentKind.REGULAR, pos=Vec2(x, y), heading=heading)


def adversary(agent_id: int, x: float, y: float, heading: float = 0.0, active: bool = True) -> AgentState:
    return AgentState(id=agent_id, kind=AgentKind.ADVERSARY, pos=Vec2(x, y), heading=heading, active=active)
