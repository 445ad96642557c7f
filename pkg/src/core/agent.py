"""
The exploratory agent: select visible objects, build an interest map over
the 36-direction fan, navigate toward the best direction or object. Also
the random control agent and the JSON Lines trace log both produce.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from src.config.schema import ExperimentConfig
from src.core.navigation import NavPath, find_path, snap_to_walkable
from src.core.perception import (
    DIRECTION_COUNT,
    AgentPose,
    DirectionFan,
    ViewParams,
    bucket_objects,
    horizontal_offset,
    sample_fan,
    visible_objects,
)
from src.core.world import CELL_SIZE, Level, WorldObject
from src.metrics.scoring import MetricConfig, MetricContext, MetricKind, MetricState, score_direction
from src.utils.rng import XorShiftRandom

logger = logging.getLogger(__name__)

SUBSTEP = 0.25
TIE_EPS = 1e-12


@dataclass(frozen=True)
class AgentParams:
    view: ViewParams = field(default_factory=ViewParams)
    decision_time: float = 1.0
    move_distance: float = 50.0
    speed: float = 10.0
    sim_duration: float = 180.0
    tick: float = 0.1
    eye_height: float = 2.0
    approach_distance: float = 10.0
    group_radius: float = 40.0

    def __post_init__(self) -> None:
        if self.decision_time <= 0 or self.speed <= 0 or self.tick <= 0:
            raise ValueError("decision_time, speed and tick must be positive")
        if abs(self.decision_time / self.tick - round(self.decision_time / self.tick)) > 1e-9:
            raise ValueError("decision_time must be a whole number of ticks")

    @property
    def ticks_per_decision(self) -> int:
        return max(int(round(self.decision_time / self.tick)), 1)

    @property
    def tick_count(self) -> int:
        return int(round(self.sim_duration / self.tick))

    @classmethod
    def from_config(cls, config: ExperimentConfig, duration: float | None = None) -> "AgentParams":
        return cls(
            view=ViewParams(config.view.length_of_view, config.view.field_of_view),
            decision_time=config.agent.decision_time,
            move_distance=config.agent.move_distance,
            speed=config.agent.speed,
            sim_duration=duration if duration is not None else config.duration,
            tick=config.agent.tick,
            eye_height=config.agent.eye_height,
            approach_distance=config.agent.approach_distance,
            group_radius=config.evaluation.group_radius,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class InterestMap:
    """Score per fan direction (-inf outside the camera cone) and the object behind it."""

    scores: np.ndarray
    associated_objects: tuple[str | None, ...]

    def best_directions(self) -> list[int]:
        finite = np.isfinite(self.scores)
        if not finite.any():
            return []
        best = self.scores[finite].max()
        return [int(i) for i in np.flatnonzero(finite & (self.scores >= best - TIE_EPS))]


@dataclass(frozen=True)
class MoveInDirection:
    direction_index: int
    distance: float


@dataclass(frozen=True)
class MoveToObject:
    object_id: str
    direction_index: int
    path: NavPath
    goal: tuple[float, float]


NavigationDecision = Union[MoveInDirection, MoveToObject]


@dataclass(frozen=True)
class DecisionOutcome:
    decision: NavigationDecision
    score: float | None
    state: MetricState
    interest: InterestMap | None = None


@dataclass
class AgentState:
    """Ground position (x, z), camera heading and the remaining route."""

    position: tuple[float, float]
    heading: float
    waypoints: list[tuple[float, float]] = field(default_factory=list)


# --- Stage 1 and 2 ---

def pose_of(level: Level, state: AgentState, eye_height: float) -> AgentPose:
    x, z = state.position
    return AgentPose((x, level.height_at(x, z) + eye_height, z), state.heading)


def build_interest_map(
    level: Level,
    pose: AgentPose,
    config: MetricConfig,
    state: MetricState,
    params: AgentParams,
    visible: list[WorldObject],
    fan: DirectionFan | None = None,
) -> tuple[InterestMap, MetricState]:
    """Score every in-FOV direction; out-of-FOV entries are -inf."""
    fan = fan or sample_fan(pose, params.view)
    buckets = bucket_objects(fan, pose, visible)
    ctx = MetricContext(level, pose, params.view, params.group_radius)
    scores = np.full(DIRECTION_COUNT, -np.inf)
    associated: list[str | None] = [None] * DIRECTION_COUNT
    for index in fan.in_fov_indices():
        result = score_direction(config, state, ctx, fan.directions[index], buckets.get(index, []))
        state = result.state
        scores[index] = result.score
        associated[index] = result.associated_object
    return InterestMap(scores, tuple(associated)), state


# --- Stage 3 ---

def _object_goal(pose: AgentPose, obj: WorldObject, approach: float) -> tuple[float, float] | None:
    dx, dz, dist = horizontal_offset(pose, obj)
    if dist <= approach + CELL_SIZE:
        return None
    scale = (dist - approach) / dist
    return pose.position[0] + dx * scale, pose.position[2] + dz * scale


def decide(
    level: Level,
    pose: AgentPose,
    config: MetricConfig,
    state: MetricState,
    rng: XorShiftRandom,
    params: AgentParams,
    visible: list[WorldObject] | None = None,
) -> DecisionOutcome:
    """
    Pick the highest-interest direction and turn it into a navigation decision.

    Ties are broken uniformly with `rng`. When the winning direction carries an
    associated object the agent paths to a point `approach_distance` short of it;
    objects it already stands next to, or cannot reach, give a straight move instead.

    Args:
        level: Level being explored
        pose: Current eye position and heading
        config: Active metrics
        state: Metric state carried through the run
        rng: The episode's random source
        params: Agent parameters
        visible: Stage 1 output; computed when omitted

    Returns:
        DecisionOutcome with the decision, its score and the updated metric state
    """
    if visible is None:
        visible = visible_objects(level, pose, params.view)
    interest, state = build_interest_map(level, pose, config, state, params, visible)
    ties = interest.best_directions()
    index = ties[rng.randbelow(len(ties))] if len(ties) > 1 else ties[0]
    score = float(interest.scores[index])

    object_id = interest.associated_objects[index]
    if object_id is not None:
        obj = level.object_index[object_id]
        goal = _object_goal(pose, obj, params.approach_distance)
        if goal is not None and level.in_bounds(*goal):
            path = find_path(level, (pose.position[0], pose.position[2]), goal)
            if path is not None:
                return DecisionOutcome(MoveToObject(object_id, index, path, goal), score, state, interest)
            logger.debug(f"No path to {object_id}, moving toward direction {index} instead")
    return DecisionOutcome(MoveInDirection(index, params.move_distance), score, state, interest)


def decide_random(pose: AgentPose, rng: XorShiftRandom, params: AgentParams) -> DecisionOutcome:
    """Uniform in-FOV direction; carries no motivation score."""
    allowed = sample_fan(pose, params.view).in_fov_indices()
    index = allowed[rng.randbelow(len(allowed))]
    return DecisionOutcome(MoveInDirection(index, params.move_distance), None, MetricState())


def plan_waypoints(state: AgentState, decision: NavigationDecision) -> list[tuple[float, float]]:
    if isinstance(decision, MoveToObject):
        waypoints = list(decision.path.waypoints)
        waypoints.append(decision.goal)
        return waypoints
    angle = math.radians(decision.direction_index * 360.0 / DIRECTION_COUNT)
    x, z = state.position
    return [(x + decision.distance * math.cos(angle), z + decision.distance * math.sin(angle))]


def step(level: Level, state: AgentState, params: AgentParams) -> tuple[AgentState, str | None]:
    """
    Advance one tick along the route at `speed`.

    Motion is checked every 0.25 units; entering an unwalkable or out-of-bounds
    point truncates the move. A block without any progress turns the heading
    around so the next camera cone looks elsewhere.

    Returns:
        (new state, event) where event is "reached", "blocked" or None
    """
    x, z = state.position
    heading = state.heading
    waypoints = list(state.waypoints)
    budget = params.speed * params.tick
    progress = 0.0
    grid = level.nav_grid

    while budget > 1e-12 and waypoints:
        tx, tz = waypoints[0]
        seg = math.hypot(tx - x, tz - z)
        if seg < 1e-9:
            waypoints.pop(0)
            continue
        ux, uz = (tx - x) / seg, (tz - z) / seg
        heading = math.degrees(math.atan2(uz, ux)) % 360.0
        travel = min(budget, seg)
        samples = int(math.ceil(travel / SUBSTEP - 1e-9))
        last = 0.0
        for s in range(1, samples + 1):
            d = min(s * SUBSTEP, travel)
            if not grid.is_walkable(x + ux * d, z + uz * d):
                x, z = x + ux * last, z + uz * last
                progress += last
                if progress < 1e-9:
                    heading = (heading + 180.0) % 360.0
                return AgentState((x, z), heading, []), "blocked"
            last = d
        if travel >= seg - 1e-12:
            x, z = tx, tz
            waypoints.pop(0)
        else:
            x, z = x + ux * travel, z + uz * travel
        budget -= travel
        progress += travel

    new_state = AgentState((x, z), heading, waypoints)
    return new_state, (None if waypoints else "reached")


# --- Trace log ---

@dataclass(frozen=True)
class TickRecord:
    k: int
    t: float
    position: tuple[float, float, float]
    heading: float
    visible: tuple[str, ...]
    cell: tuple[int, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "tick",
            "k": self.k,
            "t": self.t,
            "position": list(self.position),
            "heading": self.heading,
            "visible": list(self.visible),
            "cell": list(self.cell),
        }


@dataclass(frozen=True)
class DecisionRecord:
    k: int
    t: float
    scheduled: bool
    direction: int
    action: str
    score: float | None = None
    object_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "type": "decision",
            "k": self.k,
            "t": self.t,
            "scheduled": self.scheduled,
            "direction": self.direction,
            "action": self.action,
            "object": self.object_id,
        }
        if self.score is not None:
            record["score"] = self.score
        return record


@dataclass
class TraceLog:
    """Header plus tick and decision records of one episode."""

    header: dict[str, Any]
    ticks: list[TickRecord] = field(default_factory=list)
    decisions: list[DecisionRecord] = field(default_factory=list)

    @property
    def config(self) -> str:
        return str(self.header.get("config", ""))

    @property
    def object_kinds(self) -> dict[str, str]:
        return dict(self.header.get("object_kinds", {}))

    def positions(self) -> np.ndarray:
        """Tick positions as an (n, 2) array of (x, z)."""
        return np.array([(r.position[0], r.position[2]) for r in self.ticks], dtype=float).reshape(-1, 2)

    def motivation_samples(self) -> list[float]:
        """Scores of the scheduled decisions; empty for the random control."""
        return [d.score for d in self.decisions if d.scheduled and d.score is not None]

    def has_motivation(self) -> bool:
        return any(d.score is not None for d in self.decisions)

    def to_lines(self) -> list[str]:
        lines = [json.dumps({"type": "header", **self.header}, sort_keys=True)]
        decisions = iter(self.decisions)
        pending = next(decisions, None)
        for tick in self.ticks:
            while pending is not None and pending.k <= tick.k:
                lines.append(json.dumps(pending.to_dict(), sort_keys=True))
                pending = next(decisions, None)
            lines.append(json.dumps(tick.to_dict(), sort_keys=True))
        while pending is not None:
            lines.append(json.dumps(pending.to_dict(), sort_keys=True))
            pending = next(decisions, None)
        return lines

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(self.to_lines()) + "\n")
        return path

    @classmethod
    def from_lines(cls, lines: list[str]) -> "TraceLog":
        header: dict[str, Any] | None = None
        ticks: list[TickRecord] = []
        decisions: list[DecisionRecord] = []
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            kind = record.pop("type", None)
            if kind == "header":
                header = record
            elif kind == "tick":
                ticks.append(
                    TickRecord(
                        k=record["k"],
                        t=record["t"],
                        position=tuple(record["position"]),
                        heading=record["heading"],
                        visible=tuple(record["visible"]),
                        cell=tuple(record["cell"]),
                    )
                )
            elif kind == "decision":
                decisions.append(
                    DecisionRecord(
                        k=record["k"],
                        t=record["t"],
                        scheduled=record["scheduled"],
                        direction=record["direction"],
                        action=record["action"],
                        score=record.get("score"),
                        object_id=record.get("object"),
                    )
                )
            else:
                raise ValueError(f"line {number}: unknown record type '{kind}'")
        if header is None:
            raise ValueError("trace has no header record")
        return cls(header=header, ticks=ticks, decisions=decisions)

    @classmethod
    def read(cls, path: str | Path) -> "TraceLog":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Trace file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_lines(f.read().splitlines())


# --- Episodes ---

def _spawn_state(level: Level, spawn: tuple[float, float], rng: XorShiftRandom) -> AgentState:
    grid = level.nav_grid
    if not level.in_bounds(*spawn):
        raise ValueError(f"spawn {spawn} lies outside the level bounds")
    position = spawn
    if not grid.is_walkable(*spawn):
        cell = snap_to_walkable(grid.cells, grid.cell_of(*spawn))
        if cell is None:
            raise ValueError(f"spawn {spawn} is not within 2 cells of walkable ground")
        position = grid.center_of(cell)
    return AgentState(position, rng.uniform(0.0, 360.0))


def _simulate(
    level: Level,
    spawn: tuple[float, float],
    config_name: str,
    config: MetricConfig | None,
    params: AgentParams,
    seed: int,
) -> TraceLog:
    rng = XorShiftRandom(seed)
    state = _spawn_state(level, spawn, rng)
    metric_state = MetricState()
    trace = TraceLog(
        header={
            "level_id": level.id,
            "level_fingerprint": level.fingerprint(),
            "config": config_name,
            "seed": seed,
            "spawn": list(spawn),
            "params": params.to_dict(),
            "object_kinds": {obj.id: obj.kind for obj in level.objects},
        }
    )
    every = params.ticks_per_decision
    needs_decision = True

    for k in range(params.tick_count):
        t = round(k * params.tick, 6)
        pose = pose_of(level, state, params.eye_height)
        visible = visible_objects(level, pose, params.view)
        scheduled = k % every == 0
        if scheduled or needs_decision:
            if config is None:
                outcome = decide_random(pose, rng, params)
            else:
                outcome = decide(level, pose, config, metric_state, rng, params, visible)
                metric_state = outcome.state
            decision = outcome.decision
            state.waypoints = plan_waypoints(state, decision)
            trace.decisions.append(
                DecisionRecord(
                    k=k,
                    t=t,
                    scheduled=scheduled,
                    direction=decision.direction_index,
                    action="object" if isinstance(decision, MoveToObject) else "direction",
                    score=outcome.score,
                    object_id=decision.object_id if isinstance(decision, MoveToObject) else None,
                )
            )
            needs_decision = False
        trace.ticks.append(
            TickRecord(
                k=k,
                t=t,
                position=pose.position,
                heading=state.heading,
                visible=tuple(obj.id for obj in visible),
                cell=level.nav_grid.cell_of(*state.position),
            )
        )
        state, event = step(level, state, params)
        if event is not None:
            needs_decision = True

    logger.debug(
        f"Episode {level.id}/{config_name} seed {seed}: {len(trace.ticks)} ticks, {len(trace.decisions)} decisions"
    )
    return trace


def run_episode(
    level: Level,
    spawn: tuple[float, float],
    config: MetricConfig,
    params: AgentParams,
    seed: int,
    config_name: str | None = None,
) -> TraceLog:
    """
    Simulate a metric-driven agent for `params.sim_duration` seconds.

    Args:
        level: Level to explore
        spawn: Start point (x, z); snapped to walkable ground within 2 cells
        config: Active metrics
        params: Agent parameters
        seed: Episode seed; fixes the whole trace
        config_name: Label stored in the trace header

    Returns:
        The complete TraceLog
    """
    if config_name is None:
        config_name = "all" if config.active == frozenset(MetricKind) else "+".join(k.value for k in config.ordered)
    return _simulate(level, spawn, config_name, config, params, seed)


def run_random_control(level: Level, spawn: tuple[float, float], params: AgentParams, seed: int) -> TraceLog:
    """Simulate the control agent that moves in uniformly random in-FOV directions."""
    return _simulate(level, spawn, "random", None, params, seed)
