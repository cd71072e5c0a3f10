"""Candidate trajectory selection under map uncertainty and collision risk.

Each command owns a list of candidate trajectories with confidence scores.
Selection keeps a candidate's confidence as its score unless an enabled
filter flags it (boundary-risk NLL below threshold, predicted-agent
collision, or footprint too close to a map boundary); flagged scores drop to
zero and the highest-scoring survivor wins. If everything is zeroed a
deterministic fallback still emits a trajectory.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .geometry import OrientedBox, Point2, Polyline, Pose2, dist_point_polyline, vehicle_corners, boxes_overlap
from .map_model import UncertainMap, boundary_elements
from .uncertainty import UncertainPolyline, min_nll_to_elements

if TYPE_CHECKING:
    from .scenario import AgentPrediction

T_F = 6  # future steps per trajectory (3 s)
DT = 0.5  # s between steps


class Command(enum.Enum):
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    GO_STRAIGHT = "GoStraight"


@dataclass(frozen=True)
class CandidateTrajectory:
    """One planning mode: T_F ego-frame waypoints, footprint headings, confidence."""

    waypoints: tuple[Point2, ...]
    headings: tuple[float, ...]
    confidence: float

    def __post_init__(self) -> None:
        wps = tuple(self.waypoints)
        hds = tuple(float(h) for h in self.headings)
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "headings", hds)
        if len(wps) != T_F:
            raise ValueError(f"trajectory needs exactly {T_F} waypoints, got {len(wps)}")
        if len(hds) != T_F:
            raise ValueError(f"trajectory needs exactly {T_F} headings, got {len(hds)}")
        if not all(math.isfinite(h) for h in hds):
            raise ValueError("headings must be finite")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class CandidateSet:
    """Per-command candidate lists; every command key is always present."""

    turn_left: tuple[CandidateTrajectory, ...]
    turn_right: tuple[CandidateTrajectory, ...]
    go_straight: tuple[CandidateTrajectory, ...]

    def __post_init__(self) -> None:
        for name in ("turn_left", "turn_right", "go_straight"):
            cands = tuple(getattr(self, name))
            object.__setattr__(self, name, cands)
            if not cands:
                raise ValueError(f"command {name} needs at least one candidate")

    def for_command(self, command: Command) -> tuple[CandidateTrajectory, ...]:
        return {
            Command.TURN_LEFT: self.turn_left,
            Command.TURN_RIGHT: self.turn_right,
            Command.GO_STRAIGHT: self.go_straight,
        }[command]


@dataclass(frozen=True)
class SelectionConfig:
    nll_threshold: float = 2.0
    boundary_clearance: float = 0.3  # m
    agent_margin: float = 0.0  # m added on every side of agent boxes
    risk_aggregator: str = "min"  # {"min", "mean"} over per-waypoint NLL minima
    enable_uncertainty_filter: bool = True
    enable_agent_filter: bool = True
    enable_boundary_filter: bool = True
    check_all_agent_modes: bool = False  # default: highest-confidence mode only
    risk_on_all_elements: bool = False  # default: boundary elements only

    def __post_init__(self) -> None:
        if self.boundary_clearance < 0:
            raise ValueError(f"boundary_clearance must be >= 0, got {self.boundary_clearance}")
        if self.agent_margin < 0:
            raise ValueError(f"agent_margin must be >= 0, got {self.agent_margin}")
        if self.risk_aggregator not in ("min", "mean"):
            raise ValueError(f"risk_aggregator must be 'min' or 'mean', got {self.risk_aggregator!r}")


@dataclass(frozen=True)
class CandidateRecord:
    """Audit record of one candidate's evaluation. Values a disabled filter
    would have produced are not computed: risk_nll stays +inf and flags stay False."""

    index: int
    confidence: float
    risk_nll: float
    agent_collision: bool
    boundary_collision: bool
    final_score: float


@dataclass(frozen=True)
class SelectionReport:
    chosen_index: int
    chosen: CandidateTrajectory
    records: tuple[CandidateRecord, ...]
    fallback_used: bool


def command_filter(
    candidate_set: CandidateSet, command: Command | str
) -> list[CandidateTrajectory]:
    """The candidate subset owned by the given driving command."""
    if not isinstance(command, Command):
        try:
            command = Command(command)
        except ValueError:
            raise ValueError(f"unknown command {command!r}") from None
    return list(candidate_set.for_command(command))


def trajectory_risk(
    traj: CandidateTrajectory,
    boundaries: Sequence[UncertainPolyline],
    aggregator: str = "min",
) -> float:
    """Boundary-proximity risk: aggregate over waypoints of the per-waypoint
    minimum NLL against all boundary vertices. Lower means riskier."""
    if not boundaries:
        raise ValueError("need at least one boundary element")
    per_waypoint = [min_nll_to_elements(p, boundaries) for p in traj.waypoints]
    if aggregator == "min":
        return min(per_waypoint)
    if aggregator == "mean":
        return sum(per_waypoint) / len(per_waypoint)
    raise ValueError(f"unknown aggregator {aggregator!r}")


def agent_collision_check(
    traj: CandidateTrajectory,
    ego_dims: tuple[float, float],
    agents: Sequence["AgentPrediction"],
    margin: float = 0.0,
    all_modes: bool = False,
) -> bool:
    """Time-aligned oriented-box overlap between the ego footprint along the
    trajectory and each agent's predicted motion (highest-confidence mode by
    default). Agent boxes are inflated by margin on each side."""
    length, width = ego_dims
    ego_boxes = [
        OrientedBox(wp, heading, length, width)
        for wp, heading in zip(traj.waypoints, traj.headings)
    ]
    for agent in agents:
        if all_modes:
            modes = agent.modes
        else:
            modes = (max(agent.modes, key=lambda m: m.confidence),)
        for mode in modes:
            if len(mode.trajectory) != len(traj.waypoints):
                raise ValueError(
                    f"timestep grid mismatch: agent mode has {len(mode.trajectory)} "
                    f"poses, trajectory has {len(traj.waypoints)}"
                )
            for t, pose in enumerate(mode.trajectory):
                agent_box = OrientedBox(
                    pose.position,
                    pose.heading,
                    agent.dims[0] + 2.0 * margin,
                    agent.dims[1] + 2.0 * margin,
                )
                if boxes_overlap(ego_boxes[t], agent_box):
                    return True
    return False


def boundary_collision_check(
    traj: CandidateTrajectory,
    ego_dims: tuple[float, float],
    boundaries: Sequence[Polyline],
    clearance: float,
) -> bool:
    """Whether any footprint corner at any step comes strictly closer than
    `clearance` to a boundary polyline (exact contact always counts)."""
    if not boundaries:
        raise ValueError("need at least one boundary polyline")
    length, width = ego_dims
    for wp, heading in zip(traj.waypoints, traj.headings):
        for corner in vehicle_corners(Pose2(wp, heading), length, width):
            for line in boundaries:
                d = dist_point_polyline(corner, line)
                if d < clearance or d == 0.0:
                    return True
    return False


def ucas_select(
    candidate_set: CandidateSet,
    command: Command | str,
    uncertain_map: UncertainMap,
    agents: Sequence["AgentPrediction"],
    ego_dims: tuple[float, float],
    cfg: SelectionConfig,
) -> SelectionReport:
    """Score, filter and pick the safest candidate for a command.

    final_score = confidence, zeroed when an enabled filter flags the
    candidate. Winner: highest score, ties broken by lower risk_nll, then by
    lowest index. If every score is zero the fallback prefers candidates
    without agent collisions and takes the one farthest from uncertain
    boundaries (highest risk_nll); if all collide, the raw-confidence argmax.
    """
    candidates = command_filter(candidate_set, command)
    n = len(candidates)

    if cfg.enable_uncertainty_filter:
        if cfg.risk_on_all_elements:
            risk_elements = [e.polyline for e in uncertain_map.elements]
        else:
            risk_elements = boundary_elements(uncertain_map)
        if not risk_elements:
            raise ValueError("uncertainty filter needs at least one boundary element")
        risks = [trajectory_risk(c, risk_elements, cfg.risk_aggregator) for c in candidates]
    else:
        risks = [math.inf] * n

    if cfg.enable_agent_filter:
        agent_flags = [
            agent_collision_check(c, ego_dims, agents, cfg.agent_margin, cfg.check_all_agent_modes)
            for c in candidates
        ]
    else:
        agent_flags = [False] * n

    if cfg.enable_boundary_filter:
        mu_lines = [b.mu_polyline() for b in boundary_elements(uncertain_map)]
        if not mu_lines:
            raise ValueError("boundary filter needs at least one boundary element")
        boundary_flags = [
            boundary_collision_check(c, ego_dims, mu_lines, cfg.boundary_clearance)
            for c in candidates
        ]
    else:
        boundary_flags = [False] * n

    scores = []
    for i, cand in enumerate(candidates):
        flagged = (
            (cfg.enable_uncertainty_filter and risks[i] < cfg.nll_threshold)
            or (cfg.enable_agent_filter and agent_flags[i])
            or (cfg.enable_boundary_filter and boundary_flags[i])
        )
        scores.append(0.0 if flagged else cand.confidence)

    fallback_used = max(scores) == 0.0
    if not fallback_used:
        chosen_index = max(range(n), key=lambda i: (scores[i], -risks[i], -i))
    else:
        non_colliding = [i for i in range(n) if not agent_flags[i]]
        if non_colliding:
            chosen_index = max(
                non_colliding, key=lambda i: (risks[i], candidates[i].confidence, -i)
            )
        else:
            chosen_index = max(range(n), key=lambda i: (candidates[i].confidence, -i))

    records = tuple(
        CandidateRecord(
            index=i,
            confidence=candidates[i].confidence,
            risk_nll=risks[i],
            agent_collision=agent_flags[i],
            boundary_collision=boundary_flags[i],
            final_score=scores[i],
        )
        for i in range(n)
    )
    return SelectionReport(
        chosen_index=chosen_index,
        chosen=candidates[chosen_index],
        records=records,
        fallback_used=fallback_used,
    )
