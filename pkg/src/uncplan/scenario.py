"""Scenario data model, versioned JSON serialization, and the deterministic
synthetic generator that stands in for perception and prediction.

Each scenario is a single road corridor (straight or constant-curvature arc)
bounded by two uncertain boundary polylines, with the corridor polygon as
ground-truth drivable area. The ego ground truth follows the corridor center;
candidates emulate a planner that aims at the *perceived* corridor center
read from the noisy map at a lookahead station, spreading lateral variations
around that aim point with confidences decaying with deviation from it.
Agents are scripted constant-velocity vehicles and pedestrians.

Suite seeding: scenario i of a suite uses splitmix64(master_seed XOR i), so
suites are reproducible and individual scenarios can be regenerated alone.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .geometry import MultiPolygon, OrientedBox, Point2, Polygon, Pose2
from .map_model import MapElement, MapElementKind, UncertainMap, perturb_map
from .metrics import GroundTruth, scenario_class_of
from .selection import DT, T_F, CandidateSet, CandidateTrajectory, Command
from .uncertainty import B_MIN, LaplacePoint, UncertainPolyline

SCHEMA_VERSION = 1
_MASK64 = (1 << 64) - 1


class ScenarioFormatError(ValueError):
    """Malformed scenario file: bad JSON or missing/mistyped fields."""


class ScenarioVersionError(ScenarioFormatError):
    """Scenario file carries a missing or unsupported schema version."""


class ScenarioInvariantError(ValueError):
    """Scenario file parsed fine but a value violates a documented invariant."""


class ScenarioKind(enum.Enum):
    STRAIGHT = "Straight"
    TURN = "Turn"


@dataclass(frozen=True)
class AgentMode:
    """One predicted future of an agent with its confidence."""

    trajectory: tuple[Pose2, ...]
    confidence: float

    def __post_init__(self) -> None:
        traj = tuple(self.trajectory)
        object.__setattr__(self, "trajectory", traj)
        if len(traj) != T_F:
            raise ValueError(f"agent mode needs {T_F} poses, got {len(traj)}")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"mode confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class AgentPrediction:
    """Multi-modal prediction for one agent plus its footprint dimensions."""

    agent_id: str
    dims: tuple[float, float]  # length, width in meters
    modes: tuple[AgentMode, ...]

    def __post_init__(self) -> None:
        modes = tuple(self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "dims", (float(self.dims[0]), float(self.dims[1])))
        if not modes:
            raise ValueError("agent needs at least one mode")
        if self.dims[0] <= 0 or self.dims[1] <= 0:
            raise ValueError(f"agent dims must be positive, got {self.dims}")
        total = sum(m.confidence for m in modes)
        if total > 1.0 + 1e-6:
            raise ValueError(f"mode confidences sum to {total}, cap is 1")


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs of the synthetic corridor generator.

    Turn corridors default tighter than straight ones: curved road sections
    are the constrained regime the suite is meant to stress. planner_noise_frac
    scales the planning-head aim error with the map noise, so noiseless
    scenarios stay exact while noisy ones have an imperfect top-confidence mode.
    """

    noise_scale: float = 0.5  # m, Laplace scale of map perturbation
    n_agents: int = 2
    n_candidates: int = 5  # planning modes per command
    curvature_range: tuple[float, float] = (0.08, 0.14)  # 1/m, turn corridors
    speed_range: tuple[float, float] = (4.5, 8.5)  # m/s
    half_width_range: tuple[float, float] = (2.5, 3.4)  # m, straight corridors
    turn_half_width_range: tuple[float, float] = (2.8, 3.3)  # m, turn corridors
    ego_length: float = 4.2
    ego_width: float = 1.9
    n_element_points: int = 20  # vertices per map element
    calibrated: bool = True  # perturbed maps advertise their true noise scale
    lateral_reach_frac: float = 0.55  # candidate spread as a fraction of half width
    planner_noise_frac: float = 1.0  # aim error scale as a fraction of noise_scale
    turn_planner_noise_boost: float = 2.0  # extra aim error factor in turns
    confidence_temperature: float = 1.0  # m, softmax temperature over deviation
    corridor_tail: float = 6.0  # m of corridor beyond the 3 s horizon

    def __post_init__(self) -> None:
        if self.noise_scale < 0:
            raise ValueError(f"noise_scale must be >= 0, got {self.noise_scale}")
        if self.n_agents < 0:
            raise ValueError(f"n_agents must be >= 0, got {self.n_agents}")
        if self.n_candidates < 1:
            raise ValueError(f"n_candidates must be >= 1, got {self.n_candidates}")
        for name in ("curvature_range", "speed_range", "half_width_range", "turn_half_width_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        if self.ego_length <= 0 or self.ego_width <= 0:
            raise ValueError("ego dimensions must be positive")
        if self.n_element_points < 2:
            raise ValueError("map elements need at least 2 points")
        if not 0 < self.lateral_reach_frac < 1:
            raise ValueError("lateral_reach_frac must be in (0, 1)")
        if self.planner_noise_frac < 0:
            raise ValueError("planner_noise_frac must be >= 0")
        if self.turn_planner_noise_boost < 1.0:
            raise ValueError("turn_planner_noise_boost must be >= 1")
        if self.confidence_temperature <= 0:
            raise ValueError("confidence_temperature must be positive")
        if self.corridor_tail <= 0:
            raise ValueError("corridor_tail must be positive")


@dataclass(frozen=True)
class Scenario:
    """One evaluation unit: perceived map, agents, candidates, ground truth."""

    scenario_id: str
    seed: int
    map: UncertainMap
    agents: tuple[AgentPrediction, ...]
    agent_gt: tuple[tuple[OrientedBox, ...], ...]  # per agent, T_F boxes
    ego_pose: Pose2
    ego_dims: tuple[float, float]
    command: Command
    candidates: CandidateSet
    ego_gt_future: tuple[Pose2, ...]
    scenario_class: str  # "Turn" | "Straight"

    def __post_init__(self) -> None:
        agents = tuple(self.agents)
        agent_gt = tuple(tuple(seq) for seq in self.agent_gt)
        future = tuple(self.ego_gt_future)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "agent_gt", agent_gt)
        object.__setattr__(self, "ego_gt_future", future)
        object.__setattr__(self, "ego_dims", (float(self.ego_dims[0]), float(self.ego_dims[1])))
        if len(future) != T_F:
            raise ValueError(f"ego ground truth needs {T_F} poses, got {len(future)}")
        if len(agent_gt) != len(agents):
            raise ValueError("agent_gt and agents must align")
        for seq in agent_gt:
            if len(seq) != T_F:
                raise ValueError(f"agent ground truth needs {T_F} boxes per agent")
        expected = scenario_class_of([p.heading for p in future])
        if self.scenario_class != expected:
            raise ValueError(
                f"scenario_class {self.scenario_class!r} inconsistent with ego future "
                f"(15 degree rule says {expected!r})"
            )

    def ground_truth(self) -> GroundTruth:
        return GroundTruth(
            ego_future=tuple(p.position for p in self.ego_gt_future),
            ego_headings=tuple(p.heading for p in self.ego_gt_future),
            agent_futures=self.agent_gt,
            drivable_area=self.map.drivable_area,
        )


# ---------------------------------------------------------------------------
# seeding


def splitmix64(x: int) -> int:
    """Standard 64-bit splitmix finalizer; bijective on the 64-bit range."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def scenario_seed(master_seed: int, index: int) -> int:
    """Per-scenario seed: splitmix64(master XOR index)."""
    return splitmix64((master_seed ^ index) & _MASK64)


# ---------------------------------------------------------------------------
# generation

_COMMAND_SIDE = {Command.TURN_LEFT: 1.0, Command.GO_STRAIGHT: 0.0, Command.TURN_RIGHT: -1.0}
_INACTIVE_COMMAND_BIAS = 1.0  # m of extra lateral drift per side step at full ramp


def _offset_template(n: int) -> list[float]:
    """n distinct lateral factors in [-1, 1]: 0 first, then staggered +/- pairs.

    Magnitudes are deliberately asymmetric so no two candidates are ever
    equally far from the aim point (keeps confidences strictly ordered).
    """
    if n == 1:
        return [0.0]
    raw = [0.0]
    j = 1
    while len(raw) < n:
        raw.append(j - 0.05)
        if len(raw) < n:
            raw.append(-(j + 0.05))
        j += 1
    peak = max(abs(v) for v in raw)
    return [v / peak for v in raw]


def generate_scenario(kind: ScenarioKind, params: GeneratorParams, seed: int) -> Scenario:
    """Build one deterministic synthetic scenario for the given seed."""
    rng = np.random.Generator(np.random.PCG64(seed & _MASK64))

    speed = float(rng.uniform(*params.speed_range))
    if kind is ScenarioKind.TURN:
        half_width = float(rng.uniform(*params.turn_half_width_range))
        curvature = float(rng.uniform(*params.curvature_range))
        if rng.random() < 0.5:
            curvature = -curvature
    else:
        half_width = float(rng.uniform(*params.half_width_range))
        curvature = 0.0

    horizon_len = speed * DT * T_F
    corridor_len = horizon_len + params.corridor_tail
    # corridor starts behind the ego so the rear footprint corners stay on road
    corridor_start = -(params.ego_length / 2 + 1.5)

    def center(s: float) -> tuple[float, float]:
        if curvature == 0.0:
            return s, 0.0
        return math.sin(curvature * s) / curvature, (1.0 - math.cos(curvature * s)) / curvature

    def heading(s: float) -> float:
        return curvature * s

    def normal(s: float) -> tuple[float, float]:
        h = heading(s)
        return -math.sin(h), math.cos(h)

    n_pts = params.n_element_points
    stations = [
        corridor_start + (corridor_len - corridor_start) * k / (n_pts - 1) for k in range(n_pts)
    ]

    def offset_point(s: float, lateral: float) -> Point2:
        cx, cy = center(s)
        nx, ny = normal(s)
        return Point2(cx + lateral * nx, cy + lateral * ny)

    left_pts = [offset_point(s, half_width) for s in stations]
    right_pts = [offset_point(s, -half_width) for s in stations]

    # drivable area: corridor ring, right side forward then left side back (CCW)
    ring = tuple(right_pts) + tuple(reversed(left_pts)) + (right_pts[0],)
    drivable = MultiPolygon((Polygon(ring),))

    def boundary(points: list[Point2]) -> MapElement:
        lps = tuple(LaplacePoint(p, (B_MIN, B_MIN)) for p in points)
        return MapElement(UncertainPolyline(lps), MapElementKind.BOUNDARY)

    divider_lps = tuple(LaplacePoint(offset_point(s, 0.0), (B_MIN, B_MIN)) for s in stations)
    elements = [
        boundary(left_pts),
        boundary(right_pts),
        MapElement(UncertainPolyline(divider_lps), MapElementKind.LANE_DIVIDER),
    ]
    if rng.random() < 0.4:
        s_cross = float(rng.uniform(0.35, 0.7)) * corridor_len
        span = half_width - 0.2
        cross_lps = tuple(
            LaplacePoint(offset_point(s_cross, -span + 2 * span * k / (n_pts - 1)), (B_MIN, B_MIN))
            for k in range(n_pts)
        )
        elements.append(MapElement(UncertainPolyline(cross_lps), MapElementKind.PED_CROSSING))

    true_map = UncertainMap(tuple(elements), drivable)
    perturb_seed = int(rng.integers(0, 2**63 - 1))
    perceived = perturb_map(true_map, params.noise_scale, perturb_seed, params.calibrated)

    # planner aim point: perceived corridor center at the lookahead station,
    # plus the planning head's own lateral error on top of the map reading
    i_look = min(range(n_pts), key=lambda k: abs(stations[k] - horizon_len))
    pl = perceived.elements[0].polyline.points[i_look].mu
    pr = perceived.elements[1].polyline.points[i_look].mu
    mid = Point2(0.5 * (pl.x + pr.x), 0.5 * (pl.y + pr.y))
    cx, cy = center(stations[i_look])
    nx, ny = normal(stations[i_look])
    aim = (mid.x - cx) * nx + (mid.y - cy) * ny
    head_scale = params.planner_noise_frac * params.noise_scale
    if kind is ScenarioKind.TURN:
        head_scale *= params.turn_planner_noise_boost
    if head_scale > 0:
        aim += float(rng.laplace(0.0, head_scale))
    reach = params.lateral_reach_frac * half_width
    aim = max(-0.8 * half_width, min(0.8 * half_width, aim))

    ego_pose = Pose2(Point2(0.0, 0.0), 0.0)
    step_arcs = [speed * DT * (t + 1) for t in range(T_F)]
    ego_gt_future = tuple(Pose2(offset_point(s, 0.0), heading(s)) for s in step_arcs)

    template = _offset_template(params.n_candidates)
    deviations = [abs(f) * reach for f in template]
    weights = [math.exp(-d / params.confidence_temperature) for d in deviations]
    total_w = sum(weights)
    confidences = [w / total_w for w in weights]

    if kind is ScenarioKind.TURN:
        command = Command.TURN_LEFT if curvature > 0 else Command.TURN_RIGHT
    else:
        command = Command.GO_STRAIGHT

    def command_candidates(cmd: Command) -> tuple[CandidateTrajectory, ...]:
        bias = (_COMMAND_SIDE[cmd] - _COMMAND_SIDE[command]) * _INACTIVE_COMMAND_BIAS
        cands = []
        for factor, conf in zip(template, confidences):
            target = aim + factor * reach + bias
            waypoints = []
            for t, s in enumerate(step_arcs):
                ramp = (t + 1) / T_F
                waypoints.append(offset_point(s, target * ramp))
            headings = [ego_pose.heading]
            for t in range(1, T_F):
                a, b = waypoints[t - 1], waypoints[t]
                headings.append(math.atan2(b.y - a.y, b.x - a.x))
            cands.append(CandidateTrajectory(tuple(waypoints), tuple(headings), conf))
        return tuple(cands)

    candidates = CandidateSet(
        turn_left=command_candidates(Command.TURN_LEFT),
        turn_right=command_candidates(Command.TURN_RIGHT),
        go_straight=command_candidates(Command.GO_STRAIGHT),
    )

    agents, agent_gt = _script_agents(rng, params, speed, half_width, horizon_len, offset_point, heading, normal)

    kind_name = "turn" if kind is ScenarioKind.TURN else "straight"
    scenario_id = f"{kind_name}-{seed & _MASK64:016x}"
    return Scenario(
        scenario_id=scenario_id,
        seed=seed,
        map=perceived,
        agents=agents,
        agent_gt=agent_gt,
        ego_pose=ego_pose,
        ego_dims=(params.ego_length, params.ego_width),
        command=command,
        candidates=candidates,
        ego_gt_future=ego_gt_future,
        scenario_class=ScenarioKind.TURN.value if kind is ScenarioKind.TURN else ScenarioKind.STRAIGHT.value,
    )


def _script_agents(rng, params, speed, half_width, horizon_len, offset_point, heading, normal):
    """Constant-velocity scripted agents: parked cars nudging into the corridor,
    pedestrians on the verge, and a leading vehicle that keeps its gap."""
    agents = []
    agent_gt = []
    for idx in range(params.n_agents):
        draw = rng.random()
        side = 1.0 if rng.random() < 0.5 else -1.0
        if draw < 0.4:  # parked vehicle slightly intruding from the roadside
            dims = (4.0, 1.7)
            s_a = float(rng.uniform(0.3, 0.95)) * horizon_len
            lateral = side * (half_width + 0.55)
            poses = tuple(Pose2(offset_point(s_a, lateral), heading(s_a)) for _ in range(T_F))
        elif draw < 0.75:  # pedestrian walking on the verge
            dims = (0.5, 0.5)
            s_a = float(rng.uniform(0.2, 0.9)) * horizon_len
            lateral = side * (half_width + 1.2)
            walk = float(rng.uniform(1.0, 1.4)) * (1.0 if rng.random() < 0.5 else -1.0)
            poses = tuple(
                Pose2(offset_point(s_a + walk * DT * (t + 1), lateral), heading(s_a))
                for t in range(T_F)
            )
        else:  # lead vehicle pulling away on the centerline
            dims = (4.2, 1.8)
            s_a = float(rng.uniform(1.05, 1.3)) * horizon_len
            v_lead = speed + float(rng.uniform(0.5, 1.5))
            poses = tuple(
                Pose2(offset_point(s_a + v_lead * DT * (t + 1), 0.0), heading(s_a + v_lead * DT * (t + 1)))
                for t in range(T_F)
            )

        base_conf = float(rng.uniform(0.55, 0.8))
        n_extra = int(rng.integers(0, 3))
        modes = [AgentMode(poses, base_conf)]
        if n_extra:
            share = (1.0 - base_conf) * 0.9 / n_extra
            for e in range(n_extra):
                drift = (0.5 + 0.5 * e) * (1.0 if e % 2 == 0 else -1.0)
                drifted = []
                for t, p in enumerate(poses):
                    ramp = (t + 1) / T_F
                    nx, ny = -math.sin(p.heading), math.cos(p.heading)
                    drifted.append(
                        Pose2(Point2(p.position.x + drift * ramp * nx, p.position.y + drift * ramp * ny), p.heading)
                    )
                modes.append(AgentMode(tuple(drifted), share))
        agents.append(AgentPrediction(f"agent-{idx}", dims, tuple(modes)))
        agent_gt.append(tuple(OrientedBox(p.position, p.heading, dims[0], dims[1]) for p in poses))
    return tuple(agents), tuple(agent_gt)


# ---------------------------------------------------------------------------
# serialization (schema v1)


def _pose_to_dict(p: Pose2) -> dict:
    return {"x": p.position.x, "y": p.position.y, "heading": p.heading}


def _box_to_dict(b: OrientedBox) -> dict:
    return {"cx": b.center.x, "cy": b.center.y, "heading": b.heading, "length": b.length, "width": b.width}


def _candidate_to_dict(c: CandidateTrajectory) -> dict:
    return {
        "confidence": c.confidence,
        "waypoints": [[p.x, p.y] for p in c.waypoints],
        "headings": list(c.headings),
    }


def scenario_to_dict(s: Scenario) -> dict:
    """Plain-data form of a scenario, schema v1."""
    return {
        "version": SCHEMA_VERSION,
        "id": s.scenario_id,
        "seed": s.seed,
        "scenario_class": s.scenario_class,
        "command": s.command.value,
        "ego": {
            "pose": _pose_to_dict(s.ego_pose),
            "dims": {"length": s.ego_dims[0], "width": s.ego_dims[1]},
        },
        "ego_gt_future": [_pose_to_dict(p) for p in s.ego_gt_future],
        "map": {
            "elements": [
                {
                    "kind": e.kind.value,
                    "points": [
                        {"mx": lp.mu.x, "my": lp.mu.y, "bx": lp.b[0], "by": lp.b[1]}
                        for lp in e.polyline.points
                    ],
                }
                for e in s.map.elements
            ],
            "drivable_area": [
                {
                    "outer": [[p.x, p.y] for p in poly.outer],
                    "holes": [[[p.x, p.y] for p in hole] for hole in poly.holes],
                }
                for poly in s.map.drivable_area.polygons
            ],
        },
        "agents": [
            {
                "id": a.agent_id,
                "dims": {"length": a.dims[0], "width": a.dims[1]},
                "modes": [
                    {"confidence": m.confidence, "trajectory": [_pose_to_dict(p) for p in m.trajectory]}
                    for m in a.modes
                ],
            }
            for a in s.agents
        ],
        "agent_gt": [[_box_to_dict(b) for b in seq] for seq in s.agent_gt],
        "candidates": {
            "TurnLeft": [_candidate_to_dict(c) for c in s.candidates.turn_left],
            "TurnRight": [_candidate_to_dict(c) for c in s.candidates.turn_right],
            "GoStraight": [_candidate_to_dict(c) for c in s.candidates.go_straight],
        },
    }


def save_scenario(s: Scenario, path: str | Path) -> None:
    """Write one scenario as indented JSON (floats keep full round-trip precision)."""
    text = json.dumps(scenario_to_dict(s), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _want(data, key: str, kind, path: str):
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"field '{path}' must be an object")
    if key not in data:
        raise ScenarioFormatError(f"missing field '{path}.{key}'" if path else f"missing field '{key}'")
    value = data[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioFormatError(f"field '{path}.{key}' must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ScenarioFormatError(f"field '{path}.{key}' must be {kind.__name__}")
    return value


def _parse_pose(data, path: str) -> Pose2:
    x = _want(data, "x", float, path)
    y = _want(data, "y", float, path)
    h = _want(data, "heading", float, path)
    try:
        return Pose2(Point2(x, y), h)
    except ValueError as e:
        raise ScenarioInvariantError(f"field '{path}': {e}") from None


def _parse_xy(value, path: str) -> Point2:
    if not (isinstance(value, list) and len(value) == 2):
        raise ScenarioFormatError(f"field '{path}' must be an [x, y] pair")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioFormatError(f"field '{path}' must hold numbers")
    try:
        return Point2(float(value[0]), float(value[1]))
    except ValueError as e:
        raise ScenarioInvariantError(f"field '{path}': {e}") from None


def _invariant(builder, path: str):
    try:
        return builder()
    except ScenarioFormatError:
        raise
    except ValueError as e:
        raise ScenarioInvariantError(f"field '{path}': {e}") from None


def scenario_from_dict(data: dict, source: str = "<dict>") -> Scenario:
    """Validate and rebuild a scenario from its plain-data form."""
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"{source}: top level must be an object")
    if "version" not in data:
        raise ScenarioVersionError(f"{source}: missing schema 'version' field")
    if data["version"] != SCHEMA_VERSION:
        raise ScenarioVersionError(
            f"{source}: unsupported schema version {data['version']!r}, expected {SCHEMA_VERSION}"
        )

    scenario_id = _want(data, "id", str, "")
    seed = _want(data, "seed", int, "")
    scenario_class = _want(data, "scenario_class", str, "")
    if scenario_class not in ("Turn", "Straight"):
        raise ScenarioInvariantError(f"field 'scenario_class': must be Turn or Straight, got {scenario_class!r}")
    command_name = _want(data, "command", str, "")
    try:
        command = Command(command_name)
    except ValueError:
        raise ScenarioInvariantError(f"field 'command': unknown command {command_name!r}") from None

    ego = _want(data, "ego", dict, "")
    ego_pose = _parse_pose(_want(ego, "pose", dict, "ego"), "ego.pose")
    dims_d = _want(ego, "dims", dict, "ego")
    ego_dims = (_want(dims_d, "length", float, "ego.dims"), _want(dims_d, "width", float, "ego.dims"))
    if ego_dims[0] <= 0 or ego_dims[1] <= 0:
        raise ScenarioInvariantError(f"field 'ego.dims': dimensions must be positive, got {ego_dims}")

    future_raw = _want(data, "ego_gt_future", list, "")
    ego_gt_future = tuple(
        _parse_pose(p, f"ego_gt_future[{i}]") for i, p in enumerate(future_raw)
    )

    map_d = _want(data, "map", dict, "")
    elements = []
    for ei, el in enumerate(_want(map_d, "elements", list, "map")):
        epath = f"map.elements[{ei}]"
        kind_name = _want(el, "kind", str, epath)
        try:
            kind = MapElementKind(kind_name)
        except ValueError:
            raise ScenarioInvariantError(f"field '{epath}.kind': unknown kind {kind_name!r}") from None
        lps = []
        for pi, pt in enumerate(_want(el, "points", list, epath)):
            ppath = f"{epath}.points[{pi}]"
            mx = _want(pt, "mx", float, ppath)
            my = _want(pt, "my", float, ppath)
            bx = _want(pt, "bx", float, ppath)
            by = _want(pt, "by", float, ppath)
            if bx < B_MIN:
                raise ScenarioInvariantError(f"field '{ppath}.bx': scale must be >= {B_MIN}, got {bx}")
            if by < B_MIN:
                raise ScenarioInvariantError(f"field '{ppath}.by': scale must be >= {B_MIN}, got {by}")
            lps.append(_invariant(lambda: LaplacePoint(Point2(mx, my), (bx, by)), ppath))
        polyline = _invariant(lambda: UncertainPolyline(tuple(lps)), f"{epath}.points")
        elements.append(MapElement(polyline, kind))

    polys = []
    for gi, poly_d in enumerate(_want(map_d, "drivable_area", list, "map")):
        gpath = f"map.drivable_area[{gi}]"
        outer = tuple(_parse_xy(v, f"{gpath}.outer[{k}]") for k, v in enumerate(_want(poly_d, "outer", list, gpath)))
        holes = tuple(
            tuple(_parse_xy(v, f"{gpath}.holes[{hi}][{k}]") for k, v in enumerate(hole))
            for hi, hole in enumerate(_want(poly_d, "holes", list, gpath))
        )
        polys.append(_invariant(lambda: Polygon(outer, holes), gpath))
    drivable = _invariant(lambda: MultiPolygon(tuple(polys)), "map.drivable_area")
    uncertain_map = _invariant(lambda: UncertainMap(tuple(elements), drivable), "map")

    agents = []
    for ai, ag in enumerate(_want(data, "agents", list, "")):
        apath = f"agents[{ai}]"
        agent_id = _want(ag, "id", str, apath)
        adims_d = _want(ag, "dims", dict, apath)
        adims = (_want(adims_d, "length", float, f"{apath}.dims"), _want(adims_d, "width", float, f"{apath}.dims"))
        modes = []
        for mi, mo in enumerate(_want(ag, "modes", list, apath)):
            mpath = f"{apath}.modes[{mi}]"
            conf = _want(mo, "confidence", float, mpath)
            traj = tuple(
                _parse_pose(p, f"{mpath}.trajectory[{k}]")
                for k, p in enumerate(_want(mo, "trajectory", list, mpath))
            )
            modes.append(_invariant(lambda: AgentMode(traj, conf), mpath))
        agents.append(_invariant(lambda: AgentPrediction(agent_id, adims, tuple(modes)), apath))

    agent_gt = []
    for ai, seq in enumerate(_want(data, "agent_gt", list, "")):
        if not isinstance(seq, list):
            raise ScenarioFormatError(f"field 'agent_gt[{ai}]' must be a list")
        boxes = []
        for bi, bd in enumerate(seq):
            bpath = f"agent_gt[{ai}][{bi}]"
            cx = _want(bd, "cx", float, bpath)
            cy = _want(bd, "cy", float, bpath)
            h = _want(bd, "heading", float, bpath)
            ln = _want(bd, "length", float, bpath)
            w = _want(bd, "width", float, bpath)
            boxes.append(_invariant(lambda: OrientedBox(Point2(cx, cy), h, ln, w), bpath))
        agent_gt.append(tuple(boxes))

    cands_d = _want(data, "candidates", dict, "")

    def parse_command_list(key: str) -> tuple[CandidateTrajectory, ...]:
        out = []
        for ci, cd in enumerate(_want(cands_d, key, list, "candidates")):
            cpath = f"candidates.{key}[{ci}]"
            conf = _want(cd, "confidence", float, cpath)
            wps = tuple(
                _parse_xy(v, f"{cpath}.waypoints[{k}]")
                for k, v in enumerate(_want(cd, "waypoints", list, cpath))
            )
            heads_raw = _want(cd, "headings", list, cpath)
            for k, hv in enumerate(heads_raw):
                if isinstance(hv, bool) or not isinstance(hv, (int, float)):
                    raise ScenarioFormatError(f"field '{cpath}.headings[{k}]' must be a number")
            out.append(
                _invariant(
                    lambda: CandidateTrajectory(wps, tuple(float(h) for h in heads_raw), conf), cpath
                )
            )
        return tuple(out)

    candidates = _invariant(
        lambda: CandidateSet(
            turn_left=parse_command_list("TurnLeft"),
            turn_right=parse_command_list("TurnRight"),
            go_straight=parse_command_list("GoStraight"),
        ),
        "candidates",
    )

    return _invariant(
        lambda: Scenario(
            scenario_id=scenario_id,
            seed=seed,
            map=uncertain_map,
            agents=tuple(agents),
            agent_gt=tuple(agent_gt),
            ego_pose=ego_pose,
            ego_dims=ego_dims,
            command=command,
            candidates=candidates,
            ego_gt_future=ego_gt_future,
            scenario_class=scenario_class,
        ),
        "<scenario>",
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate one scenario file; errors name the offending field."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return scenario_from_dict(data, source=str(path))


# ---------------------------------------------------------------------------
# suites


def generate_suite(
    out_dir: str | Path,
    count: int,
    turn_fraction: float,
    params: GeneratorParams,
    master_seed: int,
) -> Path:
    """Write `count` scenario files plus a manifest; fully determined by master_seed.

    The first round(count * turn_fraction) scenarios are turns, the rest straight.
    Returns the manifest path.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0.0 <= turn_fraction <= 1.0:
        raise ValueError(f"turn_fraction must be in [0, 1], got {turn_fraction}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_turn = round(count * turn_fraction)
    entries = []
    for i in range(count):
        kind = ScenarioKind.TURN if i < n_turn else ScenarioKind.STRAIGHT
        s = generate_scenario(kind, params, scenario_seed(master_seed, i))
        fname = f"{s.scenario_id}.json"
        save_scenario(s, out_dir / fname)
        entries.append({"id": s.scenario_id, "kind": kind.value, "path": fname})
    manifest = {
        "version": SCHEMA_VERSION,
        "master_seed": master_seed,
        "count": count,
        "turn_fraction": turn_fraction,
        "params": asdict(params),
        "scenarios": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return manifest_path


def load_suite(manifest_path: str | Path) -> tuple[dict, list[Path]]:
    """Read a suite manifest; returns (manifest dict, resolved scenario paths)."""
    manifest_path = Path(manifest_path)
    text = manifest_path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(
            f"{manifest_path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(data, dict) or "version" not in data:
        raise ScenarioVersionError(f"{manifest_path}: missing schema 'version' field")
    if data["version"] != SCHEMA_VERSION:
        raise ScenarioVersionError(
            f"{manifest_path}: unsupported schema version {data['version']!r}, expected {SCHEMA_VERSION}"
        )
    entries = _want(data, "scenarios", list, "")
    paths = []
    for i, entry in enumerate(entries):
        rel = _want(entry, "path", str, f"scenarios[{i}]")
        paths.append(manifest_path.parent / rel)
    return data, paths
