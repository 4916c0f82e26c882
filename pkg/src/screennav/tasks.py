"""Task enumeration, trajectory synthesis, and dataset records.

A task is an ordered pair of distinct screens. Its shortest trajectory is
the BFS path plus a final complete step, so a distance-d task expands into
d click step-instances and one complete instance. Redundant trajectories
splice in wrong-step/undo detours. Caption and grounding records pair icon
occurrences with query points and names. All files are newline-delimited
JSON with a schema header line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .compositor import EnvBundle, IconInstance
from .episode import (
    Action,
    ActionKind,
    COMPLETE_EXPLANATION,
    TaskSpec,
    click_explanation,
    compose_output,
    format_click_action,
    history_click_line,
)
from .errors import DatasetFormatError
from .graph import EdgeKind, NodeId, distances_from, shortest_path
from .rewards import ReferenceStep
from .seeding import rng_for

DATASET_SCHEMA = "screennav-dataset"
DATASET_VERSION = 1

DEFAULT_ICON_MULTIPLICITY = 10


class TrajectoryKind(str, Enum):
    SHORTEST = "shortest"
    REDUNDANT = "redundant"


@dataclass(frozen=True)
class TrajectoryStep:
    node_before: NodeId
    action: Action
    explanation: str
    node_after: NodeId
    target_icon: Optional[IconInstance]  # None for the final complete step


@dataclass(frozen=True)
class Trajectory:
    task: TaskSpec
    steps: Tuple[TrajectoryStep, ...]
    kind: TrajectoryKind


@dataclass(frozen=True)
class StepInstance:
    """One supervised record: screen + history prefix + reference step."""

    instruction: str
    history_prefix: Tuple[str, ...]
    node: NodeId
    screen_path: str
    reference: ReferenceStep
    distance_bucket: int
    task: TaskSpec
    step_index: int

    def reference_text(self) -> str:
        if self.reference.kind is ActionKind.CLICK:
            action_text = format_click_action(*self.reference.action.point)
        else:
            action_text = "complete"
        return compose_output(self.reference.explanation, action_text)


def enumerate_tasks(env: EnvBundle, node_set: Iterable[NodeId]) -> List[TaskSpec]:
    """All ordered pairs of distinct nodes, distance-annotated, sorted by
    (start, goal)."""
    members = sorted(set(node_set))
    if len(members) < 2:
        raise ValueError("need at least two nodes to enumerate tasks")
    tasks: List[TaskSpec] = []
    for start in members:
        dist = distances_from(env.tmap, start)
        for goal in members:
            if goal != start:
                tasks.append(TaskSpec(start=start, goal=goal, distance=dist[goal]))
    return tasks


def _click_step(env: EnvBundle, node: NodeId, target: NodeId) -> TrajectoryStep:
    icon = env.screen(node).icon_for_target(target)
    x, y = icon.bbox.center()
    explanation = click_explanation(icon.asset.name, node)
    action = Action(ActionKind.CLICK, x=x, y=y, explanation=explanation)
    return TrajectoryStep(node, action, explanation, target, icon)


def _complete_step(node: NodeId) -> TrajectoryStep:
    action = Action(ActionKind.COMPLETE, explanation=COMPLETE_EXPLANATION)
    return TrajectoryStep(node, action, COMPLETE_EXPLANATION, node, None)


def synth_trajectory(
    env: EnvBundle,
    task: TaskSpec,
    kind: TrajectoryKind = TrajectoryKind.SHORTEST,
    seed: int = 0,
    max_rounds: int = 12,
) -> Trajectory:
    """Shortest trajectory, or one with seeded wrong-step/undo detours.

    A detour takes some non-path forward or back transition and immediately
    undoes it, so redundant trajectories still replay to the goal and stay
    within the round limit.
    """
    hops = shortest_path(env.tmap, task.start, task.goal)
    steps: List[TrajectoryStep] = []
    current = task.start
    detour_positions: Dict[int, int] = {}
    if kind is TrajectoryKind.REDUNDANT:
        rng = rng_for(seed, "detours", task.start, task.goal)
        budget = (max_rounds - 1 - len(hops)) // 2
        wanted = rng.choice((1, 2))
        count = max(0, min(wanted, budget))
        if count and hops:
            for pos in rng.sample(range(len(hops)), min(count, len(hops))):
                detour_positions[pos] = detour_positions.get(pos, 0) + 1

    for position, (kind_, target) in enumerate(hops):
        for _ in range(detour_positions.get(position, 0)):
            detour = _pick_detour(env, current, target)
            if detour is None:
                continue
            wrong_target, undo_target = detour
            steps.append(_click_step(env, current, wrong_target))
            steps.append(_click_step(env, wrong_target, undo_target))
        steps.append(_click_step(env, current, target))
        current = target
    steps.append(_complete_step(task.goal))
    return Trajectory(task=task, steps=tuple(steps), kind=kind)


def _pick_detour(
    env: EnvBundle, node: NodeId, correct_target: NodeId
) -> Optional[Tuple[NodeId, NodeId]]:
    """A wrong transition from ``node`` that one step undoes: a forward move
    is undone by back, a back move by the forward icon returning here. Home
    jumps are never one-step reversible, so they are excluded."""
    candidates = [
        t.target
        for t in env.tmap.transitions(node)
        if t.kind is not EdgeKind.HOME and t.target != correct_target
    ]
    if not candidates:
        return None
    rng = rng_for(env.seed, "detour-pick", node, correct_target)
    return rng.choice(candidates), node


def synth_step_instances(
    env: EnvBundle,
    tasks: Sequence[TaskSpec],
    kind: TrajectoryKind = TrajectoryKind.SHORTEST,
    seed: int = 0,
) -> List[StepInstance]:
    """Expand every task's trajectory into step instances."""
    out: List[StepInstance] = []
    for task in tasks:
        traj = synth_trajectory(env, task, kind, seed)
        out.extend(expand_steps(env, traj))
    return out


def expand_steps(env: EnvBundle, traj: Trajectory) -> List[StepInstance]:
    """One instance per step, complete step included; instance t carries the
    ground-truth history of steps before t."""
    instances: List[StepInstance] = []
    history: List[str] = []
    distance = traj.task.distance
    if distance is None:
        distance = len(shortest_path(env.tmap, traj.task.start, traj.task.goal))
    for index, step in enumerate(traj.steps, start=1):
        reference = ReferenceStep(
            action=step.action,
            explanation=step.explanation,
            screen=env.screen(step.node_before),
            target_icon=step.target_icon,
        )
        instances.append(
            StepInstance(
                instruction=traj.task.instruction,
                history_prefix=tuple(history),
                node=step.node_before,
                screen_path=env.screen_image_name(step.node_before),
                reference=reference,
                distance_bucket=distance,
                task=traj.task,
                step_index=index,
            )
        )
        if step.action.kind is ActionKind.CLICK:
            assert step.target_icon is not None
            history.append(history_click_line(index, step.target_icon.asset.name, step.node_before))
    return instances


@dataclass(frozen=True)
class IconOccurrence:
    node: NodeId
    instance: IconInstance


def _occurrences(env: EnvBundle) -> Dict[int, List[IconOccurrence]]:
    table: Dict[int, List[IconOccurrence]] = {}
    for node in sorted(env.screens):
        for icon in env.screens[node].icons:
            table.setdefault(icon.asset.icon_id, []).append(IconOccurrence(node, icon))
    return table


def synth_icon_data(
    env: EnvBundle,
    multiplicity: int = DEFAULT_ICON_MULTIPLICITY,
    seed: int = 0,
) -> Tuple[List[dict], List[dict]]:
    """Caption and grounding records, ``multiplicity`` of each per unique
    asset. Caption: (screen, point) -> name. Grounding: (screen, name) ->
    bbox. Paired records share one sampled occurrence."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be >= 1")
    captions: List[dict] = []
    grounding: List[dict] = []
    occurrences = _occurrences(env)
    for asset in env.assets:
        occs = occurrences.get(asset.icon_id)
        if not occs:
            continue
        rng = rng_for(seed, "icon-data", asset.icon_id)
        for sample in range(multiplicity):
            occ = occs[rng.randrange(len(occs))]
            bbox = occ.instance.bbox
            px = rng.randint(bbox.x0, bbox.x1 - 1)
            py = rng.randint(bbox.y0, bbox.y1 - 1)
            captions.append(
                {
                    "kind": "caption",
                    "node": occ.node,
                    "screen": env.screen_image_name(occ.node),
                    "point": [px, py],
                    "name": asset.name,
                    "sample": sample,
                }
            )
            grounding.append(
                {
                    "kind": "grounding",
                    "node": occ.node,
                    "screen": env.screen_image_name(occ.node),
                    "name": asset.name,
                    "bbox": bbox.to_list(),
                    "sample": sample,
                }
            )
    return captions, grounding


def step_instance_to_record(instance: StepInstance) -> dict:
    ref = instance.reference
    record = {
        "kind": "step",
        "task": {
            "start": instance.task.start,
            "goal": instance.task.goal,
            "distance": instance.distance_bucket,
        },
        "step_index": instance.step_index,
        "instruction": instance.instruction,
        "history": list(instance.history_prefix),
        "node": instance.node,
        "screen": instance.screen_path,
        "ref_action": ref.action.kind.value,
        "ref_explanation": ref.explanation,
    }
    if ref.kind is ActionKind.CLICK:
        record["ref_point"] = list(ref.action.point)
        assert ref.target_icon is not None
        record["target_name"] = ref.target_icon.asset.name
        record["target_bbox"] = ref.target_icon.bbox.to_list()
    return record


def step_instance_from_record(env: EnvBundle, record: dict) -> StepInstance:
    task = TaskSpec(
        start=record["task"]["start"],
        goal=record["task"]["goal"],
        distance=record["task"]["distance"],
    )
    screen = env.screen(record["node"])
    if record["ref_action"] == ActionKind.CLICK.value:
        x, y = record["ref_point"]
        explanation = record["ref_explanation"]
        action = Action(ActionKind.CLICK, x=x, y=y, explanation=explanation)
        target = None
        for icon in screen.icons:
            if icon.asset.name == record["target_name"] and icon.bbox.to_list() == record["target_bbox"]:
                target = icon
                break
        if target is None:
            raise DatasetFormatError(
                f"record targets unknown icon {record['target_name']!r} on node {record['node']}"
            )
    else:
        action = Action(ActionKind.COMPLETE, explanation=record["ref_explanation"])
        target = None
    reference = ReferenceStep(
        action=action,
        explanation=record["ref_explanation"],
        screen=screen,
        target_icon=target,
    )
    return StepInstance(
        instruction=record["instruction"],
        history_prefix=tuple(record["history"]),
        node=record["node"],
        screen_path=record["screen"],
        reference=reference,
        distance_bucket=record["task"]["distance"],
        task=task,
        step_index=record["step_index"],
    )


def task_to_record(task: TaskSpec) -> dict:
    return {
        "kind": "task",
        "start": task.start,
        "goal": task.goal,
        "distance": task.distance,
        "instruction": task.instruction,
    }


def task_from_record(record: dict) -> TaskSpec:
    return TaskSpec(start=record["start"], goal=record["goal"], distance=record["distance"])


def write_dataset(records: Sequence[dict], path: str | Path, kind: str = "mixed") -> Path:
    """Write newline-delimited JSON with a schema header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "schema": DATASET_SCHEMA,
        "version": DATASET_VERSION,
        "kind": kind,
        "count": len(records),
    }
    with path.open("w", encoding="utf-8") as handle:
        handle.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for record in records:
            handle.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    return path


def read_dataset(path: str | Path) -> Tuple[str, List[dict]]:
    """Read a dataset file; returns (kind, records). Corrupt lines raise
    DatasetFormatError naming the line number."""
    path = Path(path)
    records: List[dict] = []
    kind = "mixed"
    expected: Optional[int] = None
    saw_header = False
    with path.open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{number}: corrupt record: {exc}") from exc
            if number == 1:
                if obj.get("schema") != DATASET_SCHEMA:
                    raise DatasetFormatError(f"{path}:1: not a dataset file")
                if obj.get("version") != DATASET_VERSION:
                    raise DatasetFormatError(
                        f"{path}:1: unsupported dataset version {obj.get('version')!r}"
                    )
                kind = obj.get("kind", "mixed")
                expected = obj.get("count")
                saw_header = True
            else:
                records.append(obj)
    if not saw_header:
        raise DatasetFormatError(f"{path}: missing dataset header")
    if expected is not None and expected != len(records):
        raise DatasetFormatError(
            f"{path}: header promises {expected} records, found {len(records)}"
        )
    return kind, records
