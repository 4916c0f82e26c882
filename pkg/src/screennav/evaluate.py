"""Static and interactive benchmark harness.

Static scoring replays supervised step instances: a step counts when the
action type matches and, for click references, the click lands in the target
box; a task counts when all of its steps do. Interactive scoring rolls each
task out N times with stable per-rollout seeds and reports Pass@k per path-
length bucket. Reports print as a fixed-width table and round-trip through a
JSON sidecar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .agents import AgentInterface
from .compositor import EnvBundle
from .episode import ActionKind, Episode, Observation, TaskSpec, parse_action
from .errors import ActionTextError
from .graph import distances_from
from .rewards import reward_coord, reward_type
from .seeding import derive_seed
from .tasks import StepInstance

BUCKET_MIN = 1


def _bucket_range(buckets: Sequence[int]) -> List[int]:
    return list(range(BUCKET_MIN, (max(buckets) if buckets else BUCKET_MIN) + 1))


@dataclass
class StaticReport:
    instances: int
    tasks: int
    step_accuracy: float
    task_accuracy: float
    edge_accuracy: float
    path_accuracy: float
    step_by_bucket: Dict[int, float]
    task_by_bucket: Dict[int, float]
    instance_counts: Dict[int, int]
    task_counts: Dict[int, int]

    def to_dict(self) -> dict:
        return {
            "type": "static",
            "instances": self.instances,
            "tasks": self.tasks,
            "step_accuracy": self.step_accuracy,
            "task_accuracy": self.task_accuracy,
            "edge_accuracy": self.edge_accuracy,
            "path_accuracy": self.path_accuracy,
            "step_by_bucket": {str(k): v for k, v in self.step_by_bucket.items()},
            "task_by_bucket": {str(k): v for k, v in self.task_by_bucket.items()},
            "instance_counts": {str(k): v for k, v in self.instance_counts.items()},
            "task_counts": {str(k): v for k, v in self.task_counts.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StaticReport":
        return cls(
            instances=data["instances"],
            tasks=data["tasks"],
            step_accuracy=data["step_accuracy"],
            task_accuracy=data["task_accuracy"],
            edge_accuracy=data["edge_accuracy"],
            path_accuracy=data["path_accuracy"],
            step_by_bucket={int(k): v for k, v in data["step_by_bucket"].items()},
            task_by_bucket={int(k): v for k, v in data["task_by_bucket"].items()},
            instance_counts={int(k): v for k, v in data["instance_counts"].items()},
            task_counts={int(k): v for k, v in data["task_counts"].items()},
        )


def score_step(raw_text: str, instance: StepInstance) -> bool:
    """Type must match; clicks must also land inside the reference box."""
    try:
        pred = parse_action(raw_text)
    except ActionTextError:
        return False
    if not reward_type(pred, instance.reference):
        return False
    if instance.reference.kind is ActionKind.CLICK:
        return bool(reward_coord(pred, instance.reference))
    return True


def eval_static(instances: Sequence[StepInstance], agent: AgentInterface) -> StaticReport:
    if not instances:
        raise ValueError("no instances to evaluate")
    step_hits: Dict[int, List[int]] = {}
    task_steps: Dict[Tuple[int, int], List[bool]] = {}
    task_bucket: Dict[Tuple[int, int], int] = {}
    for instance in instances:
        observation = Observation(
            instruction=instance.instruction,
            history=instance.history_prefix,
            screen_path=instance.screen_path,
            node=instance.node,
        )
        correct = score_step(agent.act(observation), instance)
        bucket = instance.distance_bucket
        step_hits.setdefault(bucket, []).append(int(correct))
        key = (instance.task.start, instance.task.goal)
        task_steps.setdefault(key, []).append(correct)
        task_bucket[key] = bucket

    buckets = _bucket_range(list(step_hits))
    step_by_bucket = {}
    instance_counts = {}
    for bucket in buckets:
        hits = step_hits.get(bucket, [])
        instance_counts[bucket] = len(hits)
        step_by_bucket[bucket] = 100.0 * sum(hits) / len(hits) if hits else 0.0

    task_by_bucket = {}
    task_counts = {}
    task_ok_by_bucket: Dict[int, List[bool]] = {}
    for key, steps in task_steps.items():
        task_ok_by_bucket.setdefault(task_bucket[key], []).append(all(steps))
    for bucket in buckets:
        oks = task_ok_by_bucket.get(bucket, [])
        task_counts[bucket] = len(oks)
        task_by_bucket[bucket] = 100.0 * sum(oks) / len(oks) if oks else 0.0

    total = sum(instance_counts.values())
    correct_total = sum(sum(step_hits.get(b, [])) for b in buckets)
    edge_hits = step_hits.get(1, [])
    path_hits = [h for b in buckets if b >= 2 for h in step_hits.get(b, [])]
    all_tasks = [ok for oks in task_ok_by_bucket.values() for ok in oks]
    return StaticReport(
        instances=total,
        tasks=len(all_tasks),
        step_accuracy=100.0 * correct_total / total,
        task_accuracy=100.0 * sum(all_tasks) / len(all_tasks),
        edge_accuracy=100.0 * sum(edge_hits) / len(edge_hits) if edge_hits else 0.0,
        path_accuracy=100.0 * sum(path_hits) / len(path_hits) if path_hits else 0.0,
        step_by_bucket=step_by_bucket,
        task_by_bucket=task_by_bucket,
        instance_counts=instance_counts,
        task_counts=task_counts,
    )


@dataclass
class RolloutRecord:
    task: TaskSpec
    rollout: int
    success: bool
    steps: int
    nodes: List[int]
    events: List[str]
    icon_kinds: List[Optional[str]]


@dataclass
class InteractiveReport:
    tasks: int
    n: int
    pass_at: Dict[int, float]
    pass_at_by_bucket: Dict[int, Dict[int, float]]
    task_counts: Dict[int, int]
    mean_episode_length: float
    recovery_count: int
    rollouts: List[RolloutRecord] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "type": "interactive",
            "tasks": self.tasks,
            "n": self.n,
            "pass_at": {str(k): v for k, v in self.pass_at.items()},
            "pass_at_by_bucket": {
                str(k): {str(b): v for b, v in row.items()}
                for k, row in self.pass_at_by_bucket.items()
            },
            "task_counts": {str(k): v for k, v in self.task_counts.items()},
            "mean_episode_length": self.mean_episode_length,
            "recovery_count": self.recovery_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InteractiveReport":
        return cls(
            tasks=data["tasks"],
            n=data["n"],
            pass_at={int(k): v for k, v in data["pass_at"].items()},
            pass_at_by_bucket={
                int(k): {int(b): v for b, v in row.items()}
                for k, row in data["pass_at_by_bucket"].items()
            },
            task_counts={int(k): v for k, v in data["task_counts"].items()},
            mean_episode_length=data["mean_episode_length"],
            recovery_count=data["recovery_count"],
        )


def rollout_seed(task: TaskSpec, rollout: int) -> int:
    """Stable per-rollout seed so Pass@k prefixes survive growing N."""
    return derive_seed(0, "rollout", task.start, task.goal, rollout)


def run_episode(
    env: EnvBundle,
    task: TaskSpec,
    agent: AgentInterface,
    max_rounds: int,
    allow_complete: bool,
    episode_seed: int,
) -> Episode:
    if hasattr(agent, "seed_episode"):
        agent.seed_episode(episode_seed)
    episode = Episode(env=env, task=task, max_rounds=max_rounds, allow_complete=allow_complete)
    while not episode.done:
        episode.step_text(agent.act(episode.observation()))
    return episode


def _is_recovery(record: RolloutRecord, task: TaskSpec) -> bool:
    """Success after leaving a shortest path: more moves than the distance."""
    if not record.success:
        return False
    moves = sum(1 for e in record.events if e == "move")
    return task.distance is not None and moves > task.distance


def has_backtrack_recovery(env: EnvBundle, record: RolloutRecord) -> bool:
    """True when a successful trace makes a move that fails to shrink the
    goal distance and immediately undoes it with a back click."""
    if not record.success:
        return False
    goal = record.task.goal
    nodes_before = [record.task.start] + record.nodes[:-1]
    for i in range(len(record.events) - 1):
        if record.events[i] != "move":
            continue
        u, v = nodes_before[i], record.nodes[i]
        if distances_from(env.tmap, v)[goal] >= distances_from(env.tmap, u)[goal]:
            if record.events[i + 1] == "move" and record.icon_kinds[i + 1] == "back":
                return True
    return False


def eval_interactive(
    env: EnvBundle,
    tasks: Sequence[TaskSpec],
    agent: AgentInterface,
    n: int = 1,
    max_rounds: int = 12,
    allow_complete: bool = True,
    keep_rollouts: bool = False,
) -> InteractiveReport:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not tasks:
        raise ValueError("no tasks to evaluate")
    records: List[RolloutRecord] = []
    successes: Dict[Tuple[int, int], List[bool]] = {}
    lengths: List[int] = []
    recovery = 0
    for task in tasks:
        outcomes = []
        for k in range(n):
            episode = run_episode(env, task, agent, max_rounds, allow_complete, rollout_seed(task, k))
            record = RolloutRecord(
                task=task,
                rollout=k,
                success=episode.success,
                steps=episode.step_index,
                nodes=[t.node_after for t in episode.trace],
                events=[t.event for t in episode.trace],
                icon_kinds=[t.icon_kind for t in episode.trace],
            )
            outcomes.append(episode.success)
            lengths.append(episode.step_index)
            if _is_recovery(record, task):
                recovery += 1
            if keep_rollouts:
                records.append(record)
        successes[(task.start, task.goal)] = outcomes

    buckets = sorted({t.distance for t in tasks if t.distance is not None})
    bucket_of = {(t.start, t.goal): t.distance for t in tasks}
    pass_at: Dict[int, float] = {}
    pass_at_by_bucket: Dict[int, Dict[int, float]] = {}
    task_counts: Dict[int, int] = {
        b: sum(1 for t in tasks if t.distance == b) for b in buckets
    }
    for k in range(1, n + 1):
        solved = {key: any(out[:k]) for key, out in successes.items()}
        pass_at[k] = 100.0 * sum(solved.values()) / len(solved)
        row = {}
        for b in buckets:
            keys = [key for key, bucket in bucket_of.items() if bucket == b]
            row[b] = 100.0 * sum(solved[key] for key in keys) / len(keys) if keys else 0.0
        pass_at_by_bucket[k] = row
    return InteractiveReport(
        tasks=len(tasks),
        n=n,
        pass_at=pass_at,
        pass_at_by_bucket=pass_at_by_bucket,
        task_counts=task_counts,
        mean_episode_length=sum(lengths) / len(lengths),
        recovery_count=recovery,
        rollouts=records,
    )


def _format_table(header: List[str], rows: List[List[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = []
    for row in [header] + rows:
        lines.append("  ".join(str(cell).rjust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def render_report(report) -> str:
    """Fixed-width table with Path@1..Path@N columns then Overall."""
    if isinstance(report, StaticReport):
        buckets = sorted(report.step_by_bucket)
        header = ["metric"] + [f"Path@{b}" for b in buckets] + ["Overall"]
        rows = [
            ["step"] + [f"{report.step_by_bucket[b]:.2f}" for b in buckets] + [f"{report.step_accuracy:.2f}"],
            ["task"] + [f"{report.task_by_bucket[b]:.2f}" for b in buckets] + [f"{report.task_accuracy:.2f}"],
        ]
        footer = (
            f"edge {report.edge_accuracy:.2f}  path {report.path_accuracy:.2f}  "
            f"instances {report.instances}  tasks {report.tasks}\n"
        )
        return _format_table(header, rows) + footer
    if isinstance(report, InteractiveReport):
        buckets = sorted(report.task_counts)
        header = ["metric"] + [f"Path@{b}" for b in buckets] + ["Overall"]
        rows = []
        for k in sorted(report.pass_at):
            row = [f"pass@{k}"]
            row += [f"{report.pass_at_by_bucket[k][b]:.2f}" for b in buckets]
            row += [f"{report.pass_at[k]:.2f}"]
            rows.append(row)
        footer = (
            f"tasks {report.tasks}  mean_len {report.mean_episode_length:.2f}  "
            f"recoveries {report.recovery_count}\n"
        )
        return _format_table(header, rows) + footer
    raise TypeError(f"not a report: {type(report)!r}")


def write_report(report, path: str | Path) -> Tuple[Path, Path]:
    """Write the table to ``path`` and a JSON sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report), encoding="utf-8")
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path, sidecar


def read_report(path: str | Path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("type") == "static":
        return StaticReport.from_dict(data)
    if data.get("type") == "interactive":
        return InteractiveReport.from_dict(data)
    raise ValueError(f"not a report sidecar: {path}")
