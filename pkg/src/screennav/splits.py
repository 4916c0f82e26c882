"""Dataset split exporter.

The root's depth-1 subtrees carry roles (two SFT, two RL, one TEST by
default). Every per-subtree dataset is computed over that subtree plus the
root. The SFT export additionally folds in single-transition instances from
every subtree, plus the icon caption/grounding data, mirroring how the
training mix is composed; the TEST export is the interactive task list.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .compositor import EnvBundle
from .graph import ROOT, SplitAssignment, SplitRole, partition_subtrees
from .tasks import (
    DEFAULT_ICON_MULTIPLICITY,
    StepInstance,
    TaskSpec,
    TrajectoryKind,
    enumerate_tasks,
    step_instance_to_record,
    synth_icon_data,
    synth_step_instances,
    task_to_record,
    write_dataset,
)

EDGES_FILE = "edges.jsonl"
PATHS_FILE = "paths.jsonl"
CAPTIONS_FILE = "captions.jsonl"
GROUNDING_FILE = "grounding.jsonl"
INTERACTIVE_FILE = "tasks_interactive.jsonl"


def default_assignment(env: EnvBundle) -> SplitAssignment:
    """2:2:1 SFT/RL/TEST over the root's children (TEST is the last one)."""
    children = env.graph.children(ROOT)
    if len(children) < 3:
        roles = [SplitRole.TEST] * len(children)
    else:
        roles = [SplitRole.SFT, SplitRole.SFT] + [SplitRole.RL] * (len(children) - 3) + [SplitRole.TEST]
    return partition_subtrees(env.graph, roles)


def subtree_tasks(env: EnvBundle, assignment: SplitAssignment, role: SplitRole) -> List[List[TaskSpec]]:
    """Per-subtree task lists for a role, each over subtree nodes plus root."""
    out = []
    for nodes in assignment.subtree_node_sets(role, env.graph):
        out.append(enumerate_tasks(env, set(nodes) | {ROOT}))
    return out


def edge_tasks_all_subtrees(env: EnvBundle, assignment: SplitAssignment) -> List[TaskSpec]:
    """Distance-1 tasks over every subtree(+root), across all roles."""
    tasks: List[TaskSpec] = []
    for role in (SplitRole.SFT, SplitRole.RL, SplitRole.TEST):
        for task_list in subtree_tasks(env, assignment, role):
            tasks.extend(t for t in task_list if t.distance == 1)
    return sorted(tasks, key=lambda t: (t.start, t.goal))


def path_instances(env: EnvBundle, assignment: SplitAssignment, role: SplitRole, seed: int = 0) -> List[StepInstance]:
    """All step instances across the role's subtrees (shortest paths)."""
    instances: List[StepInstance] = []
    for task_list in subtree_tasks(env, assignment, role):
        instances.extend(synth_step_instances(env, task_list, TrajectoryKind.SHORTEST, seed))
    return instances


def edge_instances(env: EnvBundle, assignment: SplitAssignment, seed: int = 0) -> List[StepInstance]:
    return synth_step_instances(env, edge_tasks_all_subtrees(env, assignment), TrajectoryKind.SHORTEST, seed)


def export_splits(
    env: EnvBundle,
    out_dir: str | Path,
    assignment: Optional[SplitAssignment] = None,
    multiplicity: int = DEFAULT_ICON_MULTIPLICITY,
    seed: int = 0,
    only_role: Optional[SplitRole] = None,
    only_kind: Optional[str] = None,
) -> Dict[str, int]:
    """Write dataset files under ``out_dir/<role>/``; returns per-file record
    counts keyed by relative path."""
    if assignment is None:
        assignment = default_assignment(env)
    out_dir = Path(out_dir)
    written: Dict[str, int] = {}

    def emit(role: SplitRole, filename: str, records: Sequence[dict], kind: str) -> None:
        if only_role is not None and role is not only_role:
            return
        if only_kind is not None and kind != only_kind:
            return
        relative = f"{role.value}/{filename}"
        write_dataset(list(records), out_dir / relative, kind=kind)
        written[relative] = len(records)

    edge_records = [step_instance_to_record(i) for i in edge_instances(env, assignment, seed)]
    captions, grounding = synth_icon_data(env, multiplicity, seed)

    for role in (SplitRole.SFT, SplitRole.RL):
        records = [step_instance_to_record(i) for i in path_instances(env, assignment, role, seed)]
        emit(role, PATHS_FILE, records, "paths")
    emit(SplitRole.SFT, EDGES_FILE, edge_records, "edges")
    emit(SplitRole.SFT, CAPTIONS_FILE, captions, "captions")
    emit(SplitRole.SFT, GROUNDING_FILE, grounding, "grounding")

    test_lists = subtree_tasks(env, assignment, SplitRole.TEST)
    test_tasks = [task_to_record(t) for tl in test_lists for t in tl]
    emit(SplitRole.TEST, INTERACTIVE_FILE, test_tasks, "interactive")
    test_paths = [
        step_instance_to_record(i)
        for i in path_instances(env, assignment, SplitRole.TEST, seed)
    ]
    emit(SplitRole.TEST, PATHS_FILE, test_paths, "paths")
    return written
