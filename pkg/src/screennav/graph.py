"""Screen tree construction and directed navigation queries.

Screens form a tree: forward edges mirror the parent/child structure, every
non-root screen can go back to its parent, and every screen at depth two or
more can jump home to the root. Node ids are assigned breadth-first so the
"page_<n>" labels are stable for a given branching spec.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    EmptySpecError,
    LengthMismatchError,
    NonTerminatedSpecError,
    UnknownNodeError,
    UnreachableError,
)

NodeId = int

ROOT: NodeId = 0


def page_label(node: NodeId) -> str:
    return f"page_{node}"


def parse_page_label(label: str) -> NodeId:
    if not label.startswith("page_"):
        raise ValueError(f"not a page label: {label!r}")
    return int(label[len("page_"):])


class EdgeKind(str, Enum):
    FORWARD = "forward"
    BACK = "back"
    HOME = "home"


@dataclass(frozen=True)
class BranchingSpec:
    """Children per depth level; the last level must be 0 so the tree ends."""

    children_per_level: Tuple[int, ...]

    def __post_init__(self) -> None:
        levels = tuple(self.children_per_level)
        object.__setattr__(self, "children_per_level", levels)
        if not levels:
            raise EmptySpecError("branching spec has no levels")
        if any(k < 0 for k in levels):
            raise ValueError(f"negative branching factor in {levels}")
        if levels[-1] != 0:
            raise NonTerminatedSpecError(
                f"branching spec must end with 0, got {levels}"
            )

    @classmethod
    def parse(cls, text: str) -> "BranchingSpec":
        """Parse a comma-separated level list such as "5,3,2,2,1,1,0"."""
        return cls(tuple(int(part) for part in text.split(",")))

    @property
    def max_depth(self) -> int:
        return len(self.children_per_level)

    def node_count(self) -> int:
        total, level_size = 1, 1
        for k in self.children_per_level:
            level_size *= k
            total += level_size
        return total


@dataclass(frozen=True)
class TreeNode:
    id: NodeId
    parent: Optional[NodeId]
    depth: int
    children: Tuple[NodeId, ...]


@dataclass(frozen=True)
class NavGraph:
    branching: BranchingSpec
    nodes: Tuple[TreeNode, ...]

    @property
    def root(self) -> NodeId:
        return ROOT

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: NodeId) -> bool:
        return 0 <= node < len(self.nodes)

    def node(self, node: NodeId) -> TreeNode:
        if node not in self:
            raise UnknownNodeError(f"no such node: {node}")
        return self.nodes[node]

    def depth(self, node: NodeId) -> int:
        return self.node(node).depth

    def parent(self, node: NodeId) -> Optional[NodeId]:
        return self.node(node).parent

    def children(self, node: NodeId) -> Tuple[NodeId, ...]:
        return self.node(node).children

    def subtree(self, node: NodeId) -> Tuple[NodeId, ...]:
        """All nodes under (and including) ``node``, breadth-first."""
        out: List[NodeId] = []
        queue = deque([node])
        while queue:
            current = queue.popleft()
            out.append(current)
            queue.extend(self.node(current).children)
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "branching": list(self.branching.children_per_level),
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "depth": n.depth,
                    "children": list(n.children),
                }
                for n in self.nodes
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NavGraph":
        nodes = tuple(
            TreeNode(
                id=item["id"],
                parent=item["parent"],
                depth=item["depth"],
                children=tuple(item["children"]),
            )
            for item in data["nodes"]
        )
        return cls(branching=BranchingSpec(tuple(data["branching"])), nodes=nodes)


def build_tree(spec: BranchingSpec, seed: int = 0) -> NavGraph:
    """Build the screen tree for a branching spec.

    The topology is fully determined by the spec; ``seed`` is accepted for
    interface symmetry with the rest of the build pipeline and does not
    influence the tree. Ids are assigned breadth-first with the root at 0.
    """
    del seed
    parents: List[Optional[NodeId]] = [None]
    depths: List[int] = [0]
    children: List[List[NodeId]] = [[]]
    frontier: List[NodeId] = [ROOT]
    next_id = 1
    for depth, fanout in enumerate(spec.children_per_level):
        new_frontier: List[NodeId] = []
        for parent in frontier:
            for _ in range(fanout):
                parents.append(parent)
                depths.append(depth + 1)
                children.append([])
                children[parent].append(next_id)
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    nodes = tuple(
        TreeNode(id=i, parent=parents[i], depth=depths[i], children=tuple(children[i]))
        for i in range(next_id)
    )
    return NavGraph(branching=spec, nodes=nodes)


@dataclass(frozen=True)
class Transition:
    kind: EdgeKind
    target: NodeId


@dataclass(frozen=True)
class TransitionMap:
    """Ordered outgoing transitions per node: forward edges first (in child
    order), then back, then home."""

    outgoing: Tuple[Tuple[Transition, ...], ...]

    def transitions(self, node: NodeId) -> Tuple[Transition, ...]:
        if not 0 <= node < len(self.outgoing):
            raise UnknownNodeError(f"no such node: {node}")
        return self.outgoing[node]

    def __len__(self) -> int:
        return len(self.outgoing)

    def edge_count(self) -> int:
        return sum(len(ts) for ts in self.outgoing)


def transition_map(graph: NavGraph) -> TransitionMap:
    rows: List[Tuple[Transition, ...]] = []
    for node in graph.nodes:
        row = [Transition(EdgeKind.FORWARD, child) for child in node.children]
        if node.depth >= 1:
            assert node.parent is not None
            row.append(Transition(EdgeKind.BACK, node.parent))
        if node.depth >= 2:
            row.append(Transition(EdgeKind.HOME, ROOT))
        rows.append(tuple(row))
    return TransitionMap(outgoing=tuple(rows))


def shortest_path(
    tmap: TransitionMap, start: NodeId, goal: NodeId
) -> List[Tuple[EdgeKind, NodeId]]:
    """Breadth-first shortest path from start to goal as (edge kind, node)
    hops. Ties break on the forward-then-back-then-home transition order;
    an empty list means start == goal."""
    if not 0 <= start < len(tmap) or not 0 <= goal < len(tmap):
        raise UnknownNodeError(f"path endpoints out of range: {start}, {goal}")
    if start == goal:
        return []
    came_from: Dict[NodeId, Tuple[NodeId, EdgeKind]] = {}
    queue = deque([start])
    seen = {start}
    while queue:
        current = queue.popleft()
        for t in tmap.transitions(current):
            if t.target in seen:
                continue
            seen.add(t.target)
            came_from[t.target] = (current, t.kind)
            if t.target == goal:
                queue.clear()
                break
            queue.append(t.target)
    if goal not in came_from:
        raise UnreachableError(f"no path from {start} to {goal}")
    hops: List[Tuple[EdgeKind, NodeId]] = []
    node = goal
    while node != start:
        prev, kind = came_from[node]
        hops.append((kind, node))
        node = prev
    hops.reverse()
    return hops


def distances_from(tmap: TransitionMap, start: NodeId) -> Dict[NodeId, int]:
    """BFS distance from start to every reachable node."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for t in tmap.transitions(current):
            if t.target not in dist:
                dist[t.target] = dist[current] + 1
                queue.append(t.target)
    return dist


def distance_histogram(
    tmap: TransitionMap, node_set: Iterable[NodeId]
) -> Dict[int, int]:
    """Shortest-path length counts over all ordered pairs of distinct nodes
    in node_set. Paths may route through nodes outside the set."""
    members = sorted(set(node_set))
    if len(members) < 2:
        raise ValueError("node_set must contain at least two nodes")
    histogram: Dict[int, int] = {}
    targets = set(members)
    for start in members:
        dist = distances_from(tmap, start)
        for goal in targets:
            if goal == start:
                continue
            if goal not in dist:
                raise UnreachableError(f"no path from {start} to {goal}")
            d = dist[goal]
            histogram[d] = histogram.get(d, 0) + 1
    return dict(sorted(histogram.items()))


class SplitRole(str, Enum):
    SFT = "sft"
    RL = "rl"
    TEST = "test"


DEFAULT_ASSIGNMENT = (
    SplitRole.SFT,
    SplitRole.SFT,
    SplitRole.RL,
    SplitRole.RL,
    SplitRole.TEST,
)


@dataclass(frozen=True)
class SplitAssignment:
    """Role of each depth-1 subtree; the root belongs to every role."""

    roles: Tuple[SplitRole, ...]
    node_role: Dict[NodeId, SplitRole]

    def nodes_for(self, role: SplitRole, include_root: bool = False) -> Tuple[NodeId, ...]:
        nodes = [n for n, r in sorted(self.node_role.items()) if r == role]
        if include_root:
            nodes = [ROOT] + nodes
        return tuple(nodes)

    def subtree_node_sets(self, role: SplitRole, graph: NavGraph) -> List[Tuple[NodeId, ...]]:
        """One node tuple per depth-1 subtree assigned to the role."""
        sets = []
        for child, r in zip(graph.children(ROOT), self.roles):
            if r == role:
                sets.append(graph.subtree(child))
        return sets


def partition_subtrees(
    graph: NavGraph, assignment: Sequence[SplitRole]
) -> SplitAssignment:
    root_children = graph.children(ROOT)
    if len(assignment) != len(root_children):
        raise LengthMismatchError(
            f"assignment has {len(assignment)} roles for "
            f"{len(root_children)} depth-1 subtrees"
        )
    node_role: Dict[NodeId, SplitRole] = {}
    for child, role in zip(root_children, assignment):
        for node in graph.subtree(child):
            node_role[node] = role
    return SplitAssignment(roles=tuple(assignment), node_role=node_role)
