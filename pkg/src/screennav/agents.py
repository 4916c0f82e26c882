"""Reference policies: random floor, shortest-path oracle, lookup memorizer,
and a goal-conditioned tabular Q-learner.

These agents read node identity from cached metadata instead of pixels; they
exist to verify environment and reward mechanics and to reproduce the
qualitative training contrasts at desk scale, not to solve perception. They
all emit text through the reference templates, so their output always parses
under the action grammar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

from .compositor import EnvBundle
from .episode import (
    COMPLETE_EXPLANATION,
    Action,
    ActionKind,
    Episode,
    Observation,
    TaskSpec,
    click_explanation,
    compose_output,
    format_click_action,
    parse_instruction,
)
from .errors import DivergenceError
from .graph import NodeId, shortest_path
from .seeding import rng_for

POLICY_TABLE_SCHEMA = "screennav-policy-table"
POLICY_TABLE_VERSION = 1

_VALUE_LIMIT = 1e9


@runtime_checkable
class AgentInterface(Protocol):
    def act(self, observation: Observation) -> str: ...


def _click_text(env: EnvBundle, node: NodeId, target: NodeId) -> str:
    icon = env.screen(node).icon_for_target(target)
    x, y = icon.bbox.center()
    return compose_output(click_explanation(icon.asset.name, node), format_click_action(x, y))


def _complete_text() -> str:
    return compose_output(COMPLETE_EXPLANATION, "complete")


class RandomAgent:
    """Uniform over the current screen's icons, plus complete when allowed."""

    def __init__(self, env: EnvBundle, seed: int = 0, allow_complete: bool = True):
        self.env = env
        self.seed = seed
        self.allow_complete = allow_complete
        self._rng = rng_for(seed, "random-agent")

    def seed_episode(self, episode_seed: int) -> None:
        self._rng = rng_for(self.seed, "random-agent", episode_seed)

    def act(self, observation: Observation) -> str:
        assert observation.node is not None, "metadata agents need the node id"
        node = observation.node
        icons = self.env.screen(node).icons
        arms = len(icons) + (1 if self.allow_complete else 0)
        pick = self._rng.randrange(arms)
        if pick == len(icons):
            return _complete_text()
        icon = icons[pick]
        x, y = icon.bbox.center()
        return compose_output(click_explanation(icon.asset.name, node), format_click_action(x, y))


class OracleAgent:
    """Replays the BFS shortest path from metadata; completes on the goal."""

    def __init__(self, env: EnvBundle):
        self.env = env
        self._next_hop: Dict[Tuple[NodeId, NodeId], Optional[NodeId]] = {}

    def act(self, observation: Observation) -> str:
        assert observation.node is not None, "metadata agents need the node id"
        node = observation.node
        _, goal = parse_instruction(observation.instruction)
        if node == goal:
            return _complete_text()
        key = (node, goal)
        if key not in self._next_hop:
            hops = shortest_path(self.env.tmap, node, goal)
            self._next_hop[key] = hops[0][1]
        target = self._next_hop[key]
        assert target is not None
        return _click_text(self.env, node, target)


class MemorizerAgent:
    """Exact lookup over training instances, keyed on (node, goal).

    Unseen keys fall back to a memorized single-transition action from the
    same node when one exists, else to a deterministic pseudo-random click.
    """

    def __init__(self, env: EnvBundle, instances: Sequence, seed: int = 0):
        self.env = env
        self.seed = seed
        self._table: Dict[Tuple[NodeId, NodeId], str] = {}
        self._edges: Dict[NodeId, List[str]] = {}
        for instance in instances:
            key = (instance.node, instance.task.goal)
            text = instance.reference_text()
            self._table.setdefault(key, text)
            if instance.distance_bucket == 1 and instance.reference.kind is ActionKind.CLICK:
                self._edges.setdefault(instance.node, []).append(text)

    def act(self, observation: Observation) -> str:
        assert observation.node is not None, "metadata agents need the node id"
        node = observation.node
        _, goal = parse_instruction(observation.instruction)
        hit = self._table.get((node, goal))
        if hit is not None:
            return hit
        rng = rng_for(self.seed, "memorizer-fallback", node, goal, len(observation.history))
        edges = self._edges.get(node)
        if edges:
            return edges[rng.randrange(len(edges))]
        x, y = rng.randint(0, 999), rng.randint(0, 999)
        return compose_output(f"click somewhere on page_{node}.", format_click_action(x, y))


@dataclass
class PolicyTable:
    """Goal-conditioned action values: (node, goal) -> one value per
    available transition, plus a trailing complete arm when allowed."""

    allow_complete: bool = True
    gamma: float = 0.9
    q: Dict[Tuple[NodeId, NodeId], List[float]] = field(default_factory=dict)
    visits: Dict[Tuple[NodeId, NodeId], int] = field(default_factory=dict)

    def arms(self, env: EnvBundle, node: NodeId) -> int:
        return len(env.tmap.transitions(node)) + (1 if self.allow_complete else 0)

    def values(self, env: EnvBundle, node: NodeId, goal: NodeId) -> List[float]:
        key = (node, goal)
        if key not in self.q:
            self.q[key] = [0.0] * self.arms(env, node)
        return self.q[key]

    def known(self, node: NodeId, goal: NodeId) -> bool:
        return self.visits.get((node, goal), 0) > 0

    def greedy_arm(self, env: EnvBundle, node: NodeId, goal: NodeId) -> int:
        values = self.values(env, node, goal)
        best = max(values)
        return values.index(best)  # lowest index wins ties

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        payload = {
            "schema": POLICY_TABLE_SCHEMA,
            "version": POLICY_TABLE_VERSION,
            "allow_complete": self.allow_complete,
            "gamma": self.gamma,
            "entries": [
                {"node": node, "goal": goal, "values": values, "visits": self.visits.get((node, goal), 0)}
                for (node, goal), values in sorted(self.q.items())
            ],
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True, indent=0) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "PolicyTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if data.get("schema") != POLICY_TABLE_SCHEMA or data.get("version") != POLICY_TABLE_VERSION:
            raise ValueError(f"not a compatible policy table: {path}")
        table = cls(allow_complete=data["allow_complete"], gamma=data["gamma"])
        for entry in data["entries"]:
            key = (entry["node"], entry["goal"])
            table.q[key] = list(entry["values"])
            table.visits[key] = entry["visits"]
        return table


@dataclass
class TrainStats:
    episodes: int = 0
    successes: int = 0
    episode_lengths: List[int] = field(default_factory=list)

    @property
    def mean_length(self) -> float:
        return sum(self.episode_lengths) / len(self.episode_lengths) if self.episode_lengths else 0.0


def _arm_action(env: EnvBundle, node: NodeId, arm: int) -> Action:
    transitions = env.tmap.transitions(node)
    if arm < len(transitions):
        icon = env.screen(node).icon_for_target(transitions[arm].target)
        x, y = icon.bbox.center()
        return Action(
            ActionKind.CLICK,
            x=x,
            y=y,
            explanation=click_explanation(icon.asset.name, node),
        )
    return Action(ActionKind.COMPLETE, explanation=COMPLETE_EXPLANATION)


def tabular_train(
    env: EnvBundle,
    tasks: Sequence[TaskSpec],
    episodes_per_task: int = 200,
    alpha: float = 0.1,
    gamma: float = 0.9,
    epsilon_start: float = 1.0,
    epsilon_end: float = 0.05,
    seed: int = 0,
    max_rounds: int = 12,
    allow_complete: bool = True,
    hack_always_reward_complete: bool = False,
) -> Tuple[PolicyTable, TrainStats]:
    """Q-learning on (node, goal) states with the terminal success reward.

    ``hack_always_reward_complete`` is a deliberately broken reward used by
    tests to reproduce the premature-complete failure mode: the complete
    action earns 1 no matter where the agent stands.
    """
    if episodes_per_task < 1:
        raise ValueError("episodes_per_task must be >= 1")
    table = PolicyTable(allow_complete=allow_complete, gamma=gamma)
    stats = TrainStats()
    rng = rng_for(seed, "tabular-train")
    denominator = max(episodes_per_task - 1, 1)
    for task in tasks:
        for episode_index in range(episodes_per_task):
            epsilon = epsilon_start + (epsilon_end - epsilon_start) * (
                episode_index / denominator
            )
            episode = Episode(env=env, task=task, max_rounds=max_rounds, allow_complete=allow_complete)
            while not episode.done:
                node = episode.current
                values = table.values(env, node, task.goal)
                if rng.random() < epsilon:
                    arm = rng.randrange(len(values))
                else:
                    best = max(values)
                    arm = values.index(best)
                action = _arm_action(env, node, arm)
                result = episode.step(action)
                table.visits[(node, task.goal)] = table.visits.get((node, task.goal), 0) + 1
                if hack_always_reward_complete and action.kind is ActionKind.COMPLETE:
                    reward = 1.0
                else:
                    reward = float(result.a2b_reward)
                if result.done:
                    target = reward
                else:
                    next_values = table.values(env, episode.current, task.goal)
                    target = reward + gamma * max(next_values)
                values[arm] += alpha * (target - values[arm])
                if abs(values[arm]) > _VALUE_LIMIT:
                    raise DivergenceError(
                        f"value overflow at state ({node},{task.goal}); "
                        f"check alpha/gamma"
                    )
            stats.episodes += 1
            stats.successes += int(episode.success)
            stats.episode_lengths.append(episode.step_index)
    return table, stats


class TabularAgent:
    """Greedy policy over a trained table; unknown states fall back to a
    deterministic pseudo-random choice and are counted."""

    def __init__(self, env: EnvBundle, table: PolicyTable, seed: int = 0):
        self.env = env
        self.table = table
        self.seed = seed
        self.fallback_count = 0

    def act(self, observation: Observation) -> str:
        assert observation.node is not None, "metadata agents need the node id"
        node = observation.node
        _, goal = parse_instruction(observation.instruction)
        if self.table.known(node, goal):
            arm = self.table.greedy_arm(self.env, node, goal)
        else:
            self.fallback_count += 1
            rng = rng_for(self.seed, "tabular-fallback", node, goal, len(observation.history))
            arm = rng.randrange(self.table.arms(self.env, node))
        action = _arm_action(self.env, node, arm)
        if action.kind is ActionKind.COMPLETE:
            return _complete_text()
        return compose_output(action.explanation, format_click_action(*action.point))


def oracle_agent(env: EnvBundle) -> OracleAgent:
    return OracleAgent(env)


def random_agent(env: EnvBundle, seed: int = 0, allow_complete: bool = True) -> RandomAgent:
    return RandomAgent(env, seed, allow_complete)


def memorizer_agent(env: EnvBundle, instances: Sequence, seed: int = 0) -> MemorizerAgent:
    return MemorizerAgent(env, instances, seed)
