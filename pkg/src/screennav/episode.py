"""Episode runtime: action grammar, hit testing, and state advancement.

An episode owns a task ("From page_A to page_B"), the agent's current node,
and a textual history. Agent output is parsed against a strict grammar;
anything unparseable, any click that misses every icon, and any click on a
noise icon consumes a round without changing state. With allow_complete on,
success requires an explicit ``complete`` on the goal screen; with it off
(the restricted action space), the episode succeeds the moment the agent
arrives at the goal and ``complete`` is just another invalid action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

from .compositor import CANVAS_SIZE, EnvBundle, IconInstance, ScreenSpec
from .errors import (
    ActionTextError,
    CoordRangeError,
    EpisodeFinishedError,
    FormatError,
    UnknownNodeError,
)
from .graph import NodeId, page_label

DEFAULT_MAX_ROUNDS = 12


class ActionKind(str, Enum):
    CLICK = "click"
    COMPLETE = "complete"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    x: Optional[int] = None
    y: Optional[int] = None
    explanation: str = ""
    raw: str = ""

    @property
    def point(self) -> Tuple[int, int]:
        if self.kind is not ActionKind.CLICK:
            raise ValueError("only click actions carry coordinates")
        assert self.x is not None and self.y is not None
        return self.x, self.y


@dataclass(frozen=True)
class TaskSpec:
    """Navigation task between two distinct screens."""

    start: NodeId
    goal: NodeId
    distance: Optional[int] = None

    def __post_init__(self) -> None:
        if self.start == self.goal:
            raise ValueError("task start and goal must differ")

    @property
    def instruction(self) -> str:
        return f"From {page_label(self.start)} to {page_label(self.goal)}"


_INSTRUCTION_RE = re.compile(r"^From page_(\d+) to page_(\d+)$")


def parse_instruction(text: str) -> Tuple[NodeId, NodeId]:
    match = _INSTRUCTION_RE.match(text.strip())
    if not match:
        raise ValueError(f"not a task instruction: {text!r}")
    return int(match.group(1)), int(match.group(2))


# Output grammar. The explanation may be any text; the action is either a
# boxed click or the bare word complete, separated from the explanation by a
# tab. Whitespace around the whole line is tolerated.
_ACTION_LINE_RE = re.compile(
    r"^\s*Explain:\s*(?P<explanation>.*?)\s*\t\s*Action:\s*(?P<action>.+?)\s*$",
    re.DOTALL,
)
_CLICK_RE = re.compile(
    r"^click\(start_box=<\|box_start\|>\(\s*(?P<x>-?\d+)\s*,\s*(?P<y>-?\d+)\s*\)<\|box_end\|>\)$"
)
_COMPLETE_RE = re.compile(r"^complete$")


def format_click_action(x: int, y: int) -> str:
    return f"click(start_box=<|box_start|>({x},{y})<|box_end|>)"


def click_explanation(icon_name: str, node: NodeId) -> str:
    return f"click {icon_name} icon on {page_label(node)}."


COMPLETE_EXPLANATION = "this is the target page."


def compose_output(explanation: str, action_text: str) -> str:
    return f"Explain: {explanation}\tAction: {action_text}"


def parse_action(text: str) -> Action:
    """Parse one agent output line.

    Raises FormatError when the grammar does not match and CoordRangeError
    when click coordinates leave the canvas coordinate system.
    """
    if not isinstance(text, str):
        raise FormatError("agent output must be text", str(text))
    line = _ACTION_LINE_RE.match(text)
    if not line:
        raise FormatError("output does not match the Explain/Action grammar", text)
    explanation = line.group("explanation")
    action_text = line.group("action")
    if _COMPLETE_RE.match(action_text):
        return Action(ActionKind.COMPLETE, explanation=explanation, raw=text)
    click = _CLICK_RE.match(action_text)
    if not click:
        raise FormatError(f"unrecognized action {action_text!r}", text)
    x, y = int(click.group("x")), int(click.group("y"))
    if not (0 <= x <= CANVAS_SIZE and 0 <= y <= CANVAS_SIZE):
        raise CoordRangeError(f"coordinates ({x},{y}) outside the canvas", text)
    return Action(ActionKind.CLICK, x=x, y=y, explanation=explanation, raw=text)


def hit_test(screen: ScreenSpec, x: int, y: int) -> Optional[IconInstance]:
    """Resolve a click to the icon whose bbox contains it, if any."""
    for icon in screen.icons:
        if icon.bbox.contains(x, y):
            return icon
    return None


def history_click_line(step: int, icon_name: str, node: NodeId) -> str:
    return f"step{step}: click the {icon_name} icon on {page_label(node)}"


def history_invalid_line(step: int, node: NodeId) -> str:
    return f"step{step}: invalid action on {page_label(node)}"


def history_complete_line(step: int, node: NodeId) -> str:
    return f"step{step}: complete on {page_label(node)}"


@dataclass(frozen=True)
class Observation:
    instruction: str
    history: Tuple[str, ...]
    screen_path: str
    node: Optional[NodeId]  # hidden on the wire; metadata agents may read it


@dataclass(frozen=True)
class StepInfo:
    transitioned: bool
    invalid_click: bool
    reached_target: bool


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    done: bool
    a2b_reward: int
    info: StepInfo


@dataclass
class TraceStep:
    action: Union[Action, ActionTextError]
    node_before: NodeId
    node_after: NodeId
    event: str  # "move" | "invalid" | "complete" | "auto_complete"
    icon_name: Optional[str] = None
    icon_kind: Optional[str] = None  # IconKind value for moves


@dataclass
class Episode:
    """Mutable episode state; single-owner, never shared across threads."""

    env: EnvBundle
    task: TaskSpec
    max_rounds: int = DEFAULT_MAX_ROUNDS
    allow_complete: bool = True
    current: NodeId = field(init=False)
    step_index: int = field(init=False, default=0)
    done: bool = field(init=False, default=False)
    success: bool = field(init=False, default=False)
    history: List[str] = field(init=False, default_factory=list)
    trace: List[TraceStep] = field(init=False, default_factory=list)

    def __post_init__(self) -> None:
        if self.task.start not in self.env.graph or self.task.goal not in self.env.graph:
            raise UnknownNodeError(
                f"task {self.task.start}->{self.task.goal} references unknown nodes"
            )
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        self.current = self.task.start

    def observation(self) -> Observation:
        return Observation(
            instruction=self.task.instruction,
            history=tuple(self.history),
            screen_path=self.env.screen_image_name(self.current),
            node=self.current,
        )

    def step(self, action: Union[Action, ActionTextError]) -> StepResult:
        if self.done:
            raise EpisodeFinishedError("episode already terminated")
        self.step_index += 1
        n = self.step_index
        before = self.current
        transitioned = False
        invalid = False
        event = "invalid"
        icon_name = None
        icon_kind = None

        if isinstance(action, ActionTextError):
            invalid = True
            self.history.append(history_invalid_line(n, before))
        elif action.kind is ActionKind.CLICK:
            icon = hit_test(self.env.screen(before), *action.point)
            if icon is not None and icon.target is not None:
                self.current = icon.target
                transitioned = True
                event = "move"
                icon_name = icon.asset.name
                icon_kind = icon.asset.kind.value
                self.history.append(history_click_line(n, icon.asset.name, before))
            else:
                invalid = True
                self.history.append(history_invalid_line(n, before))
        else:  # complete
            if self.allow_complete:
                self.done = True
                self.success = self.current == self.task.goal
                event = "complete"
                self.history.append(history_complete_line(n, before))
            else:
                invalid = True
                self.history.append(history_invalid_line(n, before))

        if not self.allow_complete and not self.done and self.current == self.task.goal:
            # Restricted action space: arrival is success.
            self.done = True
            self.success = True
            event = "auto_complete"

        if not self.done and self.step_index >= self.max_rounds:
            self.done = True
            self.success = False

        self.trace.append(
            TraceStep(
                action=action,
                node_before=before,
                node_after=self.current,
                event=event,
                icon_name=icon_name,
                icon_kind=icon_kind,
            )
        )
        reward = 1 if self.done and self.success else 0
        info = StepInfo(
            transitioned=transitioned,
            invalid_click=invalid,
            reached_target=self.current == self.task.goal,
        )
        return StepResult(self.observation(), self.done, reward, info)

    def step_text(self, raw_text: str) -> StepResult:
        """Parse and apply agent output, absorbing grammar errors as no-ops."""
        try:
            action: Union[Action, ActionTextError] = parse_action(raw_text)
        except ActionTextError as exc:
            action = exc
        return self.step(action)


def reset(
    env: EnvBundle,
    task: TaskSpec,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    allow_complete: bool = True,
) -> Tuple[Episode, Observation]:
    episode = Episode(env=env, task=task, max_rounds=max_rounds, allow_complete=allow_complete)
    return episode, episode.observation()
