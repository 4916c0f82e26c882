"""Composite single-turn reward.

Four equally weighted binary components score a predicted (explanation,
action) pair against a reference step: action-type match, click-inside-the-
target-box, explanation-names-the-icon-actually-hit, and output formatting.
Unparseable output scores zero everywhere. The components are independent
of each other by construction; the total is their plain sum.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .compositor import IconInstance, ScreenSpec
from .episode import Action, ActionKind, hit_test, parse_action
from .errors import ActionTextError, MissingTargetIconError

_CLICK_TEMPLATE_RE = re.compile(r"^click\s+(.+?)\s+icon\s+on\s+page_\d+\.?$", re.IGNORECASE)
_COMPLETE_TEMPLATE_RE = re.compile(r"^this is the target page\.?$", re.IGNORECASE)

INTENT_COMPLETE_MARKER = "target page"


@dataclass(frozen=True)
class ReferenceStep:
    """Ground-truth step a prediction is scored against."""

    action: Action
    explanation: str
    screen: ScreenSpec
    target_icon: Optional[IconInstance] = None

    @property
    def kind(self) -> ActionKind:
        return self.action.kind


@dataclass(frozen=True)
class RewardBreakdown:
    r_type: int
    r_coord: int
    r_intent: int
    r_format: int

    @property
    def total(self) -> int:
        return self.r_type + self.r_coord + self.r_intent + self.r_format


ZERO_REWARD = RewardBreakdown(0, 0, 0, 0)


def reward_type(pred: Action, ref: ReferenceStep) -> int:
    return 1 if pred.kind is ref.kind else 0


def reward_coord(pred: Action, ref: ReferenceStep) -> int:
    """Click inside the reference target box; completes are coordinate-free."""
    if pred.kind is ActionKind.COMPLETE:
        return 1
    if ref.kind is ActionKind.CLICK:
        if ref.target_icon is None:
            raise MissingTargetIconError(
                f"click reference on screen {ref.screen.node} lacks a target icon"
            )
        x, y = pred.point
        return 1 if ref.target_icon.bbox.contains(x, y) else 0
    # Click predicted against a complete reference: no target region exists.
    return 0


def _mentions_name(explanation: str, name: str) -> bool:
    # Whole-token match; names never contain regex specials but escape anyway.
    return re.search(rf"(?<![0-9A-Za-z_]){re.escape(name)}(?![0-9A-Za-z_])", explanation) is not None


def reward_intent(pred: Action, ref: ReferenceStep) -> int:
    """Explanation must name the icon the click actually lands on; completes
    must acknowledge the target page."""
    if pred.kind is ActionKind.COMPLETE:
        return 1 if INTENT_COMPLETE_MARKER in pred.explanation else 0
    hit = hit_test(ref.screen, *pred.point)
    if hit is None:
        return 0
    return 1 if _mentions_name(pred.explanation, hit.asset.name) else 0


def reward_format(raw_pred_text: str, ref: ReferenceStep) -> int:
    """Grammar-valid output whose explanation follows the reference template
    family (click ... icon on page_N. / this is the target page.)."""
    try:
        pred = parse_action(raw_pred_text)
    except ActionTextError:
        return 0
    template = _CLICK_TEMPLATE_RE if ref.kind is ActionKind.CLICK else _COMPLETE_TEMPLATE_RE
    return 1 if template.match(pred.explanation.strip()) else 0


def composite_reward(raw_pred_text: str, ref: ReferenceStep) -> RewardBreakdown:
    try:
        pred = parse_action(raw_pred_text)
    except ActionTextError:
        return ZERO_REWARD
    return RewardBreakdown(
        r_type=reward_type(pred, ref),
        r_coord=reward_coord(pred, ref),
        r_intent=reward_intent(pred, ref),
        r_format=reward_format(raw_pred_text, ref),
    )
