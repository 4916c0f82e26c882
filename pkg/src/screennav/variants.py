"""Controlled perturbation variants of a base environment.

Four transforms probe different perception channels while leaving the
navigation graph untouched: image (new glyphs, same names/positions), name
(new labels, same glyphs/positions), position (same icons, re-sampled
layout), and noise (extra click-inert distractor icons per screen).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

from .compositor import (
    EnvBundle,
    IconInstance,
    LayoutPolicy,
    ScreenSpec,
    VARIANT_BASE,
    place_boxes,
)
from .errors import VariantError
from .graph import NodeId
from .icons import IconAsset, IconKind, forge_icon, make_name_pool
from .seeding import derive_seed

VARIANT_IMAGE = "image"
VARIANT_NAME = "name"
VARIANT_POSITION = "position"
VARIANT_NOISE = "noise"

VARIANT_KINDS = (VARIANT_IMAGE, VARIANT_NAME, VARIANT_POSITION, VARIANT_NOISE)

DEFAULT_NOISE_PER_SCREEN = 2


@dataclass(frozen=True)
class VariantSpec:
    kind: str
    seed: int
    noise_count_per_screen: int = DEFAULT_NOISE_PER_SCREEN
    pin_system_slots: bool = False  # position variant may move Home/Back

    def __post_init__(self) -> None:
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.noise_count_per_screen < 1:
            raise ValueError("noise_count_per_screen must be >= 1")


def apply_variant(base: EnvBundle, spec: VariantSpec) -> EnvBundle:
    if base.variant != VARIANT_BASE:
        raise VariantError(
            f"variants derive from a base bundle, got {base.variant!r}"
        )
    if spec.kind == VARIANT_IMAGE:
        return _image_variant(base, spec)
    if spec.kind == VARIANT_NAME:
        return _name_variant(base, spec)
    if spec.kind == VARIANT_POSITION:
        return _position_variant(base, spec)
    return _noise_variant(base, spec)


def _swap_assets(base: EnvBundle, new_assets: Dict[int, IconAsset], variant: str, seed: int) -> EnvBundle:
    assets = tuple(new_assets.get(a.icon_id, a) for a in base.assets)
    screens: Dict[NodeId, ScreenSpec] = {}
    for node, screen in base.screens.items():
        icons = tuple(
            IconInstance(
                asset=new_assets.get(icon.asset.icon_id, icon.asset),
                bbox=icon.bbox,
                target=icon.target,
            )
            for icon in screen.icons
        )
        screens[node] = ScreenSpec(node=node, icons=icons)
    return replace(base, assets=assets, screens=screens, variant=variant, seed=seed)


def _image_variant(base: EnvBundle, spec: VariantSpec) -> EnvBundle:
    """Fresh glyphs for every functional icon; names and geometry unchanged."""
    new_assets: Dict[int, IconAsset] = {}
    for asset in base.functional_assets():
        salt = 0
        while True:
            forged = forge_icon(
                derive_seed(spec.seed, "image-variant", asset.icon_id, salt),
                asset.name,
                IconKind.FUNCTIONAL,
            )
            if forged.glyph != asset.glyph:
                break
            salt += 1  # astronomically unlikely, but the contract is "replaced"
        new_assets[asset.icon_id] = IconAsset(asset.icon_id, asset.name, asset.kind, forged.glyph)
    return _swap_assets(base, new_assets, VARIANT_IMAGE, spec.seed)


def _name_variant(base: EnvBundle, spec: VariantSpec) -> EnvBundle:
    """Disjoint name pool for every functional icon; glyphs unchanged."""
    functional = base.functional_assets()
    pool = make_name_pool(
        derive_seed(spec.seed, "name-variant"),
        len(functional),
        style=base.name_style,
        exclude={a.name for a in base.assets},
    )
    new_assets = {
        asset.icon_id: IconAsset(asset.icon_id, pool.draw(), asset.kind, asset.glyph)
        for asset in functional
    }
    return _swap_assets(base, new_assets, VARIANT_NAME, spec.seed)


def _position_variant(base: EnvBundle, spec: VariantSpec) -> EnvBundle:
    """Re-sample every bbox with the free-placement rejection sampler."""
    policy = LayoutPolicy(placement="free", pin_system_slots=spec.pin_system_slots)
    screens: Dict[NodeId, ScreenSpec] = {}
    for node in sorted(base.screens):
        screen = base.screens[node]
        pinned: List[Tuple[int, IconInstance]] = []
        moving: List[Tuple[int, IconInstance]] = []
        for index, icon in enumerate(screen.icons):
            system = icon.asset.kind in (IconKind.HOME, IconKind.BACK)
            if spec.pin_system_slots and system:
                pinned.append((index, icon))
            else:
                moving.append((index, icon))
        boxes = place_boxes(
            len(moving),
            derive_seed(spec.seed, "position-variant", node),
            policy,
            occupied=[icon.bbox for _, icon in pinned],
        )
        ordered: List[IconInstance] = [None] * len(screen.icons)  # type: ignore[list-item]
        for (index, icon), bbox in zip(moving, boxes):
            ordered[index] = IconInstance(icon.asset, bbox, icon.target)
        for index, icon in pinned:
            ordered[index] = icon
        screens[node] = ScreenSpec(node=node, icons=tuple(ordered))
    return replace(base, screens=screens, variant=VARIANT_POSITION, seed=spec.seed)


def _noise_variant(base: EnvBundle, spec: VariantSpec) -> EnvBundle:
    """Add click-inert distractor icons to every screen; originals unchanged."""
    count = spec.noise_count_per_screen
    total = count * len(base.screens)
    pool = make_name_pool(
        derive_seed(spec.seed, "noise-names"),
        total,
        style=base.name_style,
        exclude={a.name for a in base.assets},
    )
    next_id = max(a.icon_id for a in base.assets) + 1
    extra_assets: List[IconAsset] = []
    policy = LayoutPolicy(placement="free")
    screens: Dict[NodeId, ScreenSpec] = {}
    for node in sorted(base.screens):
        screen = base.screens[node]
        boxes = place_boxes(
            count,
            derive_seed(spec.seed, "noise-variant", node),
            policy,
            occupied=[icon.bbox for icon in screen.icons],
        )
        noise_icons = []
        for bbox in boxes:
            name = pool.draw()
            forged = forge_icon(derive_seed(spec.seed, "noise-glyph", next_id), name, IconKind.NOISE)
            asset = IconAsset(next_id, name, IconKind.NOISE, forged.glyph)
            extra_assets.append(asset)
            noise_icons.append(IconInstance(asset=asset, bbox=bbox, target=None))
            next_id += 1
        screens[node] = ScreenSpec(node=node, icons=screen.icons + tuple(noise_icons))
    return replace(
        base,
        screens=screens,
        assets=base.assets + tuple(extra_assets),
        variant=VARIANT_NOISE,
        seed=spec.seed,
    )
