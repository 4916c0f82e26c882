"""Screen layout and whole-environment bundles.

Each node's outgoing transitions become icons on a 1000x1000 canvas. The
canvas equals the agent-facing coordinate system, so clicks need no scaling.
Home and Back sit in reserved top corners unless a layout policy frees them;
functional icons land on a jittered grid with pairwise-disjoint boxes. A
bundle is the graph plus per-screen icon placements plus glyph programs,
which is enough to re-render every screenshot bit-for-bit.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BundleIOError, LayoutOverflowError, SchemaVersionError
from .graph import (
    BranchingSpec,
    EdgeKind,
    NavGraph,
    NodeId,
    Transition,
    TransitionMap,
    build_tree,
    page_label,
    transition_map,
)
from .icons import IconAsset, IconKind, forge_icon, make_name_pool
from .raster import ImageBuffer, draw_text_centered, encode_png, render_glyph
from .seeding import derive_seed, rng_for

SCHEMA_NAME = "screennav-bundle"
SCHEMA_VERSION = 1
RENDERER_VERSION = 1

CANVAS_SIZE = 1000
ICON_WIDTH = 96
GLYPH_BOX = 96
LABEL_STRIP = 24
ICON_HEIGHT = GLYPH_BOX + LABEL_STRIP
MIN_GAP = 8

VARIANT_BASE = "base"


@dataclass(frozen=True)
class BBox:
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self) -> None:
        if not (0 <= self.x0 < self.x1 <= CANVAS_SIZE and 0 <= self.y0 < self.y1 <= CANVAS_SIZE):
            raise ValueError(f"bbox out of canvas or degenerate: {self}")

    def contains(self, x: int, y: int) -> bool:
        """Closed on the low edges, open on the high edges."""
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def center(self) -> Tuple[int, int]:
        return (self.x0 + self.x1) // 2, (self.y0 + self.y1) // 2

    def separated_from(self, other: "BBox", gap: int = 0) -> bool:
        return (
            self.x1 + gap <= other.x0
            or other.x1 + gap <= self.x0
            or self.y1 + gap <= other.y0
            or other.y1 + gap <= self.y0
        )

    def to_list(self) -> List[int]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class IconInstance:
    asset: IconAsset
    bbox: BBox
    target: Optional[NodeId]  # None means clicking it is a no-op (noise)

    @property
    def is_noise(self) -> bool:
        return self.target is None


@dataclass(frozen=True)
class ScreenSpec:
    node: NodeId
    icons: Tuple[IconInstance, ...]
    canvas: Tuple[int, int] = (CANVAS_SIZE, CANVAS_SIZE)

    def icon_for_target(self, target: NodeId) -> IconInstance:
        for icon in self.icons:
            if icon.target == target:
                return icon
        raise KeyError(f"screen {self.node} has no icon targeting {target}")


@dataclass(frozen=True)
class LayoutPolicy:
    """Geometry knobs for icon placement."""

    placement: str = "grid"  # "grid" or "free"
    pin_system_slots: bool = True
    top_reserved: int = 160  # grid placement keeps icons below the header row
    jitter: int = 16
    max_attempts: int = 4000

    back_slot: Tuple[int, int] = (16, 16)
    home_slot: Tuple[int, int] = (888, 16)

    def grid_cells(self) -> List[Tuple[int, int]]:
        xs = range(24, CANVAS_SIZE - ICON_WIDTH, 140)
        ys = range(self.top_reserved + 16, CANVAS_SIZE - ICON_HEIGHT, 168)
        return [(x, y) for y in ys for x in xs]


DEFAULT_POLICY = LayoutPolicy()


def _disjoint(candidate: BBox, placed: Sequence[BBox]) -> bool:
    return all(candidate.separated_from(other, MIN_GAP) for other in placed)


def place_boxes(
    count: int,
    seed: int,
    policy: LayoutPolicy,
    occupied: Sequence[BBox] = (),
) -> List[BBox]:
    """Sample ``count`` disjoint icon boxes, avoiding ``occupied`` ones."""
    rng = rng_for(seed, "layout", policy.placement)
    placed: List[BBox] = list(occupied)
    out: List[BBox] = []
    if policy.placement == "grid":
        cells = policy.grid_cells()
        rng.shuffle(cells)
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > policy.max_attempts:
            raise LayoutOverflowError(
                f"placed {len(out)}/{count} icons after {attempts} attempts"
            )
        if policy.placement == "grid":
            if not cells:
                raise LayoutOverflowError(f"grid exhausted after {len(out)}/{count} icons")
            x, y = cells.pop()
            x += rng.randint(-policy.jitter, policy.jitter)
            y += rng.randint(-policy.jitter, policy.jitter)
        else:
            x = rng.randint(0, CANVAS_SIZE - ICON_WIDTH)
            y = rng.randint(0, CANVAS_SIZE - ICON_HEIGHT)
        candidate = BBox(x, y, x + ICON_WIDTH, y + ICON_HEIGHT)
        if _disjoint(candidate, placed):
            placed.append(candidate)
            out.append(candidate)
    return out


def layout_screen(
    node: NodeId,
    transitions: Sequence[Transition],
    assets: Sequence[IconAsset],
    seed: int,
    policy: LayoutPolicy = DEFAULT_POLICY,
) -> ScreenSpec:
    """Lay out one icon per transition; assets align with transitions."""
    if len(transitions) != len(assets):
        raise ValueError("need exactly one asset per transition")
    system: List[Tuple[int, IconInstance]] = []
    pending: List[Tuple[int, Transition, IconAsset]] = []
    occupied: List[BBox] = []
    for index, (transition, asset) in enumerate(zip(transitions, assets)):
        slot = None
        if policy.pin_system_slots and transition.kind is EdgeKind.BACK:
            slot = policy.back_slot
        elif policy.pin_system_slots and transition.kind is EdgeKind.HOME:
            slot = policy.home_slot
        if slot is not None:
            bbox = BBox(slot[0], slot[1], slot[0] + ICON_WIDTH, slot[1] + ICON_HEIGHT)
            occupied.append(bbox)
            system.append((index, IconInstance(asset, bbox, transition.target)))
        else:
            pending.append((index, transition, asset))
    boxes = place_boxes(len(pending), derive_seed(seed, "screen", node), policy, occupied)
    ordered: List[Optional[IconInstance]] = [None] * len(transitions)
    for (index, transition, asset), bbox in zip(pending, boxes):
        ordered[index] = IconInstance(asset, bbox, transition.target)
    for index, instance in system:
        ordered[index] = instance
    return ScreenSpec(node=node, icons=tuple(i for i in ordered if i is not None))


def render_screen(spec: ScreenSpec) -> ImageBuffer:
    """Rasterize a screen: white background, page label, icons with captions."""
    width, height = spec.canvas
    buf = ImageBuffer(width, height)
    draw_text_centered(buf, width // 2, 20, page_label(spec.node), scale=3)
    for icon in spec.icons:
        bbox = icon.bbox
        render_glyph(buf, bbox.x0, bbox.y0, GLYPH_BOX, icon.asset.glyph)
        draw_text_centered(
            buf,
            (bbox.x0 + bbox.x1) // 2,
            bbox.y0 + GLYPH_BOX + 5,
            icon.asset.name,
            scale=2,
            clip=(bbox.x0, bbox.y0, bbox.x1, bbox.y1),
        )
    return buf


@dataclass(frozen=True)
class EnvBundle:
    graph: NavGraph
    tmap: TransitionMap = field(compare=False)
    screens: Dict[NodeId, ScreenSpec]
    assets: Tuple[IconAsset, ...]
    seed: int
    variant: str = VARIANT_BASE
    renderer_version: int = RENDERER_VERSION
    name_style: str = "pseudo"

    def screen(self, node: NodeId) -> ScreenSpec:
        return self.screens[node]

    def node_count(self) -> int:
        return len(self.graph)

    def functional_assets(self) -> Tuple[IconAsset, ...]:
        return tuple(a for a in self.assets if a.kind is IconKind.FUNCTIONAL)

    def screen_image_name(self, node: NodeId) -> str:
        return f"screens/{page_label(node)}.png"


def build_environment(
    spec: BranchingSpec,
    seed: int,
    policy: LayoutPolicy = DEFAULT_POLICY,
    name_style: str = "pseudo",
) -> EnvBundle:
    """Full pipeline: tree, transitions, assets without replacement, layouts."""
    graph = build_tree(spec, seed)
    tmap = transition_map(graph)
    home = forge_icon(seed, "Home", IconKind.HOME)
    back = forge_icon(seed, "Back", IconKind.BACK)
    functional_count = len(graph) - 1
    assets: List[IconAsset] = [home, back]
    asset_for_child: Dict[NodeId, IconAsset] = {}
    if functional_count:
        pool = make_name_pool(derive_seed(seed, "names"), functional_count, name_style)
        icon_id = 2
        for node in graph.nodes:
            for child in node.children:
                forged = forge_icon(derive_seed(seed, "icon", child), pool.draw(), IconKind.FUNCTIONAL)
                asset = IconAsset(icon_id, forged.name, forged.kind, forged.glyph)
                asset_for_child[child] = asset
                assets.append(asset)
                icon_id += 1
    screens: Dict[NodeId, ScreenSpec] = {}
    for node in graph.nodes:
        transitions = tmap.transitions(node.id)
        row_assets = []
        for t in transitions:
            if t.kind is EdgeKind.FORWARD:
                row_assets.append(asset_for_child[t.target])
            elif t.kind is EdgeKind.BACK:
                row_assets.append(back)
            else:
                row_assets.append(home)
        screens[node.id] = layout_screen(node.id, transitions, row_assets, seed, policy)
    return EnvBundle(
        graph=graph,
        tmap=tmap,
        screens=screens,
        assets=tuple(assets),
        seed=seed,
        name_style=name_style,
    )


def with_screens(bundle: EnvBundle, screens: Dict[NodeId, ScreenSpec], **changes) -> EnvBundle:
    """Bundle copy with replaced screens (variant transforms use this)."""
    return replace(bundle, screens=screens, **changes)


def bundle_to_dict(bundle: EnvBundle) -> dict:
    return {
        "schema": SCHEMA_NAME,
        "schema_version": SCHEMA_VERSION,
        "renderer_version": bundle.renderer_version,
        "seed": bundle.seed,
        "variant": bundle.variant,
        "name_style": bundle.name_style,
        "canvas": [CANVAS_SIZE, CANVAS_SIZE],
        "graph": bundle.graph.to_dict(),
        "assets": [a.to_dict() for a in bundle.assets],
        "screens": [
            {
                "node": node,
                "icons": [
                    {
                        "asset": icon.asset.icon_id,
                        "bbox": icon.bbox.to_list(),
                        "target": icon.target,
                    }
                    for icon in bundle.screens[node].icons
                ],
            }
            for node in sorted(bundle.screens)
        ],
    }


def bundle_from_dict(data: dict) -> EnvBundle:
    if data.get("schema") != SCHEMA_NAME:
        raise SchemaVersionError(f"unknown schema {data.get('schema')!r}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema version {data.get('schema_version')!r}"
        )
    graph = NavGraph.from_dict(data["graph"])
    assets = tuple(IconAsset.from_dict(a) for a in data["assets"])
    by_id = {a.icon_id: a for a in assets}
    screens: Dict[NodeId, ScreenSpec] = {}
    for entry in data["screens"]:
        icons = tuple(
            IconInstance(
                asset=by_id[item["asset"]],
                bbox=BBox(*item["bbox"]),
                target=item["target"],
            )
            for item in entry["icons"]
        )
        screens[entry["node"]] = ScreenSpec(node=entry["node"], icons=icons)
    return EnvBundle(
        graph=graph,
        tmap=transition_map(graph),
        screens=screens,
        assets=assets,
        seed=data["seed"],
        variant=data["variant"],
        renderer_version=data["renderer_version"],
        name_style=data.get("name_style", "pseudo"),
    )


def serialize_bundle(bundle: EnvBundle) -> bytes:
    text = json.dumps(bundle_to_dict(bundle), sort_keys=True, separators=(",", ":"))
    return (text + "\n").encode("utf-8")


def render_screen_png(spec: ScreenSpec) -> bytes:
    return encode_png(render_screen(spec))


def save_bundle(bundle: EnvBundle, directory: str | Path) -> Path:
    """Write env.json plus one PNG per screen; returns the directory.

    Screens render in a thread pool (rendering is pure per screen and both
    numpy and zlib release the GIL); bytes are deterministic regardless of
    scheduling because each file depends only on its own screen.
    """
    root = Path(directory)
    screens_dir = root / "screens"
    nodes = sorted(bundle.screens)
    try:
        screens_dir.mkdir(parents=True, exist_ok=True)
        (root / "env.json").write_bytes(serialize_bundle(bundle))
        with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
            pngs = pool.map(lambda n: render_screen_png(bundle.screens[n]), nodes)
            for node, png in zip(nodes, pngs):
                (screens_dir / f"{page_label(node)}.png").write_bytes(png)
    except OSError as exc:
        raise BundleIOError(f"cannot write bundle to {root}: {exc}") from exc
    return root


def load_bundle(directory: str | Path) -> EnvBundle:
    root = Path(directory)
    path = root / "env.json"
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise BundleIOError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleIOError(f"corrupt bundle metadata in {path}: {exc}") from exc
    return bundle_from_dict(data)
