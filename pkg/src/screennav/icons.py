"""Icon assets: pseudo-random names and procedural glyph programs.

Icons are drawn from a seeded generator rather than an image library so that
no visual or lexical prior helps an agent, and so a bundle's metadata alone
can reproduce every pixel. A glyph is an ordered list of primitive draw ops
(disc, ring, bar, triangle, cross) with palette colors and normalized
geometry; the rasterizer interprets it inside the icon's glyph box.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set, Tuple

from .seeding import rng_for

HOME_NAME = "Home"
BACK_NAME = "Back"
RESERVED_NAMES = frozenset({HOME_NAME, BACK_NAME})


class IconKind(str, Enum):
    FUNCTIONAL = "functional"
    HOME = "home"
    BACK = "back"
    NOISE = "noise"


class Shape(str, Enum):
    DISC = "disc"
    RING = "ring"
    BAR = "bar"
    TRIANGLE = "triangle"
    CROSS = "cross"


# Saturated, clearly non-white palette; glyph plates guarantee the bbox
# center pixel never matches the background.
PALETTE: Tuple[Tuple[int, int, int], ...] = (
    (198, 40, 40),
    (216, 98, 20),
    (241, 179, 27),
    (94, 148, 40),
    (26, 128, 98),
    (22, 114, 186),
    (58, 66, 178),
    (118, 48, 170),
    (186, 38, 112),
    (96, 72, 48),
    (60, 60, 60),
    (16, 88, 66),
    (160, 54, 26),
    (40, 110, 150),
    (130, 130, 34),
    (88, 30, 66),
)


@dataclass(frozen=True)
class GlyphOp:
    """One primitive draw op; cx/cy/size are fractions of the glyph box."""

    shape: Shape
    color: Tuple[int, int, int]
    cx: float
    cy: float
    size: float
    param: float = 0.0

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.value,
            "color": list(self.color),
            "cx": self.cx,
            "cy": self.cy,
            "size": self.size,
            "param": self.param,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GlyphOp":
        return cls(
            shape=Shape(data["shape"]),
            color=tuple(data["color"]),
            cx=data["cx"],
            cy=data["cy"],
            size=data["size"],
            param=data["param"],
        )


@dataclass(frozen=True)
class IconAsset:
    icon_id: int
    name: str
    kind: IconKind
    glyph: Tuple[GlyphOp, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.icon_id,
            "name": self.name,
            "kind": self.kind.value,
            "glyph": [op.to_dict() for op in self.glyph],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IconAsset":
        return cls(
            icon_id=data["id"],
            name=data["name"],
            kind=IconKind(data["kind"]),
            glyph=tuple(GlyphOp.from_dict(op) for op in data["glyph"]),
        )


# Light accent tone; deliberately not pure white so every painted pixel
# stays distinguishable from the canvas background.
LIGHT = (235, 235, 235)

# Fixed system glyphs: a house for Home, a left arrow for Back. Each starts
# with a plate op that covers the box center.
HOME_GLYPH: Tuple[GlyphOp, ...] = (
    GlyphOp(Shape.BAR, (22, 114, 186), 0.5, 0.5, 0.92, 0.92),
    GlyphOp(Shape.TRIANGLE, LIGHT, 0.5, 0.32, 0.62, 0.0),
    GlyphOp(Shape.BAR, LIGHT, 0.5, 0.62, 0.44, 0.75),
    GlyphOp(Shape.BAR, (22, 114, 186), 0.5, 0.72, 0.14, 1.6),
)

BACK_GLYPH: Tuple[GlyphOp, ...] = (
    GlyphOp(Shape.BAR, (60, 60, 60), 0.5, 0.5, 0.92, 0.92),
    GlyphOp(Shape.TRIANGLE, LIGHT, 0.36, 0.5, 0.52, 3.0),
    GlyphOp(Shape.BAR, LIGHT, 0.62, 0.5, 0.36, 0.28),
)


_ONSETS = (
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s",
    "t", "v", "w", "z", "br", "cl", "dr", "fl", "gr", "kr", "pl", "sk",
    "st", "tr", "vl", "zh",
)
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "io", "ou")
_CODAS = ("", "", "l", "m", "n", "r", "s", "t", "x", "nd", "rk", "sh")

# Curated real-word pool, selectable per the name-style switch. Enough
# entries for the default environment's 230 functional edges.
WORD_POOL: Tuple[str, ...] = tuple(
    sorted(
        {
            "Acorn", "Alloy", "Amber", "Anchor", "Antler", "Apron", "Arch",
            "Arrow", "Aspen", "Atlas", "Badge", "Bamboo", "Banner", "Barrel",
            "Basket", "Beacon", "Beetle", "Bell", "Birch", "Bison", "Blade",
            "Bloom", "Bolt", "Boot", "Bottle", "Boulder", "Bow", "Brick",
            "Bridge", "Brook", "Brush", "Bucket", "Bugle", "Butter", "Cabin",
            "Cactus", "Camel", "Candle", "Canoe", "Canyon", "Carpet", "Cedar",
            "Chalk", "Cherry", "Chime", "Cinder", "Clover", "Cobalt", "Comet",
            "Compass", "Coral", "Cotton", "Cradle", "Crane", "Crater", "Crow",
            "Crystal", "Daisy", "Dew", "Dome", "Donkey", "Drift", "Drum",
            "Dune", "Eagle", "Easel", "Ember", "Engine", "Falcon", "Feather",
            "Fern", "Ferry", "Fiddle", "Flag", "Flask", "Flint", "Flute",
            "Fog", "Forge", "Fossil", "Fox", "Frost", "Gale", "Garnet",
            "Gazelle", "Geyser", "Ginger", "Glacier", "Glove", "Goose",
            "Gorge", "Granite", "Grape", "Grove", "Gull", "Hammer", "Harbor",
            "Harp", "Hawk", "Hazel", "Heron", "Hinge", "Hive", "Hollow",
            "Hoof", "Hook", "Horn", "Hound", "Husk", "Ibis", "Icicle",
            "Ingot", "Iris", "Ivory", "Jade", "Jasper", "Jetty", "Jug",
            "Juniper", "Kayak", "Kettle", "Kite", "Knoll", "Ladder", "Lagoon",
            "Lantern", "Larch", "Lark", "Latch", "Ledge", "Lemon", "Lentil",
            "Lilac", "Lily", "Linen", "Lobster", "Locket", "Loom", "Lotus",
            "Lynx", "Mango", "Mantis", "Maple", "Marble", "Marsh", "Mast",
            "Meadow", "Mesa", "Mill", "Mint", "Mole", "Moss", "Moth", "Mule",
            "Mural", "Nectar", "Nest", "Nickel", "Nimbus", "Oak", "Oasis",
            "Ocean", "Olive", "Onyx", "Opal", "Orchid", "Otter", "Owl",
            "Paddle", "Pagoda", "Palm", "Panda", "Pansy", "Parrot", "Peach",
            "Pearl", "Pebble", "Pelican", "Pepper", "Perch", "Pigeon", "Pine",
            "Pipe", "Plank", "Plow", "Plum", "Pond", "Poppy", "Prism",
            "Pulley", "Quail", "Quarry", "Quartz", "Quill", "Raft", "Rake",
            "Raven", "Reed", "Ridge", "Ripple", "Robin", "Rope", "Rudder",
            "Rune", "Saddle", "Sage", "Sail", "Salmon", "Sandal", "Sapphire",
            "Scarf", "Shale", "Shell", "Shovel", "Shrub", "Sickle", "Silo",
            "Slate", "Sled", "Sloth", "Snail", "Sparrow", "Spear", "Spindle",
            "Spruce", "Squash", "Stump", "Summit", "Swan", "Sycamore",
            "Tassel", "Teal", "Thicket", "Thimble", "Thistle", "Tide",
            "Tiger", "Timber", "Torch", "Trellis", "Trout", "Trunk", "Tulip",
            "Tundra", "Turnip", "Umber", "Urchin", "Valley", "Vane", "Velvet",
            "Vine", "Violet", "Wagon", "Walnut", "Walrus", "Wand", "Weasel",
            "Wharf", "Wheat", "Whisk", "Willow", "Wren", "Yarn", "Yoke",
            "Zephyr", "Zinnia",
        }
    )
)


@dataclass
class NamePool:
    """Ordered unique names with a draw cursor."""

    names: Tuple[str, ...]
    cursor: int = 0

    def draw(self) -> str:
        if self.cursor >= len(self.names):
            raise IndexError("name pool exhausted")
        name = self.names[self.cursor]
        self.cursor += 1
        return name

    def draw_many(self, count: int) -> List[str]:
        return [self.draw() for _ in range(count)]

    def remaining(self) -> int:
        return len(self.names) - self.cursor


def _pseudo_word(rng) -> str:
    # CV / CVC alternation, 2-3 syllables, capped to the 4..10 letter band.
    while True:
        syllables = rng.randint(2, 3)
        parts = []
        for i in range(syllables):
            parts.append(rng.choice(_ONSETS))
            parts.append(rng.choice(_VOWELS))
            if i == syllables - 1 or rng.random() < 0.35:
                parts.append(rng.choice(_CODAS))
        word = "".join(parts)
        if 4 <= len(word) <= 10:
            return word.capitalize()


def make_name_pool(
    seed: int,
    count: int,
    style: str = "pseudo",
    exclude: Optional[Set[str]] = None,
) -> NamePool:
    """Build ``count`` unique names.

    style="pseudo" draws from the syllable grammar; style="words" samples the
    curated real-word pool instead. Reserved system names and anything in
    ``exclude`` never appear.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    banned = set(RESERVED_NAMES)
    if exclude:
        banned |= set(exclude)
    rng = rng_for(seed, "name-pool", style)
    names: List[str] = []
    taken: Set[str] = set()
    if style == "pseudo":
        while len(names) < count:
            word = _pseudo_word(rng)
            if word in taken or word in banned:
                continue
            taken.add(word)
            names.append(word)
    elif style == "words":
        candidates = [w for w in WORD_POOL if w not in banned]
        if count > len(candidates):
            raise ValueError(
                f"word pool holds {len(candidates)} usable names, need {count}"
            )
        names = rng.sample(candidates, count)
    else:
        raise ValueError(f"unknown name style: {style!r}")
    return NamePool(names=tuple(names))


def forge_icon(seed: int, name: str, kind: IconKind = IconKind.FUNCTIONAL) -> IconAsset:
    """Deterministically forge an icon for (seed, name).

    Home and Back always receive their fixed system glyphs. Everything else
    gets a 2-5 op program: a plate that covers the box center plus 1-4
    accent primitives.
    """
    if not name:
        raise ValueError("icon name must be non-empty")
    if kind is IconKind.HOME:
        return IconAsset(icon_id=0, name=HOME_NAME, kind=kind, glyph=HOME_GLYPH)
    if kind is IconKind.BACK:
        return IconAsset(icon_id=1, name=BACK_NAME, kind=kind, glyph=BACK_GLYPH)
    rng = rng_for(seed, "glyph", name, kind.value)
    plate_shape = rng.choice((Shape.DISC, Shape.BAR))
    plate_color = rng.choice(PALETTE)
    ops = [
        GlyphOp(
            shape=plate_shape,
            color=plate_color,
            cx=0.5,
            cy=0.5,
            size=round(rng.uniform(0.82, 0.95), 3),
            param=round(rng.uniform(0.85, 1.0), 3),
        )
    ]
    for _ in range(rng.randint(1, 4)):
        shape = rng.choice(tuple(Shape))
        color = rng.choice([c for c in PALETTE if c != plate_color] + [LIGHT])
        ops.append(
            GlyphOp(
                shape=shape,
                color=color,
                cx=round(rng.uniform(0.25, 0.75), 3),
                cy=round(rng.uniform(0.25, 0.75), 3),
                size=round(rng.uniform(0.15, 0.45), 3),
                param=round(rng.uniform(0.0, 4.0), 3),
            )
        )
    return IconAsset(icon_id=-1, name=name, kind=kind, glyph=tuple(ops))
