import json

import numpy as np
import pytest

from screennav.compositor import (
    BBox,
    CANVAS_SIZE,
    EnvBundle,
    LayoutPolicy,
    MIN_GAP,
    ScreenSpec,
    build_environment,
    bundle_from_dict,
    bundle_to_dict,
    layout_screen,
    load_bundle,
    render_screen,
    render_screen_png,
    save_bundle,
    serialize_bundle,
)
from screennav.errors import BundleIOError, LayoutOverflowError, SchemaVersionError
from screennav.graph import ROOT, BranchingSpec, EdgeKind
from screennav.raster import decode_png

from conftest import ENV_BASE_SEED


def assert_screen_boxes_ok(screen: ScreenSpec):
    boxes = [icon.bbox for icon in screen.icons]
    for box in boxes:
        assert 0 <= box.x0 < box.x1 <= CANVAS_SIZE
        assert 0 <= box.y0 < box.y1 <= CANVAS_SIZE
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            assert a.separated_from(b, MIN_GAP), f"{a} vs {b} on screen {screen.node}"


def test_bbox_contract():
    box = BBox(10, 20, 30, 40)
    assert box.contains(10, 20)
    assert not box.contains(30, 40)
    assert not box.contains(29, 40)
    assert box.center() == (20, 30)
    with pytest.raises(ValueError):
        BBox(10, 10, 10, 20)
    with pytest.raises(ValueError):
        BBox(-1, 0, 5, 5)


def test_root_screen_icon_count(env_base):
    # 5 icons at the root, no Home/Back
    screen = env_base.screen(ROOT)
    assert len(screen.icons) == 5
    assert all(icon.asset.kind.value == "functional" for icon in screen.icons)


def test_mid_depth_screen_icon_count(env_base):
    # depth-3 node: 2 children + Home + Back
    graph = env_base.graph
    node = next(n.id for n in graph.nodes if n.depth == 3)
    screen = env_base.screen(node)
    assert len(screen.icons) == 4
    kinds = sorted(icon.asset.kind.value for icon in screen.icons)
    assert kinds == ["back", "functional", "functional", "home"]


def test_all_screens_disjoint_and_inside(env_base):
    for node in env_base.screens:
        assert_screen_boxes_ok(env_base.screens[node])


def test_every_transition_has_one_icon(env_base):
    for node in env_base.screens:
        targets = [icon.target for icon in env_base.screens[node].icons]
        expected = [t.target for t in env_base.tmap.transitions(node)]
        assert sorted(targets) == sorted(expected)
        assert len(set(targets)) == len(targets)


def test_layout_deterministic(env_base):
    node = 6
    transitions = env_base.tmap.transitions(node)
    assets = [env_base.screens[node].icons[i].asset for i in range(len(transitions))]
    one = layout_screen(node, transitions, assets, ENV_BASE_SEED)
    two = layout_screen(node, transitions, assets, ENV_BASE_SEED)
    assert one == two


def test_reserved_slots(env_base):
    policy = LayoutPolicy()
    for node in env_base.screens:
        for icon in env_base.screens[node].icons:
            if icon.asset.kind.value == "back":
                assert (icon.bbox.x0, icon.bbox.y0) == policy.back_slot
            if icon.asset.kind.value == "home":
                assert (icon.bbox.x0, icon.bbox.y0) == policy.home_slot


def test_layout_overflow():
    from screennav.graph import Transition
    from screennav.icons import IconKind, forge_icon

    transitions = tuple(Transition(EdgeKind.FORWARD, i + 1) for i in range(80))
    assets = [forge_icon(0, f"Icon{i}", IconKind.FUNCTIONAL) for i in range(80)]
    with pytest.raises(LayoutOverflowError):
        layout_screen(0, transitions, assets, 1)


def test_render_deterministic(env_base):
    screen = env_base.screens[17]
    assert render_screen(screen) == render_screen(screen)
    assert render_screen_png(screen) == render_screen_png(screen)


def test_render_empty_screen():
    buf = render_screen(ScreenSpec(node=0, icons=()))
    # page label only: some ink near the top, white elsewhere
    assert np.any(buf.pixels[:50] != 255)
    assert np.all(buf.pixels[200:] == 255)


def test_icon_centers_are_inked(env_base):
    # center pixel of every icon bbox differs from the white background
    for node in env_base.screens:
        buf = render_screen(env_base.screens[node])
        for icon in env_base.screens[node].icons:
            cx, cy = icon.bbox.center()
            assert buf.pixel(cx, cy) != (255, 255, 255, 255), (
                f"blank center for {icon.asset.name} on screen {node}"
            )


def test_bundle_counts(env_base):
    assert env_base.node_count() == 231
    assert len(env_base.screens) == 231
    assert len(env_base.assets) == 232
    assert len({a.name for a in env_base.assets}) == 232
    assert len(env_base.functional_assets()) == 230


def test_single_node_environment():
    env = build_environment(BranchingSpec((0,)), 5)
    assert env.node_count() == 1
    assert len(env.screen(0).icons) == 0
    assert len(env.assets) == 2  # Home/Back exist even if never placed


def test_build_deterministic():
    spec = BranchingSpec.parse("3,2,0")
    assert serialize_bundle(build_environment(spec, 9)) == serialize_bundle(
        build_environment(spec, 9)
    )
    assert serialize_bundle(build_environment(spec, 9)) != serialize_bundle(
        build_environment(spec, 10)
    )


def test_bundle_roundtrip_dict(env_small):
    assert bundle_from_dict(bundle_to_dict(env_small)) == env_small


def test_save_load_roundtrip(tmp_path, env_small):
    save_bundle(env_small, tmp_path / "env")
    loaded = load_bundle(tmp_path / "env")
    assert loaded == env_small


def test_rerender_matches_saved_bytes(tmp_path, env_small):
    directory = save_bundle(env_small, tmp_path / "env")
    loaded = load_bundle(directory)
    for node in loaded.screens:
        disk = (directory / "screens" / f"page_{node}.png").read_bytes()
        assert render_screen_png(loaded.screens[node]) == disk


def test_saved_png_decodes_to_canvas_size(tmp_path, env_tiny):
    directory = save_bundle(env_tiny, tmp_path / "env")
    buf = decode_png((directory / "screens" / "page_0.png").read_bytes())
    assert (buf.width, buf.height) == (CANVAS_SIZE, CANVAS_SIZE)


def test_load_truncated_metadata(tmp_path, env_tiny):
    directory = save_bundle(env_tiny, tmp_path / "env")
    payload = (directory / "env.json").read_bytes()
    (directory / "env.json").write_bytes(payload[: len(payload) // 2])
    with pytest.raises(BundleIOError):
        load_bundle(directory)


def test_load_missing_dir(tmp_path):
    with pytest.raises(BundleIOError):
        load_bundle(tmp_path / "nope")


def test_load_wrong_schema_version(tmp_path, env_tiny):
    directory = save_bundle(env_tiny, tmp_path / "env")
    data = json.loads((directory / "env.json").read_text())
    data["schema_version"] = 999
    (directory / "env.json").write_text(json.dumps(data))
    with pytest.raises(SchemaVersionError):
        load_bundle(directory)
