import pytest

from screennav.icons import (
    BACK_GLYPH,
    HOME_GLYPH,
    IconKind,
    WORD_POOL,
    forge_icon,
    make_name_pool,
)


def test_pool_names_unique_and_sized():
    pool = make_name_pool(7, 300)
    assert len(set(pool.names)) == 300
    assert all(4 <= len(n) <= 10 for n in pool.names)
    assert all(n not in ("Home", "Back") for n in pool.names)


def test_pool_deterministic():
    assert make_name_pool(7, 300).names == make_name_pool(7, 300).names
    assert make_name_pool(7, 50).names != make_name_pool(8, 50).names


def test_pool_small():
    pool = make_name_pool(7, 3)
    assert len(set(pool.draw_many(3))) == 3
    assert pool.remaining() == 0
    with pytest.raises(IndexError):
        pool.draw()


def test_pool_covers_env_base_demand():
    # one name per forward edge: 231 nodes - 1
    assert len(set(make_name_pool(1, 230).names)) == 230


def test_word_style_pool():
    pool = make_name_pool(3, 230, style="words")
    assert len(set(pool.names)) == 230
    assert set(pool.names) <= set(WORD_POOL)


def test_pool_exclusion():
    base = set(make_name_pool(1, 50).names)
    fresh = make_name_pool(2, 50, exclude=base)
    assert not base & set(fresh.names)


def test_reserved_glyphs_fixed():
    for seed in (0, 1, 99):
        assert forge_icon(seed, "Home", IconKind.HOME).glyph == HOME_GLYPH
        assert forge_icon(seed, "Back", IconKind.BACK).glyph == BACK_GLYPH


def test_forge_deterministic():
    one = forge_icon(5, "Velka")
    two = forge_icon(5, "Velka")
    assert one.glyph == two.glyph
    assert forge_icon(6, "Velka").glyph != one.glyph
    assert forge_icon(5, "Molin").glyph != one.glyph


def test_forge_op_budget():
    for name in make_name_pool(11, 40).names:
        glyph = forge_icon(11, name).glyph
        assert 2 <= len(glyph) <= 5


def test_forge_rejects_empty_name():
    with pytest.raises(ValueError):
        forge_icon(1, "")


def test_glyph_roundtrip_serialization():
    asset = forge_icon(9, "Tarnow")
    from screennav.icons import IconAsset

    assert IconAsset.from_dict(asset.to_dict()) == asset
