from fractions import Fraction as F
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from fractal_martin.adjacency import AmbiguousContact, WordSpace, equivalent
from fractal_martin.boundary import address_point
from fractal_martin.config import ConfigError, load, parse
from fractal_martin.ifs import (
    IFS,
    IfsError,
    Similitude,
    cell_box,
    cell_in_parent,
    cell_vertices,
    compose_map,
    contact_dimension,
    fixed_points,
    in_hull,
    interiors_disjoint,
    osc_probe,
    validate,
)
from fractal_martin.words import enumerate_level, parse_infinite

from conftest import W

half = F(1, 2)


def cartesian_gasket(tol=1e-9, ratio2=0.5):
    h = 3**0.5 / 2
    return {
        "name": "gasket-float",
        "dimension": 2,
        "vertices": [[0.0, 0.0], [1.0, 0.0], [0.5, h]],
        "maps": [
            {"ratio": 0.5, "fixed_vertex": 1},
            {"ratio": ratio2, "fixed_vertex": 2},
            {"ratio": 0.5, "fixed_vertex": 3},
        ],
        "masses": ["1/2", "1/4", "1/4"],
        "arithmetic": {"tolerance": tol},
    }


def test_gasket_fixed_points_are_the_simplex_vertices(gasket_cfg):
    f0p, f0 = fixed_points(gasket_cfg.ifs)
    assert f0p == f0
    assert set(f0) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_gasket_cell_one(gasket_cfg):
    assert set(cell_vertices(W("1"), gasket_cfg.ifs)) == {(1, 0, 0), (half, half, 0), (half, 0, half)}


def test_gasket_contacts(gasket_cfg):
    ifs = gasket_cfg.ifs
    assert contact_dimension(W("12"), W("21"), ifs) == (0, False)
    assert contact_dimension(W("11"), W("22"), ifs)[0] == -1
    assert contact_dimension(W("1"), W("1"), ifs)[0] == 2


def test_gasket_open_set_probe(gasket_cfg):
    rep = osc_probe(gasket_cfg.ifs, samples=5)
    assert rep["status"] == "pass"


def test_overlapping_maps_fail_the_probe():
    maps = [Similitude.homothety(F(2, 3), (F(0),)), Similitude.homothety(F(2, 3), (F(1),))]
    ifs = IFS(maps, open_set=((F(0),), (F(1),)))
    rep = osc_probe(ifs)
    assert rep["status"] == "fail" and rep["overlapping_pairs"] == [(1, 2)]


def test_undeclared_open_set(carpet_cfg):
    ifs = IFS(carpet_cfg.ifs.maps)
    assert osc_probe(ifs)["status"] == "undeclared"


def test_homothety_fixes_its_center():
    s = Similitude.homothety(F(1, 3), (F(1), F(1, 2)))
    assert s((F(1), F(1, 2))) == (F(1), F(1, 2))
    assert s((F(0), F(0))) == (F(2, 3), F(1, 3))


def test_composition_order(gasket_cfg):
    ifs = gasket_cfg.ifs
    x = (F(1, 3), F(1, 3), F(1, 3))
    s1, s2, _ = ifs.maps
    assert compose_map(W("12"), ifs)(x) == s1(s2(x))


def test_carpet_numbering(carpet_cfg):
    ifs = carpet_cfg.ifs
    # 1 is the top-left cell, 8 the bottom-right one
    assert cell_box(W("1"), ifs) == ((0, F(2, 3)), (F(1, 3), 1))
    assert cell_box(W("8"), ifs) == ((F(2, 3), 0), (1, F(1, 3)))
    assert contact_dimension(W("36"), W("52"), ifs)[0] == 0
    assert contact_dimension(W("25"), W("34"), ifs)[0] == 1
    corner = (F(2, 3), F(2, 3))
    for w in ("36", "51", "28"):
        lo, hi = cell_box(W(w), ifs)
        assert all(a <= c <= b for a, b, c in zip(lo, hi, corner))


def test_carpet_open_set(carpet_cfg):
    assert osc_probe(carpet_cfg.ifs)["status"] == "pass"


def test_cells_nest(gasket_cfg, carpet_cfg):
    for cfg in (gasket_cfg, carpet_cfg):
        for w in enumerate_level(2, cfg.ifs.n_letters):
            for a in range(1, cfg.ifs.n_letters + 1):
                assert cell_in_parent(w, a, cfg.ifs)


def test_hull_and_disjointness():
    tri = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1))]
    assert in_hull((F(1, 4), F(1, 4)), tri)
    assert in_hull((F(1, 2), F(1, 2)), tri)
    assert not in_hull((F(1), F(1)), tri)
    other = [(F(1), F(1)), (F(1), F(0)), (F(0), F(1))]
    assert interiors_disjoint(tri, other)
    assert not interiors_disjoint(tri, [(F(1, 4), F(1, 4)), (F(1), F(1)), (F(0), F(1))])


def test_non_similitude_rejected():
    s = Similitude(((half, F(0)), (F(0), F(1, 3))), (F(0), F(0)), half)
    t = Similitude.homothety(half, (F(1), F(0)))
    u = Similitude.homothety(half, (F(0), F(1)))
    with pytest.raises(IfsError):
        validate(IFS((s, t, u)))


def test_shared_fixed_points_rejected():
    s = Similitude.homothety(half, (F(0),))
    t = Similitude.homothety(F(1, 3), (F(0),))
    with pytest.raises(IfsError):
        validate(IFS((s, t)))


def test_tolerance_mode_matches_exact_structure(gasket_cfg):
    exact = gasket_cfg.space()
    approx = load(cartesian_gasket()).space()
    for n in range(5):
        assert exact.level(n).classes == approx.level(n).classes


def test_tolerance_mode_flags_near_misses():
    # S_2 slightly off: S_1(p2) and S_2(p1) end up 1.5 eps apart
    with pytest.warns(AmbiguousContact):
        cfg = load(cartesian_gasket(ratio2=0.5 + 1.5e-9))
    assert not equivalent(W("12"), W("21"), cfg.ifs)


def test_tolerance_mode_flags_near_miss_vertices():
    ifs = load(cartesian_gasket()).ifs
    ifs._cell_cache[W("21")] = tuple((x + 1.5e-9, y) for x, y in cell_vertices(W("21"), ifs))
    with pytest.warns(AmbiguousContact):
        assert not equivalent(W("12"), W("21"), ifs)
    with pytest.warns(AmbiguousContact):
        WordSpace(ifs).level(2)


def test_address_of_period_12(gasket_cfg):
    a = address_point(parse_infinite("(12)", 3), gasket_cfg.ifs)
    assert a.point == (F(2, 3), F(1, 3), 0)
    assert a.cartesian == pytest.approx((1 / 3, 0))


def test_tetrahedron_cells(tetra):
    ifs = tetra.space.ifs
    assert contact_dimension(W("1"), W("2"), ifs)[0] == 0
    assert contact_dimension(W("12"), W("21"), ifs)[0] == 0
    assert contact_dimension(W("11"), W("22"), ifs)[0] == -1
    assert osc_probe(ifs)["status"] == "pass"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3), max_size=6).map(bytes), st.lists(st.integers(1, 3), max_size=6).map(bytes))
def test_composition_is_a_homomorphism(u, v):
    ifs = load("gasket-2d").ifs
    x = (F(1, 5), F(3, 10), F(1, 2))
    assert compose_map(u + v, ifs)(x) == compose_map(u, ifs)(compose_map(v, ifs)(x))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=7).map(bytes))
def test_child_cells_lie_in_parent_hull(w):
    ifs = load("gasket-2d").ifs
    hull = [ifs.chart(p) for p in cell_vertices(w[:-1], ifs)]
    assert all(in_hull(ifs.chart(p), hull, 0) for p in cell_vertices(w, ifs))
