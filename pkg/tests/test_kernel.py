from fractions import Fraction as F
import csv
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from fractal_martin.config import load
from fractal_martin.kernel import (
    AuditRefused,
    MetricWeights,
    TruncationWarning,
    bridge_factor,
    check_B1,
    extended_kernel,
    fingerprint,
    kernel_via_theorem,
    martin_kernel,
    martin_kernel_hom,
    martin_metric,
    periodic_test_points,
    separation_witness,
    write_kernel_csv,
)
from fractal_martin.words import EMPTY, EventuallyPeriodic, enumerate_upto, parse_infinite

from conftest import W, cached

words3 = st.lists(st.integers(1, 3), max_size=3).map(bytes)


def test_worked_kernel_values(gasket):
    assert martin_kernel(gasket, W("1"), W("122")) == 1
    assert martin_kernel(gasket, W("12"), W("211")) == 4
    assert martin_kernel_hom(gasket, W("1"), W("122")) == F(3, 2)
    assert kernel_via_theorem(gasket, W("1"), W("122"), audit_depth=4) == (1, 1)
    assert kernel_via_theorem(gasket, W("12"), W("12"), audit_depth=4) == (8, 8)
    assert martin_kernel(gasket, EMPTY, W("2321")) == 1


def test_bridge_factor(gasket):
    # R(12) = 2, N^-2 = 1/9, Σ m = 1/8 + 1/8
    assert bridge_factor(gasket, W("12")) == F(2, 9) / F(1, 4)
    assert bridge_factor(gasket, EMPTY) == 1


def test_kernel_identities(gasket):
    """Elementary properties of k relating it to q, classes and children."""
    space = gasket.space
    for v in enumerate_upto(3, 3):
        for w in enumerate_upto(3, 3):
            if v != w:
                assert martin_kernel(gasket, v, w) == gasket.q(v, w) / gasket.class_mass(v)
            kids = [w + bytes([i]) for i in (1, 2, 3)]
            for wt in space.cls(w):
                for i in (1, 2, 3):
                    assert martin_kernel(gasket, w, wt + bytes([i])) == 1 / gasket.class_mass(w)
            if len(v) > len(w):
                continue
            vals = {martin_kernel(gasket, v, wt + bytes([j])) for wt in space.cls(w) for j in (1, 2, 3)}
            assert len(vals) == 1
            if v not in space.cls(w):
                avg = sum(martin_kernel(gasket, v, x) * gasket.mass(x) for x in space.cls(w)) / gasket.class_mass(w)
                assert martin_kernel(gasket, v, kids[0]) == avg
                for wt in space.cls(w):
                    if len(w) and space.same_class(w[:-1], wt[:-1]):
                        assert martin_kernel(gasket, v, w) == martin_kernel(gasket, v, wt)


def test_bridge_refuses_without_B2():
    chain = load("carpet-extended:weighted").chain()
    with pytest.raises(AuditRefused, match="B2"):
        kernel_via_theorem(chain, W("1"), W("12"), audit_depth=2)


def test_bridge_on_tetrahedron(tetra):
    for v in enumerate_upto(2, 4):
        for w in tetra.green_from(v, 3):
            bridge, direct = kernel_via_theorem(tetra, v, w, audit_depth=3)
            assert bridge == direct


def _full_rho(chain, v, w, depth):
    total = F(0)
    for u in enumerate_upto(depth, chain.n_letters):
        a = chain.mass(u) ** (len(u) + 1)
        total += a * abs(martin_kernel(chain, u, v) - martin_kernel(chain, u, w))
    return total


def test_metric_against_full_sum(gasket):
    weights = MetricWeights.default(gasket, 4)
    ws = enumerate_upto(2, 3) + [W("122"), W("211"), W("333")]
    for v in ws:
        for w in ws:
            assert martin_metric(gasket, v, w, weights) == _full_rho(gasket, v, w, 4)


def test_metric_worked_value(gasket):
    assert martin_metric(gasket, W("1"), W("2"), MetricWeights.default(gasket, 3)) == F(3, 4)


def test_truncation_warning(gasket):
    with pytest.warns(TruncationWarning):
        martin_metric(gasket, W("1222"), W("2"), MetricWeights.default(gasket, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        martin_metric(gasket, W("12"), W("2"), MetricWeights.default(gasket, 2))


def test_weights_must_be_positive(gasket):
    bad = MetricWeights(3, lambda u: 0 if u == EMPTY else 1)
    with pytest.raises(ValueError, match="positive"):
        martin_metric(gasket, W("1"), W("2"), bad)


@settings(max_examples=80, deadline=None)
@given(words3, words3)
def test_separation_witness(v, w):
    _, chain = cached("gasket-2d")
    weights = MetricWeights.default(chain, 4)
    rho = martin_metric(chain, v, w, weights)
    hit = separation_witness(chain, v, w, weights)
    if v == w:
        assert hit is None and rho == 0
    else:
        u, term = hit
        assert len(u) == max(len(v), len(w))
        assert 0 < term <= rho


@settings(max_examples=40, deadline=None)
@given(words3, words3, words3)
def test_triangle_inequality(u, v, w):
    _, chain = cached("gasket-2d:skewed")
    weights = MetricWeights.default(chain, 5)
    r = lambda a, b: martin_metric(chain, a, b, weights)  # noqa: E731
    assert r(u, w) <= r(u, v) + r(v, w)
    assert r(u, v) == r(v, u)


def test_extended_kernel_examples(gasket):
    ones = parse_infinite("(1)", 3)
    ek = extended_kernel(gasket, W("2"), ones, 6)
    assert ek.values == [0] * 6 and ek.stabilized_at == 1
    ek = extended_kernel(gasket, EMPTY, parse_infinite("1(23)", 3), 6)
    assert ek.values == [1] * 6
    ek = extended_kernel(gasket, W("1"), parse_infinite("(12)", 3), 8)
    assert ek.proportional
    assert ek.hom_values[:3] == [3, 3, F(3, 2)]
    assert ek.stabilized_at is None


def test_extended_kernel_stabilizes_off_the_gluing(gasket):
    ek = extended_kernel(gasket, W("1"), parse_infinite("(13)", 3), 6)
    assert ek.proportional
    ek = extended_kernel(gasket, W("12"), parse_infinite("1(2)", 3), 8)
    assert ek.stabilized_at is not None


def test_periodic_test_points():
    pts = periodic_test_points(3)
    names = [p.format(3) for p in pts]
    assert "(1)" in names and "(12)" in names and "2(1)" in names
    assert "1(1)" not in names and "(11)" not in names
    assert len(set(names)) == len(names) >= 10


def test_B1_evidence(gasket, tetra):
    rep = check_B1(gasket, depth=6)
    assert rep["pass"] and rep["rows"]
    assert check_B1(tetra, depth=4)["pass"]


def test_B1_detects_growth(gasket):
    # a sequence that keeps growing defeats the check
    from fractal_martin.kernel import _contracting

    assert not _contracting([F(n * n) for n in range(10)], 0, 2)
    assert _contracting([F(3), F(3), F(3, 2), F(9, 4), F(15, 8), F(33, 16), F(63, 32)], 1, 2)


def test_fingerprint_separates_points(gasket):
    a = fingerprint(gasket, parse_infinite("1(2)", 3), 6)
    b = fingerprint(gasket, parse_infinite("2(1)", 3), 6)
    c = fingerprint(gasket, parse_infinite("(1)", 3), 6)
    assert a == b != c


def test_kernel_csv(tmp_path, gasket):
    p = tmp_path / "k.csv"
    n = write_kernel_csv(gasket, 2, p)
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["v", "w", "k", "k_hom", "bridge_factor"]
    assert len(rows) == n + 1
    for v, w, k, kh, bf in rows[1:]:
        if v != w:
            assert F(k) == F(kh) * F(bf)


@pytest.mark.parametrize("name", ["gasket-2d", "gasket-2d:skewed", "tetrahedron"])
def test_kernel_sequences_are_proportional_to_homogeneous(name):
    # equal limits under m and under uniform masses, termwise
    _, chain = cached(name)
    for xi in periodic_test_points(chain.n_letters)[:12]:
        for v in enumerate_upto(2, chain.n_letters):
            assert extended_kernel(chain, v, xi, 6).proportional
