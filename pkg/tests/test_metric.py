import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pullback.errors import ContractViolation
from pullback.metric import PointCloud, family_diagnostics, hausdorff_dist, radius, semi_dist


def brute_semi(A, B, w=1.0):
    # exhaustive O(|A||B|) oracle in plain python
    best = 0.0
    for a in A:
        nearest = min(math.sqrt(w * sum((ai - bi) ** 2 for ai, bi in zip(a, b))) for b in B)
        best = max(best, nearest)
    return best


def cloud_pair(max_dim=5, max_n=12, tiny=True):
    coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False, width=64)
    if not tiny:
        # keep squared differences of distinct coordinates out of the underflow range
        coords = coords.filter(lambda v: v == 0.0 or abs(v) >= 1e-120)

    @st.composite
    def build(draw):
        d = draw(st.integers(1, max_dim))
        n = draw(st.integers(1, max_n))
        m = draw(st.integers(1, max_n))
        k = draw(st.integers(1, max_n))
        A = draw(arrays(np.float64, (n, d), elements=coords))
        B = draw(arrays(np.float64, (m, d), elements=coords))
        C = draw(arrays(np.float64, (k, d), elements=coords))
        return PointCloud(A), PointCloud(B), PointCloud(C)

    return build()


def test_singletons():
    assert semi_dist(PointCloud([0.0]), PointCloud([3.0])) == 3.0
    assert hausdorff_dist(PointCloud([0.0]), PointCloud([3.0])) == 3.0


def test_two_point_vs_origin():
    A = PointCloud([[0.0, 0.0], [1.0, 0.0]])
    B = PointCloud([[0.0, 0.0]])
    assert semi_dist(A, B) == 1.0
    assert semi_dist(B, A) == 0.0
    assert hausdorff_dist(A, B) == 1.0


def test_radius_examples(s1):
    assert radius(PointCloud([0.0])) == 0.0
    assert radius(PointCloud([-2.0, 5.0])) == 5.0
    from pullback.dynamics import evolve_process
    a0 = evolve_process(s1, 0.0, -40.0, np.zeros(1))
    assert abs(radius(PointCloud(a0)) - 2.5) < 1e-6


def test_weighted_norm():
    A = PointCloud([[3.0, 4.0]], weight=0.25)
    assert radius(A) == pytest.approx(2.5)
    assert hausdorff_dist(A, PointCloud([[0.0, 0.0]], weight=0.25)) == pytest.approx(2.5)


def test_construction_contracts():
    with pytest.raises(ContractViolation):
        PointCloud(np.empty((0, 2)))
    with pytest.raises(ContractViolation):
        PointCloud([[0.0, np.nan]])
    with pytest.raises(ContractViolation):
        PointCloud([0.0], weight=0.0)
    with pytest.raises(ContractViolation):
        semi_dist(PointCloud([[0.0, 0.0]]), PointCloud([0.0]))
    with pytest.raises(ContractViolation):
        semi_dist(PointCloud([0.0], 1.0), PointCloud([0.0], 0.5))


def test_constant_family_diagnostics():
    fam = {float(t): PointCloud([2.0]) for t in range(0, 11)}
    d = family_diagnostics(fam, "forward")
    assert d.max_radius == 2.0 and d.bounded


def test_s1_closed_form_family_diagnostics():
    ts = np.linspace(0.0, 10.0, 2001)
    fam = {float(t): PointCloud([2.0 + math.exp(-t) * (t + 0.5)]) for t in ts}
    d = family_diagnostics(fam, "forward")
    assert d.argmax_t == pytest.approx(0.5)
    assert d.max_radius == pytest.approx(2.0 + math.exp(-0.5), abs=1e-12)
    back = {float(t): PointCloud([2.0 + math.exp(t) / 2]) for t in -ts}
    d = family_diagnostics(back, "backward")
    assert d.max_radius == 2.5 and d.argmax_t == 0.0


def test_family_diagnostics_empty_range():
    with pytest.raises(ContractViolation):
        family_diagnostics({1.0: PointCloud([0.0])}, "backward")


@settings(max_examples=1000, deadline=None)
@given(cloud_pair())
def test_metric_axioms(clouds):
    A, B, C = clouds
    dab = hausdorff_dist(A, B)
    assert dab == hausdorff_dist(B, A)
    assert hausdorff_dist(A, C) <= (dab + hausdorff_dist(B, C)) * (1 + 1e-12)
    assert semi_dist(A, A) == 0.0
    assert (dab == 0.0) == (A.as_set() == B.as_set())


@settings(max_examples=300, deadline=None)
@given(cloud_pair(max_n=30, tiny=False))
def test_brute_force_equivalence(clouds):
    A, B, _ = clouds
    assert semi_dist(A, B) == brute_semi(A.points.tolist(), B.points.tolist())


def test_brute_force_large_clouds():
    rng = np.random.default_rng(7)
    for d in (1, 3, 5):
        A = rng.normal(size=(1000, d))
        B = rng.normal(size=(300, d))
        assert semi_dist(PointCloud(A), PointCloud(B)) == brute_semi(A.tolist(), B.tolist())


@settings(max_examples=200, deadline=None)
@given(cloud_pair())
def test_monotone_under_inclusion(clouds):
    A, B, C = clouds
    BC = PointCloud(np.vstack([B.points, C.points]))
    assert semi_dist(A, BC) <= semi_dist(A, B)


def test_distinct_subnormal_scale_points():
    A, B = PointCloud([0.0]), PointCloud([1.3e-285])
    assert hausdorff_dist(A, B) == pytest.approx(1.3e-285, rel=1e-15)
    assert semi_dist(PointCloud([[0.0, 5e-300]]), PointCloud([[0.0, 0.0], [1.0, 1.0]])) > 0.0


def test_identity_of_indiscernibles_permutation():
    pts = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
    A, B = PointCloud(pts), PointCloud(pts[::-1])
    assert hausdorff_dist(A, B) == 0.0
    B2 = PointCloud(np.vstack([pts[:-1], pts[-1] + 1e-9]))
    assert hausdorff_dist(A, B2) > 0.0
