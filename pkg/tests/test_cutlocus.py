import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpcut.cutlocus import (
    DiscGrid,
    SweepGrid,
    _segment_crossings,
    convexity_check,
    cut_locus_report,
    first_singular_hit,
    regular_non_intersection_check,
    su2_geodesic,
    su2_matrix,
    su2_spec,
    sweep_distance,
)
from kpcut.geodesics import GeodesicSpec, geodesic_point
from kpcut.lie import make_aiii
from kpcut.numerics import make_rng, mat_exp
from kpcut.quotient import project, quotient_distance

SU2 = make_aiii(2, 1)
P1 = np.array([[0, 1], [-1, 0]], dtype=complex)
P2 = np.array([[0, 1j], [1j, 0]])
Z = np.zeros((2, 2))


@settings(max_examples=30, deadline=None)
@given(phi=st.floats(0, 2 * math.pi), a=st.floats(-4, 4), t=st.floats(0, 4))
def test_closed_form_matches_group_exponentials(phi, a, t):
    z, w = su2_geodesic(phi, a, t)
    X = geodesic_point(su2_spec(phi, a, t_max=4.0), t)
    assert abs(z - X[0, 0]) < 1e-12 and abs(w - X[0, 1]) < 1e-12


# first singular hit


def test_first_hit_examples():
    for P in (P1, P2):
        t, X = first_singular_hit(GeodesicSpec(SU2, Z, P, t_max=4.0))
        assert abs(t - math.pi) < 1e-9
        assert np.abs(X + np.eye(2)).max() < 1e-9
    assert first_singular_hit(GeodesicSpec(SU2, Z, P1, t_max=1.0)) is None


def test_first_hit_at_t_max():
    t, _ = first_singular_hit(GeodesicSpec(SU2, Z, P1, t_max=math.pi, dt=1e-3))
    assert abs(t - math.pi) < 1e-9


@settings(max_examples=20, deadline=None)
@given(phi=st.floats(0, 2 * math.pi), a=st.floats(-3, 3))
def test_first_hit_closed_form(phi, a):
    # |w(t)| = |sin(st)| / s first vanishes at pi / s
    s = math.sqrt(1 + a * a)
    t, X = first_singular_hit(su2_spec(phi, a, t_max=3.5, dt=1e-3))
    assert abs(t - math.pi / s) < 1e-9
    assert abs(X[0, 1]) < 1e-8


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_first_hit_invariant_under_K(seed):
    rng = make_rng(seed)
    spec = GeodesicSpec(SU2, SU2.random_K(rng, norm=rng.uniform(0, 2)), SU2.random_P(rng, norm=1.0), t_max=3.5)
    t0 = first_singular_hit(spec)[0]
    t1 = first_singular_hit(spec.conjugated(SU2.random_k(rng)))[0]
    assert abs(t0 - t1) < 1e-9


def test_first_hit_requires_su2():
    dec = make_aiii(3, 1)
    with pytest.raises(ValueError):
        first_singular_hit(GeodesicSpec(dec, np.zeros((3, 3)), dec.basis_P[0]))


# sweep


def test_sweep_identity_and_projective():
    assert sweep_distance(np.eye(2)).best_time == 0.0
    assert sweep_distance(np.eye(2)).status == "identity"
    assert sweep_distance(-np.eye(2), SweepGrid(projective=True)).status == "identity"


def test_sweep_rotation_unique():
    res = sweep_distance(mat_exp(P1, 0.8))
    assert res.status == "reached" and res.multiplicity == 1
    assert abs(res.best_time - 0.8) < 2e-3
    m = res.minimizers[0]
    assert abs(m["a"]) < 1e-8 and abs(math.remainder(m["phase"], 2 * math.pi)) < 1e-8


def test_sweep_minus_identity_is_cut_point():
    res = sweep_distance(-np.eye(2))
    assert res.multiplicity >= 2 and abs(res.best_time - math.pi) < 2e-3
    assert all(abs(m["a"]) < 1e-8 for m in res.minimizers)


def test_sweep_regular_target_unique():
    res = sweep_distance(su2_matrix(0.5, math.sqrt(0.75)))
    assert res.multiplicity == 1 and abs(res.best_time - math.pi / 3) < 2e-3


def test_sweep_unreached():
    res = sweep_distance(-np.eye(2), SweepGrid(t_max=1.0, n_phases=8, a_steps=5))
    assert res.status == "unreached" and res.best_time is None
    assert res.closest_approach > 0.5


def test_sweep_projective_matches_sign():
    U = su2_matrix(-0.5, math.sqrt(0.75))
    strict = sweep_distance(U)
    proj = sweep_distance(U, SweepGrid(projective=True))
    assert proj.best_time <= strict.best_time + 1e-12
    assert abs(proj.best_time - math.pi / 3) < 2e-3


@pytest.mark.parametrize("t", [0.6, 1.5, 2.4, math.pi - 0.1])
def test_sweep_distance_consistency(t):
    # sweep time equals t0 + quotient distance from the offset point
    res = sweep_distance(mat_exp(P1, t))
    t0 = 1e-3
    d = quotient_distance(project(mat_exp(P1, t0)), project(mat_exp(P1, t)))
    assert d.converged
    assert abs(res.best_time - (t0 + d.distance)) < 2 * 1e-3


def test_sweep_lower_bound():
    t0 = 0.05
    p0 = project(mat_exp(P1, t0))
    rng = make_rng(8)
    for _ in range(4):
        z = 0.7 * np.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        w = math.sqrt(1 - abs(z) ** 2) * np.exp(2j * math.pi * rng.uniform())
        U = su2_matrix(z, w)
        res = sweep_distance(U)
        d = quotient_distance(p0, project(U))
        assert res.best_time >= d.distance - t0 - 1e-9


# non-intersection and convexity


def test_segment_crossing_detector():
    a = np.array([[0.0, 0.0], [1.0, 1.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    (pt,) = _segment_crossings(a, b)
    assert np.allclose(pt, [0.5, 0.5])
    assert _segment_crossings(a, a + [0.0, 0.5]) == []


def test_phase_only_difference_projects_identically():
    rep = regular_non_intersection_check([su2_spec(0.0, 0.0, 4.0), su2_spec(math.pi / 2, 0.0, 4.0)], 4.0, 1e-2, 0.02)
    (pair,) = rep.pairs
    assert pair.coincident and not pair.crossings and rep.passed


def test_distinct_drifts_do_not_cross():
    rep = regular_non_intersection_check([su2_spec(0.0, 0.5, 4.0), su2_spec(0.0, -0.5, 4.0)], 4.0, 1e-3, 0.02)
    (pair,) = rep.pairs
    assert not pair.coincident and not pair.crossings and pair.min_separation > 0


def test_random_specs_do_not_cross():
    rng = make_rng(0)
    specs = [su2_spec(rng.uniform(0, 2 * math.pi), rng.uniform(-2, 2), t_max=4.0) for _ in range(20)]
    rep = regular_non_intersection_check(specs, 4.0, 1e-2, 0.02)
    assert len(rep.pairs) == 190 and rep.intersections == []


def test_convexity_identical_specs():
    s = su2_spec(0.3, 0.4, 2.0)
    rep = convexity_check(s, s, np.linspace(0.2, 1.8, 6))
    assert rep.distances == [0.0] * 6 and rep.min_second_difference == 0.0


def test_convexity_pair():
    s1, s2 = su2_spec(0.0, 0.3, 3.0), su2_spec(1.0, -0.4, 3.0)
    T = math.pi / math.sqrt(1 + 0.4**2)
    rep = convexity_check(s1, s2, np.linspace(0.1 * T, 0.9 * T, 8))
    assert not rep.failures
    assert rep.min_second_difference >= -1e-4
    assert np.all(np.diff(rep.distances) > 0)


# report


def test_cut_locus_report_small_grid():
    rep = cut_locus_report(DiscGrid(radii=(0.5,), n_angles=2, include_center=False, diagonal_angles=(math.pi, 0.0)))
    kinds = [r["kind"] for r in rep.rows]
    assert kinds == ["regular", "regular", "singular"]  # the identity is excluded
    assert rep.passed
    for r in rep.rows:
        on_circle = abs(abs(complex(*r["z"])) - 1) < 1e-12
        assert (r["multiplicity"] >= 2) == on_circle
