from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings

from fracsim.collision import (
    BoneSegment,
    Obb,
    ProjectionInterval,
    axis_overlap,
    candidate_axes,
    project_extent,
    project_interval,
    sat_contact,
    scene_contacts,
    validate_obb,
)
from fracsim.fuzz import collision_fuzz, min_overlap, random_obb
from fracsim.geometry import Pose, rotation_z

from .strategies import obbs, rotations, unit_vectors


def aligned(center, half, label="") -> Obb:
    return Obb(np.asarray(center, float), np.eye(3), np.asarray(half, float), label)


def vertex_extent(box: Obb, axis: np.ndarray) -> float:
    """Oracle: max |(vertex - center) . axis| over the 8 corners."""
    return max(abs(float((v - box.center) @ axis)) for v in box.vertices())


def vertex_interval(box: Obb, axis: np.ndarray) -> tuple[float, float]:
    dots = [float(v @ axis) for v in box.vertices()]
    return min(dots), max(dots)


class TestCandidateAxes:
    def test_axis_aligned_pair_drops_parallel_edge_crosses(self):
        # Identical orientations: the three same-axis edge pairs are parallel
        # and their cross products vanish; the six mixed crosses survive
        # (they merely duplicate face normals, which SAT tolerates).
        a = aligned((0, 0, 0), (1, 1, 1))
        b = aligned((3, 0, 0), (1, 1, 1))
        axes = candidate_axes(a, b)
        assert len(axes) == 12
        dropped = {6 + 3 * i + j for i, j in itertools.product(range(3), range(3)) if i == j}
        assert {c.index for c in axes} == set(range(15)) - dropped
        # The surviving test set spans only the 3 distinct face directions.
        distinct = {tuple(np.round(np.abs(c.direction), 12)) for c in axes}
        assert len(distinct) == 3

    def test_general_orientation_gives_fifteen(self):
        rng = np.random.default_rng(3)
        from fracsim.geometry import random_rotation

        a = Obb(np.zeros(3), random_rotation(rng).T, np.array([0.1, 0.2, 0.3]))
        b = Obb(np.ones(3), random_rotation(rng).T, np.array([0.2, 0.1, 0.2]))
        assert len(candidate_axes(a, b)) == 15

    def test_shared_edge_direction_drops_parallel_pairs(self):
        # Second box rotated about z only: its z axis stays parallel to the
        # first box's z axis, so exactly one cross product degenerates.
        a = aligned((0, 0, 0), (1, 1, 1))
        b = Obb(np.array([2.0, 0, 0]), rotation_z(0.4).T, np.array([1.0, 1, 1]))
        axes = candidate_axes(a, b)
        parallel_pairs = sum(
            1
            for i, j in itertools.product(range(3), range(3))
            if np.linalg.norm(np.cross(a.axes[i], b.axes[j])) < 1e-8
        )
        assert parallel_pairs == 1
        assert len(axes) == 15 - parallel_pairs

    @settings(max_examples=100, deadline=None)
    @given(obbs(), obbs())
    def test_all_axes_unit_and_indices_ordered(self, a, b):
        axes = candidate_axes(a, b)
        assert len(axes) <= 15
        indices = [c.index for c in axes]
        assert indices == sorted(indices)
        for c in axes:
            assert abs(np.linalg.norm(c.direction) - 1.0) < 1e-9


class TestProjection:
    def test_single_axis(self):
        box = aligned((0, 0, 0), (1, 2, 3))
        assert project_extent(box, np.array([1.0, 0, 0])) == 1.0

    def test_diagonal_axis(self):
        box = aligned((0, 0, 0), (1, 1, 1))
        axis = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
        assert abs(project_extent(box, axis) - math.sqrt(2)) < 1e-12

    def test_unit_cube_interval(self):
        box = aligned((0, 0, 0), (1, 1, 1))
        iv = project_interval(box, np.array([1.0, 0, 0]))
        assert (iv.lo, iv.hi) == (-1.0, 1.0)

    def test_shifted_cube_interval(self):
        box = aligned((1.5, 0, 0), (1, 1, 1))
        iv = project_interval(box, np.array([1.0, 0, 0]))
        assert (iv.lo, iv.hi) == (0.5, 2.5)

    @settings(max_examples=150, deadline=None)
    @given(obbs(), unit_vectors())
    def test_extent_matches_vertex_oracle(self, box, axis):
        assert abs(project_extent(box, axis) - vertex_extent(box, axis)) < 1e-12

    @settings(max_examples=150, deadline=None)
    @given(obbs(), unit_vectors())
    def test_interval_matches_vertex_oracle(self, box, axis):
        iv = project_interval(box, axis)
        lo, hi = vertex_interval(box, axis)
        assert abs(iv.lo - lo) < 1e-12
        assert abs(iv.hi - hi) < 1e-12


class TestAxisOverlap:
    def test_partial(self):
        assert axis_overlap(ProjectionInterval(-1, 1), ProjectionInterval(0.5, 2.5)) == 0.5

    def test_separated_negative(self):
        assert axis_overlap(ProjectionInterval(-1, 1), ProjectionInterval(2, 4)) == -1.0

    def test_identical(self):
        assert axis_overlap(ProjectionInterval(-1, 1), ProjectionInterval(-1, 1)) == 2.0


class TestSatContact:
    def test_unit_cubes_overlap_half(self):
        p = aligned((0, 0, 0), (1, 1, 1), "p")
        d = aligned((1.5, 0, 0), (1, 1, 1), "d")
        out = sat_contact(p, d)
        assert out.colliding
        assert abs(out.depth - 0.5) < 1e-12
        assert np.max(np.abs(out.normal - np.array([1.0, 0, 0]))) < 1e-12
        assert out.pair == ("p", "d")

    def test_separated_cubes(self):
        p = aligned((0, 0, 0), (1, 1, 1))
        d = aligned((3.0, 0, 0), (1, 1, 1))
        out = sat_contact(p, d)
        assert not out.colliding
        assert out.depth == 0.0
        assert np.array_equal(out.normal, np.zeros(3))
        assert out.axis_index is None

    def test_touching_faces_count_as_separated(self):
        p = aligned((0, 0, 0), (1, 1, 1))
        d = aligned((2.0, 0, 0), (1, 1, 1))
        assert not sat_contact(p, d).colliding

    def test_normal_points_from_proximal_to_distal(self):
        p = aligned((0, 0, 0), (1, 1, 1))
        d = aligned((-1.5, 0, 0), (1, 1, 1))
        out = sat_contact(p, d)
        assert np.max(np.abs(out.normal - np.array([-1.0, 0, 0]))) < 1e-12

    def test_oracle_agreement_random_pairs(self):
        report = collision_fuzz(pairs=1000, seed=20240811)
        assert report.clean, report.disagreements

    def test_sat_contact_consistent_with_componentwise_ops(self):
        # The batched query must agree with the composition of the per-axis
        # operations. Near-exact ties can resolve to a different axis (the
        # two forms differ in the last ulp), so the axis check allows that.
        rng = np.random.default_rng(5)
        for _ in range(50):
            p = random_obb(rng)
            d = random_obb(rng)
            out = sat_contact(p, d)
            overlaps = {
                c.index: axis_overlap(project_interval(p, c.direction), project_interval(d, c.direction))
                for c in candidate_axes(p, d)
            }
            if min(overlaps.values()) <= 1e-15:
                assert not out.colliding or out.depth < 1e-12
            else:
                best = min(overlaps, key=lambda i: (overlaps[i], i))
                assert abs(out.depth - overlaps[best]) < 1e-12
                assert out.axis_index == best or abs(overlaps[out.axis_index] - overlaps[best]) < 1e-12


def unique_axis_margin(p: Obb, d: Obb) -> float:
    """Gap between the smallest and second-smallest axis overlap.

    Tie-broken results are deterministic for one enumeration but flip under
    reordering (swapping the boxes) or rounding (transforming them), so
    normal-direction assertions only make sense when the winner is unique.
    """
    overlaps = sorted(
        axis_overlap(project_interval(p, c.direction), project_interval(d, c.direction))
        for c in candidate_axes(p, d)
    )
    return overlaps[1] - overlaps[0] if len(overlaps) > 1 else float("inf")


class TestSatProperties:
    @settings(max_examples=150, deadline=None)
    @given(obbs(label="a"), obbs(label="b"))
    def test_boolean_symmetry_and_depth(self, a, b):
        ab = sat_contact(a, b)
        ba = sat_contact(b, a)
        assert ab.colliding == ba.colliding
        assert abs(ab.depth - ba.depth) < 1e-12
        if ab.colliding and abs(min_overlap(a, b)) > 1e-9 and unique_axis_margin(a, b) > 1e-9:
            # When the centers project equally onto the winning axis the sign
            # rule falls to its else-branch for both argument orders; the
            # negation property only applies off that degenerate plane.
            if abs(float((b.center - a.center) @ ab.normal)) > 1e-12:
                assert np.max(np.abs(ab.normal + ba.normal)) < 1e-9

    @settings(max_examples=100, deadline=None)
    @given(obbs(), obbs(), rotations())
    def test_rigid_motion_invariance(self, a, b, rot):
        pose = Pose(np.array([0.3, -0.1, 0.2]), rot)
        before = sat_contact(a, b)
        after = sat_contact(a.transformed(pose), b.transformed(pose))
        assert before.colliding == after.colliding
        assert abs(before.depth - after.depth) < 1e-9
        if (
            before.colliding
            and abs(min_overlap(a, b)) > 1e-9
            and unique_axis_margin(a, b) > 1e-9
        ):
            assert np.max(np.abs(after.normal - rot @ before.normal)) < 1e-6

    # Tight centers so most generated pairs actually collide; the remaining
    # filtering (separated or contained pairs) stays under the health check.
    @settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(obbs(center_half_range=0.08, ext_lo=0.05), obbs(center_half_range=0.08, ext_lo=0.05))
    def test_separation_translation_resolves_contact(self, a, b):
        out = sat_contact(a, b)
        assume(out.colliding)
        # Containment along the winning axis is the one case where the
        # interval-form overlap (the contained width) is smaller than the
        # translation needed to escape; the guarantee applies outside it.
        iva = project_interval(a, out.normal)
        ivb = project_interval(b, out.normal)
        contained = (iva.lo >= ivb.lo and iva.hi <= ivb.hi) or (
            ivb.lo >= iva.lo and ivb.hi <= iva.hi
        )
        assume(not contained)
        moved = Obb(b.center + out.depth * out.normal, b.axes, b.half_extents, b.label)
        after = sat_contact(a, moved)
        assert (not after.colliding) or after.depth <= 1e-9

    def test_depth_monotone_along_normal(self):
        p = aligned((0, 0, 0), (1, 1, 1))
        d = aligned((1.2, 0.3, -0.2), (1, 1, 1))
        first = sat_contact(p, d)
        assert first.colliding
        prev = first.depth
        for k in range(1, 9):
            shift = 0.1 * k * first.normal
            out = sat_contact(p, Obb(d.center + shift, d.axes, d.half_extents))
            if not out.colliding:
                break
            assert out.depth < prev
            prev = out.depth
        else:
            pytest.fail("never separated while marching along the contact normal")


class TestSceneContacts:
    def test_far_separated_scene(self):
        prox = [aligned((0, 0, 5), (0.1, 0.1, 0.1), "p0"), aligned((0, 0, 6), (0.1, 0.1, 0.1), "p1")]
        dist = [aligned((0, 0, 0), (0.1, 0.1, 0.1), "d0"), aligned((0, 0, 1), (0.1, 0.1, 0.1), "d1")]
        results = scene_contacts(prox, dist)
        assert len(results) == 4
        assert not any(r.colliding for r in results)
        assert [r.pair for r in results] == [
            ("p0", "d0"), ("p1", "d0"), ("p0", "d1"), ("p1", "d1"),
        ]

    def test_single_penetrating_pair(self):
        prox = [aligned((0, 0, 0), (0.1, 0.1, 0.1), "p0"), aligned((0, 0, 9), (0.1, 0.1, 0.1), "p1")]
        dist = [aligned((0.15, 0, 0), (0.1, 0.1, 0.1), "d0"), aligned((5, 5, 5), (0.1, 0.1, 0.1), "d1")]
        results = scene_contacts(prox, dist)
        hits = [r for r in results if r.colliding]
        assert len(hits) == 1
        assert hits[0].pair == ("p0", "d0")
        assert abs(hits[0].depth - 0.05) < 1e-12

    def test_rotated_distal_contact_normal_is_face_normal(self):
        # Distal box rotated against a proximal face: the winning axis is a
        # face normal of one of the boxes and the force direction matches it.
        prox = [aligned((0, 0, 0), (0.1, 0.1, 0.1), "p0"), aligned((0, 0, 9), (0.1, 0.1, 0.1), "p1")]
        tilted = Obb(np.array([0.16, 0.0, 0.0]), rotation_z(0.5).T, np.array([0.1, 0.05, 0.05]), "d0")
        dist = [tilted, aligned((5, 5, 5), (0.01, 0.01, 0.01), "d1")]
        hits = [r for r in scene_contacts(prox, dist) if r.colliding]
        assert len(hits) == 1
        face_normals = [row for box in (prox[0], tilted) for row in box.axes]
        assert any(
            min(np.linalg.norm(hits[0].normal - n), np.linalg.norm(hits[0].normal + n)) < 1e-9
            for n in face_normals
        )

    @settings(max_examples=60, deadline=None)
    @given(obbs(label="p0"), obbs(label="p1"), obbs(label="d0"), obbs(label="d1"))
    def test_batch_matches_single_queries(self, p0, p1, d0, d1):
        batch = scene_contacts([p0, p1], [d0, d1])
        pairs = [(p, d) for d in (d0, d1) for p in (p0, p1)]
        for got, (p, d) in zip(batch, pairs):
            expect = sat_contact(p, d)
            assert got.colliding == expect.colliding
            assert abs(got.depth - expect.depth) < 1e-12
            if got.colliding and unique_axis_margin(p, d) > 1e-12:
                assert got.axis_index == expect.axis_index
                assert np.max(np.abs(got.normal - expect.normal)) < 1e-9


class TestObbValidation:
    def test_rejects_non_orthogonal_axes(self):
        bad = Obb(np.zeros(3), np.array([[1.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0]]), np.ones(3))
        with pytest.raises(ValueError, match="orthonormal"):
            validate_obb(bad)

    def test_rejects_non_positive_extent(self):
        bad = Obb(np.zeros(3), np.eye(3), np.array([1.0, 0.0, 1.0]))
        with pytest.raises(ValueError, match="positive"):
            validate_obb(bad)

    def test_labels_enum_values(self):
        assert BoneSegment.PROXIMAL_SHAFT.value == "proximal_shaft"
        assert BoneSegment.DISTAL_CONDYLE.value == "distal_condyle"
