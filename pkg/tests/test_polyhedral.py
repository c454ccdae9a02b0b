import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tropsplit.lattice import IntMatrix
from tropsplit.polyhedral import (
    BOUNDARY,
    OUTSIDE,
    RELATIVE_INTERIOR,
    affine_slice,
    cone_fiber_product,
    cone_from_inequalities,
    cone_from_json,
    cone_from_rays,
    cone_to_json,
    contains,
    contains_cone,
    dual_cone,
    faces,
    full_space,
    intersect_cones,
    is_face_of,
    map_cone,
    membership,
    minimal_face_containing,
    orthant,
    preimage_cone,
    product_cone,
    zero_cone,
)

from oracles import brute_facets, rank_of

vec3 = st.lists(st.integers(-3, 3), min_size=3, max_size=3)
gens3 = st.lists(vec3, min_size=1, max_size=5)


def test_orthant_faces():
    fs = faces(orthant(3))
    assert len(fs) == 8
    assert [f.dim for f in fs].count(1) == 3


def test_canonical_form_ignores_redundant_generators():
    a = cone_from_rays(2, [(1, 0), (0, 1)])
    b = cone_from_rays(2, [(0, 2), (1, 1), (3, 0)])
    assert a == b
    assert a.facet_normals == ((0, 1), (1, 0))


def test_half_plane_has_lineality():
    c = cone_from_inequalities(2, [(0, 1)])
    assert c.lineality == ((1, 0),)
    assert c.rays == ((0, 1),)
    assert c.dim == 2


def test_membership_classes():
    c = orthant(2)
    assert membership(c, (1, 1)) == RELATIVE_INTERIOR
    assert membership(c, (1, 0)) == BOUNDARY
    assert membership(c, (-1, 0)) == OUTSIDE
    assert membership(zero_cone(2), (0, 0)) == RELATIVE_INTERIOR


def test_empty_generators_give_apex():
    assert cone_from_rays(3, []) == zero_cone(3)
    assert dual_cone(zero_cone(3)) == full_space(3)


@settings(max_examples=80, deadline=None)
@given(gens3)
def test_facets_against_brute_force(gens):
    assume(rank_of(gens) == 3)
    c = cone_from_rays(3, gens)
    assume(c.is_pointed)
    assert list(c.facet_normals) == brute_facets(c.rays, 3)


@settings(max_examples=80, deadline=None)
@given(gens3)
def test_double_dual(gens):
    c = cone_from_rays(3, gens)
    assert dual_cone(dual_cone(c)) == c
    assert cone_from_inequalities(3, c.facet_normals, c.equations) == c


@settings(max_examples=60, deadline=None)
@given(gens3, st.lists(st.integers(0, 4), min_size=5, max_size=5))
def test_nonnegative_combinations_are_members(gens, coeffs):
    c = cone_from_rays(3, gens)
    x = [sum(k * g[i] for k, g in zip(coeffs, gens)) for i in range(3)]
    assert contains(c, x)
    assert membership(c, c.interior_point()) == RELATIVE_INTERIOR


@settings(max_examples=60, deadline=None)
@given(gens3, gens3)
def test_intersection_is_contained_in_both(g1, g2):
    a, b = cone_from_rays(3, g1), cone_from_rays(3, g2)
    i = intersect_cones(a, b)
    assert contains_cone(a, i) and contains_cone(b, i)
    assert i == intersect_cones(b, a)


@settings(max_examples=40, deadline=None)
@given(gens3)
def test_every_face_is_a_face(gens):
    c = cone_from_rays(3, gens)
    fs = faces(c)
    assert fs[-1] == c
    for f in fs:
        assert is_face_of(f, c)
        assert minimal_face_containing(c, f.interior_point()) == f


def test_map_and_preimage():
    c = orthant(2)
    proj = IntMatrix.from_rows([[1, 1]])
    assert map_cone(proj, c) == cone_from_rays(1, [(1,)])
    back = preimage_cone(proj, cone_from_rays(1, [(1,)]))
    assert back == cone_from_inequalities(2, [(1, 1)])


def test_affine_slice_kinds():
    c = orthant(2)
    line = IntMatrix.from_rows([[1], [0]])
    assert affine_slice(line, (0, 1), c).kind == "infinite"
    assert affine_slice(line, (0, -1), c).kind == "empty"
    diag = IntMatrix.from_rows([[1], [-1]])
    r = affine_slice(diag, (0, 0), c)
    assert r.kind == "point" and r.point == (0, 0) and r.interior is False
    # the line through (1,0) with slope 1 meets the y-axis at (0,-1), outside the ray
    assert affine_slice(IntMatrix.from_rows([[1], [1]]), (1, 0), cone_from_rays(2, [(0, 1)])).kind == "empty"


def test_affine_slice_point_in_ray():
    ray = cone_from_rays(2, [(1, 0)])
    r = affine_slice(IntMatrix.from_rows([[1], [1]]), (0, -1), ray)
    assert r.kind == "point"
    assert r.point == (1, 0)
    assert r.interior


def test_fiber_product_of_rays_over_doubling():
    ray = cone_from_rays(1, [(1,)])
    fp = cone_fiber_product(ray, [[2]], ray, [[2]])
    assert fp.ambient_rank == 1 and fp.dim == 1


def test_product_cone():
    p = product_cone([orthant(1), full_space(1)])
    assert p.lineality == ((0, 1),)
    assert p.rays == ((1, 0),)


def test_json_roundtrip():
    c = cone_from_rays(3, [(1, 0, 0), (0, 1, 0), (1, 1, 1)])
    assert cone_from_json(cone_to_json(c)) == c
    assert all(isinstance(x, str) for r in cone_to_json(c)["rays"] for x in r)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        membership(orthant(2), (1, 2, 3))
