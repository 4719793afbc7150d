from fractions import Fraction as F

import pytest

from heislab import regions


def test_exact_vertices_sampled():
    t = regions.triangle("lacunary_sparse", 2)
    assert t.vertices == ((0, 1), (1, 0), (F(7, 10), F(7, 10)))
    t = regions.triangle("lacunary_lplq", 2)
    assert t.vertices[2] == (F(7, 10), F(3, 10))
    t = regions.triangle("full_sparse", 2)
    assert t.vertices == ((0, 1), (F(3, 4), F(1, 4)), (F(7, 13), F(7, 13)))
    t = regions.triangle("full_lplq", 2)
    assert t.vertices == ((0, 0), (F(3, 4), F(3, 4)), (F(7, 13), F(6, 13)))
    t = regions.triangle("euclidean_lacunary", 3)
    assert t.vertices == ((0, 1), (1, 0), (F(3, 4), F(3, 4)))


def test_unknown_name_and_bad_n():
    with pytest.raises(ValueError):
        regions.triangle("nonsense", 2)
    with pytest.raises(ValueError):
        regions.triangle("lacunary_sparse", 0)


def test_degenerate_euclidean_n1():
    with pytest.raises(ValueError):
        regions.triangle("euclidean_lacunary", 1)


def test_membership_centroid_and_vertices():
    t = regions.triangle("lacunary_sparse", 2)
    cx, cy = t.centroid()
    assert t.contains(cx, cy, strict=True)
    for a, b in t.vertices:
        assert not t.contains(a, b, strict=True)
        assert t.contains(a, b, strict=False)


def test_membership_is_exact_at_edges():
    t = regions.triangle("lacunary_sparse", 2)
    # midpoint of the edge (0,1)-(1,0) lies on the boundary exactly
    assert not t.contains(F(1, 2), F(1, 2), strict=True)
    assert t.contains(F(1, 2), F(1, 2), strict=False)


@pytest.mark.parametrize("n", range(2, 7))
def test_euclidean_vertex_inside_lacunary_triangle(n):
    t = regions.triangle("lacunary_sparse", n)
    v = F(n, n + 1)
    assert t.contains(v, v, strict=True)


@pytest.mark.parametrize("n", range(2, 11))
def test_full_triangles_inside_lacunary(n):
    assert regions.triangle("lacunary_lplq", n).contains_triangle(
        regions.triangle("full_lplq", n))
    assert regions.triangle("lacunary_sparse", n).contains_triangle(
        regions.triangle("full_sparse", n))


def test_duality_map_carries_vertices():
    sp = regions.triangle("lacunary_sparse", 2)   # (0,1), (1,0), (v,v)
    lp = regions.triangle("lacunary_lplq", 2)     # (0,0), (1,1), (v, 3/(3n+4))
    mapped = {regions.duality_map(a, b) for a, b in lp.vertices}
    assert (F(0), F(1)) in mapped and (F(1), F(0)) in mapped
    assert (F(7, 10), F(7, 10)) in mapped


def test_boundary_polyline():
    t = regions.triangle("full_lplq", 2)
    pts = t.boundary_points(per_edge=4)
    assert len(pts) == 13 and pts[0] == pts[-1]
    assert all(t.contains(a, b, strict=False) for a, b in pts)


def test_csv_emission(tmp_path):
    p = tmp_path / "v.csv"
    regions.vertices_to_csv(p, regions.TRIANGLE_NAMES, range(1, 4))
    text = p.read_text().splitlines()
    assert text[0].startswith("name,n,vertex")
    assert any("7/10" in line for line in text)
