"""Mesh generators, region maps, submeshes and boundary queries."""

import math

import numpy as np
import pytest

from plimit.errors import MeshError, ParameterError, RegionError, TagError
from plimit.geometry import (
    DomainSpec,
    Mesh2D,
    boundary_nodes,
    build_domain,
    extract_submesh,
    interface_edges,
    read_mesh,
    region_area,
    validate_mesh,
    validate_regions,
    write_mesh,
)

SPECS = [
    DomainSpec(shape="annulus", r_outer=10.0, n_radial=8),
    DomainSpec(shape="annulus", r_outer=10.0, n_radial=16),
    DomainSpec(shape="annulus", r_outer=4.0, n_radial=10),
    DomainSpec(shape="disk_with_inclusion", r_outer=3.0, inclusion_center=(0.0, 0.0),
               inclusion_radius=0.8, n_radial=10),
    DomainSpec(shape="disk_with_inclusion", r_outer=3.0, inclusion_center=(0.7, -0.4),
               inclusion_radius=0.5, n_radial=10),
    DomainSpec(shape="square_with_inclusions", half_width=2.0, n_radial=20,
               inclusions=[(-0.9, 0.0, 0.3), (0.9, 0.0, 0.3)]),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.shape}-{s.n_radial}")
def test_validity_suite_for_every_generator(spec):
    mesh, regions = build_domain(spec)
    validate_mesh(mesh)
    validate_regions(mesh, regions)
    assert np.all(mesh.areas() > 0)


def test_annulus_nodes_on_exact_circles():
    mesh, regions = build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=16))
    outer = np.unique(np.concatenate(boundary_nodes(mesh, "outer")))
    assert np.allclose(np.linalg.norm(mesh.nodes[outer], axis=1), 10.0, rtol=0, atol=1e-13)
    mesh_b, _ = extract_submesh(mesh, regions, "B")
    inner = np.unique(np.concatenate(boundary_nodes(mesh_b, "inner")))
    assert np.allclose(np.linalg.norm(mesh_b.nodes[inner], axis=1), 1.0, rtol=0, atol=1e-14)
    # a node ring sits exactly on rho = 2 (the integral-splitting circle)
    rho = np.linalg.norm(mesh.nodes, axis=1)
    assert np.any(np.abs(rho - 2.0) < 1e-13)


def test_concentric_inclusion_single_component():
    mesh, regions = build_domain(
        DomainSpec(shape="disk_with_inclusion", r_outer=3.0, inclusion_center=(0.0, 0.0),
                   inclusion_radius=0.8, n_radial=10)
    )
    assert regions.n_components == 1


def test_square_two_inclusions_components_and_area():
    spec = DomainSpec(shape="square_with_inclusions", half_width=2.0, n_radial=40,
                      inclusions=[(-0.9, 0.0, 0.3), (0.9, 0.0, 0.3)])
    mesh, regions = build_domain(spec)
    assert regions.n_components == 2
    a_area = region_area(mesh, regions, "A")
    assert a_area == pytest.approx(2 * math.pi * 0.3**2, rel=0.01)


def test_offcenter_inclusion_boundaries_exact():
    spec = DomainSpec(shape="disk_with_inclusion", r_outer=3.0, inclusion_center=(0.7, -0.4),
                      inclusion_radius=0.5, n_radial=12)
    mesh, regions = build_domain(spec)
    outer = np.unique(np.concatenate(boundary_nodes(mesh, "outer")))
    assert np.allclose(np.linalg.norm(mesh.nodes[outer], axis=1), 3.0, atol=1e-12)
    iface = np.unique(interface_edges(mesh, regions))
    d = np.linalg.norm(mesh.nodes[iface] - np.array([0.7, -0.4]), axis=1)
    assert np.allclose(d, 0.5, atol=1e-12)


class TestSubmesh:
    @staticmethod
    @pytest.fixture(scope="class")
    def annulus():
        return build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=10))

    def test_tags(self, annulus):
        mesh, regions = annulus
        mesh_b, _ = extract_submesh(mesh, regions, "B")
        assert mesh_b.tags() == {"outer", "inner"}
        mesh_a, _ = extract_submesh(mesh, regions, "A")
        assert mesh_a.tags() == {"interface"}
        validate_mesh(mesh_b)
        validate_mesh(mesh_a)

    def test_node_map_round_trip(self, annulus):
        mesh, regions = annulus
        mesh_b, map_b = extract_submesh(mesh, regions, "B")
        assert np.array_equal(np.unique(map_b), np.sort(map_b))  # injective
        assert np.allclose(mesh.nodes[map_b], mesh_b.nodes)

    def test_area_partition_exact(self, annulus):
        mesh, regions = annulus
        mesh_b, _ = extract_submesh(mesh, regions, "B")
        mesh_a, _ = extract_submesh(mesh, regions, "A")
        assert mesh_b.areas().sum() + mesh_a.areas().sum() == pytest.approx(
            mesh.areas().sum(), rel=1e-14
        )

    def test_empty_region_rejected(self, annulus):
        mesh, regions = annulus
        import dataclasses

        regions_all_b = dataclasses.replace(
            regions,
            element_region=np.zeros_like(regions.element_region),
            component_of_A=np.full_like(regions.component_of_A, -1),
        )
        with pytest.raises(RegionError):
            extract_submesh(mesh, regions_all_b, "A")
        with pytest.raises(RegionError):
            extract_submesh(mesh, regions, "C")


class TestBoundaryLoops:
    def test_annulus_outer_loop_circumference(self):
        mesh, _ = build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=16))
        loops = boundary_nodes(mesh, "outer")
        assert len(loops) == 1
        pts = mesh.nodes[loops[0]]
        closed = np.vstack([pts, pts[:1]])
        length = np.linalg.norm(np.diff(closed, axis=0), axis=1).sum()
        m = loops[0].size
        expected = 2 * m * 10.0 * math.sin(math.pi / m)  # inscribed polygon
        assert length == pytest.approx(expected, rel=1e-12)
        assert length == pytest.approx(2 * math.pi * 10.0, rel=5e-3)

    def test_annulus_inner_loop_circumference(self):
        mesh, regions = build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=16))
        mesh_b, _ = extract_submesh(mesh, regions, "B")
        loops = boundary_nodes(mesh_b, "inner")
        assert len(loops) == 1
        pts = mesh_b.nodes[loops[0]]
        closed = np.vstack([pts, pts[:1]])
        length = np.linalg.norm(np.diff(closed, axis=0), axis=1).sum()
        assert length == pytest.approx(2 * math.pi, rel=5e-3)

    def test_square_loop_contains_corners(self):
        spec = DomainSpec(shape="square_with_inclusions", half_width=2.0, n_radial=16,
                          inclusions=[(0.0, 0.0, 0.4)])
        mesh, _ = build_domain(spec)
        loops = boundary_nodes(mesh, "outer")
        assert len(loops) == 1
        pts = mesh.nodes[loops[0]]
        for corner in [(-2, -2), (2, -2), (2, 2), (-2, 2)]:
            assert np.min(np.linalg.norm(pts - np.array(corner, float), axis=1)) < 1e-12

    def test_unknown_tag(self):
        mesh, _ = build_domain(DomainSpec(shape="annulus", r_outer=4.0, n_radial=8))
        with pytest.raises(TagError):
            boundary_nodes(mesh, "bogus")


def test_refinement_monotonicity():
    for n in (8, 12):
        coarse, _ = build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=n))
        fine, _ = build_domain(DomainSpec(shape="annulus", r_outer=10.0, n_radial=2 * n))
        assert fine.n_triangles >= 4 * coarse.n_triangles
        assert fine.max_edge_length() <= 0.55 * coarse.max_edge_length()  # halves within 10%


def test_degenerate_specs_rejected():
    with pytest.raises(ParameterError):
        build_domain(DomainSpec(shape="annulus", r_outer=1.0, n_radial=8))
    with pytest.raises(ParameterError):
        build_domain(DomainSpec(shape="disk_with_inclusion", r_outer=1.0,
                                inclusion_center=(0.8, 0.0), inclusion_radius=0.5, n_radial=8))
    with pytest.raises(ParameterError):
        build_domain(DomainSpec(shape="square_with_inclusions", half_width=1.0, n_radial=8,
                                inclusions=[(0.0, 0.0, 0.4), (0.1, 0.0, 0.4)]))


def test_mesh_text_round_trip(tmp_path):
    mesh, regions = build_domain(DomainSpec(shape="annulus", r_outer=4.0, n_radial=8))
    path = tmp_path / "mesh.txt"
    write_mesh(path, mesh, regions)
    mesh2, regions2 = read_mesh(path)
    assert np.array_equal(mesh.triangles, mesh2.triangles)
    assert np.allclose(mesh.nodes, mesh2.nodes, rtol=0, atol=0)
    assert np.array_equal(regions.element_region, regions2.element_region)
    assert np.array_equal(mesh.edge_nodes, mesh2.edge_nodes)
    assert list(mesh.edge_tags) == list(mesh2.edge_tags)


def test_validate_mesh_catches_defects():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    # clockwise triangle -> negative area
    bad = Mesh2D(nodes=nodes, triangles=np.array([[0, 2, 1]]),
                 edge_nodes=np.array([[0, 1], [1, 2], [2, 0]]),
                 edge_tags=np.array(["outer"] * 3, dtype=object))
    with pytest.raises(MeshError):
        validate_mesh(bad)
    # boundary edges not covering the boundary
    bad2 = Mesh2D(nodes=nodes, triangles=np.array([[0, 1, 2]]),
                  edge_nodes=np.array([[0, 1]]),
                  edge_tags=np.array(["outer"], dtype=object))
    with pytest.raises(MeshError):
        validate_mesh(bad2)


def test_rotation_symmetry_of_annulus():
    # rotating the mesh by pi maps it onto itself (node permutation)
    from scipy.spatial import cKDTree

    mesh, _ = build_domain(DomainSpec(shape="annulus", r_outer=5.0, n_radial=8))
    dist, _ = cKDTree(mesh.nodes).query(-mesh.nodes)
    assert dist.max() < 1e-12
