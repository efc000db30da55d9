import numpy as np
import pytest

from delam2d.geometry import (
    GeometryError,
    build_two_block_mesh,
    jump,
    mirror_equivariant_image,
    sym_anti_split,
)


def test_smallest_mesh_counts():
    mesh = build_two_block_mesh(1.0, 1.0, 1, 1, {"top", "bottom"})
    assert mesh.n_nodes == 8  # 4 per block, interface nodes duplicated
    assert len(mesh.triangles) == 4
    assert mesh.n_facets == 1
    assert mesh.interface_facets[0].length == 1.0


def test_uniform_subdivision_facets():
    mesh = build_two_block_mesh(1.0, 1.0, 4, 4, {"top", "bottom"})
    assert mesh.n_facets == 4
    assert np.allclose(mesh.facet_lengths(), 0.25)
    assert mesh.interface_measure() == pytest.approx(1.0, abs=0.0)


def test_facet_lengths_and_mirror_involution():
    mesh = build_two_block_mesh(2.0, 1.0, 8, 4, {"top", "bottom"})
    # direct mesh traversal: facet intervals tile [0, 2] contiguously
    total = 0.0
    x = 0.0
    for f in mesh.interface_facets:
        assert f.x_left == pytest.approx(x, abs=1e-15)
        total += f.length
        x = f.x_right
    assert total == pytest.approx(2.0, abs=1e-14)
    mm = mesh.mirror_map
    assert (mm[mm] == np.arange(mesh.n_nodes)).all()
    assert (mm != np.arange(mesh.n_nodes)).all()  # no fixed points


def test_duplicated_interface_nodes_share_coordinates():
    mesh = build_two_block_mesh(2.0, 1.0, 8, 4, {"top", "bottom"})
    for f in mesh.interface_facets:
        for p, m in zip(f.plus_nodes, f.minus_nodes):
            assert p != m
            assert (mesh.nodes[p] == mesh.nodes[m]).all()
            assert mesh.nodes[p][1] == 0.0


def test_triangles_positively_oriented():
    mesh = build_two_block_mesh(2.0, 1.0, 5, 3, {"top", "bottom"})
    for tri in mesh.triangles:
        a, b, c = mesh.nodes[tri]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        assert cross > 0


def test_rejects_side_dirichlet_tags():
    with pytest.raises(GeometryError, match="interface closure"):
        build_two_block_mesh(1.0, 1.0, 2, 2, {"top", "bottom", "left_plus"})


def test_rejects_one_sided_dirichlet():
    with pytest.raises(GeometryError, match="lower block"):
        build_two_block_mesh(1.0, 1.0, 2, 2, {"top"})
    with pytest.raises(GeometryError, match="upper block"):
        build_two_block_mesh(1.0, 1.0, 2, 2, {"bottom"})


def test_rejects_degenerate_subdivision():
    with pytest.raises(GeometryError):
        build_two_block_mesh(1.0, 1.0, 0, 2, {"top", "bottom"})


def test_jump_of_continuous_field_is_zero(unit_mesh):
    mesh = unit_mesh
    un = np.zeros((mesh.n_nodes, 2))
    un[:, 0] = mesh.nodes[:, 0] ** 2  # equal values on duplicated nodes
    un[:, 1] = np.cos(mesh.nodes[:, 0])
    u = un.reshape(-1)
    for i in range(mesh.n_facets):
        assert np.abs(jump(mesh, u, i)).max() == 0.0


def test_jump_of_constant_offset(unit_mesh):
    mesh = unit_mesh
    un = np.zeros((mesh.n_nodes, 2))
    un[mesh.nodes[:, 1] >= 0.0] = (0.0, 1.0)
    # interface nodes of the lower block have y == 0 too; fix them by index
    for f in mesh.interface_facets:
        for m in f.minus_nodes:
            un[m] = (0.0, 0.0)
        for p in f.plus_nodes:
            un[p] = (0.0, 1.0)
    u = un.reshape(-1)
    for i in range(mesh.n_facets):
        assert np.array_equal(jump(mesh, u, i), [[0.0, 1.0], [0.0, 1.0]])


def test_jump_matches_nodewise_oracle(unit_mesh, rng):
    mesh = unit_mesh
    u = rng.normal(size=mesh.n_dofs)
    un = u.reshape(-1, 2)
    for i, f in enumerate(mesh.interface_facets):
        J = jump(mesh, u, i)
        for e, (p, m) in enumerate(zip(f.plus_nodes, f.minus_nodes)):
            expect = un[p] - un[m]
            assert np.array_equal(J[e], expect)


def test_jump_rejects_bad_index(unit_mesh):
    with pytest.raises(IndexError):
        jump(unit_mesh, np.zeros(unit_mesh.n_dofs), unit_mesh.n_facets)


def test_split_of_mirror_symmetric_field(unit_mesh):
    mesh = unit_mesh
    un = np.empty((mesh.n_nodes, 2))
    un[:, 0] = np.abs(mesh.nodes[:, 1]) + mesh.nodes[:, 0]
    un[:, 1] = np.cos(mesh.nodes[:, 1] ** 2)
    v = un.reshape(-1)
    v_sym, v_anti = sym_anti_split(mesh, v)
    assert np.abs(v_anti).max() == 0.0
    assert np.array_equal(v_sym, v)


def test_split_of_mirror_antisymmetric_field(unit_mesh):
    mesh = unit_mesh
    un = np.empty((mesh.n_nodes, 2))
    un[:, 0] = mesh.nodes[:, 1]
    un[:, 1] = mesh.nodes[:, 1] ** 3
    v = un.reshape(-1)
    v_sym, v_anti = sym_anti_split(mesh, v)
    assert np.abs(v_sym).max() == 0.0
    assert np.array_equal(v_anti, v)


def test_split_reconstruction_and_continuity(peel_mesh, rng):
    mesh = peel_mesh
    from delam2d import fem

    v = rng.normal(size=mesh.n_dofs)
    v_sym, v_anti = sym_anti_split(mesh, v)
    assert np.abs(v_sym + v_anti - v).max() <= 1e-12 * max(1.0, np.abs(v).max())
    # the even part has no interface jump on any facet
    assert fem.facet_jump_norms(mesh, v_sym).max() <= 1e-12 * max(1.0, np.abs(v).max())


def test_mirror_equivariant_image_is_involution(unit_mesh, rng):
    u = rng.normal(size=unit_mesh.n_dofs)
    image = mirror_equivariant_image(unit_mesh, u)
    assert np.array_equal(mirror_equivariant_image(unit_mesh, image), u)


def test_mesh_json_export(unit_mesh):
    import json

    payload = json.loads(unit_mesh.to_json())
    assert len(payload["nodes"]) == unit_mesh.n_nodes
    assert len(payload["triangles"]) == len(unit_mesh.triangles)
    assert len(payload["interface_facets"]) == unit_mesh.n_facets
