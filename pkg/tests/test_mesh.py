"""Mesh construction, refinement and metrics."""

import numpy as np
import pytest

from rrteig.errors import NonMonotonicNodes, TooFewNodes
from rrteig.mesh import (
    build_mesh,
    mesh_size,
    regularity_constant,
    uniform_mesh,
    uniform_refine,
)


def test_build_mesh_basic():
    m = build_mesh([0.0, 1.0, 3.0], [0.0, 2.0])
    assert m.n1 == 2 and m.n2 == 1 and m.n_cells == 2
    np.testing.assert_allclose(m.hx, [1.0, 2.0])
    np.testing.assert_allclose(m.hy, [2.0])
    assert m.domain == (0.0, 3.0, 0.0, 2.0)
    assert m.level == 0


def test_node_validation():
    with pytest.raises(NonMonotonicNodes):
        build_mesh([0.0, 1.0, 1.0], [0.0, 1.0])
    with pytest.raises(NonMonotonicNodes):
        build_mesh([0.0, 2.0, 1.0], [0.0, 1.0])
    with pytest.raises(TooFewNodes):
        build_mesh([0.0], [0.0, 1.0])


def test_cell_indexing_roundtrip():
    m = uniform_mesh(0.0, 1.0, 3, 0.0, 1.0, 4)
    seen = set()
    for j in range(m.n2):
        for i in range(m.n1):
            idx = m.cell_index(i, j)
            assert m.cell_ij(idx) == (i, j)
            seen.add(idx)
    assert seen == set(range(m.n_cells))


def test_refine_keeps_parent_nodes_bitwise():
    m = build_mesh([0.0, 0.3, 1.0], [0.0, 0.5, 0.7, 1.0])
    r = uniform_refine(m)
    assert r.level == m.level + 1
    assert r.n1 == 2 * m.n1 and r.n2 == 2 * m.n2
    # parents present bitwise at even positions, midpoints between them
    np.testing.assert_array_equal(r.node_x[0::2], m.node_x)
    np.testing.assert_array_equal(r.node_y[0::2], m.node_y)
    np.testing.assert_allclose(
        r.node_x[1::2], (m.node_x[:-1] + m.node_x[1:]) / 2
    )


def test_mesh_size_and_regularity():
    m = build_mesh([0.0, 1.0, 3.0], [0.0, 0.5, 1.0])
    assert mesh_size(m) == 2.0
    # worst aspect pairing: hx=2 against hy=0.5
    assert regularity_constant(m) == pytest.approx(4.0)
    u = uniform_mesh(0.0, 1.0, 4, 0.0, 1.0, 4)
    assert regularity_constant(u) == pytest.approx(1.0)


def test_is_uniform():
    assert uniform_mesh(0.0, np.pi, 8, 0.0, np.pi, 8).is_uniform()
    # refinement of a uniform mesh stays uniform despite float midpoints
    m = uniform_refine(uniform_mesh(0.0, np.pi, 8, 0.0, np.pi, 8))
    assert m.is_uniform()
    assert not uniform_mesh(0.0, 1.0, 4, 0.0, 1.0, 8).is_uniform()
    assert not build_mesh([0.0, 0.4, 1.0], [0.0, 0.5, 1.0]).is_uniform()


def test_mask_shape_checked():
    with pytest.raises(ValueError):
        build_mesh([0.0, 1.0, 2.0], [0.0, 1.0], mask=np.ones((2, 2), bool))
    m = build_mesh(
        [0.0, 1.0, 2.0], [0.0, 1.0], mask=np.array([[True, False]])
    )
    assert m.mask is not None
    r = uniform_refine(m)
    assert r.mask.shape == (2, 4)
    # an all-true mask normalizes to None
    full = build_mesh([0.0, 1.0, 2.0], [0.0, 1.0], mask=np.ones((1, 2), bool))
    assert full.mask is None
