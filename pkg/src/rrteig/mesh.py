"""Tensor-product rectangular meshes with uniform midpoint refinement.

A mesh is defined by two strictly increasing node vectors.  Cells K_{i,j}
are indexed i fast, j slow (row-major); every module in the library shares
this ordering.  Meshes are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotonicNodes, TooFewNodes


@dataclass(frozen=True)
class TensorMesh:
    """Rectangular mesh gridded by node vectors ``node_x`` and ``node_y``.

    Parameters
    ----------
    node_x, node_y : ndarray
        Strictly increasing node coordinates, length n1+1 and n2+1.
    level : int
        Refinement counter, 0 for a freshly built mesh.
    mask : ndarray of bool, optional
        Active-cell mask of shape (n2, n1) for rectangle-union domains.
        ``None`` means all cells active (the only case the experiments
        exercise).
    """

    node_x: np.ndarray
    node_y: np.ndarray
    level: int = 0
    mask: np.ndarray | None = field(default=None)

    @property
    def n1(self) -> int:
        return len(self.node_x) - 1

    @property
    def n2(self) -> int:
        return len(self.node_y) - 1

    @property
    def n_cells(self) -> int:
        return self.n1 * self.n2

    @property
    def hx(self) -> np.ndarray:
        """Cell widths h_{x_i}, length n1."""
        return np.diff(self.node_x)

    @property
    def hy(self) -> np.ndarray:
        """Cell heights h_{y_j}, length n2."""
        return np.diff(self.node_y)

    @property
    def domain(self) -> tuple[float, float, float, float]:
        return (self.node_x[0], self.node_x[-1], self.node_y[0], self.node_y[-1])

    def cell_index(self, i: int, j: int) -> int:
        """Row-major cell index of K_{i,j}."""
        return j * self.n1 + i

    def cell_ij(self, idx: int) -> tuple[int, int]:
        return idx % self.n1, idx // self.n1

    def is_uniform(self) -> bool:
        """True when all cells share one square size h x h (up to roundoff)."""
        hx, hy = self.hx, self.hy
        h = (self.node_x[-1] - self.node_x[0]) / self.n1
        tol = 1e-12 * h
        return bool(
            np.all(np.abs(hx - h) <= tol) and np.all(np.abs(hy - h) <= tol)
        )


def _check_nodes(nodes) -> np.ndarray:
    arr = np.asarray(nodes, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise TooFewNodes(f"node vector needs >= 2 entries, got {arr.shape}")
    if np.any(np.diff(arr) <= 0):
        raise NonMonotonicNodes("node vector must be strictly increasing")
    return arr


def build_mesh(node_x, node_y, mask=None) -> TensorMesh:
    """Build a mesh from two strictly increasing node vectors."""
    nx = _check_nodes(node_x)
    ny = _check_nodes(node_y)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (len(ny) - 1, len(nx) - 1):
            raise ValueError(f"mask shape {mask.shape} does not match cell grid")
        if mask.all():
            mask = None
    return TensorMesh(nx, ny, level=0, mask=mask)


def uniform_mesh(start_x, end_x, count_x, start_y, end_y, count_y) -> TensorMesh:
    """Build a mesh from (start, end, count) uniform descriptors."""
    return build_mesh(
        np.linspace(start_x, end_x, count_x + 1),
        np.linspace(start_y, end_y, count_y + 1),
    )


def _refine_nodes(nodes: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(nodes) - 1)
    out[0::2] = nodes
    out[1::2] = (nodes[:-1] + nodes[1:]) / 2.0
    return out


def uniform_refine(mesh: TensorMesh) -> TensorMesh:
    """Insert the midpoint of every cell edge; parent nodes are kept bitwise."""
    mask = None
    if mesh.mask is not None:
        mask = np.repeat(np.repeat(mesh.mask, 2, axis=0), 2, axis=1)
    return TensorMesh(
        _refine_nodes(mesh.node_x),
        _refine_nodes(mesh.node_y),
        level=mesh.level + 1,
        mask=mask,
    )


def mesh_size(mesh: TensorMesh) -> float:
    """h = max over all cell edge lengths."""
    return float(max(mesh.hx.max(), mesh.hy.max()))


def regularity_constant(mesh: TensorMesh) -> float:
    """Smallest a >= 1 with a^-1 h_y <= h_x <= a h_y over all cells."""
    ratio = mesh.hx[:, None] / mesh.hy[None, :]
    if mesh.mask is not None:
        ratio = ratio[mesh.mask.T]
    return float(np.maximum(ratio, 1.0 / ratio).max())
