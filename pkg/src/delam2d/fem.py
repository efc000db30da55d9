"""Low-level P1 finite element assembly on the two-block mesh.

Element integrals are exact for the P1 spaces in use: one-point
quadrature for the (constant) strain energy density, the consistent
3-point mass matrix, and closed-form integration of the quadratic jump
integrand on interface segments.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .geometry import Mesh2D
from .materials import IsotropicTensor


def triangle_geometry(coords: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed-area magnitude and the (3, 6) strain-displacement matrix."""
    x, y = coords[:, 0], coords[:, 1]
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
    det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
    area = 0.5 * abs(det)
    B = np.zeros((3, 6))
    for i in range(3):
        B[0, 2 * i] = b[i]
        B[1, 2 * i + 1] = c[i]
        B[2, 2 * i] = c[i]
        B[2, 2 * i + 1] = b[i]
    B /= 2.0 * area
    return area, B


def _element_dofs(tri: np.ndarray) -> np.ndarray:
    return np.array(
        [2 * tri[0], 2 * tri[0] + 1, 2 * tri[1], 2 * tri[1] + 1, 2 * tri[2], 2 * tri[2] + 1]
    )


def _scatter(
    n_dofs: int, element_mats: list[tuple[np.ndarray, np.ndarray]]
) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for dofs, K_e in element_mats:
        grid_r, grid_c = np.meshgrid(dofs, dofs, indexing="ij")
        rows.append(grid_r.ravel())
        cols.append(grid_c.ravel())
        vals.append(K_e.ravel())
    if not rows:
        return sp.csr_matrix((n_dofs, n_dofs))
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dofs, n_dofs),
    )
    return A.tocsr()


def stiffness_matrix(
    mesh: Mesh2D,
    tensor: IsotropicTensor,
    element_order: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Assemble the quadratic form  u -> int e(u) : T e(u)  (full matrix).

    ``element_order`` permutes the element accumulation order; it only
    perturbs floating-point summation, not the represented operator.
    """
    D = tensor.voigt()
    order = range(len(mesh.triangles)) if element_order is None else element_order
    mats = []
    for e in order:
        tri = mesh.triangles[e]
        area, B = triangle_geometry(mesh.nodes[tri])
        mats.append((_element_dofs(tri), area * (B.T @ D @ B)))
    return _scatter(mesh.n_dofs, mats)


def mass_matrix(
    mesh: Mesh2D,
    density: float = 1.0,
    element_order: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Consistent P1 mass matrix of  u -> int density * |u|^2."""
    local = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    order = range(len(mesh.triangles)) if element_order is None else element_order
    mats = []
    for e in order:
        tri = mesh.triangles[e]
        area, _ = triangle_geometry(mesh.nodes[tri])
        M_e = np.zeros((6, 6))
        for a in range(3):
            for b in range(3):
                w = density * area * local[a, b]
                M_e[2 * a, 2 * b] = w
                M_e[2 * a + 1, 2 * b + 1] = w
        mats.append((_element_dofs(tri), M_e))
    return _scatter(mesh.n_dofs, mats)


def gradient_matrix(mesh: Mesh2D) -> sp.csr_matrix:
    """Vector Laplacian form  u -> int |grad u|^2  (both components)."""
    mats = []
    for tri in mesh.triangles:
        coords = mesh.nodes[tri]
        x, y = coords[:, 0], coords[:, 1]
        b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
        c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
        det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
        area = 0.5 * abs(det)
        G = np.outer(b, b) + np.outer(c, c)
        G /= 4.0 * area
        K_e = np.zeros((6, 6))
        for a in range(3):
            for bb in range(3):
                K_e[2 * a, 2 * bb] = G[a, bb]
                K_e[2 * a + 1, 2 * bb + 1] = G[a, bb]
        mats.append((_element_dofs(tri), K_e))
    return _scatter(mesh.n_dofs, mats)


# 1D "mass" coupling of the two endpoint jump values on a unit segment:
# int_0^1 ((1-s) j0 + s j1) . ((1-s) w0 + s w1) ds
_SEG = np.array([[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]])


def interface_matrix(
    mesh: Mesh2D,
    facet_weights: np.ndarray,
    facet_order: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Assemble  u -> sum_i w_i int_facet_i |jump(u)|^2.

    ``facet_weights`` holds one nonnegative weight per facet (zero skips
    the facet).  Used with weight k on bonded facets for the adhesive
    coupling term.
    """
    mats = []
    order = range(mesh.n_facets) if facet_order is None else facet_order
    for i in order:
        w = facet_weights[i]
        if w == 0.0:
            continue
        f = mesh.interface_facets[i]
        p0, p1 = f.plus_nodes
        m0, m1 = f.minus_nodes
        dofs = np.array(
            [2 * p0, 2 * p0 + 1, 2 * p1, 2 * p1 + 1, 2 * m0, 2 * m0 + 1, 2 * m1, 2 * m1 + 1]
        )
        # jump operator: rows are (j0x, j0y, j1x, j1y)
        S = np.zeros((4, 8))
        for comp in range(2):
            S[comp, comp] = 1.0          # +u(p0)
            S[comp, 4 + comp] = -1.0     # -u(m0)
            S[2 + comp, 2 + comp] = 1.0  # +u(p1)
            S[2 + comp, 6 + comp] = -1.0
        Q = np.zeros((4, 4))
        for comp in range(2):
            Q[comp, comp] = _SEG[0, 0]
            Q[comp, 2 + comp] = _SEG[0, 1]
            Q[2 + comp, comp] = _SEG[1, 0]
            Q[2 + comp, 2 + comp] = _SEG[1, 1]
        K_e = w * f.length * (S.T @ Q @ S)
        mats.append((dofs, K_e))
    return _scatter(mesh.n_dofs, mats)


def facet_jump_sq_integrals(mesh: Mesh2D, u: np.ndarray) -> np.ndarray:
    """Per-facet values of  int_facet |jump(u)|^2 ds  (exact)."""
    un = mesh.as_nodal(u)
    out = np.empty(mesh.n_facets)
    for i, f in enumerate(mesh.interface_facets):
        j0 = un[f.plus_nodes[0]] - un[f.minus_nodes[0]]
        j1 = un[f.plus_nodes[1]] - un[f.minus_nodes[1]]
        out[i] = f.length * (j0 @ j0 + j0 @ j1 + j1 @ j1) / 3.0
    return out


def facet_jump_norms(mesh: Mesh2D, u: np.ndarray) -> np.ndarray:
    """Per-facet L2 norms of the jump, sqrt(int_facet |jump(u)|^2)."""
    return np.sqrt(np.maximum(facet_jump_sq_integrals(mesh, u), 0.0))


def h1_norm(mesh: Mesh2D, v: np.ndarray) -> float:
    """Broken H1 norm (over both blocks) of a nodal vector field."""
    M1 = mass_matrix(mesh, 1.0)
    G = gradient_matrix(mesh)
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(v @ (M1 @ v) + v @ (G @ v)))


def min_generalized_eigenvalue(
    K: sp.csr_matrix, M: sp.csr_matrix, free: np.ndarray
) -> float:
    """Smallest eigenvalue of  K x = lam M x  restricted to free dofs.

    Dense solve; the meshes this runs on are desk scale.
    """
    Kf = K[free][:, free].toarray()
    Mf = M[free][:, free].toarray()
    import scipy.linalg as sla

    vals = sla.eigvalsh(Kf, Mf)
    return float(vals[0])
