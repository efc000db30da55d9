"""Two-block domain with a delaminating horizontal interface.

The domain is a pair of mirror-symmetric axis-aligned rectangles,

    lower block  (0, width) x (-height, 0)
    upper block  (0, width) x (0, height)

glued along the contact segment y = 0.  Nodes on the contact segment are
duplicated: the upper and lower blocks carry independent trace nodes at
identical coordinates, so displacement fields may jump across the
interface.  The mesh is exactly mirror-symmetric about y = 0 (node
coordinates of the lower block are bitwise negations in y of the upper
block), which makes the symmetric/antisymmetric splitting used by the
recovery lift exact in floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Boundary edge tags.  The side edges touch the closure of the contact
# segment at y = 0, so they are never admissible as Dirichlet edges.
EDGE_TAGS = (
    "top",
    "bottom",
    "left_plus",
    "left_minus",
    "right_plus",
    "right_minus",
)
_SIDE_TAGS = frozenset(t for t in EDGE_TAGS if t not in ("top", "bottom"))


class GeometryError(ValueError):
    """Invalid mesh specification (boundary tagging, degenerate sizes)."""


@dataclass(frozen=True)
class InterfaceFacet:
    """One segment of the contact interface.

    ``plus_nodes`` / ``minus_nodes`` are the (left, right) trace node
    indices of the upper / lower block; the two pairs occupy identical
    coordinates.
    """

    plus_nodes: tuple[int, int]
    minus_nodes: tuple[int, int]
    length: float
    x_left: float
    x_right: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x_left + self.x_right)


@dataclass(frozen=True)
class BoundaryEdge:
    nodes: tuple[int, int]
    normal: tuple[float, float]
    tag: str
    length: float


@dataclass
class Mesh2D:
    """Conforming P1 triangulation of the two-block domain.

    Attributes
    ----------
    nodes : (n_nodes, 2) float array
    triangles : (n_tri, 3) int array, counter-clockwise
    dirichlet_dofs : sorted int array of constrained displacement dofs
    neumann_edges : boundary edges carrying surface tractions
    interface_facets : facets ordered left-to-right along the interface
    mirror_map : int array; ``mirror_map[n]`` is the node mirrored
        across y = 0 (an involution without fixed points)
    """

    width: float
    height: float
    nx: int
    ny: int
    nodes: np.ndarray
    triangles: np.ndarray
    dirichlet_dofs: np.ndarray
    neumann_edges: list[BoundaryEdge]
    interface_facets: list[InterfaceFacet]
    mirror_map: np.ndarray
    dirichlet_tags: frozenset[str] = field(default_factory=frozenset)
    neumann_tags: frozenset[str] = field(default_factory=frozenset)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_facets(self) -> int:
        return len(self.interface_facets)

    def dofs_of(self, node: int) -> tuple[int, int]:
        """The (x, y) displacement dof indices of a node."""
        return 2 * node, 2 * node + 1

    @property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return np.flatnonzero(mask)

    def facet_lengths(self) -> np.ndarray:
        return np.array([f.length for f in self.interface_facets])

    def interface_measure(self) -> float:
        return float(sum(f.length for f in self.interface_facets))

    def as_nodal(self, u: np.ndarray) -> np.ndarray:
        """View a flat dof vector as an (n_nodes, 2) array."""
        return np.asarray(u).reshape(self.n_nodes, 2)

    def to_json(self) -> str:
        """Debug export: nodes, triangles and the interface facet list."""
        payload = {
            "width": self.width,
            "height": self.height,
            "nx": self.nx,
            "ny": self.ny,
            "nodes": self.nodes.tolist(),
            "triangles": self.triangles.tolist(),
            "interface_facets": [
                {
                    "plus_nodes": list(f.plus_nodes),
                    "minus_nodes": list(f.minus_nodes),
                    "length": f.length,
                    "x_left": f.x_left,
                    "x_right": f.x_right,
                }
                for f in self.interface_facets
            ],
            "dirichlet_dofs": self.dirichlet_dofs.tolist(),
        }
        return json.dumps(payload, sort_keys=True)


def build_two_block_mesh(
    width: float,
    height: float,
    nx: int,
    ny: int,
    dirichlet_spec: set[str] | frozenset[str],
    neumann_spec: set[str] | frozenset[str] = frozenset(),
) -> Mesh2D:
    """Build the structured two-block mesh with duplicated interface nodes.

    ``dirichlet_spec`` must clamp both blocks away from the interface;
    the only admissible tags are ``top`` and ``bottom`` (the side edges
    touch the closure of the contact segment and are rejected).
    ``neumann_spec`` tags the traction-carrying boundary edges.
    """
    if nx < 1 or ny < 1:
        raise GeometryError(f"nx and ny must be >= 1, got nx={nx}, ny={ny}")
    if width <= 0.0 or height <= 0.0:
        raise GeometryError("width and height must be positive")

    dirichlet_spec = frozenset(dirichlet_spec)
    neumann_spec = frozenset(neumann_spec)
    for tag in dirichlet_spec | neumann_spec:
        if tag not in EDGE_TAGS:
            raise GeometryError(f"unknown edge tag {tag!r}")
    bad = dirichlet_spec & _SIDE_TAGS
    if bad:
        raise GeometryError(
            f"Dirichlet tags {sorted(bad)} touch the interface closure; "
            "only 'top' and 'bottom' may be clamped"
        )
    if "top" not in dirichlet_spec:
        raise GeometryError("Dirichlet set has zero measure on the upper block")
    if "bottom" not in dirichlet_spec:
        raise GeometryError("Dirichlet set has zero measure on the lower block")
    if dirichlet_spec & neumann_spec:
        raise GeometryError("Dirichlet and Neumann tags overlap")

    n_per_block = (nx + 1) * (ny + 1)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)

    def plus(i: int, j: int) -> int:
        # upper block, j = 0 on the interface, j = ny at y = +height
        return j * (nx + 1) + i

    def minus(i: int, j: int) -> int:
        # lower block, j = 0 on the interface, j = ny at y = -height
        return n_per_block + j * (nx + 1) + i

    nodes = np.empty((2 * n_per_block, 2))
    for j in range(ny + 1):
        for i in range(nx + 1):
            nodes[plus(i, j)] = (xs[i], ys[j])
            nodes[minus(i, j)] = (xs[i], -ys[j])

    mirror_map = np.empty(2 * n_per_block, dtype=np.int64)
    for j in range(ny + 1):
        for i in range(nx + 1):
            mirror_map[plus(i, j)] = minus(i, j)
            mirror_map[minus(i, j)] = plus(i, j)

    triangles: list[tuple[int, int, int]] = []
    for j in range(ny):
        for i in range(nx):
            a, b = plus(i, j), plus(i + 1, j)
            c, d = plus(i + 1, j + 1), plus(i, j + 1)
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    # The lower block is the reflection of the upper one; reflecting a
    # triangle flips its orientation, so swap two vertices.
    n_plus_tris = len(triangles)
    for t in range(n_plus_tris):
        a, b, c = triangles[t]
        triangles.append((mirror_map[a], mirror_map[c], mirror_map[b]))
    tri_arr = np.array(triangles, dtype=np.int64)

    edge_nodes: dict[str, list[tuple[int, int]]] = {
        "top": [(plus(i, ny), plus(i + 1, ny)) for i in range(nx)],
        "bottom": [(minus(i, ny), minus(i + 1, ny)) for i in range(nx)],
        "left_plus": [(plus(0, j), plus(0, j + 1)) for j in range(ny)],
        "left_minus": [(minus(0, j), minus(0, j + 1)) for j in range(ny)],
        "right_plus": [(plus(nx, j), plus(nx, j + 1)) for j in range(ny)],
        "right_minus": [(minus(nx, j), minus(nx, j + 1)) for j in range(ny)],
    }
    normals = {
        "top": (0.0, 1.0),
        "bottom": (0.0, -1.0),
        "left_plus": (-1.0, 0.0),
        "left_minus": (-1.0, 0.0),
        "right_plus": (1.0, 0.0),
        "right_minus": (1.0, 0.0),
    }

    dirichlet_nodes: set[int] = set()
    for tag in dirichlet_spec:
        for n0, n1 in edge_nodes[tag]:
            dirichlet_nodes.update((n0, n1))
    dirichlet_dofs = np.array(
        sorted(d for n in dirichlet_nodes for d in (2 * n, 2 * n + 1)),
        dtype=np.int64,
    )

    neumann_edges = []
    for tag in sorted(neumann_spec):
        for n0, n1 in edge_nodes[tag]:
            length = float(np.linalg.norm(nodes[n1] - nodes[n0]))
            neumann_edges.append(BoundaryEdge((n0, n1), normals[tag], tag, length))

    interface_facets = [
        InterfaceFacet(
            plus_nodes=(plus(i, 0), plus(i + 1, 0)),
            minus_nodes=(minus(i, 0), minus(i + 1, 0)),
            length=float(xs[i + 1] - xs[i]),
            x_left=float(xs[i]),
            x_right=float(xs[i + 1]),
        )
        for i in range(nx)
    ]

    return Mesh2D(
        width=width,
        height=height,
        nx=nx,
        ny=ny,
        nodes=nodes,
        triangles=tri_arr,
        dirichlet_dofs=dirichlet_dofs,
        neumann_edges=neumann_edges,
        interface_facets=interface_facets,
        mirror_map=mirror_map,
        dirichlet_tags=dirichlet_spec,
        neumann_tags=neumann_spec,
    )


def jump(mesh: Mesh2D, u: np.ndarray, facet: int) -> np.ndarray:
    """Trace difference (upper minus lower) at both endpoints of a facet.

    Returns a (2, 2) array ``J`` with ``J[e]`` the jump 2-vector at
    endpoint ``e``; the jump varies linearly along the facet between
    these endpoint values.
    """
    if not 0 <= facet < mesh.n_facets:
        raise IndexError(f"facet index {facet} out of range [0, {mesh.n_facets})")
    f = mesh.interface_facets[facet]
    un = mesh.as_nodal(u)
    return np.array(
        [
            un[f.plus_nodes[0]] - un[f.minus_nodes[0]],
            un[f.plus_nodes[1]] - un[f.minus_nodes[1]],
        ]
    )


def all_jumps(mesh: Mesh2D, u: np.ndarray) -> np.ndarray:
    """Endpoint jumps on every facet, shape (n_facets, 2, 2)."""
    un = mesh.as_nodal(u)
    out = np.empty((mesh.n_facets, 2, 2))
    for i, f in enumerate(mesh.interface_facets):
        out[i, 0] = un[f.plus_nodes[0]] - un[f.minus_nodes[0]]
        out[i, 1] = un[f.plus_nodes[1]] - un[f.minus_nodes[1]]
    return out


def sym_anti_split(mesh: Mesh2D, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a nodal field into its mirror-even and mirror-odd parts.

    The even part averages the field with its value at the mirrored
    node, componentwise; it is continuous across the interface (the two
    trace nodes of a duplicated pair receive the same average).  The odd
    remainder carries the whole interface jump.
    """
    vn = mesh.as_nodal(v)
    v_sym = 0.5 * (vn + vn[mesh.mirror_map])
    v_anti = vn - v_sym
    return v_sym.reshape(-1).copy(), v_anti.reshape(-1).copy()


def mirror_equivariant_image(mesh: Mesh2D, u: np.ndarray) -> np.ndarray:
    """Push a displacement field through the mirror reflection.

    A displacement transforms as a vector under the reflection
    (x, y) -> (x, -y): the image field is u_x(mirror), -u_y(mirror).
    Fixed points of this map are the physically mirror-symmetric fields.
    """
    un = mesh.as_nodal(u)
    out = un[mesh.mirror_map].copy()
    out[:, 1] *= -1.0
    return out.reshape(-1)
