"""Conforming triangle meshes of the unit square with labeled boundary edges.

Boundary edges carry one of two labels: GAMMA0 marks the Dirichlet part of
the boundary (displacement prescribed), GAMMA1 the traction part. A mesh is
built with every edge labeled GAMMA1 and must be classified before use;
classification decides per edge from its midpoint, which is unambiguous for
the axis-aligned boundaries used here.

The text format mirrors the in-memory layout, 0-based indices throughout:

    nodes N          followed by N lines  "x y"
    triangles M      followed by M lines  "i j k"
    boundary B       followed by B lines  "i j label"   label 0 = Dirichlet

Blank lines and "#" comments are allowed anywhere. Triangles given clockwise
are accepted and silently reoriented; degenerate ones are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

GAMMA0 = 0  # Dirichlet boundary label
GAMMA1 = 1  # traction boundary label

_PATTERNS = ("right", "left", "alternating")

# Relative area floor below which a triangle counts as degenerate.
_DEGENERATE_REL = 1e-14


class MeshFormatError(ValueError):
    """Raised for malformed mesh files and non-conforming connectivity."""


@dataclass(frozen=True)
class Mesh:
    """Triangulation with boundary labels. Arrays are treated as immutable.

    nodes        (n_nodes, 2) float coordinates
    triangles    (n_triangles, 3) int, counterclockwise
    edges        (n_edges, 2) int, boundary edges only
    edge_labels  (n_edges,) int, GAMMA0 or GAMMA1
    """

    nodes: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_labels: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[self.edges[:, 0]] + self.nodes[self.edges[:, 1]])

    def edge_lengths(self) -> np.ndarray:
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])


@dataclass(frozen=True)
class ElementGeometry:
    """P1 geometry of one triangle: area and the three basis gradients."""

    area: float
    grads: np.ndarray  # (3, 2), grads[i] is the gradient of barycentric i


def build_unit_square(n: int, pattern: str = "alternating") -> Mesh:
    """Structured triangulation of (0,1)^2 with n divisions per side.

    Each grid cell is split along one diagonal. "right" uses the diagonal
    from the lower-left to the upper-right corner, "left" the other one,
    and "alternating" flips the choice in a checkerboard. All boundary
    edges start labeled GAMMA1.
    """
    if n < 1:
        raise ValueError(f"side division count must be >= 1, got n={n}")
    if pattern not in _PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}, expected one of {_PATTERNS}")

    xs = np.linspace(0.0, 1.0, n + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def nid(ix, iy):
        return iy * (n + 1) + ix

    triangles = []
    for iy in range(n):
        for ix in range(n):
            a, b = nid(ix, iy), nid(ix + 1, iy)
            c, d = nid(ix + 1, iy + 1), nid(ix, iy + 1)
            if pattern == "right" or (pattern == "alternating" and (ix + iy) % 2 == 0):
                triangles.append((a, b, c))
                triangles.append((a, c, d))
            else:
                triangles.append((a, b, d))
                triangles.append((b, c, d))

    edges = []
    for i in range(n):
        edges.append((nid(i, 0), nid(i + 1, 0)))          # bottom
    for j in range(n):
        edges.append((nid(n, j), nid(n, j + 1)))          # right
    for i in range(n):
        edges.append((nid(n - i, n), nid(n - i - 1, n)))  # top
    for j in range(n):
        edges.append((nid(0, n - j), nid(0, n - j - 1)))  # left

    mesh = Mesh(
        nodes=nodes,
        triangles=np.asarray(triangles, dtype=np.int64),
        edges=np.asarray(edges, dtype=np.int64),
        edge_labels=np.full(len(edges), GAMMA1, dtype=np.int64),
    )
    _check_conforming(mesh)
    return mesh


def classify_boundary(mesh: Mesh, predicate) -> Mesh:
    """Relabel boundary edges by evaluating predicate at edge midpoints.

    predicate maps a midpoint (2-array) to GAMMA0 or GAMMA1. At least one
    edge must come out GAMMA0, otherwise the Dirichlet problem is empty.
    """
    labels = np.array([predicate(mid) for mid in mesh.edge_midpoints()], dtype=np.int64)
    bad = ~np.isin(labels, (GAMMA0, GAMMA1))
    if np.any(bad):
        raise ValueError(
            f"predicate returned {labels[bad][0]} at edge {int(np.flatnonzero(bad)[0])}, "
            f"expected GAMMA0 ({GAMMA0}) or GAMMA1 ({GAMMA1})"
        )
    if not np.any(labels == GAMMA0):
        raise ValueError("classification produced zero Dirichlet (GAMMA0) edges")
    return replace(mesh, edge_labels=labels)


# Named Dirichlet regions of the unit square, evaluated at edge midpoints.
# A midpoint sits strictly inside its edge, so equality against 0 or 1
# identifies the side without a tolerance.
_REGIONS = {
    "bottom": lambda p: p[1] == 0.0,
    "top": lambda p: p[1] == 1.0,
    "left": lambda p: p[0] == 0.0,
    "right": lambda p: p[0] == 1.0,
    "sides": lambda p: p[0] == 0.0 or p[0] == 1.0,
    "all": lambda p: True,
}


BOUNDARY_REGIONS = tuple(sorted(_REGIONS))


def boundary_predicate(region: str):
    """Midpoint -> label predicate for a named side of the unit square."""
    try:
        inside = _REGIONS[region]
    except KeyError:
        raise ValueError(
            f"unknown boundary region {region!r}, expected one of {', '.join(sorted(_REGIONS))}"
        ) from None
    return lambda p: GAMMA0 if inside(p) else GAMMA1


def element_geometry(mesh: Mesh, k: int) -> ElementGeometry:
    """Area and barycentric gradients of triangle k."""
    p = mesh.nodes[mesh.triangles[k]]
    return _geometry_of(p)


def _geometry_of(p: np.ndarray) -> ElementGeometry:
    d1, d2 = p[1] - p[0], p[2] - p[0]
    det = d1[0] * d2[1] - d1[1] * d2[0]
    scale = max(np.abs(p).max() ** 2, 1.0)
    if det <= _DEGENERATE_REL * scale:
        raise ValueError(f"degenerate or negatively oriented triangle, doubled area {det}")
    # gradient of barycentric i from the opposite edge (j, k), cyclic
    g = np.empty((3, 2))
    for i in range(3):
        pj, pk = p[(i + 1) % 3], p[(i + 2) % 3]
        g[i, 0] = (pj[1] - pk[1]) / det
        g[i, 1] = (pk[0] - pj[0]) / det
    return ElementGeometry(area=0.5 * det, grads=g)


class MeshGeometry:
    """Vectorized per-element geometry for the whole mesh.

    areas         (m,) triangle areas
    grads         (m, 3, 2) barycentric gradients
    strain_basis  (m, 6, 3) strain of each local displacement basis
                  function, local dof order (n0x, n0y, n1x, n1y, n2x, n2y)
    dofs          (m, 6) global dof indices, dof 2*node + component
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        p = mesh.nodes[mesh.triangles]  # (m, 3, 2)
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        scale = max(np.abs(mesh.nodes).max() ** 2, 1.0)
        if np.any(det <= _DEGENERATE_REL * scale):
            k = int(np.argmin(det))
            raise ValueError(f"degenerate or negatively oriented triangle {k}, doubled area {det[k]}")
        self.areas = 0.5 * det

        g = np.empty((mesh.n_triangles, 3, 2))
        for i in range(3):
            pj = p[:, (i + 1) % 3]
            pk = p[:, (i + 2) % 3]
            g[:, i, 0] = (pj[:, 1] - pk[:, 1]) / det
            g[:, i, 1] = (pk[:, 0] - pj[:, 0]) / det
        self.grads = g

        # strain of basis (node i, component c): sym(e_c outer grad_i)
        B = np.zeros((mesh.n_triangles, 6, 3))
        for i in range(3):
            B[:, 2 * i, 0] = g[:, i, 0]
            B[:, 2 * i, 2] = 0.5 * g[:, i, 1]
            B[:, 2 * i + 1, 1] = g[:, i, 1]
            B[:, 2 * i + 1, 2] = 0.5 * g[:, i, 0]
        self.strain_basis = B

        dofs = np.empty((mesh.n_triangles, 6), dtype=np.int64)
        dofs[:, 0::2] = 2 * mesh.triangles
        dofs[:, 1::2] = 2 * mesh.triangles + 1
        self.dofs = dofs

    @property
    def n_dofs(self) -> int:
        return 2 * self.mesh.n_nodes


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _check_conforming(mesh: Mesh) -> None:
    nt, nn = mesh.n_triangles, mesh.n_nodes
    if nt == 0 or nn < 3:
        raise MeshFormatError("mesh needs at least one triangle and three nodes")
    if mesh.triangles.min() < 0 or mesh.triangles.max() >= nn:
        raise MeshFormatError(
            f"triangle node index out of range [0, {nn}): {mesh.triangles.min()}..{mesh.triangles.max()}"
        )
    if mesh.edges.size and (mesh.edges.min() < 0 or mesh.edges.max() >= nn):
        raise MeshFormatError("boundary edge node index out of range")

    # every undirected edge must belong to one triangle (boundary) or two
    counts: dict[tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            counts[key] = counts.get(key, 0) + 1
    over = [e for e, c in counts.items() if c > 2]
    if over:
        raise MeshFormatError(f"non-conforming mesh: edge {over[0]} shared by {counts[over[0]]} triangles")

    hull = {e for e, c in counts.items() if c == 1}
    listed: set[tuple[int, int]] = set()
    for a, b in mesh.edges:
        key = (int(min(a, b)), int(max(a, b)))
        if key in listed:
            raise MeshFormatError(f"boundary edge {key} listed twice")
        listed.add(key)
    if listed != hull:
        missing = hull - listed
        extra = listed - hull
        if missing:
            raise MeshFormatError(f"boundary list is missing hull edge {sorted(missing)[0]}")
        raise MeshFormatError(f"boundary list contains non-boundary edge {sorted(extra)[0]}")


def _fix_orientation(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    scale = max(np.abs(nodes).max() ** 2, 1.0) if nodes.size else 1.0
    if np.any(np.abs(det) <= _DEGENERATE_REL * scale):
        k = int(np.argmin(np.abs(det)))
        raise MeshFormatError(f"triangle {k} is degenerate (doubled area {det[k]})")
    flipped = triangles.copy()
    cw = det < 0
    flipped[cw, 1], flipped[cw, 2] = triangles[cw, 2], triangles[cw, 1]
    return flipped


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as f:
        f.write(f"nodes {mesh.n_nodes}\n")
        for x, y in mesh.nodes:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"triangles {mesh.n_triangles}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        f.write(f"boundary {len(mesh.edges)}\n")
        for (i, j), lab in zip(mesh.edges, mesh.edge_labels):
            f.write(f"{i} {j} {lab}\n")


def load_mesh(path) -> Mesh:
    """Parse the text format, reorient clockwise triangles, validate."""
    reader = _TokenReader(path)
    nodes = np.array(
        [[reader.take_float(), reader.take_float()] for _ in range(reader.take_count("nodes"))]
    ).reshape(-1, 2)
    triangles = np.array(
        [
            [reader.take_index(), reader.take_index(), reader.take_index()]
            for _ in range(reader.take_count("triangles"))
        ],
        dtype=np.int64,
    ).reshape(-1, 3)
    n_edges = reader.take_count("boundary")
    edges = np.empty((n_edges, 2), dtype=np.int64)
    labels = np.empty(n_edges, dtype=np.int64)
    for r in range(n_edges):
        edges[r, 0] = reader.take_index()
        edges[r, 1] = reader.take_index()
        labels[r] = reader.take_label()
    reader.expect_end()

    if nodes.shape[0] and triangles.size and triangles.max() >= nodes.shape[0]:
        raise MeshFormatError(
            f"{reader.path}: triangle refers to node {triangles.max()}, "
            f"but only {nodes.shape[0]} nodes are defined"
        )
    triangles = _fix_orientation(nodes, triangles)
    mesh = Mesh(nodes=nodes, triangles=triangles, edges=edges, edge_labels=labels)
    try:
        _check_conforming(mesh)
    except MeshFormatError as exc:
        raise MeshFormatError(f"{reader.path}: {exc}") from None
    return mesh


class _TokenReader:
    """Whitespace token stream with line tracking and '#' comments."""

    def __init__(self, path):
        self.path = str(path)
        self._tokens: list[tuple[str, int]] = []
        with open(path) as f:
            for ln, line in enumerate(f, start=1):
                body = line.split("#", 1)[0]
                for tok in body.split():
                    self._tokens.append((tok, ln))
        self._pos = 0

    def _take(self, what: str) -> tuple[str, int]:
        if self._pos >= len(self._tokens):
            raise MeshFormatError(f"{self.path}: unexpected end of file, expected {what}")
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def take_count(self, keyword: str) -> int:
        tok, ln = self._take(f"keyword {keyword!r}")
        if tok != keyword:
            raise MeshFormatError(f"{self.path}:{ln}: expected keyword {keyword!r}, got {tok!r}")
        count = self.take_index()
        return count

    def take_float(self) -> float:
        tok, ln = self._take("a number")
        try:
            return float(tok)
        except ValueError:
            raise MeshFormatError(f"{self.path}:{ln}: expected a number, got {tok!r}") from None

    def take_index(self) -> int:
        tok, ln = self._take("an integer")
        try:
            v = int(tok)
        except ValueError:
            raise MeshFormatError(f"{self.path}:{ln}: expected an integer, got {tok!r}") from None
        if v < 0:
            raise MeshFormatError(f"{self.path}:{ln}: expected a non-negative integer, got {v}")
        return v

    def take_label(self) -> int:
        tok, ln = self._take("a boundary label")
        if tok not in ("0", "1"):
            raise MeshFormatError(
                f"{self.path}:{ln}: boundary label must be 0 (Dirichlet) or 1 (traction), got {tok!r}"
            )
        return int(tok)

    def expect_end(self) -> None:
        if self._pos < len(self._tokens):
            tok, ln = self._tokens[self._pos]
            raise MeshFormatError(f"{self.path}:{ln}: trailing content {tok!r} after boundary section")
