"""The diagonal 3D grid Q_n and its geometry.

Q_n has vertex set [0,n)^3; two distinct vertices are adjacent when their
coordinatewise difference, after possibly negating, lies in {0,1}^3.  That is
the cube grid with all non-decreasing diagonals of the unit cells.  On top of
the graph itself this module provides the geometric scaffolding used by the
separator and bramble machinery: staircases, constant-x squares, staircase
enlargements with their two sides, the retraction of a (b+1)-enlargement onto
the b-enlargement, anchor points for laying out far-apart subgrids, and the
monotone routing that joins staircases of adjacent anchors.

Coordinates are plain ``(x, y, z)`` int tuples.  All objects are immutable
after construction.
"""

import json
from dataclasses import dataclass, field

# Forward difference vectors: d in {0,1}^3, d != 0.  u and u+d are adjacent.
_FORWARD = tuple(
    (dx, dy, dz)
    for dx in (0, 1)
    for dy in (0, 1)
    for dz in (0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)
_BACKWARD = tuple((-dx, -dy, -dz) for (dx, dy, dz) in _FORWARD)
_STEPS = _FORWARD + _BACKWARD


def coords_adjacent(u, v):
    """Adjacency rule of Q_n, independent of any particular grid object."""
    d = (v[0] - u[0], v[1] - u[1], v[2] - u[2])
    if d == (0, 0, 0):
        return False
    return all(0 <= c <= 1 for c in d) or all(-1 <= c <= 0 for c in d)


class GridGraph:
    """Q_n or an induced subgraph of it.

    For the full grid, adjacency is computed from the rule; induced subgraphs
    store their adjacency (they are small in practice).  Vertex ids for
    serialization are x + n*y + n^2*z.
    """

    def __init__(self, n, vertices=None):
        if n < 1:
            raise ValueError("grid side must be positive")
        self.n = n
        if vertices is None:
            self._vertices = None
            self._adj = None
        else:
            vs = set(vertices)
            for v in vs:
                if not all(0 <= c < n for c in v):
                    raise ValueError(f"vertex {v} outside [0,{n})^3")
            self._vertices = frozenset(vs)
            self._adj = {}
            for v in vs:
                nb = []
                for dx, dy, dz in _STEPS:
                    w = (v[0] + dx, v[1] + dy, v[2] + dz)
                    if w in vs:
                        nb.append(w)
                self._adj[v] = sorted(nb)

    @property
    def is_full(self):
        return self._vertices is None

    def vertices(self):
        if self.is_full:
            n = self.n
            return [
                (x, y, z) for z in range(n) for y in range(n) for x in range(n)
            ]
        return sorted(self._vertices, key=self.vertex_id)

    def num_vertices(self):
        return self.n ** 3 if self.is_full else len(self._vertices)

    def has_vertex(self, v):
        if self.is_full:
            return (
                len(v) == 3
                and all(isinstance(c, int) and 0 <= c < self.n for c in v)
            )
        return v in self._vertices

    def __contains__(self, v):
        return self.has_vertex(v)

    def neighbors(self, v):
        if not self.has_vertex(v):
            raise KeyError(v)
        if self.is_full:
            n = self.n
            out = []
            for dx, dy, dz in _STEPS:
                x, y, z = v[0] + dx, v[1] + dy, v[2] + dz
                if 0 <= x < n and 0 <= y < n and 0 <= z < n:
                    out.append((x, y, z))
            return out
        return list(self._adj[v])

    def degree(self, v):
        return len(self.neighbors(v))

    def has_edge(self, u, v):
        return (
            self.has_vertex(u) and self.has_vertex(v) and coords_adjacent(u, v)
        )

    def edges(self):
        out = []
        for u in self.vertices():
            for dx, dy, dz in _FORWARD:
                w = (u[0] + dx, u[1] + dy, u[2] + dz)
                if self.has_vertex(w):
                    out.append((u, w))
        return out

    def num_edges(self):
        return len(self.edges())

    def vertex_id(self, v):
        x, y, z = v
        return x + self.n * y + self.n * self.n * z

    def coord_of(self, vid):
        n = self.n
        return (vid % n, (vid // n) % n, vid // (n * n))

    def induced(self, vertices):
        return GridGraph(self.n, vertices)

    def subgraph(self, keep):
        keep = set(keep)
        return self.induced(v for v in keep if self.has_vertex(v))

    def to_json(self):
        obj = {"n": self.n}
        if self.is_full:
            obj["vertices"] = "full"
            obj["edges"] = "implicit"
        else:
            verts = self.vertices()
            obj["vertices"] = [list(v) for v in verts]
            obj["edges"] = "implicit"
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        n = obj["n"]
        if obj.get("vertices", "full") == "full":
            g = cls(n)
        else:
            g = cls(n, [tuple(v) for v in obj["vertices"]])
        edges = obj.get("edges", "implicit")
        if edges != "implicit":
            verts = g.vertices()
            explicit = {
                tuple(sorted((tuple(verts[i]), tuple(verts[j]))))
                for i, j in edges
            }
            implied = {tuple(sorted(e)) for e in g.edges()}
            if explicit != implied:
                raise ValueError("edge list disagrees with the adjacency rule")
        return g

    def to_dot(self):
        lines = ["graph qn {"]
        for v in self.vertices():
            lines.append(f'  "{v[0]},{v[1]},{v[2]}";')
        for u, w in self.edges():
            lines.append(
                f'  "{u[0]},{u[1]},{u[2]}" -- "{w[0]},{w[1]},{w[2]}";'
            )
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        kind = "full" if self.is_full else f"induced[{self.num_vertices()}]"
        return f"GridGraph(n={self.n}, {kind})"


def build_qn(n):
    """The full grid Q_n; rejects n = 0."""
    return GridGraph(n)


def subgrid(g, v, m):
    """The m^3 cube of g anchored at v, as an induced GridGraph."""
    if m < 1:
        raise ValueError("subgrid side must be positive")
    x0, y0, z0 = v
    if not (
        g.has_vertex(v) and x0 + m <= g.n and y0 + m <= g.n and z0 + m <= g.n
    ):
        raise ValueError(f"subgrid {v}+{m} exceeds bounds of Q_{g.n}")
    vs = [
        (x0 + dx, y0 + dy, z0 + dz)
        for dz in range(m)
        for dy in range(m)
        for dx in range(m)
    ]
    if not g.is_full:
        missing = [u for u in vs if not g.has_vertex(u)]
        if missing:
            raise ValueError(f"subgrid not contained in host: missing {missing[0]}")
    return GridGraph(g.n, vs)


def b_square(v, b):
    """The (b+1)^2 constant-x square {(x, y+dy, z+dz) : 0 <= dy,dz <= b}."""
    if b < 0:
        raise ValueError("square parameter must be non-negative")
    x, y, z = v
    return {(x, y + dy, z + dz) for dy in range(b + 1) for dz in range(b + 1)}


@dataclass(frozen=True)
class Staircase:
    """x-monotone path: unit x-steps, y and z non-decreasing by 0 or 1."""

    vertices: tuple

    def __post_init__(self):
        vs = tuple(tuple(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if not vs:
            raise ValueError("staircase must be non-empty")
        for a, b in zip(vs, vs[1:]):
            if b[0] != a[0] + 1 or b[1] - a[1] not in (0, 1) or b[2] - a[2] not in (0, 1):
                raise ValueError(f"invalid staircase step {a} -> {b}")

    @property
    def first(self):
        return self.vertices[0]

    @property
    def last(self):
        return self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def vertex_at_x(self, x):
        i = x - self.first[0]
        if not 0 <= i < len(self.vertices):
            raise KeyError(x)
        return self.vertices[i]

    def extended(self, before=0, after=0):
        """Prepend/append straight x-steps (same y,z as the end vertices)."""
        x0, y0, z0 = self.first
        x1, y1, z1 = self.last
        pre = [(x0 - k, y0, z0) for k in range(before, 0, -1)]
        post = [(x1 + k, y1, z1) for k in range(1, after + 1)]
        return Staircase(tuple(pre) + self.vertices + tuple(post))


@dataclass(frozen=True)
class Enlargement:
    """Induced subgraph on the union of b-squares along a staircase."""

    base: Staircase
    b: int
    graph: GridGraph = field(compare=False)
    left_side: frozenset
    right_side: frozenset

    @property
    def vertex_set(self):
        return frozenset(self.graph.vertices())

    @property
    def sides(self):
        return self.left_side | self.right_side

    def interior(self):
        return self.vertex_set - self.sides


def enlarge(g, staircase, b):
    """The b-enlargement of a staircase inside g; rejects clipped squares."""
    if b < 0:
        raise ValueError("enlargement parameter must be non-negative")
    verts = set()
    for v in staircase:
        sq = b_square(v, b)
        for u in sq:
            if not g.has_vertex(u):
                raise ValueError(
                    f"square around {v} leaves the grid at {u} (b={b})"
                )
        verts |= sq
    return Enlargement(
        base=staircase,
        b=b,
        graph=g.induced(verts),
        left_side=frozenset(b_square(staircase.first, b)),
        right_side=frozenset(b_square(staircase.last, b)),
    )


def project(u, enlargement):
    """Retract a point of a (b+1)-enlargement onto the b-enlargement.

    ``enlargement`` must be the (b+1)-enlargement; the image lands in the
    b-enlargement of the same staircase, is adjacent-or-equal to u, and the
    map preserves adjacency up to equality.
    """
    if enlargement.b < 1:
        raise ValueError("projection needs a (b+1)-enlargement with b+1 >= 1")
    if not enlargement.graph.has_vertex(u):
        raise ValueError(f"{u} outside the enlargement")
    b = enlargement.b - 1
    base = enlargement.base.vertex_at_x(u[0])
    _, y0, z0 = base
    return (u[0], min(u[1], y0 + b), min(u[2], z0 + b))


def anchor(d, j, k):
    """Anchor point (4dj+4dk, 2dj+dk, dj+2dk) of the (j,k) layout cell."""
    if d < 1:
        raise ValueError("anchor spacing must be positive")
    return (4 * d * j + 4 * d * k, 2 * d * j + d * k, d * j + 2 * d * k)


def join_staircases(g, p_first, p_second, b=0):
    """Join two staircases by a monotone route, lower x-range first.

    The result has one input as its initial segment and the other as its
    final segment.  Routing advances x by one per step and greedily raises y
    and z toward the second staircase's first vertex.  When b > 0 the
    b-enlargement of the join is required to fit inside g.  Raises if the
    inputs overlap in x or no monotone route exists.
    """
    if p_first.first[0] > p_second.first[0]:
        p_first, p_second = p_second, p_first
    a = p_first.last
    c = p_second.first
    if c[0] <= a[0]:
        raise ValueError("staircases overlap in x; cannot join")
    dx = c[0] - a[0]
    if c[1] < a[1] or c[2] < a[2] or c[1] - a[1] > dx or c[2] - a[2] > dx:
        raise ValueError(f"no monotone route from {a} to {c}")
    route = []
    x, y, z = a
    while x + 1 < c[0]:
        x += 1
        if y < c[1]:
            y += 1
        if z < c[2]:
            z += 1
        route.append((x, y, z))
    # Last step must land exactly on c; the greedy advance guarantees the
    # remaining deficits are at most one, and the validator re-checks.
    joined = Staircase(p_first.vertices + tuple(route) + p_second.vertices)
    for v in joined:
        if not g.has_vertex(v):
            raise ValueError(f"join leaves the grid at {v}")
        if b and not g.has_vertex((v[0], v[1] + b, v[2] + b)):
            raise ValueError(f"b-enlargement of join leaves the grid at {v}")
    return joined


# 2D grids (used by brambles, slab sheets, and as treewidth test subjects).


def plane_grid(rows, cols=None):
    """Plain rows x cols grid graph on (x, y) pairs, 4-neighbor adjacency."""
    from .graphs import Graph

    if cols is None:
        cols = rows
    g = Graph(vertices=((x, y) for x in range(cols) for y in range(rows)))
    for x in range(cols):
        for y in range(rows):
            if x + 1 < cols:
                g.add_edge((x, y), (x + 1, y))
            if y + 1 < rows:
                g.add_edge((x, y), (x, y + 1))
    return g


def triangulated_grid(rows, cols=None):
    """Grid with the (1,1) diagonal in every unit cell (a near-triangulation)."""
    g = plane_grid(rows, cols)
    if cols is None:
        cols = rows
    for x in range(cols - 1):
        for y in range(rows - 1):
            g.add_edge((x, y), (x + 1, y + 1))
    return g


def coordinate_permutations(n, verify=True):
    """The six coordinate permutations of Q_n, verified as automorphisms.

    Returns a list of vertex maps (callables).  Verification is a full edge
    scan; pass verify=False for grids too large to scan.
    """
    import itertools

    g = GridGraph(n)
    maps = []
    for perm in itertools.permutations(range(3)):
        fn = (lambda p: lambda v: (v[p[0]], v[p[1]], v[p[2]]))(perm)
        if verify:
            for u, w in g.edges():
                if not coords_adjacent(fn(u), fn(w)):
                    raise AssertionError(f"permutation {perm} not an automorphism")
        maps.append(fn)
    return maps


def antipodal_map(n, verify=True):
    """v -> (n-1) - v componentwise; a verified automorphism of Q_n."""
    fn = lambda v: (n - 1 - v[0], n - 1 - v[1], n - 1 - v[2])
    if verify:
        g = GridGraph(n)
        for u, w in g.edges():
            if not coords_adjacent(fn(u), fn(w)):
                raise AssertionError("antipodal map not an automorphism")
    return fn
