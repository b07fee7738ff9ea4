"""L-valued vertex functions and the discrete walk calculus.

Vertex labels live in L = {-1, 0, +1, star}.  A labeling is continuous when
no edge joins -1 to +1, holomorphic when additionally no edge joins 0 to
star, and entire when continuous with no star at all.  Fixing an orientation
of the edges, the difference operator sends a labeling to an integer edge
function; walks pair with edge functions through their signed traversal
indicator.  Triangles on which a labeling is holomorphic integrate to zero,
which is what the contractibility and almost-homotopy certificates verify.

All arithmetic is exact: integers for chains and integrals, Fractions for
the half-integer interior path weights.
"""

import json
from fractions import Fraction


class _Star:
    """The discard label; deliberately not an integer."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "star"


STAR = _Star()
L_VALUES = (-1, 0, 1, STAR)


def _check_lvalue(val):
    if val is STAR or val in (-1, 0, 1):
        return val
    raise ValueError(f"not an L-value: {val!r}")


class LFunction:
    """Total map from the vertices of a graph into {-1, 0, +1, star}."""

    def __init__(self, graph, values):
        self.graph = graph
        self.values = {}
        for v in graph.vertices():
            if v not in values:
                raise ValueError(f"missing value for vertex {v}")
            self.values[v] = _check_lvalue(values[v])

    def __call__(self, v):
        return self.values[v]

    def _bad_edge(self, forbidden, within=None):
        vals = self.values
        for u in (self.graph.vertices() if within is None else sorted(within)):
            fu = vals[u]
            for w in self.graph.neighbors(u):
                if within is not None and w not in within:
                    continue
                if (fu, vals[w]) in forbidden:
                    return (u, w)
        return None

    def is_continuous(self, within=None):
        return self._bad_edge({(1, -1), (-1, 1)}, within) is None

    def is_holomorphic(self, within=None):
        forbidden = {(1, -1), (-1, 1), (0, STAR), (STAR, 0)}
        return self._bad_edge(forbidden, within) is None

    def is_entire(self, within=None):
        if within is None:
            has_star = any(v is STAR for v in self.values.values())
        else:
            has_star = any(self.values[u] is STAR for u in within)
        return not has_star and self.is_continuous(within)

    def to_json(self):
        order = self.graph.vertices()
        enc = ["*" if self.values[v] is STAR else self.values[v] for v in order]
        return json.dumps(enc)

    @classmethod
    def from_json(cls, graph, text):
        raw = json.loads(text)
        order = graph.vertices()
        if len(raw) != len(order):
            raise ValueError("value array length disagrees with vertex count")
        vals = {
            v: (STAR if r == "*" else r) for v, r in zip(order, raw)
        }
        return cls(graph, vals)


class Orientation:
    """A fixed head/tail assignment for every edge of a graph."""

    def __init__(self, graph, flipped=frozenset()):
        self.graph = graph
        self._flipped = frozenset(canon_edge(*e) for e in flipped)

    @staticmethod
    def canonical(graph):
        return Orientation(graph)

    def ends(self, e):
        """(tail, head) for a canonical edge pair."""
        u, v = e
        if e in self._flipped:
            return (v, u)
        return (u, v)

    def head(self, e):
        return self.ends(e)[1]

    def tail(self, e):
        return self.ends(e)[0]

    def flipped_everywhere(self):
        """The reverse orientation (used by orientation-invariance tests)."""
        all_edges = {canon_edge(u, v) for u, v in self.graph.edges()}
        return Orientation(self.graph, all_edges ^ self._flipped)


def canon_edge(u, v):
    return (u, v) if u < v else (v, u)


class OneChain:
    """Sparse integer edge function tied to an orientation."""

    def __init__(self, orientation, data=None):
        self.orientation = orientation
        self.data = {}
        if data:
            for e, c in data.items():
                if c:
                    self.data[canon_edge(*e)] = int(c)

    def __getitem__(self, e):
        return self.data.get(canon_edge(*e), 0)

    def support(self):
        return sorted(self.data)

    def __add__(self, other):
        if other.orientation is not self.orientation:
            raise ValueError("chains over different orientations")
        out = dict(self.data)
        for e, c in other.data.items():
            out[e] = out.get(e, 0) + c
            if not out[e]:
                del out[e]
        return OneChain(self.orientation, out)

    def __neg__(self):
        return OneChain(self.orientation, {e: -c for e, c in self.data.items()})

    def __eq__(self, other):
        return isinstance(other, OneChain) and self.data == other.data

    def __repr__(self):
        return f"OneChain({self.data})"


class Walk:
    """Directed walk: vertex sequence with its explicit edge sequence."""

    def __init__(self, graph, vertices):
        vs = [tuple(v) if isinstance(v, (list, tuple)) else v for v in vertices]
        if not vs:
            raise ValueError("walk needs at least one vertex")
        self.graph = graph
        self.vertices = vs
        self.edge_seq = []
        for a, b in zip(vs, vs[1:]):
            if not graph.has_edge(a, b):
                raise ValueError(f"walk step {a} -> {b} is not an edge")
            self.edge_seq.append(canon_edge(a, b))

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    @property
    def length(self):
        return len(self.edge_seq)

    def is_closed(self):
        return self.start == self.end

    def is_path(self):
        return len(set(self.vertices)) == len(self.vertices)

    def vertex_set(self):
        return set(self.vertices)

    def reversed(self):
        return Walk(self.graph, list(reversed(self.vertices)))

    def concat(self, other):
        if self.end != other.start:
            raise ValueError("concatenation endpoints do not meet")
        return Walk(self.graph, self.vertices + other.vertices[1:])

    def to_json(self, graph=None):
        g = graph or self.graph
        return json.dumps([g.vertex_id(v) for v in self.vertices])

    @classmethod
    def from_json(cls, graph, text):
        ids = json.loads(text)
        return cls(graph, [graph.coord_of(i) for i in ids])

    def __repr__(self):
        return f"Walk({self.vertices})"


def d(f, orientation):
    """Difference chain: head value minus tail value, zero across stars."""
    out = {}
    for u, v in f.graph.edges():
        e = canon_edge(u, v)
        tail, head = orientation.ends(e)
        fh, ft = f(head), f(tail)
        if fh is STAR or ft is STAR:
            continue
        if fh != ft:
            out[e] = fh - ft
    return OneChain(orientation, out)


def d_on_edge(f, orientation, e):
    """The difference chain evaluated on a single edge."""
    tail, head = orientation.ends(canon_edge(*e))
    fh, ft = f(head), f(tail)
    if fh is STAR or ft is STAR:
        return 0
    return fh - ft


def indicator(walk, orientation):
    """Signed traversal count per edge: +1 when arriving at the head."""
    out = {}
    for (a, b), e in zip(zip(walk.vertices, walk.vertices[1:]), walk.edge_seq):
        sign = 1 if b == orientation.head(e) else -1
        out[e] = out.get(e, 0) + sign
        if not out[e]:
            del out[e]
    return OneChain(orientation, out)


def integrate(walk, chain):
    """Exact pairing of a walk with an edge chain."""
    total = 0
    orientation = chain.orientation
    for (a, b), e in zip(zip(walk.vertices, walk.vertices[1:]), walk.edge_seq):
        c = chain[e]
        if c:
            sign = 1 if b == orientation.head(e) else -1
            total += sign * c
    return total


def integrate_d(walk, f, orientation):
    """integrate(walk, d(f, orientation)) without materializing the chain."""
    total = 0
    for (a, b), e in zip(zip(walk.vertices, walk.vertices[1:]), walk.edge_seq):
        tail, head = orientation.ends(e)
        fh, ft = f(head), f(tail)
        if fh is STAR or ft is STAR:
            continue
        sign = 1 if b == head else -1
        total += sign * (fh - ft)
    return total


def is_triangle(walk):
    return walk.length == 3 and walk.is_closed()


def is_contractible(triangle, f):
    """True when f is holomorphic on the triangle's vertex set."""
    if not is_triangle(triangle):
        raise ValueError("contractibility is defined for triangles only")
    return f.is_holomorphic(within=triangle.vertex_set())


def verify_almost_contractible(walk, triangles, f, k):
    """Certificate check: indicators of the triangles sum to the walk's.

    True iff the triangle indicator chains sum exactly to the walk's
    indicator and every triangle past the first k is contractible for f.
    """
    if not walk.is_closed():
        raise ValueError("almost-contractibility applies to closed walks")
    orientation = Orientation.canonical(walk.graph)
    total = OneChain(orientation)
    for t in triangles:
        if not is_triangle(t):
            return False
        total = total + indicator(t, orientation)
    if total != indicator(walk, orientation):
        return False
    return all(is_contractible(t, f) for t in triangles[k:])


def verify_almost_homotopic(w1, w2, q, r, triangles, f, k):
    """Certificate check for the composite closed walk q . w2 . r~ . w1~.

    Requires q to join the starts and r the ends; f must be constant and
    integer on the vertices of q and of r.
    """
    if q.start != w1.start or q.end != w2.start:
        raise ValueError("q must join the walks' start vertices")
    if r.start != w1.end or r.end != w2.end:
        raise ValueError("r must join the walks' end vertices")
    for conn in (q, r):
        vals = {f(v) for v in conn.vertex_set()}
        if len(vals) != 1 or STAR in vals:
            return False
    composite = q.concat(w2).concat(r.reversed()).concat(w1.reversed())
    return verify_almost_contractible(composite, triangles, f, k)


def path_weights(path, f):
    """Interior weights half of (next value minus previous value).

    Requires f entire on the path's vertex set; the returned Fractions are
    exact multiples of one half in [-1, 1].
    """
    if not path.is_path():
        raise ValueError("weights are defined for paths")
    if not f.is_entire(within=path.vertex_set()):
        raise ValueError("labeling is not entire on the path")
    vs = path.vertices
    out = {}
    for i in range(1, len(vs) - 1):
        out[vs[i]] = Fraction(f(vs[i + 1]) - f(vs[i - 1]), 2)
    return out


def weight_sum(weights, subset):
    return sum((weights[v] for v in subset if v in weights), Fraction(0))
