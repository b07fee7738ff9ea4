"""Small generic graph container and traversal helpers.

Everything downstream (tree decompositions, separators, slabs) works against
the duck interface used here: ``vertices()``, ``neighbors(v)``, ``edges()``,
``has_vertex(v)``.  Vertices are arbitrary sortable hashables; iteration is
always in sorted order so results are deterministic.
"""

from collections import deque


class Graph:
    """Undirected simple graph over sortable hashable vertices."""

    def __init__(self, vertices=(), edges=()):
        self._adj = {}
        for v in vertices:
            self._adj.setdefault(v, set())
        for u, v in edges:
            self.add_edge(u, v)
        self._order = None

    def add_vertex(self, v):
        self._adj.setdefault(v, set())
        self._order = None

    def add_edge(self, u, v):
        if u == v:
            raise ValueError("self-loops not supported")
        self._adj.setdefault(u, set()).add(v)
        self._adj.setdefault(v, set()).add(u)
        self._order = None

    def vertices(self):
        if self._order is None:
            self._order = sorted(self._adj)
        return list(self._order)

    def has_vertex(self, v):
        return v in self._adj

    def neighbors(self, v):
        return sorted(self._adj[v])

    def degree(self, v):
        return len(self._adj[v])

    def has_edge(self, u, v):
        return u in self._adj and v in self._adj[u]

    def edges(self):
        out = []
        for u in self.vertices():
            for v in self._adj[u]:
                if u < v:
                    out.append((u, v))
        return out

    def num_vertices(self):
        return len(self._adj)

    def num_edges(self):
        return sum(len(s) for s in self._adj.values()) // 2

    def subgraph(self, keep):
        keep = set(keep)
        g = Graph(vertices=(v for v in keep if v in self._adj))
        for u, v in self.edges():
            if u in keep and v in keep:
                g.add_edge(u, v)
        return g

    def adjacency_dict(self):
        return {v: set(self._adj[v]) for v in self._adj}

    def __contains__(self, v):
        return v in self._adj

    def __repr__(self):
        return f"Graph(|V|={self.num_vertices()}, |E|={self.num_edges()})"


def bfs_reachable(graph, sources, blocked=frozenset(), targets=None):
    """Vertices reachable from ``sources`` avoiding ``blocked``.

    Returns the reachable set; stops early (returning the set so far) once a
    target is reached when ``targets`` is given.
    """
    blocked = set(blocked)
    seen = set()
    queue = deque()
    for s in sources:
        if s not in blocked and s not in seen and graph.has_vertex(s):
            seen.add(s)
            queue.append(s)
    targets = set(targets) if targets is not None else None
    if targets and seen & targets:
        return seen
    while queue:
        u = queue.popleft()
        for w in graph.neighbors(u):
            if w in seen or w in blocked:
                continue
            seen.add(w)
            if targets and w in targets:
                return seen
            queue.append(w)
    return seen


def bfs_path(graph, sources, targets, allowed=None):
    """Shortest path from any source to any target, or None.

    When ``allowed`` is given, the path may only use vertices in it (sources
    and targets included).
    """
    targets = set(targets)
    parent = {}
    queue = deque()
    for s in sorted(set(sources)):
        if not graph.has_vertex(s):
            continue
        if allowed is not None and s not in allowed:
            continue
        if s in parent:
            continue
        parent[s] = None
        if s in targets:
            return [s]
        queue.append(s)
    while queue:
        u = queue.popleft()
        for w in graph.neighbors(u):
            if w in parent:
                continue
            if allowed is not None and w not in allowed:
                continue
            parent[w] = u
            if w in targets:
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            queue.append(w)
    return None


def is_connected(graph, within=None):
    """Connectivity of the graph, or of the induced subgraph on ``within``."""
    if within is not None:
        within = set(within)
        if not within:
            return True
        start = min(within)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in graph.neighbors(u):
                if w in within and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen == within
    vs = graph.vertices()
    if not vs:
        return True
    return len(bfs_reachable(graph, [vs[0]])) == len(vs)


def connected_components(graph, within=None):
    """Components as sorted lists of vertices, in canonical order."""
    verts = sorted(within) if within is not None else graph.vertices()
    vset = set(verts)
    seen = set()
    comps = []
    for v in verts:
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in graph.neighbors(u):
                if w in vset and w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        comps.append(sorted(comp))
    return comps
