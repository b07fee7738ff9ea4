"""Tree decompositions, exact treewidth, balanced separations, brambles.

The exact solver is a branch-and-bound over elimination orderings on
bitmask adjacency (min-fill upper bound, minor-min-width lower bound,
simplicial pruning, memoized states).  The weighted balanced-separation
routine follows its correctness argument literally: locate a node all of
whose neighbor-subtree masses are at most two thirds of the total via the
pointer walk, then group the sorted masses greedily.  Weight arithmetic is
exact (Fractions); every step the argument takes for granted is asserted at
runtime.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd as math_gcd

from .graphs import is_connected


class SizeGuardError(RuntimeError):
    """Raised when an exact solver is asked to exceed its size guard."""


class TreeDecomposition:
    """Tree plus bag map; width is the largest bag size minus one."""

    def __init__(self, bags, tree_edges):
        self.bags = {node: frozenset(bag) for node, bag in bags.items()}
        self.tree_edges = [tuple(e) for e in tree_edges]
        self._nbrs = {node: [] for node in self.bags}
        for a, b in self.tree_edges:
            if a not in self.bags or b not in self.bags:
                raise ValueError(f"tree edge {(a, b)} references unknown node")
            self._nbrs[a].append(b)
            self._nbrs[b].append(a)

    @property
    def nodes(self):
        return sorted(self.bags)

    def tree_neighbors(self, node):
        return list(self._nbrs[node])

    @property
    def width(self):
        if not self.bags:
            return -1
        return max(len(b) for b in self.bags.values()) - 1

    def is_tree(self):
        nodes = self.nodes
        if not nodes:
            return True
        if len(self.tree_edges) != len(nodes) - 1:
            return False
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for w in self._nbrs[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(nodes)

    def to_lines(self):
        """Line format: header "nodes width", bags, then tree edges."""
        nodes = self.nodes
        index = {node: i for i, node in enumerate(nodes)}
        out = [f"{len(nodes)} {self.width}"]
        for node in nodes:
            out.append(" ".join(str(v) for v in sorted(self.bags[node])))
        for a, b in self.tree_edges:
            out.append(f"{index[a]} {index[b]}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_lines(cls, text):
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty decomposition text")
        count, width = (int(tok) for tok in lines[0].split())
        bags = {}
        for i in range(count):
            row = lines[1 + i].split()
            bags[i] = frozenset(int(tok) for tok in row)
        edges = []
        for line in lines[1 + count:]:
            if line.strip():
                a, b = (int(tok) for tok in line.split())
                edges.append((a, b))
        td = cls(bags, edges)
        if td.width != width:
            raise ValueError("header width disagrees with bags")
        return td


def validate_decomposition(graph, td):
    """All three axioms: vertex cover, edge cover, connected occurrences."""
    if not td.is_tree():
        return False
    covered = set()
    for bag in td.bags.values():
        covered |= bag
    verts = set(graph.vertices())
    if not verts <= covered:
        return False
    if not covered <= verts:
        return False
    for u, v in graph.edges():
        if not any(u in bag and v in bag for bag in td.bags.values()):
            return False
    # Connectivity of {node : v in bag(node)} in the tree, per vertex.
    occurrences = {}
    for node, bag in td.bags.items():
        for v in bag:
            occurrences.setdefault(v, set()).add(node)
    for v, occ in occurrences.items():
        start = next(iter(occ))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in td.tree_neighbors(u):
                if w in occ and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != occ:
            return False
    return True


# Bitmask elimination-ordering machinery.


def _bit_iter(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _eliminate(adj, v):
    nb = adj[v]
    out = list(adj)
    out[v] = 0
    for u in _bit_iter(nb):
        out[u] = (out[u] | nb) & ~(1 << u) & ~(1 << v)
    for u in range(len(adj)):
        if u != v and not (nb >> u) & 1:
            out[u] &= ~(1 << v)
    return out


def _minfill_order(adj):
    n = len(adj)
    adj = list(adj)
    remaining = (1 << n) - 1
    width = 0
    order = []
    while remaining:
        best_v, best_fill = -1, None
        for v in _bit_iter(remaining):
            nb = adj[v]
            fill = 0
            for u in _bit_iter(nb):
                fill += bin(nb & ~adj[u] & ~(1 << u)).count("1")
            fill //= 2
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
        width = max(width, bin(adj[best_v]).count("1"))
        order.append(best_v)
        adj = _eliminate(adj, best_v)
        remaining &= ~(1 << best_v)
    return width, order


def _minor_min_width(adj):
    adj = list(adj)
    alive = (1 << len(adj)) - 1
    best = 0
    while alive:
        v, dv = -1, None
        for u in _bit_iter(alive):
            deg = bin(adj[u]).count("1")
            if dv is None or deg < dv:
                v, dv = u, deg
        best = max(best, dv)
        nb = adj[v]
        if nb == 0:
            alive &= ~(1 << v)
            continue
        # Contract v into the neighbor sharing the fewest other neighbors.
        w, common = -1, None
        for u in _bit_iter(nb):
            c = bin(adj[u] & nb).count("1")
            if common is None or c < common:
                w, common = u, c
        merged = (adj[v] | adj[w]) & ~(1 << v) & ~(1 << w)
        adj[w] = merged
        for u in _bit_iter(merged):
            adj[u] = (adj[u] | (1 << w)) & ~(1 << v)
        for u in range(len(adj)):
            adj[u] &= ~(1 << v)
        alive &= ~(1 << v)
    return best


def _is_clique(adj, mask):
    for v in _bit_iter(mask):
        if mask & ~adj[v] & ~(1 << v):
            return False
    return True


def _bb_order(adj, cap=None):
    """Best elimination ordering by branch and bound.

    Returns (width, order); when ``cap`` is given, only solutions of width
    strictly below cap are sought and (cap, None) means none exists.
    """
    n = len(adj)
    if n == 0:
        return -1, []
    ub, ub_order = _minfill_order(adj)
    root_lb = _minor_min_width(adj)
    if cap is not None and ub >= cap:
        ub, ub_order = cap, None
    best = [ub, ub_order]
    if root_lb >= best[0]:
        return best[0], best[1]
    seen = {}

    def dfs(adj_cur, remaining, g, order):
        if remaining == 0:
            if g < best[0]:
                best[0], best[1] = g, list(order)
            return
        prev = seen.get(remaining)
        if prev is not None and prev <= g:
            return
        seen[remaining] = g
        # Simplicial vertices are always safe to eliminate first.
        forced = None
        cands = []
        for v in _bit_iter(remaining):
            nb = adj_cur[v]
            if _is_clique(adj_cur, nb):
                forced = v
                break
            cands.append((bin(nb).count("1"), v))
        if forced is not None:
            cands = [(bin(adj_cur[forced]).count("1"), forced)]
        else:
            cands.sort()
        for deg, v in cands:
            g1 = max(g, deg)
            if g1 >= best[0]:
                continue
            adj_next = _eliminate(adj_cur, v)
            rem = remaining & ~(1 << v)
            lb = _minor_min_width([adj_next[u] if (rem >> u) & 1 else 0
                                   for u in range(n)])
            if max(g1, lb) >= best[0]:
                continue
            order.append(v)
            dfs(adj_next, rem, g1, order)
            order.pop()

    dfs(list(adj), (1 << n) - 1, 0, [])
    return best[0], best[1]


def _graph_masks(graph):
    verts = graph.vertices()
    index = {v: i for i, v in enumerate(verts)}
    adj = [0] * len(verts)
    for u, v in graph.edges():
        adj[index[u]] |= 1 << index[v]
        adj[index[v]] |= 1 << index[u]
    return verts, adj


def decomposition_from_order(graph, order):
    """Decomposition whose bags are the elimination neighborhoods."""
    if not order:
        return TreeDecomposition({0: frozenset()}, [])
    adj = {v: set(graph.neighbors(v)) for v in graph.vertices()}
    pos = {v: i for i, v in enumerate(order)}
    bags = {}
    for v in order:
        nb = adj[v]
        bags[pos[v]] = frozenset(nb | {v})
        for a in nb:
            adj[a] |= nb
            adj[a].discard(a)
            adj[a].discard(v)
        for a in adj:
            adj[a].discard(v)
        del adj[v]
    edges = []
    roots = []
    for i, v in enumerate(order):
        later = [pos[w] for w in bags[i] if w != v and pos[w] > i]
        if later:
            edges.append((i, min(later)))
        else:
            roots.append(i)
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    return TreeDecomposition(bags, edges)


def heuristic_decomposition(graph):
    """Min-fill elimination decomposition; valid, not necessarily optimal."""
    verts = graph.vertices()
    if not verts:
        return TreeDecomposition({0: frozenset()}, [])
    _, adj = _graph_masks(graph)
    _, order = _minfill_order(adj)
    return decomposition_from_order(graph, [verts[i] for i in order])


def exact_treewidth(graph, guard=40):
    """Exact treewidth with a validating witness decomposition."""
    verts = graph.vertices()
    if len(verts) > guard:
        raise SizeGuardError(
            f"{len(verts)} vertices exceeds exact-solver guard {guard}"
        )
    if not verts:
        return -1, TreeDecomposition({0: frozenset()}, [])
    _, adj = _graph_masks(graph)
    width, order_idx = _bb_order(adj)
    td = decomposition_from_order(graph, [verts[i] for i in order_idx])
    assert td.width == width
    return width, td


def find_cycle(graph):
    """Some cycle as a vertex list, or None if the graph is a forest.

    Consecutive list entries are edges and so is (last, first).
    """
    parent = {}
    depth = {}
    for root in graph.vertices():
        if root in parent:
            continue
        parent[root] = None
        depth[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for w in graph.neighbors(u):
                if w not in parent:
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    stack.append(w)
                    continue
                if parent[u] == w or parent[w] == u:
                    continue
                # Non-tree edge u-w: combine the tree paths to their meet.
                a, b = u, w
                path_a, path_b = [a], [b]
                while depth[a] > depth[b]:
                    a = parent[a]
                    path_a.append(a)
                while depth[b] > depth[a]:
                    b = parent[b]
                    path_b.append(b)
                while a != b:
                    a = parent[a]
                    path_a.append(a)
                    b = parent[b]
                    path_b.append(b)
                return path_a + path_b[-2::-1]
    return None


def decide_width_at_most(graph, k, guard=40):
    """Decide tw(G) <= k exactly.

    Returns (True, decomposition) or (False, certificate).  For k <= 1 the
    decision is structural (edge / cycle certificates) and works at any
    size; beyond that the guarded branch-and-bound runs with a cap.
    """
    verts = graph.vertices()
    if k < 0:
        if not verts:
            return True, TreeDecomposition({0: frozenset()}, [])
        return False, ("nonempty", verts[0])
    if k == 0:
        edges = graph.edges()
        if edges:
            return False, ("edge", edges[0])
        bags = {i: frozenset([v]) for i, v in enumerate(verts)}
        bags = bags or {0: frozenset()}
        tree = [(i, i + 1) for i in range(len(bags) - 1)]
        return True, TreeDecomposition(bags, tree)
    if k == 1:
        cyc = find_cycle(graph)
        if cyc is not None:
            return False, ("cycle", cyc)
        return True, _forest_decomposition(graph)
    if len(verts) > guard:
        raise SizeGuardError(
            f"{len(verts)} vertices exceeds decision guard {guard}"
        )
    _, adj = _graph_masks(graph)
    width, order_idx = _bb_order(adj, cap=k + 1)
    if order_idx is None:
        return False, ("search", k)
    td = decomposition_from_order(graph, [verts[i] for i in order_idx])
    return True, td


def _forest_decomposition(graph):
    """Width <= 1 decomposition of a forest: one bag per edge."""
    verts = graph.vertices()
    if not verts:
        return TreeDecomposition({0: frozenset()}, [])
    bags = {}
    node_of_vertex = {}
    edges = []
    counter = 0
    for root in verts:
        if root in node_of_vertex:
            continue
        bags[counter] = frozenset([root])
        node_of_vertex[root] = counter
        if counter > 0:
            edges.append((counter - 1, counter))
        counter += 1
        stack = [root]
        while stack:
            u = stack.pop()
            for w in graph.neighbors(u):
                if w in node_of_vertex:
                    continue
                bags[counter] = frozenset([u, w])
                edges.append((node_of_vertex[u], counter))
                node_of_vertex[w] = counter
                counter += 1
                stack.append(w)
    return TreeDecomposition(bags, edges)


# Weighted balanced separation.


@dataclass(frozen=True)
class Separation:
    """Vertex cover pair with no edge between the private parts."""

    K: frozenset
    L: frozenset

    @property
    def cut(self):
        return self.K & self.L


def _as_fraction(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def weight_total(lam, vertices):
    return sum((_as_fraction(lam[v]) for v in vertices), Fraction(0))


def balanced_separation(graph, td, lam):
    """Separation with middle-third outer mass and a small cut.

    Requires |lam(v)| <= 1 for all v and lam(V) >= 3w+3 where w is the
    decomposition's width.  The cut is the chosen node's bag, so its size is
    at most w+1; the mass of K minus L lands in [1/3, 2/3] of the total.
    Comparisons against the thirds are exact: weights are rescaled to a
    common integer denominator and cross-multiplied.
    """
    if not validate_decomposition(graph, td):
        raise ValueError("invalid tree decomposition for this graph")
    verts = list(graph.vertices())
    fracs = {v: _as_fraction(lam[v]) for v in verts}
    scale = 1
    for w in fracs.values():
        if abs(w) > 1:
            raise ValueError(f"|weight| > 1 at weight {w}")
        scale = scale * w.denominator // math_gcd(scale, w.denominator)
    scaled = {v: int(w * scale) for v, w in fracs.items()}
    total = sum(scaled.values())
    t = td.width
    if total < (3 * t + 3) * scale:
        raise ValueError("total weight below 3t+3")

    nodes = td.nodes
    # Bag union beyond each directed tree edge, computed by DFS from leaves.
    union_beyond = {}

    def union_dir(u, v):
        key = (u, v)
        if key in union_beyond:
            return union_beyond[key]
        stack = [(u, v, False)]
        while stack:
            a, b, expanded = stack.pop()
            if (a, b) in union_beyond:
                continue
            children = [w for w in td.tree_neighbors(b) if w != a]
            if not expanded:
                stack.append((a, b, True))
                stack.extend((b, w, False) for w in children)
            else:
                acc = set(td.bags[b])
                for w in children:
                    acc |= union_beyond[(b, w)]
                union_beyond[(a, b)] = frozenset(acc)
        return union_beyond[key]

    side_cache = {}

    def side_set(u, v):
        key = (u, v)
        if key not in side_cache:
            side_cache[key] = union_dir(u, v) - td.bags[u]
        return side_cache[key]

    def side_mass(u, v):
        return sum(scaled[w] for w in side_set(u, v))

    u = nodes[0]
    visited_steps = 0
    while True:
        heavy = None
        for v in td.tree_neighbors(u):
            if 3 * side_mass(u, v) > 2 * total:
                heavy = v
                break
        if heavy is None:
            break
        u = heavy
        visited_steps += 1
        assert visited_steps <= 2 * len(nodes), (
            "pointer walk failed to terminate; decomposition weights violate "
            "the balancing argument"
        )

    neighbors = td.tree_neighbors(u)
    sides = [side_set(u, v) for v in neighbors]
    masses = [side_mass(u, v) for v in neighbors]
    # The neighbor subtrees must partition everything outside the bag.
    seen = set()
    for s in sides:
        assert not (seen & s), "neighbor subtree sets overlap"
        seen |= s
    assert seen == set(verts) - td.bags[u], "subtree sets do not cover V minus bag"

    order = sorted(range(len(sides)), key=lambda i: masses[i], reverse=True)
    prefix = 0
    chosen = []
    for i in order:
        chosen.append(i)
        prefix += masses[i]
        if 3 * prefix >= total:
            break
    assert 3 * prefix >= total, "greedy grouping failed to reach one third"
    chosen_set = set(chosen)
    k_side = set(td.bags[u])
    l_side = set(td.bags[u])
    for i, s in enumerate(sides):
        if i in chosen_set:
            k_side |= s
        else:
            l_side |= s
    sep = Separation(K=frozenset(k_side), L=frozenset(l_side))

    mass = sum(scaled[v] for v in sep.K - sep.L)
    assert total <= 3 * mass <= 2 * total, "outer mass left the middle third"
    assert len(sep.cut) <= t + 1
    assert sep.K | sep.L == set(verts)
    for a, b in graph.edges():
        in_k = a in sep.K - sep.L
        in_l = a in sep.L - sep.K
        other_k = b in sep.K - sep.L
        other_l = b in sep.L - sep.K
        assert not ((in_k and other_l) or (in_l and other_k)), (
            "edge crosses the separation"
        )
    return sep


# Brambles.


def validate_bramble(graph, sets):
    """Non-empty sets whose pairwise unions induce connected subgraphs."""
    sets = [frozenset(s) for s in sets]
    if not sets or any(not s for s in sets):
        return False
    verts = set(graph.vertices())
    for s in sets:
        if not s <= verts:
            return False
    for i, a in enumerate(sets):
        for b in sets[i:]:
            if not is_connected(graph, within=a | b):
                return False
    return True


def bramble_order(sets, guard_sets=64):
    """Exact minimum hitting set size over the family."""
    family = [frozenset(s) for s in sets]
    if any(not s for s in family):
        raise ValueError("bramble sets must be non-empty")
    if len(family) > guard_sets:
        raise SizeGuardError(f"{len(family)} sets exceeds guard {guard_sets}")
    # Drop supersets: hitting a subset hits the superset too.
    family.sort(key=len)
    core = []
    for s in family:
        if not any(c <= s for c in core):
            core.append(s)

    def packing_bound(unhit):
        used = set()
        count = 0
        for s in sorted(unhit, key=len):
            if not (s & used):
                used |= s
                count += 1
        return count

    best = [len(core), None]

    def search(unhit, picked):
        if not unhit:
            if len(picked) < best[0] or best[1] is None:
                best[0], best[1] = len(picked), set(picked)
            return
        if len(picked) + packing_bound(unhit) >= best[0] and best[1] is not None:
            return
        target = min(unhit, key=len)
        for v in sorted(target):
            rest = [s for s in unhit if v not in s]
            picked.append(v)
            search(rest, picked)
            picked.pop()

    search(core, [])
    return best[0]


def bramble_to_json(graph, sets):
    """Bramble as a JSON list of vertex-index arrays."""
    import json

    if hasattr(graph, "vertex_id"):
        index = {v: graph.vertex_id(v) for v in graph.vertices()}
    else:
        index = {v: i for i, v in enumerate(graph.vertices())}
    return json.dumps([sorted(index[v] for v in s) for s in sets])


def bramble_from_json(graph, text):
    import json

    if hasattr(graph, "coord_of"):
        lookup = graph.coord_of
    else:
        verts = graph.vertices()
        lookup = lambda i: verts[i]
    return [frozenset(lookup(i) for i in arr) for arr in json.loads(text)]


def crosses_bramble(t, triangulated=True):
    """The row/column crosses family on the t x t grid; order exactly t.

    Returns (graph, sets) where sets = all row_i union col_j.
    """
    from .grid import plane_grid, triangulated_grid

    if t < 1:
        raise ValueError("grid side must be positive")
    graph = triangulated_grid(t) if triangulated else plane_grid(t)
    rows = [frozenset((x, y) for x in range(t)) for y in range(t)]
    cols = [frozenset((x, y) for y in range(t)) for x in range(t)]
    sets = [rows[i] | cols[j] for i in range(t) for j in range(t)]
    return graph, sets
