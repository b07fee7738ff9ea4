"""Constructive blocked-staircase / bramble recursion over blocking levels.

Level b of the recursion either produces a staircase whose b-enlargement is
blocked by color class i off the sides, or a bramble of order t+1 inside one
color class.  Level 0 scans a subgrid's x-interior for a class-i vertex (a
three-vertex staircase through it is blocked); if the whole interior slab is
the other color, the crosses family on a (t+1) x (t+1) plane patch of the
slab is an order-(t+1) bramble there.  Higher levels lay out (2t+1)^2
subgrids at spread anchor points, recurse with the colors swapped, lift each
returned staircase to its swallowing component, join adjacent staircases by
monotone routes, and test each join; an unblocked join always yields a
monochrome connector between the neighboring components, and the column/row
unions of components and connectors form the bramble.

Joins are tested after a one-step extension at both ends (the whole layout
is shifted one unit in x to make room).  That closes the fringe case where a
path witnessing non-blockedness touches the sides on the wrong color: if the
extended join is unblocked, the witness crosses the original enlargement
entirely inside the opposite class, so the connector search cannot fail.

All results are verified before being returned; nothing is trusted from the
construction itself.
"""

import json
from dataclasses import dataclass, field

from . import grid as _grid
from .decomposition import bramble_order, validate_bramble
from .graphs import bfs_path, is_connected
from .separators import blocked_component, is_blocked

class BuilderSizeError(RuntimeError):
    """The grid is too small for the requested recursion level."""


class BuilderInvariantError(AssertionError):
    """An internal construction guarantee failed; indicates a builder bug."""


def schedule(t, b):
    """Grid size recurrence: t+2 at level zero, then (8t+5)(previous+b)."""
    if t < 0 or b < 0:
        raise ValueError("levels must be non-negative")
    n = t + 2
    for level in range(1, b + 1):
        n = (8 * t + 5) * (n + level)
    return n


def blocking_level(t):
    """The level at which a blocked staircase certifies treewidth t.

    Smallest b with (b+1)/sqrt(18) - 1 >= t, computed in integers:
    b = ceil(sqrt(18)(t+1)) - 1.
    """
    target = t + 1
    m = 1
    while m * m < 18 * target * target:
        m += 1
    return m - 1


def _base_size(t):
    # Level-0 subgrid: the recurrence value, but never below the span of a
    # three-vertex staircase.
    return max(schedule(t, 0), 3)


def subgrid_size(t, b):
    """Subgrid side used for the level-(b-1) recursion below level b.

    At least the recurrence value, and large enough to host the lower
    level's own layout.
    """
    if b < 1:
        raise ValueError("no subgrids at level zero")
    if b == 1:
        return _base_size(t)
    return max(schedule(t, b - 1), required_grid_size(t, b - 1))


def required_grid_size(t, b):
    """Geometric minimum side for the level-b layout (anchors, margins)."""
    if b == 0:
        return _base_size(t)
    n0 = subgrid_size(t, b)
    if t == 0:
        return max(1 + n0 + 1, n0 + b)
    d = n0 + b
    spread = _grid.anchor(d, 2 * t, 2 * t)
    x_need = 1 + spread[0] + n0 + 1
    yz_need = max(spread[1], spread[2]) + n0 + b
    return max(x_need, yz_need)


@dataclass
class BlockedStaircase:
    staircase: _grid.Staircase
    b: int
    color: int

    kind = "staircase"

    def to_json_obj(self):
        return {
            "kind": self.kind,
            "b": self.b,
            "color": self.color,
            "staircase": [list(v) for v in self.staircase],
        }


@dataclass
class BrambleCertificate:
    color: int
    sets: list
    order: int
    components: list = field(default_factory=list)
    connectors: dict = field(default_factory=dict)
    patch: object = None  # monochrome box from a level-0 failure, if any

    kind = "bramble"

    def to_json_obj(self):
        return {
            "kind": self.kind,
            "color": self.color,
            "order": self.order,
            "sets": [sorted(map(list, s)) for s in self.sets],
        }


def _region_vertices_at_x(origin, size, x):
    x0, y0, z0 = origin
    return (
        (x, y, z)
        for y in range(y0, y0 + size)
        for z in range(z0, z0 + size)
    )


def _crosses_patch(origin, size, t, color, part):
    """Crosses bramble on a (t+1)x(t+1) plane patch of a monochrome slab."""
    x0, y0, z0 = origin
    px = x0 + 1
    span = t + 1
    if span > size:
        raise BuilderSizeError(
            f"subgrid side {size} below crosses patch span {span}"
        )
    for dy in range(span):
        for dz in range(span):
            v = (px, y0 + dy, z0 + dz)
            if part.cls(v) != color:
                raise BuilderInvariantError(
                    "crosses patch escapes the monochrome slab"
                )
    rows = [
        frozenset((px, y0 + a, z0 + c) for c in range(span))
        for a in range(span)
    ]
    cols = [
        frozenset((px, y0 + c, z0 + b2) for c in range(span))
        for b2 in range(span)
    ]
    sets = [rows[a] | cols[b2] for a in range(span) for b2 in range(span)]
    return sets, (px, y0, z0, size)


def _verify_bramble_in_class(g, part, color, sets, t):
    for s in sets:
        if not s:
            raise BuilderInvariantError("empty bramble set")
        for v in s:
            if part.cls(v) != color:
                raise BuilderInvariantError("bramble set leaves its class")
    for a_idx, a in enumerate(sets):
        for b_set in sets[a_idx:]:
            if not is_connected(g, within=a | b_set):
                raise BuilderInvariantError("bramble union disconnected")
    order = bramble_order(sets)
    if order < t + 1:
        raise BuilderInvariantError(
            f"bramble order {order} below required {t + 1}"
        )
    return order


def _find(g, part, t, b, i, origin, size):
    if b == 0:
        return _find_base(g, part, t, i, origin, size)
    n0 = subgrid_size(t, b)
    d = n0 + b

    def resolve(sub):
        """Handle one subgrid outcome; returns a staircase or a final result."""
        if isinstance(sub, BlockedStaircase):
            return sub.staircase, None
        if sub.color == 3 - i:
            return None, sub
        if sub.patch is not None:
            px, py, pz, span = sub.patch
            if b + 1 > span:
                raise BuilderSizeError(
                    "monochrome slab too small for the blocking square"
                )
            conv = _grid.Staircase(
                ((px - 1, py, pz), (px, py, pz), (px + 1, py, pz))
            )
            if not is_blocked(g, conv, b, i, part):
                raise BuilderInvariantError(
                    "staircase through a monochrome slab must be blocked"
                )
            return None, BlockedStaircase(conv, b, i)
        # A deeper assembly bramble in color i: still a valid global
        # certificate, only its color differs from this level's principal
        # branch.
        return None, sub

    if t == 0:
        x0, y0, z0 = origin
        if size < n0 + 2 or size < n0 + b:
            raise BuilderSizeError(
                f"region side {size} below required {max(n0 + 2, n0 + b)}"
            )
        sub = _find(g, part, t, b - 1, 3 - i, (x0 + 1, y0, z0), n0)
        p_z, final = resolve(sub)
        if final is not None:
            return final
        candidate = p_z.extended(1, 1)
        if is_blocked(g, candidate, b, i, part):
            return BlockedStaircase(candidate, b, i)
        m_z = blocked_component(g, p_z, b - 1, 3 - i, part)
        sets = [frozenset(m_z)]
        order = _verify_bramble_in_class(g, part, 3 - i, sets, t)
        return BrambleCertificate(
            color=3 - i, sets=sets, order=order, components=[frozenset(m_z)]
        )

    need = required_grid_size(t, b)
    if size < need:
        raise BuilderSizeError(f"region side {size} below required {need}")
    width = 2 * t + 1
    x0, y0, z0 = origin
    stair = {}
    for j in range(width):
        for k in range(width):
            ax, ay, az = _grid.anchor(d, j, k)
            pos = (x0 + 1 + ax, y0 + ay, z0 + az)
            sub = _find(g, part, t, b - 1, 3 - i, pos, n0)
            p_z, final = resolve(sub)
            if final is not None:
                return final
            stair[(j, k)] = p_z

    comp = {
        key: blocked_component(g, p, b - 1, 3 - i, part)
        for key, p in sorted(stair.items())
    }

    col_edges = [
        ((j, k), (j, k + 1)) for j in range(width) for k in range(width - 1)
    ]
    row_edges = [
        ((j, k), (j + 1, k)) for k in range(width) for j in range(width - 1)
    ]
    joins = {}
    for e in col_edges + row_edges:
        y_key, z_key = e
        joins[e] = _grid.join_staircases(g, stair[y_key], stair[z_key], b)
        extended = joins[e].extended(1, 1)
        if is_blocked(g, extended, b, i, part):
            return BlockedStaircase(extended, b, i)

    enl_sets = {}
    connectors = {}
    for e in col_edges + row_edges:
        y_key, z_key = e
        enl = _grid.enlarge(g, joins[e], b)
        enl_sets[e] = enl.vertex_set
        allowed = {
            v for v in enl.graph.vertices() if part.cls(v) == 3 - i
        }
        path = bfs_path(
            enl.graph, sorted(comp[y_key]), comp[z_key], allowed=allowed
        )
        if path is None:
            raise BuilderInvariantError(
                "unblocked extended join without a monochrome connector"
            )
        connectors[e] = tuple(path)

    edge_list = col_edges + row_edges
    for a_idx, e1 in enumerate(edge_list):
        for e2 in edge_list[a_idx + 1:]:
            if set(e1) & set(e2):
                continue
            if enl_sets[e1] & enl_sets[e2]:
                raise BuilderInvariantError(
                    f"join enlargements of {e1} and {e2} overlap"
                )

    col_sets = []
    row_sets = []
    for j in range(width):
        acc = set()
        for k in range(width):
            acc |= comp[(j, k)]
        for e in col_edges:
            if e[0][0] == j:
                acc |= set(connectors[e])
        col_sets.append(acc)
    for k in range(width):
        acc = set()
        for j in range(width):
            acc |= comp[(j, k)]
        for e in row_edges:
            if e[0][1] == k:
                acc |= set(connectors[e])
        row_sets.append(acc)

    sets = [frozenset(col_sets[j] | row_sets[j]) for j in range(width)]
    membership = {}
    for idx, s in enumerate(sets):
        for v in s:
            membership.setdefault(v, []).append(idx)
    worst = max((len(ids) for ids in membership.values()), default=0)
    if worst > 2:
        raise BuilderInvariantError(
            f"a vertex belongs to {worst} bramble elements"
        )
    order = _verify_bramble_in_class(g, part, 3 - i, sets, t)
    return BrambleCertificate(
        color=3 - i,
        sets=sets,
        order=order,
        components=[comp[key] for key in sorted(comp)],
        connectors={str(e): connectors[e] for e in sorted(connectors)},
    )


def _find_base(g, part, t, i, origin, size):
    x0, y0, z0 = origin
    if size < 3:
        raise BuilderSizeError("level-0 region below the minimal span 3")
    for x in range(x0 + 1, x0 + size - 1):
        for v in _region_vertices_at_x(origin, size, x):
            if part.cls(v) == i:
                stair = _grid.Staircase(
                    ((v[0] - 1, v[1], v[2]), v, (v[0] + 1, v[1], v[2]))
                )
                if not is_blocked(g, stair, 0, i, part):
                    raise BuilderInvariantError(
                        "three-vertex staircase through a class vertex "
                        "must be blocked at level 0"
                    )
                return BlockedStaircase(stair, 0, i)
    sets, patch = _crosses_patch(origin, size, t, 3 - i, part)
    order = _verify_bramble_in_class(g, part, 3 - i, sets, t)
    return BrambleCertificate(
        color=3 - i, sets=sets, order=order, patch=patch
    )


def find_blocked_or_bramble(g, part, t, b, i, allow_undersized=False):
    """Either a verified (b,i)-blocked staircase or a verified bramble.

    The grid must have side at least max(schedule(t,b), required size of the
    layout); ``allow_undersized`` permits smaller experiments, whose failures
    surface as BuilderSizeError.
    """
    if i not in (1, 2):
        raise ValueError("color index must be 1 or 2")
    sched = schedule(t, b)
    need = required_grid_size(t, b)
    if not allow_undersized and g.n < max(sched, need):
        raise BuilderSizeError(
            f"grid side {g.n} below max(schedule={sched}, layout={need})"
        )
    return _find(g, part, t, b, i, (0, 0, 0), g.n)


# Partition certification.


@dataclass
class CertifyReport:
    n: int
    t: int
    color: object  # identified class, or None when partial
    evidence_kind: object
    tw_lower_bound: object
    verified: bool
    partial: bool
    details: dict

    def to_json(self):
        obj = {
            "n": self.n,
            "t": self.t,
            "color": self.color,
            "evidence_kind": self.evidence_kind,
            "tw_lower_bound": self.tw_lower_bound,
            "verified": self.verified,
            "partial": self.partial,
            "details": self.details,
        }
        return json.dumps(obj, sort_keys=True)


def _class_sets(g, part):
    out = {1: set(), 2: set()}
    for v in g.vertices():
        out[part.cls(v)].add(v)
    return out


def certify_partition(g, part, t, tw_guard=40, scan_guard=200_000):
    """Evidence that one class induces treewidth at least t.

    Small targets get direct structural evidence (brambles from vertices,
    edges, cycles); small grids additionally report exact class treewidths;
    large targets route through the blocked-staircase / bramble builder when
    the grid is big enough, otherwise the report is partial.
    """
    from .decomposition import exact_treewidth, find_cycle
    from .graphs import Graph
    from .separators import is_separator as _is_sep
    from .slab import audit_separator, enlargement_as_slab

    n = g.n
    details = {}
    if n ** 3 <= scan_guard:
        classes = _class_sets(g, part)
        if n ** 3 <= tw_guard:
            tws = {}
            for c in (1, 2):
                sub = Graph(vertices=classes[c])
                for u, v in g.edges():
                    if u in classes[c] and v in classes[c]:
                        sub.add_edge(u, v)
                tws[c], _ = exact_treewidth(sub, guard=tw_guard)
            details["exact_class_treewidth"] = {str(c): tws[c] for c in (1, 2)}
            best = max(tws, key=lambda c: tws[c])
            if tws[best] >= t:
                return CertifyReport(
                    n=n,
                    t=t,
                    color=best,
                    evidence_kind="exact",
                    tw_lower_bound=tws[best],
                    verified=True,
                    partial=False,
                    details=details,
                )
            return CertifyReport(
                n=n,
                t=t,
                color=None,
                evidence_kind="exact",
                tw_lower_bound=max(tws.values()),
                verified=True,
                partial=False,
                details=details,
            )
        if t <= 0:
            v = g.vertices()[0]
            c = part.cls(v)
            details["witness"] = [list(v)]
            return CertifyReport(
                n, t, c, "bramble", 0, True, False, details
            )
        if t == 1:
            for u, v in g.edges():
                if part.cls(u) == part.cls(v):
                    sets = [frozenset([u]), frozenset([v])]
                    assert bramble_order(sets) >= 2
                    details["witness"] = [list(u), list(v)]
                    return CertifyReport(
                        n, t, part.cls(u), "bramble", 1, True, False, details
                    )
            return CertifyReport(
                n, t, None, None, 0, True, False,
                {"note": "both classes are independent sets"},
            )
        if t == 2:
            for c in (1, 2):
                sub = Graph(vertices=classes[c])
                for u, v in g.edges():
                    if u in classes[c] and v in classes[c]:
                        sub.add_edge(u, v)
                cyc = find_cycle(sub)
                if cyc is not None:
                    third = max(1, len(cyc) // 3)
                    arcs = [
                        frozenset(cyc[:third]),
                        frozenset(cyc[third:2 * third]),
                        frozenset(cyc[2 * third:]),
                    ]
                    assert validate_bramble(sub, arcs)
                    assert bramble_order(arcs) >= 3
                    details["witness_cycle"] = [list(v) for v in cyc]
                    return CertifyReport(
                        n, t, c, "bramble", 2, True, False, details
                    )
            return CertifyReport(
                n, t, None, None, 1, True, False,
                {"note": "both classes are forests"},
            )

    b = blocking_level(t)
    need = max(schedule(t, b), required_grid_size(t, b))
    if n < need:
        return CertifyReport(
            n,
            t,
            None,
            None,
            None,
            False,
            True,
            {"note": f"grid side {n} below builder requirement {need}"},
        )
    result = find_blocked_or_bramble(g, part, t, b, 1)
    if isinstance(result, BrambleCertificate):
        order = bramble_order(result.sets)
        ok = validate_bramble(g, result.sets) and order >= t + 1
        return CertifyReport(
            n,
            t,
            result.color,
            "bramble",
            order - 1,
            ok,
            False,
            {"order": order},
        )
    stair = result.staircase
    enl = _grid.enlarge(g, stair, b)
    x = frozenset(
        v
        for v in enl.graph.vertices()
        if v not in enl.sides and part.cls(v) == result.color
    )
    ok = _is_sep(enl.graph, enl.left_side, enl.right_side, x)
    audit = audit_separator(enlargement_as_slab(enl), x, tw_guard=tw_guard,
                            replay=False)
    verified = ok and audit.passes and audit.tw_certified is not None
    bound = audit.tw_certified if audit.tw_certified is not None else None
    return CertifyReport(
        n,
        t,
        result.color,
        "staircase",
        bound,
        verified,
        audit.certification == "consistent",
        {"b": b, "audit": json.loads(audit.to_json())},
    )
