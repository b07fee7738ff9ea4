import itertools
import random
from fractions import Fraction

import pytest

from gridtw.calculus import (
    LFunction,
    Orientation,
    STAR,
    Walk,
    canon_edge,
    d,
    indicator,
    integrate,
    integrate_d,
    is_contractible,
    path_weights,
    verify_almost_contractible,
    verify_almost_homotopic,
    weight_sum,
)
from gridtw.grid import build_qn


@pytest.fixture(scope="module")
def q2():
    return build_qn(2)


@pytest.fixture(scope="module")
def q3():
    return build_qn(3)


def const(g, value):
    return LFunction(g, {v: value for v in g.vertices()})


def test_label_predicates(q2):
    values = {v: 0 for v in q2.vertices()}
    values[(1, 0, 0)] = -1
    values[(0, 1, 0)] = 1  # not adjacent to (1,0,0): mixed-sign difference
    f = LFunction(q2, values)
    assert f.is_continuous() and f.is_entire()
    values[(0, 1, 0)] = STAR
    f = LFunction(q2, values)
    assert f.is_continuous() and not f.is_entire()
    assert not f.is_holomorphic()  # a 0 vertex neighbors the star
    values = {v: -1 if v[0] == 0 else 1 for v in q2.vertices()}
    f = LFunction(q2, values)
    assert not f.is_continuous()


def test_d_constant_is_zero(q2):
    orient = Orientation.canonical(q2)
    assert d(const(q2, 1), orient).data == {}


def test_d_single_edge(q2):
    orient = Orientation.canonical(q2)
    values = {v: 0 for v in q2.vertices()}
    values[(0, 0, 0)] = -1
    f = LFunction(q2, values)
    e = canon_edge((0, 0, 0), (1, 0, 0))
    tail, head = orient.ends(e)
    expected = f(head) - f(tail)
    assert d(f, orient)[e] == expected == 1


def test_d_star_absorbs(q2):
    orient = Orientation.canonical(q2)
    values = {v: 1 for v in q2.vertices()}
    values[(1, 1, 1)] = STAR
    f = LFunction(q2, values)
    chain = d(f, orient)
    for w in q2.neighbors((1, 1, 1)):
        assert chain[canon_edge((1, 1, 1), w)] == 0


def test_indicator_trivial_and_cancellation(q2):
    orient = Orientation.canonical(q2)
    w = Walk(q2, [(0, 0, 0)])
    assert indicator(w, orient).data == {}
    w = Walk(q2, [(0, 0, 0), (1, 0, 0), (0, 0, 0)])
    assert indicator(w, orient).data == {}


def test_indicator_triangle_signs(q2):
    orient = Orientation.canonical(q2)
    tri = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)])
    chain = indicator(tri, orient)
    assert sorted(abs(c) for c in chain.data.values()) == [1, 1, 1]
    rev = indicator(tri.reversed(), orient)
    assert all(rev[e] == -chain[e] for e in chain.data)


def test_integral_telescopes_on_entire(q2):
    orient = Orientation.canonical(q2)
    rng = random.Random(0)
    for _ in range(200):
        seq = [(0, 0, 0)]
        for _ in range(rng.randrange(1, 6)):
            seq.append(rng.choice(q2.neighbors(seq[-1])))
        walk = Walk(q2, seq)
        for _ in range(20):
            values = {v: rng.choice((-1, 0, 1)) for v in q2.vertices()}
            f = LFunction(q2, values)
            if not f.is_entire(within=walk.vertex_set()):
                continue
            got = integrate(walk, d(f, orient))
            assert got == f(walk.end) - f(walk.start)
            assert got == integrate_d(walk, f, orient)


def test_closed_walk_integral_vanishes_entire(q2):
    orient = Orientation.canonical(q2)
    walk = Walk(q2, [(0, 0, 0), (1, 1, 0), (1, 1, 1), (0, 0, 0)])
    values = {v: v[2] - v[1] for v in q2.vertices()}
    f = LFunction(q2, values)
    assert f.is_entire()
    assert integrate(walk, d(f, orient)) == 0


def test_triangle_integral_bound_exhaustive(q2):
    # Every triangle of the 2-grid, every continuous assignment on it.
    orient = Orientation.canonical(q2)
    edges = q2.edges()
    tris = set()
    for u, v in edges:
        for w in q2.neighbors(v):
            if w > v and q2.has_edge(u, w):
                tris.add((u, v, w))
    assert tris
    for u, v, w in sorted(tris):
        walk = Walk(q2, [u, v, w, u])
        for combo in itertools.product((-1, 0, 1, STAR), repeat=3):
            vals = dict(zip((u, v, w), combo))
            pairs = [(u, v), (v, w), (u, w)]
            if any(
                vals[a] in (1, -1) and vals[b] in (1, -1) and vals[a] != vals[b]
                for a, b in pairs
            ):
                continue
            values = {x: 0 for x in q2.vertices()}
            values.update(vals)
            f = LFunction(q2, values)
            val = integrate_d(walk, f, orient)
            assert abs(val) <= 1
            if is_contractible(walk, f):
                assert val == 0


def test_orientation_independence(q2):
    rng = random.Random(1)
    orient = Orientation.canonical(q2)
    flipped = orient.flipped_everywhere()
    for _ in range(100):
        seq = [(1, 1, 1)]
        for _ in range(rng.randrange(1, 6)):
            seq.append(rng.choice(q2.neighbors(seq[-1])))
        walk = Walk(q2, seq)
        values = {v: rng.choice((-1, 0, 1, STAR)) for v in q2.vertices()}
        f = LFunction(q2, values)
        assert integrate_d(walk, f, orient) == integrate_d(walk, f, flipped)


def test_reversal_and_concatenation(q2):
    rng = random.Random(2)
    orient = Orientation.canonical(q2)
    for _ in range(100):
        seq = [(0, 0, 0)]
        for _ in range(4):
            seq.append(rng.choice(q2.neighbors(seq[-1])))
        w1 = Walk(q2, seq[:3])
        w2 = Walk(q2, seq[2:])
        whole = w1.concat(w2)
        values = {v: rng.choice((-1, 0, 1, STAR)) for v in q2.vertices()}
        f = LFunction(q2, values)
        chain = d(f, orient)
        assert integrate(whole.reversed(), chain) == -integrate(whole, chain)
        assert (
            integrate(whole, chain)
            == integrate(w1, chain) + integrate(w2, chain)
        )


def test_contractible_requires_triangle(q2):
    f = const(q2, 0)
    path = Walk(q2, [(0, 0, 0), (1, 0, 0)])
    with pytest.raises(ValueError):
        is_contractible(path, f)


def test_contractible_cases(q2):
    tri = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)])
    assert is_contractible(tri, const(q2, 1))
    values = {v: 0 for v in q2.vertices()}
    values[(1, 0, 0)] = STAR
    values[(1, 1, 0)] = 1
    f = LFunction(q2, values)
    assert not is_contractible(tri, f)  # 0 next to star on the triangle


def test_almost_contractible_single_triangle(q2):
    tri = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)])
    f = const(q2, 1)
    assert verify_almost_contractible(tri, [tri], f, 0)


def test_almost_contractible_two_triangles(q2):
    # Boundary of two triangles glued along the diagonal.
    quad = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 0)])
    t1 = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)])
    t2 = Walk(q2, [(0, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 0)])
    orient = Orientation.canonical(q2)
    total = indicator(t1, orient) + indicator(t2, orient)
    assert total == indicator(quad, orient)
    f = const(q2, 0)
    assert verify_almost_contractible(quad, [t1, t2], f, 0)


def test_almost_contractible_wrong_list(q2):
    quad = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 0)])
    t1 = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0)])
    assert not verify_almost_contractible(quad, [t1], const(q2, 0), 0)


def test_almost_homotopic_reflexive(q2):
    w = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    q = Walk(q2, [(0, 0, 0)])
    r = Walk(q2, [(1, 1, 0)])
    assert verify_almost_homotopic(w, w, q, r, [], const(q2, 0), 0)


def test_almost_homotopic_rejects_mismatched_connectors(q2):
    w = Walk(q2, [(0, 0, 0), (1, 0, 0)])
    q = Walk(q2, [(1, 1, 1)])
    r = Walk(q2, [(1, 0, 0)])
    with pytest.raises(ValueError):
        verify_almost_homotopic(w, w, q, r, [], const(q2, 0), 0)


def test_almost_homotopic_rejects_star_connector(q2):
    w = Walk(q2, [(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    q = Walk(q2, [(0, 0, 0)])
    r = Walk(q2, [(1, 1, 0)])
    values = {v: 0 for v in q2.vertices()}
    values[(0, 0, 0)] = STAR
    f = LFunction(q2, values)
    assert not verify_almost_homotopic(w, w, q, r, [], f, 0)


def test_path_weights_constant(q3):
    path = Walk(q3, [(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    weights = path_weights(path, const(q3, 1))
    assert weights == {(1, 0, 0): Fraction(0)}


def test_path_weights_ramp(q3):
    path = Walk(q3, [(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    values = {v: 1 for v in q3.vertices()}
    values[(0, 0, 0)] = -1
    values[(1, 0, 0)] = 0
    f = LFunction(q3, values)
    weights = path_weights(path, f)
    assert weights[(1, 0, 0)] == 1


def test_path_weights_range_and_rejections(q3):
    rng = random.Random(3)
    allowed = {Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2),
               Fraction(1)}
    found = set()
    for _ in range(300):
        seq = [(rng.randrange(3), rng.randrange(3), rng.randrange(3))]
        seen = {seq[0]}
        for _ in range(5):
            nbrs = [w for w in q3.neighbors(seq[-1]) if w not in seen]
            if not nbrs:
                break
            seq.append(rng.choice(nbrs))
            seen.add(seq[-1])
        if len(seq) < 3:
            continue
        path = Walk(q3, seq)
        values = {v: 0 for v in q3.vertices()}
        for v in seq:
            values[v] = rng.choice((-1, 0, 1))
        f = LFunction(q3, values)
        if not f.is_entire(within=path.vertex_set()):
            continue
        weights = path_weights(path, f)
        found |= set(weights.values())
        assert set(weights.values()) <= allowed
    assert found
    path = Walk(q3, [(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    values = {v: 0 for v in q3.vertices()}
    values[(1, 0, 0)] = STAR
    with pytest.raises(ValueError):
        path_weights(path, LFunction(q3, values))


def test_masked_integral_identity_random(q3):
    # Random labelings with stars only over zeros: half the masked integral
    # equals the weight of the surviving zeros; holomorphic cases integral.
    rng = random.Random(4)
    orient = Orientation.canonical(q3)
    done = 0
    while done < 200:
        seq = [(rng.randrange(3), rng.randrange(3), rng.randrange(3))]
        seen = {seq[0]}
        for _ in range(6):
            nbrs = [w for w in q3.neighbors(seq[-1]) if w not in seen]
            if not nbrs:
                break
            seq.append(rng.choice(nbrs))
            seen.add(seq[-1])
        if len(seq) < 3:
            continue
        path = Walk(q3, seq)
        vset = sorted(path.vertex_set())
        vals = {v: rng.choice((-1, 0, 1)) for v in vset}
        vals[seq[0]] = rng.choice((-1, 1))
        vals[seq[-1]] = rng.choice((-1, 1))
        bad = any(
            vals[u] * vals[w] == -1
            for u in vset
            for w in vset
            if u < w and q3.has_edge(u, w)
        )
        if bad:
            continue
        f_values = {v: 0 for v in q3.vertices()}
        f_values.update(vals)
        f = LFunction(q3, f_values)
        zeros = [v for v in seq if vals[v] == 0]
        masked = {v for v in zeros if rng.random() < 0.5}
        g_values = dict(f_values)
        for v in masked:
            g_values[v] = STAR
        g_fun = LFunction(q3, g_values)
        x = {v for v in zeros if v not in masked}
        lhs = Fraction(integrate_d(path, g_fun, orient), 2)
        rhs = weight_sum(path_weights(path, f), x)
        assert lhs == rhs
        if g_fun.is_holomorphic(within=path.vertex_set()):
            assert rhs.denominator == 1
        done += 1


def test_walk_json_roundtrip(q3):
    w = Walk(q3, [(0, 0, 0), (1, 1, 1), (2, 2, 2)])
    again = Walk.from_json(q3, w.to_json())
    assert again.vertices == w.vertices


def test_lfunction_json_roundtrip(q2):
    values = {v: STAR if v == (0, 0, 0) else v[0] - v[1] for v in q2.vertices()}
    f = LFunction(q2, values)
    again = LFunction.from_json(q2, f.to_json())
    assert all(again(v) is STAR if f(v) is STAR else again(v) == f(v)
               for v in q2.vertices())
