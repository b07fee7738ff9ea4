import itertools

import pytest

from gridtw.bramble_builder import (
    BlockedStaircase,
    BrambleCertificate,
    BuilderSizeError,
    blocking_level,
    certify_partition,
    find_blocked_or_bramble,
    required_grid_size,
    schedule,
    subgrid_size,
)
from gridtw.decomposition import bramble_order, validate_bramble
from gridtw.grid import build_qn
from gridtw.separators import DictPartition, HashPartition, is_blocked


def test_schedule_values():
    assert schedule(0, 0) == 2
    assert schedule(3, 0) == 5
    assert schedule(0, 1) == 5 * (2 + 1) == 15
    assert schedule(1, 1) == 13 * (3 + 1) == 52
    assert schedule(0, 2) == 5 * (15 + 2) == 85


def test_blocking_level_values():
    # ceil(sqrt(18) * (t+1)) - 1
    assert blocking_level(0) == 4
    assert blocking_level(1) == 8
    assert blocking_level(2) == 12


def test_layout_sizes():
    assert subgrid_size(0, 1) == 3
    assert subgrid_size(1, 1) == 3
    assert required_grid_size(0, 1) == 5
    # 3x3 anchors at spacing d=4: x spans 16d plus margins and the subgrid.
    assert required_grid_size(1, 1) == 69


def test_base_case_staircase():
    g = build_qn(3)
    all_one = DictPartition({v: 1 for v in g.vertices()})
    res = find_blocked_or_bramble(g, all_one, 0, 0, 1, allow_undersized=True)
    assert isinstance(res, BlockedStaircase)
    assert res.b == 0 and res.color == 1
    assert len(res.staircase) == 3
    assert is_blocked(g, res.staircase, 0, 1, all_one)


def test_base_case_bramble_on_monochrome_slab():
    g = build_qn(3)
    all_one = DictPartition({v: 1 for v in g.vertices()})
    # Asking for class 2 must fail over to a crosses bramble in class 1.
    res = find_blocked_or_bramble(g, all_one, 0, 0, 2, allow_undersized=True)
    assert isinstance(res, BrambleCertificate)
    assert res.color == 1
    assert res.order >= 1
    assert res.patch is not None
    assert validate_bramble(g, res.sets)


def test_level_one_monochrome_gives_staircase():
    # Everything class 1, asking for a (1,1)-blocked staircase: immediate.
    g = build_qn(15)
    all_one = DictPartition({v: 1 for v in g.vertices()})
    res = find_blocked_or_bramble(g, all_one, 0, 1, 1)
    assert isinstance(res, BlockedStaircase)
    assert res.b == 1 and res.color == 1
    assert is_blocked(g, res.staircase, 1, 1, all_one)


def test_level_one_random_partitions_validate():
    g = build_qn(15)
    staircases = 0
    brambles = 0
    for seed in range(25):
        part = HashPartition(seed)
        res = find_blocked_or_bramble(g, part, 0, 1, 1)
        if isinstance(res, BlockedStaircase):
            staircases += 1
            assert is_blocked(g, res.staircase, res.b, res.color, part)
        else:
            brambles += 1
            assert res.color == 2
            assert validate_bramble(g, res.sets)
            assert bramble_order(res.sets) >= 1
    assert staircases and brambles  # both branches exercised


def test_level_one_rejects_undersized_without_flag():
    g = build_qn(10)
    part = HashPartition(0)
    with pytest.raises(BuilderSizeError):
        find_blocked_or_bramble(g, part, 0, 1, 1)


def test_level_one_undersized_flag_geometry_error():
    g = build_qn(4)
    part = HashPartition(0)
    with pytest.raises(BuilderSizeError):
        find_blocked_or_bramble(g, part, 0, 1, 1, allow_undersized=True)


def test_t1_builder_both_branches():
    n = required_grid_size(1, 1)
    g = build_qn(n)
    bramble_seen = False
    staircase_seen = False
    for seed in range(6):
        part = HashPartition(seed, bias=26)  # sparse class 1
        res = find_blocked_or_bramble(g, part, 1, 1, 1)
        if isinstance(res, BrambleCertificate):
            bramble_seen = True
            assert res.color == 2
            assert res.order >= 2
            assert len(res.sets) == 3
            # No vertex in more than two elements.
            counts = {}
            for s in res.sets:
                for v in s:
                    counts[v] = counts.get(v, 0) + 1
            assert max(counts.values()) <= 2
            assert validate_bramble(g, res.sets)
            assert bramble_order(res.sets) >= 2
        else:
            staircase_seen = True
            assert is_blocked(g, res.staircase, res.b, res.color, part)
    for seed in range(3):
        part = HashPartition(seed, bias=128)
        res = find_blocked_or_bramble(g, part, 1, 1, 1)
        if isinstance(res, BlockedStaircase):
            staircase_seen = True
            assert is_blocked(g, res.staircase, res.b, res.color, part)
    assert bramble_seen and staircase_seen


def test_builder_deterministic():
    g = build_qn(15)
    part = HashPartition(7)
    r1 = find_blocked_or_bramble(g, part, 0, 1, 1)
    r2 = find_blocked_or_bramble(g, part, 0, 1, 1)
    assert type(r1) is type(r2)
    assert r1.to_json_obj() == r2.to_json_obj()


def test_certify_q2_exhaustive_t1():
    g = build_qn(2)
    verts = g.vertices()
    for bits in itertools.product((1, 2), repeat=8):
        part = DictPartition(dict(zip(verts, bits)))
        rep = certify_partition(g, part, 1)
        assert rep.verified
        assert rep.color in (1, 2)
        assert rep.tw_lower_bound >= 1


def test_certify_single_class_partition():
    g = build_qn(2)
    part = DictPartition({v: 1 for v in g.vertices()})
    rep = certify_partition(g, part, 1)
    tws = rep.details["exact_class_treewidth"]
    assert tws["1"] == 4  # the whole grid
    assert tws["2"] == -1  # empty class, by convention
    assert rep.color == 1


def test_certify_t2_on_q3():
    g = build_qn(3)
    part = DictPartition({v: (1 if v[0] <= 1 else 2) for v in g.vertices()})
    rep = certify_partition(g, part, 2)
    assert rep.verified
    assert rep.tw_lower_bound >= 2


def test_certify_partial_when_grid_too_small():
    g = build_qn(4)
    part = HashPartition(3)
    rep = certify_partition(g, part, 3, scan_guard=10)
    assert rep.partial


def test_builder_symmetric_in_color():
    g = build_qn(15)
    part = HashPartition(42)
    res1 = find_blocked_or_bramble(g, part, 0, 1, 1)
    res2 = find_blocked_or_bramble(g, part, 0, 1, 2)
    for res, color in ((res1, 1), (res2, 2)):
        if isinstance(res, BlockedStaircase):
            assert res.color == color
            assert is_blocked(g, res.staircase, res.b, color, part)
        else:
            assert res.color == 3 - color
            assert validate_bramble(g, res.sets)
