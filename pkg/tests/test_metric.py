import math

import pytest

from foldtrack.graph import make_graph
from foldtrack.graph_map import edgelet_count, map_length
from foldtrack.metric import (
    difference_map, estimate_d, quasi_metric_audit, slide_normalize,
    twist_family,
)


def test_identical_graphs(rose2):
    est = estimate_d(rose2, rose2)
    assert est.value <= math.log(rose2.num_edges) + 1e-12
    assert math.isclose(est.value, map_length(est.witness))


def test_fibonacci_remarked_rose(rose2):
    remarked = make_graph(1, [(0, 0)] * 2, basepoint=0, marking=[(1, 2), (1,)])
    est = estimate_d(rose2, remarked)
    assert math.isclose(est.value, math.log(3))


def test_difference_map_to_subdivision(rose2):
    from foldtrack.graph_map import subdivide
    g2, _ = subdivide(rose2, 1, 3)
    f = difference_map(rose2, g2)
    assert edgelet_count(f) == 4  # petal a crosses 3 edges, petal b one
    assert math.isclose(map_length(f), math.log(4))


def test_twist_family_exact():
    for m in (1, 10, 100):
        g0, gm = twist_family(2, m)
        fwd = estimate_d(g0, gm)
        assert math.isclose(fwd.value, math.log(2 + m), abs_tol=1e-12)
        assert fwd.total_edge_length == 2 + m
        rev = estimate_d(gm, g0)
        assert rev.value <= 2 * fwd.value and fwd.value <= 2 * rev.value


def test_twist_rank3():
    g0, gm = twist_family(3, 5)
    est = estimate_d(g0, gm)
    assert math.isclose(est.value, math.log(3 + 5), abs_tol=1e-12)


def test_slide_normalization_shrinks():
    # map where every direction at the vertex starts with the same edge
    rose = make_graph(1, [(0, 0)] * 2, basepoint=0, marking=[(1,), (2,)])
    from foldtrack.graph_map import make_graph_map
    f = make_graph_map(rose, rose, (0,), [(2, 1, -2), (2, 2, -2)])
    slid = slide_normalize(f)
    assert edgelet_count(slid) < edgelet_count(f)
    est_direct = map_length(f)
    assert map_length(slid) < est_direct


def test_estimate_never_worse_than_canonical(rose2):
    remarked = make_graph(1, [(0, 0)] * 2, basepoint=0,
                          marking=[(2, 1, -2), (2,)])
    est = estimate_d(rose2, remarked)
    canonical = difference_map(rose2, remarked)
    assert est.value <= map_length(canonical) + 1e-12


def test_quasi_metric_audit():
    g0, g1 = twist_family(2, 1)
    _, g10 = twist_family(2, 10)
    rows, summary = quasi_metric_audit([g0, g1, g10])
    assert len(rows) == 9
    assert summary["max_self_distance"] <= math.log(2) + 1e-9
    assert summary["max_asymmetry_ratio"] <= 2.0
    assert all(r[2] > 0 for r in rows)


def test_audit_needs_three():
    g0, g1 = twist_family(2, 1)
    with pytest.raises(ValueError):
        quasi_metric_audit([g0, g1])


def test_rank_mismatch_rejected(rose2, rose3):
    with pytest.raises(ValueError):
        difference_map(rose2, rose3)


def _random_marked_graph(rng, n=3):
    from dataclasses import replace
    from foldtrack.automorphisms import random_automorphism
    from foldtrack.graph import tighten
    from foldtrack.graph_map import subdivide
    from foldtrack.words import substitute
    g = make_graph(1, [(0, 0)] * n, basepoint=0,
                   marking=[(i,) for i in range(1, n + 1)])
    for _ in range(int(rng.integers(0, 3))):
        e = int(rng.integers(1, g.num_edges + 1))
        g, _ = subdivide(g, e, int(rng.integers(2, 4)))
    aut = random_automorphism(n, int(rng.integers(0, 9)), rng)
    marking = tuple(tighten(g, substitute(aut.images[i],
                    [g.marking[j] for j in range(n)])) for i in range(n))
    return replace(g, marking=marking)


def test_witnesses_stay_in_class_on_random_graphs():
    # slides must be genuine homotopies: witnesses remain marking-respecting
    # homotopy equivalences (collapsed edges pick up the dragged letter)
    import numpy as np
    from foldtrack.folding import certify_homotopy_equivalence
    from foldtrack.graph_map import is_marking_respecting
    rng = np.random.default_rng(np.random.Philox(key=777))
    for _ in range(40):
        a = _random_marked_graph(rng)
        b = _random_marked_graph(rng)
        est = estimate_d(a, b)
        assert is_marking_respecting(est.witness)
        assert certify_homotopy_equivalence(est.witness)
        assert est.value > 0
