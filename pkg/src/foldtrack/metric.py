"""Upper bounds for the quasi-metric d(G,G') = min over marking-respecting
maps of log total edge length, plus empirical audits of the quasi-metric
axioms.

Everything here is an upper bound: exact minimization over a homotopy class
is not attempted, and outputs are labeled accordingly.
"""

import math
from dataclasses import dataclass

from .graph import (
    make_graph, pi1_generators, pi1_word, rank, reverse_path, spanning_tree,
    tree_path,
)
from .graph_map import GraphMap, edgelet_count, make_graph_map, map_length
from .words import invert_automorphism_words, substitute_reduced

__all__ = ["MetricEstimate", "difference_map", "estimate_d",
           "quasi_metric_audit", "twist_family", "slide_normalize"]


@dataclass(frozen=True)
class MetricEstimate:
    value: float        # upper bound for d(G, G')
    witness: GraphMap
    method: str         # "canonical" | "fold-normalized"

    @property
    def total_edge_length(self):
        return edgelet_count(self.witness)


def difference_map(g, h):
    """The canonical marking-respecting map G -> G'.

    Spanning-tree edges collapse to the codomain basepoint; each non-tree
    edge maps to the codomain realization of its pi_1 coordinate, rewritten
    through the inverse of the domain marking.  Marking-respecting by
    construction, edge images tightened.
    """
    if g.marking is None or h.marking is None:
        raise ValueError("both graphs must be marked")
    if rank(g) != rank(h):
        raise ValueError("rank mismatch: %d vs %d" % (rank(g), rank(h)))
    tree = spanning_tree(g)
    gens = pi1_generators(g, tree)
    m_images = [pi1_word(g, p, tree, gens) for p in g.marking]
    m_inv = invert_automorphism_words(m_images)  # basis words in marking letters
    vmap = tuple(h.basepoint for _ in range(g.num_vertices))
    emap = []
    gen_index = {e: i for i, e in enumerate(gens)}
    for e in g.edge_ids:
        if e in tree:
            emap.append(())
        else:
            word = substitute_reduced(m_inv[gen_index[e]], h.marking)
            emap.append(word)
    return make_graph_map(g, h, vmap, emap)


def slide_normalize(f, step_cap=None):
    """Slide vertex images across shared first edges while some T(f,v) = 1.

    The slide is a homotopy moving f(v) across e': every direction at v gets
    e'^-1 prepended, which strips a letter from directions whose image
    starts with e' and grows collapsed edges by one letter.  A slide is
    applied only when it strictly shortens the total edge length, so the
    loop terminates; a step cap of 10 * #edges guards it anyway.
    """
    from .words import reduce_word

    g, h = f.domain, f.codomain
    vmap = list(f.vertex_map)
    emap = [list(p) for p in f.edge_map]
    cap = step_cap if step_cap is not None else 10 * max(g.num_edges, 1)
    links = g.links()
    for _ in range(cap):
        slid = False
        for v in range(g.num_vertices):
            firsts = set()
            for d in links[v]:
                p = emap[abs(d) - 1]
                if not p:
                    continue
                firsts.add(p[0] if d > 0 else -p[-1])
            if len(firsts) != 1:
                continue
            e_prime = next(iter(firsts))
            incident = sorted({abs(d) for d in links[v]})
            new_images = {}
            old_total = new_total = 0
            for x in incident:
                p = tuple(emap[x - 1])
                u, w = g.edge_ends[x - 1]
                q = p
                if u == v:
                    q = (-e_prime,) + q
                if w == v:
                    q = q + (e_prime,)
                q = reduce_word(q)
                new_images[x] = q
                old_total += len(p)
                new_total += len(q)
            if new_total >= old_total:
                continue
            for x, q in new_images.items():
                emap[x - 1] = list(q)
            vmap[v] = h.term(e_prime)
            slid = True
            break
        if not slid:
            break
    return make_graph_map(g, h, vmap, [tuple(p) for p in emap])


def estimate_d(g, h):
    """Upper bound for d(G,G'): the better of the canonical difference map and
    its vertex-slide normalization."""
    f = difference_map(g, h)
    candidates = [(map_length(f), f, "canonical")]
    slid = slide_normalize(f)
    if edgelet_count(slid) > 0:
        candidates.append((map_length(slid), slid, "fold-normalized"))
    value, witness, method = min(candidates, key=lambda t: t[0])
    return MetricEstimate(value, witness, method)


def quasi_metric_audit(samples):
    """All-pairs estimates with the quasi-metric diagnostics.

    Returns (rows, summary): rows have (i, j, d_upper, witness total length,
    method); the summary reports max d(G,G), max triangle defect
    d(G,G'') - d(G,G') - d(G',G''), and max asymmetry ratio.
    """
    if len(samples) < 3:
        raise ValueError("audit needs at least 3 samples")
    n = len(samples)
    d = {}
    rows = []
    for i in range(n):
        for j in range(n):
            est = estimate_d(samples[i], samples[j])
            d[i, j] = est.value
            rows.append((i, j, est.value, est.total_edge_length, est.method))
    max_self = max(d[i, i] for i in range(n))
    max_defect = -math.inf
    for i in range(n):
        for j in range(n):
            for k in range(n):
                max_defect = max(max_defect, d[i, k] - d[i, j] - d[j, k])
    max_asym = max(d[i, j] / d[j, i] for i in range(n) for j in range(n)
                   if i != j and d[j, i] > 0)
    summary = {
        "max_self_distance": max_self,
        "max_triangle_defect": max_defect,
        "max_asymmetry_ratio": max_asym,
    }
    return rows, summary


def twist_family(n, m):
    """(G_0, G_m): the rank-n rose with identity marking, and the same rose
    remarked through the m-th power of the twist e_2 -> e_2 e_1.

    Total edge length of the canonical difference map G_0 -> G_m is n + m.
    """
    if n < 2:
        raise ValueError("twist family needs rank >= 2")
    if m < 0:
        raise ValueError("m must be nonnegative")
    g0 = make_graph(1, [(0, 0)] * n, basepoint=0,
                    marking=[(i,) for i in range(1, n + 1)])
    marking = [(1,)] + [(2,) + (1,) * m] + [(i,) for i in range(3, n + 1)]
    gm = make_graph(1, [(0, 0)] * n, basepoint=0, marking=marking)
    return g0, gm
