"""Finite graphs with oriented edges, markings, filtrations, strata, frontiers.

Conventions:
  * vertices are dense ints 0..V-1;
  * unoriented edges are dense ints 1..E, a signed id +e / -e selects the
    forward / backward orientation (reversal is negation);
  * an edge path is a tuple of signed ids with endpoint-compatible steps;
  * a marking assigns to each rose petal a closed edge path at the basepoint;
  * a filtration is the increasing tuple of cumulative edge sets G_1 .. G_N.
"""

import json
from dataclasses import dataclass, replace

from .errors import StructuralError
from .words import reduce_word

__all__ = [
    "Graph", "make_graph", "rank", "components", "tighten", "reverse_path",
    "path_endpoints", "is_edge_path", "stratum", "frontier", "spanning_tree",
    "pi1_word", "tree_path", "subgraph_closure", "build_subgraph",
    "subgraph_rank", "valences", "validate_filtration", "edge_level",
    "graph_to_json", "graph_from_json",
]


@dataclass(frozen=True)
class Graph:
    """Immutable combinatorial graph, optionally marked and filtered."""

    num_vertices: int
    edge_ends: tuple  # edge_ends[e-1] = (init, term) for edge id e
    basepoint: int = None
    marking: tuple = None     # one closed edge path per rose petal
    filtration: tuple = None  # cumulative frozensets of edge ids
    weak_filtration: bool = False

    @property
    def num_edges(self):
        return len(self.edge_ends)

    @property
    def edge_ids(self):
        return range(1, len(self.edge_ends) + 1)

    def endpoints(self, d):
        """(init, term) of the signed edge d."""
        u, v = self.edge_ends[abs(d) - 1]
        return (u, v) if d > 0 else (v, u)

    def init(self, d):
        return self.endpoints(d)[0]

    def term(self, d):
        return self.endpoints(d)[1]

    @property
    def rank(self):
        return rank(self)

    def links(self):
        """Per-vertex lists of outgoing signed edge ids (loops appear twice)."""
        lk = [[] for _ in range(self.num_vertices)]
        for e, (u, v) in enumerate(self.edge_ends, start=1):
            lk[u].append(e)
            lk[v].append(-e)
        return lk

    def level_of(self, e):
        return edge_level(self, e)

    def with_filtration(self, levels, weak=False):
        levels = tuple(frozenset(l) for l in levels)
        g = replace(self, filtration=levels, weak_filtration=weak)
        validate_filtration(g)
        return g


def make_graph(num_vertices, edge_ends, basepoint=None, marking=None,
               filtration=None, weak_filtration=False, marked=False):
    """Validating constructor.  With marked=True additionally checks
    connectivity, rank agreement with the marking, and closed marking paths."""
    edge_ends = tuple((int(u), int(v)) for u, v in edge_ends)
    for u, v in edge_ends:
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise StructuralError("edge endpoint out of range")
    g = Graph(num_vertices, edge_ends, basepoint,
              tuple(tuple(p) for p in marking) if marking is not None else None,
              tuple(frozenset(l) for l in filtration) if filtration else None,
              weak_filtration)
    if g.filtration is not None:
        validate_filtration(g)
    if marked or marking is not None:
        if g.basepoint is None:
            raise StructuralError("marked graph needs a basepoint")
        if len(components(g)) != 1:
            raise StructuralError("marked graph must be connected")
        if g.marking is not None:
            if len(g.marking) != rank(g):
                raise StructuralError(
                    "marking has %d petals but graph has rank %d"
                    % (len(g.marking), rank(g)))
            for p in g.marking:
                if not p:
                    raise StructuralError("trivial marking path")
                u, v = path_endpoints(g, p)
                if u != g.basepoint or v != g.basepoint:
                    raise StructuralError("marking path not closed at basepoint")
    return g


def rank(g):
    """First Betti number: E - V + #components."""
    return g.num_edges - g.num_vertices + len(components(g))


def components(g):
    """Vertex sets of connected components (isolated vertices included)."""
    parent = list(range(g.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edge_ends:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps = {}
    for v in range(g.num_vertices):
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def valences(g, edges=None):
    """Vertex valences, restricted to an edge subset when given (loops count twice)."""
    val = [0] * g.num_vertices
    for e in (g.edge_ids if edges is None else edges):
        u, v = g.edge_ends[e - 1]
        val[u] += 1
        val[v] += 1
    return val


# -- edge paths --------------------------------------------------------------

def path_endpoints(g, path):
    """(init, term) of a nonempty endpoint-compatible path; raises otherwise."""
    if not path:
        raise StructuralError("empty path has no endpoints")
    cur = g.init(path[0])
    start = cur
    for d in path:
        u, v = g.endpoints(d)
        if u != cur:
            raise StructuralError("path steps not endpoint-compatible")
        cur = v
    return start, cur


def is_edge_path(g, path, closed_at=None):
    try:
        if not path:
            return True
        u, v = path_endpoints(g, path)
    except StructuralError:
        return False
    if closed_at is not None:
        return u == closed_at and v == closed_at
    return True


def reverse_path(path):
    return tuple(-d for d in reversed(path))


def tighten(g, path):
    """The reduced path freely homotopic rel endpoints; validates the input."""
    if path:
        path_endpoints(g, path)
    for d in path:
        if not 1 <= abs(d) <= g.num_edges:
            raise StructuralError("unknown edge id %d" % d)
    return reduce_word(path)


# -- filtrations, strata, frontiers ------------------------------------------

def validate_filtration(g):
    """Checks nesting, the final level, valence-one freedom and the length
    bound for strict filtrations, and the rank/component progression."""
    levels = g.filtration
    if levels is None:
        raise StructuralError("graph carries no filtration")
    all_edges = frozenset(g.edge_ids)
    prev = frozenset()
    for i, lev in enumerate(levels):
        if not prev < lev:
            raise StructuralError("filtration levels must be properly nested")
        prev = lev
    if prev != all_edges:
        raise StructuralError("top filtration level must contain every edge")
    if not g.weak_filtration:
        n = rank(g)
        if len(levels) > max(1, 2 * n - 1):
            raise StructuralError(
                "strict filtration length %d exceeds 2n-1" % len(levels))
        for lev in levels:
            vset, eset = subgraph_closure(g, lev)
            val = {}
            for e in eset:
                u, v = g.edge_ends[e - 1]
                val[u] = val.get(u, 0) + 1
                val[v] = val.get(v, 0) + 1
            if any(val.get(v, 0) == 1 for v in vset):
                raise StructuralError("strict filtration level has a valence-one vertex")
        for lo, hi in zip(levels, levels[1:]):
            r0, c0 = subgraph_rank(g, lo), len(subgraph_components(g, lo))
            r1, c1 = subgraph_rank(g, hi), len(subgraph_components(g, hi))
            if not (r1 > r0 or c1 < c0):
                raise StructuralError(
                    "consecutive levels change neither rank nor components")


def edge_level(g, e):
    """1-based filtration level of an edge (its first level of appearance)."""
    if g.filtration is None:
        return 1
    for i, lev in enumerate(g.filtration, start=1):
        if e in lev:
            return i
    raise StructuralError("edge %d missing from filtration" % e)


def _check_levels(g, b, a):
    if g.filtration is None:
        raise ValueError("graph carries no filtration")
    n = len(g.filtration)
    if not 1 <= a <= b <= n:
        raise ValueError("need 1 <= a <= b <= %d, got a=%d b=%d" % (n, a, b))


def subgraph_closure(g, edges):
    """(vertex set, edge set) of the closure of an edge subset."""
    eset = frozenset(edges)
    vset = set()
    for e in eset:
        u, v = g.edge_ends[e - 1]
        vset.add(u)
        vset.add(v)
    return frozenset(vset), eset


def stratum(g, b, a=None):
    """G(b,a) = closure(G_b minus G_{a-1}) as a (vertices, edges) pair."""
    if a is None:
        a = b
    _check_levels(g, b, a)
    gb = g.filtration[b - 1]
    below = g.filtration[a - 2] if a >= 2 else frozenset()
    return subgraph_closure(g, gb - below)


def frontier(g, b, a):
    """Fr(G,b,a): frontier vertices of G_b not contained in G_{a-1}."""
    _check_levels(g, b, a)
    gb = g.filtration[b - 1]
    vb, _ = subgraph_closure(g, gb)
    higher = frozenset(g.edge_ids) - gb
    touched = set()
    for e in higher:
        u, v = g.edge_ends[e - 1]
        touched.add(u)
        touched.add(v)
    below = g.filtration[a - 2] if a >= 2 else frozenset()
    vbelow, _ = subgraph_closure(g, below)
    return frozenset(v for v in vb if v in touched and v not in vbelow)


def subgraph_rank(g, edges):
    vset, eset = subgraph_closure(g, edges)
    return len(eset) - len(vset) + len(subgraph_components(g, edges))


def subgraph_components(g, edges):
    """Connected components (vertex frozensets) of an edge subset's closure."""
    vset, eset = subgraph_closure(g, edges)
    parent = {v: v for v in vset}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in eset:
        u, v = g.edge_ends[e - 1]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps = {}
    for v in vset:
        comps.setdefault(find(v), set()).add(v)
    return [frozenset(c) for c in comps.values()]


def build_subgraph(g, edges):
    """Closure of an edge subset as a standalone Graph with dense ids.

    Returns (graph, vertex_map old->new, edge_map old->new).
    """
    vset, eset = subgraph_closure(g, edges)
    vs = sorted(vset)
    es = sorted(eset)
    vmap = {v: i for i, v in enumerate(vs)}
    emap = {e: i + 1 for i, e in enumerate(es)}
    ends = tuple((vmap[g.edge_ends[e - 1][0]], vmap[g.edge_ends[e - 1][1]])
                 for e in es)
    return Graph(len(vs), ends), vmap, emap


# -- spanning trees and pi_1 coordinates -------------------------------------

def spanning_tree(g):
    """Deterministic spanning tree: grow from the basepoint, always adding the
    lowest-id edge reaching a new vertex.  Requires a connected graph."""
    if g.basepoint is None:
        base = 0
    else:
        base = g.basepoint
    in_tree = set()
    reached = {base}
    while len(reached) < g.num_vertices:
        best = None
        for e, (u, v) in enumerate(g.edge_ends, start=1):
            if (u in reached) != (v in reached):
                best = e
                break
        if best is None:
            raise StructuralError("graph is not connected")
        in_tree.add(best)
        reached.update(g.edge_ends[best - 1])
    return frozenset(in_tree)


def tree_path(g, tree, u, v):
    """The reduced edge path from u to v inside a spanning tree."""
    if u == v:
        return ()
    adj = {}
    for e in tree:
        a, b = g.edge_ends[e - 1]
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, -e))
    prev = {u: None}
    queue = [u]
    while queue:
        x = queue.pop(0)
        if x == v:
            break
        for y, d in adj.get(x, ()):
            if y not in prev:
                prev[y] = (x, d)
                queue.append(y)
    if v not in prev:
        raise StructuralError("vertices in different tree components")
    path = []
    cur = v
    while prev[cur] is not None:
        x, d = prev[cur]
        path.append(d)
        cur = x
    return tuple(reversed(path))


def pi1_generators(g, tree=None):
    """Non-tree edge ids in increasing order: the pi_1 basis through `tree`."""
    tree = spanning_tree(g) if tree is None else tree
    return [e for e in g.edge_ids if e not in tree]


def pi1_word(g, path, tree=None, gens=None):
    """Express a loop as a reduced word in the spanning-tree pi_1 basis.

    Tree edges contribute nothing, so any loop (at any vertex) yields the
    basepoint-consistent element obtained by conjugating along tree geodesics.
    """
    tree = spanning_tree(g) if tree is None else tree
    if gens is None:
        gens = pi1_generators(g, tree)
    index = {e: i + 1 for i, e in enumerate(gens)}
    out = []
    for d in path:
        e = abs(d)
        if e in tree:
            continue
        letter = index[e] if d > 0 else -index[e]
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


# -- JSON interchange ---------------------------------------------------------

def graph_to_json(g):
    data = {
        "rank": rank(g),
        "vertices": list(range(g.num_vertices)),
        "edges": [{"id": e, "from": u, "to": v}
                  for e, (u, v) in enumerate(g.edge_ends, start=1)],
        "basepoint": g.basepoint,
    }
    if g.marking is not None:
        data["marking"] = [list(p) for p in g.marking]
    if g.filtration is not None:
        data["filtration"] = [sorted(l) for l in g.filtration]
    return data


def graph_from_json(data):
    vs = list(data["vertices"])
    vmap = {v: i for i, v in enumerate(vs)}
    edges = sorted(data["edges"], key=lambda d: d["id"])
    emap = {d["id"]: i + 1 for i, d in enumerate(edges)}
    ends = [(vmap[d["from"]], vmap[d["to"]]) for d in edges]

    def remap_path(p):
        return tuple((emap[abs(d)] if d > 0 else -emap[abs(d)]) for d in p)

    marking = data.get("marking")
    filtration = data.get("filtration")
    g = make_graph(
        len(vs), ends,
        basepoint=vmap[data["basepoint"]] if data.get("basepoint") is not None else None,
        marking=[remap_path(p) for p in marking] if marking is not None else None,
        filtration=[frozenset(emap[e] for e in lev) for lev in filtration]
        if filtration else None,
        weak_filtration=bool(data.get("weak_filtration", False)),
    )
    return g


def load_graph(path):
    with open(path) as fh:
        return graph_from_json(json.load(fh))


def dump_graph(g, path):
    with open(path, "w") as fh:
        json.dump(graph_to_json(g), fh, indent=1, sort_keys=True)
        fh.write("\n")
