"""Free-group automorphisms: parsing, rose representatives, reading
automorphisms off marked-graph maps, train-track certification, and
word-growth estimation.

Text grammar: "a->ab, b->a" with letters a..z; inverses as uppercase or a
^-1 suffix ("b^-1 a" and "B a" parse the same).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, StructuralError
from .folding import controlled_inverse, factorize
from .graph import (
    make_graph, pi1_generators, pi1_word, rank, spanning_tree, tree_path,
)
from .graph_map import (
    GraphMap, apply_path, compose, direction_map, make_graph_map,
    tighten_map, transition_matrix,
)
from .words import (
    cyclic_length, cyclic_reduce, generates_free_group,
    invert_automorphism_words, reduce_word, simultaneous_conjugator,
    substitute_reduced,
)

__all__ = [
    "Automorphism", "parse_automorphism", "format_automorphism",
    "rose_graph", "rose_representative", "read_automorphism", "is_inner",
    "check_train_track", "stable_gates", "word_growth_rate",
    "random_automorphism", "nielsen_inverse", "fold_inverse",
    "expansion_report", "normalize_outer",
]

GROWTH_LENGTH_CAP = 10 ** 6


@dataclass(frozen=True)
class Automorphism:
    """Generator images of a certified automorphism of F_n."""

    rank: int
    images: tuple  # tuple of reduced words

    def __call__(self, w):
        return substitute_reduced(w, self.images)

    def is_identity(self):
        return all(w == (i + 1,) for i, w in enumerate(self.images))


def make_automorphism(images, certify=True):
    images = tuple(reduce_word(w) for w in images)
    rank = len(images)
    if certify and not generates_free_group(images, rank):
        raise CertificationError(
            "images do not define an automorphism: %s"
            % format_automorphism(Automorphism(rank, images)))
    return Automorphism(rank, images)


def compose_automorphisms(a, b):
    """a after b."""
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    return Automorphism(a.rank, tuple(a(w) for w in b.images))


def power(a, n):
    if n < 0:
        return power(nielsen_inverse(a), -n)
    out = Automorphism(a.rank, tuple((i + 1,) for i in range(a.rank)))
    for _ in range(n):
        out = compose_automorphisms(a, out)
    return out


def nielsen_inverse(a):
    """Algebraic inverse computed from the Nielsen move log."""
    return Automorphism(a.rank, invert_automorphism_words(a.images))


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

def _parse_word(text, letter_index):
    word = []
    i = 0
    text = text.strip()
    while i < len(text):
        ch = text[i]
        if ch == " ":
            i += 1
            continue
        if ch.isalpha():
            low = ch.lower()
            if low not in letter_index:
                raise StructuralError("unknown generator %r" % ch)
            letter = letter_index[low]
            sign = -1 if ch.isupper() else 1
            i += 1
            if text[i:i + 3] == "^-1":
                sign = -sign
                i += 3
            word.append(sign * letter)
        else:
            raise StructuralError("unexpected character %r" % ch)
    return tuple(word)


def parse_automorphism(text, certify=True):
    """Parse "a->ab, b->a" into a certified Automorphism."""
    rules = [part.strip() for part in text.split(",") if part.strip()]
    if not rules:
        raise StructuralError("empty automorphism text")
    lhs = []
    rhs = []
    for rule in rules:
        if "->" not in rule:
            raise StructuralError("rule %r is missing '->'" % rule)
        left, right = rule.split("->", 1)
        left = left.strip()
        if len(left) != 1 or not left.isalpha() or not left.islower():
            raise StructuralError("left side must be a single generator: %r" % left)
        lhs.append(left)
        rhs.append(right)
    if sorted(lhs) != [chr(ord("a") + i) for i in range(len(lhs))]:
        raise StructuralError(
            "generators must be a..%s, got %r" % (chr(ord("a") + len(lhs) - 1), lhs))
    letter_index = {ch: i + 1 for i, ch in enumerate(sorted(lhs))}
    images = [None] * len(lhs)
    for left, right in zip(lhs, rhs):
        images[letter_index[left] - 1] = _parse_word(right, letter_index)
    return make_automorphism(images, certify=certify)


def format_word(w):
    if not w:
        return "1"
    parts = []
    for a in w:
        tok = chr(ord("a") + abs(a) - 1)
        parts.append(tok if a > 0 else tok + "^-1 ")
    return "".join(parts).strip()


def format_automorphism(aut):
    rules = []
    for i, w in enumerate(aut.images):
        rules.append("%s->%s" % (chr(ord("a") + i), format_word(w)))
    return ", ".join(rules)


# ---------------------------------------------------------------------------
# rose representatives and reading automorphisms off maps
# ---------------------------------------------------------------------------

def rose_graph(n):
    """The rose R_n with identity marking."""
    return make_graph(1, [(0, 0)] * n, basepoint=0,
                      marking=[(i,) for i in range(1, n + 1)])


def rose_representative(aut):
    rose = rose_graph(aut.rank)
    return make_graph_map(rose, rose, (0,), aut.images)


def normalize_outer(aut):
    """Canonical outer representative: conjugate all images by the word
    minimizing total image length, ties by lexicographically least tuple.

    Total conjugate length is a sum of tree-distance functions of the
    conjugator, hence convex on the Cayley tree: single-letter descent finds
    the minimum and the minimizing conjugators form a connected plateau,
    which is searched exhaustively for the lexicographic least tuple.
    """
    images = tuple(aut.images)

    def total(ws):
        return sum(len(w) for w in ws)

    def conj(ws, u):
        iu = tuple(-a for a in reversed(u))
        return tuple(reduce_word(iu + w + u) for w in ws)

    letters = [(s * l,) for l in range(1, aut.rank + 1) for s in (1, -1)]
    while True:
        cur_t = total(images)
        best = None
        for u in letters:
            cand = conj(images, u)
            if total(cand) < cur_t and (best is None or total(cand) < total(best)
                                        or (total(cand) == total(best) and cand < best)):
                best = cand
        if best is None:
            break
        images = best
    # exhaustive walk of the minimum plateau
    cur_t = total(images)
    seen = {images}
    queue = [images]
    best = images
    while queue:
        state = queue.pop()
        if state < best:
            best = state
        for u in letters:
            cand = conj(state, u)
            if total(cand) == cur_t and cand not in seen:
                seen.add(cand)
                queue.append(cand)
        if len(seen) > 10_000:
            break
    return Automorphism(aut.rank, best)


def read_automorphism(f, normalize=True):
    """The outer automorphism induced by a marking-respecting self map,
    expressed in the rose basis through spanning-tree pi_1 coordinates."""
    g = f.domain
    if g.edge_ends != f.codomain.edge_ends:
        raise ValueError("read_automorphism needs a self map")
    if g.marking is None:
        raise ValueError("domain carries no marking")
    tree = spanning_tree(g)
    gens = pi1_generators(g, tree)
    base = g.basepoint
    # marking iso m: x_i -> word of rho(x_i) in the tree basis
    m_images = [pi1_word(g, p, tree, gens) for p in g.marking]
    if not generates_free_group(m_images, rank(g)):
        raise CertificationError("marking does not read as a basis")
    m_inv = invert_automorphism_words(m_images)
    # induced map on the tree basis
    b_images = []
    for e in gens:
        u, v = g.edge_ends[e - 1]
        loop = tree_path(g, tree, base, u) + (e,) + tree_path(g, tree, v, base)
        b_images.append(pi1_word(g, apply_path(f, loop), tree, gens))
    phi = [substitute_reduced(substitute_reduced(m_images[i], b_images), m_inv)
           for i in range(len(m_images))]
    aut = make_automorphism(phi)
    return normalize_outer(aut) if normalize else aut


def is_inner(images, rank=None):
    """Decide whether x_i -> images[i] is conjugation by a fixed word.

    Complete: the solution set of each equation w_i = u x_i u^-1 is a coset
    v_i <x_i>, and the exponent along x_1 is bounded by the image lengths.
    """
    if isinstance(images, Automorphism):
        rank = images.rank
        images = images.images
    images = [reduce_word(w) for w in images]
    n = rank if rank is not None else len(images)
    basis = [(i + 1,) for i in range(n)]
    return simultaneous_conjugator(images, basis) is not None


# ---------------------------------------------------------------------------
# train tracks and gates
# ---------------------------------------------------------------------------

def stable_gates(f):
    """Partition of directions by eventual collision under iterated Df.

    Directions d, d' are in the same gate when Df^m(d) = Df^m(d') for some
    m >= 1; the kernel partition of Df^m stabilizes after at most the number
    of directions many steps.
    """
    df = direction_map(f)
    dirs = sorted(df)
    cur = {d: df[d] for d in dirs}
    steps = len(dirs)
    prev_classes = None
    for _ in range(steps + 1):
        classes = {}
        for d in dirs:
            classes.setdefault(cur[d], []).append(d)
        key = tuple(tuple(v) for v in sorted(classes.values()))
        if key == prev_classes:
            break
        prev_classes = key
        cur = {d: df.get(cur[d], cur[d]) for d in dirs}
    rep = {}
    for members in classes.values():
        for d in members:
            rep[d] = members[0]
    return rep


def check_train_track(f):
    """True iff every turn crossed by some f(e) is legal (its two directions
    lie in distinct stable gates), so iteration never cancels."""
    gates = stable_gates(f)
    for e in f.domain.edge_ids:
        p = f.edge_map[e - 1]
        for d, d_next in zip(p, p[1:]):
            x, y = -d, d_next
            if x == y:
                return False
            if gates.get(x) == gates.get(y) and x in gates and y in gates:
                return False
    return True


# ---------------------------------------------------------------------------
# growth rates
# ---------------------------------------------------------------------------

def word_growth_rate(aut, seeds=None, k_max=40, length_cap=GROWTH_LENGTH_CAP):
    """Multiplicative growth-rate estimate of cyclic lengths under iteration.

    Least-squares slope of log cyclic length over the last k_max/2 samples;
    beyond the length cap the iteration switches to occurrence vectors under
    the transition matrix of the tightened rose map (same asymptotics, no
    exponential memory).
    """
    if k_max < 8:
        raise ValueError("k_max must be at least 8")
    if seeds is None:
        seeds = [(i + 1,) for i in range(aut.rank)]
    f = tighten_map(rose_representative(aut))
    m = transition_matrix(f).entries.astype(float)
    # Certified train-track maps never cancel under iteration, so lengths
    # follow the transition matrix exactly; skip the word materialization.
    matrix_exact = check_train_track(f)
    best = 0.0
    for seed in seeds:
        w = cyclic_reduce(seed)
        if not w:
            continue
        logs = []
        vec = None
        offset = 0.0
        if matrix_exact:
            vec = np.zeros(aut.rank)
            for a in aut(w):
                vec[abs(a) - 1] += 1
            logs.append(math.log(vec.sum()))
        for _ in range(k_max - len(logs)):
            if vec is None:
                w = aut(w)
                n = cyclic_length(w)
                if n == 0:
                    logs = []
                    break
                logs.append(math.log(n))
                if n > length_cap:
                    vec = np.zeros(aut.rank)
                    for a in cyclic_reduce(w):
                        vec[abs(a) - 1] += 1
            else:
                vec = m @ vec
                total = float(vec.sum())
                if total <= 0:
                    logs = []
                    break
                if total > 1e12:
                    vec /= total
                    offset += math.log(total)
                    total = 1.0
                logs.append(offset + math.log(total))
        if logs:
            best = max(best, _slope_rate(logs))
    return best


def _slope_rate(logs):
    ys = np.asarray(logs, dtype=float)
    if ys.size == 0 or not np.isfinite(ys).all():
        return 0.0
    half = max(ys.size // 2, 2)
    ks = np.arange(1, ys.size + 1, dtype=float)[-half:]
    ys = ys[-half:]
    if ys.size < 2 or np.allclose(ys, ys[0]):
        return 1.0
    slope = np.polyfit(ks, ys, 1)[0]
    return float(math.exp(max(slope, 0.0)))


# ---------------------------------------------------------------------------
# random automorphisms
# ---------------------------------------------------------------------------

def random_automorphism(rank, length, rng, positive=False):
    """Seeded product of Nielsen transformations: x_i -> x_i x_j^(+-1),
    transpositions, and inversions (the latter two skipped when positive)."""
    images = [(i + 1,) for i in range(rank)]
    for _ in range(length):
        kinds = ("mult",) if positive or rank == 1 else ("mult", "swap", "invert")
        kind = kinds[int(rng.integers(0, len(kinds)))] if rank > 1 else "invert"
        if kind == "mult":
            i = int(rng.integers(0, rank))
            j = int(rng.integers(0, rank - 1))
            if j >= i:
                j += 1
            eps = 1 if positive else (1 if rng.integers(0, 2) else -1)
            tail = images[j] if eps > 0 else tuple(-a for a in reversed(images[j]))
            images[i] = reduce_word(images[i] + tail)
            if not images[i]:
                images[i] = (i + 1,)  # degenerate cancellation; reset petal
        elif kind == "swap":
            i = int(rng.integers(0, rank))
            j = int(rng.integers(0, rank - 1))
            if j >= i:
                j += 1
            images[i], images[j] = images[j], images[i]
        else:
            i = int(rng.integers(0, rank))
            images[i] = tuple(-a for a in reversed(images[i]))
    return make_automorphism(images, certify=False)


# ---------------------------------------------------------------------------
# fold-based inversion and the ratio report
# ---------------------------------------------------------------------------

def fold_inverse(aut):
    """Controlled inverse through the fold factorization of the rose map.

    Returns (inverse automorphism, factorization, stats).
    """
    f = tighten_map(rose_representative(aut))
    fact = factorize(f)
    g, stats = controlled_inverse(fact, with_stats=True)
    inv = read_automorphism(g)
    return inv, fact, stats


def expansion_report(aut, k_max=40):
    """Forward and inverse expansion data: spectra with certification flags,
    word-growth cross-estimates, and the log-ratio of the top values."""
    from .spectra import gamma_hat, spectrum_report

    phi = normalize_outer(aut)
    f = tighten_map(rose_representative(phi))
    fwd_hat = gamma_hat(f)
    fwd_cert = check_train_track(f)
    inv, fact, stats = fold_inverse(phi)
    fi = tighten_map(rose_representative(inv))
    inv_hat = gamma_hat(fi)
    inv_cert = check_train_track(fi)
    lam = fwd_hat.top()
    mu = inv_hat.top()
    ratio = None
    if lam is not None and mu is not None:
        ratio = math.log(lam) / math.log(mu)
    growth_fwd = word_growth_rate(phi, k_max=k_max)
    growth_inv = word_growth_rate(inv, k_max=k_max)
    paired = _spectra_paired(f, fi)
    report = {
        "automorphism": format_automorphism(phi),
        "inverse": format_automorphism(inv),
        "lambda": lam,
        "mu": mu,
        "ratio": ratio,
        "lambda_certified": fwd_cert,
        "mu_certified": inv_cert,
        "gamma_hat_forward": fwd_hat.values(),
        "gamma_hat_inverse": inv_hat.values(),
        "growth_estimates": {"forward": growth_fwd, "inverse": growth_inv},
        "fold_count": fact.fold_count,
        "inverse_lc": stats.lc,
        "lc_product_bound_ok": stats.within_bound,
        "strata_paired": paired,
        "forward_report": spectrum_report(f, certified=fwd_cert),
        "inverse_report": spectrum_report(fi, certified=inv_cert),
    }
    return report


def _spectra_paired(f, fi):
    """Strata pair only when both representatives share the invariant
    filtration edge partition (same blocks in the same order)."""
    from .spectra import maximal_invariant_filtration

    bf, _, _ = maximal_invariant_filtration(f)
    bi, _, _ = maximal_invariant_filtration(fi)
    return [sorted(b) for b in bf] == [sorted(b) for b in bi]
