"""Free-group words and Nielsen-transformation machinery.

Words over a rank-n free group are tuples of nonzero ints: letter +i is the
i-th generator, -i its inverse.  The same encoding doubles as edge paths on
graphs (see graph.py), so the reduction helpers here are shared.
"""

from collections import deque

from .errors import CapacityError, CertificationError

# Search caps for the equal-length plateau phase of Nielsen reduction.
_PLATEAU_STATE_CAP = 200_000


def reduce_word(letters):
    """Free reduction: cancel adjacent inverse pairs.  Returns a tuple."""
    out = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def invert_word(w):
    return tuple(-a for a in reversed(w))


def concat(*ws):
    """Reduced concatenation of words."""
    out = []
    for w in ws:
        for a in w:
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
    return tuple(out)


def cyclic_reduce(w):
    w = reduce_word(w)
    lo, hi = 0, len(w)
    while hi - lo >= 2 and w[lo] == -w[hi - 1]:
        lo += 1
        hi -= 1
    return tuple(w[lo:hi])


def cyclic_length(w):
    return len(cyclic_reduce(w))


def conjugate(w, u):
    """u * w * u^-1, reduced."""
    return concat(u, w, invert_word(u))


def substitute(w, images):
    """Apply the endomorphism x_i -> images[i-1] to a word.  Not reduced."""
    out = []
    for a in w:
        if a > 0:
            out.extend(images[a - 1])
        else:
            out.extend(-b for b in reversed(images[-a - 1]))
    return tuple(out)


def substitute_reduced(w, images):
    return reduce_word(substitute(w, images))


def max_common_prefix(u, v):
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def _conjugator_core(w, letter):
    """If reduce(w) == v letter v^-1 reduced, return v, else None."""
    w = reduce_word(w)
    if len(w) % 2 == 0:
        return None
    h = len(w) // 2
    if w[h] != letter:
        return None
    v = w[:h]
    if w[h + 1:] != invert_word(v):
        return None
    return v


def simultaneous_conjugator(ws, vs):
    """Find u with ws[i] == u vs[i] u^-1 (reduced) for all i, or None.

    Complete: the solution set of each equation is a coset v_i <x-ish>, and
    candidate conjugators are enumerated from the first informative equation
    with an exponent bound derived from the word lengths.
    """
    if len(ws) != len(vs):
        raise ValueError("tuples must have equal length")
    ws = [reduce_word(w) for w in ws]
    vs = [reduce_word(v) for v in vs]
    if all(w == v for w, v in zip(ws, vs)):
        return ()
    if not ws:
        return ()

    def check(u):
        return all(conjugate(v, u) == w for w, v in zip(ws, vs))

    # Wrap each v_i so the equation reads w = u (c x c^-1) u^-1 with x a letter;
    # only letter-cored v_i give coset structure, so fall back to a direct
    # bounded search keyed on the first equation when v_i is not a letter.
    for i, v in enumerate(vs):
        if len(v) != 1:
            continue
        x = v[0]
        core = _conjugator_core(ws[i], x)
        if core is None:
            return None
        bound = (max(len(w) for w in ws) + 2 * len(core)) // 2 + 2
        for a in range(-bound, bound + 1):
            u = concat(core, (x,) * a if a >= 0 else (-x,) * (-a))
            if check(u):
                return u
        return None

    # General v_i: search u among prefixes of w_i v_i^-1 rearrangements, bounded.
    w, v = ws[0], vs[0]
    half = (len(w) + len(v)) // 2 + 1
    seen = set()
    for base in (w, invert_word(w)):
        for k in range(0, min(half, len(base)) + 1):
            u = base[:k]
            if u in seen:
                continue
            seen.add(u)
            if check(u):
                return u
    return None


# ---------------------------------------------------------------------------
# Nielsen reduction
# ---------------------------------------------------------------------------
#
# A move is a tuple (side, i, j, eps, count):
#   side "R": w_i <- w_i * w_j^eps, `count` times
#   side "L": w_i <- w_j^eps * w_i, `count` times
# Moves always have i != j and leave w_j untouched, so repeated application
# has the closed form w_i * w_j^(eps*count) (resp. left).


def _cancellation(u, v):
    """Length of the maximal cancellation in the product u*v."""
    k = 0
    n = min(len(u), len(v))
    while k < n and u[len(u) - 1 - k] == -v[k]:
        k += 1
    return k


def _apply_move(ws, move):
    side, i, j, eps, count = move
    wj = ws[j] if eps > 0 else invert_word(ws[j])
    block = wj * count
    if side == "R":
        ws[i] = concat(ws[i], block)
    else:
        ws[i] = concat(block, ws[i])


def _suffix_repeats(w, block):
    """Max r with w ending in block repeated r times."""
    b = len(block)
    if b == 0:
        return 0
    r = 0
    pos = len(w)
    while pos >= b and tuple(w[pos - b:pos]) == block:
        r += 1
        pos -= b
    return r


def _best_strict_move(ws):
    """First move (deterministic scan order) that strictly shortens the total,
    batched to its maximal repeat count.

    Batching is computed by run-counting rather than repeated concatenation so
    that long geometric-progression words (marking twists) reduce in linear
    time.
    """
    n = len(ws)
    for i in range(n):
        wi = ws[i]
        if not wi:
            continue
        for j in range(n):
            if i == j or not ws[j]:
                continue
            lj = len(ws[j])
            for side in ("R", "L"):
                for eps in (1, -1):
                    wj = ws[j] if eps > 0 else invert_word(ws[j])
                    inv_wj = invert_word(wj)
                    if side == "R":
                        c = _cancellation(wi, wj)
                    else:
                        c = _cancellation(wj, wi)
                    if 2 * c <= lj:
                        continue
                    if side == "R":
                        full = _suffix_repeats(wi, inv_wj)
                    else:
                        full = _suffix_repeats(invert_word(wi), wj)
                    if full == 0:
                        return (side, i, j, eps, 1)
                    # After stripping `full` whole blocks one more partial
                    # reduction may remain; probe it cheaply.
                    rest = wi[:len(wi) - full * lj] if side == "R" \
                        else wi[full * lj:]
                    if side == "R":
                        extra = 1 if 2 * _cancellation(rest, wj) > lj else 0
                    else:
                        extra = 1 if 2 * _cancellation(wj, rest) > lj else 0
                    return (side, i, j, eps, full + extra)
    return None


def _is_signed_permutation(ws, rank):
    """If ws is (s_1 x_{p(1)}, ...) return the signed permutation, else None."""
    if len(ws) != rank:
        return None
    perm = []
    seen = set()
    for w in ws:
        if len(w) != 1:
            return None
        if abs(w[0]) in seen:
            return None
        seen.add(abs(w[0]))
        perm.append(w[0])
    return perm


def _plateau_search(ws):
    """BFS over non-lengthening moves from a strict-descent dead end.

    Returns (moves, new_ws) leading either to a strictly shorter tuple or to a
    signed-permutation basis, or None if the plateau component has neither.
    """
    start = tuple(ws)
    total = sum(len(w) for w in start)
    n = len(start)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        if len(seen) > _PLATEAU_STATE_CAP:
            raise CapacityError(
                "Nielsen plateau search exceeded %d states" % _PLATEAU_STATE_CAP)
        state, path = queue.popleft()
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for side in ("R", "L"):
                    for eps in (1, -1):
                        move = (side, i, j, eps, 1)
                        nxt = list(state)
                        _apply_move(nxt, move)
                        nt = sum(len(w) for w in nxt)
                        if nt > total:
                            continue
                        nxt_t = tuple(nxt)
                        if nt < total:
                            return path + (move,), nxt_t
                        if nxt_t in seen:
                            continue
                        seen.add(nxt_t)
                        queue.append((nxt_t, path + (move,)))
    return None


def nielsen_reduce(words):
    """Reduce a tuple of words by length-non-increasing Nielsen moves.

    Returns (final_tuple, moves).  The moves log, applied in order to the
    input tuple, yields the final tuple.
    """
    ws = [reduce_word(w) for w in words]
    rank = len(ws)
    moves = []
    while True:
        move = _best_strict_move(ws)
        if move is not None:
            _apply_move(ws, move)
            moves.append(move)
            continue
        if _is_signed_permutation(ws, rank) is not None:
            break
        found = _plateau_search(ws)
        if found is None:
            break
        path, state = found
        moves.extend(path)
        ws = [tuple(w) for w in state]
    return tuple(tuple(w) for w in ws), moves


def generates_free_group(words, rank):
    """True iff the words generate the full rank-`rank` free group.

    Word-level decision via Nielsen reduction; a reduced tuple generates
    exactly when its nontrivial members are distinct single letters covering
    all generators.
    """
    final, _ = nielsen_reduce(words)
    letters = set()
    for w in final:
        if not w:
            continue
        if len(w) != 1:
            return False
        letters.add(abs(w[0]))
    return letters == set(range(1, rank + 1))


def invert_automorphism_words(images):
    """Invert the automorphism x_i -> images[i].

    Raises CertificationError when the images do not form a basis.  The
    inverse is assembled from the Nielsen move log: each tuple move
    w_i <- w_i w_j^e is precomposition with the elementary map
    x_i -> x_i x_j^e, so with phi the input and rho_k the elementary maps,
    phi o rho_1 o ... o rho_t = sigma (a signed permutation), giving
    phi^-1 = rho_1 o ... o rho_t o sigma^-1.
    """
    rank = len(images)
    final, moves = nielsen_reduce(images)
    perm = _is_signed_permutation(final, rank)
    if perm is None:
        raise CertificationError(
            "images do not generate a free basis: reduced to %r" % (final,))
    # sigma: x_i -> perm[i]; sigma^-1: x_{|perm[i]|} -> sign(perm[i]) * x_{i+1}
    inv = [None] * rank
    for i, p in enumerate(perm):
        inv[abs(p) - 1] = ((i + 1) if p > 0 else -(i + 1),)
    psi = inv
    for side, i, j, eps, count in reversed(moves):
        # rho: x_i -> x_i x_j^(eps*count) (side R) or x_j^(eps*count) x_i (L)
        rho = [((k + 1),) for k in range(rank)]
        tail = tuple([eps * (j + 1)] * count) if eps > 0 else tuple([-(j + 1)] * count)
        tail = tuple([(j + 1) if eps > 0 else -(j + 1)] * count)
        if side == "R":
            rho[i] = (i + 1,) + tail
        else:
            rho[i] = tail + (i + 1,)
        psi = [substitute_reduced(w, rho) for w in psi]
    return tuple(psi)
