import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldtrack.graph_map import make_graph_map
from foldtrack.spectra import (
    block_structure, gamma, gamma_hat, gamma_hat_by_power, lc, l_total, mlog,
    period, pf_value, pf_value_charpoly, spectrum_report,
)

GOLDEN = (1 + math.sqrt(5)) / 2


def test_lc_l_mlog():
    m = [[1, 1], [1, 0]]
    assert lc(m) == 1
    assert l_total(m) == 3
    assert mlog(1) == 1.0
    assert math.isclose(mlog(math.e ** 2), 2.0)
    assert mlog(0) == 1.0


def test_block_structure_examples():
    bs = block_structure(np.array([[1, 1], [0, 1]]))
    assert bs.blocks == ((0,), (1,))
    assert bs.kinds == ("irreducible", "irreducible")
    bs2 = block_structure(np.array([[1, 1], [1, 1]]))
    assert len(bs2.blocks) == 1 and bs2.kinds == ("irreducible",)
    bs3 = block_structure(np.zeros((2, 2), dtype=int))
    assert bs3.kinds == ("zero", "zero")


def test_block_order_respects_covering():
    # edge 2 covers edge 1, so block {1} must come first
    m = np.array([[1, 1], [0, 1]])
    bs = block_structure(m)
    assert bs.order == (0, 1)


def test_pf_values():
    assert math.isclose(pf_value([[1, 1], [1, 0]]), GOLDEN, abs_tol=1e-9)
    assert pf_value([[0, 1], [1, 0]]) == 1.0
    pg = [[1, 1, 0], [0, 0, 1], [1, 0, 0]]
    assert math.isclose(pf_value(pg), 1.4655712318767682, abs_tol=1e-9)
    assert math.isclose(pf_value([[0, 2], [2, 0]]), 2.0, abs_tol=1e-12)
    with pytest.raises(ValueError):
        pf_value(np.zeros((2, 2), dtype=int))


def test_pf_oracle_agreement():
    for m in ([[1, 1], [1, 0]], [[1, 1, 0], [0, 0, 1], [1, 0, 0]],
              [[0, 0, 1], [1, 0, 1], [0, 1, 0]], [[0, 2], [2, 0]]):
        assert math.isclose(pf_value(m), pf_value_charpoly(m), abs_tol=1e-8)


def test_period_examples():
    assert period(np.array([[0, 2], [2, 0]])) == 2
    assert period(np.array([[1, 1], [1, 1]])) == 1
    assert period(np.array([[1, 1], [1, 0]])) == 1
    m2 = np.linalg.matrix_power(np.array([[0, 2], [2, 0]]), 2)
    assert (m2 == np.diag([4, 4])).all()


def test_gamma_examples(rose2, fibonacci):
    spec = gamma(fibonacci)
    assert len(spec) == 1
    assert math.isclose(spec.top(), GOLDEN, abs_tol=1e-9)
    assert gamma_hat(fibonacci).values() == spec.values()
    poly = make_graph_map(rose2, rose2, (0,), [(1,), (2, 1)])
    assert gamma(poly).values() == []


def test_gamma_hat_multiplicity(rose2):
    # stratum block [[0,2],[2,0]]: a->bb, b->aa
    f = make_graph_map(rose2, rose2, (0,), [(2, 2), (1, 1)])
    spec = gamma(f)
    assert len(spec) == 1
    entry = spec.entries[0]
    assert math.isclose(entry.value, 2.0, abs_tol=1e-12)
    assert entry.multiplicity == 2
    hat = gamma_hat(f)
    assert [round(v, 9) for v in hat.values()] == [2.0, 2.0]
    by_power = gamma_hat_by_power(f)
    assert all(abs(a - b) < 1e-9 for a, b in zip(hat.values(), by_power))


def test_gamma_hat_by_power_general(fibonacci):
    assert all(abs(a - b) < 1e-9 for a, b in
               zip(gamma_hat(fibonacci).values(), gamma_hat_by_power(fibonacci)))


def test_spectrum_report_shape(fibonacci):
    data = spectrum_report(fibonacci, certified=True)
    assert set(data) == {"gamma", "gamma_hat", "filtration", "certified"}
    assert data["gamma_hat"][0]["multiplicity"] == 1
    assert data["filtration"] == [[1, 2]]


entries = st.integers(0, 9)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 8),
       st.integers(0, 2 ** 31))
def test_lemma_product_inequalities(r, k, c, seed):
    rng = np.random.default_rng(seed)
    alpha = max(r, k, c)
    m1 = rng.integers(0, 10, size=(r, k))
    m2 = rng.integers(0, 10, size=(k, c))
    assert lc(m1 @ m2) <= alpha * lc(m1) * lc(m2)
    for m in (m1, m2):
        assert lc(m) <= l_total(m) <= alpha * alpha * lc(m)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 31))
def test_largest_bounds_general_irreducible(n, seed):
    # sparse spanning cycle plus random extras: covers periodic cases
    rng = np.random.default_rng(seed)
    m = rng.integers(0, 4, size=(n, n))
    for i in range(n):
        m[(i + 1) % n, i] = max(m[(i + 1) % n, i], 1)
    lam = pf_value(m)
    assert lam <= n * lc(m) + 1e-9
    assert lam ** n >= lc(m) * (1 - 1e-9)
    assert math.isclose(lam, pf_value_charpoly(m), abs_tol=1e-7)


def test_gamma_hat_lex_order_preserved(rose2):
    # expanding multiplicities never changes the relative lexicographic
    # comparison of two spectra for the same family
    f = make_graph_map(rose2, rose2, (0,), [(2, 2), (1, 1)])   # lambda 2, mult 2
    g = make_graph_map(rose2, rose2, (0,), [(1, 2), (1,)])     # golden, mult 1
    a, b = gamma(f).values(), gamma(g).values()
    ah, bh = gamma_hat(f).values(), gamma_hat(g).values()
    assert (a > b) == (ah > bh)
