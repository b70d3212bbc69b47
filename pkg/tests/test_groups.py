import itertools

import numpy as np
import pytest
from scipy import stats

from esmlab.groups import GroupSpec, ball
from esmlab import labels

F2 = GroupSpec("free", 2)
Z2 = GroupSpec("free_abelian", 2)


def test_parse_and_format():
    assert GroupSpec.parse("free:2") == F2
    assert GroupSpec.parse("zd:2") == Z2
    assert str(F2) == "free:2" and str(Z2) == "zd:2"
    for bad in ("free", "free:x", "sl:2", "free:0"):
        with pytest.raises(ValueError):
            GroupSpec.parse(bad)
    g = F2.parse_element("ab'a")
    assert g == (1, -2, 1) and F2.format(g) == "ab'a"
    assert F2.parse_element("e") == () and F2.format(()) == "e"
    assert Z2.parse_element("(3,-1)") == (3, -1)


def test_free_reduction():
    a, b = (1,), (2,)
    ab = F2.multiply(a, b)
    assert F2.multiply(ab, F2.multiply(F2.invert(b), a)) == (1, 1)
    assert F2.canonical([1, 2, -2, -1]) == ()
    with pytest.raises(ValueError):
        F2.canonical([3])


def test_group_axioms_on_small_ball():
    for spec in (F2, Z2, GroupSpec("free", 1)):
        B = ball(spec, 2)
        e = spec.identity()
        for g in B.vertices:
            assert spec.multiply(g, spec.invert(g)) == e
            assert spec.multiply(e, g) == g
        for g, h, k in itertools.islice(itertools.product(B.vertices, repeat=3), 2000):
            assert spec.multiply(spec.multiply(g, h), k) == spec.multiply(g, spec.multiply(h, k))


@pytest.mark.parametrize("spec,R,size", [(F2, 1, 5), (F2, 2, 17), (Z2, 2, 13), (Z2, 5, 61),
                                         (GroupSpec("free", 1), 4, 9), (GroupSpec("free", 3), 2, 37)])
def test_ball_sizes(spec, R, size):
    B = ball(spec, R)
    assert len(B) == size == spec.ball_size(R)
    assert B.vertices[0] == spec.identity()
    assert np.all(np.diff(B.depth) >= 0)
    assert all(spec.length(g) == d for g, d in zip(B.vertices, B.depth))


def test_adjacency_symmetric_and_right_multiplication():
    B = ball(F2, 3)
    gens = F2.generators
    for u, row in enumerate(B.adjacency):
        for s, v in enumerate(row):
            if v < 0:
                assert B.depth[u] == 3
                continue
            assert B.vertices[v] == F2.multiply(B.vertices[u], gens[s])
            assert B.adjacency[v, s ^ 1] == u  # inverse generator sits next door


def test_left_translation_is_automorphism():
    B = ball(F2, 5)
    g = F2.parse_element("ab'")
    inner = B.within(2)
    img = B.translate_index(g, [B.vertices[i] for i in inner])
    assert np.all(img >= 0)
    for i, j in zip(inner, img):
        for s in range(4):
            n = B.adjacency[i, s]
            if n >= 0:
                assert B.adjacency[j, s] == B.index[F2.multiply(g, B.vertices[n])]


def test_edges_csv():
    text = ball(GroupSpec("free", 1), 1).edges_csv()
    assert text.splitlines() == ["u,v,generator", "e,a,a", "e,a',a'"]


def test_ball_budget():
    with pytest.raises(MemoryError):
        ball(GroupSpec("free", 3), 12)
    with pytest.raises(ValueError):
        ball(F2, -1)


# -- labels ------------------------------------------------------------------


def test_labels_deterministic_and_seed_sensitive():
    keys = labels.element_keys(ball(F2, 3).vertices)
    a = labels.uniform_labels(7, keys)
    assert np.array_equal(a, labels.uniform_labels(7, keys))
    assert not np.array_equal(a, labels.uniform_labels(8, keys))
    assert not np.array_equal(a, labels.uniform_labels(7, keys, stream=1))
    assert np.all((a >= 0) & (a < 1))


def test_enlarging_ball_keeps_labels():
    small, big = ball(F2, 3), ball(F2, 5)
    ls = labels.uniform_labels(3, labels.element_keys(small.vertices))
    lb = labels.uniform_labels(3, labels.element_keys(big.vertices))
    assert np.array_equal(ls, lb[[big.index[g] for g in small.vertices]])


def test_labels_uniform_and_independent_streams():
    keys = labels.element_keys(ball(F2, 7).vertices)  # 4373 elements
    seeds = np.arange(20, dtype=np.uint64)
    u = labels.uniform_labels(seeds, keys).ravel()
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    v = labels.uniform_labels(seeds, keys, stream=1).ravel()
    assert abs(np.corrcoef(u, v)[0, 1]) < 4 / np.sqrt(u.size)


def test_derive_seed():
    s = {labels.derive_seed(0, t) for t in range(1000)}
    assert len(s) == 1000
    assert labels.derive_seed(0, 1, 2) != labels.derive_seed(0, 2, 1)
    assert labels.derive_seed(5, 3) == labels.derive_seed(5, 3)
    x = np.arange(50, dtype=np.uint64)
    assert [labels.mix64(int(v)) for v in x] == labels.mix64_array(x).tolist()
