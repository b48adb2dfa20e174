import random
from fractions import Fraction

import pytest

from hmmdkit.cluster import (
    DissimilarityMatrix,
    Linkage,
    build_dendrogram,
    cut_dendrogram,
)
from hmmdkit.core import ValidationError


def matrix(ids, entries):
    n = len(ids)
    d = [[0] * n for _ in range(n)]
    for (a, b), v in entries.items():
        i, j = ids.index(a), ids.index(b)
        d[i][j] = d[j][i] = v
    return DissimilarityMatrix(tuple(ids), tuple(tuple(r) for r in d))


THREE = matrix(["p1", "p2", "p3"], {("p1", "p2"): 1, ("p1", "p3"): 5, ("p2", "p3"): 4})


def test_matrix_validation():
    with pytest.raises(ValidationError):
        DissimilarityMatrix(("a", "b"), ((0, 1), (2, 0)))
    with pytest.raises(ValidationError):
        DissimilarityMatrix(("a", "b"), ((0, -1), (-1, 0)))
    with pytest.raises(ValidationError):
        DissimilarityMatrix(("a", "b"), ((1, 1), (1, 0)))
    with pytest.raises(ValidationError):
        DissimilarityMatrix(("a", "a"), ((0, 1), (1, 0)))


def test_single_point_has_no_merges():
    dend = build_dendrogram(matrix(["only"], {}))
    assert dend.merges == ()
    assert cut_dendrogram(dend, 1) == [("only",)]


def test_three_point_single_linkage_merge_order():
    dend = build_dendrogram(THREE, Linkage.SINGLE)
    assert dend.merges == (
        type(dend.merges[0])(("p1",), ("p2",), 1),
        type(dend.merges[0])(("p1", "p2"), ("p3",), 4),
    )


def test_three_point_complete_linkage_second_height():
    dend = build_dendrogram(THREE, Linkage.COMPLETE)
    assert dend.merges[0].height == 1
    assert dend.merges[1].height == 5


def test_three_point_average_linkage():
    dend = build_dendrogram(THREE, Linkage.AVERAGE)
    assert dend.merges[1].height == Fraction(9, 2)


def test_cut_extremes_and_forced_two_blocks():
    dend = build_dendrogram(THREE)
    assert cut_dendrogram(dend, 1) == [("p1", "p2", "p3")]
    assert cut_dendrogram(dend, 3) == [("p1",), ("p2",), ("p3",)]
    assert cut_dendrogram(dend, 2) == [("p1", "p2"), ("p3",)]
    with pytest.raises(ValidationError):
        cut_dendrogram(dend, 0)
    with pytest.raises(ValidationError):
        cut_dendrogram(dend, 4)


def random_matrix(rng, n):
    ids = [f"x{i}" for i in range(n)]
    entries = {
        (ids[i], ids[j]): rng.randint(1, 50)
        for i in range(n)
        for j in range(i + 1, n)
    }
    return matrix(ids, entries)


def _mst_edge_weights(m):
    """Prim's algorithm as an independent oracle."""
    n = len(m.ids)
    if n <= 1:
        return []
    in_tree = {0}
    weights = []
    while len(in_tree) < n:
        best = min(
            (m.d[i][j], j)
            for i in in_tree
            for j in range(n)
            if j not in in_tree
        )
        weights.append(best[0])
        in_tree.add(best[1])
    return sorted(weights)


def test_single_linkage_heights_equal_mst_edge_weights():
    rng = random.Random(71)
    for _ in range(50):
        m = random_matrix(rng, rng.randint(2, 10))
        dend = build_dendrogram(m, Linkage.SINGLE)
        assert sorted(mg.height for mg in dend.merges) == _mst_edge_weights(m)


@pytest.mark.parametrize("linkage", list(Linkage))
def test_merge_heights_nondecreasing(linkage):
    rng = random.Random(73)
    for _ in range(30):
        m = random_matrix(rng, rng.randint(2, 9))
        heights = [mg.height for mg in build_dendrogram(m, linkage).merges]
        assert heights == sorted(heights)


@pytest.mark.parametrize("linkage", list(Linkage))
def test_every_cut_is_a_partition(linkage):
    rng = random.Random(79)
    for _ in range(20):
        n = rng.randint(1, 9)
        m = random_matrix(rng, n)
        dend = build_dendrogram(m, linkage)
        for k in range(1, n + 1):
            blocks = cut_dendrogram(dend, k)
            assert len(blocks) == k
            flat = [x for b in blocks for x in b]
            assert sorted(flat) == sorted(m.ids)
            assert len(set(flat)) == len(flat)


def distinct_matrix(rng, n):
    # distinct pairwise distances so documented tie-breaks never fire
    ids = [f"x{i}" for i in range(n)]
    weights = rng.sample(range(1, 1000), n * (n - 1) // 2)
    pairs = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)]
    return matrix(ids, dict(zip(pairs, weights)))


def test_relabeling_permutes_but_does_not_restructure():
    rng = random.Random(83)
    for _ in range(20):
        n = rng.randint(2, 8)
        m = distinct_matrix(rng, n)
        mapping = {f"x{i}": f"y{(i + 3) % n}" for i in range(n)}
        perm = [m.ids.index(x) for x in m.ids]
        ids2 = tuple(mapping[x] for x in m.ids)
        m2 = DissimilarityMatrix(ids2, m.d)
        d1 = build_dendrogram(m, Linkage.SINGLE)
        d2 = build_dendrogram(m2, Linkage.SINGLE)
        relabeled = sorted(
            tuple(sorted(mapping[x] for x in mg.left + mg.right))
            for mg in d1.merges
        )
        original = sorted(
            tuple(sorted(mg.left + mg.right)) for mg in d2.merges
        )
        assert relabeled == original


def test_from_points_euclidean():
    m = DissimilarityMatrix.from_points(
        ["a", "b", "c"], [[0, 0], [3, 4], [0, 1]]
    )
    assert m.value("a", "b") == pytest.approx(5.0, abs=1e-9)
    assert m.value("a", "c") == pytest.approx(1.0, abs=1e-9)
    build_dendrogram(m)
