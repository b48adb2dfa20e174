import math
import random
from fractions import Fraction

import pytest

from hmmdkit.core import (
    Criterion,
    CriteriaFrame,
    EstimateVector,
    ValidationError,
    dominates,
    equal_weight_frame,
    normalize_estimates,
)
from hmmdkit.rank import (
    RankingInstance,
    rank_ideal_point,
    rank_outranking,
    rank_pareto_layers,
    rank_utility,
)

ALL_METHODS = [rank_utility, rank_pareto_layers, rank_outranking, rank_ideal_point]


def make_instance(frame, alts):
    return RankingInstance(frame, tuple((a, EstimateVector(v)) for a, v in alts))


def random_instance(rng, n_alts=None, n_crit=None):
    k = n_crit or rng.randint(1, 4)
    n = n_alts or rng.randint(2, 8)
    frame = equal_weight_frame(k)
    alts = [(f"a{i}", [rng.randint(0, 5) for _ in range(k)]) for i in range(n)]
    return make_instance(frame, alts)


def test_utility_symmetry_tie():
    inst = make_instance(
        equal_weight_frame(2), [("a", [1, 1]), ("b", [1, 0]), ("c", [0, 1])]
    )
    res = rank_utility(inst)
    assert res.priorities == {"a": 1, "b": 2, "c": 2}


def test_utility_degenerate_weights_rank_by_first_criterion():
    frame = CriteriaFrame((Criterion("x", weight=1), Criterion("y", weight=0)))
    inst = make_instance(frame, [("a", [3, 0]), ("b", [1, 9]), ("c", [2, 9])])
    res = rank_utility(inst)
    assert res.priorities == {"a": 1, "c": 2, "b": 3}


def test_utility_matches_hand_computed_weighted_sums():
    # oracle: direct arithmetic on normalized values with weights (0.3, 0.7)
    frame = CriteriaFrame(
        (Criterion("u", weight=Fraction(3, 10)), Criterion("v", weight=Fraction(7, 10)))
    )
    data = [("a", [10, 0]), ("b", [0, 10]), ("c", [10, 10]), ("d", [5, 5])]
    inst = make_instance(frame, data)
    res = rank_utility(inst)
    expected_scores = {
        "a": Fraction(3, 10),
        "b": Fraction(7, 10),
        "c": Fraction(1),
        "d": Fraction(1, 2),
    }
    assert res.scores == expected_scores
    assert res.priorities == {"c": 1, "b": 2, "d": 3, "a": 4}


def test_pareto_single_alternative():
    inst = make_instance(equal_weight_frame(2), [("only", [1, 2])])
    assert rank_pareto_layers(inst).priorities == {"only": 1}


def test_pareto_chain_and_incomparable():
    inst = make_instance(
        equal_weight_frame(2), [("a", [3, 3]), ("b", [3, 1]), ("c", [1, 1])]
    )
    assert rank_pareto_layers(inst).priorities == {"a": 1, "b": 2, "c": 3}
    inst2 = make_instance(equal_weight_frame(2), [("a", [3, 1]), ("b", [1, 3])])
    assert rank_pareto_layers(inst2).priorities == {"a": 1, "b": 1}


def test_pareto_layer1_equals_brute_force_front():
    rng = random.Random(23)
    for _ in range(60):
        inst = random_instance(rng, n_alts=rng.randint(1, 12))
        res = rank_pareto_layers(inst)
        norm = normalize_estimates(inst.frame, [e for _, e in inst.alternatives])
        front = {
            aid
            for i, (aid, _) in enumerate(inst.alternatives)
            if not any(dominates(norm[j], norm[i]) for j in range(len(norm)) if j != i)
        }
        assert {a for a, p in res.priorities.items() if p == 1} == front


def test_outranking_thresholds_validated():
    inst = make_instance(equal_weight_frame(1), [("a", [1]), ("b", [2])])
    with pytest.raises(ValidationError):
        rank_outranking(inst, p=2, q=0)
    with pytest.raises(ValidationError):
        rank_outranking(inst, p=1, q=-1)


def test_outranking_dominant_row_wins():
    inst = make_instance(
        equal_weight_frame(3),
        [("best", [5, 5, 5]), ("b", [1, 4, 2]), ("c", [0, 5, 1])],
    )
    for p, q in [(0, 0), (1, 0), (1, 1), (Fraction(3, 5), Fraction(2, 5))]:
        res = rank_outranking(inst, p=p, q=q)
        assert res.priorities["best"] == 1


def test_outranking_identical_alternatives_share_priority():
    inst = make_instance(
        equal_weight_frame(2), [("a", [2, 3]), ("b", [2, 3]), ("c", [0, 0])]
    )
    res = rank_outranking(inst)
    assert res.priorities["a"] == res.priorities["b"] == 1


def _oracle_outranking_layers(inst, p, q):
    """Independent path: explicit C/D matrices, reachability SCC, peeling."""
    norm = normalize_estimates(inst.frame, [e for _, e in inst.alternatives])
    w = inst.frame.weights
    n = len(norm)
    edges = set()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = sum(wk for wk, a, b in zip(w, norm[i], norm[j]) if a >= b)
            d = max([b - a for a, b in zip(norm[i], norm[j])] + [Fraction(0)])
            if c >= p and d <= q:
                edges.add((i, j))

    def reaches(s, t):
        seen, stack = set(), [s]
        while stack:
            u = stack.pop()
            if u == t:
                return True
            for v in range(n):
                if (u, v) in edges and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    comp = {}
    for i in range(n):
        comp[i] = frozenset(
            j for j in range(n) if (reaches(i, j) and reaches(j, i)) or i == j
        )
    layers = {}
    remaining = set(comp.values())
    level = 1
    while remaining:
        sources = {
            c
            for c in remaining
            if not any(
                (i, j) in edges
                for other in remaining
                if other != c
                for i in other
                for j in c
            )
        }
        for c in sources:
            layers[c] = level
        remaining -= sources
        level += 1
    return {inst.ids[i]: layers[comp[i]] for i in range(n)}


def test_outranking_matches_oracle_on_four_alternatives():
    frame = equal_weight_frame(2)
    inst = make_instance(
        frame, [("a", [4, 4]), ("b", [4, 0]), ("c", [0, 4]), ("d", [1, 1])]
    )
    p, q = Fraction(3, 5), Fraction(2, 5)
    res = rank_outranking(inst, p=p, q=q)
    assert res.priorities == _oracle_outranking_layers(inst, p, q)


def test_outranking_matches_oracle_on_random_instances():
    rng = random.Random(5)
    for _ in range(40):
        inst = random_instance(rng)
        p = Fraction(rng.randint(0, 10), 10)
        q = Fraction(rng.randint(0, 10), 10)
        res = rank_outranking(inst, p=p, q=q)
        assert res.priorities == _oracle_outranking_layers(inst, p, q)


def test_ideal_point_extremes():
    inst = make_instance(
        equal_weight_frame(2), [("top", [9, 9]), ("low", [0, 0]), ("mid", [9, 0])]
    )
    res = rank_ideal_point(inst)
    assert res.scores["top"] == pytest.approx(1.0, abs=1e-9)
    assert res.scores["low"] == pytest.approx(0.0, abs=1e-9)
    assert res.priorities["top"] == 1


def test_ideal_point_asymmetric_triangle_matches_distance_oracle():
    inst = make_instance(
        equal_weight_frame(2), [("a", [1, 0]), ("b", [0, 1]), ("c", ["0.6", "0.6"])]
    )
    res = rank_ideal_point(inst)
    # oracle: direct distance arithmetic on the normalized triangle
    assert res.scores["a"] == pytest.approx(0.5, abs=1e-9)
    assert res.scores["b"] == pytest.approx(0.5, abs=1e-9)
    d_plus = math.sqrt(2 * 0.4**2)
    d_minus = math.sqrt(2 * 0.6**2)
    assert res.scores["c"] == pytest.approx(d_minus / (d_plus + d_minus), abs=1e-9)
    assert res.scores["c"] == pytest.approx(0.6, abs=1e-9)
    assert res.priorities == {"c": 1, "a": 2, "b": 2}


def test_all_identical_alternatives_score_half_in_ideal_point():
    inst = make_instance(equal_weight_frame(2), [("a", [3, 3]), ("b", [3, 3])])
    res = rank_ideal_point(inst)
    assert res.scores == {"a": 0.5, "b": 0.5}
    assert res.priorities == {"a": 1, "b": 1}


@pytest.mark.parametrize("method", ALL_METHODS)
def test_dominance_implies_no_worse_priority(method):
    rng = random.Random(31)
    for _ in range(30):
        inst = random_instance(rng)
        norm = normalize_estimates(inst.frame, [e for _, e in inst.alternatives])
        res = method(inst)
        ids = inst.ids
        for i in range(len(ids)):
            for j in range(len(ids)):
                if i != j and dominates(norm[i], norm[j]):
                    if method is rank_pareto_layers:
                        assert res.priorities[ids[i]] < res.priorities[ids[j]]
                    else:
                        assert res.priorities[ids[i]] <= res.priorities[ids[j]]


@pytest.mark.parametrize("method", ALL_METHODS)
def test_priorities_are_dense_and_score_consistent(method):
    rng = random.Random(37)
    for _ in range(25):
        inst = random_instance(rng)
        res = method(inst)
        levels = set(res.priorities.values())
        assert levels == set(range(1, max(levels) + 1))
        for a in res.priorities:
            for b in res.priorities:
                if res.scores[a] > res.scores[b]:
                    assert res.priorities[a] <= res.priorities[b]


@pytest.mark.parametrize("method", ALL_METHODS)
def test_alternative_order_never_matters(method):
    rng = random.Random(41)
    for _ in range(20):
        inst = random_instance(rng)
        shuffled = list(inst.alternatives)
        rng.shuffle(shuffled)
        inst2 = RankingInstance(inst.frame, tuple(shuffled))
        assert method(inst).priorities == method(inst2).priorities


def test_equal_weight_utility_invariant_under_criterion_reordering():
    rng = random.Random(43)
    for _ in range(20):
        k = rng.randint(2, 4)
        frame = equal_weight_frame(k)
        alts = [(f"a{i}", [rng.randint(0, 9) for _ in range(k)]) for i in range(6)]
        perm = list(range(k))
        rng.shuffle(perm)
        swapped = [(a, [v[p] for p in perm]) for a, v in alts]
        r1 = rank_utility(make_instance(frame, alts))
        r2 = rank_utility(make_instance(frame, swapped))
        assert r1.priorities == r2.priorities
