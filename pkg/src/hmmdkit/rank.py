"""Multicriteria ranking of alternatives into ordinal priority groups.

Four methods: additive utility, Pareto layers, outranking with
concordance/discordance thresholds, and closeness to the ideal point.
Every method yields dense priorities (1 = best) plus a method-specific
score where higher is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    TOLERANCE,
    CriteriaFrame,
    EstimateVector,
    Number,
    ValidationError,
    as_frac,
    dominates,
    normalize_estimates,
    pareto_layers,
)

DEFAULT_CONCORDANCE = Fraction(3, 5)
DEFAULT_DISCORDANCE = Fraction(2, 5)


@dataclass(frozen=True)
class RankingInstance:
    frame: CriteriaFrame
    alternatives: tuple[tuple[str, EstimateVector], ...]

    def __post_init__(self) -> None:
        alts = tuple(self.alternatives)
        object.__setattr__(self, "alternatives", alts)
        if not alts:
            raise ValidationError("a ranking instance needs at least one alternative")
        ids = [a for a, _ in alts]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate alternative ids: {ids}")
        for aid, est in alts:
            if not est.conforms(self.frame):
                raise ValidationError(
                    f"alternative {aid!r}: {len(est)} estimates for "
                    f"{len(self.frame)} criteria"
                )

    @property
    def ids(self) -> list[str]:
        return [a for a, _ in self.alternatives]


@dataclass(frozen=True)
class RankingResult:
    priorities: dict[str, int]
    scores: dict[str, Number]
    method: str


def _dense_priorities(scored: dict[str, Number]) -> dict[str, int]:
    """Dense priorities by descending score; scores within tolerance tie."""
    order = sorted(scored, key=lambda a: (-scored[a], a))
    priorities: dict[str, int] = {}
    level = 0
    prev: Number | None = None
    for aid in order:
        s = scored[aid]
        if prev is None or prev - s > TOLERANCE:
            level += 1
            prev = s
        priorities[aid] = level
    return priorities


def _normalized(inst: RankingInstance) -> list[EstimateVector]:
    return normalize_estimates(inst.frame, [est for _, est in inst.alternatives])


def rank_utility(inst: RankingInstance) -> RankingResult:
    """Weighted sum of normalized estimates."""
    norm = _normalized(inst)
    weights = inst.frame.weights
    scores = {
        aid: sum((w * v for w, v in zip(weights, row)), Fraction(0))
        for (aid, _), row in zip(inst.alternatives, norm)
    }
    return RankingResult(_dense_priorities(scores), scores, "utility")


def rank_pareto_layers(inst: RankingInstance) -> RankingResult:
    """Priority = index of the Pareto layer the alternative falls into."""
    norm = _normalized(inst)
    layers = pareto_layers(norm, dominates)
    priorities = {aid: layer for (aid, _), layer in zip(inst.alternatives, layers)}
    scores = {aid: -layer for aid, layer in priorities.items()}
    return RankingResult(priorities, scores, "pareto")


def _strongly_connected(n: int, edge: list[list[bool]]) -> list[list[int]]:
    """Components via transitive closure; fine at ranking scale."""
    reach = [row[:] for row in edge]
    for i in range(n):
        reach[i][i] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    comp_of = [-1] * n
    comps: list[list[int]] = []
    for i in range(n):
        if comp_of[i] >= 0:
            continue
        members = [j for j in range(n) if reach[i][j] and reach[j][i]]
        for j in members:
            comp_of[j] = len(comps)
        comps.append(members)
    return comps


def rank_outranking(
    inst: RankingInstance,
    p: Number = DEFAULT_CONCORDANCE,
    q: Number = DEFAULT_DISCORDANCE,
) -> RankingResult:
    """Concordance/discordance outranking on normalized estimates.

    An edge a -> b is drawn when the concordance C(a,b) (total weight of
    criteria where a is at least as good; ties count fully) reaches p and
    the discordance D(a,b) (largest normalized amount by which b beats a)
    stays within q. Cycles collapse into one priority group; priority is
    the topological layer of the group, sources first.
    """
    p, q = as_frac(p), as_frac(q)
    if not 0 <= p <= 1:
        raise ValidationError(f"concordance threshold p={p} outside [0, 1]")
    if not 0 <= q <= 1:
        raise ValidationError(f"discordance threshold q={q} outside [0, 1]")
    norm = _normalized(inst)
    weights = inst.frame.weights
    n = len(norm)
    edge = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            conc = sum(
                (w for w, a, b in zip(weights, norm[i], norm[j]) if a >= b),
                Fraction(0),
            )
            disc = max(
                (b - a for a, b in zip(norm[i], norm[j])), default=Fraction(0)
            )
            disc = max(disc, Fraction(0))
            edge[i][j] = conc >= p and disc <= q
    comps = _strongly_connected(n, edge)
    comp_of = {i: c for c, members in enumerate(comps) for i in members}
    preds: list[set[int]] = [set() for _ in comps]
    for i in range(n):
        for j in range(n):
            if edge[i][j] and comp_of[i] != comp_of[j]:
                preds[comp_of[j]].add(comp_of[i])
    layer = [0] * len(comps)
    pending = set(range(len(comps)))
    while pending:
        ready = [c for c in pending if all(d not in pending for d in preds[c])]
        for c in ready:
            layer[c] = 1 + max((layer[d] for d in preds[c]), default=0)
        pending -= set(ready)
    priorities = {
        aid: layer[comp_of[i]] for i, (aid, _) in enumerate(inst.alternatives)
    }
    scores = {aid: -lvl for aid, lvl in priorities.items()}
    return RankingResult(priorities, scores, "outranking")


def rank_ideal_point(inst: RankingInstance) -> RankingResult:
    """Relative closeness to the componentwise ideal of the normalized set."""
    norm = _normalized(inst)
    cols = list(zip(*(row.values for row in norm)))
    ideal = [max(c) for c in cols]
    anti = [min(c) for c in cols]
    scores: dict[str, float] = {}
    for (aid, _), row in zip(inst.alternatives, norm):
        d_plus = math.sqrt(sum(float(i - v) ** 2 for i, v in zip(ideal, row)))
        d_minus = math.sqrt(sum(float(v - a) ** 2 for a, v in zip(anti, row)))
        total = d_plus + d_minus
        scores[aid] = 0.5 if total == 0 else d_minus / total
    return RankingResult(_dense_priorities(scores), scores, "ideal")
