"""Composite schemes chaining the base solvers.

run_three_set_pipeline: cluster two element sets, assign the clusters,
then pick one action per matched element pair under a shared budget.
design_trajectory: one decision per stage scored like a morphological
composition over inter-stage compatibilities. evaluate_integration_tree:
bottom-up ordinal evaluation through total lookup tables. plan_improvement:
one improvement action per system part within a budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .assign import AssignmentInstance, assign_greedy
from .cluster import DissimilarityMatrix, Linkage, build_dendrogram, cut_dendrogram
from .core import (
    CriteriaFrame,
    EstimateVector,
    GuardExceeded,
    Number,
    OrdinalScale,
    ValidationError,
    as_frac,
    guard_limit,
    non_dominated,
)
from .morph import DEFAULT_COMPAT_SCALE, QualityVector, n_dominates
from .select import (
    MCKP_TABLE_GUARD,
    Group,
    GroupRule,
    Item,
    MckpInstance,
    SelectionSolution,
    mckp_exact_dp,
    mckp_greedy,
)

TRAJECTORY_GUARD = 10**6


# ------------------------------------------------------------------ pipeline


@dataclass(frozen=True)
class PairActions:
    element1: str
    element2: str
    items: tuple[Item, ...]


@dataclass(frozen=True)
class ThreeSetSpec:
    set1: DissimilarityMatrix
    set2: DissimilarityMatrix
    k1: int
    k2: int
    frame: CriteriaFrame  # governs correspondence vectors
    correspondence: tuple[tuple[EstimateVector, ...], ...]  # |set1| x |set2|
    action_frame: CriteriaFrame  # governs action value vectors
    actions: tuple[PairActions, ...]
    budget: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "budget", as_frac(self.budget))
        object.__setattr__(
            self, "correspondence", tuple(tuple(r) for r in self.correspondence)
        )
        object.__setattr__(self, "actions", tuple(self.actions))
        n1, n2 = len(self.set1.ids), len(self.set2.ids)
        if not 1 <= self.k1 <= n1:
            raise ValidationError(f"k1={self.k1} outside 1..{n1}")
        if not 1 <= self.k2 <= n2:
            raise ValidationError(f"k2={self.k2} outside 1..{n2}")
        if len(self.correspondence) != n1 or any(
            len(row) != n2 for row in self.correspondence
        ):
            raise ValidationError(f"correspondence must be {n1}x{n2}")
        for row in self.correspondence:
            for v in row:
                if not v.conforms(self.frame):
                    raise ValidationError("correspondence vector length mismatch")
        seen = set()
        for pa in self.actions:
            if pa.element1 not in self.set1.ids or pa.element2 not in self.set2.ids:
                raise ValidationError(
                    f"actions for unknown pair ({pa.element1!r}, {pa.element2!r})"
                )
            if (pa.element1, pa.element2) in seen:
                raise ValidationError(
                    f"duplicate action group for ({pa.element1!r}, {pa.element2!r})"
                )
            seen.add((pa.element1, pa.element2))
            for it in pa.items:
                if not it.value.conforms(self.action_frame):
                    raise ValidationError(f"action {it.id!r}: value length mismatch")


@dataclass(frozen=True)
class PipelineReport:
    clusters1: tuple[tuple[str, ...], ...]
    clusters2: tuple[tuple[str, ...], ...]
    assignment: tuple[tuple[int, int], ...]  # (cluster1 index, cluster2 index)
    selected_actions: tuple[tuple[str, str, str, Fraction], ...]
    total_cost: Fraction
    objective: Fraction
    mckp_method: str


@dataclass(frozen=True)
class PipelineOptions:
    linkage: Linkage = Linkage.SINGLE
    weights: Sequence[Number] | None = None
    action_weights: Sequence[Number] | None = None


def _mean_vector(vectors: list[EstimateVector]) -> EstimateVector:
    n = len(vectors)
    return EstimateVector(
        [sum(col, Fraction(0)) / n for col in zip(*(v.values for v in vectors))]
    )


def _solve_mckp(inst: MckpInstance, weights) -> tuple[SelectionSolution, str]:
    integral = inst.budget.denominator == 1 and all(
        it.cost.denominator == 1 for g in inst.groups for it in g.items
    )
    if integral:
        cap = min(int(inst.budget), sum(int(it.cost) for g in inst.groups for it in g.items))
        if len(inst.groups) * (cap + 1) <= guard_limit(MCKP_TABLE_GUARD):
            return mckp_exact_dp(inst, weights), "exact_dp"
    return mckp_greedy(inst, weights), "greedy"


def run_three_set_pipeline(
    spec: ThreeSetSpec, options: PipelineOptions | None = None
) -> PipelineReport:
    """Cluster both sets, match the clusters, then buy actions per pair.

    Cluster-level correspondence is the arithmetic mean of the element
    vectors across the cluster pair. Only element pairs inside matched
    clusters receive actions; they form one multiple-choice group each and
    are solved jointly under the budget (exact DP when the data is
    integral and within the table guard).
    """
    options = options or PipelineOptions()
    clusters1 = tuple(cut_dendrogram(build_dendrogram(spec.set1, options.linkage), spec.k1))
    clusters2 = tuple(cut_dendrogram(build_dendrogram(spec.set2, options.linkage), spec.k2))
    idx1 = {e: i for i, e in enumerate(spec.set1.ids)}
    idx2 = {e: i for i, e in enumerate(spec.set2.ids)}
    cells = tuple(
        tuple(
            _mean_vector(
                [
                    spec.correspondence[idx1[e1]][idx2[e2]]
                    for e1 in c1
                    for e2 in c2
                ]
            )
            for c2 in clusters2
        )
        for c1 in clusters1
    )
    agents = tuple(f"c1_{i}" for i in range(len(clusters1)))
    positions = tuple(f"c2_{j}" for j in range(len(clusters2)))
    matching = assign_greedy(
        AssignmentInstance(agents, positions, cells, spec.frame),
        weights=options.weights,
    )
    assignment = tuple(
        sorted(
            (agents.index(a), positions.index(p)) for a, p in matching.pairs
        )
    )
    by_pair = {(pa.element1, pa.element2): pa for pa in spec.actions}
    groups = []
    item_origin: dict[str, tuple[str, str, str]] = {}
    for i, j in assignment:
        for e1 in clusters1[i]:
            for e2 in clusters2[j]:
                pa = by_pair.get((e1, e2))
                if pa is None:
                    continue
                items = tuple(
                    Item(f"{e1}::{e2}::{it.id}", it.value, it.cost) for it in pa.items
                )
                for it, orig in zip(items, pa.items):
                    item_origin[it.id] = (e1, e2, orig.id)
                groups.append(Group(f"{e1}::{e2}", items))
    if groups:
        inst = MckpInstance(
            frame=spec.action_frame,
            groups=tuple(groups),
            budget=spec.budget,
        )
        solution, method = _solve_mckp(inst, options.action_weights)
        cost_of = {it.id: it.cost for g in inst.groups for it in g.items}
        selected = tuple(
            sorted((*item_origin[i], cost_of[i]) for i in solution.chosen)
        )
        total, objective = solution.total_cost, solution.objective
    else:
        selected, total, objective, method = (), Fraction(0), Fraction(0), "none"
    return PipelineReport(
        clusters1=clusters1,
        clusters2=clusters2,
        assignment=assignment,
        selected_actions=selected,
        total_cost=total,
        objective=objective,
        mckp_method=method,
    )


# ---------------------------------------------------------------- trajectory


@dataclass(frozen=True)
class Stage:
    time: Fraction
    decisions: tuple[tuple[str, int], ...]  # (decision id, priority)

    def __post_init__(self) -> None:
        object.__setattr__(self, "time", as_frac(self.time))
        object.__setattr__(self, "decisions", tuple(self.decisions))
        if not self.decisions:
            raise ValidationError("a stage needs at least one decision")


@dataclass(frozen=True)
class TrajectorySpec:
    stages: tuple[Stage, ...]
    compat: dict[tuple[str, str], int]  # (earlier decision, later decision)
    compat_scale: OrdinalScale = DEFAULT_COMPAT_SCALE

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "compat", dict(self.compat))
        if not self.stages:
            raise ValidationError("a trajectory spec needs at least one stage")
        ids = [d for s in self.stages for d, _ in s.decisions]
        if len(set(ids)) != len(ids):
            raise ValidationError("decision ids must be unique across stages")
        stage_of = {
            d: i for i, s in enumerate(self.stages) for d, _ in s.decisions
        }
        for (a, b), v in self.compat.items():
            if a not in stage_of or b not in stage_of:
                raise ValidationError(f"compatibility for unknown decisions ({a!r}, {b!r})")
            if stage_of[a] >= stage_of[b]:
                raise ValidationError(
                    f"compatibility ({a!r}, {b!r}) must run from an earlier stage "
                    "to a later one"
                )
            if not self.compat_scale.contains(v):
                raise ValidationError(f"compatibility ({a!r}, {b!r}): {v} out of scale")

    def priorities(self) -> dict[str, int]:
        return {d: p for s in self.stages for d, p in s.decisions}


@dataclass(frozen=True)
class Trajectory:
    path: tuple[str, ...]  # one decision id per stage
    quality: QualityVector


@dataclass(frozen=True)
class TrajectoryOptions:
    all_pairs: bool = False
    max_combinations: int | None = None

    def limit(self) -> int:
        if self.max_combinations is not None:
            return self.max_combinations
        return guard_limit(TRAJECTORY_GUARD)


def design_trajectory(
    spec: TrajectorySpec, options: TrajectoryOptions | None = None
) -> list[Trajectory]:
    """Dominance-maximal stage-decision sequences.

    Quality mirrors morphological composition: w is the worst compatibility
    between consecutive choices (all stage pairs with all_pairs), counts
    collect the priorities of the chosen decisions.
    """
    options = options or TrajectoryOptions()
    total = 1
    for s in spec.stages:
        total *= len(s.decisions)
    limit = options.limit()
    if total > limit:
        raise GuardExceeded(f"{total} trajectories exceed guard {limit}")
    prio = spec.priorities()
    max_priority = max(max(prio.values()), 3)
    hi = spec.compat_scale.hi

    def link(a: str, b: str) -> int:
        v = spec.compat.get((a, b))
        if v is None:
            raise ValidationError(
                f"missing compatibility between stage decisions {a!r} and {b!r}"
            )
        return v

    results = []
    for combo in itertools.product(*(s.decisions for s in spec.stages)):
        path = tuple(d for d, _ in combo)
        if options.all_pairs:
            pairs = list(itertools.combinations(path, 2))
        else:
            pairs = list(zip(path, path[1:]))
        w = min((link(a, b) for a, b in pairs), default=hi)
        counts = [0] * max_priority
        for d in path:
            counts[prio[d] - 1] += 1
        results.append(Trajectory(path, QualityVector(w, tuple(counts))))
    front = non_dominated(results, lambda x, y: n_dominates(x.quality, y.quality))
    width = max(len(t.quality.counts) for t in front)
    return sorted(
        front,
        key=lambda t: (
            -t.quality.w,
            tuple(-c for c in t.quality.cumulative(width)),
            t.path,
        ),
    )


# ----------------------------------------------------------- integration tree


@dataclass(frozen=True)
class IntegrationNode:
    id: str
    scale: OrdinalScale
    children: tuple["IntegrationNode", ...] = ()
    table: dict[tuple[int, ...], int] | None = None
    estimate: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if self.children:
            if self.table is None:
                raise ValidationError(f"internal node {self.id!r} needs a table")
            if self.estimate is not None:
                raise ValidationError(f"internal node {self.id!r} must not carry an estimate")
            object.__setattr__(
                self, "table", {tuple(k): v for k, v in self.table.items()}
            )
            for key, v in self.table.items():
                if len(key) != len(self.children):
                    raise ValidationError(
                        f"node {self.id!r}: table tuple {key} has wrong arity"
                    )
                if not self.scale.contains(v):
                    raise ValidationError(
                        f"node {self.id!r}: table output {v} out of scale"
                    )
        else:
            if self.estimate is None:
                raise ValidationError(f"leaf {self.id!r} needs an estimate")
            if self.table is not None:
                raise ValidationError(f"leaf {self.id!r} must not carry a table")
            if not self.scale.contains(self.estimate):
                raise ValidationError(
                    f"leaf {self.id!r}: estimate {self.estimate} outside "
                    f"[{self.scale.lo}, {self.scale.hi}]"
                )


@dataclass(frozen=True)
class IntegrationResult:
    root_estimate: int
    trace: dict[str, int]


def evaluate_integration_tree(tree: IntegrationNode) -> IntegrationResult:
    """Bottom-up table lookups; the trace records every node's estimate."""
    trace: dict[str, int] = {}
    seen: set[str] = set()

    def walk(node: IntegrationNode) -> int:
        if node.id in seen:
            raise ValidationError(f"duplicate node id {node.id!r}")
        seen.add(node.id)
        if not node.children:
            trace[node.id] = node.estimate
            return node.estimate
        inputs = tuple(walk(c) for c in node.children)
        if inputs not in node.table:
            raise ValidationError(
                f"node {node.id!r}: no table entry for child estimates {inputs}"
            )
        value = node.table[inputs]
        trace[node.id] = value
        return value

    return IntegrationResult(root_estimate=walk(tree), trace=trace)


def check_tables_total(tree: IntegrationNode) -> None:
    """Verify each internal table covers the full product of child scales."""
    if not tree.children:
        return
    ranges = [range(c.scale.lo, c.scale.hi + 1) for c in tree.children]
    for key in itertools.product(*ranges):
        if key not in tree.table:
            raise ValidationError(
                f"node {tree.id!r}: table misses child estimates {key}"
            )
    for c in tree.children:
        check_tables_total(c)


# ---------------------------------------------------------------- improvement


@dataclass(frozen=True)
class ImprovementPart:
    id: str
    actions: tuple[Item, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))


@dataclass(frozen=True)
class ImprovementSpec:
    frame: CriteriaFrame
    parts: tuple[ImprovementPart, ...]
    budget: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "budget", as_frac(self.budget))
        if not self.parts:
            raise ValidationError("an improvement spec needs at least one part")
        ids = [p.id for p in self.parts]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate part ids")


@dataclass(frozen=True)
class ImprovementPlan:
    by_part: dict[str, str | None]  # part id -> chosen action id
    solution: SelectionSolution
    method: str


def plan_improvement(
    spec: ImprovementSpec, weights: Sequence[Number] | None = None
) -> ImprovementPlan:
    """At most one improvement action per part within the budget."""
    groups = []
    origin: dict[str, tuple[str, str]] = {}
    for part in spec.parts:
        if not part.actions:
            continue
        items = tuple(
            Item(f"{part.id}::{a.id}", a.value, a.cost) for a in part.actions
        )
        for it, a in zip(items, part.actions):
            origin[it.id] = (part.id, a.id)
        groups.append(Group(part.id, items))
    if not groups:
        raise ValidationError("no actions to select from")
    inst = MckpInstance(
        frame=spec.frame,
        groups=tuple(groups),
        budget=spec.budget,
        group_rule=GroupRule.AT_MOST_ONE,
    )
    solution, method = _solve_mckp(inst, weights)
    by_part: dict[str, str | None] = {p.id: None for p in spec.parts}
    for item_id in solution.chosen:
        part_id, action_id = origin[item_id]
        by_part[part_id] = action_id
    return ImprovementPlan(by_part=by_part, solution=solution, method=method)
