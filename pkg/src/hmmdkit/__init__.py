"""Multicriteria ranking, combinatorial selection, and hierarchical
morphological synthesis toolkit."""

from .assign import (
    AssignmentInstance,
    AssignmentSolution,
    assign_exact,
    assign_greedy,
    assign_pareto,
)
from .cluster import (
    Dendrogram,
    DissimilarityMatrix,
    Linkage,
    build_dendrogram,
    cut_dendrogram,
)
from .core import (
    Best,
    Criterion,
    CriteriaFrame,
    Direction,
    EstimateVector,
    GuardExceeded,
    InfeasibleError,
    OrdinalScale,
    ValidationError,
    dominates,
    equal_weight_frame,
    normalize_estimates,
)
from .frameworks import (
    ImprovementPart,
    ImprovementSpec,
    IntegrationNode,
    PairActions,
    PipelineOptions,
    Stage,
    ThreeSetSpec,
    Trajectory,
    TrajectoryOptions,
    TrajectorySpec,
    design_trajectory,
    evaluate_integration_tree,
    plan_improvement,
    run_three_set_pipeline,
)
from .morph import (
    ComposeOptions,
    CompositeDecision,
    DesignAlternative,
    MorphNode,
    MorphSystem,
    QualityVector,
    compose_node,
    n_dominates,
    priorities_from_quality,
    quality_vector,
    synthesize_tree,
    synthesize_tree_trace,
)
from .rank import (
    RankingInstance,
    RankingResult,
    rank_ideal_point,
    rank_outranking,
    rank_pareto_layers,
    rank_utility,
)
from .route import (
    Tour,
    TspInstance,
    tsp_brute_force,
    tsp_nearest_neighbor,
    tsp_two_opt,
)
from .select import (
    Group,
    GroupRule,
    Item,
    KnapsackInstance,
    MckpInstance,
    SelectionSolution,
    knapsack_exact,
    knapsack_greedy,
    mckp_exact_dp,
    mckp_greedy,
    scalarize,
)

__version__ = "0.1.0"
