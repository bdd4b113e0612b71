"""Closed-form second-stage weight solvers and aggregation.

Both solvers share the same shape: per-cell rank coefficients divided by the
expert and attribute ranking products, normalized through the objective value
``z*``.  The ordinal solver uses harmonic tail sums as coefficients; the
generalized solver consumes per-cell utility vectors from the first stage.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DecompositionUnsupported, UtilityShapeError
from .lpcheck import _harmonic_tail


@dataclass(frozen=True)
class WeightSolution:
    """Optimal decision weights for one problem.

    ``rank_weights[(i, j)]`` holds the per-rank weights of a cell;
    ``weights[i, j, k]`` the mapped per-alternative weights (0 where the
    alternative is excluded in that cell).  Aggregates are marginal sums.
    """

    problem: object
    objective: float
    rank_weights: dict
    weights: np.ndarray
    expert_weights: np.ndarray
    attribute_weights: np.ndarray
    alternative_weights: np.ndarray
    utilities: dict = None
    exclusions_flagged: bool = False

    def __post_init__(self):
        self.weights.setflags(write=False)
        self.expert_weights.setflags(write=False)
        self.attribute_weights.setflags(write=False)
        self.alternative_weights.setflags(write=False)

    def expert_attribute_weights(self):
        """Matrix of per-(expert, attribute) weights, summed over alternatives."""
        return self.weights.sum(axis=2)

    def expert_alternative_weights(self):
        """Matrix of per-(expert, alternative) weights, summed over attributes."""
        return self.weights.sum(axis=1)


def _assemble(problem, coefficients, utilities=None):
    """Common assembly: z*, per-rank weights, mapping, aggregation."""
    denom = 0.0
    for i, j in problem.cells():
        ts = float(problem.expert_ranks[i] * problem.attribute_ranks[i, j])
        c = problem.cell_counts(i, j)
        denom += (c * coefficients[(i, j)]).sum() / ts
    z_star = 1.0 / denom

    rank_weights = {}
    weights = np.zeros((problem.n_experts, problem.n_attributes, problem.n_alternatives))
    for i, j in problem.cells():
        ts = float(problem.expert_ranks[i] * problem.attribute_ranks[i, j])
        w = coefficients[(i, j)] * z_star / ts
        rank_weights[(i, j)] = w
        ranks = problem.alternative_ranks[i, j]
        present = ranks > 0
        weights[i, j, present] = w[ranks[present] - 1]

    excluded = bool((problem.alternative_ranks == 0).any())
    return WeightSolution(
        problem=problem,
        objective=z_star,
        rank_weights=rank_weights,
        weights=weights,
        expert_weights=weights.sum(axis=(1, 2)),
        attribute_weights=weights.sum(axis=(0, 2)),
        alternative_weights=weights.sum(axis=(0, 1)),
        utilities=utilities,
        exclusions_flagged=excluded,
    )


def solve_opa(problem):
    """Closed-form ordinal weights from rankings alone.

    Cell coefficients are the harmonic tail sums over ranks, which makes the
    per-alternative weights proportional to rank order centroid weights when
    expert and attribute importance is equal.
    """
    coefs = {(i, j): _harmonic_tail(int(problem.max_rank[i, j]))
             for i, j in problem.cells()}
    return _assemble(problem, coefs)


def solve_gopa(problem, utilities, tol=1e-8):
    """Closed-form weights for elicited per-cell utilities.

    Parameters
    ----------
    problem : RankingProblem
    utilities : dict
        ``(i, j) -> ndarray`` of per-rank utilities, normalized to sum 1 and
        nonincreasing in rank.

    Raises
    ------
    UtilityShapeError
        If a cell's utilities are missing, not normalized, or increase with
        rank beyond ``tol``.
    """
    coefs = {}
    for i, j in problem.cells():
        kij = int(problem.max_rank[i, j])
        if (i, j) not in utilities:
            raise UtilityShapeError(f"missing utilities for cell ({i}, {j})")
        u = np.asarray(utilities[(i, j)], dtype=float)
        if u.shape != (kij,):
            raise UtilityShapeError(
                f"cell ({i}, {j}) expects {kij} utilities, got shape {u.shape}")
        if abs(u.sum() - 1.0) > tol:
            raise UtilityShapeError(f"cell ({i}, {j}) utilities sum to {u.sum():.12g}")
        if (u < -tol).any():
            raise UtilityShapeError(f"cell ({i}, {j}) utilities must be nonnegative")
        if kij > 1 and (np.diff(u) > tol).any():
            raise UtilityShapeError(
                f"cell ({i}, {j}) utilities increase with rank; pass them post-orientation")
        coefs[(i, j)] = kij * u
    return _assemble(problem, coefs, utilities={k: np.array(v) for k, v in utilities.items()})


def aggregate(solution):
    """Marginal weight sums: (experts, attributes, alternatives)."""
    return (solution.expert_weights, solution.attribute_weights,
            solution.alternative_weights)


def decompose(solution):
    """Split per-(expert, rank) weights into expert weight times net utility.

    Returns
    -------
    (expert_weights, net_utilities)
        ``net_utilities[i, r - 1]`` multiplied by ``expert_weights[i]``
        reproduces the weight that expert ``i`` contributes at rank ``r``
        (summed over attributes).  For the ordinal solver the net utility
        equals the rank order centroid weight, independent of the expert.

    Raises
    ------
    DecompositionUnsupported
        If any cell has missing or duplicate ranks.
    """
    problem = solution.problem
    if problem.has_missing.any() or problem.has_duplicates.any():
        raise DecompositionUnsupported("decomposition requires gap-free rankings")
    size = problem.n_alternatives
    per_rank = np.zeros((problem.n_experts, size))
    for (i, j), w in solution.rank_weights.items():
        per_rank[i] += w
    expert = solution.expert_weights
    net = per_rank / expert[:, None]
    return expert.copy(), net
