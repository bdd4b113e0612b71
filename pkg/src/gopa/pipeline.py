"""End-to-end orchestration: validate, elicit per cell, solve, report."""

from dataclasses import dataclass

import numpy as np

from .elicit_continuous import cumulative_utilities, elicit_continuous
from .elicit_discrete import elicit_discrete
from .exceptions import InfeasibleContext, NumericFailure
from .model import load_document
from .solver import WeightSolution, solve_gopa, solve_opa
from .structures import surrogate_weights, target_density


def elicit_utilities(problem, context, structures, orientation="reversed",
                     bound_mode="equality"):
    """Run the first stage for every cell.

    Returns
    -------
    (utilities, densities)
        ``utilities`` maps ``(i, j)`` to the per-rank utility vector;
        ``densities`` holds the solved ``PiecewiseDensity`` of continuous
        cells for inspection.

    Errors from a cell are re-raised with the offending cell named.
    """
    utilities = {}
    densities = {}
    for i, j in problem.cells():
        eid = problem.expert_ids[i]
        aid = problem.attribute_ids[j]
        kij = int(problem.max_rank[i, j])
        ctx = context.cell(i, j)
        structure = structures.cell(i, j)
        try:
            if structure.is_discrete:
                target = surrogate_weights(structure, kij)
                utilities[(i, j)] = elicit_discrete(target, ctx, kij)
            else:
                density = elicit_continuous(target_density(structure, kij), ctx, kij,
                                            bound_mode=bound_mode)
                densities[(i, j)] = density
                utilities[(i, j)] = cumulative_utilities(density, orientation=orientation)
        except (InfeasibleContext, NumericFailure) as exc:
            raise type(exc)(f"cell ({eid}, {aid}): {exc}") from exc
    return utilities, densities


def solve_document(doc, method="gopa", orientation="reversed", bound_mode="equality"):
    """Validate a document and run the selected pipeline.

    ``method="opa"`` ignores contexts and structures and uses rankings alone;
    ``method="gopa"`` elicits utilities per cell first.

    Returns
    -------
    (solution, utilities, densities)
    """
    problem, context, structures = load_document(doc)
    if method == "opa":
        return solve_opa(problem), None, {}
    if method != "gopa":
        raise ValueError(f"unknown method {method!r}")
    utilities, densities = elicit_utilities(problem, context, structures,
                                            orientation=orientation, bound_mode=bound_mode)
    return solve_gopa(problem, utilities), utilities, densities


def solution_report(solution, method, orientation="reversed", bound_mode="equality"):
    """Serialize a solution into the report document consumed downstream."""
    p = solution.problem
    report = {
        "kind": "solution",
        "method": method,
        "orientation": orientation,
        "bound_mode": bound_mode,
        "objective": solution.objective,
        "ids": {
            "experts": list(p.expert_ids),
            "attributes": list(p.attribute_ids),
            "alternatives": list(p.alternative_ids),
        },
        "experts": dict(zip(p.expert_ids, solution.expert_weights.tolist())),
        "attributes": dict(zip(p.attribute_ids, solution.attribute_weights.tolist())),
        "alternatives": dict(zip(p.alternative_ids, solution.alternative_weights.tolist())),
        "cell_weights": {
            eid: {aid: {mid: float(solution.weights[i, j, k])
                        for k, mid in enumerate(p.alternative_ids)
                        if p.alternative_ranks[i, j, k] > 0}
                  for j, aid in enumerate(p.attribute_ids)}
            for i, eid in enumerate(p.expert_ids)
        },
        "rank_weights": {
            eid: {aid: solution.rank_weights[(i, j)].tolist()
                  for j, aid in enumerate(p.attribute_ids)}
            for i, eid in enumerate(p.expert_ids)
        },
        "flags": {
            "gap_free": bool(p.gap_free),
            "has_exclusions": bool(solution.exclusions_flagged),
            "weight_sums": {
                "experts": float(solution.expert_weights.sum()),
                "attributes": float(solution.attribute_weights.sum()),
                "alternatives": float(solution.alternative_weights.sum()),
            },
        },
    }
    if solution.utilities is not None:
        report["utilities"] = {
            p.expert_ids[i]: {p.attribute_ids[j]: u.tolist()
                              for (i2, j), u in sorted(solution.utilities.items())
                              if i2 == i}
            for i in range(p.n_experts)
        }
    return report


@dataclass(frozen=True)
class _Ids:
    expert_ids: tuple
    attribute_ids: tuple
    alternative_ids: tuple

    @property
    def n_experts(self):
        return len(self.expert_ids)

    @property
    def n_attributes(self):
        return len(self.attribute_ids)

    @property
    def n_alternatives(self):
        return len(self.alternative_ids)


def report_to_solution(report):
    """Rebuild a weight solution from a report document (for diagnostics)."""
    ids = report["ids"]
    shim = _Ids(tuple(ids["experts"]), tuple(ids["attributes"]), tuple(ids["alternatives"]))
    weights = np.zeros((shim.n_experts, shim.n_attributes, shim.n_alternatives))
    cells = report["cell_weights"]
    for i, eid in enumerate(shim.expert_ids):
        for j, aid in enumerate(shim.attribute_ids):
            for k, mid in enumerate(shim.alternative_ids):
                weights[i, j, k] = cells[eid][aid].get(mid, 0.0)
    return WeightSolution(
        problem=shim,
        objective=float(report["objective"]),
        rank_weights={},
        weights=weights,
        expert_weights=weights.sum(axis=(1, 2)),
        attribute_weights=weights.sum(axis=(0, 2)),
        alternative_weights=weights.sum(axis=(0, 1)),
    )
