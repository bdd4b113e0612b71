"""Builders for the five-expert case fixture used by the acceptance suite."""

from types import MappingProxyType

import numpy as np

from gopa.model import PreferenceContext, StructureMap, validate_problem
from gopa.structures import UtilityStructure

from oracles import random_continuous_context, random_discrete_context

CASE_EXPERT_RANKS = {"E1": 3, "E2": 2, "E3": 4, "E4": 5, "E5": 1}

ALL_STRUCTURES = (
    UtilityStructure(kind="rs"),
    UtilityStructure(kind="ref"),
    UtilityStructure(kind="rr"),
    UtilityStructure(kind="sr"),
    UtilityStructure(kind="roc"),
    UtilityStructure(kind="uniform"),
    UtilityStructure(kind="neutral"),
    UtilityStructure(kind="hara", alpha=2.0, beta=1.0, gamma=1.5),
    UtilityStructure(kind="crra", alpha=1.0, gamma=0.5),
    UtilityStructure(kind="cara", a=0.6),
    UtilityStructure(kind="sshape", steepness=1.0),
)


def case_study_problem(seed=0, n_attributes=6, n_alternatives=10):
    """Five experts with priority E5 > E2 > E1 > E3 > E4, clean rankings,
    a different feasible context and structure mix per seed."""
    rng = np.random.default_rng(1000 + seed)
    experts = [{"id": e, "rank": r} for e, r in CASE_EXPERT_RANKS.items()]
    attributes = [f"C{j+1}" for j in range(n_attributes)]
    alternatives = [f"A{k+1}" for k in range(n_alternatives)]
    doc = {
        "experts": experts,
        "attributes": attributes,
        "alternatives": alternatives,
        "attribute_ranks": {
            e["id"]: {a: int(r) for a, r in
                      zip(attributes, rng.permutation(n_attributes) + 1)}
            for e in experts
        },
        "alternative_ranks": {
            e["id"]: {a: {m: int(r) for m, r in
                          zip(alternatives, rng.permutation(n_alternatives) + 1)}
                      for a in attributes}
            for e in experts
        },
    }
    problem = validate_problem(doc)

    cells = {}
    structures = {}
    order = rng.permutation(len(ALL_STRUCTURES))
    for n, (i, j) in enumerate(problem.cells()):
        structure = ALL_STRUCTURES[order[n % len(ALL_STRUCTURES)]]
        structures[(i, j)] = structure
        if structure.is_discrete:
            ctx, _ = random_discrete_context(rng, n_alternatives)
        else:
            ctx, _ = random_continuous_context(rng, n_alternatives)
        if not ctx.is_empty:
            cells[(i, j)] = ctx
    context = PreferenceContext(cells=MappingProxyType(cells))
    structure_map = StructureMap(default=UtilityStructure(kind="roc"),
                                 cells=MappingProxyType(structures))
    return problem, context, structure_map
