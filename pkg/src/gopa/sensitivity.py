"""Expert-ranking permutation experiments and descriptive statistics."""

from dataclasses import dataclass, replace
from itertools import permutations
from math import sqrt

import numpy as np

from .exceptions import DegenerateError, SampleSizeError, TooManyExperts
from .solver import solve_gopa, solve_opa

MAX_PERMUTED_EXPERTS = 8


def permute_experts(problem):
    """Yield one problem per permutation of the expert ranks ``1..I``.

    Attribute and alternative rankings are left untouched.  Permutations are
    generated in lexicographic order, so the sweep is deterministic.
    """
    n = problem.n_experts
    if n > MAX_PERMUTED_EXPERTS:
        raise TooManyExperts(f"{n}! scenarios exceed the guard of {MAX_PERMUTED_EXPERTS}!")
    for perm in permutations(range(1, n + 1)):
        yield replace(problem, expert_ranks=np.asarray(perm, dtype=int))


@dataclass(frozen=True)
class ScenarioStats:
    """Descriptive statistics of one weight quantity across scenarios."""

    mean: float
    skewness: float
    kurtosis: float
    cv: float
    minimum: float
    maximum: float

    def to_dict(self):
        return {"mean": self.mean, "skewness": self.skewness,
                "kurtosis": self.kurtosis, "cv": self.cv,
                "min": self.minimum, "max": self.maximum}


def describe(samples):
    """Bias-corrected descriptive statistics of a sample.

    Skewness uses the adjusted Fisher-Pearson estimator
    ``g1 sqrt(n(n-1)) / (n-2)`` and kurtosis the sample excess form
    ``((n+1) g2 + 6)(n-1) / ((n-2)(n-3))``; the coefficient of variation uses
    the (n-1)-denominator standard deviation.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 4:
        raise SampleSizeError(f"need at least 4 samples, got {n}")
    mean = x.mean()
    dev = x - mean
    m2 = (dev ** 2).mean()
    if m2 == 0.0:
        return ScenarioStats(mean=float(mean), skewness=0.0, kurtosis=0.0,
                             cv=0.0, minimum=float(x.min()), maximum=float(x.max()))
    g1 = (dev ** 3).mean() / m2 ** 1.5
    g2 = (dev ** 4).mean() / m2 ** 2 - 3.0
    skew = g1 * sqrt(n * (n - 1.0)) / (n - 2.0)
    kurt = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0))
    std = sqrt(m2 * n / (n - 1.0))
    if mean == 0.0:
        raise DegenerateError("coefficient of variation undefined for zero mean")
    return ScenarioStats(mean=float(mean), skewness=float(skew), kurtosis=float(kurt),
                         cv=float(std / mean), minimum=float(x.min()), maximum=float(x.max()))


def permutation_stats(problem, utilities=None):
    """Solve every expert-rank permutation and describe the weight outcomes.

    Utilities (when given) come from the first stage, which does not depend on
    expert ranks, so they are reused across scenarios.  Returns a dict with
    ``experts``, ``attributes``, and ``alternatives`` lists of
    ``(id, ScenarioStats)`` plus the raw per-scenario weight arrays.
    """
    experts = []
    attributes = []
    alternatives = []
    for scenario in permute_experts(problem):
        if utilities is None:
            sol = solve_opa(scenario)
        else:
            sol = solve_gopa(scenario, utilities)
        experts.append(sol.expert_weights)
        attributes.append(sol.attribute_weights)
        alternatives.append(sol.alternative_weights)
    experts = np.vstack(experts)
    attributes = np.vstack(attributes)
    alternatives = np.vstack(alternatives)
    return {
        "experts": [(eid, describe(experts[:, i]))
                    for i, eid in enumerate(problem.expert_ids)],
        "attributes": [(aid, describe(attributes[:, j]))
                       for j, aid in enumerate(problem.attribute_ids)],
        "alternatives": [(mid, describe(alternatives[:, k]))
                         for k, mid in enumerate(problem.alternative_ids)],
        "raw": {"experts": experts, "attributes": attributes,
                "alternatives": alternatives},
    }
