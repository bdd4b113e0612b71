"""Independent oracles and input generators shared by the test modules.

The oracles deliberately avoid the production solve paths: the KL oracle is a
vectorized grid search over the feasible polytope, integrals come from scipy
quadrature, and concordance is evaluated from its defining sums.
"""

import numpy as np
import scipy.linalg

from gopa.elicit_discrete import discrete_constraint_system
from gopa.lpcheck import LinearProgram, solve_lp
from gopa.model import CellContext, validate_problem


def kl_objective(u, v):
    u = np.atleast_2d(u)
    terms = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0) / v), 0.0)
    return terms.sum(axis=1)


def _feasible_anchor(a_eq, b_eq, g, h, n):
    lhs = np.vstack([a_eq, g]) if g.size else a_eq
    rhs = np.concatenate([b_eq, h]) if g.size else b_eq
    senses = ("=",) * a_eq.shape[0] + (">=",) * g.shape[0]
    res = solve_lp(LinearProgram(objective=np.zeros(n), lhs=lhs, rhs=rhs, senses=senses))
    if res.status != "optimal":
        return None
    return res.x


def _coordinate_window(null, a_eq, b_eq, g, h, n):
    """Per-dimension bounds of the null-space coordinates over the polytope."""
    d = null.shape[1]
    lo = np.empty(d)
    hi = np.empty(d)
    lhs = np.vstack([a_eq, g]) if g.size else a_eq
    rhs = np.concatenate([b_eq, h]) if g.size else b_eq
    senses = ("=",) * a_eq.shape[0] + (">=",) * g.shape[0]
    u_p, *_ = np.linalg.lstsq(a_eq, b_eq, rcond=None)
    for i in range(d):
        # y_i = null[:, i] @ (U - u_p); optimize the linear proxy null[:, i] @ U
        for sign, store in ((1.0, hi), (-1.0, lo)):
            res = solve_lp(LinearProgram(objective=sign * null[:, i], lhs=lhs,
                                         rhs=rhs, senses=senses))
            if res.status != "optimal":
                store[i] = sign * 2.0
            else:
                store[i] = sign * (sign * null[:, i] @ res.x) - null[:, i] @ u_p
    return lo, hi


def grid_kl_minimum(target, ctx, size, resolution=1e-3, budget=300_000):
    """Grid-search the constrained KL minimum (independent of the solver).

    Equalities are eliminated exactly through a null-space parameterization;
    the remaining coordinates are swept on a shrinking grid until the step is
    below ``resolution``.  Returns ``(best objective, best point)`` or
    ``(None, None)`` when the polytope is empty.
    """
    v = np.asarray(target, dtype=float)
    v = v / v.sum()
    a_eq, b_eq, g, h = discrete_constraint_system(ctx, size)
    anchor = _feasible_anchor(a_eq, b_eq, g, h, size)
    if anchor is None:
        return None, None
    u_p, *_ = np.linalg.lstsq(a_eq, b_eq, rcond=None)
    null = scipy.linalg.null_space(a_eq)
    d = null.shape[1]
    if d == 0:
        return float(kl_objective(u_p, v)[0]), u_p

    def evaluate(ys):
        u = u_p[None, :] + ys @ null.T
        ok = (u >= -1e-9).all(axis=1)
        if g.size:
            ok &= (u @ g.T >= h[None, :] - 1e-9).all(axis=1)
        if not ok.any():
            return None, None
        u = np.clip(u[ok], 0.0, None)
        vals = kl_objective(u, v)
        best = np.argmin(vals)
        return float(vals[best]), ys[ok][best]

    lo, hi = _coordinate_window(null, a_eq, b_eq, g, h, size)
    anchor_y = null.T @ (anchor - u_p)
    lo = np.minimum(lo, anchor_y) - 1e-6
    hi = np.maximum(hi, anchor_y) + 1e-6
    pts_per_dim = max(5, min(int(budget ** (1.0 / d)), 4001))
    best_val, best_y = evaluate(anchor_y[None, :])
    for _ in range(12):
        axes = [np.linspace(lo[i], hi[i], pts_per_dim) for i in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        ys = np.stack([m.ravel() for m in mesh], axis=1)
        val, y = evaluate(ys)
        step = max((hi[i] - lo[i]) / (pts_per_dim - 1) for i in range(d))
        if val is not None and (best_val is None or val < best_val):
            best_val, best_y = val, y
        center = best_y if best_y is not None else 0.5 * (lo + hi)
        if step <= resolution:
            break
        lo = center - 1.5 * step
        hi = center + 1.5 * step
    u_best = np.clip(u_p + null @ best_y, 0.0, None) if best_y is not None else None
    return best_val, u_best


def kendall_bruteforce(ranks):
    """Concordance from its defining rank-sum deviations (no tie handling)."""
    r = np.asarray(ranks, dtype=float)
    n_raters, n_items = r.shape
    sums = r.sum(axis=0)
    s = ((sums - sums.sum() / n_items) ** 2).sum()
    return 12.0 * s / (n_raters ** 2 * (n_items ** 3 - n_items))


# --- random input generators -------------------------------------------------


def random_problem(rng, n_experts=None, n_attributes=None, n_alternatives=None,
                   irregular=False, expert_permutation=True):
    """A validated random problem; ``irregular`` allows gaps and duplicates."""
    n_e = n_experts or int(rng.integers(1, 4))
    n_a = n_attributes or int(rng.integers(1, 4))
    n_m = n_alternatives or int(rng.integers(2, 7))
    if expert_permutation:
        expert_ranks = rng.permutation(n_e) + 1
    else:
        expert_ranks = rng.integers(1, n_e + 2, size=n_e)
    experts = [{"id": f"E{i+1}", "rank": int(r)} for i, r in enumerate(expert_ranks)]
    attributes = [f"C{j+1}" for j in range(n_a)]
    alternatives = [f"A{k+1}" for k in range(n_m)]
    doc = {
        "experts": experts,
        "attributes": attributes,
        "alternatives": alternatives,
        "attribute_ranks": {
            e["id"]: {a: int(r) for a, r in zip(attributes, rng.permutation(n_a) + 1)}
            for e in experts
        },
        "alternative_ranks": {},
    }
    for e in experts:
        doc["alternative_ranks"][e["id"]] = {}
        for a in attributes:
            if irregular and rng.random() < 0.5:
                present = rng.choice(n_m, size=int(rng.integers(1, n_m + 1)), replace=False)
                cell = {alternatives[k]: int(rng.integers(1, n_m + 1)) for k in sorted(present)}
            else:
                cell = {alt: int(r) for alt, r in zip(alternatives, rng.permutation(n_m) + 1)}
            doc["alternative_ranks"][e["id"]][a] = cell
    return validate_problem(doc), doc


def random_discrete_context(rng, size, max_constraints=3):
    """A feasible random cell context, built around a hidden witness vector."""
    witness = np.sort(rng.random(size))[::-1] + 0.05
    witness = witness / witness.sum()
    ratio, absdiff, lowerbound = [], [], []
    used = {"ratio": set(), "absdiff": set(), "lowerbound": set()}
    for _ in range(int(rng.integers(0, max_constraints + 1))):
        kind = rng.choice(["ratio", "absdiff", "lowerbound"])
        if kind in ("ratio", "absdiff"):
            if size < 2:
                continue
            r = int(rng.integers(1, size))
            if r in used[kind] or witness[r] <= 0:
                continue
            used[kind].add(r)
            if kind == "ratio":
                ratio.append((r, float(witness[r - 1] / witness[r])))
            else:
                absdiff.append((r, float(witness[r - 1] - witness[r])))
        else:
            r = int(rng.integers(1, size + 1))
            if r in used[kind]:
                continue
            used[kind].add(r)
            lowerbound.append((r, float(witness[r - 1] * rng.uniform(0.2, 0.98))))
    return CellContext(ratio=tuple(sorted(ratio)), absdiff=tuple(sorted(absdiff)),
                       lowerbound=tuple(sorted(lowerbound))), witness


def random_continuous_context(rng, size, max_constraints=3):
    """A feasible random cell context in cumulative (continuous) conventions."""
    cuts = np.sort(rng.uniform(0.05, 0.95, size=size - 1)) if size > 1 else np.array([])
    cdf = np.concatenate([cuts, [1.0]])  # witness CDF at ranks 1..size
    ratio, absdiff, lowerbound = [], [], []
    used = {"ratio": set(), "absdiff": set(), "lowerbound": set()}
    for _ in range(int(rng.integers(0, max_constraints + 1))):
        kind = rng.choice(["ratio", "absdiff", "lowerbound"])
        if kind in ("ratio", "absdiff"):
            if size < 3:
                continue
            r = int(rng.integers(2, size))  # keep F(r-1) > 0 and r < size
            if r in used[kind]:
                continue
            used[kind].add(r)
            if kind == "ratio":
                ratio.append((r, float(cdf[r - 1] / cdf[r - 2])))
            else:
                absdiff.append((r, float(cdf[r - 1] - cdf[r - 2])))
        else:
            if size < 2:
                continue
            r = int(rng.integers(1, size))
            if r in used[kind]:
                continue
            used[kind].add(r)
            lowerbound.append((r, float(cdf[r - 1])))
    return CellContext(ratio=tuple(sorted(ratio)), absdiff=tuple(sorted(absdiff)),
                       lowerbound=tuple(sorted(lowerbound))), cdf


def random_utilities(rng, problem):
    """Random normalized nonincreasing per-cell utilities."""
    out = {}
    for i, j in problem.cells():
        kij = int(problem.max_rank[i, j])
        u = np.sort(rng.random(kij))[::-1] + 1e-3
        out[(i, j)] = u / u.sum()
    return out
