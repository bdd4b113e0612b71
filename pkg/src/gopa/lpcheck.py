"""Small dense-tableau simplex solver and LP builders used for verification.

The production path computes weights in closed form; this module rebuilds the
same programs as explicit LPs so the closed forms can be cross-checked, and it
realizes the two-stage efficiency program.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, InfeasibleStage2, NumericFailure

PIVOT_TOL = 1e-9


@dataclass(frozen=True)
class LinearProgram:
    """A maximization LP: max c @ x subject to row senses and x >= 0 or free."""

    objective: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    senses: tuple
    free: tuple = None      # per-variable flags, None = all nonnegative
    names: tuple = None     # optional variable names

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        a = np.atleast_2d(np.asarray(self.lhs, dtype=float))
        b = np.asarray(self.rhs, dtype=float)
        if a.shape != (b.size, c.size):
            raise DimensionError(
                f"lhs shape {a.shape} incompatible with {b.size} rows, {c.size} vars")
        if len(self.senses) != b.size:
            raise DimensionError(f"{len(self.senses)} senses for {b.size} rows")
        if any(s not in ("<=", "=", ">=") for s in self.senses):
            raise DimensionError(f"unknown sense in {self.senses}")
        if self.free is not None and len(self.free) != c.size:
            raise DimensionError(f"{len(self.free)} free flags for {c.size} vars")
        if not (np.isfinite(c).all() and np.isfinite(a).all() and np.isfinite(b).all()):
            raise DimensionError("entries must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "lhs", a)
        object.__setattr__(self, "rhs", b)


@dataclass(frozen=True)
class LPResult:
    status: str            # "optimal" | "infeasible" | "unbounded"
    value: float = None
    x: np.ndarray = None


def solve_lp(lp, tol=PIVOT_TOL, max_iter=None):
    """Solve an LP with the Big-M dense-tableau simplex under Bland's rule.

    Bland's pivoting (lowest eligible index) makes the run deterministic and
    cycle-free.  The returned vertex is refined against the original data by
    re-solving the final basis, so Big-M rounding does not leak into results.

    Returns
    -------
    LPResult
    """
    c0 = lp.objective
    a0 = lp.lhs
    b0 = lp.rhs
    m = b0.size
    free = np.zeros(c0.size, dtype=bool) if lp.free is None else np.asarray(lp.free, dtype=bool)

    # split free variables into positive/negative parts
    split = np.flatnonzero(free)
    c = np.concatenate([c0, -c0[split]])
    a = np.hstack([a0, -a0[:, split]])
    n = c.size

    senses = list(lp.senses)
    b = b0.copy()
    a = a.copy()
    for i in range(m):
        if b[i] < 0:
            a[i] *= -1.0
            b[i] = -b[i]
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    # slack / surplus / artificial columns
    cols = [a]
    basis = [-1] * m
    slack_index = {}
    art_cols = []
    extra = 0
    for i, sense in enumerate(senses):
        if sense == "<=":
            col = np.zeros((m, 1))
            col[i, 0] = 1.0
            cols.append(col)
            basis[i] = n + extra
            slack_index[n + extra] = i
            extra += 1
        elif sense == ">=":
            col = np.zeros((m, 1))
            col[i, 0] = -1.0
            cols.append(col)
            slack_index[n + extra] = i
            extra += 1
    art_start = n + extra
    for i, sense in enumerate(senses):
        if basis[i] == -1:  # '=' rows and '>=' rows need an artificial
            col = np.zeros((m, 1))
            col[i, 0] = 1.0
            cols.append(col)
            basis[i] = n + extra
            art_cols.append(n + extra)
            extra += 1
    tab_a = np.hstack(cols)
    total = n + extra

    big_m = 1e6 * max(1.0, np.abs(c).max(initial=0.0), np.abs(b).max(initial=0.0),
                      np.abs(a).max(initial=0.0))
    c_ext = np.zeros(total)
    c_ext[:n] = c
    c_ext[art_start:] = -big_m

    tab = np.hstack([tab_a, b[:, None]])
    if max_iter is None:
        max_iter = 200 * (m + total) + 5000

    for _ in range(max_iter):
        cb = c_ext[basis]
        reduced = cb @ tab[:, :total] - c_ext
        entering = -1
        for j in range(total):
            if reduced[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        ratios = np.full(m, np.inf)
        col = tab[:, entering]
        positive = col > tol
        ratios[positive] = tab[positive, total] / col[positive]
        best = ratios.min()
        if not np.isfinite(best):
            return LPResult(status="unbounded")
        leaving = -1
        for i in range(m):  # Bland: lowest basis-variable index among ties
            if positive[i] and ratios[i] <= best + tol:
                if leaving < 0 or basis[i] < basis[leaving]:
                    leaving = i
        pivot = tab[leaving, entering]
        tab[leaving] /= pivot
        for i in range(m):
            if i != leaving and abs(tab[i, entering]) > 0:
                tab[i] -= tab[i, entering] * tab[leaving]
        basis[leaving] = entering
    else:
        raise NumericFailure("simplex iteration budget exhausted")

    x_tab = np.zeros(total)
    x_tab[basis] = tab[:, total]
    if any(bi >= art_start and x_tab[bi] > 1e-7 for bi in basis):
        return LPResult(status="infeasible")

    # refine the vertex on the original data to strip Big-M rounding
    basis_mat = tab_a[:, basis]
    try:
        xb = np.linalg.solve(basis_mat, b)
    except np.linalg.LinAlgError:
        xb, *_ = np.linalg.lstsq(basis_mat, b, rcond=None)
    if np.isfinite(xb).all() and np.abs(basis_mat @ xb - b).max() <= 1e-6:
        x_tab = np.zeros(total)
        x_tab[basis] = xb

    x = x_tab[:c0.size].copy()
    x[split] -= x_tab[c0.size:n]
    return LPResult(status="optimal", value=float(c0 @ x), x=x)


# --- builders for the weight programs ---------------------------------------


def _harmonic_tail(kij):
    """tail[r - 1] = sum of 1/h for h = r .. kij."""
    return np.cumsum(1.0 / np.arange(kij, 0, -1.0))[::-1]


def cell_variable_names(problem):
    """Flat variable layout shared by the LP builders: all w cells, then z."""
    names = []
    for i, j in problem.cells():
        kij = int(problem.max_rank[i, j])
        eid, aid = problem.expert_ids[i], problem.attribute_ids[j]
        names.extend(f"w[{eid},{aid},r{r}]" for r in range(1, kij + 1))
    names.append("z")
    return tuple(names)


def _rank_rows(problem, coefficients):
    """Rows ``coef*z - t*s*w <= 0`` plus the weighted normalization row."""
    sizes = [int(problem.max_rank[i, j]) for i, j in problem.cells()]
    n_w = sum(sizes)
    n = n_w + 1
    rows = []
    offset = 0
    for (i, j), kij in zip(problem.cells(), sizes):
        ts = float(problem.expert_ranks[i] * problem.attribute_ranks[i, j])
        coefs = coefficients[(i, j)]
        for r in range(kij):
            row = np.zeros(n)
            row[offset + r] = -ts
            row[n_w] = coefs[r]
            rows.append(row)
        offset += kij
    norm = np.zeros(n)
    offset = 0
    for (i, j), kij in zip(problem.cells(), sizes):
        norm[offset:offset + kij] = problem.cell_counts(i, j)
        offset += kij
    lhs = np.vstack(rows + [norm])
    rhs = np.concatenate([np.zeros(len(rows)), [1.0]])
    senses = ("<=",) * len(rows) + ("=",)
    objective = np.zeros(n)
    objective[n_w] = 1.0
    free = (False,) * n_w + (True,)
    return LinearProgram(objective=objective, lhs=lhs, rhs=rhs, senses=senses,
                         free=free, names=cell_variable_names(problem))


def build_opa_lp(problem):
    """LP whose optimum matches the closed-form ranking weights."""
    coefs = {(i, j): _harmonic_tail(int(problem.max_rank[i, j]))
             for i, j in problem.cells()}
    return _rank_rows(problem, coefs)


def build_gopa_lp(problem, utilities):
    """LP for given per-cell utilities: rows ``K_ij * U_r * z <= t*s*w_r``."""
    coefs = {}
    for i, j in problem.cells():
        kij = int(problem.max_rank[i, j])
        u = np.asarray(utilities[(i, j)], dtype=float)
        if u.shape != (kij,):
            raise DimensionError(f"cell ({i},{j}) expects {kij} utilities, got {u.shape}")
        coefs[(i, j)] = kij * u
    return _rank_rows(problem, coefs)


@dataclass(frozen=True)
class EfficiencyCheck:
    objective: float
    rank_weights: dict       # (i, j) -> ndarray over ranks
    min_slack: float


def verify_efficiency(problem, z_star):
    """Solve the second-stage efficiency program at a first-stage optimum.

    Maximizes the total marginal slack subject to every marginal slack
    staying at or above ``z_star``.  Returns the stage-2 objective, the
    weights, and the minimum slack attained (which must equal ``z_star``
    for a genuine first-stage optimum).

    Raises
    ------
    InfeasibleStage2
        If no weights attain every slack >= ``z_star``.
    """
    sizes = [int(problem.max_rank[i, j]) for i, j in problem.cells()]
    n = sum(sizes)
    rows = []
    rhs = []
    offset = 0
    objective = np.zeros(n)
    for (i, j), kij in zip(problem.cells(), sizes):
        ts = float(problem.expert_ranks[i] * problem.attribute_ranks[i, j])
        objective[offset:offset + kij] = ts
        for r in range(1, kij + 1):
            row = np.zeros(n)
            if r < kij:
                row[offset + r - 1] = ts * r
                row[offset + r] = -ts * r
            else:
                row[offset + r - 1] = ts * kij
            rows.append(row)
            rhs.append(z_star)
        offset += kij
    norm = np.zeros(n)
    offset = 0
    for (i, j), kij in zip(problem.cells(), sizes):
        norm[offset:offset + kij] = problem.cell_counts(i, j)
        offset += kij
    lhs = np.vstack(rows + [norm])
    rhs = np.asarray(rhs + [1.0])
    senses = (">=",) * len(rows) + ("=",)
    lp = LinearProgram(objective=objective, lhs=lhs, rhs=rhs, senses=senses)
    res = solve_lp(lp)
    if res.status != "optimal":
        raise InfeasibleStage2(f"stage-2 program is {res.status} at z* = {z_star:g}")

    slacks = lhs[:-1] @ res.x
    weights = {}
    offset = 0
    for (i, j), kij in zip(problem.cells(), sizes):
        weights[(i, j)] = res.x[offset:offset + kij].copy()
        offset += kij
    return EfficiencyCheck(objective=res.value, rank_weights=weights,
                           min_slack=float(slacks.min()))
