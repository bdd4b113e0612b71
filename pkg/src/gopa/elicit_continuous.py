"""First-stage utility elicitation for continuous prospects.

The elicited density minimizes KL divergence to a risk-preference target
subject to constraints on its cumulative distribution.  Because every
constraint acts through the CDF at integer ranks, the optimum rescales the
target by a constant factor on each segment between breakpoints, so the
problem reduces to solving for segment masses.  A damped Newton iteration on
the dual multipliers (one per constraint) recovers them.

Constraint conventions for a cell context in continuous prospects: a ratio or
difference stored at rank ``r`` relates the cumulative utilities F(r-1) and
F(r); a lower bound at rank ``r`` fixes F(r) (equality mode, the default) or
floors it (inequality mode).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import BreakpointError, InfeasibleContext, NumericFailure
from .lpcheck import LinearProgram, solve_lp

_RESIDUAL_TOL = 1e-12


def breakpoints(ctx, size):
    """Sorted distinct breakpoints of a cell's elicited density, endpoints included."""
    pts = {0.0, float(size)}
    for rank, _ in ctx.ratio:
        pts.update((rank - 1.0, float(rank)))
    for rank, _ in ctx.absdiff:
        pts.update((rank - 1.0, float(rank)))
    for rank, _ in ctx.lowerbound:
        pts.add(float(rank))
    pts = {p for p in pts if 0.0 < p < size} | {0.0, float(size)}
    return np.asarray(sorted(pts))


@dataclass(frozen=True)
class PiecewiseDensity:
    """Solved cell density: the target rescaled segment by segment.

    ``scales[s]`` multiplies the target density on the open segment between
    ``breakpoints[s]`` and ``breakpoints[s + 1]``; ``masses[s]`` is the
    utility mass carried by that segment.  ``multipliers`` and ``log_scale``
    expose the dual solution for diagnostics.
    """

    target: object
    breakpoints: np.ndarray
    scales: np.ndarray
    masses: np.ndarray
    multipliers: np.ndarray
    log_scale: float

    def __post_init__(self):
        self.breakpoints.setflags(write=False)
        self.scales.setflags(write=False)
        self.masses.setflags(write=False)
        self.multipliers.setflags(write=False)

    @property
    def size(self):
        return self.target.size

    def segment_index(self, x):
        idx = np.searchsorted(self.breakpoints, x, side="left") - 1
        return np.clip(idx, 0, self.scales.size - 1)

    def value(self, x):
        """Density value(s) at ``x``."""
        x = np.asarray(x, dtype=float)
        return self.scales[self.segment_index(x)] * self.target.value(x)

    def cdf(self, x):
        """Cumulative utility on [0, x]."""
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        if np.ndim(x) == 0:
            s = int(self.segment_index(x))
            return cum[s] + self.scales[s] * self.target.integral(self.breakpoints[s], x)
        x = np.asarray(x, dtype=float)
        return np.array([self.cdf(t) for t in x])


def _cumulative_rows(ctx, pts):
    """Constraint rows over segment masses; returns (rows, rhs, is_bound)."""
    n_seg = pts.size - 1

    def cum(rank):
        row = np.zeros(n_seg)
        stop = np.searchsorted(pts, float(rank))
        row[:stop] = 1.0
        return row

    rows, rhs, is_bound = [], [], []
    for rank, alpha in ctx.ratio:
        rows.append(cum(rank) - alpha * cum(rank - 1))
        rhs.append(0.0)
        is_bound.append(False)
    for rank, beta in ctx.absdiff:
        rows.append(cum(rank) - cum(rank - 1))
        rhs.append(beta)
        is_bound.append(False)
    for rank, gamma in ctx.lowerbound:
        rows.append(cum(rank))
        rhs.append(gamma)
        is_bound.append(True)
    if rows:
        return np.vstack(rows), np.asarray(rhs), np.asarray(is_bound)
    return np.zeros((0, n_seg)), np.zeros(0), np.zeros(0, dtype=bool)


def _feasibility_check(rows, rhs, is_bound, bound_mode, n_seg):
    senses = ["="] * rows.shape[0]
    if bound_mode == "inequality":
        for i in np.flatnonzero(is_bound):
            senses[i] = ">="
    lhs = np.vstack([rows, np.ones(n_seg)])
    lp = LinearProgram(objective=np.zeros(n_seg), lhs=lhs,
                       rhs=np.concatenate([rhs, [1.0]]),
                       senses=tuple(senses) + ("=",))
    if solve_lp(lp).status != "optimal":
        raise InfeasibleContext("cumulative constraints admit no density")


def _masses(q_exponent, m):
    e = q_exponent - q_exponent.max()
    q = m * np.exp(e)
    return q / q.sum()


def _dual_merit(lam, m, rows, rhs):
    """Convex dual merit: log-partition of the rescaled masses plus lam @ rhs."""
    e = -(rows.T @ lam)
    shift = e.max()
    return float(np.log(np.exp(e - shift) @ m) + shift + lam @ rhs)


def _dual_newton(m, rows, rhs, max_iter=400):
    n_con = rows.shape[0]
    lam = np.zeros(n_con)
    best = None
    for _ in range(max_iter):
        q = _masses(-rows.T @ lam, m)
        res = rows @ q - rhs
        gap = np.abs(res).max()
        if best is None or gap < best[0]:
            best = (gap, q, lam.copy())
        if gap <= _RESIDUAL_TOL:
            return q, lam
        aq = rows @ q
        hess = (rows * q) @ rows.T - np.outer(aq, aq)  # covariance, PSD
        ridge = 0.0
        while True:
            try:
                step = np.linalg.solve(hess + ridge * np.eye(n_con), res)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and res @ step > 0:
                break
            ridge = max(1e-12, 10.0 * ridge) if ridge else 1e-12
            if ridge > 1e3:
                step = res.copy()  # gradient direction as a last resort
                break
        if gap <= 1e-6:
            # inside the quadratic basin the merit is flat at float resolution,
            # so line-searching it stalls; take plain Newton steps instead
            lam = lam + step
            continue
        decrease = res @ step
        phi0 = _dual_merit(lam, m, rows, rhs)
        alpha = 1.0
        while alpha > 1e-15:
            lam_try = lam + alpha * step
            if _dual_merit(lam_try, m, rows, rhs) <= phi0 - 1e-4 * alpha * decrease:
                lam = lam_try
                break
            alpha *= 0.5
        else:
            break
    gap, q, lam = best
    if gap <= 1e-10:
        return q, lam
    if n_con == 1:
        return _dual_bisection(m, rows, rhs)
    raise NumericFailure("dual iteration for the density did not converge")


def _dual_bisection(m, rows, rhs):
    def res(lam):
        q = _masses(-rows[0] * lam, m)
        return rows[0] @ q - rhs[0]

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if res(lo) > 0 and res(hi) < 0:
            break
        lo *= 2.0
        hi *= 2.0
        if hi > 1e8:
            raise NumericFailure("single-constraint bracket not found")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if res(mid) > 0:
            lo = mid
        else:
            hi = mid
    lam = np.array([0.5 * (lo + hi)])
    q = _masses(-rows.T @ lam, m)
    if np.abs(rows @ q - rhs).max() > 1e-9:
        raise NumericFailure("single-constraint bisection stalled")
    return q, lam


def elicit_continuous(target, ctx, size, bound_mode="equality"):
    """Elicit the piecewise-scaled utility density of one continuous cell.

    Parameters
    ----------
    target : TargetDensity
        Normalized risk-preference density on [0, size].
    ctx : CellContext
        Validated preference constraints (continuous conventions).
    size : int
        Number of ranks in the cell; must match ``target.size``.
    bound_mode : str
        ``"equality"`` pins each lower bound's cumulative value exactly;
        ``"inequality"`` treats it as a floor and activates it only when
        needed.

    Returns
    -------
    PiecewiseDensity

    Raises
    ------
    InfeasibleContext, NumericFailure
    """
    if target.size != size:
        raise ValueError(f"target covers [0, {target.size}], cell has size {size}")
    if bound_mode not in ("equality", "inequality"):
        raise ValueError(f"unknown bound mode {bound_mode!r}")
    pts = breakpoints(ctx, size)
    m = np.array([target.integral(a, b) for a, b in zip(pts[:-1], pts[1:])])
    rows, rhs, is_bound = _cumulative_rows(ctx, pts)
    _feasibility_check(rows, rhs, is_bound, bound_mode, m.size)

    if bound_mode == "equality" or not is_bound.any():
        q, lam = _solve_with_zero_guard(m, rows, rhs)
    else:
        q, lam = _solve_bounds_as_floors(m, rows, rhs, is_bound)

    if (q < 1e-9).any():
        senses = ["="] * rows.shape[0]
        if bound_mode == "inequality":
            for i in np.flatnonzero(is_bound):
                senses[i] = ">="
        _certify_positive_masses(m, rows, rhs, tuple(senses), np.flatnonzero(q < 1e-9))
    scales = q / m
    if (scales <= 0).any() or not np.isfinite(scales).all():
        raise InfeasibleContext("constraints force zero density on a segment")
    log_scale = float(-1.0 - np.log(scales[0]) - (rows.T @ lam)[0]) if rows.size \
        else float(-1.0)
    return PiecewiseDensity(target=target, breakpoints=pts, scales=scales,
                            masses=q, multipliers=lam, log_scale=log_scale)


def _certify_positive_masses(m, rows, rhs, senses, suspects):
    """Raise when some suspect segment cannot carry positive mass at all."""
    n_seg = m.size
    lhs = np.vstack([rows, np.ones(n_seg)])
    rhs_full = np.concatenate([rhs, [1.0]])
    for s in suspects:
        obj = np.zeros(n_seg)
        obj[s] = 1.0
        res = solve_lp(LinearProgram(objective=obj, lhs=lhs, rhs=rhs_full,
                                     senses=senses + ("=",)))
        if res.status == "optimal" and res.value <= 1e-9:
            raise InfeasibleContext("constraints force zero density on a segment")


def _solve_with_zero_guard(m, rows, rhs):
    if rows.shape[0] == 0:
        return m.copy(), np.zeros(0)
    try:
        return _dual_newton(m, rows, rhs)
    except NumericFailure:
        # a segment may be forced to zero mass; certify before giving up
        _certify_positive_masses(m, rows, rhs, ("=",) * rows.shape[0],
                                 range(m.size))
        raise


def _solve_bounds_as_floors(m, rows, rhs, is_bound):
    """Active-set loop for floor-type bounds; other rows stay equalities."""
    always = np.flatnonzero(~is_bound)
    bounds = np.flatnonzero(is_bound)
    active = set()
    for _ in range(2 * bounds.size + 2):
        idx = list(always) + sorted(active)
        sub_rows = rows[idx]
        sub_rhs = rhs[idx]
        if sub_rows.shape[0] == 0:
            q, sub_lam = m.copy(), np.zeros(0)
        else:
            q, sub_lam = _solve_with_zero_guard(m, sub_rows, sub_rhs)
        violated = [b for b in bounds if b not in active and rows[b] @ q < rhs[b] - 1e-12]
        if violated:
            active.update(violated)
            continue
        # a floor pushing the CDF up must carry a nonpositive multiplier
        lam_map = dict(zip(idx, sub_lam))
        wrong = [b for b in active if lam_map[b] > 1e-9]
        if wrong:
            active.discard(max(wrong, key=lambda b: lam_map[b]))
            continue
        lam = np.zeros(rows.shape[0])
        for pos, val in lam_map.items():
            lam[pos] = val
        return q, lam
    raise NumericFailure("bound active-set loop did not settle")


def risk_preference(density, x):
    """Arrow-Pratt coefficient ``-d/dx ln u(x)`` of a solved density.

    Defined off breakpoints only, where it coincides with the target's
    coefficient because the density is a constant rescaling of the target on
    each open segment.
    """
    x = float(x)
    if np.abs(density.breakpoints - x).min() <= 1e-12:
        raise BreakpointError(f"risk preference is undefined at breakpoint x = {x:g}")
    if not 0.0 < x < density.size:
        raise BreakpointError(f"x = {x:g} outside (0, {density.size})")
    return density.target.risk_coefficient(x)


def cumulative_utilities(density, orientation="reversed"):
    """Per-rank utilities induced by a solved density.

    Rank ``r`` accumulates the density of the reflected argument over
    ``[0, r]``; the vector is normalized over ranks.  The literal orientation
    is increasing in rank, so the default ``reversed`` orientation flips it to
    honor rank dominance (rank 1 gets the largest value).  With a uniform
    density the reversed vector equals the rank-sum surrogate weights.
    """
    size = density.size
    tail = np.array([1.0 - density.cdf(size - r) for r in range(1, size + 1)])
    literal = tail / tail.sum()
    if orientation == "literal":
        return literal
    if orientation == "reversed":
        return literal[::-1].copy()
    raise ValueError(f"unknown orientation {orientation!r}")
