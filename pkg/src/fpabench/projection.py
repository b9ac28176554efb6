"""Joint gradient-step-plus-projection updates and a projection oracle.

The two learners update by a gradient step followed by a Euclidean
projection onto their polytope (bidding probabilities or thresholds).
Both projections have O(K) closed forms: a pooled block [m, i] around the
competing bid, a translated stretch (i, ell), and a saturated tail.

``project_oracle`` is an independent exact solver for the generic chain
polytope (monotone vector with per-coordinate box bounds), used as ground
truth for the closed forms.  It deliberately shares no code with them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .auction import clamp_probabilities, clamp_thresholds, check_probabilities, check_thresholds
from .distributions import ValueDistribution
from .grids import BidGrid, Grid

_SLACK = 1e-12  # comparison slack toward inclusion in the m / ell scans


@dataclass(frozen=True)
class ProjectionDiagnostics:
    """Shape of one closed-form update: pooled block [m, i], saturation from ell."""

    m: int
    ell: int
    x: float
    pooled_count: int


def _require_uniform(grid: Grid) -> float:
    if not isinstance(grid, BidGrid):
        raise TypeError("closed-form updates require a uniform bid grid")
    return grid.eps


def ga_step_probabilities(grid: Grid, F: ValueDistribution, p, i: int, eta: float):
    """One agile gradient-ascent round for the bidding-probability learner.

    Returns the projection of p + eta * grad onto the probability polytope,
    together with diagnostics.  The competing bid is b_i.
    """
    eps = _require_uniform(grid)
    if eta <= 0.0:
        raise ValueError("step size eta must be positive")
    check_probabilities(p, grid, F)
    K = grid.K
    bids = grid.bids
    step = eta * eps

    if i == 0:
        # every coordinate only pays more when raised: pure downward clamp
        out = [max(pj - step, 0.0) for pj in p]
        ell = next((j for j in range(1, K + 1) if p[j - 1] <= step + _SLACK), K + 1)
        return clamp_probabilities(out, grid, F), ProjectionDiagnostics(0, ell, math.nan, 0)

    if not (1 <= i <= K):
        raise ValueError(f"competing-bid index {i} outside 0..{K}")

    g = eta * (F.quantile(1.0 - p[i - 1]) - bids[i])
    cap = 1.0 - F.cdf(bids[i])

    ell = next((j for j in range(i + 1, K + 1) if p[j - 1] <= step + _SLACK), K + 1)

    # scan the pooled-block start downward; both conditions are monotone,
    # so the first failure ends the scan
    m = i
    total = p[i - 1]  # sum of p_k over k in [m, i]
    for j in range(i - 1, 0, -1):
        cand = total + p[j - 1]
        if p[j - 1] > cap + _SLACK:
            break
        if (i - j + 1) * p[j - 1] - cand > g + _SLACK:
            break
        m = j
        total = cand

    x = min((g + total) / (i - m + 1), cap)

    out = list(p[: m - 1])
    out.extend([x] * (i - m + 1))
    for j in range(i + 1, ell):
        out.append(p[j - 1] - step)
    out.extend([0.0] * (K + 1 - ell))
    return clamp_probabilities(out, grid, F), ProjectionDiagnostics(m, ell, x, i - m + 1)


def ga_step_thresholds(grid: Grid, v, i: int, eta: float):
    """One agile gradient round for the threshold learner (distribution-free).

    Mirror image of ga_step_probabilities under v = 1 - p with the uniform
    value distribution.
    """
    eps = _require_uniform(grid)
    if eta <= 0.0:
        raise ValueError("step size eta must be positive")
    check_thresholds(v, grid)
    K = grid.K
    bids = grid.bids
    step = eta * eps

    if i == 0:
        out = [min(vj + step, 1.0) for vj in v]
        ell = next((j for j in range(1, K + 1) if v[j - 1] >= 1.0 - step - _SLACK), K + 1)
        return clamp_thresholds(out, grid), ProjectionDiagnostics(0, ell, math.nan, 0)

    if not (1 <= i <= K):
        raise ValueError(f"competing-bid index {i} outside 0..{K}")

    g = eta * (v[i - 1] - bids[i])

    ell = next((j for j in range(i + 1, K + 1) if v[j - 1] >= 1.0 - step - _SLACK), K + 1)

    m = i
    total = v[i - 1]
    for j in range(i - 1, 0, -1):
        cand = total + v[j - 1]
        if v[j - 1] < bids[i] - _SLACK:
            break
        if cand - (i - j + 1) * v[j - 1] > g + _SLACK:
            break
        m = j
        total = cand

    x = max((total - g) / (i - m + 1), bids[i])

    out = list(v[: m - 1])
    out.extend([x] * (i - m + 1))
    for j in range(i + 1, ell):
        out.append(v[j - 1] + step)
    out.extend([1.0] * (K + 1 - ell))
    return clamp_thresholds(out, grid), ProjectionDiagnostics(m, ell, x, i - m + 1)


# ---------------------------------------------------------------------------
# generic chain-polytope projection oracle


@dataclass(frozen=True)
class ChainPolytope:
    """{x : x monotone in the given direction, lower <= x <= upper}."""

    increasing: bool
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(a) for a in self.lower)
        hi = tuple(float(b) for b in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower/upper bounds must be non-empty and match")
        if any(a > b + 1e-12 for a, b in zip(lo, hi)):
            raise ValueError("infeasible box: lower exceeds upper")
        # chain feasibility: running extreme of the binding bound must fit
        if self.increasing:
            run = -math.inf
            for a, b in zip(lo, hi):
                run = max(run, a)
                if run > b + 1e-12:
                    raise ValueError("infeasible chain: no monotone point in the box")
        else:
            run = -math.inf
            for a, b in zip(reversed(lo), reversed(hi)):
                run = max(run, a)
                if run > b + 1e-12:
                    raise ValueError("infeasible chain: no monotone point in the box")

    def contains(self, x, atol: float = 1e-9) -> bool:
        n = len(x)
        if n != len(self.lower):
            return False
        for j in range(n):
            if x[j] < self.lower[j] - atol or x[j] > self.upper[j] + atol:
                return False
        for j in range(n - 1):
            gap = x[j + 1] - x[j] if self.increasing else x[j] - x[j + 1]
            if gap < -atol:
                return False
        return True


def probability_polytope(grid: Grid, F: ValueDistribution) -> ChainPolytope:
    """Non-increasing vectors capped by the no-overbid bound 1 - F(b_j)."""
    caps = tuple(1.0 - F.cdf(b) for b in grid.bids[1:])
    return ChainPolytope(False, (0.0,) * grid.K, caps)


def threshold_polytope(grid: Grid) -> ChainPolytope:
    """Non-decreasing vectors with floor b_j and ceiling 1."""
    return ChainPolytope(True, tuple(grid.bids[1:]), (1.0,) * grid.K)


def project_oracle(poly: ChainPolytope, q):
    """Exact Euclidean projection of q onto the chain polytope.

    Runs an exact pool-adjacent dynamic program over the coordinate chain
    (value functions stay convex piecewise quadratic; only their clipped
    argmins need to be tracked) and then verifies first-order optimality
    over all block directions.
    """
    q = [float(t) for t in q]
    if len(q) != len(poly.lower):
        raise ValueError("dimension mismatch")
    if poly.increasing:
        x = _project_increasing(q, poly.lower, poly.upper)
    else:
        # negate: non-increasing x maps to non-decreasing -x with swapped bounds
        y = _project_increasing([-t for t in q],
                                [-b for b in poly.upper],
                                [-a for a in poly.lower])
        x = [-t for t in y]
    _verify_block_optimality(poly, q, x)
    return x


def _project_increasing(q, lo, up):
    """Stage-wise dynamic program for the non-decreasing chain with boxes.

    Stage value functions f_i are convex piecewise quadratic; their
    derivative is a sum of (x - q_j) terms, where term j participates only
    below the activation threshold tau[j] (the running minimum of later
    clipped argmins).  The root of each stage derivative is found by
    pooling terms downward, then clipped into the stage box.
    """
    n = len(q)
    amin = [0.0] * n            # clipped argmin of each stage value function
    tau = [math.inf] * (n + 1)  # activation threshold of each derivative term
    L = -math.inf
    for i in range(n):
        L = max(L, lo[i])
        if i > 0:
            a_prev = amin[i - 1]
            for j in range(i):
                if tau[j] > a_prev:
                    tau[j] = a_prev
        tau[i] = math.inf
        # pool terms i, i-1, ... until the pooled root lands in its piece
        r, cnt, s = i, 1, q[i]
        root = s
        while r > 0 and root < tau[r - 1]:
            r -= 1
            cnt += 1
            s += q[r]
            root = s / cnt
        if root > tau[r]:
            # sign change happens at an upward jump of the derivative
            root = tau[r]
        amin[i] = min(max(root, L), up[i])
    x = [0.0] * n
    x[n - 1] = amin[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = min(amin[i], x[i + 1])
    return x


def _verify_block_optimality(poly: ChainPolytope, q, x, tol: float = 1e-10, act: float = 1e-9):
    """KKT check: no contiguous block may be shifted to reduce the distance."""
    if not poly.contains(x, atol=act):
        raise AssertionError("oracle produced an infeasible point")
    n = len(x)
    r = [q[j] - x[j] for j in range(n)]
    lo, up = poly.lower, poly.upper
    for a in range(n):
        s = 0.0
        for b in range(a, n):
            s += r[b]
            # can the block [a, b] move up / down without leaving the set?
            if poly.increasing:
                up_free = all(x[j] < up[j] - act for j in range(a, b + 1)) and (
                    b == n - 1 or x[b] < x[b + 1] - act)
                dn_free = all(x[j] > lo[j] + act for j in range(a, b + 1)) and (
                    a == 0 or x[a] > x[a - 1] + act)
            else:
                up_free = all(x[j] < up[j] - act for j in range(a, b + 1)) and (
                    a == 0 or x[a] < x[a - 1] - act)
                dn_free = all(x[j] > lo[j] + act for j in range(a, b + 1)) and (
                    b == n - 1 or x[b] > x[b + 1] + act)
            if up_free and s > tol * (b - a + 1):
                raise AssertionError(f"KKT violation: block [{a},{b}] wants to move up")
            if dn_free and s < -tol * (b - a + 1):
                raise AssertionError(f"KKT violation: block [{a},{b}] wants to move down")
