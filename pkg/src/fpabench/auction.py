"""Single-shot first-price auction primitives on a bid grid.

A monotone bidding strategy is stored either as

* a threshold vector  v = (v_1, ..., v_K), b_i <= v_i <= v_{i+1} <= 1,
  meaning "bid b_i when the value falls in (v_i, v_{i+1}]"
  (v_0 = 0 and v_{K+1} = 1 are implicit), or
* a bidding-probability vector  p = (p_1, ..., p_K),
  p_j = P(bid >= b_j) = 1 - F(v_j), which must be non-increasing with
  p_j <= 1 - F(b_j)  (the no-overbidding cap); p_0 = 1 and p_{K+1} = 0
  are implicit.

Expected utility is concave in p, which is what makes projected gradient
ascent work; every formula below is exact (no quadrature, no sampling).
"""

from __future__ import annotations

import bisect

from .distributions import ValueDistribution
from .grids import Grid

DEFAULT_ATOL = 1e-9


# ---------------------------------------------------------------------------
# feasibility checks


def check_probabilities(p, grid: Grid, F: ValueDistribution, atol: float = DEFAULT_ATOL):
    """Raise if p is not a valid bidding-probability vector."""
    if len(p) != grid.K:
        raise ValueError(f"expected {grid.K} components, got {len(p)}")
    prev = 1.0
    for j, pj in enumerate(p, start=1):
        if pj < -atol or pj > prev + atol:
            raise ValueError(f"p_{j}={pj} breaks monotonicity 1 >= p_1 >= ... >= 0")
        cap = 1.0 - F.cdf(grid.bids[j])
        if pj > cap + atol:
            raise ValueError(f"p_{j}={pj} exceeds no-overbid cap {cap}")
        prev = pj


def check_thresholds(v, grid: Grid, atol: float = DEFAULT_ATOL):
    """Raise if v is not a valid threshold vector."""
    if len(v) != grid.K:
        raise ValueError(f"expected {grid.K} components, got {len(v)}")
    prev = 0.0
    for i, vi in enumerate(v, start=1):
        if vi < prev - atol or vi > 1.0 + atol:
            raise ValueError(f"v_{i}={vi} breaks monotonicity 0 <= v_1 <= ... <= 1")
        if vi < grid.bids[i] - atol:
            raise ValueError(f"v_{i}={vi} below bid {grid.bids[i]} (overbidding)")
        prev = vi


def check_competing_distribution(d, grid: Grid, atol: float = DEFAULT_ATOL):
    """Raise if d is not a probability vector over grid points."""
    if len(d) != grid.K + 1:
        raise ValueError(f"expected {grid.K + 1} weights, got {len(d)}")
    if any(di < -atol for di in d):
        raise ValueError("competing-bid weights must be non-negative")
    if abs(sum(d) - 1.0) > atol:
        raise ValueError("competing-bid weights must sum to 1")


def clamp_probabilities(p, grid: Grid, F: ValueDistribution):
    """Snap tiny feasibility violations (float drift) back into the polytope."""
    out = []
    prev = 1.0
    for j, pj in enumerate(p, start=1):
        cap = 1.0 - F.cdf(grid.bids[j])
        out.append(min(max(pj, 0.0), prev, cap))
        prev = out[-1]
    return out


def clamp_thresholds(v, grid: Grid):
    out = []
    prev = 0.0
    for i, vi in enumerate(v, start=1):
        out.append(max(min(vi, 1.0), prev, grid.bids[i]))
        prev = out[-1]
    return out


# ---------------------------------------------------------------------------
# transforms between the two parameterizations


def probabilities_from_strategy(grid: Grid, F: ValueDistribution, v):
    """p_j = 1 - F(v_j)."""
    return [1.0 - F.cdf(vj) for vj in v]


def thresholds_from_probabilities(grid: Grid, F: ValueDistribution, p):
    """v_j = F^-(1 - p_j), clamped up to b_j.

    The clamp only acts where F is flat below b_j (zero-mass regions), in
    which case both thresholds describe the same strategy almost surely.
    """
    return [max(F.quantile(1.0 - pj), grid.bids[j]) for j, pj in enumerate(p, start=1)]


def bid_for_value(v, value: float) -> int:
    """Bid index for a value under threshold vector v: i s.t. value in (v_i, v_{i+1}]."""
    return bisect.bisect_left(v, value)


# ---------------------------------------------------------------------------
# expected utility / revenue against a competing bid on the grid


def utility_for_h(grid: Grid, F: ValueDistribution, p, i: int) -> float:
    """E[(V - bid) * 1(win)] when the highest competing bid is b_i.

    With p_0 = 1, p_{K+1} = 0 this is
    G(1 - p_i) - b_i p_i - sum_{j>i} (b_j - b_{j-1}) p_j.
    """
    bids = grid.bids
    total = -bids[i] * (p[i - 1] if i >= 1 else 1.0)
    for j in range(max(i, 0) + 1, grid.K + 1):
        total -= (bids[j] - bids[j - 1]) * p[j - 1]
    qi = 1.0 - (p[i - 1] if i >= 1 else 1.0)
    return total + F.quantile_tail_integral(qi)


def expected_utility(grid: Grid, F: ValueDistribution, d, p) -> float:
    """Expected utility against competing-bid distribution d (one round)."""
    return sum(di * utility_for_h(grid, F, p, i) for i, di in enumerate(d) if di != 0.0)


def utility_gradient(grid: Grid, F: ValueDistribution, p, i: int):
    """Supergradient of p -> utility_for_h(grid, F, p, i).

    Component j: 0 below the competing bid, F^-(1 - p_i) - b_i at it, and
    minus the grid gap above it.  When the competing bid is b_0 every
    coordinate move only changes payment, so all components are negative
    gaps.
    """
    bids = grid.bids
    g = [0.0] * grid.K
    for j in range(max(i, 1), grid.K + 1):
        if j == i:
            g[j - 1] = F.quantile(1.0 - p[i - 1]) - bids[i]
        else:
            g[j - 1] = -(bids[j] - bids[j - 1])
    return g


def revenue_for_h(grid: Grid, p, i: int) -> float:
    """Seller revenue E[bid * 1(win)] when the highest competing bid is b_i."""
    bids = grid.bids
    total = bids[i] * (p[i - 1] if i >= 1 else 1.0)
    for j in range(max(i, 0) + 1, grid.K + 1):
        total += (bids[j] - bids[j - 1]) * p[j - 1]
    return total


# ---------------------------------------------------------------------------
# best fixed response to a known competing-bid distribution


def single_shot_best_response(grid: Grid, d):
    """Thresholds of the utility-maximizing fixed strategy against d.

    The per-value payoff of bid b_j is the line (value - b_j) * D_j with
    D_j = P(win with b_j) = d_0 + ... + d_j; the best response follows the
    upper envelope of these lines, breaking ties toward the smaller bid.
    """
    bids = grid.bids
    K = grid.K
    # cumulative win probabilities; drop repeated slopes, keeping the
    # smallest bid (which weakly dominates and wins ties)
    lines = []  # (j, D_j), strictly increasing D_j
    acc = 0.0
    for j, dj in enumerate(d):
        acc += dj
        if not lines or acc > lines[-1][1]:
            lines.append((j, acc))
    # upper envelope scan; stack entries are (bid index, start of its range)
    stack = [(lines[0][0], 0.0)]
    slopes = dict(lines)
    for j, Dj in lines[1:]:
        x = 0.0
        while stack:
            jt, vt = stack[-1]
            Dt = slopes[jt]
            x = (bids[j] * Dj - bids[jt] * Dt) / (Dj - Dt)
            if x <= vt:
                stack.pop()
            else:
                break
        if not stack:
            stack.append((j, 0.0))
        elif x < 1.0:
            stack.append((j, x))
    # threshold i = where the envelope first uses a bid index >= i
    v = []
    starts = {j: x for j, x in stack}
    used = sorted(starts)
    for i in range(1, K + 1):
        nxt = next((j for j in used if j >= i), None)
        v.append(1.0 if nxt is None else starts[nxt])
    return clamp_thresholds(v, grid)


def best_fixed_utility(grid: Grid, F: ValueDistribution, d):
    """(per-round expected utility, thresholds) of the best fixed strategy."""
    v = single_shot_best_response(grid, d)
    p = probabilities_from_strategy(grid, F, v)
    return expected_utility(grid, F, d, p), v
