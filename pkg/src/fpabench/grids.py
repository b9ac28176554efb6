"""Discrete bid grids.

Bids live on a finite grid b_0 = 0 < b_1 < ... < b_K <= 1.  The uniform
grid b_i = i * eps is the common case and is required by the closed-form
update rules; irregular grids are accepted only by code paths that
project through the generic oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_ATOL = 1e-12


@dataclass(frozen=True)
class BidGrid:
    """Uniform grid {0, eps, 2*eps, ..., K*eps} with K*eps <= 1."""

    K: int
    eps: float
    bids: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("grid needs at least one positive bid (K >= 1)")
        if not (self.eps > 0.0):
            raise ValueError("grid spacing eps must be positive")
        if self.K * self.eps > 1.0 + _ATOL:
            raise ValueError("largest bid K*eps must not exceed 1")
        object.__setattr__(self, "bids", tuple(i * self.eps for i in range(self.K + 1)))

    @property
    def is_uniform(self) -> bool:
        return True

    @property
    def gaps(self) -> tuple[float, ...]:
        """Spacings b_j - b_{j-1} for j = 1..K."""
        return (self.eps,) * self.K

    def index_of(self, bid: float, atol: float = 1e-9) -> int:
        return _index_of(self.bids, bid, atol)


@dataclass(frozen=True)
class IrregularBidGrid:
    """Arbitrary strictly increasing grid with b_0 = 0 and b_K <= 1."""

    bids: tuple[float, ...]

    def __post_init__(self):
        bids = tuple(float(b) for b in self.bids)
        object.__setattr__(self, "bids", bids)
        if len(bids) < 2:
            raise ValueError("grid needs at least one positive bid")
        if abs(bids[0]) > _ATOL:
            raise ValueError("lowest bid must be 0")
        if any(b2 - b1 <= 0 for b1, b2 in zip(bids, bids[1:])):
            raise ValueError("bids must be strictly increasing")
        if bids[-1] > 1.0 + _ATOL:
            raise ValueError("largest bid must not exceed 1")

    @property
    def K(self) -> int:
        return len(self.bids) - 1

    @property
    def is_uniform(self) -> bool:
        gaps = self.gaps
        return all(abs(g - gaps[0]) <= _ATOL for g in gaps)

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(b2 - b1 for b1, b2 in zip(self.bids, self.bids[1:]))

    def index_of(self, bid: float, atol: float = 1e-9) -> int:
        return _index_of(self.bids, bid, atol)


Grid = BidGrid | IrregularBidGrid


def _index_of(bids: tuple[float, ...], bid: float, atol: float) -> int:
    for i, b in enumerate(bids):
        if math.isclose(b, bid, rel_tol=0.0, abs_tol=atol):
            return i
    raise ValueError(f"bid {bid!r} is not on the grid")
