"""Bound bookkeeping for search-space splitting.

The master keeps a proven lower bound, the best known upper bound, and a
sorted set of tentative bounds under test by workers.  SAT results pull the
upper bound down (inserting the next useful tentative, μ-1); UNSAT results
push the lower bound up.  New tentatives bisect the widest remaining gap.
The optimum is found once the two bounds meet.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class BoundSet:
    lam: int  # proven lower bound
    mu: int  # best known upper bound (cost of some model)
    bounds: list[int] = field(default_factory=list)  # sorted, distinct
    owner: dict[int, str] = field(default_factory=dict)  # bound -> worker id

    def _insert(self, b: int) -> None:
        if b not in self.bounds:
            self.bounds.append(b)
            self.bounds.sort()

    def _remove(self, predicate) -> list[int]:
        removed = [b for b in self.bounds if predicate(b)]
        self.bounds = [b for b in self.bounds if not predicate(b)]
        for b in removed:
            self.owner.pop(b, None)
        return removed

    def apply_sat(self, cost: int) -> bool:
        """A worker found a model of the given cost; stale reports are ignored."""
        if cost >= self.mu:
            return False
        self.mu = cost
        self._remove(lambda b: b >= self.mu)
        if cost - 1 >= self.lam:
            self._insert(cost - 1)
        return True

    def apply_unsat(self, bound: int) -> bool:
        """A worker proved nothing exists at `bound`; so `bound`+1 is a lower bound."""
        if bound < self.lam:
            return False
        self.lam = bound + 1
        self._remove(lambda b: b <= bound)
        if self.lam <= self.mu - 1:
            self._insert(self.lam)
        return True

    def raise_lower(self, lam: int) -> bool:
        """Lower-bound report (from the core-guided worker): λ = max(λ, lam)."""
        if lam <= self.lam:
            return False
        return self.apply_unsat(lam - 1)

    def next_tentative(self) -> int | None:
        """Bisect the widest adjacent gap (ties: lowest pair); None if all gaps <= 1."""
        best_gap = 1
        best_pair = None
        for lo, hi in zip(self.bounds, self.bounds[1:]):
            if hi - lo > best_gap:
                best_gap = hi - lo
                best_pair = (lo, hi)
        if best_pair is None:
            return None
        mid = (best_pair[0] + best_pair[1]) // 2
        self._insert(mid)
        return mid

    def unowned(self) -> list[int]:
        return [b for b in self.bounds if b not in self.owner]

    @property
    def closed(self) -> bool:
        return self.lam >= self.mu


def initial_bounds(mu: int, k: int) -> BoundSet:
    """Evenly split [0, μ-1] into k tentative bounds plus the sentinel 0."""
    if k < 1 or mu < 1:
        raise ValueError("need mu >= 1 and k >= 1")
    values = sorted({i * (mu - 1) // k for i in range(k + 1)})
    return BoundSet(lam=0, mu=mu, bounds=values)
