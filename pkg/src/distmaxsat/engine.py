"""CDCL SAT engine with assumptions, core extraction and a lookahead surface.

The solver is a conventional conflict-driven clause learner: two watched
literals per clause, first-UIP learning, activity-based branching with
multiplicative decay, phase saving and Luby restarts.  Assumptions are placed
as the first decisions; when one is contradicted, the subset of assumptions
responsible is returned as the core.

Beyond `solve`, the engine exposes `propagate_under`, `analyze_and_learn` and
`watched_clauses` so the guiding-path generator can reuse the propagation and
analysis machinery instead of reimplementing it.

Watch lists are kept strict: a clause with at least two unfalsified literals
always watches two unfalsified literals, so `watched_clauses` reflects the
true shortened state of every clause.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

VAR_ACT_DECAY = 0.95
LUBY_UNIT = 100
LEARNED_CAP_FACTOR = 10


class Clause:
    """One clause in the engine; positions 0 and 1 are the watched literals."""

    __slots__ = ("lits", "learned")

    def __init__(self, lits, learned=False):
        self.lits = list(lits)
        self.learned = learned

    def __repr__(self):
        return f"Clause({self.lits}{', learned' if self.learned else ''})"


@dataclass(frozen=True)
class Sat:
    model: dict[int, bool]


@dataclass(frozen=True)
class Unsat:
    core: frozenset[int]


@dataclass(frozen=True)
class Implied:
    """Unit-propagation closure of the given decisions (decisions excluded)."""

    literals: frozenset[int]


@dataclass
class Conflict:
    """A live conflict left on the trail for `analyze_and_learn`.

    `clause` is None when the contradiction is a decision literal whose
    complement was already implied (nothing to analyze), or a root-level
    contradiction.
    """

    clause: tuple[int, ...] | None
    level: int
    trail: tuple[int, ...]
    _obj: Clause | None = field(default=None, repr=False)
    _token: int = field(default=-1, repr=False)


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class Engine:
    """Incremental CDCL solver over variables 1..num_vars."""

    def __init__(self, clauses=(), num_vars: int = 0, seed: int = 0):
        self.num_vars = 0
        self.assigns: list[int] = [0]  # var -> +1 true, -1 false, 0 unassigned
        self.levels: list[int] = [0]
        self.reasons: list[Clause | None] = [None]
        self.phase: list[bool] = [False]
        self.activity: list[float] = [0.0]
        self.tie_rank: list[float] = [0.0]
        self.watches: dict[int, list[Clause]] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[Clause] = []
        self.learned_clauses: list[Clause] = []
        self.learned: list[tuple[int, ...]] = []  # record of every clause learned
        self.root_unsat = False
        self.var_inc = 1.0
        self.conflicts = 0
        self.restarts = 0
        self._rng = random.Random(seed)
        self._conflict_token = 0
        self._live_conflict: int | None = None
        self.add_vars(num_vars)
        for c in clauses:
            self.add_clause(c)

    # ------------------------------------------------------------------ vars

    def add_vars(self, n: int) -> None:
        for _ in range(n):
            self.num_vars += 1
            v = self.num_vars
            self.assigns.append(0)
            self.levels.append(0)
            self.reasons.append(None)
            self.phase.append(False)
            self.activity.append(0.0)
            self.tie_rank.append(self._rng.random())
            self.watches[v] = []
            self.watches[-v] = []

    def value(self, lit: int) -> int:
        """+1 if lit true, -1 if false, 0 if unassigned."""
        val = self.assigns[abs(lit)]
        return val if lit > 0 else -val

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    # --------------------------------------------------------------- clauses

    def add_clause(self, lits) -> None:
        """Add a problem clause; only legal at decision level 0."""
        if self.decision_level != 0:
            raise ValueError("add_clause requires decision level 0")
        lits = list(dict.fromkeys(lits))
        lit_set = set(lits)
        for lit in lits:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range")
            if -lit in lit_set:
                raise ValueError(f"tautological clause {lits}")
        if self.root_unsat:
            return
        unfalsified = [l for l in lits if self.value(l) >= 0]
        falsified = [l for l in lits if self.value(l) < 0]
        if len(unfalsified) >= 2:
            clause = Clause(unfalsified + falsified)
            self.clauses.append(clause)
            self._attach(clause)
        elif len(unfalsified) == 1:
            # Permanently satisfied or unit at level 0; no watches needed since
            # level-0 falsifications are never undone.
            lit = unfalsified[0]
            self.clauses.append(Clause([lit] + falsified))
            if self.value(lit) == 0:
                self._enqueue(lit, None)
                if self._propagate() is not None:
                    self._mark_root_unsat()
        else:
            self.clauses.append(Clause(lits))
            self._mark_root_unsat()

    def _mark_root_unsat(self) -> None:
        self.root_unsat = True
        self._cancel_until(0)

    def _attach(self, clause: Clause) -> None:
        self.watches[clause.lits[0]].append(clause)
        self.watches[clause.lits[1]].append(clause)

    def _detach(self, clause: Clause) -> None:
        self.watches[clause.lits[0]].remove(clause)
        self.watches[clause.lits[1]].remove(clause)

    def watched_clauses(self, lit: int) -> list[Clause]:
        """Clauses currently watching `lit`."""
        return list(self.watches.get(lit, ()))

    # ----------------------------------------------------------- propagation

    def _enqueue(self, lit: int, reason: Clause | None) -> None:
        v = abs(lit)
        self.assigns[v] = 1 if lit > 0 else -1
        self.levels[v] = self.decision_level
        self.reasons[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Clause | None:
        """Propagate pending trail literals; return a conflicting clause or None."""
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches[-p]
            i = 0
            while i < len(watchers):
                clause = watchers[i]
                lits = clause.lits
                if lits[0] == -p:
                    lits[0], lits[1] = lits[1], lits[0]
                other = lits[0]
                # Eager migration keeps the strict two-watch invariant even
                # when `other` already satisfies the clause.
                moved = False
                for k in range(2, len(lits)):
                    if self.value(lits[k]) >= 0:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[lits[1]].append(clause)
                        watchers[i] = watchers[-1]
                        watchers.pop()
                        moved = True
                        break
                if moved:
                    continue
                other_val = self.value(other)
                if other_val > 0:
                    i += 1
                    continue
                if other_val == 0:
                    self._enqueue(other, clause)
                    i += 1
                    continue
                return clause
        return None

    def _cancel_until(self, level: int) -> None:
        if self.decision_level <= level:
            return
        boundary = self.trail_lim[level]
        for lit in reversed(self.trail[boundary:]):
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assigns[v] = 0
            self.reasons[v] = None
        del self.trail[boundary:]
        del self.trail_lim[level:]
        self.qhead = len(self.trail)
        self._live_conflict = None

    def _new_level(self) -> None:
        self.trail_lim.append(len(self.trail))

    # -------------------------------------------------------------- analysis

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, confl: Clause) -> tuple[list[int], int]:
        """First-UIP learning; returns (learned clause, backtrack level)."""
        learnt: list[int] = [0]  # slot 0 for the asserting literal
        seen: set[int] = set()
        path_count = 0
        p: int | None = None
        index = len(self.trail) - 1
        clause: Clause | None = confl
        level = self.decision_level
        while True:
            for q in clause.lits:
                if q == p:
                    continue
                v = abs(q)
                if v not in seen and self.levels[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.levels[v] >= level:
                        path_count += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[index]) not in seen:
                index -= 1
            p = self.trail[index]
            v = abs(p)
            clause = self.reasons[v]
            seen.discard(v)
            index -= 1
            path_count -= 1
            if path_count == 0:
                break
        learnt[0] = -p
        self.var_inc /= VAR_ACT_DECAY
        if len(learnt) == 1:
            return learnt, 0
        # Second-highest level literal moves to the other watch position.
        k = max(range(1, len(learnt)), key=lambda j: self.levels[abs(learnt[j])])
        learnt[1], learnt[k] = learnt[k], learnt[1]
        return learnt, self.levels[abs(learnt[1])]

    def _record_learned(self, learnt: list[int], backtrack: int) -> None:
        self.learned.append(tuple(learnt))
        self._cancel_until(backtrack)
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
        else:
            clause = Clause(learnt, learned=True)
            self.learned_clauses.append(clause)
            self._attach(clause)
            self._enqueue(learnt[0], clause)
        self._maybe_reduce_db()

    def _maybe_reduce_db(self) -> None:
        cap = LEARNED_CAP_FACTOR * max(1, len(self.clauses))
        if len(self.learned_clauses) <= cap:
            return
        locked = {id(self.reasons[abs(l)]) for l in self.trail if self.reasons[abs(l)]}
        keep: list[Clause] = []
        drop = len(self.learned_clauses) // 2
        for idx, clause in enumerate(self.learned_clauses):
            if idx < drop and id(clause) not in locked:
                self._detach(clause)
            else:
                keep.append(clause)
        self.learned_clauses = keep

    # ------------------------------------------------------------------ solve

    def _pick_branch(self) -> int:
        best = 0
        best_key = (-1.0, -1.0)
        for v in range(1, self.num_vars + 1):
            if self.assigns[v] == 0:
                key = (self.activity[v], self.tie_rank[v])
                if key > best_key:
                    best_key = key
                    best = v
        if best == 0:
            return 0
        return best if self.phase[best] else -best

    def _analyze_final(self, p: int) -> frozenset[int]:
        """Assumptions responsible for forcing assumption `p` false."""
        core = {p}
        if self.decision_level == 0:
            return frozenset(core)
        seen = {abs(p)}
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = abs(lit)
            if v not in seen:
                continue
            reason = self.reasons[v]
            if reason is None:
                core.add(lit)
            else:
                for q in reason.lits:
                    if abs(q) != v and self.levels[abs(q)] > 0:
                        seen.add(abs(q))
            seen.discard(v)
        return frozenset(core)

    def solve(self, assumptions=(), deadline=None, clock=None):
        """Solve under assumptions; Sat(total model) or Unsat(core ⊆ assumptions)."""
        assumptions = list(assumptions)
        if self.root_unsat:
            return Unsat(frozenset())
        self._cancel_until(0)
        if self._propagate() is not None:
            self._mark_root_unsat()
            return Unsat(frozenset())
        conflicts_until_restart = LUBY_UNIT * luby(self.restarts + 1)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_until_restart -= 1
                if self.decision_level == 0:
                    self._mark_root_unsat()
                    return Unsat(frozenset())
                learnt, backtrack = self._analyze(confl)
                self._record_learned(learnt, backtrack)
                continue
            if conflicts_until_restart <= 0:
                self.restarts += 1
                conflicts_until_restart = LUBY_UNIT * luby(self.restarts + 1)
                self._cancel_until(0)
                if deadline is not None and clock is not None and clock() > deadline:
                    raise TimeoutError("solve deadline exceeded")
                continue
            if self.decision_level < len(assumptions):
                p = assumptions[self.decision_level]
                if abs(p) > self.num_vars or p == 0:
                    raise ValueError(f"assumption {p} out of range")
                val = self.value(p)
                if val > 0:
                    self._new_level()  # keep level == assumption index
                    continue
                if val < 0:
                    core = self._analyze_final(p)
                    self._cancel_until(0)
                    return Unsat(core)
                self._new_level()
                self._enqueue(p, None)
                continue
            lit = self._pick_branch()
            if lit == 0:
                model = {v: self.assigns[v] > 0 for v in range(1, self.num_vars + 1)}
                self._cancel_until(0)
                return Sat(model)
            self._new_level()
            self._enqueue(lit, None)

    # ------------------------------------------------- lookahead surface

    def propagate_under(self, decisions) -> Implied | Conflict:
        """Unit-propagation closure of `decisions` from decision level 0.

        On conflict the trail is left live so the caller may run
        `analyze_and_learn`; otherwise the engine is restored to level 0.
        """
        decisions = list(decisions)
        dec_set = set(decisions)
        if any(-d in dec_set for d in decisions):
            raise ValueError("decisions contain complementary literals")
        self._cancel_until(0)
        if self.root_unsat:
            return self._live(Conflict(clause=None, level=0, trail=tuple(self.trail)))
        if self._propagate() is not None:
            self._mark_root_unsat()
            return self._live(Conflict(clause=None, level=0, trail=tuple(self.trail)))
        for d in decisions:
            val = self.value(d)
            if val > 0:
                continue
            if val < 0:
                # Complement already implied; no falsified clause to analyze.
                self._cancel_until(0)
                return Conflict(clause=None, level=self.decision_level, trail=())
            self._new_level()
            self._enqueue(d, None)
            confl = self._propagate()
            if confl is not None:
                return self._live(
                    Conflict(
                        clause=tuple(confl.lits),
                        level=self.decision_level,
                        trail=tuple(self.trail),
                        _obj=confl,
                    )
                )
        implied = frozenset(self.trail) - dec_set
        self._cancel_until(0)
        return Implied(implied)

    def _live(self, conflict: Conflict) -> Conflict:
        self._conflict_token += 1
        conflict._token = self._conflict_token
        self._live_conflict = self._conflict_token
        return conflict

    def analyze_and_learn(self, conflict: Conflict) -> tuple[int, ...]:
        """Learn the first-UIP clause from a live conflict and return to level 0."""
        if conflict._obj is None or conflict._token != self._live_conflict:
            raise ValueError("analyze_and_learn requires a live clause conflict")
        if conflict.level == 0:
            raise ValueError("root-level conflict has nothing to learn")
        self.conflicts += 1
        learnt, backtrack = self._analyze(conflict._obj)
        self._record_learned(learnt, backtrack)
        self._cancel_until(0)
        self._live_conflict = None
        if self._propagate() is not None:
            self._mark_root_unsat()
        return tuple(learnt)

    def discard_conflict(self) -> None:
        """Drop a live conflict without learning."""
        self._cancel_until(0)
