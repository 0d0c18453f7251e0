"""Guiding-path generation by recursive lookahead splitting.

The generator walks a binary tree over variables that occur in soft clauses.
At each node it unit-propagates the decision prefix through a CDCL engine,
learns from conflicts, and emits the prefix as a guiding path once the dynamic
cutoff fires: |D| * |D ∪ I| > θ * |Vars|.  θ grows 5% on every call and
shrinks 30% on conflicts and on the depth guard |D| + log2(#hard) > 25, so
conflict-rich regions yield shorter paths.

Every θ update is recorded in a trace so runs can be replayed and audited.
Emitted paths are immutable; any two of them conflict on some variable, and
together they cover every assignment that satisfies the hard clauses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import Conflict, Engine, Implied

ROOT_CUTOFF = 1000.0
RESPLIT_CUTOFF = 5000.0
CUTOFF_GROWTH = 1.05
CUTOFF_SHRINK = 0.70
DEPTH_GUARD = 25


@dataclass(frozen=True)
class GuidingPath:
    decisions: tuple[int, ...]
    gen_index: int
    parent_index: int | None = None

    @property
    def depth(self) -> int:
        return len(self.decisions)


@dataclass
class GenerationResult:
    paths: list[GuidingPath]
    root_conflict: bool
    trace: list[tuple[str, float]]


def rank_key(pos_score: float, neg_score: float, var: int):
    """Sort key: product first, sum to break ties, lowest index last."""
    return (pos_score * neg_score, pos_score + neg_score, -var)


def clause_reduction_score(
    engine: Engine,
    assigned: dict[int, bool],
    lit: int,
    l_max: int,
    watched_only: bool = False,
) -> float:
    """Weighted count of clauses strictly shortened (and left unsatisfied) by `lit`.

    A clause counts when it contains ¬lit and is not yet satisfied; its weight
    is 5^(l_max - k) where k is its length after the shortening, lengths
    counting only unassigned literals.  In watched-only mode just the clauses
    currently watching ¬lit are scanned.
    """
    if abs(lit) in assigned:
        raise ValueError(f"literal {lit} already assigned")
    if watched_only:
        candidates = engine.watched_clauses(-lit)
    else:
        candidates = engine.clauses + engine.learned_clauses
    total = 0.0
    for clause in candidates:
        lits = clause.lits
        if -lit not in lits:
            continue
        satisfied = False
        reduced_len = 0
        for q in lits:
            val = assigned.get(abs(q))
            if val is None:
                if q != -lit:
                    reduced_len += 1
            elif val == (q > 0):
                satisfied = True
                break
        if satisfied:
            continue
        total += 5.0 ** (l_max - reduced_len)
    return total


def polarity_counts(soft_clauses, assigned: dict[int, bool], lit: int) -> tuple[int, int]:
    """(soft clauses newly falsified, soft clauses newly satisfied) by `lit`."""
    falsified = satisfied = 0
    for clause in soft_clauses:
        unassigned = []
        is_sat = False
        for q in clause:
            val = assigned.get(abs(q))
            if val is None:
                unassigned.append(q)
            elif val == (q > 0):
                is_sat = True
                break
        if is_sat:
            continue
        if lit in unassigned:
            satisfied += 1
        elif unassigned == [-lit]:
            falsified += 1
    return falsified, satisfied


def choose_variable(engine, assigned, soft_vars, l_max) -> int | None:
    """Unassigned soft variable maximizing the watched-literal reduction score."""
    best = None
    best_key = None
    for v in soft_vars:
        if v in assigned:
            continue
        pos = clause_reduction_score(engine, assigned, v, l_max, watched_only=True)
        neg = clause_reduction_score(engine, assigned, -v, l_max, watched_only=True)
        key = rank_key(pos, neg, v)
        if best_key is None or key > best_key:
            best_key = key
            best = v
    return best


def choose_polarity(soft_clauses, assigned, var: int) -> int:
    """Branch direction falsifying fewer soft clauses; ties satisfy more."""
    f_pos, s_pos = polarity_counts(soft_clauses, assigned, var)
    f_neg, s_neg = polarity_counts(soft_clauses, assigned, -var)
    if f_pos != f_neg:
        return var if f_pos < f_neg else -var
    if s_pos != s_neg:
        return var if s_pos > s_neg else -var
    return var


class PathGenerator:
    """Owns one engine (hard clauses plus anything learned) across invocations.

    Re-splitting a path reuses the same generator so learned clauses persist
    and generation indices stay globally ordered.
    """

    def __init__(self, hard_clauses, soft_clauses, num_vars: int, seed: int = 0):
        hard_clauses = [tuple(c) for c in hard_clauses]
        self.engine = Engine(hard_clauses, num_vars=num_vars, seed=seed)
        self.soft = [tuple(c) for c in soft_clauses]
        self.soft_vars = sorted({abs(l) for c in self.soft for l in c})
        # Frozen at construction: learned clauses never move these.
        self.hard_count = len(hard_clauses)
        self.var_count = len({abs(l) for c in hard_clauses for l in c})
        self.l_max = max((len(c) for c in hard_clauses), default=0)
        self.theta = ROOT_CUTOFF
        self.next_index = 0

    def generate(
        self,
        d0=(),
        theta0: float = ROOT_CUTOFF,
        parent_index: int | None = None,
    ) -> GenerationResult:
        if theta0 <= 0:
            raise ValueError("cutoff must be positive")
        self.theta = float(theta0)
        result = GenerationResult(paths=[], root_conflict=False, trace=[("init", self.theta)])
        conflicted = self._descend(tuple(d0), parent_index, result)
        result.root_conflict = conflicted
        return result

    def _depth_guard(self, depth: int) -> bool:
        return self.hard_count > 0 and depth + math.log2(self.hard_count) > DEPTH_GUARD

    def _emit(self, decisions, parent_index, result) -> None:
        result.paths.append(
            GuidingPath(decisions=decisions, gen_index=self.next_index, parent_index=parent_index)
        )
        self.next_index += 1
        result.trace.append(("emit", self.theta))

    def _descend(self, decisions, parent_index, result) -> bool:
        """Returns True when this node's prefix is contradictory (pruned)."""
        self.theta *= CUTOFF_GROWTH
        result.trace.append(("grow", self.theta))
        outcome = self.engine.propagate_under(decisions)
        if isinstance(outcome, Conflict):
            self.theta *= CUTOFF_SHRINK
            result.trace.append(("shrink", self.theta))
            if outcome.clause is not None and outcome.level > 0:
                self.engine.analyze_and_learn(outcome)
            else:
                self.engine.discard_conflict()
            result.trace.append(("conflict", self.theta))
            return True
        assert isinstance(outcome, Implied)
        if self._depth_guard(len(decisions)):
            self.theta *= CUTOFF_SHRINK
            result.trace.append(("shrink", self.theta))
        if len(decisions) * (len(decisions) + len(outcome.literals)) > self.theta * self.var_count:
            self._emit(decisions, parent_index, result)
            return False
        assigned = {abs(l): l > 0 for l in decisions}
        for l in outcome.literals:
            assigned[abs(l)] = l > 0
        var = choose_variable(self.engine, assigned, self.soft_vars, self.l_max)
        if var is None:
            # Every soft variable is assigned; nothing left worth splitting.
            self._emit(decisions, parent_index, result)
            return False
        lit = choose_polarity(self.soft, assigned, var)
        self._descend(decisions + (lit,), parent_index, result)
        self._descend(decisions + (-lit,), parent_index, result)
        return False


def generate_guiding_paths(
    hard_clauses,
    soft_clauses,
    d0=(),
    theta0: float = ROOT_CUTOFF,
    num_vars: int | None = None,
    seed: int = 0,
) -> GenerationResult:
    """One-shot generation over a fresh generator."""
    if num_vars is None:
        num_vars = max(
            (abs(l) for c in list(hard_clauses) + list(soft_clauses) for l in c),
            default=0,
        )
    gen = PathGenerator(hard_clauses, soft_clauses, num_vars=num_vars, seed=seed)
    return gen.generate(d0=d0, theta0=theta0)


def replay_theta_trace(trace) -> bool:
    """Recompute every θ value from the recorded operations; exact match only."""
    theta = None
    for op, value in trace:
        if op == "init":
            theta = value
        elif op == "grow":
            theta = theta * CUTOFF_GROWTH
        elif op == "shrink":
            theta = theta * CUTOFF_SHRINK
        elif op not in ("emit", "conflict"):
            return False
        if theta != value:
            return False
    return True


def dump_paths(paths) -> str:
    """Paths as iCNF-style cube lines: "a <lits> 0"."""
    return "".join("a " + " ".join(str(l) for l in p.decisions) + " 0\n" for p in paths)
