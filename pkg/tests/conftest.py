import itertools
import random

import pytest

from distmaxsat.formula import clause_satisfied


def assignment_from_mask(mask: int, num_vars: int) -> dict[int, bool]:
    return {v: bool((mask >> (v - 1)) & 1) for v in range(1, num_vars + 1)}


def clause_holds(clause, assignment: dict[int, bool]) -> bool:
    return clause_satisfied(tuple(clause), assignment)


def naive_propagate(clauses, decisions):
    """Repeated-scan unit propagation; returns (implied set, conflict flag).

    Independent oracle for the engine's watched-literal propagation: scan all
    clauses until fixpoint, no watch lists involved.
    """
    assigned = {}
    for lit in decisions:
        assigned[abs(lit)] = lit > 0
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            unassigned = []
            satisfied = False
            for lit in clause:
                val = assigned.get(abs(lit))
                if val is None:
                    unassigned.append(lit)
                elif val == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not unassigned:
                return None, True
            if len(unassigned) == 1:
                lit = unassigned[0]
                assigned[abs(lit)] = lit > 0
                changed = True
    implied = {v if pos else -v for v, pos in assigned.items()}
    implied -= set(decisions)
    return implied, False


def brute_force_sat(clauses, num_vars, assumptions=()):
    """Enumerate all assignments; return a satisfying model dict or None."""
    fixed = {abs(l): l > 0 for l in assumptions}
    if len(fixed) != len(set(abs(l) for l in assumptions)):
        pass  # complementary assumptions: no model will match
    for bits in itertools.product([False, True], repeat=num_vars):
        model = {v: bits[v - 1] for v in range(1, num_vars + 1)}
        if any(model[v] != want for v, want in fixed.items()):
            continue
        if any(-l in assumptions and l in assumptions for l in assumptions):
            continue
        if all(clause_holds(c, model) for c in clauses):
            return model
    return None


def random_cnf(rng: random.Random, num_vars: int, num_clauses: int, max_len: int = 3):
    clauses = []
    for _ in range(num_clauses):
        length = min(num_vars, rng.choice([2] + [max_len] * 4))
        variables = rng.sample(range(1, num_vars + 1), length)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return clauses


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
