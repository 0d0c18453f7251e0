import random

import pytest

from distmaxsat.engine import Conflict, Engine, Implied, Sat, Unsat, luby

from conftest import brute_force_sat, naive_propagate, random_cnf


def model_satisfies(clauses, model):
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses)


def test_luby_prefix():
    assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_contradictory_units_unsat():
    e = Engine([(1,), (-1,)], num_vars=1)
    assert isinstance(e.solve(), Unsat)
    assert e.root_unsat


def test_empty_clause_list_sat():
    e = Engine([], num_vars=3)
    result = e.solve()
    assert isinstance(result, Sat)
    assert set(result.model) == {1, 2, 3}


def test_solve_agrees_with_brute_force_small():
    rng = random.Random(7)
    for _ in range(60):
        clauses = random_cnf(rng, 10, 50)
        e = Engine(clauses, num_vars=10)
        result = e.solve()
        expected = brute_force_sat(clauses, 10)
        if isinstance(result, Sat):
            assert expected is not None
            assert model_satisfies(clauses, result.model)
        else:
            assert expected is None


def test_add_clause_conflicting_units():
    e = Engine(num_vars=1)
    e.add_clause((1,))
    e.add_clause((-1,))
    assert e.root_unsat
    assert isinstance(e.solve(), Unsat)


def test_add_clause_requires_level_zero():
    e = Engine([(1, 2)], num_vars=2)
    e._new_level()
    with pytest.raises(ValueError, match="level 0"):
        e.add_clause((2,))


def test_add_clause_rejects_bad_literals():
    e = Engine(num_vars=2)
    with pytest.raises(ValueError, match="out of range"):
        e.add_clause((3,))
    with pytest.raises(ValueError, match="tautological"):
        e.add_clause((1, -1))


def test_incremental_blocking_clause():
    rng = random.Random(11)
    for _ in range(30):
        clauses = random_cnf(rng, 8, 20)
        e = Engine(clauses, num_vars=8)
        result = e.solve()
        if not isinstance(result, Sat):
            continue
        blocking = tuple(-v if result.model[v] else v for v in range(1, 9))
        e.add_clause(blocking)
        second = e.solve()
        expected = brute_force_sat(clauses + [blocking], 8)
        if isinstance(second, Sat):
            assert expected is not None
            assert model_satisfies(clauses + [blocking], second.model)
            assert second.model != result.model
        else:
            assert expected is None


def test_solve_under_assumptions_forced_core():
    e = Engine([(-1, -2)], num_vars=2)
    result = e.solve([1, 2])
    assert isinstance(result, Unsat)
    assert result.core
    assert result.core <= {1, 2}


def test_solve_empty_db_assumption():
    e = Engine([], num_vars=1)
    result = e.solve([1])
    assert isinstance(result, Sat)
    assert result.model[1] is True


def test_assumption_verdicts_and_cores_match_brute_force():
    rng = random.Random(23)
    for round_ in range(200):
        num_vars = rng.randint(3, 12)
        clauses = random_cnf(rng, num_vars, rng.randint(2, 4 * num_vars))
        k = rng.randint(0, min(4, num_vars))
        assumptions = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, num_vars + 1), k)
        ]
        e = Engine(clauses, num_vars=num_vars, seed=round_)
        result = e.solve(assumptions)
        expected = brute_force_sat(clauses, num_vars, assumptions)
        if isinstance(result, Sat):
            assert expected is not None
            assert model_satisfies(clauses, result.model)
            for a in assumptions:
                assert result.model[abs(a)] == (a > 0)
        else:
            assert expected is None
            assert result.core <= set(assumptions)
            # The database together with just the core must stay UNSAT.
            recheck = Engine(clauses, num_vars=num_vars)
            assert isinstance(recheck.solve(sorted(result.core)), Unsat)


def test_propagate_under_chain():
    e = Engine([(-1, 2), (-2, 3)], num_vars=3)
    outcome = e.propagate_under([1])
    assert isinstance(outcome, Implied)
    assert outcome.literals == {2, 3}
    assert e.decision_level == 0


def test_propagate_under_conflict():
    # Level-0 unit (-2) already implies -1, so deciding 1 is contradicted.
    e = Engine([(-1, 2), (-2,)], num_vars=2)
    outcome = e.propagate_under([1])
    assert isinstance(outcome, Conflict)
    e.discard_conflict()


def test_propagate_under_clause_conflict():
    e = Engine([(-1, 2), (-2, 3), (-1, -3)], num_vars=3)
    outcome = e.propagate_under([1])
    assert isinstance(outcome, Conflict)
    assert outcome.clause is not None
    assert set(outcome.trail) >= {1, 2}
    e.discard_conflict()
    assert e.decision_level == 0


def test_propagate_under_rejects_complementary():
    e = Engine([], num_vars=2)
    with pytest.raises(ValueError, match="complementary"):
        e.propagate_under([1, -1])


def test_propagate_under_matches_naive_fixpoint():
    rng = random.Random(31)
    for _ in range(150):
        num_vars = rng.randint(3, 10)
        clauses = random_cnf(rng, num_vars, rng.randint(2, 3 * num_vars))
        k = rng.randint(1, min(3, num_vars))
        decisions = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, num_vars + 1), k)
        ]
        e = Engine(clauses, num_vars=num_vars)
        if e.root_unsat:
            continue
        expected, naive_conflict = naive_propagate(clauses, decisions)
        outcome = e.propagate_under(decisions)
        if isinstance(outcome, Conflict):
            assert naive_conflict
            e.discard_conflict()
        else:
            assert not naive_conflict
            assert outcome.literals == expected


def test_analyze_learns_negation_of_bad_decision():
    e = Engine([(-1, 2), (-1, -2)], num_vars=2)
    outcome = e.propagate_under([1])
    assert isinstance(outcome, Conflict)
    learned = e.analyze_and_learn(outcome)
    assert learned == (-1,)
    assert e.value(-1) > 0  # asserted at level 0


def test_analyze_requires_live_conflict():
    e = Engine([(-1, 2)], num_vars=2)
    outcome = e.propagate_under([1])
    assert isinstance(outcome, Implied)
    with pytest.raises(ValueError):
        e.analyze_and_learn(Conflict(clause=(1,), level=1, trail=(1,)))


def test_learned_clauses_implied_by_originals():
    rng = random.Random(47)
    checked = 0
    for _ in range(80):
        num_vars = rng.randint(4, 9)
        clauses = random_cnf(rng, num_vars, rng.randint(num_vars, 4 * num_vars))
        e = Engine(clauses, num_vars=num_vars, seed=1)
        e.solve()
        for learned in e.learned:
            # original ∧ ¬learned must be unsatisfiable
            negation = [(-l,) for l in learned]
            assert brute_force_sat(list(clauses) + negation, num_vars) is None
            checked += 1
    assert checked > 10


def test_learning_preserves_satisfiability():
    rng = random.Random(53)
    for _ in range(40):
        num_vars = rng.randint(3, 8)
        clauses = random_cnf(rng, num_vars, rng.randint(2, 3 * num_vars))
        e = Engine(clauses, num_vars=num_vars)
        verdict = isinstance(e.solve(), Sat)
        with_learned = clauses + [list(c) for c in e.learned]
        assert (brute_force_sat(with_learned, num_vars) is not None) == verdict


def watch_positions(engine, clause):
    return [l for l in (clause.lits[0], clause.lits[1]) if clause in engine.watches[l]]


def test_fresh_clause_watched_on_two_literals():
    e = Engine([(1, 2, 3)], num_vars=3)
    clause = e.clauses[0]
    watching = [l for l in (1, 2, 3) if clause in e.watched_clauses(l)]
    assert len(watching) == 2


def test_watched_clauses_absent_literal():
    e = Engine([(1, 2)], num_vars=3)
    assert e.watched_clauses(3) == []
    assert e.watched_clauses(-3) == []


def check_two_watch_invariant(engine):
    """Every clause with >= 2 unfalsified literals watches two unfalsified ones.

    Only meaningful on a live engine: a level-0 conflict aborts propagation
    mid-queue and the engine is permanently UNSAT afterwards.
    """
    if engine.root_unsat:
        return
    for clause in engine.clauses + engine.learned_clauses:
        if len(clause.lits) < 2:
            continue
        attached = clause in engine.watches.get(
            clause.lits[0], ()
        ) and clause in engine.watches.get(clause.lits[1], ())
        unfalsified = sum(1 for l in clause.lits if engine.value(l) >= 0)
        if unfalsified >= 2 and attached:
            assert engine.value(clause.lits[0]) >= 0
            assert engine.value(clause.lits[1]) >= 0


def test_watch_invariant_after_propagation():
    rng = random.Random(61)
    for _ in range(60):
        num_vars = rng.randint(3, 10)
        clauses = random_cnf(rng, num_vars, rng.randint(2, 3 * num_vars))
        e = Engine(clauses, num_vars=num_vars)
        if e.root_unsat:
            continue
        check_two_watch_invariant(e)
        decisions = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, num_vars + 1), min(3, num_vars))
        ]
        try:
            outcome = e.propagate_under(decisions)
        except ValueError:
            continue
        if isinstance(outcome, Conflict):
            e.discard_conflict()
        check_two_watch_invariant(e)
        e.solve()
        check_two_watch_invariant(e)


def test_deterministic_given_seed():
    rng = random.Random(71)
    clauses = random_cnf(rng, 12, 40)
    a = Engine(clauses, num_vars=12, seed=5)
    b = Engine(clauses, num_vars=12, seed=5)
    ra, rb = a.solve(), b.solve()
    assert type(ra) is type(rb)
    if isinstance(ra, Sat):
        assert ra.model == rb.model
    assert a.learned == b.learned
