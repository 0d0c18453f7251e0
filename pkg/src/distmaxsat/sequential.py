"""Sequential partial MaxSAT algorithms: linear SAT/UNSAT search and MSU3.

Both are used standalone and as worker payloads.  `linear_su` drives an upper
bound downward from satisfying assignments; `msu3` drives a lower bound upward
from unsat cores.  Each invocation owns its engine, so concurrent invocations
in separate workers never share state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cardinality import bound_assumptions, encode_totalizer
from .engine import Engine, Sat, Unsat
from .formula import RelaxedFormula, WcnfFormula, cost, relax


@dataclass(frozen=True)
class Optimum:
    cost: int
    model: dict[int, bool]


@dataclass(frozen=True)
class HardUnsat:
    pass


@dataclass(frozen=True)
class NoImprovement:
    """Nothing under the given bound; `proof_independent` is true when the
    final unsat core avoided every supplied path literal."""

    proof_independent: bool


OptOutcome = Optimum | HardUnsat | NoImprovement


def _restrict(model: dict[int, bool], num_vars: int) -> dict[int, bool]:
    return {v: model[v] for v in range(1, num_vars + 1)}


def linear_su(
    rf: RelaxedFormula,
    ub_init: int | None = None,
    path=(),
    on_improve=None,
    seed: int = 0,
    deadline=None,
    clock=None,
) -> OptOutcome:
    """Iterate SAT calls, tightening the at-most bound after each solution.

    The cardinality encoding is built once over all relaxation variables and
    tightened through assumptions only.  `path` literals ride along as extra
    assumptions on every call.
    """
    f = rf.base
    n = len(rf.relax_vars)
    if ub_init is None:
        ub_init = n
    if ub_init > n:
        raise ValueError(f"ub_init {ub_init} exceeds soft clause count {n}")
    path = list(path)

    engine = Engine(num_vars=rf.num_vars, seed=seed)
    enc = None
    if n > 0:
        enc = encode_totalizer(rf.relax_vars, fresh_from=rf.num_vars + 1)
        engine.add_vars(len(enc.aux_vars))
    for clause in rf.clauses:
        engine.add_clause(clause)
    if enc is not None:
        for clause in enc.clauses:
            engine.add_clause(clause)

    bound = ub_init
    best: Optimum | None = None
    first_call_had_assumptions = bool(path) or (enc is not None and bound < n)
    while True:
        assumptions = path + (bound_assumptions(enc, bound) if enc is not None else [])
        result = engine.solve(assumptions, deadline=deadline, clock=clock)
        if isinstance(result, Sat):
            model = _restrict(result.model, f.num_vars)
            found = cost(f, model)
            best = Optimum(found, model)
            if on_improve is not None:
                on_improve(found, model)
            if found == 0:
                return best
            bound = found - 1
            continue
        assert isinstance(result, Unsat)
        if best is not None:
            return best
        if not first_call_had_assumptions:
            return HardUnsat()
        return NoImprovement(proof_independent=not (result.core & set(path)))


def msu3(
    f: WcnfFormula,
    on_lower_bound=None,
    seed: int = 0,
    deadline=None,
    clock=None,
) -> OptOutcome:
    """Core-guided search: relax only the soft clauses that appear in cores.

    All soft clauses carry a relaxation variable up front; "unrelaxed" clauses
    are enforced by assuming their variable false.  Each unsat core moves its
    soft clauses into the relaxed set, the lower bound grows by one, and the
    at-most constraint is re-encoded over the current relaxed set.
    """
    rf = relax(f)
    n = len(rf.relax_vars)
    engine = Engine(num_vars=rf.num_vars, seed=seed)
    for clause in rf.clauses:
        engine.add_clause(clause)

    relaxed: list[int] = []  # relaxation variables whose clauses may be violated
    lam = 0
    enc = None
    while True:
        enforce = [-r for r in rf.relax_vars if r not in relaxed]
        bound_lits = bound_assumptions(enc, lam) if enc is not None else []
        result = engine.solve(enforce + bound_lits, deadline=deadline, clock=clock)
        if isinstance(result, Sat):
            model = _restrict(result.model, f.num_vars)
            return Optimum(cost(f, model), model)
        assert isinstance(result, Unsat)
        core_softs = sorted(-l for l in result.core if -l in rf.relax_vars)
        bound_hit = any(l not in rf.relax_vars and -l not in rf.relax_vars for l in result.core)
        if not core_softs and not bound_hit:
            return HardUnsat()
        relaxed.extend(core_softs)
        lam += 1
        if on_lower_bound is not None:
            on_lower_bound(lam)
        if relaxed and lam < len(relaxed):
            enc = encode_totalizer(relaxed, fresh_from=engine.num_vars + 1)
            engine.add_vars(len(enc.aux_vars))
            for clause in enc.clauses:
                engine.add_clause(clause)
        else:
            enc = None  # bound can't bite yet
