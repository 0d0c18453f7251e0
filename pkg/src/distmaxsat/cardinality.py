"""Totalizer encoding of "at most b of these literals are true".

The encoding builds a balanced tree of unary counters.  Output literal
`outputs[t-1]` is true exactly when at least t inputs are true; both
implication directions are emitted so the outputs are exact counters and can
witness lower bounds inside unsat cores.  Because the outputs are monotone,
a single assumption literal per bound suffices and one encoding serves every
bound from 0 to n.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AtMostEncoding:
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    aux_vars: range
    clauses: tuple[tuple[int, ...], ...]


def encode_totalizer(inputs, fresh_from: int) -> AtMostEncoding:
    """Build the counter tree; auxiliary variables start at `fresh_from`."""
    inputs = tuple(inputs)
    if not inputs:
        raise ValueError("totalizer needs at least one input")
    if len({abs(l) for l in inputs}) != len(inputs):
        raise ValueError("duplicate input variables")

    clauses: list[tuple[int, ...]] = []
    next_var = fresh_from

    def merge(lits: tuple[int, ...]) -> list[int]:
        nonlocal next_var
        if len(lits) == 1:
            return [lits[0]]
        mid = len(lits) // 2
        left = merge(lits[:mid])
        right = merge(lits[mid:])
        p, q = len(left), len(right)
        node = list(range(next_var, next_var + p + q))
        next_var += p + q
        for a in range(p + 1):
            for b in range(q + 1):
                s = a + b
                if s >= 1:
                    clause = []
                    if a > 0:
                        clause.append(-left[a - 1])
                    if b > 0:
                        clause.append(-right[b - 1])
                    clause.append(node[s - 1])
                    clauses.append(tuple(clause))
                if s <= p + q - 1:
                    clause = []
                    if a < p:
                        clause.append(left[a])
                    if b < q:
                        clause.append(right[b])
                    clause.append(-node[s])
                    clauses.append(tuple(clause))
        return node

    outputs = merge(inputs)
    return AtMostEncoding(
        inputs=inputs,
        outputs=tuple(outputs),
        aux_vars=range(fresh_from, next_var),
        clauses=tuple(clauses),
    )


def bound_assumptions(enc: AtMostEncoding, b: int) -> list[int]:
    """Assumption literals forbidding more than b true inputs.

    Monotone outputs make a single literal sufficient: ¬outputs[b] caps the
    count at b.  A bound of n restricts nothing.
    """
    n = len(enc.inputs)
    if b < 0 or b > n:
        raise ValueError(f"bound {b} outside 0..{n}")
    if b == n:
        return []
    return [-enc.outputs[b]]
