"""Assignment enumeration for denial constraints.

One engine serves consistency checks, conflict detection, and attribute-level
repairs: matching and comparisons treat the reserved NULL placeholder as
incomparable (a join or comparison touching NULL never holds), which on
NULL-free data reduces to ordinary evaluation.
"""

from __future__ import annotations

import re

from .model import NULL, Comparison, Const, DenialConstraint, Var

_INT_RE = re.compile(r"-?\d+\Z")


def compare_values(a: str, op: str, b: str) -> bool:
    """Built-in comparison on opaque string values.

    Equality is string equality.  Order comparisons use numeric order when
    both sides parse as integers, lexicographic order otherwise.
    """
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if _INT_RE.match(a) and _INT_RE.match(b):
        x, y = int(a), int(b)
    else:
        x, y = a, b
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    if op == ">=":
        return x >= y
    raise ValueError(f"unknown operator {op!r}")


def _match_into(atom, fact, bindings):
    """Extend bindings so that atom matches fact; None if impossible.

    Returns the list of variable names newly bound (for backtracking).
    A fresh variable may bind NULL, but constants never match NULL and a
    bound variable never unifies with NULL (NULL is not equal to anything,
    itself included).
    """
    added = []
    for term, value in zip(atom.terms, fact.values):
        if isinstance(term, Const):
            if value == NULL or term.value != value:
                break
        elif term.name in bindings:
            prev = bindings[term.name]
            if prev == NULL or value == NULL or prev != value:
                break
        else:
            bindings[term.name] = value
            added.append(term.name)
    else:
        return added
    for name in added:
        del bindings[name]
    return None


def _comparison_holds(cmp: Comparison, bindings) -> bool:
    left = bindings[cmp.left.name] if isinstance(cmp.left, Var) else cmp.left.value
    right = bindings[cmp.right.name] if isinstance(cmp.right, Var) else cmp.right.value
    if left == NULL or right == NULL:
        return False
    return compare_values(left, cmp.op, right)


def iter_satisfying_assignments(facts_by_pred, constraint: DenialConstraint,
                                candidates=None):
    """Yield every assignment (one fact per atom) satisfying the constraint.

    facts_by_pred maps predicate names to fact sequences.  candidates, when
    given, is a per-atom list overriding the fact pool of individual atoms
    (entries may be None to keep the default); this is the hook used for
    delta-restricted enumeration after updates.
    """
    atoms = constraint.atoms
    n = len(atoms)
    pools = []
    for i, atom in enumerate(atoms):
        pool = None
        if candidates is not None:
            pool = candidates[i]
        if pool is None:
            pool = facts_by_pred.get(atom.predicate, ())
        pools.append(pool)
    assignment = [None] * n
    bindings: dict[str, str] = {}

    def extend(i):
        if i == n:
            if all(_comparison_holds(c, bindings) for c in constraint.comparisons):
                yield tuple(assignment)
            return
        atom = atoms[i]
        for fact in pools[i]:
            if fact.predicate != atom.predicate:
                continue
            added = _match_into(atom, fact, bindings)
            if added is None:
                continue
            assignment[i] = fact
            yield from extend(i + 1)
            for name in added:
                del bindings[name]

    yield from extend(0)


def satisfies_somewhere(facts, constraint: DenialConstraint) -> bool:
    """True iff some assignment over the given facts satisfies the constraint."""
    by_pred: dict[str, list] = {}
    for f in facts:
        by_pred.setdefault(f.predicate, []).append(f)
    for _ in iter_satisfying_assignments(by_pred, constraint):
        return True
    return False
