"""Instance updates: deltas, incremental conflict maintenance, measure bounds.

A delta inserts rows and deletes tids.  Conflicts are maintained without a
full rebuild: edges touching a deleted tid are dropped, and new edges are
found by enumerating only assignments that use at least one inserted fact
(atom i ranges over new facts, atoms before i over old facts, atoms after i
over all facts, for each i in turn, so every new assignment is seen once).

The bound checks turn the relative update size eps into exact-rational
sandwich inequalities between the measures before and after the update.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .conflicts import (ConflictHypergraph, Hyperedge, _minimal_images, assemble,
                        build_hypergraph, vertex_degrees)
from .errors import InputError
from .model import NULL, ConstraintSet, Fact, Instance


@dataclass(frozen=True)
class UpdateDelta:
    """Rows to insert (predicate, values) and tids to delete."""

    insertions: tuple[tuple[str, tuple[str, ...]], ...]
    deletions: frozenset[int]

    @property
    def is_insert_only(self):
        return not self.deletions and self.insertions

    @property
    def is_delete_only(self):
        return not self.insertions and self.deletions


@dataclass(frozen=True)
class BoundInequality:
    name: str
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


@dataclass(frozen=True)
class BoundCheckReport:
    """Exact before/after measures and the inequalities tying them together.

    applicable is False when the relative update size leaves the derivation's
    premises (empty instance, or eps >= 1); the bounds list is empty then.
    deleted_all_isolated reports whether every deleted tid was conflict-free,
    which is what licenses the strengthened deletion bound.
    """

    direction: str
    epsilon: Fraction
    before: Fraction
    after: Fraction
    applicable: bool
    bounds: tuple[BoundInequality, ...]
    deleted_all_isolated: bool | None = None

    def all_hold(self) -> bool:
        return all(b.holds for b in self.bounds)

    def to_json_dict(self) -> dict:
        return {
            "direction": self.direction,
            "epsilon": str(self.epsilon),
            "before": str(self.before),
            "after": str(self.after),
            "applicable": self.applicable,
            "deleted_all_isolated": self.deleted_all_isolated,
            "bounds": [{"name": b.name, "lhs": str(b.lhs), "rhs": str(b.rhs),
                        "holds": b.holds} for b in self.bounds],
        }


_INSERT_RE = re.compile(r"\+\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*\Z")
_DELETE_RE = re.compile(r"-\s*(\d+)\s*\Z")


def parse_delta(text: str) -> UpdateDelta:
    """Parse a delta file: `+ pred(v1, v2)` inserts, `- tid` deletes.

    Lines starting with # are comments.  Values are trimmed; CSV-style
    double quoting protects embedded commas or quotes.
    """
    insertions = []
    deletions = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("+"):
            m = _INSERT_RE.match(line)
            if not m:
                raise InputError("expected + pred(v1, ...)", line=lineno)
            inner = m.group(2)
            if not inner.strip():
                raise InputError("insertion needs at least one value", line=lineno)
            fields = next(csv.reader(io.StringIO(inner), skipinitialspace=True))
            insertions.append((m.group(1), tuple(v.strip() for v in fields)))
        elif line.startswith("-"):
            m = _DELETE_RE.match(line)
            if not m:
                raise InputError("expected - tid", line=lineno)
            deletions.add(int(m.group(1)))
        else:
            raise InputError(f"expected '+' or '-', got {line[0]!r}", line=lineno)
    return UpdateDelta(tuple(insertions), frozenset(deletions))


def apply_update(instance: Instance, delta: UpdateDelta) -> Instance:
    """New instance with deletions applied and insertions given fresh tids.

    Fresh tids continue above the previous maximum, in insertion order, so
    existing tids never change meaning.
    """
    existing = set(instance.tids)
    missing = delta.deletions - existing
    if missing:
        raise InputError(f"cannot delete unknown tid(s) {sorted(missing)}")
    kept = [f for f in instance.facts if f.tid not in delta.deletions]
    rows = {(f.predicate, f.values) for f in kept}
    next_tid = max(existing, default=0) + 1
    added = []
    for pred, values in delta.insertions:
        if pred not in instance.schema:
            raise InputError(f"insertion into unknown predicate {pred!r}")
        arity = instance.schema.predicate(pred).arity
        if len(values) != arity:
            raise InputError(f"insertion into {pred} has {len(values)} values, "
                             f"expected {arity}")
        if any(v == NULL for v in values):
            raise InputError(f"insertion into {pred} uses the reserved value {NULL}")
        row = (pred, values)
        if row in rows:
            raise InputError(f"insertion duplicates existing row {pred}{values!r}")
        rows.add(row)
        added.append(Fact(next_tid, pred, values))
        next_tid += 1
    endo = instance.endogenous - delta.deletions
    return Instance(instance.schema, tuple(kept) + tuple(added), endo)


def incremental_hypergraph(hg: ConflictHypergraph, instance: Instance,
                           delta: UpdateDelta,
                           constraints: ConstraintSet) -> ConflictHypergraph:
    """Conflicts of the updated instance, reusing the edges that survive."""
    after = apply_update(instance, delta)
    old_max = max(instance.tids, default=0)
    surviving = [e for e in hg.edges if not e.tids & delta.deletions]
    by_pred = after.facts_by_predicate()
    new_facts = [f for f in after.facts if f.tid > old_max]
    old_facts = [f for f in after.facts if f.tid <= old_max]
    hyperedges = list(surviving)
    if new_facts:
        for dc in constraints:
            m = len(dc.atoms)
            images = set()
            for i in range(m):
                candidates = [old_facts if k < i else (new_facts if k == i else None)
                              for k in range(m)]
                images |= _minimal_images(by_pred, dc, candidates)
            for image in images:
                hyperedges.append(Hyperedge(image, dc.name))
    return assemble(after.tids, hyperedges, [c.name for c in constraints])


def _exact_measure(instance: Instance, hg: ConflictHypergraph, node_budget) -> Fraction:
    if len(instance) == 0:
        return Fraction(0)
    sol = exact.min_hitting_set(hg, node_budget)
    return Fraction(len(sol.deleted), len(instance))


def check_insertion_bounds(instance: Instance, delta: UpdateDelta,
                           constraints: ConstraintSet,
                           node_budget=exact.DEFAULT_NODE_BUDGET,
                           hg_before=None, hg_after=None) -> BoundCheckReport:
    """Sandwich the post-insertion measure by the pre-insertion one.

    With eps = inserted/|D| < 1:
      upper: after <= before + eps/(1+eps)
      lower: before <= after/(1-eps)
    """
    if not delta.is_insert_only:
        raise InputError("insertion bounds need a pure insertion delta")
    if hg_before is None:
        hg_before = build_hypergraph(instance, constraints)
    if hg_after is None:
        hg_after = incremental_hypergraph(hg_before, instance, delta, constraints)
    after_instance = apply_update(instance, delta)
    n = len(instance)
    before = _exact_measure(instance, hg_before, node_budget)
    after = _exact_measure(after_instance, hg_after, node_budget)
    if n == 0:
        return BoundCheckReport("insert", Fraction(0), before, after, False, ())
    eps = Fraction(len(delta.insertions), n)
    if eps >= 1:
        return BoundCheckReport("insert", eps, before, after, False, ())
    bounds = (
        BoundInequality("upper", after, before + eps / (1 + eps)),
        BoundInequality("lower", before, after / (1 - eps)),
    )
    return BoundCheckReport("insert", eps, before, after, True, bounds)


def check_deletion_bounds(instance: Instance, delta: UpdateDelta,
                          constraints: ConstraintSet,
                          node_budget=exact.DEFAULT_NODE_BUDGET,
                          hg_before=None, hg_after=None) -> BoundCheckReport:
    """Sandwich the post-deletion measure by the pre-deletion one.

    With eps = deleted/|D| < 1:
      upper: after <= before/(1-eps)
      lower: before <= after/(1-eps) + eps
      lower_isolated: before <= after/(1-eps), valid when every deleted tid
      sat in no conflict
    """
    if not delta.is_delete_only:
        raise InputError("deletion bounds need a pure deletion delta")
    if hg_before is None:
        hg_before = build_hypergraph(instance, constraints)
    if hg_after is None:
        hg_after = incremental_hypergraph(hg_before, instance, delta, constraints)
    after_instance = apply_update(instance, delta)
    n = len(instance)
    before = _exact_measure(instance, hg_before, node_budget)
    after = _exact_measure(after_instance, hg_after, node_budget)
    degrees = vertex_degrees(hg_before)
    isolated = all(degrees.get(t, 0) == 0 for t in delta.deletions)
    if n == 0:
        return BoundCheckReport("delete", Fraction(0), before, after, False, (), isolated)
    eps = Fraction(len(delta.deletions), n)
    if eps >= 1:
        return BoundCheckReport("delete", eps, before, after, False, (), isolated)
    bounds = [
        BoundInequality("upper", after, before / (1 - eps)),
        BoundInequality("lower", before, after / (1 - eps) + eps),
    ]
    if isolated:
        bounds.append(BoundInequality("lower_isolated", before, after / (1 - eps)))
    return BoundCheckReport("delete", eps, before, after, True, tuple(bounds), isolated)
