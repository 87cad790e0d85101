"""Inconsistency measures built on minimum deletion repairs.

The flagship measure is the share of facts a smallest consistency-restoring
deletion removes.  Because conflicts are an antichain, a sub-instance is
consistent exactly when its complement hits every conflict, so the ratio is
|minimum hitting set| / |D|; the subset-maximal and the maximum-cardinality
reading of "repair" give the same number.  Variant measures count repairs or
consistent subsets, or take the Jaccard distance to the repair intersection.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import approx, exact
from .conflicts import build_hypergraph
from .errors import InputError, ResourceLimitError
from .model import ConstraintSet, Instance

ENUM_LIMIT = 16


@dataclass(frozen=True)
class MeasureReport:
    """A measure value as the ratio of its defining quantities.

    numerator/denominator keep the raw counts (not reduced), value is the
    exact rational, exact says whether the numerator is certified optimal,
    and witness carries the solver artifact the number came from.
    """

    kind: str
    numerator: int
    denominator: int
    exact: bool
    method: str
    witness: object = None
    normalization: str | None = None
    note: str | None = None

    @property
    def value(self) -> Fraction:
        if self.denominator == 0:
            return Fraction(0)
        return Fraction(self.numerator, self.denominator)

    def to_json_dict(self) -> dict:
        deleted = None
        if isinstance(self.witness, exact.RepairSolution):
            deleted = sorted(self.witness.deleted)
        return {
            "kind": self.kind,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "decimal": float(self.value),
            "exact": self.exact,
            "witness_deleted_tids": deleted,
            "method": self.method,
        }


def inc_deg_g3(instance: Instance, constraints: ConstraintSet, hypergraph=None,
               solver="exact", eps=Fraction(1, 10), seed=0, reps=5,
               node_budget=exact.DEFAULT_NODE_BUDGET) -> MeasureReport:
    """Fraction of facts removed by a smallest consistency-restoring deletion.

    solver "exact" certifies the optimum; "local-ratio" and "randomized"
    over-approximate by at most a factor d (the latter in expectation).
    """
    hg = hypergraph if hypergraph is not None else build_hypergraph(instance, constraints)
    n = len(instance)
    if n == 0:
        # report 0/1 rather than 0/0 so the value is a well-formed fraction
        sol = exact.RepairSolution(frozenset(), 0, "exact", True)
        return MeasureReport("g3", 0, 1, True, "exact", sol,
                             note="empty instance is trivially consistent")
    if solver == "exact":
        sol = exact.min_hitting_set(hg, node_budget)
    elif solver == "local-ratio":
        sol = approx.local_ratio_hitting_set(hg)
    elif solver == "randomized":
        sol = approx.randomized_rounding_hitting_set(hg, eps, seed, reps)
    else:
        raise InputError(f"unknown solver {solver!r}")
    return MeasureReport("g3", len(sol.deleted), n, sol.optimal, sol.method, sol)


def inc_deg_g3_endogenous(instance: Instance, constraints: ConstraintSet,
                          hypergraph=None, normalization="db_size",
                          node_budget=exact.DEFAULT_NODE_BUDGET) -> MeasureReport:
    """Like inc_deg_g3, but only endogenous facts may be deleted.

    When some conflict contains no endogenous fact no allowed deletion set
    restores consistency, and the measure is pinned to 1.  normalization
    picks the denominator: the full instance size or the endogenous count.
    """
    if normalization not in ("db_size", "endogenous_size"):
        raise InputError(f"unknown normalization {normalization!r}")
    hg = hypergraph if hypergraph is not None else build_hypergraph(instance, constraints)
    n = len(instance)
    endo = instance.effective_endogenous()
    if n == 0:
        sol = exact.RepairSolution(frozenset(), 0, "exact", True)
        return MeasureReport("g3_endogenous", 0, 1, True, "exact", sol,
                             normalization=normalization,
                             note="empty instance is trivially consistent")
    den = n if normalization == "db_size" else len(endo)
    sol = exact.min_endogenous_hitting_set(hg, endo, node_budget)
    if sol is None:
        return MeasureReport(
            "g3_endogenous", den, den, True, "exact", None,
            normalization=normalization,
            note="some conflict contains no endogenous fact; "
                 "no allowed deletion restores consistency")
    return MeasureReport("g3_endogenous", len(sol.deleted), den, True, "exact",
                         sol, normalization=normalization)


def measure_count_srep(instance: Instance, constraints: ConstraintSet,
                       limit=ENUM_LIMIT, hypergraph=None) -> MeasureReport:
    """Number of subset-maximal repairs over the number of sub-instances."""
    reps = exact.enumerate_s_repairs(instance, constraints, limit, hypergraph)
    return MeasureReport("count_srep", len(reps.repairs), 2 ** len(instance),
                         True, "enumeration", reps)


def measure_count_all(instance: Instance, constraints: ConstraintSet,
                      limit=ENUM_LIMIT, hypergraph=None) -> MeasureReport:
    """Share of sub-instances that are inconsistent.

    A sub-instance is consistent exactly when it contains no conflict whole,
    so consistent subsets are counted by a superset-closure sweep.
    """
    n = len(instance)
    if n > limit:
        raise ResourceLimitError(
            f"instance has {n} facts, subset counting is limited to {limit}")
    hg = hypergraph if hypergraph is not None else build_hypergraph(instance, constraints)
    order = {t: i for i, t in enumerate(instance.tids)}
    bad = bytearray(1 << n)
    for e in hg.solving_edges:
        m = 0
        for t in e:
            m |= 1 << order[t]
        bad[m] = 1
    for b in range(n):
        bit = 1 << b
        for m in range(1 << n):
            if m & bit and bad[m ^ bit]:
                bad[m] = 1
    consistent = (1 << n) - sum(bad)
    return MeasureReport("count_all", (1 << n) - consistent, 1 << n,
                         True, "enumeration")


def measure_jaccard(instance: Instance, constraints: ConstraintSet,
                    limit=ENUM_LIMIT, hypergraph=None) -> MeasureReport:
    """Jaccard distance between the instance and what all repairs agree on."""
    n = len(instance)
    reps = exact.enumerate_s_repairs(instance, constraints, limit, hypergraph)
    if n == 0:
        return MeasureReport("jaccard", 0, 1, True, "enumeration", reps,
                             note="empty instance is trivially consistent")
    core = frozenset(instance.tids)
    for r in reps.repairs:
        core &= r
    return MeasureReport("jaccard", n - len(core), n, True, "enumeration", reps)
