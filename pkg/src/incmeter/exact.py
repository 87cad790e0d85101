"""Exact minimum hitting sets and repair enumeration over conflict hypergraphs.

The search is a bounded branch-and-bound tree: branch on a smallest unhit
edge, try its vertices in descending degree order, prune with a greedy
disjoint-edge matching lower bound.  With edge sizes bounded by d the tree
has at most d^k nodes for answer size k, so small covers are found quickly
even on large instances.  An explicit node budget turns pathological inputs
into a clean error instead of a silent timeout or a wrong answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .conflicts import ConflictHypergraph, build_hypergraph
from .errors import ResourceLimitError
from .model import ConstraintSet, Instance

DEFAULT_NODE_BUDGET = 10_000_000


@dataclass(frozen=True)
class RepairSolution:
    """A deletion set and the size of the repair (facts kept) it induces."""

    deleted: frozenset[int]
    repair_size: int
    method: str
    optimal: bool


@dataclass(frozen=True)
class RepairSet:
    """Enumerated repairs (kept tid sets); kind is "s" or "c"."""

    repairs: tuple[frozenset[int], ...]
    kind: str


def solve_min_hitting_set(edge_sets, allowed=None, node_budget=DEFAULT_NODE_BUDGET):
    """Minimum set of elements meeting every edge, or None if impossible.

    edge_sets is a sequence of element sets (any sortable hashable elements).
    allowed, when given, restricts which elements may be picked; an edge with
    no allowed element makes the problem infeasible (None).  Raises
    ResourceLimitError when the branch tree exceeds node_budget.
    """
    edges = {frozenset(e) for e in edge_sets}
    if not edges:
        return frozenset()
    universe = sorted(set().union(*edges))
    if allowed is not None:
        allowed = frozenset(allowed)
        universe = [u for u in universe if u in allowed]
        # restricting each edge to pickable elements preserves the problem
        restricted = []
        for e in edges:
            r = e & allowed
            if not r:
                return None
            restricted.append(r)
        edges = set(restricted)
    index = {u: i for i, u in enumerate(universe)}
    masks = sorted({_mask(e, index) for e in edges})
    n = len(universe)

    degree = [0] * n
    for m in masks:
        for b in _bits(m):
            degree[b] += 1
    # branch order inside an edge: highest degree first, index breaks ties
    rank = sorted(range(n), key=lambda b: (-degree[b], b))
    rank_pos = [0] * n
    for pos, b in enumerate(rank):
        rank_pos[b] = pos

    best_mask = _greedy_cover(masks, n, degree)
    lr = _take_whole_edges(masks)
    if _popcount(lr) < _popcount(best_mask):
        best_mask = lr

    best = [best_mask, _popcount(best_mask)]
    nodes = [0]

    def lower_bound(cover):
        lb = 0
        blocked = 0
        for m in masks:
            if m & cover or m & blocked:
                continue
            lb += 1
            blocked |= m
        return lb

    def branch(cover, size):
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise ResourceLimitError(
                f"hitting-set search exceeded the node budget ({node_budget} nodes)",
                best_size=best[1], lower_bound=None)
        pick = -1
        pick_size = n + 1
        for m in masks:
            if m & cover:
                continue
            c = _popcount(m)
            if c < pick_size:
                pick, pick_size = m, c
                if c == 1:
                    break
        if pick == -1:
            if size < best[1]:
                best[0], best[1] = cover, size
            return
        if size + 1 >= best[1]:
            return
        if size + lower_bound(cover) >= best[1]:
            return
        for b in sorted(_bits(pick), key=lambda b: rank_pos[b]):
            branch(cover | (1 << b), size + 1)

    branch(0, 0)
    return frozenset(universe[b] for b in _bits(best[0]))


def _mask(elements, index):
    m = 0
    for e in elements:
        m |= 1 << index[e]
    return m


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(mask):
    return bin(mask).count("1")


def _greedy_cover(masks, n, degree):
    """Repeatedly take the vertex hitting the most unhit edges."""
    cover = 0
    remaining = [m for m in masks]
    while remaining:
        counts = {}
        for m in remaining:
            for b in _bits(m):
                counts[b] = counts.get(b, 0) + 1
        b = min(counts, key=lambda b: (-counts[b], b))
        cover |= 1 << b
        remaining = [m for m in remaining if not m & cover]
    return cover


def _take_whole_edges(masks):
    """Union of a maximal set of pairwise-disjoint edges: a d-approximation."""
    cover = 0
    for m in masks:
        if not m & cover:
            cover |= m
    return cover


def min_hitting_set(hg: ConflictHypergraph,
                    node_budget=DEFAULT_NODE_BUDGET) -> RepairSolution:
    """Smallest deletion set covering every solving edge; always optimal."""
    deleted = solve_min_hitting_set(hg.solving_edges, None, node_budget)
    return RepairSolution(deleted, len(hg.vertices) - len(deleted), "exact", True)


def min_endogenous_hitting_set(hg: ConflictHypergraph, endogenous,
                               node_budget=DEFAULT_NODE_BUDGET):
    """Like min_hitting_set but only endogenous tids may be deleted.

    Returns None when some conflict contains no endogenous tid at all, in
    which case no allowed deletion set can restore consistency.
    """
    deleted = solve_min_hitting_set(hg.solving_edges, frozenset(endogenous), node_budget)
    if deleted is None:
        return None
    return RepairSolution(deleted, len(hg.vertices) - len(deleted), "exact", True)


def brute_force_min_hitting_set(hg: ConflictHypergraph, max_active=22) -> RepairSolution:
    """Reference solver: try all subsets by ascending size, lexicographic order."""
    active = sorted(set().union(*hg.solving_edges)) if hg.solving_edges else []
    if len(active) > max_active:
        raise ResourceLimitError(
            f"{len(active)} conflicting tids exceed the brute-force limit {max_active}")
    index = {t: i for i, t in enumerate(active)}
    masks = [_mask(e, index) for e in hg.solving_edges]
    for k in range(len(active) + 1):
        for combo in itertools.combinations(active, k):
            m = _mask(combo, index)
            if all(m & e for e in masks):
                return RepairSolution(frozenset(combo),
                                      len(hg.vertices) - k, "brute", True)
    raise AssertionError("unreachable: the full active set hits every edge")


def enumerate_s_repairs(instance: Instance, constraints: ConstraintSet,
                        limit=16, hypergraph=None) -> RepairSet:
    """All subset-maximal consistent sub-instances, as kept tid sets.

    Exhaustive over the conflicting tids, hence gated by an instance-size
    limit.  Facts outside every conflict belong to every repair.
    """
    if len(instance) > limit:
        raise ResourceLimitError(
            f"instance has {len(instance)} facts, repair enumeration is limited to {limit}")
    hg = hypergraph or build_hypergraph(instance, constraints)
    all_tids = set(instance.tids)
    repairs = [frozenset(all_tids - deleted)
               for deleted in enumerate_minimal_hitting_sets(hg.solving_edges)]
    repairs.sort(key=lambda r: tuple(sorted(r)))
    return RepairSet(tuple(repairs), "s")


def enumerate_minimal_hitting_sets(edge_sets, max_elements=22):
    """All minimal sets meeting every edge, canonically ordered.

    Exhaustive over the union of the edges (2^n masks with a superset-closure
    sweep), hence capped by max_elements.
    """
    active = sorted(set().union(*edge_sets)) if edge_sets else []
    a = len(active)
    if a > max_elements:
        raise ResourceLimitError(
            f"{a} elements exceed the enumeration limit {max_elements}")
    index = {t: i for i, t in enumerate(active)}
    masks = [_mask(e, index) for e in edge_sets]
    full = (1 << a) - 1
    # superset closure: bad[m] = 1 iff some edge lies entirely inside m,
    # so a hitting mask m covers every edge iff not bad[full ^ m]
    bad = bytearray(1 << a)
    for m in masks:
        bad[m] = 1
    for b in range(a):
        bit = 1 << b
        for m in range(1 << a):
            if m & bit and bad[m ^ bit]:
                bad[m] = 1
    out = []
    for m in range(1 << a):
        if bad[full ^ m]:
            continue
        if any(not bad[full ^ (m ^ (1 << b))] for b in _bits(m)):
            continue  # some element is redundant
        out.append(frozenset(active[b] for b in _bits(m)))
    out.sort(key=lambda s: (len(s), tuple(sorted(s))))
    return tuple(out)


def enumerate_c_repairs(instance: Instance, constraints: ConstraintSet,
                        limit=16, hypergraph=None) -> RepairSet:
    """The maximum-cardinality repairs: largest kept sets among the maximal ones."""
    s = enumerate_s_repairs(instance, constraints, limit, hypergraph)
    top = max((len(r) for r in s.repairs), default=0)
    return RepairSet(tuple(r for r in s.repairs if len(r) == top), "c")
