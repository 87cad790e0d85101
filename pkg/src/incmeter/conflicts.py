"""Conflict hypergraphs: subset-minimal violation sets of an instance.

Vertices are tids.  Every satisfying assignment of a constraint contributes
its image (the set of matched tids) as a candidate edge; a candidate is kept
only if it is subset-minimal, i.e. no proper subset still violates the same
constraint.  Because satisfiability only grows with more facts, checking the
one-smaller subsets is enough.

Deleting one vertex from every solving edge is exactly what a deletion
repair must do, so minimum hitting sets of the solving edges are the object
every measure in this package is built on.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import evaluation
from .model import ConstraintSet, DenialConstraint, Instance


@dataclass(frozen=True)
class Hyperedge:
    """A minimal violation set, labeled with the constraint it violates."""

    tids: frozenset[int]
    constraint: str

    def key(self):
        return tuple(sorted(self.tids))


@dataclass(frozen=True)
class ConflictHypergraph:
    """All minimal violations of an instance, in canonical order.

    edges keeps one entry per (constraint, tid set) pair.  solving_edges is
    the deduplicated antichain across constraints: supersets of other edges
    are dropped since any hitting set already covers them.  d is the largest
    solving edge size (0 when the instance is consistent).
    """

    vertices: frozenset[int]
    edges: tuple[Hyperedge, ...]
    solving_edges: tuple[frozenset[int], ...]
    d: int

    @property
    def is_consistent(self) -> bool:
        return not self.solving_edges

    @property
    def max_degree(self) -> int:
        degs = vertex_degrees(self)
        return max(degs.values(), default=0)

    def dump_lines(self) -> list[str]:
        """Diagnostic dump: one line per edge, `<constraint>: tid,tid,...`."""
        return [f"{e.constraint}: {','.join(str(t) for t in e.key())}"
                for e in self.edges]


def _minimal_images(instance_facts_by_pred, dc: DenialConstraint,
                    candidates=None) -> set[frozenset[int]]:
    """Images of satisfying assignments, reduced to the subset-minimal ones."""
    by_tid = {}
    images = set()
    for assignment in evaluation.iter_satisfying_assignments(
            instance_facts_by_pred, dc, candidates):
        for f in assignment:
            by_tid[f.tid] = f
        images.add(frozenset(f.tid for f in assignment))
    minimal = set()
    for image in images:
        if len(image) > 1 and any(
                evaluation.satisfies_somewhere(
                    [by_tid[t] for t in image if t != drop], dc)
                for drop in image):
            continue
        minimal.add(image)
    return minimal


def assemble(vertices, hyperedges, constraint_order=()) -> ConflictHypergraph:
    """Canonicalize edges and compute the solving antichain and d.

    Edges are assumed subset-minimal within their own constraint; supersets
    across constraints (and duplicates) are dropped from solving_edges here.
    """
    order = {name: i for i, name in enumerate(constraint_order)}
    edges = tuple(sorted(set(hyperedges),
                         key=lambda e: (order.get(e.constraint, len(order)),
                                        e.constraint, e.key())))
    tid_sets = sorted({e.tids for e in edges}, key=lambda s: tuple(sorted(s)))
    solving = []
    for s in tid_sets:
        if not any(t < s for t in tid_sets):
            solving.append(s)
    d = max((len(s) for s in solving), default=0)
    return ConflictHypergraph(frozenset(vertices), edges, tuple(solving), d)


def build_hypergraph(instance: Instance, constraints: ConstraintSet) -> ConflictHypergraph:
    """Enumerate all minimal violation sets of the instance."""
    by_pred = instance.facts_by_predicate()
    hyperedges = []
    for dc in constraints:
        for image in _minimal_images(by_pred, dc):
            hyperedges.append(Hyperedge(image, dc.name))
    return assemble(instance.tids, hyperedges, [c.name for c in constraints])


def hypergraph_from_edges(vertices, edge_sets, assume_minimal=False) -> ConflictHypergraph:
    """Build a hypergraph directly from tid sets (synthetic/benchmark input).

    With assume_minimal the antichain filtering is skipped, which keeps very
    large random edge collections affordable; callers vouch that no edge
    contains another.
    """
    vertices = frozenset(vertices)
    sets = []
    seen = set()
    for e in edge_sets:
        s = frozenset(e)
        if not s:
            raise ValueError("empty edge")
        if not s <= vertices:
            raise ValueError(f"edge {sorted(s)} not within vertex set")
        if s not in seen:
            seen.add(s)
            sets.append(s)
    if assume_minimal:
        solving = tuple(sorted(sets, key=lambda s: tuple(sorted(s))))
        edges = tuple(Hyperedge(s, "synthetic") for s in solving)
        d = max((len(s) for s in solving), default=0)
        return ConflictHypergraph(vertices, edges, solving, d)
    return assemble(vertices, [Hyperedge(s, "synthetic") for s in sets], ["synthetic"])


def vertex_degrees(hg: ConflictHypergraph) -> dict[int, int]:
    """Number of solving edges through each vertex; all vertices included."""
    degrees = {t: 0 for t in sorted(hg.vertices)}
    for s in hg.solving_edges:
        for t in s:
            degrees[t] += 1
    return degrees
