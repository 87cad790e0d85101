"""Shared fixtures: worked-example bundles and a seeded random corpus."""

import random

import pytest

from incmeter.conflicts import build_hypergraph
from incmeter.exact import brute_force_min_hitting_set, min_hitting_set
from incmeter.model import Fact, Instance, load_instance, parse_constraints, parse_schema

# --- small hand-checked bundles -------------------------------------------


def pqr_bundle():
    """Two binary join constraints; deleting p(a) (tid 1) fixes everything."""
    schema = parse_schema("p(A)\nq(A, B)\nr(A, C)\n")
    constraints = parse_constraints(
        "dc no_pq : !exists p(x), q(x, y)\n"
        "dc no_pr : !exists p(x), r(x, y)\n", schema)
    instance = load_instance(
        {"p": "A\na\ne\n", "q": "A,B\na,b\n", "r": "A,C\na,c\n"}, schema)
    return schema, constraints, instance


def fd_bundle():
    """One relation under two key dependencies; min repair deletes row 2."""
    schema = parse_schema("rel(A, B, C)\n")
    constraints = parse_constraints(
        "fd f1 : rel : A -> B\nfd f2 : rel : C -> B\n", schema)
    instance = load_instance(
        {"rel": "A,B,C\na,b,d\na,e,c\na,b,c\n"}, schema)
    return schema, constraints, instance


def null_bundle():
    """Join constraint where a single cell blanking beats tuple deletion."""
    schema = parse_schema("s(A)\nr(A, B)\n")
    constraints = parse_constraints("dc no_sr : !exists s(x), r(x, y)\n", schema)
    facts = (Fact(1, "s", ("a2",)), Fact(2, "s", ("a3",)),
             Fact(3, "r", ("a3", "a1")), Fact(4, "r", ("a3", "a4")),
             Fact(5, "r", ("a3", "a5")))
    return schema, constraints, Instance(schema, facts)


@pytest.fixture(scope="session")
def pqr():
    return pqr_bundle()


@pytest.fixture(scope="session")
def fd():
    return fd_bundle()


@pytest.fixture(scope="session")
def nullb():
    return null_bundle()


# --- random corpus ----------------------------------------------------------

RANDOM_SCHEMA = parse_schema("r(A, B)\ns(A)\n")

CONSTRAINT_POOL = (
    "dc join_rs : !exists r(x, y), s(x)",
    "dc sym_r : !exists r(x, y), r(y, x)",
    "fd key_r : r : A -> B",
    "dc path_rs : !exists r(x, y), r(y, z), s(z)",
    "dc two_s : !exists s(x), s(y), x < y",
)


def random_bundle(rng: random.Random, max_rows=12):
    """One random instance with 1-3 constraints from the pool, d <= 3."""
    picked = rng.sample(CONSTRAINT_POOL, rng.randint(1, 3))
    constraints = parse_constraints("\n".join(picked), RANDOM_SCHEMA)
    domain = ["a", "b", "c", "d"]
    n_r = rng.randint(0, max_rows - 3)
    n_s = rng.randint(0, 3)
    rows_r = set()
    for _ in range(n_r):
        rows_r.add((rng.choice(domain), rng.choice(domain)))
    rows_s = set()
    for _ in range(n_s):
        rows_s.add((rng.choice(domain),))
    sources = {}
    if rows_r:
        sources["r"] = "A,B\n" + "".join(f"{a},{b}\n" for a, b in sorted(rows_r))
    if rows_s:
        sources["s"] = "A\n" + "".join(f"{a}\n" for (a,) in sorted(rows_s))
    instance = load_instance(sources, RANDOM_SCHEMA)
    return constraints, instance


class CorpusItem:
    """A random instance with its conflicts and certified optimum."""

    def __init__(self, constraints, instance):
        self.constraints = constraints
        self.instance = instance
        self.hg = build_hypergraph(instance, constraints)
        self.opt = min_hitting_set(self.hg)
        self.brute = brute_force_min_hitting_set(self.hg)


@pytest.fixture(scope="session")
def corpus():
    """500 seeded random instances shared across test modules."""
    rng = random.Random(20240817)
    return [CorpusItem(*random_bundle(rng)) for _ in range(500)]
