"""Relational model: schemas, facts, denial constraints, parsing, loading.

A database instance is a finite set of facts over a fixed schema, every fact
carrying an integer tuple id (tid).  Integrity is expressed with denial
constraints: negated existential conjunctions of relational atoms plus
built-in comparisons.  Functional dependencies are accepted as sugar and
expanded into the two-atom denial form.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

from .errors import InputError

# Reserved placeholder written into cells by attribute-level repairs.
# It is not a legal value in input data.
NULL = "NULL"

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"-?\d+\Z")


# ---------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class Predicate:
    """A relation name with its ordered attribute names."""

    name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise InputError(f"invalid predicate name {self.name!r}")
        if len(self.attributes) == 0:
            raise InputError(f"predicate {self.name} has no attributes")
        seen = set()
        for a in self.attributes:
            if not _IDENT_RE.match(a):
                raise InputError(f"invalid attribute name {a!r} in predicate {self.name}")
            if a in seen:
                raise InputError(f"duplicate attribute {a} in predicate {self.name}")
            seen.add(a)

    @property
    def arity(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True)
class Schema:
    """An ordered collection of predicates with unique names."""

    predicates: tuple[Predicate, ...]

    def __post_init__(self):
        names = [p.name for p in self.predicates]
        if len(names) != len(set(names)):
            raise InputError("duplicate predicate name in schema")
        object.__setattr__(self, "_by_name", {p.name: p for p in self.predicates})

    def predicate(self, name: str) -> Predicate:
        try:
            return self._by_name[name]
        except KeyError:
            raise InputError(f"unknown predicate {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def predicate_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.predicates)


def parse_schema(text: str) -> Schema:
    """Parse a schema file: one `Name(Attr, ...)` declaration per line.

    Blank lines and `#` comments are ignored.
    """
    decl_re = re.compile(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<attrs>[^()]*)\)\s*\Z")
    predicates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = decl_re.match(line)
        if not m:
            raise InputError(f"expected predicate declaration like R(A, B), got {line!r}",
                             line=lineno)
        attrs = tuple(a.strip() for a in m.group("attrs").split(","))
        if attrs == ("",):
            raise InputError(f"predicate {m.group('name')} declares no attributes",
                             line=lineno)
        try:
            predicates.append(Predicate(m.group("name"), attrs))
        except InputError as exc:
            raise InputError(str(exc), line=lineno) from None
    return Schema(tuple(predicates))


# ---------------------------------------------------------------------------
# facts and instances


@dataclass(frozen=True, order=True)
class Fact:
    """A ground atom with a tuple id; values are opaque strings."""

    tid: int
    predicate: str
    values: tuple[str, ...]

    def __str__(self):
        return f"{self.predicate}[{self.tid}]({', '.join(self.values)})"


@dataclass(frozen=True)
class Instance:
    """A database instance: facts over a schema, ordered by tid.

    An optional endogenous set marks the tids the application is allowed to
    delete; an empty set means no partition was declared, in which case every
    fact counts as endogenous.
    """

    schema: Schema
    facts: tuple[Fact, ...]
    endogenous: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        ordered = tuple(sorted(self.facts, key=lambda f: f.tid))
        object.__setattr__(self, "facts", ordered)
        seen_tids = set()
        seen_rows = set()
        by_pred: dict[str, list[Fact]] = {}
        for f in ordered:
            if not isinstance(f.tid, int) or f.tid < 1:
                raise InputError(f"tid must be a positive integer, got {f.tid!r}")
            if f.tid in seen_tids:
                raise InputError(f"duplicate tid {f.tid}")
            seen_tids.add(f.tid)
            pred = self.schema.predicate(f.predicate)
            if len(f.values) != pred.arity:
                raise InputError(
                    f"fact {f} has {len(f.values)} values, {f.predicate} expects {pred.arity}")
            if any(v == NULL for v in f.values):
                raise InputError(f"fact {f} uses the reserved value {NULL}")
            row = (f.predicate, f.values)
            if row in seen_rows:
                raise InputError(f"duplicate row {f.predicate}{f.values!r}")
            seen_rows.add(row)
            by_pred.setdefault(f.predicate, []).append(f)
        stray = self.endogenous - seen_tids
        if stray:
            raise InputError(f"endogenous tids not present in instance: {sorted(stray)}")
        object.__setattr__(self, "_by_pred", {p: tuple(fs) for p, fs in by_pred.items()})
        object.__setattr__(self, "_by_tid", {f.tid: f for f in ordered})

    def __len__(self):
        return len(self.facts)

    @property
    def tids(self) -> tuple[int, ...]:
        return tuple(f.tid for f in self.facts)

    def fact(self, tid: int) -> Fact:
        try:
            return self._by_tid[tid]
        except KeyError:
            raise InputError(f"no fact with tid {tid}") from None

    def facts_by_predicate(self) -> dict[str, tuple[Fact, ...]]:
        return dict(self._by_pred)

    def effective_endogenous(self) -> frozenset[int]:
        # no declared partition means everything may be touched
        if not self.endogenous:
            return frozenset(self._by_tid)
        return self.endogenous

    def restrict(self, keep_tids) -> "Instance":
        """Sub-instance consisting of the given tids (endogenous set restricted too)."""
        keep = frozenset(keep_tids)
        return Instance(self.schema,
                        tuple(f for f in self.facts if f.tid in keep),
                        self.endogenous & keep)


def load_instance(csv_sources, schema: Schema, endogenous_tids=None) -> Instance:
    """Build an instance from per-predicate CSV sources.

    csv_sources maps predicate names to CSV content (str, bytes, or a file
    object).  Each CSV carries a header row that must match the predicate's
    attributes exactly.  Predicates without a source are loaded empty.  Tids
    are assigned deterministically: predicates in ascending name order, then
    file row order, counting from 1.
    """
    unknown = set(csv_sources) - set(schema.predicate_names)
    if unknown:
        raise InputError(f"csv source for unknown predicate(s): {sorted(unknown)}")
    facts = []
    next_tid = 1
    for name in sorted(schema.predicate_names):
        if name not in csv_sources:
            continue
        pred = schema.predicate(name)
        raw = csv_sources[name]
        if isinstance(raw, bytes):
            text = raw.decode("utf-8")
        elif isinstance(raw, str):
            text = raw
        else:
            data = raw.read()
            text = data.decode("utf-8") if isinstance(data, bytes) else data
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise InputError(f"{name}: empty csv, expected a header row")
        header = tuple(h.strip() for h in rows[0])
        if header != pred.attributes:
            raise InputError(
                f"{name}: header {header!r} does not match attributes {pred.attributes!r}")
        seen = set()
        for idx, row in enumerate(rows[1:], start=2):
            if not row:
                continue  # stray blank line
            if len(row) != pred.arity:
                raise InputError(f"{name}: row has {len(row)} fields, expected {pred.arity}",
                                 line=idx)
            values = tuple(row)
            if any(v == NULL for v in values):
                raise InputError(f"{name}: the value {NULL} is reserved", line=idx)
            if values in seen:
                raise InputError(f"{name}: duplicate row {values!r}", line=idx)
            seen.add(values)
            facts.append(Fact(next_tid, name, values))
            next_tid += 1
    endo = frozenset()
    if endogenous_tids is not None:
        endo = frozenset(int(t) for t in endogenous_tids)
    return Instance(schema, tuple(facts), endo)


# ---------------------------------------------------------------------------
# constraint terms and constraints


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: str

    def __str__(self):
        if _INT_RE.match(self.value) or (self.value and self.value[0].isupper()
                                         and _IDENT_RE.match(self.value)):
            return self.value
        return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple

    def variables(self) -> set[str]:
        return {t.name for t in self.terms if isinstance(t, Var)}

    def __str__(self):
        return f"{self.predicate}({', '.join(str(t) for t in self.terms)})"


@dataclass(frozen=True)
class Comparison:
    left: object
    op: str
    right: object

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise InputError(f"unsupported comparison operator {self.op!r}")

    def variables(self) -> set[str]:
        out = set()
        for t in (self.left, self.right):
            if isinstance(t, Var):
                out.add(t.name)
        return out

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class DenialConstraint:
    """Forbids any assignment satisfying all atoms and all comparisons."""

    name: str
    atoms: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()

    def __post_init__(self):
        if not self.atoms:
            raise InputError(f"constraint {self.name}: at least one atom is required")
        atom_vars = set()
        for a in self.atoms:
            atom_vars |= a.variables()
        for c in self.comparisons:
            loose = c.variables() - atom_vars
            if loose:
                raise InputError(
                    f"constraint {self.name}: unsafe variable(s) {sorted(loose)} "
                    "appear only in comparisons")

    def variables(self) -> set[str]:
        out = set()
        for a in self.atoms:
            out |= a.variables()
        return out

    def __str__(self):
        parts = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        return f"dc {self.name} : !exists {', '.join(parts)}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[DenialConstraint, ...]

    def __post_init__(self):
        names = [c.name for c in self.constraints]
        if len(names) != len(set(names)):
            raise InputError("duplicate constraint name")

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    @property
    def max_atoms(self) -> int:
        """Largest atom count over the set; bounds every conflict's size."""
        return max((len(c.atoms) for c in self.constraints), default=0)

    def restricted_to(self, names) -> "ConstraintSet":
        """Keep only the constraints whose names appear in `names`."""
        wanted = set(names)
        missing = wanted - {c.name for c in self.constraints}
        if missing:
            raise InputError(f"unknown constraint name: {sorted(missing)[0]}")
        return ConstraintSet(tuple(c for c in self.constraints if c.name in wanted))


# ---------------------------------------------------------------------------
# constraint parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#.*)
      | (?P<arrow>->)
      | (?P<op>!=|<=|>=|=|<|>)
      | (?P<bang>!)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<comma>,)
      | (?P<colon>:)
      | (?P<number>-?\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<string>"(?:[^"\\]|\\.)*")
    """,
    re.VERBOSE,
)


def _tokenize_line(line: str, lineno: int):
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise InputError(f"unexpected character {line[pos]!r}", line=lineno, column=pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            tokens.append((kind, m.group(), lineno, pos + 1))
        pos = m.end()
    return tokens


class _LineParser:
    """Recursive-descent parser over one tokenized constraint line."""

    def __init__(self, tokens, lineno):
        self.tokens = tokens
        self.lineno = lineno
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise InputError("unexpected end of line", line=self.lineno)
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.next()
        if tok[0] != kind or (text is not None and tok[1] != text):
            want = text or kind
            raise InputError(f"expected {want!r}, got {tok[1]!r}", line=tok[2], column=tok[3])
        return tok

    def at_end(self):
        return self.i >= len(self.tokens)

    def parse_term(self):
        tok = self.next()
        kind, text = tok[0], tok[1]
        if kind == "ident":
            if text[0].islower():
                return Var(text)
            return Const(text)
        if kind == "number":
            return Const(text)
        if kind == "string":
            body = text[1:-1]
            return Const(body.replace('\\"', '"').replace("\\\\", "\\"))
        raise InputError(f"expected a term, got {text!r}", line=tok[2], column=tok[3])

    def parse_atom(self, schema):
        nametok = self.expect("ident")
        predname = nametok[1]
        if predname not in schema:
            raise InputError(f"unknown predicate {predname!r}",
                             line=nametok[2], column=nametok[3])
        self.expect("lpar")
        terms = [self.parse_term()]
        while self.peek() and self.peek()[0] == "comma":
            self.next()
            terms.append(self.parse_term())
        self.expect("rpar")
        pred = schema.predicate(predname)
        if len(terms) != pred.arity:
            raise InputError(
                f"{predname} takes {pred.arity} terms, got {len(terms)}",
                line=nametok[2], column=nametok[3])
        return Atom(predname, tuple(terms))

    def parse_comparison(self):
        left = self.parse_term()
        tok = self.next()
        if tok[0] != "op":
            raise InputError(f"expected a comparison operator, got {tok[1]!r}",
                             line=tok[2], column=tok[3])
        right = self.parse_term()
        return Comparison(left, tok[1], right)


def _looks_like_atom(parser: _LineParser) -> bool:
    tok = parser.peek()
    nxt = parser.tokens[parser.i + 1] if parser.i + 1 < len(parser.tokens) else None
    return tok is not None and tok[0] == "ident" and nxt is not None and nxt[0] == "lpar"


def _parse_dc_line(parser: _LineParser, schema: Schema) -> DenialConstraint:
    nametok = parser.expect("ident")
    parser.expect("colon")
    parser.expect("bang")
    kw = parser.expect("ident")
    if kw[1] != "exists":
        raise InputError(f"expected 'exists' after '!', got {kw[1]!r}",
                         line=kw[2], column=kw[3])
    atoms = [parser.parse_atom(schema)]
    comparisons = []
    while not parser.at_end():
        parser.expect("comma")
        if _looks_like_atom(parser):
            if comparisons:
                tok = parser.peek()
                raise InputError("atoms must precede comparisons",
                                 line=tok[2], column=tok[3])
            atoms.append(parser.parse_atom(schema))
        else:
            comparisons.append(parser.parse_comparison())
    return DenialConstraint(nametok[1], tuple(atoms), tuple(comparisons))


def _parse_fd_line(parser: _LineParser, schema: Schema) -> DenialConstraint:
    nametok = parser.expect("ident")
    parser.expect("colon")
    predtok = parser.expect("ident")
    if predtok[1] not in schema:
        raise InputError(f"unknown predicate {predtok[1]!r}",
                         line=predtok[2], column=predtok[3])
    pred = schema.predicate(predtok[1])
    parser.expect("colon")
    det = [parser.expect("ident")[1]]
    while parser.peek() and parser.peek()[0] == "comma":
        parser.next()
        det.append(parser.expect("ident")[1])
    parser.expect("arrow")
    deptok = parser.expect("ident")
    dep = deptok[1]
    if not parser.at_end():
        tok = parser.peek()
        raise InputError(f"unexpected trailing input {tok[1]!r}", line=tok[2], column=tok[3])
    for a in det + [dep]:
        if a not in pred.attributes:
            raise InputError(f"{pred.name} has no attribute {a!r}", line=nametok[2])
    if len(det) != len(set(det)):
        raise InputError("duplicate attribute in determinant", line=nametok[2])
    if dep in det:
        raise InputError("dependent attribute also listed in determinant", line=nametok[2])
    return _expand_fd(nametok[1], pred, tuple(det), dep)


def _expand_fd(name: str, pred: Predicate, det: tuple[str, ...], dep: str) -> DenialConstraint:
    """Two-atom denial form: shared determinant vars, distinct dependent vars."""
    det_var = {a: Var(f"x{i}") for i, a in enumerate(det, start=1)}
    terms1, terms2 = [], []
    free = 0
    for a in pred.attributes:
        if a in det_var:
            terms1.append(det_var[a])
            terms2.append(det_var[a])
        elif a == dep:
            terms1.append(Var("y1"))
            terms2.append(Var("y2"))
        else:
            free += 1
            terms1.append(Var(f"z{2 * free - 1}"))
            terms2.append(Var(f"z{2 * free}"))
    atoms = (Atom(pred.name, tuple(terms1)), Atom(pred.name, tuple(terms2)))
    return DenialConstraint(name, atoms, (Comparison(Var("y1"), "!=", Var("y2")),))


def parse_constraints(text: str, schema: Schema) -> ConstraintSet:
    """Parse a constraint file: one `dc` or `fd` statement per line.

    dc <name> : !exists <atom>(, <atom>)*(, <comparison>)*
    fd <name> : <Pred> : <Attr>(, <Attr>)* -> <Attr>
    """
    constraints = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, lineno)
        if not tokens:
            continue
        parser = _LineParser(tokens, lineno)
        head = parser.next()
        if head[0] == "ident" and head[1] == "dc":
            constraints.append(_parse_dc_line(parser, schema))
        elif head[0] == "ident" and head[1] == "fd":
            constraints.append(_parse_fd_line(parser, schema))
        else:
            raise InputError(f"expected 'dc' or 'fd', got {head[1]!r}",
                             line=head[2], column=head[3])
    return ConstraintSet(tuple(constraints))


def check_consistency(instance: Instance, constraints: ConstraintSet) -> bool:
    """True iff no constraint has a satisfying assignment in the instance."""
    from . import evaluation

    by_pred = instance.facts_by_predicate()
    for dc in constraints:
        for _ in evaluation.iter_satisfying_assignments(by_pred, dc):
            return False
    return True
