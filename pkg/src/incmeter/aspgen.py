"""Emit disjunctive logic programs whose optimal models are minimum repairs.

Every schema predicate p gets an annotated twin p_a carrying the tid, the
original arguments, and a final d (deleted) or s (stays) flag.  Each
constraint becomes either one disjunctive rule (some matched fact must be
deleted) or, in the normal rewriting, one rule per atom with the other
disjuncts pushed negated into the body.  A counting block derives the size
distance between the database and the repair, and a weak constraint on
deletions makes optimal answer sets the minimum repairs, so an external
solver in brave mode answers which distances are achievable and its best
model realizes the minimum.

The output targets the DLV dialect: #maxint, #count/#sum aggregates, weak
constraints, and bare lowercase constants.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, replace

from .errors import InputError, SolverUnavailableError
from .model import Const, ConstraintSet, Instance

RESERVED_HEADS = ("del", "numDel", "cardPred", "cardDB", "cardRepDB", "cardRep", "dist")

_BARE_IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_BARE_INT_RE = re.compile(r"(?:0|[1-9]\d*)\Z")

# user variables are drawn from this pool in first-occurrence order; tid
# variables are named T, T2, T3, ... so the pools can never collide
_VAR_POOL = ("X", "Y", "Z", "W", "U", "V")


@dataclass(frozen=True)
class AspProgram:
    """A program in sections; render() produces solver-ready text."""

    facts: tuple[str, ...]
    rules: tuple[str, ...]
    counting: tuple[str, ...]
    weak: tuple[str, ...]
    queries: tuple[str, ...] = ()

    def render(self, include_queries: bool = True) -> str:
        sections = [self.facts, self.rules, self.counting, self.weak]
        if include_queries:
            sections.append(self.queries)
        blocks = ["\n".join(lines) for lines in sections if lines]
        return "\n\n".join(blocks) + "\n"


def _user_var(pool_index: int) -> str:
    base = _VAR_POOL[pool_index % len(_VAR_POOL)]
    round_ = pool_index // len(_VAR_POOL)
    return base if round_ == 0 else f"{base}{round_}"


def _render_value(value: str, maxint: int) -> str:
    if _BARE_IDENT_RE.match(value):
        return value
    if _BARE_INT_RE.match(value) and int(value) <= maxint:
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attr_vars(arity: int) -> list[str]:
    return [_user_var(i) for i in range(arity)]


def _check_names(instance: Instance) -> None:
    names = set(instance.schema.predicate_names)
    for name in sorted(names):
        if not _BARE_IDENT_RE.match(name):
            raise InputError(
                f"predicate {name!r} is not a valid program identifier; "
                "use lowercase names")
        if name in RESERVED_HEADS:
            raise InputError(f"predicate {name!r} collides with a generated head")
        if f"{name}_a" in names:
            raise InputError(
                f"predicate {name}_a collides with the annotated twin of {name}")


def emit_repair_program(instance: Instance, constraints: ConstraintSet,
                        style: str = "disjunctive", with_count: bool = True,
                        with_weak: bool = True) -> AspProgram:
    """Build the repair program for an instance and its constraints.

    style picks the disjunctive encoding or its normal-rule rewriting.  The
    counting block (with_count) derives dist, the deletion count between the
    database and the repair; with_weak adds the weak constraint that makes
    optimal models minimum repairs (deletion rules are emitted for either).
    """
    if style not in ("disjunctive", "normal"):
        raise InputError(f"unknown style {style!r}")
    _check_names(instance)
    maxint = max(100, len(instance) + 1,
                 max((f.tid for f in instance.facts), default=0) + 1)

    facts = tuple(
        f"{f.predicate}({f.tid},"
        f"{','.join(_render_value(v, maxint) for v in f.values)})."
        for f in instance.facts)

    rules = []
    for dc in constraints:
        rules.extend(_constraint_rules(dc, style, maxint))
    preds = instance.schema.predicates
    for p in preds:
        vs = ", ".join(_attr_vars(p.arity))
        rules.append(f"{p.name}_a(T, {vs}, s) :- {p.name}(T, {vs}), "
                     f"not {p.name}_a(T, {vs}, d).")
    if with_count or with_weak:
        for p in preds:
            vs = ", ".join(_attr_vars(p.arity))
            rules.append(f"del(T) :- {p.name}_a(T, {vs}, d).")

    counting = []
    if with_count:
        counting.append(f"#maxint = {maxint}.")
        counting.append("numDel(N) :- #int(N), #count{T : del(T)} = N.")
        for p in preds:
            vs = ", ".join(_attr_vars(p.arity))
            counting.append(f"cardPred({p.name},N) :- #int(N), "
                            f"#count{{T : {p.name}(T, {vs})}} = N.")
        counting.append("cardDB(N) :- #sum{X,P : cardPred(P,X)} = N.")
        for p in preds:
            vs = ", ".join(_attr_vars(p.arity))
            counting.append(f"cardRep({p.name},N) :- #int(N), "
                            f"#count{{T : {p.name}_a(T, {vs}, s)}} = N.")
        counting.append("cardRepDB(N) :- #int(N), #sum{X,P : cardRep(P,X)} = N.")
        counting.append("dist(N) :- #int(N), cardDB(A), cardRepDB(B), N = A - B.")

    weak = (":~ del(T).",) if with_weak else ()
    return AspProgram(facts, tuple(rules), tuple(counting), weak)


_ASP_OPS = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _constraint_rules(dc, style, maxint):
    var_name = {}
    for atom in dc.atoms:
        for term in atom.terms:
            if not isinstance(term, Const) and term.name not in var_name:
                var_name[term.name] = _user_var(len(var_name))

    def term_str(term):
        if isinstance(term, Const):
            return _render_value(term.value, maxint)
        return var_name[term.name]

    def plain(atom, tid):
        args = [tid] + [term_str(t) for t in atom.terms]
        return f"{atom.predicate}({', '.join(args)})"

    def annotated(atom, tid, flag):
        args = [tid] + [term_str(t) for t in atom.terms] + [flag]
        return f"{atom.predicate}_a({', '.join(args)})"

    comparisons = [f"{term_str(c.left)} {_ASP_OPS[c.op]} {term_str(c.right)}"
                   for c in dc.comparisons]

    if style == "disjunctive":
        tids = [f"T{i}" if i > 1 else "T" for i in range(1, len(dc.atoms) + 1)]
        head = " v ".join(annotated(a, t, "d") for a, t in zip(dc.atoms, tids))
        body = [plain(a, t) for a, t in zip(dc.atoms, tids)] + comparisons
        return [f"{head} :- {', '.join(body)}."]

    rules = []
    for i, atom in enumerate(dc.atoms):
        tids = {}
        tids[i] = "T"
        nxt = 2
        for k in range(len(dc.atoms)):
            if k != i:
                tids[k] = f"T{nxt}"
                nxt += 1
        body = [plain(atom, "T")]
        body += [plain(a, tids[k]) for k, a in enumerate(dc.atoms) if k != i]
        body += comparisons
        body += [f"not {annotated(a, tids[k], 'd')}"
                 for k, a in enumerate(dc.atoms) if k != i]
        rules.append(f"{annotated(atom, 'T', 'd')} :- {', '.join(body)}.")
    return rules


# ---------------------------------------------------------------------------
# token normalization (for golden comparisons) and external solving

_NORM_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%.*)
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<punct>:-|:~|\#\w+|!=|<=|>=|==|=|<|>|\{|\}|\(|\)|,|\.|\?|;|\||:|-|\+|\*|/)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<number>\d+)
    """,
    re.VERBOSE,
)

_VARIABLE_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*\Z")


def normalize_tokens(text: str) -> tuple[str, ...]:
    """Lex a program and rename each statement's variables by first use.

    Statements end at '.' or '?'.  The result is whitespace- and
    variable-naming-insensitive, which is what golden comparisons need.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _NORM_TOKEN_RE.match(text, pos)
        if not m:
            raise InputError(f"unexpected character {text[pos]!r} in program text")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append((kind, m.group()))
        pos = m.end()
    out = []
    renames: dict[str, str] = {}
    for kind, tok in tokens:
        if kind == "ident" and _VARIABLE_RE.match(tok):
            if tok not in renames:
                renames[tok] = f"V{len(renames)}"
            out.append(renames[tok])
        else:
            out.append(tok)
        if tok in (".", "?"):
            renames = {}
    return tuple(out)


def _best_model_section(output: str):
    matches = list(re.finditer(r"Best model:\s*\{(.*?)\}", output, re.DOTALL))
    if not matches:
        matches = list(re.finditer(r"\{(.*?)\}", output, re.DOTALL))
    if not matches:
        return None
    return matches[-1].group(1)


def parse_best_model(output: str):
    """Extract (dist, deleted tids, cost) from solver output text.

    dist and cost are None when absent (e.g. counting disabled).
    """
    section = _best_model_section(output)
    if section is None:
        raise InputError("no model found in solver output")
    deleted = {int(m.group(1)) for m in re.finditer(r"\bdel\((\d+)\)", section)}
    dist = None
    m = re.search(r"\bdist\((\d+)\)", section)
    if m:
        dist = int(m.group(1))
    cost = None
    m = re.search(r"Cost \(\[Weight:Level\]\):\s*<\[(\d+):(\d+)\]>", output)
    if m:
        cost = int(m.group(1))
    return dist, frozenset(deleted), cost


def parse_brave_answers(output: str) -> frozenset[int]:
    """Distances reported by a brave query over dist(X)."""
    hits = {int(m.group(1)) for m in re.finditer(r"\bdist\((\d+)\)", output)}
    if not hits:
        # some builds answer bare integers, one per line
        hits = {int(m.group(1)) for m in re.finditer(r"^\s*(\d+)\s*$",
                                                     output, re.MULTILINE)}
    return frozenset(hits)


def _resolve_solver(solver_path):
    path = solver_path or os.environ.get("INCMETER_ASP_SOLVER")
    if not path:
        raise SolverUnavailableError(
            "no external solver configured (set INCMETER_ASP_SOLVER)")
    resolved = shutil.which(path)
    if not resolved:
        raise SolverUnavailableError(f"solver {path!r} not found or not executable")
    return resolved


def _run(argv):
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=120)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise SolverUnavailableError(f"solver failed to run: {exc}") from exc
    return proc.stdout + "\n" + proc.stderr


def run_external_solver(program: AspProgram, solver_path=None) -> dict:
    """Solve the program with an external binary; report the best model.

    Returns {"dist": int|None, "deleted": frozenset[int], "cost": int|None}.
    Raises SolverUnavailableError when no usable binary is configured.
    """
    binary = _resolve_solver(solver_path)
    with tempfile.NamedTemporaryFile("w", suffix=".dlv", delete=False) as handle:
        handle.write(program.render(include_queries=False))
        name = handle.name
    try:
        output = _run([binary, name])
    finally:
        os.unlink(name)
    dist, deleted, cost = parse_best_model(output)
    return {"dist": dist, "deleted": deleted, "cost": cost}


def run_brave_distances(program: AspProgram, solver_path=None) -> frozenset[int]:
    """Ask the solver, in brave mode, which repair distances are achievable."""
    binary = _resolve_solver(solver_path)
    queried = replace(program, weak=(), queries=("dist(X)?",))
    with tempfile.NamedTemporaryFile("w", suffix=".dlv", delete=False) as handle:
        handle.write(queried.render())
        name = handle.name
    try:
        output = _run([binary, "-brave", name])
    finally:
        os.unlink(name)
    return parse_brave_answers(output)
