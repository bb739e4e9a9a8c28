"""Constrained natural-language front end.

A small pattern grammar turns requests like ``show recent popular movies
where year >= 1990 order by rating desc limit 20`` into a DraftQuery;
questions for the chosen facet are rendered from fixed templates; answers
inject exactly one predicate (or vector keyword filter) into the draft.

The grammar is total and deterministic: ``render`` emits a canonical form
that reparses to the identical draft. An external LLM may optionally
rephrase question text, never the options.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from typing import Optional, Sequence

from .ambiguity import DEFAULT_LEXICON
from .catalog import Catalog, Predicate
from .miu import Facet, facet_to_predicate, render_candidate

VERBS = ("show", "list", "find", "count")
ORDER_MARKERS = ("order", "ordered", "sorted")
FILLERS = {"me", "all", "my", "please", "a", "an", "the"}

DEFAULT_VAGUE_MAP = {
    "recent": "time-window",
    "top": "numeric-range",
    "best": "numeric-range",
    "high": "numeric-range",
    "low": "numeric-range",
    "large": "numeric-range",
    "small": "numeric-range",
    "long": "numeric-range",
    "short": "numeric-range",
    "popular": "numeric-range",
    "successful": "numeric-range",
    "good": "numeric-range",
    "major": "numeric-range",
    "some": "categorical",
    "many": "categorical",
    "few": "categorical",
    "unique": "categorical",
}

_TOKEN = re.compile(
    r"""
    \d{4}-\d{2}-\d{2}
  | \d+\.\d+
  | \d+
  | [A-Za-z_][A-Za-z0-9_.]*
  | '[^']*'
  | "[^"]*"
  | >=|<=|=|<|>
  | [(),]
    """,
    re.X,
)


class ParseError(ValueError):
    """Raised when a request does not fit the grammar."""


@dataclass(frozen=True)
class DraftQuery:
    backend: str  # relational | vector
    target: str
    projections: tuple = ()
    predicates: tuple = ()
    vague_slots: tuple = ()  # (term, facet kind) pairs, in order of appearance
    vector_text: str = ""
    keyword_filter: Optional[str] = None
    extra_tables: tuple = ()
    order_by: Optional[tuple] = None  # (column ref, "asc"|"desc")
    limit: Optional[int] = None
    count_only: bool = False
    text: str = field(default="", compare=False)

    def all_tables(self) -> tuple:
        return (self.target,) + self.extra_tables

    def constrained_refs(self) -> tuple:
        return tuple(p.column for p in self.predicates)

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "target": self.target,
            "projections": list(self.projections),
            "predicates": [render_predicate(p) for p in self.predicates],
            "vague_slots": [list(v) for v in self.vague_slots],
            "vector_text": self.vector_text,
            "keyword_filter": self.keyword_filter,
            "extra_tables": list(self.extra_tables),
            "order_by": list(self.order_by) if self.order_by else None,
            "limit": self.limit,
            "count_only": self.count_only,
        }


@dataclass(frozen=True)
class ClarificationQuestion:
    facet_id: str
    text: str
    options: tuple

    def __post_init__(self) -> None:
        if not is_single_sentence(self.text):
            raise ValueError(f"question is not a single sentence: {self.text!r}")

    def to_json(self) -> dict:
        return {
            "facet_id": self.facet_id,
            "text": self.text,
            "options": list(self.options),
        }


@dataclass(frozen=True)
class Answer:
    facet_id: str
    selected: object  # option index or free value


def is_single_sentence(text: str) -> bool:
    """Exactly one terminal punctuation mark, at the end."""
    marks = re.findall(r"[.?!](?=\s|$)", text)
    return len(marks) == 1 and text.rstrip()[-1] in ".?!"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _literal(tok: str):
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", tok):
        return datetime.strptime(tok, "%Y-%m-%d").date()
    if re.fullmatch(r"\d+\.\d+", tok):
        return float(tok)
    if re.fullmatch(r"\d+", tok):
        return int(tok)
    if len(tok) >= 2 and tok[0] == tok[-1] and tok[0] in "'\"":
        return tok[1:-1]
    return tok


def _find_clauses(tokens: list[str]) -> dict:
    """Positions of clause markers; -1 when absent."""
    low = [t.lower() for t in tokens]
    pos = {"where": -1, "order": -1, "limit": -1, "about": -1, "keyword": -1}
    for i, t in enumerate(low):
        if t == "where" and pos["where"] < 0:
            pos["where"] = i
        elif t in ORDER_MARKERS and i + 1 < len(low) and low[i + 1] == "by" \
                and pos["order"] < 0:
            pos["order"] = i
        elif t == "limit" and pos["limit"] < 0:
            pos["limit"] = i
        elif t == "about" and pos["about"] < 0:
            pos["about"] = i
        elif t == "with" and i + 1 < len(low) and low[i + 1] == "keyword" \
                and pos["keyword"] < 0:
            pos["keyword"] = i
    return pos


def _clause_end(start: int, marks: list[int], n: int) -> int:
    following = [m for m in marks if m > start]
    return min(following) if following else n


def parse(
    text: str,
    catalog: Optional[Catalog] = None,
    corpora: Sequence[str] = (),
    vague_map: dict = DEFAULT_VAGUE_MAP,
    lexicon: Sequence[str] = DEFAULT_LEXICON,
) -> DraftQuery:
    """Parse a request against the registered tables and corpora."""
    if not text.strip():
        raise ParseError("empty query text")
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ParseError("no recognizable tokens")
    low = [t.lower() for t in tokens]

    known_tables = set(catalog.table_names()) if catalog else set()
    known_corpora = set(corpora)
    known = sorted(known_tables | known_corpora)

    pos = _find_clauses(tokens)
    marks = [p for p in pos.values() if p >= 0]
    head_end = min(marks) if marks else len(tokens)

    count_only = low[0] == "count"
    start = 1 if low[0] in VERBS else 0

    # Targets: first known name is the target, later ones join in.
    target = None
    extra: list[str] = []
    target_positions = set()
    for i in range(start, head_end):
        name = low[i]
        if name in known_tables or name in known_corpora:
            target_positions.add(i)
            if target is None:
                target = name
            elif name != target and name not in extra:
                extra.append(name)
    if target is None:
        raise ParseError(
            f"no recognizable target in {text!r}; known targets: {', '.join(known)}"
        )
    backend = "vector" if target in known_corpora else "relational"
    if backend == "vector" and extra:
        raise ParseError("vector queries take a single corpus target")

    # Projections: comma list before 'of' in the head.
    projections: list[str] = []
    of_idx = -1
    for i in range(start, head_end):
        if low[i] == "of" and i < min(target_positions, default=head_end):
            of_idx = i
            break
    if of_idx > 0:
        for t in tokens[start:of_idx]:
            if t == ",":
                continue
            projections.append(t)

    # Vague slots from head tokens outside projections/targets.
    slots: list[tuple[str, str]] = []
    seen_terms = set()
    scan_from = of_idx + 1 if of_idx >= 0 else start
    for i in range(scan_from, head_end):
        t = low[i]
        if i in target_positions or t in FILLERS or t == ",":
            continue
        if t in vague_map or t in lexicon:
            if t not in seen_terms:
                seen_terms.add(t)
                slots.append((t, vague_map.get(t, "categorical")))

    # where clause
    predicates: list[Predicate] = []
    if pos["where"] >= 0:
        end = _clause_end(pos["where"], marks, len(tokens))
        predicates = _parse_conditions(tokens, pos["where"] + 1, end)
        if not predicates:
            raise ParseError("'where' clause has no conditions")

    # about clause (vector topic)
    vector_text = ""
    if pos["about"] >= 0:
        end = _clause_end(pos["about"], marks, len(tokens))
        vector_text = " ".join(tokens[pos["about"] + 1:end])
    if backend == "vector" and not vector_text:
        raise ParseError("vector queries need an 'about <topic>' clause")

    # with keyword clause
    keyword_filter = None
    if pos["keyword"] >= 0:
        end = _clause_end(pos["keyword"], marks, len(tokens))
        lits = tokens[pos["keyword"] + 2:end]
        if not lits:
            raise ParseError("'with keyword' needs a value")
        keyword_filter = str(_literal(lits[0]))

    # order by
    order_by = None
    if pos["order"] >= 0:
        end = _clause_end(pos["order"], marks, len(tokens))
        body = tokens[pos["order"] + 2:end]
        if not body:
            raise ParseError("'order by' needs a column")
        direction = "asc"
        if len(body) > 1 and body[1].lower() in ("asc", "desc"):
            direction = body[1].lower()
        order_by = (body[0], direction)

    # limit
    limit = None
    if pos["limit"] >= 0:
        end = _clause_end(pos["limit"], marks, len(tokens))
        body = tokens[pos["limit"] + 1:end]
        if not body or not re.fullmatch(r"\d+", body[0]):
            raise ParseError("'limit' needs a number")
        limit = int(body[0])

    draft = DraftQuery(
        backend=backend,
        target=target,
        projections=tuple(projections),
        predicates=tuple(predicates),
        vague_slots=tuple(slots),
        vector_text=vector_text,
        keyword_filter=keyword_filter,
        extra_tables=tuple(extra),
        order_by=order_by,
        limit=limit,
        count_only=count_only,
        text=text,
    )
    if backend == "relational" and catalog is not None:
        _validate_relational(draft, catalog)
    return draft


def _parse_conditions(tokens: list[str], i: int, end: int) -> list[Predicate]:
    preds: list[Predicate] = []
    while i < end:
        col = tokens[i]
        if i + 1 >= end:
            raise ParseError(f"dangling condition at {col!r}")
        op = tokens[i + 1].lower()
        if op in ("=", ">", "<", ">=", "<="):
            if i + 2 >= end:
                raise ParseError(f"missing literal after {col} {op}")
            lit = _literal(tokens[i + 2])
            if op == "=":
                preds.append(Predicate(column=col, op="eq", value=lit))
            elif op in (">", ">="):
                preds.append(Predicate(column=col, op="range", lo=lit,
                                       lo_open=(op == ">")))
            else:
                preds.append(Predicate(column=col, op="range", hi=lit,
                                       hi_open=(op == "<")))
            i += 3
        elif op == "between":
            if i + 4 >= end or tokens[i + 3].lower() != "and":
                raise ParseError(f"malformed between on {col!r}")
            preds.append(Predicate(column=col, op="between",
                                   lo=_literal(tokens[i + 2]),
                                   hi=_literal(tokens[i + 4])))
            i += 5
        elif op == "in":
            if i + 2 >= end or tokens[i + 2] != "(":
                raise ParseError(f"malformed in-list on {col!r}")
            j = i + 3
            values = []
            while j < end and tokens[j] != ")":
                if tokens[j] != ",":
                    values.append(_literal(tokens[j]))
                j += 1
            if j >= end or not values:
                raise ParseError(f"malformed in-list on {col!r}")
            preds.append(Predicate(column=col, op="in", values=tuple(values)))
            i = j + 1
        else:
            raise ParseError(f"unknown operator {op!r} after {col!r}")
        if i < end:
            if tokens[i].lower() != "and":
                raise ParseError(f"expected 'and' between conditions, got {tokens[i]!r}")
            i += 1
    return preds


def _validate_relational(draft: DraftQuery, catalog: Catalog) -> None:
    from .engine import resolve_column

    tables = [catalog.table(t) for t in draft.all_tables()]
    for p in draft.predicates:
        resolve_column(p.column, tables)
    for ref in draft.projections:
        resolve_column(ref, tables)
    if draft.order_by:
        resolve_column(draft.order_by[0], tables)


# ---------------------------------------------------------------------------
# Rendering (canonical form; parse(render(d)) == d)
# ---------------------------------------------------------------------------


def render_literal(v) -> str:
    if isinstance(v, date):
        return v.isoformat()
    if isinstance(v, str):
        return f"'{v}'"
    if isinstance(v, float):
        s = repr(v)
        return s if "." in s or "e" in s else s + ".0"
    return str(v)


def render_predicate(p: Predicate) -> str:
    if p.op == "eq":
        return f"{p.column} = {render_literal(p.value)}"
    if p.op == "in":
        return f"{p.column} in ({', '.join(render_literal(v) for v in p.values)})"
    if p.op == "between":
        return (f"{p.column} between {render_literal(p.lo)}"
                f" and {render_literal(p.hi)}")
    parts = []
    if p.lo is not None:
        parts.append(f"{p.column} {'>' if p.lo_open else '>='} {render_literal(p.lo)}")
    if p.hi is not None:
        parts.append(f"{p.column} {'<' if p.hi_open else '<='} {render_literal(p.hi)}")
    if not parts:
        raise ValueError(f"unbounded range predicate on {p.column!r}")
    return " and ".join(parts)


def render(draft: DraftQuery) -> str:
    parts: list[str] = []
    if draft.count_only:
        parts.append("count")
    elif draft.backend == "vector":
        parts.append("find")
    else:
        parts.append("show")
    for term, _ in draft.vague_slots:
        parts.append(term)
    if draft.projections:
        parts.append(", ".join(draft.projections) + " of")
    parts.append(", ".join(draft.all_tables()))
    if draft.backend == "vector":
        parts.append("about " + draft.vector_text)
    if draft.predicates:
        parts.append("where " + " and ".join(render_predicate(p)
                                             for p in draft.predicates))
    if draft.keyword_filter:
        parts.append(f"with keyword '{draft.keyword_filter}'")
    if draft.order_by:
        parts.append(f"order by {draft.order_by[0]} {draft.order_by[1]}")
    if draft.limit is not None:
        parts.append(f"limit {draft.limit}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Question synthesis
# ---------------------------------------------------------------------------


def _option_list(options: Sequence[str]) -> str:
    if len(options) == 1:
        return options[0]
    if len(options) == 2:
        return f"{options[0]} or {options[1]}"
    return ", ".join(options[:-1]) + f", or {options[-1]}"


def synthesize_question(facet: Facet, history: Sequence[str] = ()) -> ClarificationQuestion:
    """Deterministic single-sentence template per facet kind."""
    options = tuple(render_candidate(facet.kind, c) for c in facet.candidates)
    listing = _option_list(options)
    if facet.kind == "categorical":
        text = f"Which {facet.target} do you mean: {listing}?"
    elif facet.kind == "numeric-range":
        text = f"What range of {facet.target} should we use: {listing}?"
    elif facet.kind == "time-window":
        text = f"Which time window: {listing}?"
    elif facet.kind == "vector-keyword":
        quoted = _option_list(tuple(f"'{o}'" for o in options))
        text = f"Should results focus on {quoted}?"
    else:
        raise ValueError(f"unknown facet kind {facet.kind!r}")
    return ClarificationQuestion(facet_id=facet.id, text=text, options=options)


# ---------------------------------------------------------------------------
# Answer injection
# ---------------------------------------------------------------------------


_RANGE_ANSWER = re.compile(r"^\s*(\S+)\s+to\s+(\S+)\s*$")


def _resolve_answer(facet: Facet, answer: Answer):
    """Map an option index or free value to a concrete facet candidate."""
    sel = answer.selected
    if isinstance(sel, bool):
        raise ValueError("answer.selected must be an option index or value")
    if isinstance(sel, int):
        if not 0 <= sel < len(facet.candidates):
            raise ValueError(
                f"option {sel} out of range for facet {facet.id} "
                f"({len(facet.candidates)} options)"
            )
        return facet.candidates[sel]
    if isinstance(sel, (tuple, list)) and len(sel) == 2:
        return (sel[0], sel[1])
    if isinstance(sel, str):
        if facet.kind in ("numeric-range", "time-window"):
            m = _RANGE_ANSWER.match(sel)
            if not m:
                raise ValueError(
                    f"free answer {sel!r} for {facet.kind} must look like 'lo to hi'"
                )
            return (_literal(m.group(1)), _literal(m.group(2)))
        return sel
    raise ValueError(f"cannot resolve answer {sel!r} against facet {facet.id}")


def apply_answer(draft: DraftQuery, facet: Facet, answer: Answer) -> DraftQuery:
    """Inject exactly one new constraint; idempotent per (facet, answer)."""
    if answer.facet_id != facet.id:
        raise ValueError(
            f"answer targets facet {answer.facet_id!r}, expected {facet.id!r}"
        )
    value = _resolve_answer(facet, answer)
    if facet.kind == "vector-keyword":
        kw = str(value)
        if draft.keyword_filter == kw:
            return draft
        return replace(draft, keyword_filter=kw)
    pred = facet_to_predicate(facet, value)
    if pred in draft.predicates:
        return draft
    return replace(draft, predicates=draft.predicates + (pred,))
