"""Minimal relational executor with a deterministic cost model.

Supports scan, filter, hash join, scalar aggregates, sort and limit over the
in-memory catalog. ``explain`` produces the three cost signals the
clarification gate consumes: root cardinality, total cost, and the highest
single-operator cost.

Cost units per operator:
    Scan      rows_in
    Filter    0.25 * rows_in
    HashJoin  rows_build + rows_probe
    Aggregate rows_in
    Sort      rows_in * log2(max(2, rows_in))
    Limit     0
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from typing import Any, Optional, Sequence

import numpy as np

from .catalog import Catalog, ColumnStats, Predicate, Table


class PlanError(ValueError):
    """Raised when a logical query cannot be planned against the catalog."""


class ExecutionError(ValueError):
    """Raised when a plan fails at runtime (e.g. literal/column type mismatch)."""


AGG_FUNCS = ("count", "sum", "avg", "min", "max")


# ---------------------------------------------------------------------------
# Logical query
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogicalQuery:
    """Declarative query form: tables, projections, predicates, equi-joins."""

    tables: tuple[str, ...]
    projections: tuple[str, ...] = ()  # column refs and/or "agg(col)" strings
    predicates: tuple[Predicate, ...] = ()
    joins: tuple[tuple[str, str], ...] = ()  # pairs of column refs
    order_by: Optional[tuple[str, str]] = None  # (column ref, "asc"|"desc")
    limit: Optional[int] = None

    def with_predicate(self, pred: Predicate) -> "LogicalQuery":
        return replace(self, predicates=self.predicates + (pred,))


def parse_aggregate(expr: str) -> Optional[tuple[str, str]]:
    """Split 'func(arg)' into (func, arg) when func is a known aggregate."""
    if "(" not in expr or not expr.endswith(")"):
        return None
    func, arg = expr[:-1].split("(", 1)
    func = func.strip().lower()
    if func not in AGG_FUNCS:
        return None
    return func, arg.strip()


# ---------------------------------------------------------------------------
# Physical plan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanNode:
    kind: str  # Scan | Filter | HashJoin | Aggregate | Sort | Limit
    children: tuple["PlanNode", ...] = ()
    table: Optional[str] = None
    predicates: tuple[Predicate, ...] = ()
    build_keys: tuple[tuple[str, str], ...] = ()  # (table, column) on build side
    probe_keys: tuple[tuple[str, str], ...] = ()
    aggregates: tuple[tuple[str, Optional[tuple[str, str]]], ...] = ()
    sort_key: Optional[tuple[str, str]] = None  # (table, column)
    sort_dir: str = "asc"
    limit: Optional[int] = None


@dataclass(frozen=True)
class PhysicalPlan:
    root: PlanNode
    query: LogicalQuery
    output: tuple[Any, ...]  # output column descriptors


@dataclass(frozen=True)
class ExplainReport:
    root_cardinality: float
    total_cost: float
    max_operator_cost: float
    operators: tuple[tuple[str, float, float, float], ...]

    def to_json(self) -> dict:
        return {
            "root_cardinality": self.root_cardinality,
            "total_cost": self.total_cost,
            "max_operator_cost": self.max_operator_cost,
            "operators": [
                {"kind": k, "est_rows_in": ri, "est_rows_out": ro, "est_cost": c}
                for k, ri, ro, c in self.operators
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class ResultSet:
    columns: list[str]
    rows: list[tuple]
    measured_latency: float
    actual_rows: int

    def to_json(self, max_rows: Optional[int] = None) -> dict:
        rows = self.rows if max_rows is None else self.rows[:max_rows]
        return {
            "columns": self.columns,
            "rows": [[_render(v) for v in row] for row in rows],
            "measured_latency": self.measured_latency,
            "actual_rows": self.actual_rows,
        }


def _render(v: Any) -> Any:
    import datetime

    return v.isoformat() if isinstance(v, datetime.date) else v


# ---------------------------------------------------------------------------
# Name resolution
# ---------------------------------------------------------------------------


def resolve_column(ref: str, tables: Sequence[Table]) -> tuple[str, str]:
    """Resolve 'col' or 'table.col' to (table, column), erroring on ambiguity."""
    if "." in ref:
        tname, cname = ref.split(".", 1)
        for t in tables:
            if t.name == tname:
                if cname in t.columns:
                    return tname, cname
                raise PlanError(f"unresolvable column {ref!r}")
        raise PlanError(f"unresolvable table in column ref {ref!r}")
    hits = [(t.name, ref) for t in tables if ref in t.columns]
    if not hits:
        raise PlanError(f"unresolvable column {ref!r}")
    if len(hits) > 1:
        raise PlanError(f"ambiguous column {ref!r}: " + ", ".join(t for t, _ in hits))
    return hits[0]


# ---------------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------------


def _scan_with_filter(table: str, preds: Sequence[Predicate]) -> PlanNode:
    scan = PlanNode(kind="Scan", table=table)
    if preds:
        return PlanNode(kind="Filter", children=(scan,), table=table,
                        predicates=tuple(preds))
    return scan


def _filtered_card(catalog: Catalog, table: str, preds: Sequence[Predicate]) -> float:
    stats = catalog.stats(table)
    card = float(catalog.table(table).row_count)
    for p in preds:
        card *= _pred_selectivity(p, stats)
    return card


def _pred_selectivity(pred: Predicate, stats: dict[str, ColumnStats]) -> float:
    from .catalog import estimate_selectivity

    if pred.column not in stats:
        raise PlanError(f"unresolvable column {pred.column!r}")
    return estimate_selectivity(pred, stats[pred.column])


def plan(query: LogicalQuery, catalog: Catalog) -> PhysicalPlan:
    """Build the physical plan: pushed-down filters, greedy join order.

    Join order: start from the smallest estimated (post-filter) input, then
    repeatedly attach the connected table with the smallest estimate, ties by
    table name. Deterministic for identical (query, stats).
    """
    if not query.tables:
        raise PlanError("query references no tables")
    tables = [catalog.table(t) for t in query.tables]

    # Resolve predicates to their tables.
    per_table: dict[str, list[Predicate]] = {t.name: [] for t in tables}
    for p in query.predicates:
        tname, cname = resolve_column(p.column, tables)
        per_table[tname].append(replace(p, column=cname))

    # Resolve join pairs.
    edges: list[tuple[tuple[str, str], tuple[str, str]]] = []
    for left, right in query.joins:
        lt = resolve_column(left, tables)
        rt = resolve_column(right, tables)
        if lt[0] == rt[0]:
            raise PlanError(f"join pair {left!r}={right!r} stays inside one table")
        edges.append((lt, rt))

    names = [t.name for t in tables]
    if len(names) > 1:
        _check_connected(names, edges)

    cards = {t: _filtered_card(catalog, t, per_table[t]) for t in names}
    order = sorted(names, key=lambda t: (cards[t], t))

    joined = [order[0]]
    node = _scan_with_filter(order[0], per_table[order[0]])
    remaining = [t for t in order[1:]]
    while remaining:
        candidates = [
            t for t in remaining
            if any(_connects(e, t, joined) for e in edges)
        ]
        if not candidates:
            raise PlanError("join graph not connected over target tables")
        nxt = min(candidates, key=lambda t: (cards[t], t))
        build = _scan_with_filter(nxt, per_table[nxt])
        bkeys, pkeys = [], []
        for (lt, rt) in sorted(edges):
            if lt[0] == nxt and rt[0] in joined:
                bkeys.append(lt)
                pkeys.append(rt)
            elif rt[0] == nxt and lt[0] in joined:
                bkeys.append(rt)
                pkeys.append(lt)
        node = PlanNode(kind="HashJoin", children=(build, node),
                        build_keys=tuple(bkeys), probe_keys=tuple(pkeys))
        joined.append(nxt)
        remaining.remove(nxt)

    # Projections: aggregates vs plain columns.
    aggs: list[tuple[str, Optional[tuple[str, str]]]] = []
    plain: list[tuple[str, str]] = []
    proj_refs = query.projections or tuple(
        f"{t.name}.{c}" if len(tables) > 1 else c
        for t in tables for c in t.schema.column_names()
    )
    for ref in proj_refs:
        agg = parse_aggregate(ref)
        if agg is not None:
            func, arg = agg
            target = None if arg == "*" else resolve_column(arg, tables)
            if arg == "*" and func != "count":
                raise PlanError(f"{func}(*) is not a valid aggregate")
            aggs.append((func, target))
        else:
            plain.append(resolve_column(ref, tables))
    if aggs and plain:
        raise PlanError("cannot mix aggregates and plain columns without grouping")

    if aggs:
        if query.order_by is not None:
            raise PlanError("cannot order scalar aggregate output")
        node = PlanNode(kind="Aggregate", children=(node,), aggregates=tuple(aggs))
        output: tuple[Any, ...] = tuple(("agg", f, t) for f, t in aggs)
    else:
        output = tuple(("col", t, c) for t, c in plain)

    if query.order_by is not None:
        ref, direction = query.order_by
        if direction not in ("asc", "desc"):
            raise PlanError(f"bad sort direction {direction!r}")
        skey = resolve_column(ref, tables)
        node = PlanNode(kind="Sort", children=(node,), sort_key=skey,
                        sort_dir=direction)

    if query.limit is not None:
        if query.limit < 0:
            raise PlanError("limit must be >= 0")
        node = PlanNode(kind="Limit", children=(node,), limit=query.limit)

    return PhysicalPlan(root=node, query=query, output=output)


def _connects(edge, t: str, joined: list[str]) -> bool:
    a, b = edge[0][0], edge[1][0]
    return (a == t and b in joined) or (b == t and a in joined)


def _check_connected(names: list[str], edges) -> None:
    seen = {names[0]}
    frontier = [names[0]]
    while frontier:
        cur = frontier.pop()
        for (lt, rt) in edges:
            for a, b in ((lt[0], rt[0]), (rt[0], lt[0])):
                if a == cur and b not in seen:
                    seen.add(b)
                    frontier.append(b)
    if seen != set(names):
        raise PlanError("join graph not connected over target tables")


# ---------------------------------------------------------------------------
# Cost model / explain
# ---------------------------------------------------------------------------


def _estimate(node: PlanNode, catalog: Catalog,
              ops: list[tuple[str, float, float, float]]) -> float:
    """Post-order cardinality estimation; appends operator rows, returns out-card."""
    if node.kind == "Scan":
        n = float(catalog.table(node.table).row_count)
        ops.append(("Scan", n, n, n))
        return n
    if node.kind == "Filter":
        rows_in = _estimate(node.children[0], catalog, ops)
        stats = catalog.stats(node.table)
        sel = 1.0
        for p in node.predicates:
            sel *= _pred_selectivity(p, stats)
        rows_out = rows_in * sel
        ops.append(("Filter", rows_in, rows_out, 0.25 * rows_in))
        return rows_out
    if node.kind == "HashJoin":
        build = _estimate(node.children[0], catalog, ops)
        probe = _estimate(node.children[1], catalog, ops)
        fanout = 1.0
        for (bt, bc), (pt, pc) in zip(node.build_keys, node.probe_keys):
            ndv_b = max(1, catalog.column_stats(bt, bc).ndv)
            ndv_p = max(1, catalog.column_stats(pt, pc).ndv)
            fanout *= max(ndv_b, ndv_p)
        rows_out = build * probe / fanout
        ops.append(("HashJoin", build + probe, rows_out, build + probe))
        return rows_out
    if node.kind == "Aggregate":
        rows_in = _estimate(node.children[0], catalog, ops)
        ops.append(("Aggregate", rows_in, 1.0, rows_in))
        return 1.0
    if node.kind == "Sort":
        rows_in = _estimate(node.children[0], catalog, ops)
        cost = rows_in * math.log2(max(2.0, rows_in))
        ops.append(("Sort", rows_in, rows_in, cost))
        return rows_in
    if node.kind == "Limit":
        rows_in = _estimate(node.children[0], catalog, ops)
        rows_out = min(rows_in, float(node.limit))
        ops.append(("Limit", rows_in, rows_out, 0.0))
        return rows_out
    raise PlanError(f"unknown plan node kind {node.kind!r}")


def explain(plan_: PhysicalPlan, catalog: Catalog) -> ExplainReport:
    """Cost and cardinality report for a physical plan. Deterministic."""
    ops: list[tuple[str, float, float, float]] = []
    root_card = _estimate(plan_.root, catalog, ops)
    total = sum(c for _, _, _, c in ops)
    max_op = max(c for _, _, _, c in ops)
    return ExplainReport(
        root_cardinality=root_card,
        total_cost=total,
        max_operator_cost=max_op,
        operators=tuple(ops),
    )


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def _literal_ok(value: Any, kind: str) -> bool:
    import datetime

    if value is None:
        return False
    if kind in ("integer", "real"):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "date":
        return isinstance(value, datetime.date)
    return isinstance(value, str)


def _check_predicate_types(pred: Predicate, kind: str) -> None:
    literals: list[Any] = []
    if pred.op == "eq":
        literals = [pred.value]
    elif pred.op == "in":
        literals = list(pred.values)
    else:
        literals = [v for v in (pred.lo, pred.hi) if v is not None]
    for lit in literals:
        if not _literal_ok(lit, kind):
            raise ExecutionError(
                f"literal {lit!r} does not match {kind} column {pred.column!r}"
            )


def _match_mask(table: Table, pred: Predicate) -> np.ndarray:
    col = table.column(pred.column)
    _check_predicate_types(pred, col.kind)
    n = table.row_count

    if col.kind in ("integer", "real", "date"):
        arr = col.numeric()
        valid = ~np.isnan(arr)
        from .catalog import literal_key

        if pred.op == "eq":
            return valid & (arr == float(literal_key(pred.value)))
        if pred.op == "in":
            mask = np.zeros(n, dtype=bool)
            for v in pred.values:
                mask |= arr == float(literal_key(v))
            return valid & mask
        mask = valid.copy()
        if pred.lo is not None:
            lo = float(literal_key(pred.lo))
            mask &= (arr > lo) if pred.lo_open else (arr >= lo)
        if pred.hi is not None:
            hi = float(literal_key(pred.hi))
            mask &= (arr < hi) if pred.hi_open else (arr <= hi)
        return mask

    values = col.values
    if pred.op == "eq":
        return np.fromiter((v == pred.value for v in values), bool, n)
    if pred.op == "in":
        vs = set(pred.values)
        return np.fromiter((v in vs for v in values), bool, n)
    mask = np.fromiter((v is not None for v in values), bool, n)
    for i, v in enumerate(values):
        if v is None:
            continue
        if pred.lo is not None:
            ok = v > pred.lo if pred.lo_open else v >= pred.lo
            mask[i] &= ok
        if pred.hi is not None:
            ok = v < pred.hi if pred.hi_open else v <= pred.hi
            mask[i] &= ok
    return mask


@dataclass
class _Rows:
    tables: tuple[str, ...]
    idx: list[tuple[int, ...]]

    def pos(self, table: str) -> int:
        return self.tables.index(table)


def _eval(node: PlanNode, catalog: Catalog) -> _Rows:
    if node.kind == "Scan":
        n = catalog.table(node.table).row_count
        return _Rows((node.table,), [(i,) for i in range(n)])
    if node.kind == "Filter":
        child = _eval(node.children[0], catalog)
        table = catalog.table(node.table)
        mask = np.ones(table.row_count, dtype=bool)
        for p in node.predicates:
            mask &= _match_mask(table, p)
        p_ = child.pos(node.table)
        return _Rows(child.tables, [r for r in child.idx if mask[r[p_]]])
    if node.kind == "HashJoin":
        build = _eval(node.children[0], catalog)
        probe = _eval(node.children[1], catalog)

        def key_of(rows: _Rows, keys, r) -> Optional[tuple]:
            out = []
            for (t, c) in keys:
                v = catalog.table(t).column(c).values[r[rows.pos(t)]]
                if v is None:
                    return None  # NULLs never join
                out.append(v)
            return tuple(out)

        ht: dict[tuple, list[tuple[int, ...]]] = {}
        for r in build.idx:
            k = key_of(build, node.build_keys, r)
            if k is not None:
                ht.setdefault(k, []).append(r)
        out_tables = build.tables + probe.tables
        out_idx: list[tuple[int, ...]] = []
        for r in probe.idx:
            k = key_of(probe, node.probe_keys, r)
            if k is None:
                continue
            for b in ht.get(k, ()):
                out_idx.append(b + r)
        return _Rows(out_tables, out_idx)
    if node.kind in ("Aggregate", "Sort", "Limit"):
        # handled by execute() on materialized rows
        raise ExecutionError(f"_eval cannot run node {node.kind}")
    raise ExecutionError(f"unknown plan node kind {node.kind!r}")


def _split_pipeline(root: PlanNode) -> tuple[PlanNode, list[PlanNode]]:
    """Split trailing Aggregate/Sort/Limit off the join/filter tree."""
    tail: list[PlanNode] = []
    node = root
    while node.kind in ("Aggregate", "Sort", "Limit"):
        tail.append(node)
        node = node.children[0]
    return node, list(reversed(tail))


def execute(plan_: PhysicalPlan, catalog: Catalog) -> ResultSet:
    """Run the plan; row multisets equal the logical query semantics."""
    start = time.perf_counter()
    core, tail = _split_pipeline(plan_.root)
    rows = _eval(core, catalog)

    def value(t: str, c: str, r: tuple[int, ...]) -> Any:
        return catalog.table(t).column(c).values[r[rows.pos(t)]]

    materialized = rows.idx
    agg_row: Optional[tuple] = None
    for node in tail:
        if node.kind == "Aggregate":
            agg_row = tuple(
                _aggregate(f, target, materialized, value) for f, target in node.aggregates
            )
        elif node.kind == "Sort":
            t, c = node.sort_key
            rev = node.sort_dir == "desc"
            keyed = [(value(t, c, r), r) for r in materialized]
            nonnull = [kr for kr in keyed if kr[0] is not None]
            nulls = [kr for kr in keyed if kr[0] is None]
            nonnull.sort(key=lambda kr: kr[0], reverse=rev)
            materialized = [r for _, r in nonnull] + [r for _, r in nulls]
        elif node.kind == "Limit":
            if agg_row is not None:
                agg_row = agg_row if node.limit >= 1 else None
            else:
                materialized = materialized[: node.limit]

    if plan_.output and plan_.output[0][0] == "agg":
        columns = [_agg_name(f, t) for _, f, t in plan_.output]
        out_rows = [agg_row] if agg_row is not None else []
    else:
        multi = len({t for _, t, _ in plan_.output}) > 1 or len(rows.tables) > 1
        columns = [f"{t}.{c}" if multi else c for _, t, c in plan_.output]
        out_rows = [
            tuple(value(t, c, r) for _, t, c in plan_.output) for r in materialized
        ]

    elapsed = time.perf_counter() - start
    return ResultSet(columns=columns, rows=out_rows,
                     measured_latency=elapsed, actual_rows=len(out_rows))


def _agg_name(func: str, target: Optional[tuple[str, str]]) -> str:
    return f"{func}(*)" if target is None else f"{func}({target[0]}.{target[1]})"


def _aggregate(func: str, target, rows, value) -> Any:
    if func == "count" and target is None:
        return len(rows)
    t, c = target
    vals = [v for v in (value(t, c, r) for r in rows) if v is not None]
    if func == "count":
        return len(vals)
    if not vals:
        return None
    if func == "sum":
        return sum(vals)
    if func == "avg":
        return sum(vals) / len(vals)
    if func == "min":
        return min(vals)
    return max(vals)


# ---------------------------------------------------------------------------
# Latency calibration
# ---------------------------------------------------------------------------


def calibrate_kappa(rows: int = 1_000_000, seed: int = 7) -> float:
    """Cost units per second, measured by scanning `rows` synthetic rows.

    Used to convert plan cost into seconds when no calibrated value is
    configured. The scan+filter pipeline costs rows * 1.25 units.
    """
    from .catalog import table_from_columns

    rng = np.random.default_rng(seed)
    values = rng.integers(0, 1000, size=rows).tolist()
    table = table_from_columns("_cal", [("v", "integer", values)])
    cat = Catalog()
    cat.add(table)
    q = LogicalQuery(tables=("_cal",), projections=("count(*)",),
                     predicates=(Predicate(column="v", op="range", lo=500),))
    p = plan(q, cat)
    start = time.perf_counter()
    execute(p, cat)
    elapsed = max(1e-6, time.perf_counter() - start)
    cost = explain(p, cat).total_cost
    return cost / elapsed
