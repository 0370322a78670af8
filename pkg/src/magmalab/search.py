"""Backtracking finite model search with ground-instance propagation.

The search fills the 3n^2 cells of a partial model one at a time.  After
every assignment each identity is evaluated on all n^k assignments of its
variables at once (numpy fancy indexing over tables padded with an
"unknown" row and column).  An instance whose two sides are both known and
differ is a conflict.  An instance with one side known and the other side's
top cell undetermined but with known arguments forces that cell.  This is
repeated to a fixpoint.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import SearchLimitExceeded
from .models import OPERATORS, Model, dumps_model, satisfies, satisfies_theory
from .terms import Identity, Term, Theory, Var

DEFAULT_NODE_LIMIT = 10**8
MAX_SEARCH_SIZE = 6

CELL_ORDERS = ("row-major", "most-constrained")


@dataclass(frozen=True)
class SearchConfig:
    lnh: bool = True
    cell_order: str = "row-major"
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.cell_order not in CELL_ORDERS:
            raise ValueError(f"cell_order must be one of {CELL_ORDERS}")
        if self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class SearchStats:
    nodes: int = 0
    seconds: float = 0.0
    models: int = 0

    def merge(self, other: "SearchStats"):
        self.nodes += other.nodes
        self.seconds = max(self.seconds, other.seconds)
        self.models += other.models


class PartialModel:
    """Three n x n tables with optional entries.

    Stored flat with one extra row and column per table holding the
    "unknown" marker ``n``, so looking up an unknown argument yields unknown.
    """

    def __init__(self, n: int):
        self.n = n
        self.width = n + 1
        self.unknown = n
        self.flat = np.full(3 * self.width * self.width, n, dtype=np.int64)
        ops, rows, cols = np.meshgrid(np.arange(3), np.arange(n), np.arange(n), indexing="ij")
        self.cell_op = ops.ravel()
        self.cell_row = rows.ravel()
        self.cell_col = cols.ravel()
        # row-major over (operation, row, column), mul first
        self.cells = self.cell_op * self.width * self.width + self.cell_row * self.width + self.cell_col
        self.is_real = np.zeros(self.flat.size, dtype=bool)
        self.is_real[self.cells] = True
        self.trail: list[int] = []

    def base(self, op_index: int) -> int:
        return op_index * self.width * self.width

    @property
    def filled(self) -> int:
        return len(self.trail)

    def assign(self, cell: int, value: int):
        self.flat[cell] = value
        self.trail.append(cell)

    def undo(self, mark: int):
        if len(self.trail) > mark:
            self.flat[self.trail[mark:]] = self.unknown
            del self.trail[mark:]

    def unfilled_mask(self) -> np.ndarray:
        return self.flat[self.cells] == self.unknown

    def to_model(self) -> Model:
        values = self.flat[self.cells]
        if (values == self.unknown).any():
            raise ValueError("partial model is not total")
        return Model.from_array(values.reshape(3, self.n, self.n))

    def mentioned_max(self) -> int:
        """Largest domain element used as a value or index of a filled cell."""
        values = self.flat[self.cells]
        filled = values != self.unknown
        if not filled.any():
            return -1
        return int(max(values[filled].max(), self.cell_row[filled].max(), self.cell_col[filled].max()))


class _Compiled:
    """One identity ground over all n^k variable assignments."""

    def __init__(self, ident: Identity, pm: PartialModel):
        self.name = ident.name
        names = ident.variables()
        n, k = pm.n, len(names)
        grid = np.indices((n,) * k).reshape(k, -1) if k else np.zeros((0, 1), dtype=np.int64)
        self.slots0 = [grid[i].astype(np.int64) for i in range(k)]
        self.program: list[tuple[int, int, int]] = []
        memo: dict[Term, int] = {Var(v): i for i, v in enumerate(names)}
        self.lhs = self._compile(ident.lhs, memo, pm)
        self.rhs = self._compile(ident.rhs, memo, pm)
        self.width = pm.width

    def _compile(self, t: Term, memo, pm) -> int:
        if t in memo:
            return memo[t]
        left = self._compile(t.left, memo, pm)
        right = self._compile(t.right, memo, pm)
        self.program.append((pm.base(OPERATORS.index(t.op)), left, right))
        slot = len(self.slots0) + len(self.program) - 1
        memo[t] = slot
        return slot

    def evaluate(self, flat: np.ndarray):
        """Return (slot values, slot cell indices) for the current tables."""
        values = list(self.slots0)
        cells: list[Optional[np.ndarray]] = [None] * len(values)
        w = self.width
        for base, left, right in self.program:
            idx = base + values[left] * w + values[right]
            cells.append(idx)
            values.append(flat[idx])
        return values, cells


class _Engine:
    def __init__(self, theory: Iterable[Identity], n: int, cfg: SearchConfig,
                 target: Optional[Identity] = None, stats: Optional[SearchStats] = None):
        self.n = n
        self.cfg = cfg
        self.pm = PartialModel(n)
        self.identities = [_Compiled(i, self.pm) for i in theory]
        self.target = _Compiled(target, self.pm) if target is not None else None
        self.target_violated_at: Optional[int] = None
        self.stats = stats if stats is not None else SearchStats()
        self.started = time.perf_counter()
        self.pressure: Optional[np.ndarray] = None

    # -- propagation

    def propagate(self) -> bool:
        pm = self.pm
        unk = pm.unknown
        want_pressure = self.cfg.cell_order == "most-constrained"
        while True:
            forced_cells = []
            forced_values = []
            pressure = np.zeros(pm.flat.size, dtype=np.int64) if want_pressure else None
            for comp in self.identities:
                values, cells = comp.evaluate(pm.flat)
                lv, rv = values[comp.lhs], values[comp.rhs]
                lknown, rknown = lv != unk, rv != unk
                if (lknown & rknown & (lv != rv)).any():
                    return False
                for side, other_known, other in ((comp.lhs, rknown, rv), (comp.rhs, lknown, lv)):
                    idx = cells[side]
                    if idx is None:
                        continue
                    mask = other_known & pm.is_real[idx] & (values[side] == unk)
                    if mask.any():
                        forced_cells.append(idx[mask])
                        forced_values.append(other[mask])
                if want_pressure:
                    for slot, idx in enumerate(cells):
                        if idx is not None:
                            blocked = idx[pm.is_real[idx] & (values[slot] == unk)]
                            pressure += np.bincount(blocked, minlength=pressure.size)
            self.pressure = pressure
            if not forced_cells:
                return self._target_still_possible()
            fc = np.concatenate(forced_cells)
            fv = np.concatenate(forced_values)
            uniq, first, inverse = np.unique(fc, return_index=True, return_inverse=True)
            if (fv != fv[first][inverse]).any():
                return False
            for cell, value in zip(uniq.tolist(), fv[first].tolist()):
                pm.assign(cell, value)

    def _target_still_possible(self) -> bool:
        """Record an eager target violation; False once the target surely holds."""
        if self.target is None or self.target_violated_at is not None:
            return True
        values, _ = self.target.evaluate(self.pm.flat)
        lv, rv = values[self.target.lhs], values[self.target.rhs]
        unk = self.pm.unknown
        known = (lv != unk) & (rv != unk)
        if (known & (lv != rv)).any():
            self.target_violated_at = self.pm.filled
            return True
        # every instance determined and none violated: no completion can help
        return not known.all()

    # -- branching

    def select_cell(self) -> Optional[int]:
        pm = self.pm
        open_mask = pm.unfilled_mask()
        if not open_mask.any():
            return None
        if self.cfg.cell_order == "most-constrained" and self.pressure is not None:
            scores = np.where(open_mask, self.pressure[pm.cells], -1)
            best = int(np.argmax(scores))
            if scores[best] > 0:
                return int(pm.cells[best])
        return int(pm.cells[int(np.argmax(open_mask))])

    def candidates(self, cell: int) -> range:
        n = self.n
        if not self.cfg.lnh:
            return range(n)
        pm = self.pm
        rest = cell % (pm.width * pm.width)
        top = max(pm.mentioned_max(), rest // pm.width, rest % pm.width)
        return range(min(n, top + 2))

    def _tick(self):
        self.stats.nodes += 1
        if self.stats.nodes > self.cfg.node_limit:
            raise SearchLimitExceeded(
                f"node limit {self.cfg.node_limit} exceeded", self.stats.nodes, self.elapsed()
            )
        if self.cfg.time_limit is not None and self.stats.nodes % 64 == 0:
            if self.elapsed() > self.cfg.time_limit:
                raise SearchLimitExceeded(
                    f"time limit {self.cfg.time_limit}s exceeded", self.stats.nodes, self.elapsed()
                )

    def elapsed(self) -> float:
        return time.perf_counter() - self.started

    def _complete_model_ok(self) -> bool:
        if self.target is None:
            return True
        if self.target_violated_at is not None:
            return True
        values, _ = self.target.evaluate(self.pm.flat)
        return bool((values[self.target.lhs] != values[self.target.rhs]).any())

    def _undo(self, mark: int):
        self.pm.undo(mark)
        if self.target_violated_at is not None and self.target_violated_at > mark:
            self.target_violated_at = None

    def dfs(self) -> Iterator[Model]:
        self._tick()
        cell = self.select_cell()
        if cell is None:
            if self._complete_model_ok():
                self.stats.models += 1
                yield self.pm.to_model()
            return
        for value in self.candidates(cell):
            mark = self.pm.filled
            self.pm.assign(cell, value)
            if self.propagate():
                yield from self.dfs()
            self._undo(mark)

    def run(self, first_branch: Optional[tuple[int, int]] = None) -> Iterator[Model]:
        """All models in search order; optionally only under one root branch."""
        if not self.propagate():
            return
        if first_branch is None:
            yield from self.dfs()
            return
        cell, value = first_branch
        self._tick()
        self.pm.assign(cell, value)
        if self.propagate():
            yield from self.dfs()

    def root_branches(self) -> Optional[list[tuple[int, int]]]:
        """The first branching cell's (cell, value) pairs; None if no branching."""
        if not self.propagate():
            return []
        cell = self.select_cell()
        if cell is None:
            return None
        return [(cell, v) for v in self.candidates(cell)]


# ----------------------------------------------------------------- drivers


def _check_size(n: int):
    if not 1 <= n <= MAX_SEARCH_SIZE:
        raise ValueError(f"search size must be between 1 and {MAX_SEARCH_SIZE}, got {n}")


def _worker(theory, n, cfg, target, branch, limit):
    stats = SearchStats()
    engine = _Engine(theory, n, cfg, target, stats)
    out = []
    for model in engine.run(branch):
        out.append(model)
        if limit is not None and len(out) >= limit:
            break
    stats.seconds = engine.elapsed()
    return out, stats


def _search(theory, n, cfg, target=None, limit=None, stats=None) -> list[Model]:
    _check_size(n)
    cfg = cfg or SearchConfig()
    stats = stats if stats is not None else SearchStats()
    theory = Theory(theory)
    started = time.perf_counter()
    try:
        if cfg.workers > 1:
            probe = _Engine(theory, n, cfg, target)
            branches = probe.root_branches()
            if branches:
                return _search_parallel(theory, n, cfg, target, limit, stats, branches)
        engine = _Engine(theory, n, cfg, target, stats)
        found = []
        for model in engine.run():
            found.append(model)
            if limit is not None and len(found) >= limit:
                break
        return found
    finally:
        stats.seconds = time.perf_counter() - started


def _search_parallel(theory, n, cfg, target, limit, stats, branches):
    # Results are combined in branch order, so they equal the single-worker result.
    found: list[Model] = []
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_worker, theory, n, cfg, target, b, limit) for b in branches]
        try:
            for fut in futures:
                models, sub = fut.result()
                stats.nodes += sub.nodes
                for model in models:
                    if limit is not None and len(found) >= limit:
                        break
                    found.append(model)
                if limit is not None and len(found) >= limit:
                    break
        finally:
            for fut in futures:
                fut.cancel()
    stats.models = len(found)
    return found


def find_model(theory: Iterable[Identity], n: int, cfg: Optional[SearchConfig] = None,
               stats: Optional[SearchStats] = None) -> Optional[Model]:
    """A size-``n`` model of ``theory``, or None once the space is exhausted.

    Raises SearchLimitExceeded when a node or time limit stops the search.
    """
    found = _search(theory, n, cfg, limit=1, stats=stats)
    return found[0] if found else None


def find_witness(axioms: Iterable[Identity], target: Identity, n: int,
                 cfg: Optional[SearchConfig] = None,
                 stats: Optional[SearchStats] = None) -> Optional[Model]:
    """A size-``n`` model of ``axioms`` in which ``target`` fails."""
    axioms = Theory(axioms)
    if target.name in axioms:
        raise ValueError(f"target {target.name!r} is one of the axioms")
    _check_size(n)
    if target.lhs == target.rhs:
        # holds in every algebra
        return None
    found = _search(axioms, n, cfg, target=target, limit=1, stats=stats)
    if not found:
        return None
    model = found[0]
    if satisfies(model, target).holds or not all(v.holds for v in satisfies_theory(model, axioms)):
        raise AssertionError("search returned an unsound witness")
    return model


def enumerate_models(theory: Iterable[Identity], n: int, limit: Optional[int] = None,
                     cfg: Optional[SearchConfig] = None,
                     stats: Optional[SearchStats] = None) -> list[Model]:
    """Models of ``theory`` of size ``n`` in search order, at most ``limit``.

    With the least-number heuristic on (the default) the list holds one
    representative per symmetry class reachable by the heuristic; pass
    ``SearchConfig(lnh=False)`` for the complete list.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    return _search(theory, n, cfg, limit=limit, stats=stats)


# ------------------------------------------------------------- independence


@dataclass
class AxiomResult:
    name: str
    status: str  # "witness", "none" or "limit"
    size: Optional[int] = None
    model: Optional[Model] = None
    nodes: int = 0
    milliseconds: float = 0.0
    exhausted_sizes: list = field(default_factory=list)
    witness_path: Optional[str] = None
    message: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "axiom": self.name,
            "status": self.status,
            "size": self.size,
            "witness_path": self.witness_path,
            "witness": self.model.to_dict() if self.model is not None else None,
            "exhausted_sizes": list(self.exhausted_sizes),
            "nodes": self.nodes,
            "milliseconds": round(self.milliseconds, 3),
            "message": self.message,
        }


@dataclass
class IndependenceReport:
    theory: list
    max_size: int
    results: list

    @property
    def independent(self) -> bool:
        return all(r.status == "witness" for r in self.results)

    @property
    def hit_limit(self) -> bool:
        return any(r.status == "limit" for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "theory": list(self.theory),
            "max_size": self.max_size,
            "independent": self.independent,
            "axioms": [r.to_dict() for r in self.results],
        }

    def format_text(self) -> str:
        lines = [f"{'axiom':<8} {'status':<8} {'size':>4} {'nodes':>9} {'ms':>10}"]
        for r in self.results:
            size = "-" if r.size is None else str(r.size)
            lines.append(f"{r.name:<8} {r.status:<8} {size:>4} {r.nodes:>9} {r.milliseconds:>10.1f}")
        verdict = "independent" if self.independent else "not shown independent"
        lines.append(f"{verdict} up to size {self.max_size}")
        for r in self.results:
            if r.model is not None:
                lines.append(f"\nwitness for {r.name} (size {r.size}):")
                lines.append(dumps_model(r.model).rstrip())
        return "\n".join(lines)


def independence_report(theory: Iterable[Identity], max_n: int,
                        cfg: Optional[SearchConfig] = None) -> IndependenceReport:
    """Search sizes 1..max_n for a countermodel to each identity of ``theory``.

    The countermodel for an identity satisfies every other identity.
    """
    theory = Theory(theory)
    cfg = cfg or SearchConfig()
    results = []
    for ident in theory:
        axioms = theory.without(ident.name)
        result = AxiomResult(ident.name, "none")
        started = time.perf_counter()
        for n in range(1, max_n + 1):
            stats = SearchStats()
            try:
                model = find_witness(axioms, ident, n, cfg, stats)
            except SearchLimitExceeded as exc:
                result.nodes += exc.nodes
                result.status = "limit"
                result.message = f"size {n}: {exc}"
                break
            result.nodes += stats.nodes
            if model is None:
                result.exhausted_sizes.append(n)
                continue
            verdicts = satisfies_theory(model, theory)
            if [v.name for v in verdicts if not v.holds] != [ident.name]:
                raise AssertionError(f"unverified witness for {ident.name}")
            result.status, result.size, result.model = "witness", n, model
            break
        result.milliseconds = (time.perf_counter() - started) * 1000
        results.append(result)
    return IndependenceReport(theory.names, max_n, results)
