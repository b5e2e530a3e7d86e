"""Iterative refinement schemes for the graph-restricted bounds.

Five strategies share one driver: a one-shot solve on a uniform simplex
partition, two monotone schemes that grow the graph with candidate points
from the decomposition (all candidates, or only the heaviest), an adaptive
scheme that subdivides an explicit simplicial partition, and a forgetfulness
scheme that rebuilds the graph from the identity base plus fresh candidates
each round.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .backend import STATUS_OPTIMAL, SolveOptions, SolveOutcome, solve
from .conic import CpProblem, SENSE_MAX, build_sdd_program
from .decomposition import POLICY_ALL, POLICY_LARGEST, candidate_vertices, decompose
from .embedding import (
    EmbeddedGraph,
    add_vertex,
    append_point,
    complete_edges,
    delta_partition,
    identity_complete,
    prune_duplicates,
    star_to_base,
    subdivide_simplicial,
)

STRATEGY_PARTITION = "delta-partition"
STRATEGY_MAX = "max"
STRATEGY_MAX1 = "max1"
STRATEGY_ADAPTIVE = "adaptive-delta"
STRATEGY_FORGETFULNESS = "forgetfulness"

STRATEGIES = (
    STRATEGY_PARTITION,
    STRATEGY_MAX,
    STRATEGY_MAX1,
    STRATEGY_ADAPTIVE,
    STRATEGY_FORGETFULNESS,
)

TERMINAL_ITER_LIMIT = "iter-limit"
TERMINAL_CAP_HIT = "cap-hit"
TERMINAL_STALLED = "stalled"
TERMINAL_INFEASIBLE = "infeasible-start"
TERMINAL_SOLVER_FAILURE = "solver-failure"


@dataclass(frozen=True)
class SchemeConfig:
    """Knobs of a refinement run; defaults follow the reported experiments."""

    strategy: str = STRATEGY_FORGETFULNESS
    max_iters: Optional[int] = None
    vertex_cap: int = 200
    weight_threshold: float = 1e-5
    prune_delta: float = 1e-6
    improvement_tol: float = 1e-6
    random_vertex_rescue: bool = False
    delta_k: int = 2
    stall_window: Optional[int] = None
    rescue_seed: int = 0
    infeasible_fallback: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.delta_k < 1:
            raise ValueError("delta_k must be at least 1")

    def resolved_iters(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        if self.strategy in (STRATEGY_MAX, STRATEGY_MAX1):
            return 5
        if self.strategy == STRATEGY_ADAPTIVE:
            return 20 if n <= 10 else 15
        if self.strategy == STRATEGY_FORGETFULNESS:
            return 15 if n <= 10 else 12
        return 1

    def resolved_window(self) -> int:
        if self.stall_window is not None:
            return self.stall_window
        return 2 if self.strategy == STRATEGY_MAX1 else 3


@dataclass
class IterationRecord:
    iteration: int
    num_vertices: int
    num_edges: int
    value: float
    dual_value: float
    solve_time: float
    added_vertices: int = 0


@dataclass
class SchemeTrace:
    """Per-iteration history of a scheme run."""

    strategy: str
    sense: str
    records: list = field(default_factory=list)
    terminal: str = TERMINAL_ITER_LIMIT

    def values(self):
        return [r.value for r in self.records]

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("iter,t,edges,value,dual,seconds\n")
        for r in self.records:
            out.write(
                f"{r.iteration},{r.num_vertices},{r.num_edges},"
                f"{r.value!r},{r.dual_value!r},{r.solve_time!r}\n"
            )
        return out.getvalue()


def stall_detector(trace: SchemeTrace, window: int, tol: float) -> bool:
    """True when the last window+1 values improved by less than tol in total."""
    if window < 1:
        raise ValueError("window must be at least 1")
    values = trace.values()
    if len(values) < window + 1:
        return False
    sign = -1.0 if trace.sense == SENSE_MAX else 1.0
    improvement = sign * (values[-(window + 1)] - values[-1])
    return improvement < tol


def _better(sense: str, candidate: float, incumbent: float) -> bool:
    if sense == SENSE_MAX:
        return candidate > incumbent
    return candidate < incumbent


class _Run:
    """Shared bookkeeping for one scheme execution."""

    def __init__(self, p: CpProblem, cfg: SchemeConfig, opts: SolveOptions):
        self.p = p
        self.cfg = cfg
        self.opts = opts
        self.trace = SchemeTrace(strategy=cfg.strategy, sense=p.sense)
        self.best: Optional[SolveOutcome] = None

    def solve_on(self, g: EmbeddedGraph) -> SolveOutcome:
        out = solve(build_sdd_program(self.p, g), self.opts)
        if out.status == STATUS_OPTIMAL:
            self.trace.records.append(
                IterationRecord(
                    iteration=len(self.trace.records) + 1,
                    num_vertices=g.t,
                    num_edges=len(g.edges),
                    value=out.primal_value,
                    dual_value=out.dual_value,
                    solve_time=out.solve_time,
                )
            )
            if self.best is None or _better(
                self.p.sense, out.primal_value, self.best.primal_value
            ):
                self.best = out
        return out

    def finish(self, terminal: str):
        self.trace.terminal = terminal
        return self.best, self.trace


def _dedupe_points(points, g: EmbeddedGraph, delta: float):
    """Drop candidate points that duplicate a vertex or one another."""
    kept = []
    rows = [g.vertex(i) for i in range(1, g.t + 1)]
    for p in points:
        vec = np.asarray(p.point if hasattr(p, "point") else p, dtype=float)
        if any(float(np.sum(np.abs(vec - r))) < delta for r in rows):
            continue
        rows.append(vec)
        kept.append(p)
    return kept


def run_scheme(
    p: CpProblem, cfg: SchemeConfig, opts: Optional[SolveOptions] = None
):
    """Run a refinement strategy; returns (best outcome, trace).

    The best outcome is the extremal optimal solve seen over all iterations,
    which need not be the last one (the forgetfulness scheme is not
    monotone). An infeasible first solve is reported through the trace
    terminal status, after an optional rebase onto a resolution-2 simplex
    partition.
    """
    opts = opts or SolveOptions()
    n = p.n
    if cfg.vertex_cap < n:
        raise ValueError("vertex cap below the ambient dimension")
    run = _Run(p, cfg, opts)
    iters = cfg.resolved_iters(n)
    window = cfg.resolved_window()

    if cfg.strategy == STRATEGY_PARTITION:
        out = run.solve_on(delta_partition(n, cfg.delta_k))
        if out.status != STATUS_OPTIMAL:
            run.best = run.best or out
            return run.finish(TERMINAL_INFEASIBLE)
        return run.finish(TERMINAL_ITER_LIMIT)

    base = identity_complete(n)
    g = base
    partition = [tuple(range(1, n + 1))]

    out = run.solve_on(g)
    if out.status != STATUS_OPTIMAL:
        if cfg.infeasible_fallback and cfg.strategy != STRATEGY_ADAPTIVE:
            base = delta_partition(n, max(cfg.delta_k, 2))
            if base.t > cfg.vertex_cap:
                run.best = run.best or out
                return run.finish(TERMINAL_INFEASIBLE)
            g = base
            out = run.solve_on(g)
        if out.status != STATUS_OPTIMAL:
            run.best = run.best or out
            return run.finish(TERMINAL_INFEASIBLE)

    rescue_rng = np.random.default_rng(np.random.PCG64(cfg.rescue_seed))
    monotone = cfg.strategy in (STRATEGY_MAX, STRATEGY_MAX1, STRATEGY_ADAPTIVE)

    while True:
        if run.trace.iterations >= iters:
            return run.finish(TERMINAL_ITER_LIMIT)
        if monotone and stall_detector(run.trace, window, cfg.improvement_tol):
            return run.finish(TERMINAL_STALLED)

        d = decompose(out, g, cfg.weight_threshold)
        if cfg.strategy == STRATEGY_ADAPTIVE:
            cands = candidate_vertices(d, POLICY_LARGEST, cfg.weight_threshold)
            cands = _dedupe_points(cands, g, cfg.prune_delta)
            if not cands:
                return run.finish(TERMINAL_STALLED)
            if g.t + 1 > cfg.vertex_cap:
                return run.finish(TERMINAL_CAP_HIT)
            g, partition = subdivide_simplicial(
                g, partition, cands[0].edge, cands[0]
            )
            added = 1
        elif cfg.strategy in (STRATEGY_MAX, STRATEGY_MAX1):
            policy = POLICY_ALL if cfg.strategy == STRATEGY_MAX else POLICY_LARGEST
            cands = candidate_vertices(d, policy, cfg.weight_threshold)
            cands = _dedupe_points(cands, g, cfg.prune_delta)
            extra = None
            if cfg.random_vertex_rescue:
                extra = rescue_rng.dirichlet(np.ones(n))
            if not cands and extra is None:
                return run.finish(TERMINAL_STALLED)
            grow = len(cands) + (1 if extra is not None else 0)
            if g.t + grow > cfg.vertex_cap:
                return run.finish(TERMINAL_CAP_HIT)
            for sp in cands:
                g, _ = add_vertex(g, sp)
            if extra is not None:
                g, _ = append_point(g, extra)
            g = complete_edges(g)
            added = grow
        else:  # forgetfulness
            cands = candidate_vertices(d, POLICY_ALL, cfg.weight_threshold)
            g_next = base
            for sp in cands:
                g_next, _ = append_point(g_next, sp.point)
            g_next = star_to_base(g_next, base.t)
            g_next = prune_duplicates(g_next, cfg.prune_delta)
            if g_next.t > cfg.vertex_cap:
                return run.finish(TERMINAL_CAP_HIT)
            added = g_next.t - base.t
            g = g_next

        run.trace.records[-1].added_vertices = added
        out = run.solve_on(g)
        if out.status != STATUS_OPTIMAL:
            run.best = run.best or out
            return run.finish(TERMINAL_SOLVER_FAILURE)
