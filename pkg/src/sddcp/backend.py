"""Interior-point solving of conic programs via Clarabel.

Translates the backend-neutral program form into Clarabel's standard shape
(minimize q'x subject to Ax + s = b, s in a product cone), normalizes
termination statuses, and extracts primal blocks, equality duals, and
infeasibility certificates. Solves are single-threaded so repeated runs are
bit-reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import clarabel
import numpy as np
from scipy import sparse

from .conic import (
    CONE_NONNEG,
    CONE_PSD,
    CONE_ROTATED,
    KIND_EDGE,
    KIND_PSD,
    ConicProgram,
    CpProblem,
    assemble_X,
)
from .errors import CapabilityError
from .symmat import Block2, SymMatrix, trace_inner

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_FAILURE = "numerical-failure"


def capabilities() -> frozenset:
    """Cone types the configured backend supports."""
    return frozenset({CONE_NONNEG, CONE_ROTATED, CONE_PSD})


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 200
    time_limit: Optional[float] = None
    verbose: bool = False


@dataclass
class SolveOutcome:
    """Normalized result of one conic solve.

    `primal_value` and `dual_value` are reported in the problem's original
    sense. `y` is the equality multiplier vector signed so that
    C - sum(y_i A_i) (minimization) lies in the dual of the working cone.
    On infeasibility, `certificate` holds the equality-row ray.
    """

    status: str
    primal_value: float
    dual_value: float
    blocks: Optional[dict]
    vertex_weights: Optional[np.ndarray]
    X: Optional[SymMatrix]
    y: Optional[np.ndarray]
    solve_time: float
    raw_status: str
    iterations: int
    certificate: Optional[np.ndarray] = None
    graph: object = None


def _status_map():
    table = {}
    mapping = {
        "Solved": STATUS_OPTIMAL,
        "AlmostSolved": STATUS_OPTIMAL,
        "PrimalInfeasible": STATUS_INFEASIBLE,
        "AlmostPrimalInfeasible": STATUS_INFEASIBLE,
        "DualInfeasible": STATUS_UNBOUNDED,
        "AlmostDualInfeasible": STATUS_UNBOUNDED,
    }
    for name, status in mapping.items():
        enum_val = getattr(clarabel.SolverStatus, name, None)
        if enum_val is not None:
            table[enum_val] = status
    return table


_STATUS = _status_map()


def _clean_block(blk: Block2) -> Block2:
    """Project a returned 2x2 block onto the PSD nonnegative cone.

    Interior-point primal variables satisfy the cone constraints only up to
    the termination residual, which on badly scaled instances can leave a
    block a few 1e-6 outside. Clamping the negative eigenvalue moves it by
    that eigenvalue only, so downstream splits stay exact.
    """
    s11 = max(blk.s11, 0.0)
    s22 = max(blk.s22, 0.0)
    s12 = max(blk.s12, 0.0)
    if s12 > 0.0 and s11 * s22 < s12 * s12:
        disc = math.hypot(s11 - s22, 2.0 * s12)
        lmin = 0.5 * (s11 + s22 - disc)
        q1, q2 = s12, lmin - s11
        scale = math.hypot(q1, q2)
        q1, q2 = q1 / scale, q2 / scale
        s11 -= lmin * q1 * q1
        s22 -= lmin * q2 * q2
        s12 = max(s12 - lmin * q1 * q2, 0.0)
        if s11 * s22 < s12 * s12:
            s12 = math.sqrt(s11 * s22)
    return Block2(s11=s11, s12=s12, s22=s22)


def _translate(prog: ConicProgram):
    """Build (P, q, A, b, cones) in Clarabel's convention from the IR."""
    nvars = prog.num_vars
    q = prog.objective * (-1.0 if prog.maximize else 1.0)

    rows_i = []
    cols_i = []
    vals = []
    cones = [clarabel.ZeroConeT(prog.num_eq)]
    eq = sparse.csc_matrix(prog.eq_rows)
    nxt = 0

    # nonnegative rows first: one per coordinate that must stay >= 0
    nonneg = 0
    for blk in prog.var_blocks:
        if CONE_NONNEG not in blk.cones:
            continue
        for k in range(blk.size):
            rows_i.append(nxt)
            cols_i.append(blk.offset + k)
            vals.append(-1.0)
            nxt += 1
            nonneg += 1
    if nonneg:
        cones.append(clarabel.NonnegativeConeT(nonneg))

    # rotated-quadratic blocks as plain second-order cones:
    # (s11 + s22, s11 - s22, 2 s12) lies in the cone iff s11 s22 >= s12^2
    # with nonnegative diagonal
    for blk in prog.var_blocks:
        if blk.kind != KIND_EDGE or CONE_ROTATED not in blk.cones:
            continue
        o = blk.offset
        rows_i += [nxt, nxt, nxt + 1, nxt + 1, nxt + 2]
        cols_i += [o, o + 2, o, o + 2, o + 1]
        vals += [-1.0, -1.0, -1.0, 1.0, -2.0]
        cones.append(clarabel.SecondOrderConeT(3))
        nxt += 3

    for blk in prog.var_blocks:
        if blk.kind != KIND_PSD or CONE_PSD not in blk.cones:
            continue
        for k in range(blk.size):
            rows_i.append(nxt)
            cols_i.append(blk.offset + k)
            vals.append(-1.0)
            nxt += 1
        cones.append(clarabel.PSDTriangleConeT(blk.label[1]))

    ineq = sparse.coo_matrix(
        (vals, (rows_i, cols_i)), shape=(nxt, nvars)
    ).tocsc()
    a_mat = sparse.vstack([eq, ineq], format="csc")
    b_vec = np.concatenate([prog.eq_rhs, np.zeros(nxt)])
    p_mat = sparse.csc_matrix((nvars, nvars))
    return p_mat, q, a_mat, b_vec, cones


def solve(prog: ConicProgram, opts: Optional[SolveOptions] = None) -> SolveOutcome:
    """Solve a conic program and normalize the outcome."""
    opts = opts or SolveOptions()
    missing = prog.cone_kinds() - capabilities()
    if missing:
        raise CapabilityError(f"backend lacks cone types: {sorted(missing)}")

    p_mat, q, a_mat, b_vec, cones = _translate(prog)
    settings = clarabel.DefaultSettings()
    settings.verbose = opts.verbose
    settings.max_threads = 1
    settings.max_iter = opts.max_iter
    settings.tol_feas = opts.tol
    settings.tol_gap_abs = opts.tol
    settings.tol_gap_rel = opts.tol
    if opts.time_limit is not None:
        settings.time_limit = opts.time_limit

    solver = clarabel.DefaultSolver(p_mat, q, a_mat, b_vec, cones, settings)
    start = time.perf_counter()
    sol = solver.solve()
    elapsed = time.perf_counter() - start

    status = _STATUS.get(sol.status, STATUS_FAILURE)
    raw = str(sol.status)
    x = np.asarray(sol.x)
    z = np.asarray(sol.z)
    m = prog.num_eq
    sign = -1.0 if prog.maximize else 1.0

    outcome = SolveOutcome(
        status=status,
        primal_value=float("nan"),
        dual_value=float("nan"),
        blocks=None,
        vertex_weights=None,
        X=None,
        y=None,
        solve_time=elapsed,
        raw_status=raw,
        iterations=int(sol.iterations),
        graph=prog.graph,
    )
    if status == STATUS_OPTIMAL:
        blocks, weights, x_mat = prog.extract(x)
        if blocks:
            blocks = {key: _clean_block(blk) for key, blk in blocks.items()}
            if weights is not None:
                weights = np.clip(weights, 0.0, None)
            x_mat = assemble_X(prog.graph, blocks, weights)
        outcome.blocks = blocks
        outcome.vertex_weights = weights
        outcome.X = x_mat
        outcome.primal_value = float(prog.objective @ x)
        # Clarabel's dual objective is -b'z for the internal minimization
        outcome.dual_value = sign * float(-(b_vec @ z))
        outcome.y = sign * (-z[:m]).copy()
    elif status == STATUS_INFEASIBLE:
        outcome.certificate = z[:m].copy()
    return outcome


def weak_duality_check(
    outcome: SolveOutcome, p: CpProblem, tol: float = 1e-6
) -> bool:
    """Verify complementarity and equality residuals of an optimal outcome.

    Checks that the slack matrix (objective minus the multiplier combination
    of constraint matrices, oriented by sense) pairs nonnegatively with X and
    that every equality holds within tolerance.
    """
    if outcome.status != STATUS_OPTIMAL:
        raise ValueError("weak duality check needs an optimal outcome")
    slack = p.C
    for (a, _), yi in zip(p.constraints, outcome.y):
        slack = slack - float(yi) * a
    if p.sense == "maximize":
        slack = -slack
    if trace_inner(outcome.X, slack) < -tol:
        return False
    for a, b in p.constraints:
        if abs(trace_inner(a, outcome.X) - b) > tol * (1.0 + abs(b)):
            return False
    return True
