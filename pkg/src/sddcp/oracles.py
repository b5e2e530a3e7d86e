"""Independent exact solvers at desk scale for grounding the pipeline.

A face-enumeration oracle for quadratic minimization over the simplex, a
branch-and-bound stability-number oracle, an exact membership test for the
edge-restricted cone (feasibility solve with a verified separating
certificate on failure), and the relative-gap quality measure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .backend import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    SolveOptions,
    solve,
)
from .conic import assemble_X, build_membership_program, certificate_matrix
from .embedding import EmbeddedGraph
from .errors import SizeLimitError, SolverFailure
from .problems import Graph
from .symmat import Block2, SymMatrix, dual_psd2_check, trace_inner

METHOD_FACES = "face-enumeration"
METHOD_BNB = "branch-and-bound"


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmin: object
    method: str


def sqp_oracle(q: SymMatrix, support_limit: int = 20) -> OracleResult:
    """Exact global minimum of x'Qx over the standard simplex.

    Enumerates every support set: interior critical points of each face come
    from the stationarity system (gradient constant on the face, coordinates
    summing to one), kept when strictly positive; vertex values cover the
    rest. Faces with singular systems have no interior critical point and
    are skipped.
    """
    n = q.dim
    if n > support_limit:
        raise SizeLimitError(
            f"face enumeration limited to dimension {support_limit}, got {n}"
        )
    dense = q.dense()
    best_value = float("inf")
    best_x = None
    for i in range(n):
        if dense[i, i] < best_value:
            best_value = float(dense[i, i])
            best_x = np.eye(n)[i]
    for size in range(2, n + 1):
        for support in itertools.combinations(range(n), size):
            idx = np.array(support)
            sub = dense[np.ix_(idx, idx)]
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = 2.0 * sub
            kkt[:size, size] = -1.0
            kkt[size, :size] = 1.0
            rhs = np.zeros(size + 1)
            rhs[size] = 1.0
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x_f = sol[:size]
            if np.min(x_f) <= 1e-10:
                continue
            value = float(x_f @ sub @ x_f)
            if value < best_value:
                best_value = value
                best_x = np.zeros(n)
                best_x[idx] = x_f
    best_x = np.asarray(best_x)
    best_x.flags.writeable = False
    return OracleResult(value=best_value, argmin=best_x, method=METHOD_FACES)


def stable_set_oracle(g: Graph, size_limit: int = 40) -> OracleResult:
    """Exact stability number by branch and bound on vertex inclusion."""
    n = g.vertex_count
    if n > size_limit:
        raise SizeLimitError(
            f"branch and bound limited to {size_limit} vertices, got {n}"
        )
    masks = g.neighbor_masks()
    order = sorted(range(n), key=lambda v: bin(masks[v]).count("1"))

    # greedy start: scan vertices by ascending degree
    greedy_set = 0
    blocked = 0
    for v in order:
        bit = 1 << v
        if blocked & bit:
            continue
        greedy_set |= bit
        blocked |= bit | masks[v]

    best_size = bin(greedy_set).count("1")
    best_mask = greedy_set
    all_mask = (1 << n) - 1

    def expand(candidates: int, chosen: int, size: int):
        nonlocal best_size, best_mask
        if size + bin(candidates).count("1") <= best_size:
            return
        if candidates == 0:
            if size > best_size:
                best_size = size
                best_mask = chosen
            return
        v = (candidates & -candidates).bit_length() - 1
        bit = 1 << v
        expand(candidates & ~(bit | masks[v]), chosen | bit, size + 1)
        expand(candidates & ~bit, chosen, size)

    expand(all_mask, 0, 0)
    members = tuple(v + 1 for v in range(n) if best_mask & (1 << v))
    return OracleResult(
        value=float(best_size), argmin=members, method=METHOD_BNB
    )


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    blocks: Optional[dict]
    certificate: Optional[SymMatrix]
    inner: Optional[float]


def sdd_membership(
    m: SymMatrix,
    g: EmbeddedGraph,
    opts: Optional[SolveOptions] = None,
    tol: float = 1e-7,
) -> MembershipResult:
    """Decide membership of m in the edge-restricted cone of (G, U).

    Membership comes with witness blocks whose assembly is m; rejection
    comes with a verified separating matrix W: tr(WM) < 0 while W pairs
    nonnegatively with the whole cone (every edge's reduced 2x2 functional
    lies in the dual of the PSD nonnegative 2x2 cone).
    """
    prog = build_membership_program(m, g)
    out = solve(prog, opts)
    if out.status == STATUS_OPTIMAL:
        assembled = assemble_X(g, out.blocks)
        err = float(np.max(np.abs(assembled.dense() - m.dense())))
        if err > 1e-6 * (1.0 + m.norm()):
            raise SolverFailure(
                f"membership witness assembly is off by {err:.2e}"
            )
        return MembershipResult(
            member=True, blocks=out.blocks, certificate=None, inner=None
        )
    if out.status != STATUS_INFEASIBLE:
        raise SolverFailure(
            f"membership solve ended with status {out.status}"
        )
    w = certificate_matrix(prog, out.certificate)
    scale = w.norm()
    if scale > 0:
        w = (1.0 / scale) * w
    for cand in (w, -1.0 * w):
        if _verified_separator(cand, m, g, tol):
            return MembershipResult(
                member=False,
                blocks=None,
                certificate=cand,
                inner=trace_inner(cand, m),
            )
    raise SolverFailure("infeasibility certificate failed verification")


def _verified_separator(
    w: SymMatrix, m: SymMatrix, g: EmbeddedGraph, tol: float
) -> bool:
    if trace_inner(w, m) >= -tol:
        return False
    v = g.vertices @ w.dense() @ g.vertices.T
    for i, j in g.edges:
        block = Block2(v[i - 1, i - 1], v[i - 1, j - 1], v[j - 1, j - 1])
        if not dual_psd2_check(block, tol):
            return False
    return True


class Gap(NamedTuple):
    """Relative gap (upper - lower) / |lower|; absolute difference when the
    reference is zero."""

    value: float
    absolute: bool


def relative_gap(upper: float, lower: float) -> Gap:
    if lower == 0.0:
        return Gap(value=upper - lower, absolute=True)
    return Gap(value=(upper - lower) / abs(lower), absolute=False)
