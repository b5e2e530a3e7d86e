"""Conic program construction for graph-restricted matrix cones.

Builds second-order cone programs whose variable blocks are the 2x2 edge
matrices of an embedded graph (each constrained to be positive semidefinite
with nonnegative entries), the diagonal linear-programming restriction, and
the doubly nonnegative semidefinite outer bound. Programs are emitted in a
backend-neutral form: a linear objective, dense equality rows, and a list of
cone-tagged variable blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embedding import EmbeddedGraph
from .errors import CapabilityError
from .symmat import Block2, SymMatrix, packed_index, packed_length

SENSE_MIN = "minimize"
SENSE_MAX = "maximize"

KIND_EDGE = "edge-block"
KIND_VERTEX = "vertex-weight"
KIND_PSD = "psd-svec"

CONE_NONNEG = "nonnegative"
CONE_ROTATED = "rotated-quadratic"
CONE_PSD = "psd-triangle"


@dataclass(frozen=True)
class CpProblem:
    """Linear objective and trace equalities over a matrix cone.

    minimize (or maximize) tr(C X) subject to tr(A_i X) = b_i with X in the
    completely positive cone; the builders below substitute tractable inner
    or outer cones for it.
    """

    C: SymMatrix
    constraints: tuple
    sense: str = SENSE_MIN

    def __post_init__(self):
        if self.sense not in (SENSE_MIN, SENSE_MAX):
            raise ValueError(f"unknown sense {self.sense!r}")
        cons = tuple((a, float(b)) for a, b in self.constraints)
        if not cons:
            raise ValueError("need at least one equality constraint")
        for a, _ in cons:
            if a.dim != self.C.dim:
                raise ValueError("constraint dimension mismatch")
        object.__setattr__(self, "constraints", cons)

    @property
    def n(self) -> int:
        return self.C.dim

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def b(self) -> np.ndarray:
        return np.array([b for _, b in self.constraints])


@dataclass(frozen=True)
class VarBlock:
    """One cone-tagged group of scalar variables in a conic program."""

    kind: str
    offset: int
    size: int
    label: tuple
    cones: tuple


@dataclass(frozen=True)
class ConicProgram:
    """Backend-neutral conic program over cone-tagged variable blocks."""

    n: int
    objective: np.ndarray
    eq_rows: np.ndarray
    eq_rhs: np.ndarray
    var_blocks: tuple
    maximize: bool = False
    graph: Optional[EmbeddedGraph] = None
    eq_labels: tuple = field(default=())

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_eq(self) -> int:
        return self.eq_rhs.size

    def cone_kinds(self) -> frozenset:
        kinds = set()
        for blk in self.var_blocks:
            kinds.update(blk.cones)
        return frozenset(kinds)

    def extract(self, x: np.ndarray):
        """Split a solver point into (edge blocks, vertex weights, X)."""
        blocks = {}
        weights = None
        x_direct = None
        for blk in self.var_blocks:
            seg = x[blk.offset : blk.offset + blk.size]
            if blk.kind == KIND_EDGE:
                blocks[(blk.label[1], blk.label[2])] = Block2(
                    float(seg[0]), float(seg[1]), float(seg[2])
                )
            elif blk.kind == KIND_VERTEX:
                if weights is None:
                    weights = np.zeros(self.graph.t)
                weights[blk.label[1] - 1] = float(seg[0])
            elif blk.kind == KIND_PSD:
                x_direct = svec_to_sym(seg, blk.label[1])
        if x_direct is not None:
            return {}, None, x_direct
        x_mat = assemble_X(self.graph, blocks, weights)
        return blocks, weights, x_mat

    def to_text(self) -> str:
        lines = [
            f"conic program: {self.num_vars} variables, "
            f"{self.num_eq} equality rows, sense "
            f"{'maximize' if self.maximize else 'minimize'}",
        ]
        for blk in self.var_blocks:
            label = ":".join(str(p) for p in blk.label)
            cones = "+".join(blk.cones)
            lines.append(
                f"  block {label} kind={blk.kind} offset={blk.offset} "
                f"size={blk.size} cones={cones}"
            )
        return "\n".join(lines)


# svec layout: column-major upper triangle with sqrt(2) off-diagonal scaling,
# so that the inner product of two svec vectors equals tr(AB).

_SQRT2 = math.sqrt(2.0)


def svec_pairs(n: int):
    """Column-major upper-triangle index pairs (0-based) of svec order."""
    rows = []
    cols = []
    for b in range(n):
        for a in range(b + 1):
            rows.append(a)
            cols.append(b)
    return np.array(rows), np.array(cols)


def sym_to_svec(m: SymMatrix) -> np.ndarray:
    rows, cols = svec_pairs(m.dim)
    vec = m.dense()[rows, cols].copy()
    vec[rows != cols] *= _SQRT2
    return vec


def svec_to_sym(vec: np.ndarray, n: int) -> SymMatrix:
    rows, cols = svec_pairs(n)
    full = np.zeros((n, n))
    vals = np.asarray(vec, dtype=float).copy()
    vals[rows != cols] /= _SQRT2
    full[rows, cols] = vals
    full = full + np.triu(full, 1).T
    return SymMatrix.from_dense(full)


def _edge_arrays(edges):
    ei = np.array([e[0] - 1 for e in edges], dtype=int)
    ej = np.array([e[1] - 1 for e in edges], dtype=int)
    return ei, ej


def _edge_row(mat: SymMatrix, u: np.ndarray, ei, ej) -> np.ndarray:
    """Coefficients of tr(mat * X) on interleaved (s11, s12, s22) variables."""
    v = u @ mat.dense() @ u.T
    row = np.empty(3 * ei.size)
    row[0::3] = v[ei, ei]
    row[1::3] = 2.0 * v[ei, ej]
    row[2::3] = v[ej, ej]
    return row


def _vertex_row(mat: SymMatrix, u: np.ndarray) -> np.ndarray:
    return np.einsum("ti,ij,tj->t", u, mat.dense(), u)


def _edge_blocks(edges, offset: int = 0):
    blocks = []
    for idx, (i, j) in enumerate(edges):
        blocks.append(
            VarBlock(
                kind=KIND_EDGE,
                offset=offset + 3 * idx,
                size=3,
                label=("edge", i, j),
                cones=(CONE_NONNEG, CONE_ROTATED),
            )
        )
    return blocks


def _vertex_blocks(t: int, offset: int):
    return [
        VarBlock(
            kind=KIND_VERTEX,
            offset=offset + i,
            size=1,
            label=("vertex", i + 1),
            cones=(CONE_NONNEG,),
        )
        for i in range(t)
    ]


def build_sdd_program(
    p: CpProblem, g: EmbeddedGraph, include_vertex_weights: bool = False
) -> ConicProgram:
    """Restrict X to the edge-supported cone of the embedded graph.

    One 2x2 block per edge, each positive semidefinite with nonnegative
    entries; X is the congruence image of the block sum under the vertex
    matrix. Optionally adds an explicit nonnegative weight per vertex.
    """
    if p.n != g.n:
        raise ValueError("problem and graph dimensions differ")
    if not g.edges:
        raise ValueError("graph has no edges")
    ei, ej = _edge_arrays(g.edges)
    u = g.vertices
    nedge = 3 * len(g.edges)
    nvert = g.t if include_vertex_weights else 0

    def full_row(mat):
        row = np.empty(nedge + nvert)
        row[:nedge] = _edge_row(mat, u, ei, ej)
        if nvert:
            row[nedge:] = _vertex_row(mat, u)
        return row

    objective = full_row(p.C)
    eq_rows = np.vstack([full_row(a) for a, _ in p.constraints])
    blocks = _edge_blocks(g.edges)
    if nvert:
        blocks.extend(_vertex_blocks(g.t, nedge))
    return ConicProgram(
        n=p.n,
        objective=objective,
        eq_rows=eq_rows,
        eq_rhs=p.b,
        var_blocks=tuple(blocks),
        maximize=p.sense == SENSE_MAX,
        graph=g,
    )


def build_diag_program(p: CpProblem, g: EmbeddedGraph) -> ConicProgram:
    """Restrict X to nonnegative combinations of vertex outer products."""
    if p.n != g.n:
        raise ValueError("problem and graph dimensions differ")
    u = g.vertices
    objective = _vertex_row(p.C, u)
    eq_rows = np.vstack([_vertex_row(a, u) for a, _ in p.constraints])
    return ConicProgram(
        n=p.n,
        objective=objective,
        eq_rows=eq_rows,
        eq_rhs=p.b,
        var_blocks=tuple(_vertex_blocks(g.t, 0)),
        maximize=p.sense == SENSE_MAX,
        graph=g,
    )


def build_dnn_program(p: CpProblem, capabilities=None) -> ConicProgram:
    """Relax X to the doubly nonnegative cone (PSD and entrywise nonneg).

    Gives a bound from the other side of the completely positive cone; needs
    a backend with a PSD triangle cone.
    """
    if capabilities is None:
        from .backend import capabilities as backend_capabilities

        capabilities = backend_capabilities()
    if CONE_PSD not in capabilities:
        raise CapabilityError(
            "doubly nonnegative bound needs a backend with a PSD triangle cone"
        )
    n = p.n
    size = packed_length(n)
    objective = sym_to_svec(p.C)
    eq_rows = np.vstack([sym_to_svec(a) for a, _ in p.constraints])
    block = VarBlock(
        kind=KIND_PSD,
        offset=0,
        size=size,
        label=("matrix", n),
        cones=(CONE_NONNEG, CONE_PSD),
    )
    return ConicProgram(
        n=n,
        objective=objective,
        eq_rows=eq_rows,
        eq_rhs=p.b,
        var_blocks=(block,),
        maximize=p.sense == SENSE_MAX,
        graph=None,
    )


def build_membership_program(m: SymMatrix, g: EmbeddedGraph) -> ConicProgram:
    """Feasibility program: do edge blocks exist whose assembly equals m?

    One equality row per packed upper-triangle entry of m, so an
    infeasibility certificate on the equality rows is a separating symmetric
    matrix for the cone.
    """
    if m.dim != g.n:
        raise ValueError("matrix and graph dimensions differ")
    if not g.edges:
        raise ValueError("graph has no edges")
    n = g.n
    u = g.vertices
    nvars = 3 * len(g.edges)
    rows = np.zeros((packed_length(n), nvars))
    rhs = np.zeros(packed_length(n))
    labels = []
    r = 0
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            for idx, (i, j) in enumerate(g.edges):
                ui = u[i - 1]
                uj = u[j - 1]
                rows[r, 3 * idx] = ui[a - 1] * ui[b - 1]
                rows[r, 3 * idx + 1] = ui[a - 1] * uj[b - 1] + uj[a - 1] * ui[b - 1]
                rows[r, 3 * idx + 2] = uj[a - 1] * uj[b - 1]
            rhs[r] = m.get(a, b)
            labels.append(("entry", a, b))
            r += 1
    return ConicProgram(
        n=n,
        objective=np.zeros(nvars),
        eq_rows=rows,
        eq_rhs=rhs,
        var_blocks=tuple(_edge_blocks(g.edges)),
        maximize=False,
        graph=g,
        eq_labels=tuple(labels),
    )


def certificate_matrix(prog: ConicProgram, ray: np.ndarray) -> SymMatrix:
    """Symmetric matrix read off an equality-row certificate of a
    membership program (off-diagonal dual entries count twice in the trace
    pairing, so they are halved)."""
    n = prog.n
    packed = np.array(ray, dtype=float).copy()
    if packed.size != packed_length(n):
        raise ValueError("certificate length does not match matrix dimension")
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            packed[packed_index(n, a, b)] /= 2.0
    return SymMatrix(n, packed)


def assemble_X(
    g: EmbeddedGraph, blocks: dict, vertex_weights=None
) -> SymMatrix:
    """Sum of congruence-embedded edge blocks plus vertex outer products."""
    y = np.zeros((g.t, g.t))
    edge_set = set(g.edges)
    for (i, j), blk in blocks.items():
        key = (i, j) if i < j else (j, i)
        if key not in edge_set:
            raise ValueError(f"block edge {key} is not a graph edge")
        a, b = key[0] - 1, key[1] - 1
        y[a, a] += blk.s11
        y[a, b] += blk.s12
        y[b, a] += blk.s12
        y[b, b] += blk.s22
    if vertex_weights is not None:
        w = np.asarray(vertex_weights, dtype=float).ravel()
        if w.size != g.t:
            raise ValueError("vertex weight count does not match graph")
        y[np.diag_indices(g.t)] += w
    x = g.vertices.T @ y @ g.vertices
    return SymMatrix.from_dense(x, tol=1e-9)
