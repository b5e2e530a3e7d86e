"""Rank-one certificates for solutions of the edge-restricted programs.

Every feasible X of the restricted cone splits into vertex atoms (weights on
vertex outer products) and segment atoms (weights on outer products of edge
points). The split of each 2x2 edge block is balanced: the component ratio
of its rank-one part is the geometric mean of the two extreme feasible
ratios. Segment atoms double as candidate vertices for graph refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .backend import STATUS_OPTIMAL, SolveOutcome
from .embedding import EmbeddedGraph, SegmentPoint
from .symmat import Block2, psd2_check

POLICY_ALL = "all-above-threshold"
POLICY_LARGEST = "largest-only"

DEFAULT_WEIGHT_FLOOR = 1e-5


@dataclass(frozen=True)
class SegmentAtom:
    """One weighted rank-one term gamma * w w' with w on an edge segment."""

    edge: tuple
    weight: float
    point: SegmentPoint
    candidate: bool


@dataclass(frozen=True)
class Decomposition:
    """Conic combination X = sum(lambda_i u_i u_i') + sum(gamma w w')."""

    vertex_atoms: tuple
    segment_atoms: tuple
    trace_x: float

    def to_dict(self) -> dict:
        return {
            "vertex_atoms": [[i, w] for i, w in self.vertex_atoms],
            "segment_atoms": [
                {
                    "edge": list(atom.edge),
                    "gamma": atom.weight,
                    "theta": atom.point.theta,
                    "point": [float(v) for v in atom.point.point],
                }
                for atom in self.segment_atoms
            ],
        }


def balanced_split(block: Block2, tol: float = 1e-6):
    """Split a PSD nonnegative 2x2 block as v v' + diag(a, b).

    Returns (v, a, b) with v None when the block is (numerically) diagonal,
    in which case all mass goes to the diagonal residual. The ratio v1/v2 is
    the geometric mean of the smallest and largest ratios over all feasible
    rank-one parts.
    """
    if not psd2_check(block, tol) or block.s12 < -tol:
        raise ValueError(f"block {block} is outside the PSD nonnegative cone")
    m11 = max(block.s11, 0.0)
    m12 = max(block.s12, 0.0)
    m22 = max(block.s22, 0.0)
    eps = 1e-9 * (m11 + m22) + 1e-12
    if m12 <= eps or max(m11, m22) <= eps:
        # diagonal block, or one too small overall to split stably
        return None, m11, m22
    if m12 * m12 > m11 * m22:
        # interior-point outputs can sit just outside the cone; lift the
        # smaller diagonal the minimal amount instead of losing m12
        if m11 <= m22:
            m11 = m12 * m12 / m22
        else:
            m22 = m12 * m12 / m11
    ratio = math.sqrt(m11 / m22)
    root = math.sqrt(m12)
    v = np.array([root * math.sqrt(ratio), root / math.sqrt(ratio)])
    a = max(m11 - v[0] * v[0], 0.0)
    b = max(m22 - v[1] * v[1], 0.0)
    return v, a, b


def decompose(
    outcome: SolveOutcome,
    g: EmbeddedGraph,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
) -> Decomposition:
    """Split an optimal outcome's X into vertex and segment atoms.

    Diagonal residuals of each edge block fold into the endpoint vertex
    atoms. A segment atom is flagged as a refinement candidate only when its
    largest matrix entry, gamma * max(w)^2, reaches weight_floor * tr(X).
    """
    if outcome.status != STATUS_OPTIMAL:
        raise ValueError("decomposition needs an optimal solve outcome")
    if weight_floor < 0:
        raise ValueError("weight floor must be nonnegative")
    lam = np.zeros(g.t)
    if outcome.vertex_weights is not None:
        lam += np.clip(outcome.vertex_weights, 0.0, None)
    trace_x = outcome.X.trace()
    floor = weight_floor * max(trace_x, 0.0)
    atoms = []
    for (i, j), block in (outcome.blocks or {}).items():
        v, a, b = balanced_split(block)
        lam[i - 1] += a
        lam[j - 1] += b
        if v is None:
            continue
        raw = v[0] * g.vertex(i) + v[1] * g.vertex(j)
        s = float(raw.sum())
        if s <= 0.0:
            continue
        point = np.clip(raw / s, 0.0, None)
        point /= point.sum()
        gamma = s * s
        theta = min(max(v[0] / s, 0.0), 1.0)
        sp = SegmentPoint(edge=(i, j), point=point, theta=theta)
        # blocks whose smaller diagonal is solver noise split into a point
        # that all but coincides with an endpoint vertex; keep the atom for
        # the certificate but never propose it as a new vertex
        eps = 1e-6 * (max(block.s11, 0.0) + max(block.s22, 0.0)) + 1e-12
        stable = min(block.s11, block.s22) > eps
        candidate = stable and gamma * float(np.max(point)) ** 2 >= floor
        atoms.append(
            SegmentAtom(edge=(i, j), weight=gamma, point=sp, candidate=candidate)
        )
    vertex_atoms = tuple(
        (idx + 1, float(w)) for idx, w in enumerate(lam) if w > 0.0
    )
    return Decomposition(
        vertex_atoms=vertex_atoms,
        segment_atoms=tuple(atoms),
        trace_x=trace_x,
    )


def candidate_vertices(
    d: Decomposition,
    policy: str = POLICY_ALL,
    threshold: float = DEFAULT_WEIGHT_FLOOR,
):
    """Select refinement candidates among a decomposition's segment atoms.

    `all-above-threshold` keeps every candidate-flagged atom whose weight
    reaches threshold * tr(X) (boundary included); `largest-only` keeps at
    most the heaviest such atom.
    """
    if policy not in (POLICY_ALL, POLICY_LARGEST):
        raise ValueError(f"unknown candidate policy {policy!r}")
    cut = threshold * max(d.trace_x, 0.0)
    eligible = [
        atom
        for atom in d.segment_atoms
        if atom.candidate and atom.weight >= cut
    ]
    if not eligible:
        return []
    if policy == POLICY_LARGEST:
        eligible = [max(eligible, key=lambda atom: atom.weight)]
    return [atom.point for atom in eligible]


def reconstruct(d: Decomposition, g: EmbeddedGraph) -> np.ndarray:
    """Dense matrix of the decomposition's conic combination."""
    x = np.zeros((g.n, g.n))
    for i, w in d.vertex_atoms:
        u = g.vertex(i)
        x += w * np.outer(u, u)
    for atom in d.segment_atoms:
        w = atom.point.point
        x += atom.weight * np.outer(w, w)
    return x
