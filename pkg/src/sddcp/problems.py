"""Instance constructors: random trace-constrained programs, quadratic
programs over the simplex, stable set programs, graph generators, and file
formats (DIMACS edge files and a JSON instance format).

Random draws are pinned: uniforms come from a seeded PCG64 stream and
Gaussians from an explicit Box-Muller transform over that stream, so
instances are reproducible across library versions.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass

import numpy as np

from .conic import SENSE_MAX, SENSE_MIN, CpProblem
from .errors import FormatError
from .symmat import SymMatrix, packed_length, trace_inner

MODE_UNIFORM = "uniform"
MODE_UNIT_DIAGONAL = "unit-diagonal"


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with 1-based vertex indices."""

    vertex_count: int
    edges: tuple

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (1 <= i and j <= self.vertex_count):
                raise ValueError(f"edge ({i}, {j}) out of range")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> SymMatrix:
        n = self.vertex_count
        a = np.zeros((n, n))
        for i, j in self.edges:
            a[i - 1, j - 1] = 1.0
            a[j - 1, i - 1] = 1.0
        return SymMatrix.from_dense(a)

    def neighbor_masks(self):
        """Adjacency as bitmasks over 0-based vertices."""
        masks = [0] * self.vertex_count
        for i, j in self.edges:
            masks[i - 1] |= 1 << (j - 1)
            masks[j - 1] |= 1 << (i - 1)
        return masks


@dataclass(frozen=True)
class RngSpec:
    """Seed plus the (fixed) sampling convention for random instances."""

    seed: int
    distribution: str = "standard-gaussian"

    def __post_init__(self):
        if self.distribution != "standard-gaussian":
            raise ValueError(f"unsupported distribution {self.distribution!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def gaussian_samples(gen: np.random.Generator, count: int) -> np.ndarray:
    """Standard normals via Box-Muller pairs over the uniform stream.

    Each pair consumes two uniforms and yields (r cos, r sin) in that order;
    an odd count discards the trailing sine.
    """
    half = (count + 1) // 2
    u1 = 1.0 - gen.random(half)  # in (0, 1], keeps the log finite
    u2 = gen.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * half)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:count]


def random_instance(n: int, m: int, rng: RngSpec) -> CpProblem:
    """Seeded random program with a known strictly feasible point.

    The objective is a Gram matrix of a square Gaussian factor; constraint
    matrices are symmetrized Gaussians and right-hand sides are chosen so
    that the all-ones matrix plus n times the identity satisfies every
    equality exactly. Draw order: objective factor first (row-major), then
    each constraint seed in turn.
    """
    if n < 2:
        raise ValueError("need dimension at least 2")
    if m < 1:
        raise ValueError("need at least one constraint")
    gen = rng.generator()
    factor = gaussian_samples(gen, n * n).reshape(n, n)
    c = SymMatrix.from_dense(factor.T @ factor)
    feasible = SymMatrix.ones(n) + float(n) * SymMatrix.identity(n)
    constraints = []
    for _ in range(m):
        seed = gaussian_samples(gen, n * n).reshape(n, n)
        a = SymMatrix.from_dense((seed + seed.T) / 2.0)
        constraints.append((a, trace_inner(a, feasible)))
    return CpProblem(C=c, constraints=tuple(constraints), sense=SENSE_MIN)


def encode_sqp(q: SymMatrix) -> CpProblem:
    """Minimum of x'Qx over the simplex as a trace-one matrix program."""
    e = SymMatrix.ones(q.dim)
    return CpProblem(C=q, constraints=((e, 1.0),), sense=SENSE_MIN)


def random_sqp(n: int, mode: str, rng: RngSpec) -> SymMatrix:
    """Random symmetric matrix with uniform entries in [0, 1].

    `uniform` draws the whole upper triangle (diagonal included) row-major;
    `unit-diagonal` fixes the diagonal at one and draws only the strict
    upper triangle row-major.
    """
    if n < 2:
        raise ValueError("need dimension at least 2")
    gen = rng.generator()
    packed = np.empty(packed_length(n))
    if mode == MODE_UNIFORM:
        packed[:] = gen.random(packed.size)
    elif mode == MODE_UNIT_DIAGONAL:
        draws = iter(gen.random(n * (n - 1) // 2))
        pos = 0
        for i in range(n):
            for j in range(i, n):
                packed[pos] = 1.0 if i == j else next(draws)
                pos += 1
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    return SymMatrix(n, packed)


def encode_stable_set(g: Graph) -> CpProblem:
    """Stability number of a graph as a trace-constrained maximization."""
    n = g.vertex_count
    constraint = g.adjacency() + SymMatrix.identity(n)
    return CpProblem(
        C=SymMatrix.ones(n),
        constraints=((constraint, 1.0),),
        sense=SENSE_MAX,
    )


def complement(g: Graph) -> Graph:
    present = set(g.edges)
    edges = [
        (i, j)
        for i in range(1, g.vertex_count + 1)
        for j in range(i + 1, g.vertex_count + 1)
        if (i, j) not in present
    ]
    return Graph(vertex_count=g.vertex_count, edges=tuple(edges))


# DIMACS edge format

def parse_dimacs(text) -> Graph:
    """Parse DIMACS edge format; duplicate edges and both orientations fold.

    Accepts `c` comment lines, one `p edge <n> <m>` problem line, and
    `e <i> <j>` edge lines.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise FormatError(f"line {lineno}: repeated problem line")
            if len(fields) < 3 or fields[1] not in ("edge", "edges"):
                raise FormatError(f"line {lineno}: expected 'p edge <n> <m>'")
            try:
                n = int(fields[2])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad vertex count") from exc
        elif fields[0] == "e":
            if n is None:
                raise FormatError(f"line {lineno}: edge before problem line")
            if len(fields) != 3:
                raise FormatError(f"line {lineno}: expected 'e <i> <j>'")
            try:
                i, j = int(fields[1]), int(fields[2])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad edge endpoints") from exc
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise FormatError(f"line {lineno}: edge ({i}, {j}) invalid")
            edges.append((i, j))
        else:
            raise FormatError(f"line {lineno}: unknown directive {fields[0]!r}")
    if n is None:
        raise FormatError("missing problem line")
    return Graph(vertex_count=n, edges=tuple(edges))


def serialize_dimacs(g: Graph) -> str:
    lines = [f"p edge {g.vertex_count} {g.edge_count}"]
    lines.extend(f"e {i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


# named graph families

def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least three vertices")
    edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    return Graph(vertex_count=n, edges=tuple(edges))


def hamming_graph(d: int, w: int) -> Graph:
    """Binary d-bit words, adjacent when Hamming distance is at least w."""
    if d < 1 or not (1 <= w <= d):
        raise ValueError("need 1 <= w <= d")
    n = 1 << d
    edges = [
        (a + 1, b + 1)
        for a in range(n)
        for b in range(a + 1, n)
        if bin(a ^ b).count("1") >= w
    ]
    return Graph(vertex_count=n, edges=tuple(edges))


def johnson_graph(n: int, k: int, d: int) -> Graph:
    """k-subsets of an n-set, adjacent when symmetric difference >= d."""
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n")
    subsets = [frozenset(c) for c in itertools.combinations(range(n), k)]
    edges = [
        (a + 1, b + 1)
        for a in range(len(subsets))
        for b in range(a + 1, len(subsets))
        if len(subsets[a] ^ subsets[b]) >= d
    ]
    return Graph(vertex_count=len(subsets), edges=tuple(edges))


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def paley_graph(q: int) -> Graph:
    """Quadratic-residue graph on a prime field with q = 1 (mod 4)."""
    if not _is_prime(q):
        raise ValueError("paley graphs are supported for prime moduli only")
    if q % 4 != 1:
        raise ValueError("paley graphs need q = 1 (mod 4)")
    residues = {(x * x) % q for x in range(1, q)}
    edges = [
        (a + 1, b + 1)
        for a in range(q)
        for b in range(a + 1, q)
        if (b - a) % q in residues
    ]
    return Graph(vertex_count=q, edges=tuple(edges))


def icosahedron_graph() -> Graph:
    """The 5-regular graph on 12 vertices: two poles and two 5-rings."""
    top, bottom = 1, 12
    ring1 = [2, 3, 4, 5, 6]
    ring2 = [7, 8, 9, 10, 11]
    edges = []
    for idx in range(5):
        edges.append((top, ring1[idx]))
        edges.append((bottom, ring2[idx]))
        edges.append((ring1[idx], ring1[(idx + 1) % 5]))
        edges.append((ring2[idx], ring2[(idx + 1) % 5]))
        edges.append((ring1[idx], ring2[idx]))
        edges.append((ring1[idx], ring2[(idx + 1) % 5]))
    return Graph(vertex_count=12, edges=tuple(edges))


_NAME_PATTERNS = (
    (re.compile(r"^cycle\(?(\d+)\)?$"), lambda m: cycle_graph(int(m.group(1)))),
    (
        re.compile(r"^hamming\(?(\d+)[-,](\d+)\)?$"),
        lambda m: hamming_graph(int(m.group(1)), int(m.group(2))),
    ),
    (
        re.compile(r"^johnson\(?(\d+)[-,](\d+)[-,](\d+)\)?$"),
        lambda m: johnson_graph(int(m.group(1)), int(m.group(2)), int(m.group(3))),
    ),
    (re.compile(r"^paley\(?(\d+)\)?$"), lambda m: paley_graph(int(m.group(1)))),
)


def builtin_graph(name: str) -> Graph:
    """Look up a named graph: cycle(n), hamming(d,w) or hammingD-W,
    johnson(n,k,d) or johnsonN-K-D, paley(q), icosahedron, pentagon."""
    key = name.strip().lower()
    if key == "icosahedron":
        return icosahedron_graph()
    if key == "pentagon":
        return cycle_graph(5)
    for pattern, build in _NAME_PATTERNS:
        match = pattern.match(key)
        if match:
            return build(match)
    raise ValueError(f"unknown builtin graph {name!r}")


# instance file format

def problem_to_dict(p: CpProblem) -> dict:
    return {
        "n": p.n,
        "m": p.m,
        "sense": p.sense,
        "C": [float(v) for v in p.C.packed()],
        "A": [[float(v) for v in a.packed()] for a, _ in p.constraints],
        "b": [float(b) for _, b in p.constraints],
    }


def problem_from_dict(data: dict) -> CpProblem:
    try:
        n = int(data["n"])
        m = int(data["m"])
        sense = data["sense"]
        c = SymMatrix(n, np.array(data["C"], dtype=float))
        mats = [SymMatrix(n, np.array(row, dtype=float)) for row in data["A"]]
        rhs = [float(v) for v in data["b"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed instance data: {exc}") from exc
    if sense not in (SENSE_MIN, SENSE_MAX):
        raise FormatError(f"unknown sense {sense!r}")
    if len(mats) != m or len(rhs) != m:
        raise FormatError("constraint count mismatch")
    return CpProblem(
        C=c, constraints=tuple(zip(mats, rhs)), sense=sense
    )


def write_instance(path, p: CpProblem) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(p), fh, sort_keys=True)
        fh.write("\n")


def read_instance(path) -> CpProblem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read instance {path}: {exc}") from exc
    return problem_from_dict(data)
