"""Release gate: one test per acceptance criterion.

Each criterion prints a single `ACCEPTANCE <n> [<name>]: PASS/FAIL (...)`
line before asserting, so `pytest -s tests/test_acceptance.py` gives the
full scoreboard. The two long clique benchmarks only run with SDDCP_LONG=1
and never gate (they report only).
"""

import itertools
import os
import time

import numpy as np
import pytest

from sddcp.backend import STATUS_OPTIMAL, SolveOptions, solve
from sddcp.conic import build_dnn_program
from sddcp.decomposition import decompose, reconstruct
from sddcp.embedding import (
    EmbeddedGraph,
    delta_partition,
    identity_complete,
    sample_segment_point,
)
from sddcp.oracles import (
    relative_gap,
    sdd_membership,
    sqp_oracle,
    stable_set_oracle,
)
from sddcp.problems import (
    MODE_UNIT_DIAGONAL,
    RngSpec,
    builtin_graph,
    complement,
    encode_sqp,
    encode_stable_set,
    random_instance,
    random_sqp,
)
from sddcp.schemes import (
    STRATEGY_ADAPTIVE,
    STRATEGY_FORGETFULNESS,
    STRATEGY_MAX,
    STRATEGY_MAX1,
    SchemeConfig,
    run_scheme,
)
from sddcp.symmat import Block2, SymMatrix, dual_psd2_check, trace_inner

OPTS = SolveOptions()

# completely positive (5 E + I) yet outside the cone of the identity
# embedding; the barycenter row makes it representable
M_SHIFTED_ONES = SymMatrix.from_dense(
    np.array([[6.0, 5.0, 5.0], [5.0, 6.0, 5.0], [5.0, 5.0, 6.0]])
)
BARYCENTER_U = EmbeddedGraph(
    n=3,
    vertices=np.vstack([np.eye(3), np.full((1, 3), 1.0 / 3.0)]),
    edges=tuple((i, j) for i in range(1, 5) for j in range(i + 1, 5)),
)


def report(num, name, ok, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} [{name}]: {'PASS' if ok else 'FAIL'}{suffix}")
    return ok


def graph_sqp(g):
    return encode_sqp(g.adjacency() + SymMatrix.identity(g.vertex_count))


def test_criterion_1_pentagon_forgetfulness():
    p = graph_sqp(builtin_graph("pentagon"))
    start = time.perf_counter()
    best, trace = run_scheme(
        p, SchemeConfig(strategy=STRATEGY_FORGETFULNESS, max_iters=5), OPTS
    )
    elapsed = time.perf_counter() - start
    value = best.primal_value
    ok = (
        best.status == STATUS_OPTIMAL
        and abs(value - 0.5) <= 1e-4
        and trace.iterations <= 5
        and elapsed < 30.0
    )
    assert report(
        1,
        "pentagon forgetfulness",
        ok,
        f"value={value:.6f} target=0.5 iters={trace.iterations} "
        f"time={elapsed:.2f}s",
    )


def test_criterion_2_icosahedron_complement_forgetfulness():
    p = graph_sqp(complement(builtin_graph("icosahedron")))
    start = time.perf_counter()
    best, trace = run_scheme(
        p, SchemeConfig(strategy=STRATEGY_FORGETFULNESS, max_iters=5), OPTS
    )
    elapsed = time.perf_counter() - start
    value = best.primal_value
    ok = (
        best.status == STATUS_OPTIMAL
        and abs(value - 1.0 / 3.0) <= 1e-4
        and trace.iterations <= 5
        and elapsed < 120.0
    )
    assert report(
        2,
        "icosahedron-complement forgetfulness",
        ok,
        f"value={value:.6f} target=0.333333 iters={trace.iterations} "
        f"time={elapsed:.2f}s",
    )


def clique_number_run(name, timeout, **cfg):
    g = complement(builtin_graph(name))
    p = encode_stable_set(g)
    cfg.setdefault("max_iters", 5)
    start = time.perf_counter()
    best, trace = run_scheme(
        p, SchemeConfig(strategy=STRATEGY_MAX1, **cfg), OPTS
    )
    elapsed = time.perf_counter() - start
    value = best.primal_value if best is not None else float("nan")
    solved = best is not None and best.status == STATUS_OPTIMAL
    return value, trace.iterations, elapsed, solved and elapsed < timeout


def test_criterion_3_clique_numbers_max1():
    v1, it1, t1, ok1 = clique_number_run("johnson8-2-4", 300.0)
    v2, it2, t2, ok2 = clique_number_run("hamming6-4", 300.0)
    ok = (
        ok1
        and ok2
        and abs(v1 - 4.0) <= 1e-4
        and abs(v2 - 4.0) <= 1e-4
        and it1 <= 5
        and it2 <= 5
    )
    assert report(
        3,
        "clique numbers via max1",
        ok,
        f"johnson8-2-4={v1:.4f} ({it1} iters, {t1:.1f}s)  "
        f"hamming6-4={v2:.4f} ({it2} iters, {t2:.1f}s)  target=4",
    )


LONG = pytest.mark.skipif(
    not os.environ.get("SDDCP_LONG"),
    reason="set SDDCP_LONG=1 to run the long clique benchmarks",
)


LONG_RUN = dict(max_iters=400, vertex_cap=160, stall_window=25)


@LONG
def test_criterion_3_long_hamming6_2():
    # non-blocking: reported for information, never gates
    v, it, t, solved = clique_number_run("hamming6-2", float("inf"), **LONG_RUN)
    match = "match" if abs(v - 32.0) <= 1e-4 else "off-target"
    assert report(
        3, "hamming6-2 long run", True,
        f"value={v:.4f} target=32 ({match}, {it} iters, {t:.1f}s)",
    )


@LONG
def test_criterion_3_long_johnson8_4_4():
    # non-blocking: reported for information, never gates
    v, it, t, solved = clique_number_run(
        "johnson8-4-4", float("inf"), **LONG_RUN
    )
    match = "match" if abs(v - 14.0) <= 1e-4 else "off-target"
    assert report(
        3, "johnson8-4-4 long run", True,
        f"value={v:.4f} target=14 ({it} iters, {t:.1f}s, {match})",
    )


def test_criterion_4_membership_counterexample():
    # the all-minus-ones-off-diagonal matrix separates M from the cone of
    # the identity embedding with pairing exactly -12
    w = SymMatrix.from_dense(2.0 * np.eye(3) - np.ones((3, 3)))
    pairing = trace_inner(w, M_SHIFTED_ONES)
    separator_valid = all(
        dual_psd2_check(Block2(w.get(i, i), w.get(i, j), w.get(j, j)), 0.0)
        for i, j in identity_complete(3).edges
    )
    rejected = sdd_membership(M_SHIFTED_ONES, identity_complete(3))
    recovered = sdd_membership(M_SHIFTED_ONES, BARYCENTER_U)
    ok = (
        pairing == -12.0
        and separator_valid
        and not rejected.member
        and rejected.inner < 0
        and rejected.certificate is not None
        and recovered.member
        and recovered.blocks is not None
    )
    assert report(
        4,
        "membership counterexample pair",
        ok,
        f"pairing={pairing:.1f} rejected={not rejected.member} "
        f"recovered={recovered.member}",
    )


def test_criterion_5_random_batch_envelope():
    start = time.perf_counter()
    gaps_forget, gaps_max = [], []
    for i in range(30):
        p = random_instance(10, 10, RngSpec(seed=1000 + i))
        dnn = solve(build_dnn_program(p), OPTS)
        assert dnn.status == STATUS_OPTIMAL
        bf, _ = run_scheme(
            p, SchemeConfig(strategy=STRATEGY_FORGETFULNESS, max_iters=15), OPTS
        )
        bm, _ = run_scheme(
            p, SchemeConfig(strategy=STRATEGY_MAX, max_iters=5), OPTS
        )
        assert bf.status == STATUS_OPTIMAL and bm.status == STATUS_OPTIMAL
        gaps_forget.append(
            relative_gap(bf.primal_value, dnn.primal_value).value
        )
        gaps_max.append(relative_gap(bm.primal_value, dnn.primal_value).value)
    elapsed = time.perf_counter() - start
    mean_f = float(np.mean(gaps_forget))
    mean_m = float(np.mean(gaps_max))
    ok = mean_f <= 0.05 and mean_m <= 0.06 and elapsed < 1800.0
    assert report(
        5,
        "random batch envelope",
        ok,
        f"mean gap forgetfulness={mean_f:.4f} (<=0.05) "
        f"max={mean_m:.4f} (<=0.06) time={elapsed:.0f}s n=30",
    )


def test_criterion_6_random_sqp_statistics():
    gaps = []
    for i in range(200):
        q = random_sqp(10, MODE_UNIT_DIAGONAL, RngSpec(seed=2000 + i))
        best, _ = run_scheme(
            encode_sqp(q),
            SchemeConfig(strategy=STRATEGY_FORGETFULNESS),
            OPTS,
        )
        assert best.status == STATUS_OPTIMAL
        exact = sqp_oracle(q).value
        gaps.append((best.primal_value - exact) / exact)
    mean = float(np.mean(gaps))
    within = float(np.mean([g <= 0.10 for g in gaps]))
    ok = mean <= 0.10 and within >= 0.6
    assert report(
        6,
        "random sqp statistics",
        ok,
        f"mean gap={mean:.4f} (<=0.10) within-10%={within:.2f} (>=0.6) n=200",
    )


def _suite_monotone_and_bounds():
    failures = []
    for seed in (51, 52, 53):
        p = random_instance(6, 4, RngSpec(seed=seed))
        dnn = solve(build_dnn_program(p), OPTS)
        for strategy in (STRATEGY_MAX, STRATEGY_MAX1, STRATEGY_ADAPTIVE):
            best, trace = run_scheme(
                p, SchemeConfig(strategy=strategy, max_iters=5), OPTS
            )
            vals = trace.values()
            if not all(b <= a + 1e-5 for a, b in zip(vals, vals[1:])):
                failures.append(f"{strategy} not monotone (seed {seed})")
            if dnn.status == STATUS_OPTIMAL and not all(
                v >= dnn.primal_value - 1e-6 for v in vals
            ):
                failures.append(f"{strategy} below outer bound (seed {seed})")
            d = decompose(best, best.graph)
            err = np.abs(reconstruct(d, best.graph) - best.X.dense()).max()
            if err > 1e-6 * (1.0 + best.X.norm()):
                failures.append(
                    f"{strategy} reconstruction {err:.1e} (seed {seed})"
                )
    return failures


def _suite_ratio_bounds():
    rng = np.random.default_rng(2024)
    from sddcp.decomposition import balanced_split

    for _ in range(1000):
        w = rng.uniform(0.05, 3.0, size=2)
        d = rng.uniform(0.0, 2.0, size=2)
        blk = Block2(w[0] * w[0] + d[0], w[0] * w[1], w[1] * w[1] + d[1])
        v, _, _ = balanced_split(blk)
        r = v[0] / v[1]
        if not (blk.s12 / blk.s22 - 1e-9 <= r <= blk.s11 / blk.s12 + 1e-9):
            return [f"ratio {r} outside [{blk.s12/blk.s22}, {blk.s11/blk.s12}]"]
    return []


def _suite_membership_sampling():
    rng = np.random.default_rng(777)
    failures = []
    for g in (identity_complete(5), delta_partition(3, 3), BARYCENTER_U):
        for _ in range(100):
            sp = sample_segment_point(g, rng)
            m = SymMatrix.from_dense(np.outer(sp.point, sp.point))
            if not sdd_membership(m, g).member:
                failures.append(f"segment point rejected on t={g.t}")
                break
    return failures


def _suite_partition_counts():
    import math

    for n in range(3, 9):
        for k in range(1, 5):
            g = delta_partition(n, k)
            want = math.comb(n + k - 1, k)
            if g.t != want:
                return [f"partition ({n},{k}) has {g.t} vertices, want {want}"]
    return []


def _suite_sqp_grid():
    for seed in range(50):
        q = random_sqp(3, "uniform", RngSpec(seed=3000 + seed))
        exact = sqp_oracle(q).value
        steps = 100
        pts = np.array(
            [
                (a, b, steps - a - b)
                for a in range(steps + 1)
                for b in range(steps + 1 - a)
            ],
            dtype=float,
        ) / steps
        grid = float(np.einsum("ki,ij,kj->k", pts, q.dense(), pts).min())
        if not (exact <= grid + 1e-12 and grid - exact <= 1e-3):
            return [f"oracle {exact} vs grid {grid} (seed {3000 + seed})"]
    return []


def _suite_stable_set_exhaustive():
    from sddcp.problems import Graph

    rng = np.random.default_rng(414)
    for _ in range(50):
        n = int(rng.integers(4, 13))
        edges = tuple(
            (i, j)
            for i in range(1, n + 1)
            for j in range(i + 1, n + 1)
            if rng.random() < 0.4
        )
        g = Graph(vertex_count=n, edges=edges)
        masks = g.neighbor_masks()
        best = 0
        for subset in range(1 << n):
            if any(
                subset & (1 << v) and subset & masks[v] for v in range(n)
            ):
                continue
            best = max(best, bin(subset).count("1"))
        if stable_set_oracle(g).value != float(best):
            return [f"stability mismatch on n={n}"]
    return []


def test_criterion_7_property_suites():
    failures = []
    failures += _suite_monotone_and_bounds()
    failures += _suite_ratio_bounds()
    failures += _suite_membership_sampling()
    failures += _suite_partition_counts()
    failures += _suite_sqp_grid()
    failures += _suite_stable_set_exhaustive()
    ok = not failures
    assert report(
        7,
        "property suites",
        ok,
        "monotone/outer-bound/reconstruction/ratio/membership/partition/"
        "sqp-grid/stable-set all hold"
        if ok
        else "; ".join(failures[:4]),
    )


def test_criterion_8_quadratic_residue_benchmark():
    # informational only: refinement on these graphs is known to be
    # solver-sensitive, so the result is reported but never gates
    g = builtin_graph("paley(13)")
    best, trace = run_scheme(
        encode_stable_set(g), SchemeConfig(strategy=STRATEGY_FORGETFULNESS), OPTS
    )
    exact = stable_set_oracle(g).value
    value = best.primal_value if best is not None else float("nan")
    assert report(
        8,
        "quadratic-residue stability (informational)",
        True,
        f"value={value:.4f} exact={exact:.0f} terminal={trace.terminal}",
    )
