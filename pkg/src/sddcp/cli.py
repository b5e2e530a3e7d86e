"""Command-line front end: solve instances, run seeded benchmark batches,
and re-verify exported certificates.

Exit codes: 0 success, 2 usage, 3 malformed input, 4 infeasible start,
5 solver failure, 6 missing backend capability, 7 failed verification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__
from .backend import STATUS_OPTIMAL, SolveOptions, solve
from .conic import SENSE_MAX, CpProblem, build_dnn_program
from .decomposition import decompose
from .embedding import EmbeddedGraph
from .errors import CapabilityError, FormatError, SizeLimitError, SolverFailure
from .oracles import relative_gap, sqp_oracle, stable_set_oracle
from .problems import (
    MODE_UNIFORM,
    MODE_UNIT_DIAGONAL,
    RngSpec,
    builtin_graph,
    complement,
    encode_sqp,
    encode_stable_set,
    parse_dimacs,
    problem_from_dict,
    problem_to_dict,
    random_instance,
    random_sqp,
    read_instance,
)
from .schemes import (
    STRATEGIES,
    TERMINAL_INFEASIBLE,
    SchemeConfig,
    run_scheme,
)
from .symmat import SymMatrix, trace_inner

EXIT_OK = 0
EXIT_FORMAT = 3
EXIT_INFEASIBLE = 4
EXIT_SOLVER = 5
EXIT_CAPABILITY = 6
EXIT_VERIFY = 7

ENV_BACKEND_TOL = "SDDCP_BACKEND_TOL"

REF_DNN = "dnn"
REF_ORACLE = "oracle"
REF_NONE = "none"


@dataclass
class RunReport:
    """One solve summarized for tabulation."""

    instance: str
    strategy: str
    iterations: int
    value: float
    reference: Optional[float]
    reference_kind: str
    gap: Optional[float]
    gap_absolute: bool
    time: float
    status: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunReport":
        return cls(**json.loads(line))


def write_reports(path, reports) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json())
            fh.write("\n")


def read_reports(path):
    reports = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                reports.append(RunReport.from_json(line))
    return reports


def _scheme_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--strategy",
        choices=STRATEGIES,
        default="forgetfulness",
        help="refinement strategy (default forgetfulness)",
    )
    parser.add_argument("--iters", type=int, default=None, help="iteration limit")
    parser.add_argument("--vertex-cap", type=int, default=200)
    parser.add_argument(
        "--threshold",
        type=float,
        default=1e-5,
        help="candidate weight threshold relative to tr(X)",
    )
    parser.add_argument("--prune-delta", type=float, default=1e-6)
    parser.add_argument(
        "--delta-k", type=int, default=2, help="partition resolution"
    )
    parser.add_argument(
        "--rescue",
        action="store_true",
        help="add one random simplex vertex per iteration (max/max1)",
    )
    parser.add_argument(
        "--seed", type=int, default=0, help="seed for the rescue vertices"
    )
    parser.add_argument(
        "--backend-tol",
        type=float,
        default=None,
        help=f"interior-point tolerance (default 1e-8 or ${ENV_BACKEND_TOL})",
    )


def _config_from_args(args) -> SchemeConfig:
    return SchemeConfig(
        strategy=args.strategy,
        max_iters=args.iters,
        vertex_cap=args.vertex_cap,
        weight_threshold=args.threshold,
        prune_delta=args.prune_delta,
        delta_k=args.delta_k,
        random_vertex_rescue=args.rescue,
        rescue_seed=args.seed,
    )


def _options_from_args(args) -> SolveOptions:
    tol = args.backend_tol
    if tol is None:
        env = os.environ.get(ENV_BACKEND_TOL)
        tol = float(env) if env else 1e-8
    return SolveOptions(tol=tol)


def _load_stable_set_graph(spec: str):
    """Stable-set target: `graph:NAME` solves the named graph directly;
    `dimacs:NAME` and `file:PATH` are clique benchmarks, so the program runs
    on the complement."""
    if spec.startswith("graph:"):
        return builtin_graph(spec[len("graph:") :]), spec
    if spec.startswith("dimacs:"):
        return complement(builtin_graph(spec[len("dimacs:") :])), spec
    if spec.startswith("file:"):
        path = spec[len("file:") :]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                g = parse_dimacs(fh.read())
        except OSError as exc:
            raise FormatError(f"cannot read graph file {path}: {exc}") from exc
        return complement(g), spec
    raise FormatError(
        f"stable-set spec {spec!r} must start with graph:, dimacs:, or file:"
    )


def _load_problem(args):
    """Returns (problem, instance label, oracle thunk or None)."""
    if args.instance:
        return read_instance(args.instance), os.path.basename(args.instance), None
    if args.sqp:
        spec = args.sqp
        if spec.startswith("complement:"):
            g = complement(builtin_graph(spec[len("complement:") :]))
        else:
            g = builtin_graph(spec)
        q = g.adjacency() + SymMatrix.identity(g.vertex_count)
        return (
            encode_sqp(q),
            f"sqp:{spec}",
            lambda: sqp_oracle(q, support_limit=20).value,
        )
    g, label = _load_stable_set_graph(args.stable_set)
    return (
        encode_stable_set(g),
        label,
        lambda: stable_set_oracle(g, size_limit=70).value,
    )


def _reference_value(kind: str, p: CpProblem, oracle_thunk, opts) -> Optional[float]:
    if kind == REF_NONE:
        return None
    if kind == REF_DNN:
        out = solve(build_dnn_program(p), opts)
        if out.status != STATUS_OPTIMAL:
            raise SolverFailure(f"reference bound solve ended {out.status}")
        return out.primal_value
    if oracle_thunk is None:
        raise FormatError("no exact oracle is available for this instance kind")
    return oracle_thunk()


def _report_gap(value: float, reference: Optional[float], sense: str):
    """Relative gap of the scheme bound against the reference, oriented so
    a looser bound gives a positive gap for both senses."""
    if reference is None:
        return None, False
    if sense == SENSE_MAX:
        gap = relative_gap(-value, -reference)
    else:
        gap = relative_gap(value, reference)
    return gap.value, gap.absolute


def _write_certificate(path, p, best, cfg) -> None:
    d = decompose(best, best.graph, cfg.weight_threshold)
    payload = {
        "problem": problem_to_dict(p),
        "graph": best.graph.to_dict(),
        "strategy": cfg.strategy,
        "value": best.primal_value,
        "X": [float(v) for v in best.X.packed()],
    }
    payload.update(d.to_dict())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def cmd_solve(args) -> int:
    p, label, oracle_thunk = _load_problem(args)
    opts = _options_from_args(args)
    cfg = _config_from_args(args)
    start = time.perf_counter()
    best, trace = run_scheme(p, cfg, opts)
    elapsed = time.perf_counter() - start
    reference = None
    gap, gap_abs = (None, False)
    if best is not None and best.status == STATUS_OPTIMAL:
        reference = _reference_value(args.reference, p, oracle_thunk, opts)
        gap, gap_abs = _report_gap(best.primal_value, reference, p.sense)

    value = best.primal_value if best is not None else float("nan")
    report = RunReport(
        instance=label,
        strategy=cfg.strategy,
        iterations=trace.iterations,
        value=value,
        reference=reference,
        reference_kind=args.reference,
        gap=gap,
        gap_absolute=gap_abs,
        time=elapsed,
        status=trace.terminal,
    )
    print(
        f"{label}  strategy={cfg.strategy}  value={value:.6f}  "
        f"iterations={trace.iterations}  terminal={trace.terminal}  "
        f"time={elapsed:.2f}s"
        + (f"  reference={reference:.6f}  gap={gap:.2e}" if gap is not None else "")
    )
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(trace.to_csv())
    if args.report_out:
        write_reports(args.report_out, [report])
    if best is None or best.status != STATUS_OPTIMAL:
        return (
            EXIT_INFEASIBLE
            if trace.terminal == TERMINAL_INFEASIBLE
            else EXIT_SOLVER
        )
    if args.cert_out:
        _write_certificate(args.cert_out, p, best, cfg)
    return EXIT_OK


def _bench_instances(args):
    if args.family == "random":
        for i in range(args.count):
            p = random_instance(args.n, args.m, RngSpec(seed=args.seed + i))
            yield f"random-{args.n}x{args.m}-{args.seed + i}", p, None
    else:
        for i in range(args.count):
            q = random_sqp(args.n, args.mode, RngSpec(seed=args.seed + i))
            label = f"sqp-{args.mode}-{args.n}-{args.seed + i}"
            yield label, encode_sqp(q), (
                lambda q=q: sqp_oracle(q, support_limit=20).value
            )


def cmd_bench(args) -> int:
    opts = _options_from_args(args)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for s in strategies:
        if s not in STRATEGIES:
            raise FormatError(f"unknown strategy {s!r}")
    reference_kind = args.reference
    if reference_kind is None:
        reference_kind = REF_DNN if args.family == "random" else REF_ORACLE

    reports = []
    for label, p, oracle_thunk in _bench_instances(args):
        reference = None
        try:
            reference = _reference_value(reference_kind, p, oracle_thunk, opts)
        except (SolverFailure, SizeLimitError) as exc:
            print(f"{label}: reference failed ({exc})", file=sys.stderr)
        for strategy in strategies:
            cfg = SchemeConfig(
                strategy=strategy,
                max_iters=args.iters,
                vertex_cap=args.vertex_cap,
                weight_threshold=args.threshold,
                prune_delta=args.prune_delta,
                delta_k=args.delta_k,
                random_vertex_rescue=args.rescue,
                rescue_seed=args.seed,
            )
            start = time.perf_counter()
            try:
                best, trace = run_scheme(p, cfg, opts)
            except SolverFailure as exc:
                print(f"{label}/{strategy}: {exc}", file=sys.stderr)
                continue
            elapsed = time.perf_counter() - start
            ok = best is not None and best.status == STATUS_OPTIMAL
            gap, gap_abs = (None, False)
            if ok:
                gap, gap_abs = _report_gap(best.primal_value, reference, p.sense)
            reports.append(
                RunReport(
                    instance=label,
                    strategy=strategy,
                    iterations=trace.iterations,
                    value=best.primal_value if ok else float("nan"),
                    reference=reference,
                    reference_kind=reference_kind,
                    gap=gap,
                    gap_absolute=gap_abs,
                    time=elapsed,
                    status=trace.terminal,
                )
            )

    for strategy in strategies:
        rows = [r for r in reports if r.strategy == strategy]
        gaps = [r.gap for r in rows if r.gap is not None]
        times = [r.time for r in rows]
        mean_gap = sum(gaps) / len(gaps) if gaps else float("nan")
        mean_time = sum(times) / len(times) if times else float("nan")
        print(
            f"{strategy}: instances={len(rows)} mean_gap={mean_gap:.6f} "
            f"mean_time={mean_time:.3f}s"
        )

    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write(
                "instance,strategy,iterations,value,reference,gap,time,status\n"
            )
            for r in reports:
                ref = "" if r.reference is None else repr(r.reference)
                gap = "" if r.gap is None else repr(r.gap)
                fh.write(
                    f"{r.instance},{r.strategy},{r.iterations},{r.value!r},"
                    f"{ref},{gap},{r.time!r},{r.status}\n"
                )
    if args.report_out:
        write_reports(args.report_out, reports)
    return EXIT_OK


def _check(label: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else ""))
    return ok


def cmd_certify(args) -> int:
    try:
        with open(args.cert, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        p = problem_from_dict(data["problem"])
        g = EmbeddedGraph.from_dict(data["graph"])
        value = float(data["value"])
        x = SymMatrix(p.n, np.array(data["X"], dtype=float))
        vertex_atoms = [(int(i), float(w)) for i, w in data["vertex_atoms"]]
        segment_atoms = [
            (np.array(atom["point"], dtype=float), float(atom["gamma"]))
            for atom in data["segment_atoms"]
        ]
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"malformed certificate: {exc}") from exc

    tol = 1e-6
    ok = True
    neg = min(
        [w for _, w in vertex_atoms] + [wt for _, wt in segment_atoms],
        default=0.0,
    )
    ok &= _check("nonnegative atom weights", neg >= -1e-12, f"min weight {neg:.2e}")

    simplex_ok = all(
        float(np.min(pt)) >= -1e-12 and abs(float(pt.sum()) - 1.0) <= 1e-9
        for pt, _ in segment_atoms
    )
    ok &= _check("segment points lie in the simplex", simplex_ok)

    recon = np.zeros((p.n, p.n))
    for i, w in vertex_atoms:
        u = g.vertex(i)
        recon += w * np.outer(u, u)
    for pt, wt in segment_atoms:
        recon += wt * np.outer(pt, pt)
    err = float(np.max(np.abs(recon - x.dense())))
    bound = tol * (1.0 + x.norm())
    ok &= _check(
        "rank-one reconstruction matches X",
        err <= bound,
        f"error {err:.2e} vs {bound:.2e}",
    )

    recon_sym = SymMatrix.from_dense(recon)
    eq_ok = True
    worst = 0.0
    for a, b in p.constraints:
        resid = abs(trace_inner(a, recon_sym) - b)
        worst = max(worst, resid)
        eq_ok &= resid <= tol * (1.0 + abs(b))
    ok &= _check("equality residuals", eq_ok, f"worst {worst:.2e}")

    obj = trace_inner(p.C, recon_sym)
    ok &= _check(
        "objective matches reported value",
        abs(obj - value) <= tol * (1.0 + abs(value)),
        f"tr(CX)={obj:.6f} vs {value:.6f}",
    )
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sddcp",
        description=(
            "Upper bounds for completely positive programs via scaled "
            "diagonally dominant cones on embedded graphs."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run one instance")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="path to a JSON instance file")
    src.add_argument(
        "--sqp",
        help=(
            "simplex quadratic program from a graph name (adjacency plus "
            "identity); prefix complement: to use the complement graph"
        ),
    )
    src.add_argument(
        "--stable-set",
        help=(
            "stable-set program: graph:NAME (direct), dimacs:NAME or "
            "file:PATH (clique benchmarks, solved on the complement)"
        ),
    )
    _scheme_flags(sp)
    sp.add_argument(
        "--reference",
        choices=(REF_DNN, REF_ORACLE, REF_NONE),
        default=REF_NONE,
        help="reference value for the reported gap",
    )
    sp.add_argument("--trace-out", help="write per-iteration CSV here")
    sp.add_argument("--cert-out", help="write a decomposition certificate here")
    sp.add_argument("--report-out", help="write a JSON-lines run report here")
    sp.set_defaults(func=cmd_solve)

    bp = sub.add_parser("bench", help="run a seeded batch")
    bp.add_argument(
        "--family", choices=("random", "sqp-random"), required=True
    )
    bp.add_argument("--n", type=int, default=10)
    bp.add_argument("--m", type=int, default=10, help="constraints (random family)")
    bp.add_argument(
        "--mode",
        choices=(MODE_UNIFORM, MODE_UNIT_DIAGONAL),
        default=MODE_UNIT_DIAGONAL,
        help="entry distribution (sqp-random family)",
    )
    bp.add_argument("--count", type=int, default=30)
    bp.add_argument(
        "--strategies",
        default="forgetfulness",
        help="comma-separated strategy list",
    )
    _scheme_flags(bp)
    bp.add_argument(
        "--reference",
        choices=(REF_DNN, REF_ORACLE, REF_NONE),
        default=None,
        help="default: dnn for random, oracle for sqp-random",
    )
    bp.add_argument("--csv-out", help="write per-instance CSV here")
    bp.add_argument("--report-out", help="write JSON-lines reports here")
    bp.set_defaults(func=cmd_bench)

    cp = sub.add_parser("certify", help="re-verify a solve certificate")
    cp.add_argument("--cert", required=True, help="certificate written by solve")
    cp.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (SolverFailure, SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
