"""Command-line interface.

Subcommands: ``generate`` (synthetic instance files), ``run`` (one
optimizer run to a trace CSV), ``study`` (Monte-Carlo comparison grid),
``theory`` (rate constants and feasibility), ``check`` (brute-force
invariant battery).

Exit codes: 0 success, 1 failed check, 2 usage error, 3 I/O failure,
4 divergence (trace still written), 5 infeasible budget, 6 infeasible
theory parameters.

Step sizes are given as the divisor c in eta = 1 / (c L) via ``--eta-c``
(L estimated from the instance), with ``--eta-abs`` as an escape hatch.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import (
    CheapSvrgError,
    DatasetFormatError,
    DivergenceError,
    InfeasibleBudgetError,
    InfeasibleStepError,
    NoConvergenceError,
    RankDeficientError,
)
from .harness import (
    AlgorithmSpec,
    InstanceSpec,
    StudyConfig,
    StudyResult,
    RunRecord,
    generate_regression_instance,
    load_dataset,
    run_study,
    write_traces,
)
from .objectives import (
    Dataset,
    LEAST_SQUARES,
    estimate_constants,
    logistic_l2,
    objective_value,
)
from .optimizers import EpochConfig
from .theory import TheoryParams, feasibility_check

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
EXIT_BUDGET = 5
EXIT_THEORY = 6


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a synthetic regression instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")


def _add_run(sub):
    p = sub.add_parser("run", help="single optimizer run to a trace CSV")
    p.add_argument(
        "--algo", required=True, choices=["sgd", "svrg", "cheap", "minibatch", "cheaper"]
    )
    p.add_argument("--data", required=True, help="instance directory or dataset file")
    p.add_argument("--format", choices=["csv", "svmlight"], default="csv")
    p.add_argument("--normalize-rows", action="store_true")
    p.add_argument("--objective", choices=["ls", "logistic"], default="ls")
    p.add_argument("--lam", type=float, default=1e-6, help="l2 weight for logistic")
    p.add_argument("--eta-c", type=float, help="step divisor: eta = 1/(c L)")
    p.add_argument("--eta-abs", type=float, help="absolute step size")
    p.add_argument("--s", type=int)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--b", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--steps", type=int, help="sgd step count")
    p.add_argument("--sgd-c", type=float, default=0.1, help="sgd decay scale c")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="trace CSV path")


def _add_study(sub):
    p = sub.add_parser("study", help="Monte-Carlo comparison grid")
    p.add_argument("--config", help="JSON study file (overrides inline flags)")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--budget", type=int, help="total atomic gradients per run")
    p.add_argument("--perc", type=float, default=0.75, help="inner-loop budget share")
    p.add_argument("--R", type=int, default=1, help="independent instances")
    p.add_argument("--E", type=int, default=1, help="executions per instance")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--eta-c", type=float, default=300.0)
    p.add_argument(
        "--algos",
        default="sgd,svrg,cheap:s=1,cheap:s=sqrt",
        help="comma list, e.g. 'sgd,svrg,cheap:s=1,cheap:s=0.1n,minibatch:s=10+q=4'",
    )
    p.add_argument("--out", required=True, help="output directory")


def _add_theory(sub):
    p = sub.add_parser("theory", help="rate constants and feasibility")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--p", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--zeta", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--phi0", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--json", action="store_true", dest="as_json")


def _add_check(sub):
    p = sub.add_parser("check", help="brute-force invariant battery")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cheapsvrg",
        description="surrogate-snapshot variance-reduced optimization toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_run(sub)
    _add_study(sub)
    _add_theory(sub)
    _add_check(sub)
    return parser


def _write_instance_dir(out: str, data: Dataset, w_star: np.ndarray, spec: InstanceSpec) -> None:
    os.makedirs(out, exist_ok=True)
    rows = []
    for i in range(data.n):
        fields = [format(data.targets[i], ".17g")]
        fields.extend(format(v, ".17g") for v in data.features[i])
        rows.append(",".join(fields))
    with open(os.path.join(out, "dataset.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    with open(os.path.join(out, "w_star.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(format(v, ".17g") for v in w_star) + "\n")
    meta = {
        "n": spec.n,
        "p": spec.p,
        "noise_norm": spec.noise_norm,
        "seed": spec.seed,
        "version": __version__,
    }
    with open(os.path.join(out, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_generate(args) -> int:
    try:
        spec = InstanceSpec(n=args.n, p=args.p, noise_norm=args.noise, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data, w_star = generate_regression_instance(spec)
    consts = estimate_constants(LEAST_SQUARES, data)
    try:
        _write_instance_dir(args.out, data, w_star, spec)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out}: n={data.n} p={data.p} noise={args.noise}")
    print(f"L = {consts.L:.17g}")
    print(f"gamma = {consts.gamma:.17g}")
    print(f"F(w*) = {objective_value(LEAST_SQUARES, data, w_star):.17g}")
    return EXIT_OK


def _load_run_input(args) -> tuple[Dataset, np.ndarray | None]:
    if os.path.isdir(args.data):
        data = load_dataset(os.path.join(args.data, "dataset.csv"), "csv")
        wstar_path = os.path.join(args.data, "w_star.csv")
        w_star = None
        if os.path.exists(wstar_path):
            with open(wstar_path, "r", encoding="utf-8") as fh:
                w_star = np.array([float(ln) for ln in fh if ln.strip()])
        return data, w_star
    label_map = {0: -1.0, 0.0: -1.0, 1: 1.0, 1.0: 1.0, -1: -1.0, -1.0: -1.0}
    return (
        load_dataset(
            args.data,
            args.format,
            normalize_rows=args.normalize_rows,
            label_map=label_map if args.objective == "logistic" else None,
        ),
        None,
    )


def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _single_run_result(args, data: Dataset, w_star) -> tuple[StudyResult, bool]:
    kind = LEAST_SQUARES if args.objective == "ls" else logistic_l2(args.lam)
    if args.algo == "sgd":
        if args.steps is None:
            raise ValueError("sgd needs --steps")
        # --eta-c on sgd sets the decay scale: eta_k = 1/(c L) * 1/k
        sgd_c = 1.0 / args.eta_c if args.eta_c is not None else args.sgd_c
        spec = AlgorithmSpec(
            algorithm="sgd", label="sgd", steps=args.steps, sgd_c=sgd_c
        )
        cfg = StudyConfig(
            algorithms=[spec],
            master_seed=args.seed,
            dataset=data,
            w_star=w_star,
            kind=kind,
        )
        result = run_study(cfg)
        return result, result.runs[0].trace.diverged
    if args.eta_abs is None and args.eta_c is None:
        raise ValueError("need --eta-c or --eta-abs")
    s = args.s
    if args.algo in ("cheap", "minibatch", "cheaper") and s is None:
        s = _ceil_sqrt(data.n)
    if args.K is None or args.T is None:
        raise ValueError("need --K and --T for epoch-structured algorithms")
    spec = AlgorithmSpec(
        algorithm=args.algo,
        label=args.algo,
        eta_c=args.eta_c,
        eta_abs=args.eta_abs,
        s=s,
        q=args.q,
        b=args.b,
        K=args.K,
        T=args.T,
    )
    cfg = StudyConfig(
        algorithms=[spec],
        master_seed=args.seed,
        instances=1,
        executions=1,
        dataset=data,
        w_star=w_star,
        kind=kind,
    )
    result = run_study(cfg)
    diverged = result.runs[0].trace.diverged
    return result, diverged


def cmd_run(args) -> int:
    try:
        data, w_star = _load_run_input(args)
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        result, diverged = _single_run_result(args, data, w_star)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        write_traces(result, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    trace = result.runs[0].trace
    gap = trace.gap[-1] if trace.gap is not None else float("nan")
    print(
        f"final objective = {trace.final_objective():.17g}  gap = {gap:.17g}  "
        f"passes = {trace.passes[-1]:.17g}  diverged = {int(trace.diverged)}"
    )
    if diverged:
        print("run diverged; partial trace written", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _parse_s_token(tok: str, n: int) -> int:
    if tok == "sqrt":
        return _ceil_sqrt(n)
    if tok.endswith("n"):
        frac = float(tok[:-1]) if tok[:-1] else 1.0
        return max(1, int(frac * n))
    return int(tok)


def _parse_algos(text: str, n: int, budget: int, perc: float, eta_c: float) -> list[AlgorithmSpec]:
    """Grammar: name[:key=val[+key=val]...], keys in {s, q, b, c}."""
    specs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        name, _, rest = token.partition(":")
        opts: dict[str, str] = {}
        if rest:
            for kv in rest.split("+"):
                key, _, val = kv.partition("=")
                if not val:
                    raise ValueError(f"bad algorithm option {kv!r} in {token!r}")
                opts[key] = val
        s = _parse_s_token(opts["s"], n) if "s" in opts else None
        q = int(opts.get("q", "1"))
        b = int(opts["b"]) if "b" in opts else None
        label_bits = [name]
        if s is not None:
            label_bits.append(f"s{s}")
        if q != 1:
            label_bits.append(f"q{q}")
        if b is not None:
            label_bits.append(f"b{b}")
        label = "-".join(label_bits)
        if name == "sgd":
            specs.append(
                AlgorithmSpec(
                    algorithm="sgd",
                    label=label,
                    steps=budget,
                    sgd_c=float(opts.get("c", "0.1")),
                )
            )
        else:
            if name in ("cheap", "minibatch", "cheaper") and s is None:
                s = _ceil_sqrt(n)
                label = f"{name}-s{s}"
            specs.append(
                AlgorithmSpec(
                    algorithm=name,
                    label=label,
                    eta_c=float(opts.get("c", str(eta_c))),
                    s=s,
                    q=q,
                    b=b,
                    budget=budget,
                    perc=perc,
                )
            )
    if not specs:
        raise ValueError("empty algorithm grid")
    return specs


def _study_from_json(path: str) -> StudyConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    specs = [AlgorithmSpec(**entry) for entry in raw["algorithms"]]
    kind = (
        LEAST_SQUARES
        if raw.get("objective", "ls") == "ls"
        else logistic_l2(raw.get("lam", 1e-6))
    )
    return StudyConfig(
        algorithms=specs,
        master_seed=raw.get("seed", 0),
        instances=raw.get("R", 1),
        executions=raw.get("E", 1),
        n=raw.get("n"),
        p=raw.get("p"),
        noise_norm=raw.get("noise", 0.0),
        kind=kind,
    )


def cmd_study(args) -> int:
    try:
        if args.config:
            cfg = _study_from_json(args.config)
        else:
            if args.n is None or args.p is None or args.budget is None:
                raise ValueError("inline study needs --n, --p and --budget")
            specs = _parse_algos(args.algos, args.n, args.budget, args.perc, args.eta_c)
            cfg = StudyConfig(
                algorithms=specs,
                master_seed=args.seed,
                instances=args.R,
                executions=args.E,
                n=args.n,
                p=args.p,
                noise_norm=args.noise,
            )
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run_study(cfg)
    except InfeasibleBudgetError as exc:
        print(f"error: infeasible budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    try:
        os.makedirs(args.out, exist_ok=True)
        write_traces(result, os.path.join(args.out, "traces.csv"))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for label, med in result.final_medians("objective").items():
        print(f"{label}: median final objective = {med:.17g}")
    return EXIT_OK


def cmd_theory(args) -> int:
    try:
        params = TheoryParams(
            L=args.L,
            gamma=args.gamma,
            theta=args.theta,
            eps=args.eps,
            phi0=args.phi0,
            xi=args.xi,
            zeta=args.zeta,
        )
        cfg = EpochConfig(
            eta=args.eta, K=args.K, T=1, seed=0, s=args.s, q=args.q, b=args.b
        )
        report = feasibility_check(params, cfg, p=args.p)
    except (ValueError, InfeasibleStepError, NoConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "rho": report.rho,
        "kappa": report.kappa,
        "eta_max": report.eta_max,
        "eta_max_strict": report.eta_max_strict,
        "K_min": report.K_min,
        "K_min_relaxed": report.K_min_relaxed,
        "T_min": report.T_min,
        "grads_per_epoch": report.grads_per_epoch,
        "total_grads": report.total_grads,
        "feasible": report.feasible,
        "reason": report.reason,
    }
    if args.as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, val in payload.items():
            print(f"{key} = {val}")
    if not report.feasible:
        print(f"infeasible: {report.reason}", file=sys.stderr)
        return EXIT_THEORY
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_all

    results = run_all(seed=args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name}: max deviation {r.max_dev:.3e} (tol {r.tol:.0e}) {status}")
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(r.name for r in failed)}")
        return EXIT_CHECK_FAILED
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(exc.code) if exc.code else EXIT_OK
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "study":
            return cmd_study(args)
        if args.command == "theory":
            return cmd_theory(args)
        if args.command == "check":
            return cmd_check(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InfeasibleStepError, NoConvergenceError, RankDeficientError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THEORY
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CheapSvrgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
