"""Experiment protocol: instances, budgets, studies, trace persistence.

A study is a grid of algorithm configurations run on R independent
synthetic instances times E executions each, all seeds derived from one
master seed.  Executions are paired across configurations (run (r, e)
uses the same stream seed for every algorithm), which sharpens
comparisons and makes the full-snapshot/subset-snapshot reductions exact
within a study.  Aggregation reports medians over the R*E runs on a
common effective-passes grid, carrying each trace's last value forward
between its epoch boundaries; runs that diverged count as +infinity
beyond their last recorded point.

Trace persistence is the package's one external interface: a CSV with
header ``algorithm,config_id,run_id,epoch,passes,objective,gap,distance,
diverged``, floats at 17 significant digits (non-finite values spelled
``Infinity``/``-Infinity``/``NaN``), empty cells where the minimizer is
unknown, plus a JSON manifest with every config field and seed.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetFormatError, InfeasibleBudgetError
from .objectives import (
    Dataset,
    LEAST_SQUARES,
    ObjectiveKind,
    estimate_constants,
)
from .optimizers import (
    EpochConfig,
    Trace,
    run_cheap_svrg,
    run_cheaper_svrg,
    run_minibatch,
    run_sgd,
    run_svrg,
)
from .errors import DivergenceError
from .rng import SeededRng, derive_seed

_TAG_INSTANCE = 0x494E5354
_TAG_EXEC = 0x45584543

_ALGORITHMS = ("sgd", "svrg", "cheap", "minibatch", "cheaper")


@dataclass(frozen=True)
class InstanceSpec:
    """Shape of a synthetic regression instance; ``noise_norm`` is the
    exact l2-norm the noise vector is rescaled to."""

    n: int
    p: int
    noise_norm: float
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"need n, p >= 1, got n={self.n}, p={self.p}")
        if self.noise_norm < 0.0 or not math.isfinite(self.noise_norm):
            raise ValueError(f"noise_norm must be finite and >= 0, got {self.noise_norm}")


def generate_regression_instance(spec: InstanceSpec) -> tuple[Dataset, np.ndarray]:
    """Random least squares instance y = X w* + eps.

    Draw order is fixed (w*, then X row-major, then the noise vector,
    skipped entirely when noise_norm is 0), so instances are reproducible
    bit for bit from the seed.  w* is spherical Gaussian rescaled to unit
    norm, X entries are N(0, 1/n), and eps is rescaled to the requested
    norm.  Targets are assembled row by row with the same dot products
    the objective evaluation uses, so a noiseless instance has objective
    exactly zero at w*.
    """
    rng = SeededRng(spec.seed)
    n, p = spec.n, spec.p
    w = rng.gaussian_vector(p)
    nrm = math.sqrt(float(np.dot(w, w)))
    if nrm == 0.0:
        raise ValueError("degenerate zero draw for w*")
    w_star = w / nrm
    X = rng.gaussian_vector(n * p).reshape(n, p) * (1.0 / math.sqrt(n))
    if spec.noise_norm > 0.0:
        eps = rng.gaussian_vector(n)
        enrm = math.sqrt(float(np.dot(eps, eps)))
        if enrm == 0.0:
            raise ValueError("degenerate zero draw for noise")
        eps = eps * (spec.noise_norm / enrm)
    else:
        eps = np.zeros(n, dtype=np.float64)
    y = np.empty(n, dtype=np.float64)
    for i in range(n):
        y[i] = np.dot(X[i], w_star) + eps[i]
    return Dataset(X, y), w_star


def _parse_float(token: str, path: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise DatasetFormatError(
            f"{path}: line {lineno}: cannot parse {what} {token!r}"
        ) from None


def load_dataset(
    path: str,
    fmt: str = "csv",
    normalize_rows: bool = False,
    label_map: dict | None = None,
) -> Dataset:
    """Read a dense CSV (``label,feat1,...,featP``) or sparse svmlight
    (``label idx:val ...``, 1-based indices) file.

    ``label_map`` translates raw labels (e.g. {0, 1} targets to the
    {-1, +1} convention); a label missing from the map is an error.  With
    ``normalize_rows`` every feature row is rescaled to unit l2-norm and
    zero rows are rejected.
    """
    if fmt not in ("csv", "svmlight"):
        raise ValueError(f"unknown dataset format {fmt!r}")
    labels: list[float] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from exc

    if fmt == "csv":
        feats: list[list[float]] = []
        width = None
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 2:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected label plus features, got {line!r}"
                )
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(parts)}"
                )
            labels.append(_parse_float(parts[0], path, lineno, "label"))
            feats.append([_parse_float(t, path, lineno, "feature") for t in parts[1:]])
        if not feats:
            raise DatasetFormatError(f"{path}: no data rows")
        X = np.asarray(feats, dtype=np.float64)
    else:
        entries: list[dict[int, float]] = []
        p_max = 0
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            labels.append(_parse_float(parts[0], path, lineno, "label"))
            row: dict[int, float] = {}
            for tok in parts[1:]:
                if ":" not in tok:
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: expected idx:val pair, got {tok!r}"
                    )
                stei, stev = tok.split(":", 1)
                try:
                    idx = int(stei)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: bad feature index {stei!r}"
                    ) from None
                if idx < 1:
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: indices are 1-based, got {idx}"
                    )
                row[idx - 1] = _parse_float(stev, path, lineno, "feature value")
                p_max = max(p_max, idx)
            entries.append(row)
        if not entries:
            raise DatasetFormatError(f"{path}: no data rows")
        X = np.zeros((len(entries), p_max), dtype=np.float64)
        for i, row in enumerate(entries):
            for j, v in row.items():
                X[i, j] = v

    y = np.asarray(labels, dtype=np.float64)
    if label_map is not None:
        mapped = np.empty_like(y)
        for i, v in enumerate(y):
            key = v
            if key not in label_map and int(v) == v and int(v) in label_map:
                key = int(v)
            if key not in label_map:
                raise DatasetFormatError(
                    f"{path}: row {i}: label {v} not in label map {sorted(label_map)}"
                )
            mapped[i] = label_map[key]
        y = mapped
    if normalize_rows:
        norms = np.sqrt(np.einsum("ij,ij->i", X, X))
        zero = norms == 0.0
        if np.any(zero):
            raise DatasetFormatError(
                f"{path}: row {int(np.argmax(zero))} has zero feature norm"
            )
        X = X / norms[:, None]
    return Dataset(X, y)


def _snap_floor(x: float) -> int:
    """Floor after absorbing float noise, so a quotient that is a whole
    number in exact arithmetic lands on that integer instead of one below."""
    return int(math.floor(x + 1e-9 * max(1.0, abs(x))))


@dataclass(frozen=True)
class BudgetPlan:
    """Epoch schedule fitting a total gradient-evaluation budget, with a
    fraction ``perc`` of it spent in inner loops."""

    total_grads: int
    perc: float
    algorithm: str
    s: int
    q: int
    outer: int
    T: int
    K: int

    @property
    def planned_spend(self) -> int:
        return self.T * (self.outer + 2 * self.q * (self.K - 1))


def plan_budget(
    total_grads: int, perc: float, s: int, q: int, n: int, algorithm: str
) -> BudgetPlan:
    """Split a gradient budget into T epochs of K inner iterations.

    The outer (snapshot) cost per epoch is s, except the full-snapshot
    algorithm pays n.  T gets the outer share, K the inner share; both
    are clamped so at least one epoch with one inner step is scheduled,
    and the plan never overshoots either share by more than one epoch's
    cost.
    """
    if not 0.0 < perc < 1.0:
        raise ValueError(f"perc must lie strictly inside (0, 1), got {perc}")
    if algorithm not in _ALGORITHMS or algorithm == "sgd":
        raise ValueError(f"no epoch plan for algorithm {algorithm!r}")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if algorithm == "svrg":
        s = n
        outer = n
    else:
        if s < 1:
            raise ValueError(f"s must be >= 1 for {algorithm}, got {s}")
        outer = s
    if total_grads < outer + 2 * q:
        raise InfeasibleBudgetError(
            f"budget {total_grads} cannot cover one epoch "
            f"(outer {outer} + one inner step {2 * q})"
        )
    # perc arrives as a decimal like 0.8 whose float image sits slightly
    # off the rational it denotes; computing the outer share as
    # total - perc * total (rather than (1 - perc) * total) and snapping
    # the quotients keeps whole-number schedules whole.
    T = max(1, _snap_floor((total_grads - perc * total_grads) / outer))
    K = max(2, _snap_floor(perc * total_grads / (2.0 * q * T)) + 1)
    return BudgetPlan(
        total_grads=total_grads,
        perc=perc,
        algorithm=algorithm,
        s=s,
        q=q,
        outer=outer,
        T=T,
        K=K,
    )


@dataclass(frozen=True)
class AlgorithmSpec:
    """One line of a study grid.

    Step size comes from either ``eta_c`` (meaning eta = 1 / (eta_c L)
    with the instance's estimated L) or ``eta_abs``.  Epoch counts come
    from explicit K and T, or are planned from ``budget`` and ``perc``.
    SGD uses ``steps`` (defaulting to ``budget``) and its own ``sgd_c``
    decay scale.
    """

    algorithm: str
    label: str
    eta_c: float | None = None
    eta_abs: float | None = None
    s: int | None = None
    q: int = 1
    b: int | None = None
    K: int | None = None
    T: int | None = None
    steps: int | None = None
    sgd_c: float = 0.1
    budget: int | None = None
    perc: float | None = None

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm != "sgd":
            if self.eta_c is None and self.eta_abs is None:
                raise ValueError(f"{self.label}: needs eta_c or eta_abs")
            if (self.K is None or self.T is None) and (
                self.budget is None or self.perc is None
            ):
                raise ValueError(
                    f"{self.label}: needs either explicit K and T or budget and perc"
                )
        else:
            if self.steps is None and self.budget is None:
                raise ValueError(f"{self.label}: sgd needs steps or budget")


@dataclass
class StudyConfig:
    """Monte-Carlo grid: ``instances`` (R) independent datasets times
    ``executions`` (E) seeded runs of every algorithm spec.  Synthetic
    studies give n/p/noise_norm; alternatively a fixed dataset may be
    supplied, in which case R must be 1 (only execution seeds vary)."""

    algorithms: list[AlgorithmSpec]
    master_seed: int
    instances: int = 1
    executions: int = 1
    n: int | None = None
    p: int | None = None
    noise_norm: float = 0.0
    dataset: Dataset | None = None
    w_star: np.ndarray | None = None
    kind: ObjectiveKind = LEAST_SQUARES
    constants_mode: str = "paper"

    def __post_init__(self):
        if self.instances < 1 or self.executions < 1:
            raise ValueError("instances and executions must be >= 1")
        if not self.algorithms:
            raise ValueError("study needs at least one algorithm spec")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate config labels: {labels}")
        if self.dataset is None:
            if self.n is None or self.p is None:
                raise ValueError("synthetic study needs n and p")
        elif self.instances != 1:
            raise ValueError("a fixed dataset admits only instances = 1")


@dataclass
class RunRecord:
    label: str
    algorithm: str
    instance_index: int
    execution_index: int
    run_id: str
    seed: int
    resolved: dict
    trace: Trace


@dataclass
class StudyResult:
    config: StudyConfig
    runs: list[RunRecord] = field(default_factory=list)

    def labels(self) -> list[str]:
        return [a.label for a in self.config.algorithms]

    def runs_for(self, label: str) -> list[RunRecord]:
        return [r for r in self.runs if r.label == label]

    def median_curves(self, which: str = "objective") -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Median trace per config on the union grid of its runs' passes.

        Between epoch boundaries each run contributes its last recorded
        value; past the end of a diverged run it contributes +infinity.
        """
        out = {}
        for label in self.labels():
            records = self.runs_for(label)
            traces = [r.trace for r in records]
            grid = np.unique(np.concatenate([t.passes for t in traces]))
            stack = np.empty((len(traces), grid.shape[0]), dtype=np.float64)
            for row, t in enumerate(traces):
                series = _trace_series(t, which)
                idx = np.searchsorted(t.passes, grid, side="right") - 1
                idx = np.clip(idx, 0, series.shape[0] - 1)
                vals = series[idx]
                if t.diverged:
                    vals = vals.copy()
                    vals[grid > t.passes[-1]] = np.inf
                stack[row] = vals
            out[label] = (grid, np.median(stack, axis=0))
        return out

    def final_medians(self, which: str = "objective") -> dict[str, float]:
        """Median end-of-run value per config; diverged runs count as
        +infinity."""
        out = {}
        for label in self.labels():
            finals = []
            for r in self.runs_for(label):
                if r.trace.diverged:
                    finals.append(np.inf)
                else:
                    finals.append(float(_trace_series(r.trace, which)[-1]))
            out[label] = float(np.median(finals))
        return out


def _trace_series(trace: Trace, which: str) -> np.ndarray:
    if which == "objective":
        return trace.objective
    if which == "gap":
        if trace.gap is None:
            raise ValueError("trace has no gap column (minimizer unknown)")
        return trace.gap
    if which == "distance":
        if trace.distance is None:
            raise ValueError("trace has no distance column (minimizer unknown)")
        return trace.distance
    raise ValueError(f"unknown trace series {which!r}")


def _resolve_eta(spec: AlgorithmSpec, L: float) -> float:
    if spec.eta_abs is not None:
        return float(spec.eta_abs)
    return 1.0 / (spec.eta_c * L)


def _run_one(
    spec: AlgorithmSpec,
    kind: ObjectiveKind,
    data: Dataset,
    w_star,
    L: float,
    seed: int,
) -> tuple[dict, Trace]:
    w0 = np.zeros(data.p, dtype=np.float64)
    if spec.algorithm == "sgd":
        steps = spec.steps if spec.steps is not None else spec.budget
        resolved = {"steps": int(steps), "c": spec.sgd_c, "L": L}
        try:
            trace = run_sgd(kind, data, w0, int(steps), spec.sgd_c, L, seed, w_star)
        except DivergenceError as exc:
            trace = exc.trace
        return resolved, trace

    eta = _resolve_eta(spec, L)
    if spec.K is not None and spec.T is not None:
        K, T, s, q = spec.K, spec.T, spec.s, spec.q
        if spec.algorithm == "svrg":
            s = data.n
    else:
        plan = plan_budget(
            spec.budget,
            spec.perc,
            spec.s if spec.s is not None else 0,
            spec.q,
            data.n,
            spec.algorithm,
        )
        K, T, s, q = plan.K, plan.T, plan.s, plan.q
    cfg = EpochConfig(eta=eta, K=int(K), T=int(T), seed=seed, s=s, q=q, b=spec.b)
    resolved = {"eta": eta, "K": int(K), "T": int(T), "s": int(s), "q": int(q)}
    if spec.b is not None:
        resolved["b"] = int(spec.b)
    runner = {
        "svrg": run_svrg,
        "cheap": run_cheap_svrg,
        "minibatch": run_minibatch,
        "cheaper": run_cheaper_svrg,
    }[spec.algorithm]
    try:
        trace = runner(kind, data, w0, cfg, w_star)
    except DivergenceError as exc:
        trace = exc.trace
    return resolved, trace


def run_study(cfg: StudyConfig) -> StudyResult:
    """Execute the full grid; deterministic output for a fixed master
    seed regardless of thread count (CHEAPSVRG_THREADS, default 1)."""
    result = StudyResult(config=cfg)
    instances: list[tuple[Dataset, np.ndarray | None]] = []
    if cfg.dataset is not None:
        instances.append((cfg.dataset, cfg.w_star))
    else:
        for r in range(cfg.instances):
            spec = InstanceSpec(
                n=cfg.n,
                p=cfg.p,
                noise_norm=cfg.noise_norm,
                seed=derive_seed(cfg.master_seed, _TAG_INSTANCE, r),
            )
            instances.append(generate_regression_instance(spec))
    consts = [
        estimate_constants(cfg.kind, data, mode=cfg.constants_mode)
        for data, _ in instances
    ]

    tasks = []
    for spec in cfg.algorithms:
        for r in range(cfg.instances):
            data, w_star = instances[r]
            for e in range(cfg.executions):
                seed = derive_seed(cfg.master_seed, _TAG_EXEC, r, e)
                tasks.append((spec, r, e, data, w_star, consts[r].L, seed))

    def work(task):
        spec, r, e, data, w_star, L, seed = task
        resolved, trace = _run_one(spec, cfg.kind, data, w_star, L, seed)
        return RunRecord(
            label=spec.label,
            algorithm=spec.algorithm,
            instance_index=r,
            execution_index=e,
            run_id=f"r{r}e{e}",
            seed=seed,
            resolved=resolved,
            trace=trace,
        )

    threads = int(os.environ.get("CHEAPSVRG_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            result.runs = list(pool.map(work, tasks))
    else:
        result.runs = [work(t) for t in tasks]
    return result


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def write_traces(result: StudyResult, csv_path: str, manifest_path: str | None = None) -> None:
    """Persist every run as CSV rows plus a JSON manifest.

    Rows are sorted by (config_id, run_id, epoch) so output bytes do not
    depend on execution order.  17 significant digits round-trip float64
    exactly.
    """
    if manifest_path is None:
        base = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
        manifest_path = base + ".manifest.json"
    rows = []
    for rec in sorted(result.runs, key=lambda r: (r.label, r.run_id)):
        t = rec.trace
        for k in range(t.rows()):
            rows.append(
                ",".join(
                    [
                        rec.algorithm,
                        rec.label,
                        rec.run_id,
                        str(int(t.epochs[k])),
                        _fmt(t.passes[k]),
                        _fmt(t.objective[k]),
                        _fmt(t.gap[k]) if t.gap is not None else "",
                        _fmt(t.distance[k]) if t.distance is not None else "",
                        "1" if t.diverged else "0",
                    ]
                )
            )
    try:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("algorithm,config_id,run_id,epoch,passes,objective,gap,distance,diverged\n")
            for row in rows:
                fh.write(row + "\n")
    except OSError as exc:
        raise OSError(f"cannot write traces to {csv_path}: {exc}") from exc

    from . import __version__

    cfg = result.config
    manifest = {
        "version": __version__,
        "master_seed": cfg.master_seed,
        "objective": {"kind": cfg.kind.name, "lam": cfg.kind.lam},
        "instances": cfg.instances,
        "executions": cfg.executions,
        "instance_shape": {
            "n": cfg.n if cfg.dataset is None else cfg.dataset.n,
            "p": cfg.p if cfg.dataset is None else cfg.dataset.p,
            "noise_norm": cfg.noise_norm if cfg.dataset is None else None,
            "from_dataset": cfg.dataset is not None,
        },
        "configs": [
            {
                "label": a.label,
                "algorithm": a.algorithm,
                "eta_c": a.eta_c,
                "eta_abs": a.eta_abs,
                "s": a.s,
                "q": a.q,
                "b": a.b,
                "K": a.K,
                "T": a.T,
                "steps": a.steps,
                "sgd_c": a.sgd_c,
                "budget": a.budget,
                "perc": a.perc,
            }
            for a in cfg.algorithms
        ],
        "runs": [
            {
                "config_id": rec.label,
                "run_id": rec.run_id,
                "instance_index": rec.instance_index,
                "execution_index": rec.execution_index,
                "seed": rec.seed,
                "resolved": rec.resolved,
                "diverged": rec.trace.diverged,
                "rows": rec.trace.rows(),
                "final_objective": rec.trace.final_objective(),
            }
            for rec in sorted(result.runs, key=lambda r: (r.label, r.run_id))
        ],
    }
    try:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write manifest to {manifest_path}: {exc}") from exc


def read_traces(csv_path: str) -> list[dict]:
    """Parse a trace CSV back into row dicts (floats restored exactly;
    empty gap/distance become None)."""
    with open(csv_path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise DatasetFormatError(f"{csv_path}: empty file")
    header = lines[0].split(",")
    expected = [
        "algorithm",
        "config_id",
        "run_id",
        "epoch",
        "passes",
        "objective",
        "gap",
        "distance",
        "diverged",
    ]
    if header != expected:
        raise DatasetFormatError(f"{csv_path}: unexpected header {header}")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(expected):
            raise DatasetFormatError(
                f"{csv_path}: line {lineno}: expected {len(expected)} fields, got {len(parts)}"
            )
        out.append(
            {
                "algorithm": parts[0],
                "config_id": parts[1],
                "run_id": parts[2],
                "epoch": int(parts[3]),
                "passes": float(parts[4]),
                "objective": float(parts[5]),
                "gap": float(parts[6]) if parts[6] else None,
                "distance": float(parts[7]) if parts[7] else None,
                "diverged": parts[8] == "1",
            }
        )
    return out
