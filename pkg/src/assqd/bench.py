"""Benchmark sweeps: scaling, ablations, hop horizon; CSV/JSON tables.

Every (model, n, seed) instance is prepared once — disorder, Hamiltonian,
reference eigenpairs, contaminated counts — and all methods in a sweep
run on those identical counts, so cross-method comparisons are paired.
Rows carry the full parameterization; medians aggregate over seeds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
import statistics
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable

from assqd.driver import (
    RunConfig,
    RunError,
    RunTrace,
    run_as_sqd,
    run_random_sqd,
    run_standard_sqd,
)
from assqd.models import ModelSpec, build_model, metadata_record
from assqd.oracle import ConvergenceError, EigenpairSet, exact_lowest
from assqd.pauli import PauliHamiltonian
from assqd.sampling import CountsMultiset, contaminated_distribution, sample_counts

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_ETA = 0.2

SCALING_METHODS = ("standard", "random", "as-en")
ABLATION_METHODS = ("as-en", "as-coupling_only", "as-denom_only", "as-diag_only")

HOPS_THRESHOLD = 1e-6

CSV_COLUMNS = (
    "model", "n", "seed", "method", "hops", "shots", "eta",
    "K", "B", "T", "tau", "eps",
    "E_est", "E0", "E1", "err", "iters", "subspace_size", "wall_ms", "terminated",
)

_INT_COLUMNS = {"n", "seed", "hops", "shots", "K", "B", "T", "iters", "subspace_size"}
_STR_COLUMNS = {"model", "method", "terminated"}


def default_shots(n: int) -> int:
    """2000 shots up to n = 10, 3000 for the larger sizes."""
    return 2000 if n <= 10 else 3000


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a model family crossed with sizes and disorder seeds."""

    kind: str
    sizes: tuple[int, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    shots: int | None = None
    eta: float = DEFAULT_ETA
    K: int = 50
    B: int = 20
    T: int = 10
    tau: float = 1e-4
    eps: float = 1e-8
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if any(not 2 <= n <= 20 for n in self.sizes):
            raise ValueError("sizes must lie within [2, 20]")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def run_config(self, seed: int, kind: str = "en", hops: int = 1) -> RunConfig:
        return RunConfig(
            K=self.K, B=self.B, T=self.T, tau=self.tau, eps=self.eps,
            kind=kind, hops=hops, seed=seed,
        )


@dataclass(frozen=True)
class ResultRow:
    """One sweep cell; column order follows CSV_COLUMNS."""

    model: str
    n: int
    seed: int
    method: str
    hops: int
    shots: int
    eta: float
    K: int
    B: int
    T: int
    tau: float
    eps: float
    E_est: float
    E0: float
    E1: float
    err: float
    iters: int
    subspace_size: int
    wall_ms: float
    terminated: str


@dataclass(frozen=True)
class InstanceBundle:
    """Everything shared by all methods at one (model, n, seed) cell."""

    spec: ModelSpec
    ham: PauliHamiltonian
    pairs: EigenpairSet
    counts: CountsMultiset
    metadata: dict[str, Any]


def instance_key(metadata: dict[str, Any]) -> str:
    """Stable hash of the model metadata, for oracle caching."""
    return hashlib.sha256(
        json.dumps(metadata, sort_keys=True).encode()
    ).hexdigest()[:16]


def prepare_instance(
    kind: str,
    n: int,
    seed: int,
    shots: int,
    eta: float,
    oracle_cache: dict[str, EigenpairSet] | None = None,
) -> InstanceBundle:
    """Build the Hamiltonian, solve the reference pair, sample counts."""
    spec = ModelSpec(kind=kind, n=n, seed=seed)
    ham, disorder = build_model(spec)
    metadata = metadata_record(spec, disorder)
    key = instance_key(metadata)
    if oracle_cache is not None and key in oracle_cache:
        pairs = oracle_cache[key]
    else:
        pairs = exact_lowest(ham)
        if oracle_cache is not None:
            oracle_cache[key] = pairs
    if pairs.degenerate_ground:
        warnings.warn(
            f"degenerate ground space for {kind} n={n} seed={seed}; "
            "the contamination mixture is ambiguous",
            stacklevel=2,
        )
    model = contaminated_distribution(pairs.psi0, pairs.psi1, eta)
    counts = sample_counts(model, shots, seed=seed)
    return InstanceBundle(
        spec=spec, ham=ham, pairs=pairs, counts=counts, metadata=metadata
    )


def run_method(
    ham: PauliHamiltonian, counts: CountsMultiset, method: str, config: RunConfig
) -> RunTrace:
    """Dispatch a method label to its driver entry point."""
    if method == "standard":
        return run_standard_sqd(ham, counts, config.K)
    if method == "random":
        return run_random_sqd(ham, counts, config)
    if method.startswith("as-"):
        return run_as_sqd(
            ham, counts, dataclasses.replace(config, kind=method[3:])
        )
    raise ValueError(f"unknown method {method!r}")


def make_row(
    bundle: InstanceBundle,
    method: str,
    config: RunConfig,
    shots: int,
    eta: float,
) -> tuple[ResultRow, RunTrace | None]:
    """Run one cell and fold the trace into a table row.

    Solver failures do not abort a sweep: the row records NaN energies
    and terminated = "error", with no trace.
    """
    common = dict(
        model=bundle.spec.kind,
        n=bundle.spec.n,
        seed=bundle.spec.seed,
        method=method,
        hops=config.hops,
        shots=shots,
        eta=eta,
        K=config.K,
        B=config.B,
        T=config.T,
        tau=config.tau,
        eps=config.eps,
        E0=bundle.pairs.e0,
        E1=bundle.pairs.e1,
    )
    try:
        trace = run_method(bundle.ham, bundle.counts, method, config)
    except (RunError, ConvergenceError) as exc:
        row = ResultRow(
            E_est=math.nan, err=math.nan, iters=0, subspace_size=0,
            wall_ms=0.0, terminated=f"error: {exc}", **common,
        )
        return row, None
    e_est = trace.final_energy
    if e_est < bundle.pairs.e0 - 1e-9:
        raise AssertionError(
            f"variational floor violated: E_est={e_est!r} < E0={bundle.pairs.e0!r}"
        )
    row = ResultRow(
        E_est=e_est,
        err=abs(e_est - bundle.pairs.e0),
        iters=trace.records[-1].iteration,
        subspace_size=len(trace.final_subspace),
        wall_ms=sum(r.wall_ms for r in trace.records),
        terminated=trace.termination,
        **common,
    )
    return row, trace


def _sorted_rows(rows: Iterable[ResultRow]) -> list[ResultRow]:
    return sorted(rows, key=lambda r: (r.model, r.n, r.seed, r.method, r.hops))


CellKey = tuple[str, int, int, str, int]


def _sweep(
    spec: ExperimentSpec,
    methods: tuple[str, ...],
    hops: tuple[int, ...] = (1,),
    oracle_cache: dict[str, EigenpairSet] | None = None,
) -> tuple[list[ResultRow], dict[CellKey, RunTrace], dict[tuple[int, int], InstanceBundle]]:
    """Run a full grid; returns sorted rows plus per-cell traces/bundles."""
    bundles: dict[tuple[int, int], InstanceBundle] = {}
    shots_for: dict[int, int] = {}
    for n in spec.sizes:
        shots_for[n] = spec.shots if spec.shots is not None else default_shots(n)
        for seed in spec.seeds:
            bundles[(n, seed)] = prepare_instance(
                spec.kind, n, seed, shots_for[n], spec.eta, oracle_cache
            )
    cells = [
        ((n, seed), method, h)
        for (n, seed) in bundles
        for method in methods
        for h in hops
    ]

    def run_cell(cell):
        (n, seed), method, h = cell
        bundle = bundles[(n, seed)]
        config = spec.run_config(seed=seed, hops=h)
        row, trace = make_row(bundle, method, config, shots_for[n], spec.eta)
        return (spec.kind, n, seed, method, h), row, trace

    if spec.workers == 1:
        results = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(run_cell, cells))
    rows = _sorted_rows(row for _, row, _ in results)
    traces = {key: trace for key, _, trace in results if trace is not None}
    return rows, traces, bundles


def median_abs_error(errors: list[float]) -> float:
    """Plain median; even-length input averages the two central values."""
    if not errors:
        raise ValueError("median of empty list")
    return float(statistics.median(errors))


def _medians(rows: list[ResultRow]) -> list[dict[str, Any]]:
    grouped: dict[tuple[str, int, str, int], list[float]] = {}
    for row in rows:
        if math.isnan(row.err):
            # Failed cells stay visible in the table but cannot aggregate.
            continue
        grouped.setdefault((row.model, row.n, row.method, row.hops), []).append(
            row.err
        )
    return [
        {
            "model": model,
            "n": n,
            "method": method,
            "hops": hops,
            "median_err": median_abs_error(errs),
        }
        for (model, n, method, hops), errs in sorted(grouped.items())
    ]


def experiment_scaling(
    spec: ExperimentSpec,
    methods: tuple[str, ...] = SCALING_METHODS,
    oracle_cache: dict[str, EigenpairSet] | None = None,
) -> tuple[list[ResultRow], list[dict[str, Any]]]:
    """Method comparison across sizes on identical per-instance counts."""
    rows, _, _ = _sweep(spec, methods, oracle_cache=oracle_cache)
    return rows, _medians(rows)


def experiment_ablation(
    spec: ExperimentSpec,
    methods: tuple[str, ...] = ABLATION_METHODS,
    oracle_cache: dict[str, EigenpairSet] | None = None,
) -> tuple[list[ResultRow], list[dict[str, Any]]]:
    """Acquisition-variant comparison; all variants share each instance.

    Identical seeding is checked directly: every variant's initial solve
    lands on the same subspace, hence the same first-record energy.
    """
    rows, traces, _ = _sweep(spec, methods, oracle_cache=oracle_cache)
    first_energy: dict[tuple[int, int], float] = {}
    for (model, n, seed, method, h), trace in traces.items():
        e_init = trace.records[0].energy
        known = first_energy.setdefault((n, seed), e_init)
        if e_init != known:
            raise AssertionError(
                f"variants disagree on the initial solve at n={n} seed={seed}"
            )
    return rows, _medians(rows)


def iterations_to_threshold(
    trace: RunTrace, e0: float, threshold: float = HOPS_THRESHOLD
) -> int | None:
    """First iteration whose energy is within threshold of e0, if any."""
    for record in trace.records:
        if abs(record.energy - e0) <= threshold:
            return record.iteration
    return None


def experiment_hops(
    spec: ExperimentSpec,
    oracle_cache: dict[str, EigenpairSet] | None = None,
) -> tuple[list[ResultRow], list[dict[str, Any]]]:
    """Paired 1-hop vs 2-hop arms with iterations-to-threshold medians."""
    rows, traces, bundles = _sweep(
        spec, ("as-en",), hops=(1, 2), oracle_cache=oracle_cache
    )
    stats: list[dict[str, Any]] = []
    for n in sorted(set(spec.sizes)):
        per_arm: dict[int, list[float]] = {1: [], 2: []}
        for seed in spec.seeds:
            e0 = bundles[(n, seed)].pairs.e0
            for h in (1, 2):
                trace = traces[(spec.kind, n, seed, "as-en", h)]
                reached = iterations_to_threshold(trace, e0)
                per_arm[h].append(math.inf if reached is None else float(reached))
        stats.append(
            {
                "model": spec.kind,
                "n": n,
                "threshold": HOPS_THRESHOLD,
                "median_iters_1hop": median_abs_error(per_arm[1]),
                "median_iters_2hop": median_abs_error(per_arm[2]),
                "iters_1hop": per_arm[1],
                "iters_2hop": per_arm[2],
            }
        )
    return rows, stats


def _format_value(value: Any) -> str:
    return str(value)


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Header plus one line per row, in CSV_COLUMNS order."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        record = dataclasses.asdict(row)
        buf.write(",".join(_format_value(record[c]) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError("unrecognized CSV header")
    rows = []
    for line in lines[1:]:
        parts = line.split(",", maxsplit=len(CSV_COLUMNS) - 1)
        record: dict[str, Any] = {}
        for column, part in zip(CSV_COLUMNS, parts):
            if column in _INT_COLUMNS:
                record[column] = int(part)
            elif column in _STR_COLUMNS:
                record[column] = part
            else:
                record[column] = float(part)
        rows.append(ResultRow(**record))
    return rows


def rows_to_json(rows: list[ResultRow]) -> str:
    return json.dumps([dataclasses.asdict(row) for row in rows], indent=2)


def rows_from_json(text: str) -> list[ResultRow]:
    return [ResultRow(**record) for record in json.loads(text)]


def save_rows(rows: list[ResultRow], path: str, fmt: str = "csv") -> None:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
