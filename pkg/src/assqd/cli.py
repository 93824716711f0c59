"""Command-line harness: build models, sample counts, run methods, sweep benchmarks.

Verbs
-----
model   emit a disordered-model Hamiltonian (text) plus its metadata
oracle  exact lowest eigenpairs of a model instance (JSON energies, optional npz)
sample  contaminated finite-shot counts for a model instance (counts JSON)
run     one method on an existing Hamiltonian file + counts file (trace JSON)
bench   standard/random/EN scaling sweep (rows + per-(n, method) medians)
ablate  acquisition-variant comparison (rows + medians)
hops    paired 1-hop vs 2-hop arms (rows + iterations-to-threshold stats)
ingest  counts file straight from hardware (or any external sampler) -> AS-SQD run

Global flags: --seed (disorder/sampling seed), --out (file; stdout otherwise),
--format {csv,json} for tabular verbs. Verbs whose natural payload is a single
document (oracle, sample, run, ingest) always emit JSON. Repeating any
invocation with identical flags reproduces identical output, except for the
wall_ms timing field.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path
from typing import Any

import click

from .bench import (
    ABLATION_METHODS,
    DEFAULT_ETA,
    DEFAULT_SEEDS,
    ExperimentSpec,
    default_shots,
    experiment_ablation,
    experiment_hops,
    experiment_scaling,
    prepare_instance,
    rows_to_csv,
    rows_to_json,
    run_method,
)
from .driver import RunConfig, trace_to_json
from .models import ModelSpec, build_model, metadata_record
from .oracle import exact_lowest, save_eigenpairs
from .pauli import format_hamiltonian, load_hamiltonian
from .sampling import (
    contaminated_distribution,
    counts_to_json,
    load_counts,
    sample_counts,
)

_MODEL_KINDS = click.Choice(["heisenberg", "tfim"])
_METHOD_NAMES = click.Choice(
    ["standard", "en", "coupling_only", "denom_only", "diag_only", "random"]
)


def _emit(ctx: click.Context, text: str) -> None:
    out = ctx.obj["out"]
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(out).write_text(text, encoding="utf-8")


def _sidecar(ctx: click.Context, suffix: str, text: str) -> None:
    """Write a companion document next to --out; skipped on stdout."""
    out = ctx.obj["out"]
    if out is not None:
        Path(str(out) + suffix).write_text(text, encoding="utf-8")


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise click.BadParameter(f"not a comma-separated integer list: {text!r}") from exc


def _emit_table(
    ctx: click.Context, rows: list, summaries: list[dict[str, Any]], label: str
) -> None:
    """Rows as CSV or JSON; summaries ride along (sidecar in CSV mode)."""
    if ctx.obj["format"] == "json":
        payload = {"rows": json.loads(rows_to_json(rows)), label: summaries}
        _emit(ctx, json.dumps(payload, indent=2))
    else:
        _emit(ctx, rows_to_csv(rows))
        _sidecar(ctx, f".{label}.json", json.dumps(summaries, indent=2))


def _method_label(method: str) -> str:
    return method if method in ("standard", "random") else f"as-{method}"


def _instance(kind: str, n: int, seed: int):
    spec = ModelSpec(kind=kind, n=n, seed=seed)
    ham, disorder = build_model(spec)
    return ham, spec, disorder


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Disorder/sampling seed for single-instance verbs.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output file; stdout when omitted.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True,
              help="Table format for bench/ablate/hops.")
@click.pass_context
def main(ctx: click.Context, seed: int, out: str | None, fmt: str) -> None:
    """Subspace-expansion ground-state estimation from measurement counts."""
    ctx.obj = {"seed": seed, "out": out, "format": fmt}


@main.command()
@click.argument("kind", type=_MODEL_KINDS)
@click.argument("n", type=int)
@click.pass_context
def model(ctx: click.Context, kind: str, n: int) -> None:
    """Emit the Hamiltonian for a disordered chain instance.

    Text format by default, with metadata in a `.meta.json` sidecar when
    --out is given; --format json bundles both into one document.
    """
    ham, spec, disorder = _instance(kind, n, ctx.obj["seed"])
    text = format_hamiltonian(ham)
    meta = metadata_record(spec, disorder)
    if ctx.obj["format"] == "json":
        _emit(ctx, json.dumps({"metadata": meta, "hamiltonian": text}, indent=2))
    else:
        _emit(ctx, text)
        _sidecar(ctx, ".meta.json", json.dumps(meta, indent=2))


@main.command()
@click.argument("kind", type=_MODEL_KINDS)
@click.argument("n", type=int)
@click.option("--count", type=int, default=2, show_default=True,
              help="Number of lowest eigenpairs.")
@click.option("--method", type=click.Choice(["dense", "lanczos"]), default=None,
              help="Eigensolver; size-based choice when omitted.")
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="Residual tolerance for each eigenpair.")
@click.option("--pairs", type=click.Path(dir_okay=False), default=None,
              help="Also save eigenvectors to this .npz file.")
@click.pass_context
def oracle(ctx: click.Context, kind: str, n: int, count: int,
           method: str | None, tol: float, pairs: str | None) -> None:
    """Exact lowest eigenpairs of a model instance (JSON energies)."""
    ham, spec, disorder = _instance(kind, n, ctx.obj["seed"])
    eig = exact_lowest(ham, count=count, tol=tol, method=method)
    if pairs is not None:
        save_eigenpairs(pairs, eig)
    payload = {
        "metadata": metadata_record(spec, disorder),
        "energies": [float(e) for e in eig.energies],
        "e0": float(eig.e0),
        "e1": float(eig.e1) if len(eig.energies) > 1 else None,
        "degenerate_ground": eig.degenerate_ground,
    }
    _emit(ctx, json.dumps(payload, indent=2))


@main.command()
@click.argument("kind", type=_MODEL_KINDS)
@click.argument("n", type=int)
@click.option("--shots", type=int, default=None,
              help="Shot count; size-based default (2000 for n<=10, else 3000).")
@click.option("--eta", type=float, default=DEFAULT_ETA, show_default=True,
              help="Excited-state contamination weight.")
@click.option("--bit-order", type=click.Choice(["qubit0_first", "qubit0_last"]),
              default="qubit0_first", show_default=True,
              help="Bitstring key convention in the emitted counts JSON.")
@click.pass_context
def sample(ctx: click.Context, kind: str, n: int, shots: int | None,
           eta: float, bit_order: str) -> None:
    """Finite-shot counts from the contaminated preparation model."""
    ham, _, _ = _instance(kind, n, ctx.obj["seed"])
    eig = exact_lowest(ham, count=2)
    dist = contaminated_distribution(eig.psi0, eig.psi1, eta)
    counts = sample_counts(dist, shots or default_shots(n), seed=ctx.obj["seed"])
    _emit(ctx, counts_to_json(counts, bit_order=bit_order))


def _run_options(fn):
    fn = click.option("--hops", type=click.IntRange(1, 2), default=1,
                      show_default=True, help="Candidate horizon.")(fn)
    fn = click.option("--eps", type=float, default=1e-8, show_default=True,
                      help="Score denominator floor.")(fn)
    fn = click.option("--tau", type=float, default=1e-4, show_default=True,
                      help="Dominant-support probability threshold.")(fn)
    fn = click.option("-T", "T", type=int, default=10, show_default=True,
                      help="Expansion iterations.")(fn)
    fn = click.option("-B", "B", type=int, default=20, show_default=True,
                      help="Basis states added per iteration.")(fn)
    fn = click.option("-K", "K", type=int, default=50, show_default=True,
                      help="Initial subspace size (top-K by count).")(fn)
    fn = click.option("--method", type=_METHOD_NAMES, default="en",
                      show_default=True, help="Expansion policy.")(fn)
    return fn


def _run_and_emit(
    ctx: click.Context,
    ham,
    counts,
    method: str,
    config: RunConfig,
    model_metadata: dict[str, Any] | None,
    compute_exact: bool,
) -> None:
    e0 = e1 = None
    degenerate = None
    if compute_exact:
        eig = exact_lowest(ham, count=2)
        e0, e1, degenerate = float(eig.e0), float(eig.e1), eig.degenerate_ground
    trace = run_method(ham, counts, _method_label(method), config)
    payload = json.loads(trace_to_json(
        trace, config, model_metadata, e0=e0, e1=e1, degenerate_ground=degenerate,
    ))
    payload["err"] = abs(trace.final_energy - e0) if e0 is not None else None
    _emit(ctx, json.dumps(payload, indent=2))


@main.command()
@click.argument("hamiltonian", type=click.Path(exists=True, dir_okay=False))
@click.argument("counts_file", type=click.Path(exists=True, dir_okay=False))
@_run_options
@click.option("--no-exact", is_flag=True,
              help="Skip the exact reference solve (no error column).")
@click.pass_context
def run(ctx: click.Context, hamiltonian: str, counts_file: str, method: str,
        K: int, B: int, T: int, tau: float, eps: float, hops: int,
        no_exact: bool) -> None:
    """One method on a Hamiltonian file plus a counts file (trace JSON)."""
    ham = load_hamiltonian(hamiltonian)
    counts = load_counts(counts_file)
    if counts.n != ham.n:
        raise click.UsageError(
            f"counts are for n={counts.n} but the Hamiltonian has n={ham.n}"
        )
    config = RunConfig(K=K, B=B, T=T, tau=tau, eps=eps,
                       hops=hops, seed=ctx.obj["seed"])
    _run_and_emit(ctx, ham, counts, method, config, None,
                  compute_exact=not no_exact)


@main.command()
@click.argument("counts_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=_MODEL_KINDS, default="heisenberg",
              show_default=True, help="Model family to reconstruct.")
@_run_options
@click.pass_context
def ingest(ctx: click.Context, counts_file: str, kind: str, method: str,
           K: int, B: int, T: int, tau: float, eps: float, hops: int) -> None:
    """Externally sampled counts (e.g. hardware) -> reconstruct model, run.

    The qubit count is read from the counts file; the disorder instance is
    rebuilt from --kind and the global --seed, so the counts must have been
    measured on that same instance.
    """
    counts = load_counts(counts_file)
    ham, spec, disorder = _instance(kind, counts.n, ctx.obj["seed"])
    config = RunConfig(K=K, B=B, T=T, tau=tau, eps=eps,
                       hops=hops, seed=ctx.obj["seed"])
    _run_and_emit(ctx, ham, counts, method, config,
                  metadata_record(spec, disorder), compute_exact=True)


def _sweep_options(default_sizes: str):
    def wrap(fn):
        fn = click.option("--workers", type=int, default=1, show_default=True,
                          help="Concurrent sweep cells.")(fn)
        fn = click.option("--eps", type=float, default=1e-8, show_default=True)(fn)
        fn = click.option("--tau", type=float, default=1e-4, show_default=True)(fn)
        fn = click.option("-T", "T", type=int, default=10, show_default=True)(fn)
        fn = click.option("-B", "B", type=int, default=20, show_default=True)(fn)
        fn = click.option("-K", "K", type=int, default=50, show_default=True)(fn)
        fn = click.option("--eta", type=float, default=DEFAULT_ETA,
                          show_default=True)(fn)
        fn = click.option("--shots", type=int, default=None,
                          help="Override the size-based shot default.")(fn)
        fn = click.option("--include-16", is_flag=True,
                          help="Append n=16 (iterative eigensolver; minutes).")(fn)
        fn = click.option("--seeds", default=",".join(map(str, DEFAULT_SEEDS)),
                          show_default=True,
                          help="Comma-separated disorder seeds.")(fn)
        fn = click.option("--sizes", default=default_sizes, show_default=True,
                          help="Comma-separated system sizes.")(fn)
        fn = click.option("--kind", type=_MODEL_KINDS, default="heisenberg",
                          show_default=True)(fn)
        return fn
    return wrap


def _build_spec(kind: str, sizes: str, seeds: str, include_16: bool,
                shots: int | None, eta: float, K: int, B: int, T: int,
                tau: float, eps: float, workers: int) -> ExperimentSpec:
    size_tuple = _parse_sizes(sizes)
    if include_16 and 16 not in size_tuple:
        size_tuple = size_tuple + (16,)
    return ExperimentSpec(
        kind=kind, sizes=size_tuple, seeds=_parse_sizes(seeds), shots=shots,
        eta=eta, K=K, B=B, T=T, tau=tau, eps=eps, workers=workers,
    )


@main.command()
@_sweep_options("8,10,12")
@click.pass_context
def bench(ctx: click.Context, **kwargs: Any) -> None:
    """Scaling sweep: standard vs random vs EN expansion, shared counts."""
    rows, medians = experiment_scaling(_build_spec(**kwargs))
    _emit_table(ctx, rows, medians, "medians")


@main.command()
@_sweep_options("12")
@click.pass_context
def ablate(ctx: click.Context, **kwargs: Any) -> None:
    """Acquisition-variant sweep: en, coupling_only, denom_only, diag_only."""
    rows, medians = experiment_ablation(_build_spec(**kwargs))
    _emit_table(ctx, rows, medians, "medians")


@main.command()
@_sweep_options("12")
@click.pass_context
def hops(ctx: click.Context, **kwargs: Any) -> None:
    """Paired 1-hop vs 2-hop EN arms with iterations-to-threshold stats."""
    rows, stats = experiment_hops(_build_spec(**kwargs))
    _emit_table(ctx, rows, stats, "stats")


if __name__ == "__main__":
    main(prog_name="assqd")
