"""Run orchestration: subspace seeding, iterative expansion, traces.

Three entry points share one loop.  run_as_sqd seeds the subspace from
the top-K observed bitstrings, then repeats T times: solve the restricted
problem, take the dominant support, generate connected candidates, score
them under the configured acquisition variant, and add the best B.
run_random_sqd is the identical loop with scores replaced by seeded
uniform draws; run_standard_sqd stops after the initial solve (no
expansion).  Every solve appends a trace record, so the energy trajectory
is observable after the fact; the loop ends early, with the reason
recorded, when the candidate pool comes up empty.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from assqd.acquisition import (
    ACQUISITION_KINDS,
    generate_candidates,
    score_candidates,
    score_two_hop,
    select_top_b,
)
from assqd.pauli import PauliHamiltonian
from assqd.sampling import CountsMultiset, top_k
from assqd.subspace import (
    Subspace,
    build_restricted,
    dominant_support,
    extend_restricted,
    lowest_eigenpair,
)

TERMINATION_BUDGET = "budget"
TERMINATION_EMPTY = "empty-candidates"


@dataclass(frozen=True)
class RunConfig:
    """Expansion-loop parameters."""

    K: int = 50
    B: int = 20
    T: int = 10
    tau: float = 1e-4
    eps: float = 1e-8
    kind: str = "en"
    hops: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 1 or self.B < 1 or self.T < 1:
            raise ValueError("K, B, and T must all be >= 1")
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"tau must be in [0, 1), got {self.tau}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.kind not in ACQUISITION_KINDS:
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.hops not in (1, 2):
            raise ValueError(f"hops must be 1 or 2, got {self.hops}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class IterationRecord:
    """One solve: index 0 is the initial subspace, then one per expansion."""

    iteration: int
    energy: float
    subspace_size: int
    pool_size: int
    wall_ms: float


@dataclass(frozen=True)
class RunTrace:
    """Full history of one run."""

    method: str
    records: tuple[IterationRecord, ...]
    final_energy: float
    final_subspace: Subspace
    termination: str

    def __post_init__(self) -> None:
        energies = [r.energy for r in self.records]
        for earlier, later in zip(energies, energies[1:]):
            if later > earlier + 1e-12:
                raise ValueError("trace energies must be non-increasing")

    @property
    def iterations(self) -> int:
        """Expansion iterations performed (excludes the initial solve)."""
        return self.records[-1].iteration


class RunError(RuntimeError):
    """A solver failure mid-run; carries the records completed so far."""

    def __init__(self, message: str, records: tuple[IterationRecord, ...]):
        super().__init__(message)
        self.records = records


def run_standard_sqd(
    ham: PauliHamiltonian, counts: CountsMultiset, K: int
) -> RunTrace:
    """Solve once on the top-K observed states; no expansion."""
    start = time.perf_counter()
    sub = Subspace.from_states(top_k(counts, K))
    sol = lowest_eigenpair(build_restricted(ham, sub))
    wall_ms = (time.perf_counter() - start) * 1e3
    record = IterationRecord(
        iteration=0,
        energy=sol.energy,
        subspace_size=len(sub),
        pool_size=0,
        wall_ms=wall_ms,
    )
    return RunTrace(
        method="standard",
        records=(record,),
        final_energy=sol.energy,
        final_subspace=sub,
        termination=TERMINATION_BUDGET,
    )


def run_as_sqd(
    ham: PauliHamiltonian, counts: CountsMultiset, config: RunConfig
) -> RunTrace:
    """Iterative expansion under the configured acquisition variant."""
    method = "random" if config.kind == "random" else f"as-{config.kind}"
    return _expansion_loop(ham, counts, config, method)


def run_random_sqd(
    ham: PauliHamiltonian, counts: CountsMultiset, config: RunConfig
) -> RunTrace:
    """The same loop with candidate scores drawn uniformly at random."""
    return _expansion_loop(
        ham, counts, dataclasses.replace(config, kind="random"), "random"
    )


def _expansion_loop(
    ham: PauliHamiltonian, counts: CountsMultiset, config: RunConfig, method: str
) -> RunTrace:
    start = time.perf_counter()
    sub = Subspace.from_states(top_k(counts, config.K))
    matrix = build_restricted(ham, sub)
    try:
        sol = lowest_eigenpair(matrix)
    except Exception as exc:
        raise RunError(f"initial solve failed: {exc}", ()) from exc
    records = [
        IterationRecord(
            iteration=0,
            energy=sol.energy,
            subspace_size=len(sub),
            pool_size=0,
            wall_ms=(time.perf_counter() - start) * 1e3,
        )
    ]
    # Child seeds for the random variant come from one master stream, so
    # each iteration draws fresh but the whole run is pinned by config.seed.
    rng_master = np.random.default_rng(config.seed)
    termination = TERMINATION_BUDGET
    for it in range(1, config.T + 1):
        start = time.perf_counter()
        try:
            dominant = dominant_support(sol, config.tau)
            if config.kind == "en" and config.hops == 2:
                scored = score_two_hop(ham, sol, dominant, sub, eps=config.eps)
            else:
                cands = generate_candidates(ham, dominant, sub, hops=config.hops)
                rng_seed = (
                    int(rng_master.integers(0, 2**63))
                    if config.kind == "random"
                    else None
                )
                scored = score_candidates(
                    config.kind, ham, sol, dominant, cands,
                    eps=config.eps, rng_seed=rng_seed,
                )
            pool_size = len(scored)
            if pool_size == 0:
                records.append(
                    IterationRecord(
                        iteration=it,
                        energy=sol.energy,
                        subspace_size=len(sub),
                        pool_size=0,
                        wall_ms=(time.perf_counter() - start) * 1e3,
                    )
                )
                termination = TERMINATION_EMPTY
                break
            added = [
                s for s in select_top_b(scored, config.B) if s not in sub.index
            ]
            matrix = extend_restricted(ham, matrix, added)
            sub = matrix.basis
            sol = lowest_eigenpair(matrix)
        except RunError:
            raise
        except Exception as exc:
            raise RunError(
                f"iteration {it} failed: {exc}", tuple(records)
            ) from exc
        records.append(
            IterationRecord(
                iteration=it,
                energy=sol.energy,
                subspace_size=len(sub),
                pool_size=pool_size,
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    return RunTrace(
        method=method,
        records=tuple(records),
        final_energy=sol.energy,
        final_subspace=sub,
        termination=termination,
    )


def trace_to_json(
    trace: RunTrace,
    config: RunConfig | None = None,
    model_metadata: dict[str, Any] | None = None,
    e0: float | None = None,
    e1: float | None = None,
    degenerate_ground: bool | None = None,
) -> str:
    """Serialize a run for artifacts: config, records, references."""
    payload: dict[str, Any] = {
        "method": trace.method,
        "config": dataclasses.asdict(config) if config is not None else None,
        "model": model_metadata,
        "records": [dataclasses.asdict(r) for r in trace.records],
        "final_energy": trace.final_energy,
        "final_subspace": list(trace.final_subspace.states),
        "termination": trace.termination,
        "reference": {
            "e0": e0,
            "e1": e1,
            "degenerate_ground": degenerate_ground,
        },
    }
    return json.dumps(payload, indent=2)
