"""Finite-shot counts: contaminated sampling, wire format, top-K seeding.

The preparation model mixes the ground state with the first excited state:
p(b) = (1 - eta) |<b|psi_0>|^2 + eta |<b|psi_1>|^2.  Counts also arrive
from outside (hardware exports) via a small JSON format; both paths land
in the same CountsMultiset, and the initial subspace is always the top-K
states by count.

Wire format: {"n": int, "bit_order": "qubit0_first" | "qubit0_last",
"counts": {bitstring: positive int}}.  With qubit0_first (the default)
character 0 of a key is qubit 0, so "10" means qubit 0 = 1, value 1; with
qubit0_last the key is plain binary notation, so "10" has value 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Any

import numpy as np

from assqd.pauli import BasisState

BIT_ORDERS = ("qubit0_first", "qubit0_last")

NORMALIZATION_ATOL = 1e-10


@dataclass(frozen=True)
class ProbabilityModel:
    """Normalized outcome distribution over all 2^n basis states."""

    probs: np.ndarray
    eta: float

    def __post_init__(self) -> None:
        dim = int(self.probs.shape[0])
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"distribution length {dim} is not a power of two")
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be nonnegative")
        total = float(self.probs.sum())
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")

    @property
    def n(self) -> int:
        return int(self.probs.shape[0]).bit_length() - 1


@dataclass(frozen=True)
class CountsMultiset:
    """Observed measurement outcomes: state value -> positive count."""

    counts: dict[BasisState, int]
    n: int
    total_shots: int

    def __post_init__(self) -> None:
        limit = 1 << self.n
        for state, count in self.counts.items():
            if not 0 <= state < limit:
                raise ValueError(f"state {state} out of range for n = {self.n}")
            if count <= 0:
                raise ValueError(f"count for state {state} must be positive")
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts do not sum to total_shots")


def contaminated_distribution(
    psi0: np.ndarray, psi1: np.ndarray, eta: float
) -> ProbabilityModel:
    """Mix the Born distributions of two states with weight eta on psi1."""
    psi0 = np.asarray(psi0)
    psi1 = np.asarray(psi1)
    if psi0.shape != psi1.shape:
        raise ValueError("state vectors must share one dimension")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    probs = (1.0 - eta) * np.abs(psi0) ** 2 + eta * np.abs(psi1) ** 2
    # Renormalize away float rounding; inputs are unit vectors.
    return ProbabilityModel(probs / probs.sum(), eta)


def sample_counts(model: ProbabilityModel, shots: int, seed: int) -> CountsMultiset:
    """Draw shots outcomes by inverse CDF over the nonzero support."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    support = np.flatnonzero(model.probs)
    cdf = np.cumsum(model.probs[support])
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    tallies = np.bincount(draws, minlength=support.shape[0])
    counts = {
        int(state): int(c) for state, c in zip(support, tallies) if c > 0
    }
    return CountsMultiset(counts=counts, n=model.n, total_shots=shots)


def _key_to_state(key: str, n: int, bit_order: str) -> BasisState:
    if len(key) != n:
        raise ValueError(f"key {key!r} has length {len(key)}, expected {n}")
    if any(ch not in "01" for ch in key):
        raise ValueError(f"key {key!r} contains non-binary characters")
    if bit_order == "qubit0_first":
        return int(key[::-1], 2)
    return int(key, 2)


def _state_to_key(state: BasisState, n: int, bit_order: str) -> str:
    word = format(state, f"0{n}b")
    return word[::-1] if bit_order == "qubit0_first" else word


def parse_counts(obj: dict[str, Any]) -> CountsMultiset:
    """Build a CountsMultiset from a decoded counts JSON object."""
    try:
        n = int(obj["n"])
    except KeyError:
        raise ValueError("counts object missing field 'n'") from None
    bit_order = obj.get("bit_order", "qubit0_first")
    if bit_order not in BIT_ORDERS:
        raise ValueError(f"unknown bit_order {bit_order!r}")
    raw = obj.get("counts")
    if not isinstance(raw, dict) or not raw:
        raise ValueError("counts object must contain a nonempty 'counts' map")
    counts: dict[BasisState, int] = {}
    for key, value in raw.items():
        state = _key_to_state(key, n, bit_order)
        if not isinstance(value, int) or value <= 0:
            raise ValueError(f"count for key {key!r} must be a positive integer")
        counts[state] = counts.get(state, 0) + value
    return CountsMultiset(counts=counts, n=n, total_shots=sum(counts.values()))


def load_counts(source: str | IO[str]) -> CountsMultiset:
    """Read the counts wire format from a path or open text stream."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    else:
        obj = json.load(source)
    return parse_counts(obj)


def counts_to_json(counts: CountsMultiset, bit_order: str = "qubit0_first") -> str:
    if bit_order not in BIT_ORDERS:
        raise ValueError(f"unknown bit_order {bit_order!r}")
    keyed = {
        _state_to_key(state, counts.n, bit_order): counts.counts[state]
        for state in sorted(counts.counts)
    }
    return json.dumps(
        {"n": counts.n, "bit_order": bit_order, "counts": keyed}, indent=2
    )


def save_counts(
    counts: CountsMultiset, path: str, bit_order: str = "qubit0_first"
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(counts_to_json(counts, bit_order))
        fh.write("\n")


def top_k(counts: CountsMultiset, K: int) -> list[BasisState]:
    """The K most frequent states, ties broken by ascending state value."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    ranked = sorted(counts.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [state for state, _ in ranked[:K]]


def empirical_distribution(counts: CountsMultiset) -> np.ndarray:
    """Observed frequencies as a dense length-2^n vector."""
    probs = np.zeros(1 << counts.n)
    for state, count in counts.counts.items():
        probs[state] = count / counts.total_shots
    return probs
