"""Pauli-string Hamiltonians acting on computational basis states.

Basis states are plain integers: bit i of the value is the measurement
outcome of qubit i, so qubit 0 sits in the least-significant bit.  A Pauli
string is stored symplectically as a pair of bitmasks: ``x_mask`` marks
qubits acted on by X or Y, ``z_mask`` marks qubits acted on by Z or Y
(Y = both bits set, identity = neither).  With this encoding a term maps
each basis state to exactly one basis state via XOR, and the phase is a
popcount:

    P |b> = i^{#Y} * (-1)^{popcount(z_mask & b)} |b XOR x_mask>

using the convention Y|0> = i|1>, Y|1> = -i|0>, with the Z-type signs read
from the *input* state.  Nothing here ever materializes the 2^n x 2^n
matrix except :meth:`PauliHamiltonian.dense_matrix`, a small-n test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

BasisState = int

MAX_QUBITS = 63
DENSE_MAX_QUBITS = 12

# Merged terms with |coefficient| below this are dropped at construction.
COEFF_CUTOFF = 1e-15

_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_CHAR_TO_MASKS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string, symplectically encoded."""

    x_mask: int
    z_mask: int
    coefficient: float

    def __post_init__(self) -> None:
        if self.x_mask < 0 or self.z_mask < 0:
            raise ValueError("Pauli masks must be nonnegative")
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")

    @classmethod
    def from_word(cls, coefficient: float, word: str) -> PauliTerm:
        """Build a term from a Pauli word; character i addresses qubit i."""
        x_mask = 0
        z_mask = 0
        for i, ch in enumerate(word):
            try:
                x_bit, z_bit = _CHAR_TO_MASKS[ch]
            except KeyError:
                raise ValueError(
                    f"invalid Pauli character {ch!r} in word {word!r}"
                ) from None
            x_mask |= x_bit << i
            z_mask |= z_bit << i
        return cls(x_mask, z_mask, float(coefficient))

    def to_word(self, n: int) -> str:
        chars = []
        for i in range(n):
            x_bit = (self.x_mask >> i) & 1
            z_bit = (self.z_mask >> i) & 1
            chars.append("IXZY"[x_bit + 2 * z_bit])
        return "".join(chars)

    @property
    def y_count(self) -> int:
        return (self.x_mask & self.z_mask).bit_count()

    @property
    def weight(self) -> complex:
        """State-independent part of the amplitude: coefficient * i^{#Y}."""
        return self.coefficient * _I_POWERS[self.y_count & 3]

    def apply(self, state: BasisState) -> tuple[BasisState, complex]:
        """Map |state> to (target, amplitude) under this term."""
        sign = -1.0 if (self.z_mask & state).bit_count() & 1 else 1.0
        return state ^ self.x_mask, sign * self.weight


def apply_term(term: PauliTerm, state: BasisState) -> tuple[BasisState, complex]:
    """Functional alias for :meth:`PauliTerm.apply`."""
    return term.apply(state)


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted sum of Pauli strings over n qubits.

    Terms are canonicalized at construction: duplicates (same mask pair)
    are merged by summing coefficients, and merged terms with negligible
    coefficient are dropped.  Instances are immutable; the cached lookup
    structures make every operation safe for concurrent use.
    """

    n: int
    terms: tuple[PauliTerm, ...]

    def __init__(self, n: int, terms: Iterable[PauliTerm]):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
        limit = 1 << n
        merged: dict[tuple[int, int], float] = {}
        for term in terms:
            if term.x_mask >= limit or term.z_mask >= limit:
                raise ValueError(
                    f"term masks ({term.x_mask:#x}, {term.z_mask:#x}) exceed {n} qubits"
                )
            key = (term.x_mask, term.z_mask)
            merged[key] = merged.get(key, 0.0) + term.coefficient
        canon = tuple(
            PauliTerm(x, z, c) for (x, z), c in merged.items() if abs(c) >= COEFF_CUTOFF
        )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", canon)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @cached_property
    def _groups(self) -> dict[int, tuple[tuple[int, complex], ...]]:
        """Terms grouped by x_mask as (z_mask, weight) pairs."""
        groups: dict[int, list[tuple[int, complex]]] = {}
        for term in self.terms:
            groups.setdefault(term.x_mask, []).append((term.z_mask, term.weight))
        return {x: tuple(entries) for x, entries in groups.items()}

    @cached_property
    def offdiag_masks(self) -> tuple[int, ...]:
        """Distinct nonzero x_masks, ascending: the connectivity of H."""
        return tuple(sorted(x for x in self._groups if x))

    @cached_property
    def is_real(self) -> bool:
        """True when every term has an even Y count (all elements real)."""
        return all(term.y_count % 2 == 0 for term in self.terms)

    def _group_amplitude(self, x_mask: int, state: BasisState) -> complex:
        """Sum of term amplitudes with this x_mask acting on |state>."""
        total = 0.0 + 0.0j
        for z_mask, weight in self._groups.get(x_mask, ()):
            if (z_mask & state).bit_count() & 1:
                total -= weight
            else:
                total += weight
        return total

    def matrix_element(self, k: BasisState, j: BasisState) -> complex:
        """<k|H|j>, summing only terms whose x_mask equals k XOR j."""
        return self._group_amplitude(k ^ j, j)

    def diagonal(self, k: BasisState) -> float:
        """<k|H|k>; only x_mask = 0 terms contribute, so it is real."""
        total = 0.0
        for z_mask, weight in self._groups.get(0, ()):
            # x_mask = 0 implies no Y, so the weight is the real coefficient.
            if (z_mask & k).bit_count() & 1:
                total -= weight.real
            else:
                total += weight.real
        return total

    def neighbors(self, s: BasisState) -> set[BasisState]:
        """Basis states reachable from |s> by some off-diagonal term.

        Connectivity is per term: any nonzero x_mask contributes s XOR
        x_mask (each single-term amplitude has unit-modulus phase, so it
        never vanishes).  Contributions from distinct terms sharing an
        x_mask may still cancel in the summed matrix element.
        """
        return {s ^ x for x in self.offdiag_masks}

    def dense_matrix(self) -> np.ndarray:
        """Full 2^n x 2^n matrix; test oracle only, refuses n > 12."""
        if self.n > DENSE_MAX_QUBITS:
            raise ValueError(
                f"dense matrix limited to n <= {DENSE_MAX_QUBITS}, got n = {self.n}"
            )
        dim = 1 << self.n
        dtype = np.float64 if self.is_real else np.complex128
        out = np.zeros((dim, dim), dtype=dtype)
        idx = np.arange(dim, dtype=np.int64)
        for term in self.terms:
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & term.z_mask) & 1)
            weight = term.weight.real if self.is_real else term.weight
            # Within one term, (row, col) pairs are all distinct.
            out[idx ^ term.x_mask, idx] += weight * signs
        return out

    @cached_property
    def _term_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x_masks, z_masks, weights) as numpy arrays for vectorized use."""
        xs = np.array([t.x_mask for t in self.terms], dtype=np.int64)
        zs = np.array([t.z_mask for t in self.terms], dtype=np.int64)
        dtype = np.float64 if self.is_real else np.complex128
        ws = np.array(
            [t.weight.real if self.is_real else t.weight for t in self.terms],
            dtype=dtype,
        )
        return xs, zs, ws


def matrix_element(ham: PauliHamiltonian, k: BasisState, j: BasisState) -> complex:
    return ham.matrix_element(k, j)


def diagonal_element(ham: PauliHamiltonian, k: BasisState) -> float:
    return ham.diagonal(k)


def neighbors(ham: PauliHamiltonian, s: BasisState) -> set[BasisState]:
    return ham.neighbors(s)


def dense_matrix(ham: PauliHamiltonian) -> np.ndarray:
    return ham.dense_matrix()


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Parse the one-term-per-line text format: ``<coefficient> <word>``.

    Words are strings over {I, X, Y, Z} with character i addressing qubit
    i; all words must share one length.  Blank lines and lines starting
    with ``#`` are skipped.
    """
    terms: list[PauliTerm] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<coefficient> <word>', got {raw!r}")
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        word = parts[1]
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise ValueError(
                f"line {lineno}: word length {len(word)} differs from earlier {n}"
            )
        terms.append(PauliTerm.from_word(coeff, word))
    if n is None:
        raise ValueError("no Pauli terms found")
    return PauliHamiltonian(n, terms)


def format_hamiltonian(ham: PauliHamiltonian) -> str:
    """Emit the text format read back by :func:`parse_hamiltonian`."""
    lines = [f"{term.coefficient!r} {term.to_word(ham.n)}" for term in ham.terms]
    return "\n".join(lines) + "\n"


def load_hamiltonian(path) -> PauliHamiltonian:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def save_hamiltonian(ham: PauliHamiltonian, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_hamiltonian(ham))
