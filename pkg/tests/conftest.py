"""Shared test helpers."""

from __future__ import annotations

import numpy as np

from assqd.pauli import PauliHamiltonian, PauliTerm


def random_hamiltonian(
    n: int, num_terms: int, rng: np.random.Generator
) -> PauliHamiltonian:
    """Random Pauli Hamiltonian with generic (continuous) coefficients.

    Identity-mask terms are allowed; duplicate masks merge inside the
    constructor.  Continuous coefficients make exact cancellations in
    summed matrix elements a measure-zero event.
    """
    terms = []
    for _ in range(num_terms):
        x_mask = int(rng.integers(0, 1 << n))
        z_mask = int(rng.integers(0, 1 << n))
        coeff = float(rng.normal())
        terms.append(PauliTerm(x_mask, z_mask, coeff))
    return PauliHamiltonian(n, terms)
