"""Reference eigenpairs of the full Hamiltonian, for benchmarking only.

Two routes produce the lowest eigenpairs: a dense Hermitian solve for
n <= 12 (4096-dim, cheap) and implicitly-restarted Lanczos (ARPACK via
scipy) on a matrix-free product for 13 <= n <= 20, where dense storage is
out of reach.  Every returned pair is verified against the residual bound
``norm(H psi - E psi) <= tol`` regardless of route, so a silent
misconvergence cannot leak into benchmark baselines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from assqd.pauli import PauliHamiltonian

ORACLE_DENSE_MAX = 12
ORACLE_MAX_QUBITS = 20

DEGENERACY_GAP = 1e-8

# Iteration cap for the Lanczos route, in ARPACK restart cycles.
LANCZOS_MAXITER = 20_000


class ConvergenceError(RuntimeError):
    """Eigensolve failed the residual bound; carries the worst residual."""

    def __init__(self, message: str, achieved_residual: float):
        super().__init__(f"{message} (achieved residual {achieved_residual:.3e})")
        self.achieved_residual = achieved_residual


@dataclass(frozen=True)
class EigenpairSet:
    """Lowest eigenpairs in ascending order, residual-verified."""

    energies: tuple[float, ...]
    vectors: np.ndarray
    degenerate_ground: bool

    def __post_init__(self) -> None:
        if list(self.energies) != sorted(self.energies):
            raise ValueError("energies must be ascending")
        if self.vectors.shape[1] != len(self.energies):
            raise ValueError("one vector column per energy required")
        norms = np.linalg.norm(self.vectors, axis=0)
        if not np.all(np.abs(norms - 1.0) <= 1e-10):
            raise ValueError("eigenvectors must be normalized")

    @property
    def e0(self) -> float:
        return self.energies[0]

    @property
    def e1(self) -> float:
        return self.energies[1]

    @property
    def psi0(self) -> np.ndarray:
        return self.vectors[:, 0]

    @property
    def psi1(self) -> np.ndarray:
        return self.vectors[:, 1]


def apply_hamiltonian(ham: PauliHamiltonian, v: np.ndarray) -> np.ndarray:
    """H @ v without materializing H: one XOR-gather per Pauli term."""
    v = np.asarray(v)
    dim = 1 << ham.n
    if v.shape != (dim,):
        raise ValueError(f"expected vector of dimension {dim}, got shape {v.shape}")
    xs, zs, ws = ham._term_arrays
    out = np.zeros(dim, dtype=np.result_type(v.dtype, ws.dtype, np.float64))
    idx = np.arange(dim, dtype=np.int64)
    for x, z, w in zip(xs, zs, ws):
        src = idx ^ x
        # Sign of each term amplitude is set by the source state.
        signs = 1.0 - 2.0 * (np.bitwise_count(src & z) & 1)
        out += w * signs * v[src]
    return out


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    pivot = vec[int(np.argmax(np.abs(vec)))]
    scale = abs(pivot)
    if scale == 0.0:
        return vec
    rotated = vec * (np.conj(pivot) / scale)
    return rotated.real if np.allclose(rotated.imag, 0.0, atol=1e-12) else rotated


def _dense_lowest(ham: PauliHamiltonian, count: int) -> tuple[np.ndarray, np.ndarray]:
    dense = ham.dense_matrix()
    vals, vecs = scipy.linalg.eigh(dense, subset_by_index=(0, count - 1))
    return vals, vecs


def _lanczos_lowest(
    ham: PauliHamiltonian, count: int
) -> tuple[np.ndarray, np.ndarray]:
    dim = 1 << ham.n
    dtype = np.float64 if ham.is_real else np.complex128
    op = scipy.sparse.linalg.LinearOperator(
        (dim, dim), matvec=lambda v: apply_hamiltonian(ham, v), dtype=dtype
    )
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(dim)
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(
            op,
            k=count,
            which="SA",
            v0=v0,
            ncv=min(dim, max(2 * count + 1, 40)),
            maxiter=LANCZOS_MAXITER,
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        if len(exc.eigenvalues) == 0:
            raise ConvergenceError(
                f"Lanczos found no eigenpairs within {LANCZOS_MAXITER} restarts",
                float("inf"),
            ) from exc
        worst = max(
            float(np.linalg.norm(apply_hamiltonian(ham, exc.eigenvectors[:, i]) -
                                 exc.eigenvalues[i] * exc.eigenvectors[:, i]))
            for i in range(exc.eigenvectors.shape[1])
        )
        raise ConvergenceError(
            f"Lanczos converged only {len(exc.eigenvalues)}/{count} pairs "
            f"within {LANCZOS_MAXITER} restarts",
            worst,
        ) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def exact_lowest(
    ham: PauliHamiltonian,
    count: int = 2,
    tol: float = 1e-9,
    method: str | None = None,
) -> EigenpairSet:
    """Residual-verified lowest eigenpairs of the full Hamiltonian.

    method selects the route explicitly ("dense" or "lanczos"); by
    default n <= 12 goes dense and larger sizes go matrix-free Lanczos.
    """
    if ham.n > ORACLE_MAX_QUBITS:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_QUBITS}, got {ham.n}")
    if not 2 <= count <= 8:
        raise ValueError(f"count must be in [2, 8], got {count}")
    if count > (1 << ham.n):
        raise ValueError(f"count {count} too large for dimension {1 << ham.n}")
    if method is None:
        method = "dense" if ham.n <= ORACLE_DENSE_MAX else "lanczos"
    if method == "dense":
        if ham.n > ORACLE_DENSE_MAX:
            raise ValueError(f"dense route limited to n <= {ORACLE_DENSE_MAX}")
        vals, vecs = _dense_lowest(ham, count)
    elif method == "lanczos":
        vals, vecs = _lanczos_lowest(ham, count)
    else:
        raise ValueError(f"unknown method {method!r}")

    columns = []
    worst = 0.0
    for i in range(count):
        vec = vecs[:, i] / np.linalg.norm(vecs[:, i])
        residual = float(np.linalg.norm(apply_hamiltonian(ham, vec) - vals[i] * vec))
        worst = max(worst, residual)
        columns.append(fix_phase(vec))
    if worst > tol:
        raise ConvergenceError(
            f"{method} eigensolve exceeded residual tolerance {tol:.1e}", worst
        )
    vectors = np.column_stack(columns)
    energies = tuple(float(v) for v in vals)
    return EigenpairSet(
        energies=energies,
        vectors=vectors,
        degenerate_ground=(energies[1] - energies[0]) < DEGENERACY_GAP,
    )


def save_eigenpairs(path, pairs: EigenpairSet) -> None:
    """Cache eigenpairs to an .npz so sweeps can skip repeated solves."""
    np.savez_compressed(
        path,
        energies=np.array(pairs.energies),
        vectors=pairs.vectors,
        degenerate_ground=np.array(pairs.degenerate_ground),
    )


def load_eigenpairs(path) -> EigenpairSet:
    data = np.load(path)
    return EigenpairSet(
        energies=tuple(float(e) for e in data["energies"]),
        vectors=data["vectors"],
        degenerate_ground=bool(data["degenerate_ground"]),
    )
