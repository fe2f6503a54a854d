"""Dense symmetric eigensolver, spectral robustness measures and numerical rank.

The eigensolver is cyclic Jacobi: rotations sweep every off-diagonal pair
until the off-diagonal norm drops below ``1e-10`` of the Frobenius norm.
Only small dense matrices (a few hundred rows) are expected here.
"""
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from app.core.exceptions import SpectralError
from app.core.graph import Graph

SYMMETRY_TOLERANCE = 1e-12
OFF_DIAGONAL_TOLERANCE = 1e-10
MAX_SWEEPS = 100
TINY_ROTATION = 1e-150


@dataclass(frozen=True)
class SymSpectrum:
    """Eigenvalues of a symmetric matrix, sorted descending."""
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def _off_norm(a: np.ndarray) -> float:
    return math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))


def sym_eigs(m: np.ndarray) -> SymSpectrum:
    """Full spectrum of a dense symmetric matrix by cyclic Jacobi rotations.

    Raises:
        SpectralError: If ``m`` is not square and symmetric within 1e-12.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpectralError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n and np.max(np.abs(a - a.T)) > SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(a)))):
        raise SpectralError("matrix is not symmetric")

    threshold = OFF_DIAGONAL_TOLERANCE * float(np.linalg.norm(a))
    for _ in range(MAX_SWEEPS):
        if _off_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                diff = float(a[q, q] - a[p, p])
                if abs(apq) < abs(diff) * TINY_ROTATION:
                    # tau would overflow; the tangent tends to 1 / (2 tau)
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^T A J acting on rows/columns p and q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = a[q, p] = 0.0

    eigenvalues = np.sort(np.diag(a))[::-1].copy()
    return SymSpectrum(eigenvalues=eigenvalues)


def matrix_rank(m: np.ndarray, tol: float) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A column contributes a pivot when its largest remaining entry exceeds
    ``tol`` in absolute value.
    """
    if not tol > 0:
        raise SpectralError(f"tolerance must be positive, got {tol}")
    a = np.array(m, dtype=float)
    if a.size == 0:
        return 0
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        factors = a[rank + 1:, col] / a[rank, col]
        a[rank + 1:, col:] -= np.outer(factors, a[rank, col:])
        rank += 1
    return rank


def symmetrized_adjacency(g: Graph) -> np.ndarray:
    """Binary adjacency of the active subgraph, symmetrized as max(A, A^T)."""
    a = g.adjacency_matrix(weighted=False)
    return np.maximum(a, a.T)


def spectral_measures(g: Graph) -> Dict[str, float]:
    """Spectral radius, spectral gap, natural connectivity and algebraic connectivity.

    Directed graphs are symmetrized first; weights are ignored.
    """
    a = symmetrized_adjacency(g)
    n = a.shape[0]
    if n == 0:
        return {"SR": 0.0, "SG": 0.0, "NC": 0.0, "AC": 0.0}

    adjacency_spectrum = sym_eigs(a).eigenvalues
    laplacian = np.diag(a.sum(axis=1)) - a
    laplacian_spectrum = sym_eigs(laplacian).eigenvalues

    top = float(adjacency_spectrum[0])
    gap = float(adjacency_spectrum[0] - adjacency_spectrum[1]) if n > 1 else 0.0
    natural = top + math.log(float(np.mean(np.exp(adjacency_spectrum - top))))
    algebraic = float(laplacian_spectrum[-2]) if n > 1 else 0.0
    return {"SR": top, "SG": gap, "NC": natural, "AC": algebraic}
