"""Dense complex linear algebra used by every other module.

Matrices and vectors are plain ``numpy`` arrays of ``complex128``. Helpers here
validate shapes and finiteness, build Kronecker products, decompose Hermitian
operators into eigenprojectors (cyclic Jacobi) and take partial traces.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, SizingError, UsageError

MAX_ENTRIES = 2**20
HERMITIAN_TOL = 1e-10
MERGE_TOL = 1e-8


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a read-only 2-D complex array, rejecting NaN/Inf."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or 0 in m.shape:
        raise UsageError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ContractViolation("matrix has non-finite entries")
    m.flags.writeable = False
    return m


def as_vector(v) -> np.ndarray:
    m = np.array(v, dtype=np.complex128).reshape(-1)
    if m.size == 0:
        raise UsageError("expected a non-empty vector")
    if not np.all(np.isfinite(m)):
        raise ContractViolation("vector has non-finite entries")
    m.flags.writeable = False
    return m


def _check_size(rows: int, cols: int, max_entries: int) -> None:
    if rows * cols > max_entries:
        raise SizingError(f"{rows}x{cols} operator exceeds {max_entries} entries")


def kron(a, b, max_entries: int = MAX_ENTRIES) -> np.ndarray:
    """Kronecker product, ``out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_size(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], max_entries)
    out = np.kron(a, b)
    out.flags.writeable = False
    return out


def kron_all(mats: Iterable, max_entries: int = MAX_ENTRIES) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = kron(out, m, max_entries)
    return out


def dagger(a) -> np.ndarray:
    out = as_matrix(a).conj().T.copy()
    out.flags.writeable = False
    return out


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(
        np.max(np.abs(a - a.conj().T), initial=0.0) <= tol
    )


def jacobi_eigh(h, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    Cyclic complex Jacobi: each pivot (p, q) is first rotated to a real
    off-diagonal entry by a phase, then annihilated by a real Givens rotation.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||h||_F``.
    """
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalue groups of a Hermitian operator, ascending by eigenvalue."""

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]
    tolerance: float = MERGE_TOL

    @property
    def groups(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.eigenvalues, self.projectors))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in self.groups)


def spectral_decompose(h, tol: float = MERGE_TOL) -> SpectralDecomposition:
    h = as_matrix(h)
    if not is_hermitian(h):
        raise ContractViolation("spectral_decompose requires a Hermitian matrix")
    w, v = jacobi_eigh(h)
    groups: list[list[int]] = []
    for i, lam in enumerate(w):
        if groups and lam - w[groups[-1][0]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    values, projectors = [], []
    for g in groups:
        vecs = v[:, g]
        proj = vecs @ vecs.conj().T
        proj = 0.5 * (proj + proj.conj().T)
        proj.flags.writeable = False
        values.append(float(np.mean(w[g])))
        projectors.append(proj)
    return SpectralDecomposition(tuple(values), tuple(projectors), tol)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``rho`` on the subsystems listed in ``keep`` (kept in index order)."""
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise UsageError(f"subsystem index {k} out of range for {n} subsystems")
    total = math.prod(dims)
    if rho.shape != (total, total):
        raise UsageError(f"rho has shape {rho.shape}, expected side {total} for dims {dims}")
    if not is_hermitian(rho) or abs(np.trace(rho) - 1.0) > 1e-10:
        warnings.warn("partial_trace input is not a normalized Hermitian matrix", stacklevel=2)
    drop = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # contract each dropped row axis with its column partner
    row_axes = list(range(n))
    col_axes = list(range(n, 2 * n))
    for k in drop:
        col_axes[k] = row_axes[k]
    out_axes = [row_axes[k] for k in keep] + [col_axes[k] for k in keep]
    side = math.prod(dims[k] for k in keep)
    out = np.einsum(t, row_axes + col_axes, out_axes).reshape(side, side)
    out.flags.writeable = False
    return out
