"""Labelled tensor-product layouts, states and single-subsystem observables.

Subsystem ordering is always the registry's declaration order: the first
declared subsystem is the most significant factor of every Kronecker product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, SizingError, UsageError
from .linalg import (
    HERMITIAN_TOL,
    MAX_ENTRIES,
    SpectralDecomposition,
    as_matrix,
    as_vector,
    is_hermitian,
    kron_all,
    partial_trace,
    spectral_decompose,
)

NORM_TOL = 1e-10
PSD_TOL = 1e-8

SPIN_UP = "↑"
SPIN_DOWN = "↓"


@dataclass(frozen=True)
class SystemRegistry:
    systems: tuple[tuple[str, int], ...]

    def __init__(self, systems: Iterable[tuple[str, int]]):
        systems = tuple((str(label), int(dim)) for label, dim in systems)
        labels = [label for label, _ in systems]
        if any(not label for label in labels):
            raise UsageError("subsystem labels must be non-empty")
        if len(set(labels)) != len(labels):
            raise UsageError(f"duplicate subsystem labels in {labels}")
        if any(dim < 1 for _, dim in systems):
            raise UsageError("subsystem dimensions must be positive")
        if math.prod(dim for _, dim in systems) > MAX_ENTRIES:
            raise SizingError("total dimension exceeds 2**20")
        object.__setattr__(self, "systems", systems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.systems)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __len__(self) -> int:
        return len(self.systems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"unknown subsystem {label!r}; registry has {list(self.labels)}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def subset(self, labels: Iterable[str]) -> "SystemRegistry":
        wanted = set(labels)
        for label in wanted:
            self.index(label)
        return SystemRegistry((l, d) for l, d in self.systems if l in wanted)

    def without(self, label: str) -> "SystemRegistry":
        return SystemRegistry((l, d) for l, d in self.systems if l != label)

    def basis_label(self, index: int) -> str:
        digits = np.unravel_index(index, self.dims) if self.systems else ()
        return ",".join(f"{l}={int(k)}" for l, k in zip(self.labels, digits))


def basis(dim: int, k: int) -> np.ndarray:
    if not 0 <= k < dim:
        raise UsageError(f"basis index {k} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[k] = 1.0
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class State:
    """A pure ket or a density matrix over a registry.

    Build through :meth:`pure` / :meth:`mixed` (or the module functions),
    which enforce normalization, Hermiticity and positivity.
    """

    registry: SystemRegistry
    vector: np.ndarray | None = field(default=None, compare=False)
    rho: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def pure(cls, registry: SystemRegistry, vector, normalize: bool = False) -> "State":
        v = as_vector(vector)
        if v.size != registry.total_dim:
            raise UsageError(f"ket has length {v.size}, registry needs {registry.total_dim}")
        norm = np.linalg.norm(v)
        if normalize:
            if norm == 0.0:
                raise ContractViolation("state has zero norm")
            v = as_vector(v / norm)
        elif abs(norm - 1.0) > NORM_TOL:
            raise ContractViolation(f"ket norm {norm!r} differs from 1")
        return cls(registry, vector=v)

    @classmethod
    def mixed(cls, registry: SystemRegistry, rho) -> "State":
        m = as_matrix(rho)
        n = registry.total_dim
        if m.shape != (n, n):
            raise UsageError(f"density matrix has shape {m.shape}, registry needs {n}x{n}")
        if not is_hermitian(m):
            raise ContractViolation("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > NORM_TOL:
            raise ContractViolation(f"density matrix trace {np.trace(m).real!r} differs from 1")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ContractViolation("density matrix is not positive semidefinite")
        return cls(registry, rho=m)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return self.registry.total_dim

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        out = np.outer(self.vector, self.vector.conj())
        out.flags.writeable = False
        return out

    def purity(self) -> float:
        if self.is_pure:
            return 1.0
        return float(np.real(np.trace(self.rho @ self.rho)))

    def reduced(self, labels: Iterable[str]) -> "State":
        """Partial trace onto ``labels``; the result keeps registry order."""
        sub = self.registry.subset(labels)
        keep = [self.registry.index(l) for l in sub.labels]
        rho = partial_trace(self.density(), self.registry.dims, keep)
        return State.mixed(sub, 0.5 * (rho + rho.conj().T))


def product_state(registry: SystemRegistry, components: Sequence) -> State:
    if len(components) != len(registry):
        raise UsageError(f"{len(components)} components for {len(registry)} subsystems")
    vecs = []
    for (label, dim), comp in zip(registry.systems, components):
        v = as_vector(comp)
        if v.size != dim:
            raise UsageError(f"component for {label!r} has length {v.size}, expected {dim}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ContractViolation(f"component for {label!r} is not normalized")
        vecs.append(v.reshape(-1, 1))
    return State.pure(registry, kron_all(vecs).reshape(-1), normalize=True)


def embed(op, registry: SystemRegistry, target: str | Sequence[str]) -> np.ndarray:
    """Lift ``op`` acting on ``target`` (one label or an ordered label list) to the full space.

    Identity acts on every other subsystem. For several targets, ``op`` is
    laid out in the order the targets are listed, which need not match the
    registry order.
    """
    targets = [target] if isinstance(target, str) else list(target)
    if len(set(targets)) != len(targets):
        raise UsageError(f"repeated target in {targets}")
    idx = [registry.index(t) for t in targets]
    op = as_matrix(op)
    tdims = [registry.dims[i] for i in idx]
    side = math.prod(tdims)
    if op.shape != (side, side):
        raise UsageError(f"operator has shape {op.shape}, targets {targets} need side {side}")
    if idx == list(range(idx[0], idx[0] + len(idx))):
        before = math.prod(registry.dims[: idx[0]])
        after = math.prod(registry.dims[idx[-1] + 1:])
        return kron_all([np.eye(before), op, np.eye(after)])
    rest = [i for i in range(len(registry)) if i not in idx]
    rdims = [registry.dims[i] for i in rest]
    full = kron_all([op, np.eye(math.prod(rdims))])
    order = idx + rest  # axis k of the product layout is subsystem order[k]
    n = len(order)
    t = full.reshape(tdims + rdims + tdims + rdims)
    perm = [order.index(i) for i in range(n)]
    t = t.transpose(perm + [n + p for p in perm])
    out = np.ascontiguousarray(t).reshape(registry.total_dim, registry.total_dim)
    out.flags.writeable = False
    return out


def to_density(state: State) -> State:
    if not state.is_pure:
        return state
    return State(state.registry, rho=state.density())


@dataclass(frozen=True)
class Observable:
    """A Hermitian operator on one subsystem with labelled eigenvalue groups.

    ``labels[k]`` names the outcome for ``decomposition.eigenvalues[k]``
    (ascending eigenvalue order).
    """

    name: str
    target: str
    matrix: np.ndarray = field(compare=False)
    decomposition: SpectralDecomposition = field(compare=False)
    labels: tuple[str, ...]

    @classmethod
    def from_matrix(
        cls,
        name: str,
        target: str,
        matrix,
        labels: Sequence[str] | Mapping[float, str] | None = None,
    ) -> "Observable":
        m = as_matrix(matrix)
        if not is_hermitian(m, HERMITIAN_TOL):
            raise ContractViolation(f"observable {name!r} is not Hermitian")
        dec = spectral_decompose(m)
        if labels is None:
            resolved = tuple(f"{lam:.12g}" for lam in dec.eigenvalues)
        elif isinstance(labels, Mapping):
            resolved = []
            for lam in dec.eigenvalues:
                hits = [lab for val, lab in labels.items() if abs(val - lam) <= 1e-8]
                if len(hits) != 1:
                    raise ContractViolation(f"no unique outcome label for eigenvalue {lam!r} of {name!r}")
                resolved.append(str(hits[0]))
            resolved = tuple(resolved)
        else:
            resolved = tuple(str(lab) for lab in labels)
            if len(resolved) != len(dec):
                raise ContractViolation(
                    f"observable {name!r} has {len(dec)} eigenvalue groups but {len(resolved)} labels"
                )
        if len(set(resolved)) != len(resolved):
            raise ContractViolation(f"observable {name!r} has repeated outcome labels")
        return cls(name, target, m, dec, resolved)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def groups(self) -> list[tuple[float, np.ndarray, str]]:
        return [(lam, p, lab) for (lam, p), lab in zip(self.decomposition.groups, self.labels)]

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"observable {self.name!r} has no outcome {label!r}") from None

    def check_compatible(self, registry: SystemRegistry) -> None:
        if self.target not in registry:
            raise UsageError(f"observable {self.name!r} targets {self.target!r}, not in {list(registry.labels)}")
        if registry.dim(self.target) != self.dim:
            raise UsageError(
                f"observable {self.name!r} has dimension {self.dim}, "
                f"subsystem {self.target!r} has {registry.dim(self.target)}"
            )

    def embedded_projectors(self, registry: SystemRegistry) -> list[np.ndarray]:
        self.check_compatible(registry)
        return [embed(p, registry, self.target) for p in self.decomposition.projectors]

    def commutes_with(self, other: "Observable", tol: float = 1e-10) -> bool:
        if other.target != self.target:
            return True
        comm = self.matrix @ other.matrix - other.matrix @ self.matrix
        return bool(np.max(np.abs(comm)) <= tol)


def spin_z(target: str, name: str = "Sz") -> Observable:
    """S_z = diag(+1/2, -1/2) in units with hbar = 1; basis 0 is spin up."""
    return Observable.from_matrix(name, target, np.diag([0.5, -0.5]), {0.5: SPIN_UP, -0.5: SPIN_DOWN})


def pointer(target: str, dim: int, name: str = "pointer") -> Observable:
    """Reading of an apparatus in its basis: eigenvalue k and label ``Φk`` for basis vector k."""
    return Observable.from_matrix(
        name, target, np.diag(np.arange(dim, dtype=float)), [f"Φ{k}" for k in range(dim)]
    )


def expectation(state: State, obs: Observable) -> float:
    obs.check_compatible(state.registry)
    op = embed(obs.matrix, state.registry, obs.target)
    if state.is_pure:
        val = np.vdot(state.vector, op @ state.vector)
    else:
        val = np.trace(state.rho @ op)
    if abs(val.imag) > 1e-10:
        raise ContractViolation(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)
