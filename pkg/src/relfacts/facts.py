"""Collapse versus unitary probabilities, fact stability and decoherence.

Two formulations of the same question live here. Amplitude chains compare
``sum_i |W(c,b_i) W(b_i,a)|^2`` with ``|sum_i W(c,b_i) W(b_i,a)|^2``. The
projector form compares ``tr(B rho)`` with ``sum_i tr(B A_i rho A_i)`` for a
partition ``{A_i}`` of alternatives and a target fact ``B``. On a pure state
and a rank-one target they coincide (see :func:`chain_from_state`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractViolation, PreconditionError, UsageError
from .linalg import as_matrix, as_vector
from .perspectives import FactRecord, PerspectiveLedger, apply_operator
from .qstate import NORM_TOL, Observable, State, SystemRegistry, basis, embed

DEFAULT_THRESHOLD = 1e-6
NULL_BRANCH = 1e-14
PARTITION_TOL = 1e-10


@dataclass(frozen=True)
class AmplitudeChain:
    """Amplitudes ``W(b_i, a)`` into the alternatives and ``W(c, b_i)`` out of them."""

    w_ba: tuple[complex, ...]
    w_cb: tuple[complex, ...]

    def __init__(self, w_ba: Sequence[complex], w_cb: Sequence[complex]):
        w_ba = tuple(complex(x) for x in w_ba)
        w_cb = tuple(complex(x) for x in w_cb)
        if len(w_ba) != len(w_cb) or not w_ba:
            raise UsageError("chains need equal, non-zero lengths")
        if sum(abs(x) ** 2 for x in w_ba) > 1.0 + 1e-10:
            raise ContractViolation("sum of |W(b_i, a)|^2 exceeds 1")
        object.__setattr__(self, "w_ba", w_ba)
        object.__setattr__(self, "w_cb", w_cb)

    def __len__(self) -> int:
        return len(self.w_ba)

    def paths(self) -> np.ndarray:
        return np.array(self.w_cb) * np.array(self.w_ba)


def p_collapse(chain: AmplitudeChain) -> float:
    return float(np.sum(np.abs(chain.w_cb) ** 2 * np.abs(chain.w_ba) ** 2))


def p_unitary(chain: AmplitudeChain) -> float:
    if len(chain) == 1:
        # a single path has no cross terms
        return p_collapse(chain)
    return float(abs(np.sum(chain.paths())) ** 2)


def interference_deficit(chain: AmplitudeChain) -> float:
    if len(chain) == 1:
        return 0.0
    return abs(p_unitary(chain) - p_collapse(chain))


@dataclass(frozen=True, eq=False)
class FactPartition:
    """Mutually exclusive alternatives ``A_i`` (summing to identity) and a target fact ``B``."""

    projectors: tuple[np.ndarray, ...]
    target_projector: np.ndarray

    def __init__(self, projectors: Sequence, target_projector):
        ps = tuple(as_matrix(p) for p in projectors)
        b = as_matrix(target_projector)
        if not ps:
            raise UsageError("a partition needs at least one projector")
        n = ps[0].shape[0]
        if any(p.shape != (n, n) for p in ps) or b.shape != (n, n):
            raise UsageError("partition and target projectors must share one square shape")
        if np.max(np.abs(sum(ps) - np.eye(n))) > PARTITION_TOL:
            raise ContractViolation("partition projectors do not sum to the identity")
        for i, p in enumerate(ps):
            if np.max(np.abs(p @ p - p)) > PARTITION_TOL or np.max(np.abs(p - p.conj().T)) > PARTITION_TOL:
                raise ContractViolation(f"partition element {i} is not an orthogonal projector")
            for q in ps[i + 1:]:
                if np.max(np.abs(p @ q)) > PARTITION_TOL:
                    raise ContractViolation("partition projectors are not mutually orthogonal")
        object.__setattr__(self, "projectors", ps)
        object.__setattr__(self, "target_projector", b)

    @property
    def dim(self) -> int:
        return self.target_projector.shape[0]

    @classmethod
    def from_observable(cls, registry: SystemRegistry, obs: Observable, target_projector) -> "FactPartition":
        return cls(obs.embedded_projectors(registry), target_projector)


@dataclass(frozen=True)
class StabilityReport:
    p_direct: float
    p_composed: float
    deviation: float
    stable: bool
    threshold: float = DEFAULT_THRESHOLD


def stability_deviation(
    state: State, partition: FactPartition, threshold: float = DEFAULT_THRESHOLD
) -> StabilityReport:
    """Compare ``P(b)`` with ``sum_i P(b|a_i) P(a_i)``; null branches contribute nothing."""
    if partition.dim != state.dim:
        raise UsageError(f"partition acts on dimension {partition.dim}, state has {state.dim}")
    rho = state.density()
    b = partition.target_projector
    p_direct = float(np.trace(b @ rho).real)
    p_composed = 0.0
    for a in partition.projectors:
        if np.trace(a @ rho).real < NULL_BRANCH:
            continue
        p_composed += float(np.trace(b @ a @ rho @ a).real)
    deviation = abs(p_direct - p_composed)
    return StabilityReport(p_direct, p_composed, deviation, deviation <= threshold, threshold)


def interference_witness(state: State, projectors: Sequence[np.ndarray]) -> float:
    """Total Frobenius weight of the coherences ``A_i rho A_j`` (i != j) between alternatives."""
    rho = state.density()
    total = 0.0
    for i, a in enumerate(projectors):
        for j, c in enumerate(projectors):
            if i != j:
                total += float(np.linalg.norm(a @ rho @ c))
    return total


def chain_from_state(state: State, partition: FactPartition, target_vector) -> AmplitudeChain:
    """Amplitude chain of a pure state through the partition into ``|target><target|``.

    ``W(b_i, a) = ||A_i psi||`` and ``W(c, b_i) = <target|A_i psi> / ||A_i psi||``;
    null branches get zero amplitudes.
    """
    if not state.is_pure:
        raise UsageError("amplitude chains need a pure state")
    t = as_vector(target_vector)
    w_ba, w_cb = [], []
    for a in partition.projectors:
        branch = a @ state.vector
        norm = float(np.linalg.norm(branch))
        w_ba.append(norm)
        w_cb.append(np.vdot(t, branch) / norm if norm > 0.0 else 0.0)
    return AmplitudeChain(w_ba, w_cb)


def overlap_vectors(count: int, overlap: float, env_dim: int) -> list[np.ndarray]:
    """``count`` unit vectors in ``env_dim`` dimensions with pairwise overlap ``overlap``.

    The first vector is basis vector 0 (the ready state). Built from the
    Cholesky factor of the Gram matrix ``(1 - eta) I + eta J``.
    """
    if not 0.0 <= overlap <= 1.0:
        raise UsageError(f"overlap {overlap!r} outside [0, 1]")
    if overlap == 1.0:
        return [basis(env_dim, 0) for _ in range(count)]
    if env_dim < count:
        raise UsageError(f"environment of dimension {env_dim} cannot hold {count} distinct records")
    gram = (1.0 - overlap) * np.eye(count) + overlap * np.ones((count, count))
    chol = np.linalg.cholesky(gram)
    out = []
    for row in chol:
        v = np.zeros(env_dim, dtype=np.complex128)
        v[:count] = row
        out.append(as_vector(v / np.linalg.norm(v)))
    return out


def decohere(state: State, target: str, env: str, env_vectors: Sequence, ready_index: int = 0) -> State:
    """Correlate basis vector ``k`` of ``target`` with ``env_vectors[k]``.

    ``|k>|ready> -> |k>|E_k>``; the environment must start in its ready
    basis state. The vectors need not be orthogonal: their overlaps set how
    much coherence survives once the environment is traced out.
    """
    reg = state.registry
    tdim, edim = reg.dim(target), reg.dim(env)
    if target == env:
        raise UsageError("target and environment must differ")
    if len(env_vectors) != tdim:
        raise UsageError(f"need {tdim} environment vectors for {target!r}, got {len(env_vectors)}")
    vecs = [as_vector(v) for v in env_vectors]
    for v in vecs:
        if v.size != edim:
            raise UsageError(f"environment vector has length {v.size}, {env!r} has dimension {edim}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ContractViolation("environment vectors must be normalized")
    ready = basis(edim, ready_index)
    p_ready = embed(np.outer(ready, ready), reg, env)
    weight = np.trace(p_ready @ state.density()).real
    if weight < 1.0 - NORM_TOL:
        raise PreconditionError(f"environment {env!r} is not in its ready state")
    local = np.zeros((tdim * edim, tdim * edim), dtype=np.complex128)
    for k, v in enumerate(vecs):
        local += np.kron(np.outer(basis(tdim, k), basis(tdim, k)), np.outer(v, ready))
    return apply_operator(state, embed(local, reg, [target, env]))


@dataclass(frozen=True, eq=False)
class DecohereStep:
    target: str
    env: str
    env_vectors: tuple
    ready_index: int = 0

    @property
    def systems(self) -> tuple[str, ...]:
        return (self.target, self.env)

    def apply(self, state: State) -> State:
        return decohere(state, self.target, self.env, self.env_vectors, self.ready_index)


@dataclass(frozen=True)
class FactStatus:
    relative: bool
    stable: bool
    deviation: float | None

    @property
    def kind(self) -> str:
        if self.relative:
            return "relative"
        return "stable" if self.stable else "neither"


def classify_fact(
    fact: FactRecord,
    ledgers: Sequence[PerspectiveLedger],
    partition: FactPartition | Mapping[str, FactPartition],
    threshold: float = DEFAULT_THRESHOLD,
) -> dict[str, FactStatus]:
    """How ``fact`` stands for each observer.

    Relative means the fact is in that observer's own log. Stable means the
    composition law holds on that observer's state for the given partition
    (one shared partition, or one per observer). Observers without a
    matching partition are reported as neither.
    """
    out = {}
    for ledger in ledgers:
        part = partition.get(ledger.observer) if isinstance(partition, Mapping) else partition
        relative = fact in ledger.facts
        if part is None or part.dim != ledger.state.dim:
            out[ledger.observer] = FactStatus(relative, False, None)
            continue
        rho = ledger.state.density()
        live = [a for a in part.projectors if np.trace(a @ rho).real >= NULL_BRANCH]
        report = stability_deviation(ledger.state, part, threshold)
        out[ledger.observer] = FactStatus(relative, report.stable and bool(live), report.deviation)
    return out
