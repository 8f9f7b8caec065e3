"""Observer-relative states and facts.

Each observer owns a :class:`PerspectiveLedger`: the state it assigns to
everything it describes (never itself) and the ordered log of facts that
happened relative to it. Interactions it takes part in collapse its state;
interactions it only describes from outside evolve its state unitarily.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateMeasurementError,
    PreconditionError,
    SizingError,
    UsageError,
)
from .linalg import as_matrix
from .qstate import NORM_TOL, Observable, State, SystemRegistry, basis, embed
from .rng import SplitMix64

NULL_PROBABILITY = 1e-12


@dataclass(frozen=True)
class FactRecord:
    observer: str
    system: str
    observable: str
    outcome: str
    eigenvalue: float
    probability: float
    step: int

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1.0 + 1e-12:
            raise ContractViolation(f"fact probability {self.probability!r} outside [0, 1]")
        object.__setattr__(self, "probability", min(max(float(self.probability), 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class PerspectiveLedger:
    observer: str
    state: State
    facts: tuple[FactRecord, ...] = ()
    rng_seed: int = 0
    rng_state: int | None = None

    def __post_init__(self):
        if self.observer in self.state.registry:
            raise ContractViolation(f"observer {self.observer!r} cannot appear in its own state")
        if self.rng_state is None:
            object.__setattr__(self, "rng_state", self.rng_seed)
        steps = [f.step for f in self.facts]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ContractViolation("fact steps must be strictly increasing")

    @property
    def registry(self) -> SystemRegistry:
        return self.state.registry

    def facts_about(self, systems) -> list[FactRecord]:
        systems = set(systems)
        return [f for f in self.facts if f.system in systems]

    def last_fact(self) -> FactRecord | None:
        return self.facts[-1] if self.facts else None


def _check_normalized(state: State) -> State:
    if state.is_pure:
        n = np.linalg.norm(state.vector)
    else:
        n = np.trace(state.rho).real
    if abs(n - 1.0) > NORM_TOL:
        raise ContractViolation(f"operation broke normalization (got {n!r})")
    return state


def apply_operator(state: State, op) -> State:
    """``U psi`` for kets, ``U rho U^dagger`` for density matrices."""
    op = as_matrix(op)
    if state.is_pure:
        return _check_normalized(State(state.registry, vector=op @ state.vector))
    rho = op @ state.rho @ op.conj().T
    return _check_normalized(State(state.registry, rho=0.5 * (rho + rho.conj().T)))


def pointer_indices(obs: Observable, apparatus_dim: int, ready_index: int) -> list[int]:
    """Apparatus basis index recording each eigenvalue group of ``obs`` (ascending group order).

    Groups are handed pointer positions from the largest eigenvalue down,
    skipping the ready position: for S_z the +1/2 branch lands on position 1
    and the -1/2 branch on position 2 when the ready position is 0.
    """
    n = len(obs.decomposition)
    if apparatus_dim < n + 1:
        raise SizingError(f"apparatus of dimension {apparatus_dim} cannot record {n} outcomes plus ready")
    if not 0 <= ready_index < apparatus_dim:
        raise UsageError(f"ready index {ready_index} out of range for dimension {apparatus_dim}")
    free = [k for k in range(apparatus_dim) if k != ready_index]
    out = [0] * n
    for slot, group in enumerate(reversed(range(n))):
        out[group] = free[slot]
    return out


def pointer_observable(
    apparatus: str, apparatus_dim: int, source: Observable, ready_index: int, name: str | None = None
) -> Observable:
    """Pointer-basis reading whose labels are the outcomes the apparatus recorded."""
    idx = pointer_indices(source, apparatus_dim, ready_index)
    labels = [f"Φ{k}" for k in range(apparatus_dim)]
    for k, lab in zip(idx, source.labels):
        labels[k] = lab
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"pointer labels for {apparatus!r} collide: {labels}")
    return Observable.from_matrix(
        name or f"record[{apparatus}]", apparatus, np.diag(np.arange(apparatus_dim, dtype=float)), labels
    )


def premeasure(state: State, system: str, apparatus: str, obs: Observable, ready_index: int = 0) -> State:
    """von Neumann pre-measurement ``sum_i (P_i (x) |pointer_i><ready|) psi``."""
    reg = state.registry
    obs.check_compatible(reg)
    if obs.target != system:
        raise UsageError(f"observable {obs.name!r} acts on {obs.target!r}, not {system!r}")
    if apparatus == system:
        raise UsageError("system and apparatus must differ")
    adim = reg.dim(apparatus)
    idx = pointer_indices(obs, adim, ready_index)
    ready = basis(adim, ready_index)
    p_ready = embed(np.outer(ready, ready), reg, apparatus)
    if state.is_pure:
        weight = np.linalg.norm(p_ready @ state.vector) ** 2
    else:
        weight = np.trace(p_ready @ state.rho).real
    if weight < 1.0 - 1e-10:
        raise PreconditionError(f"apparatus {apparatus!r} is not in its ready state {ready_index}")
    op = np.zeros((reg.total_dim, reg.total_dim), dtype=np.complex128)
    for proj, k in zip(obs.decomposition.projectors, idx):
        shift = np.outer(basis(adim, k), ready)
        op += embed(np.kron(proj, shift), reg, [system, apparatus])
    return apply_operator(state, op)


def _probabilities(state: State, projectors: Sequence[np.ndarray]) -> np.ndarray:
    if state.is_pure:
        return np.array([np.linalg.norm(p @ state.vector) ** 2 for p in projectors])
    return np.array([np.trace(p @ state.rho).real for p in projectors])


def _project(state: State, proj: np.ndarray, prob: float) -> State:
    if state.is_pure:
        v = proj @ state.vector
        return State.pure(state.registry, v / np.linalg.norm(v))
    rho = proj @ state.rho @ proj / prob
    return State(state.registry, rho=0.5 * (rho + rho.conj().T))


def _sample(probs: np.ndarray, u: float) -> int:
    """Inverse CDF over groups in ascending-eigenvalue order."""
    cum = np.cumsum(probs) / probs.sum()
    for i, c in enumerate(cum):
        if u < c and probs[i] > 0.0:
            return i
    return int(np.flatnonzero(probs > 0.0)[-1])


def _next_step(ledger: PerspectiveLedger, step: int | None) -> int:
    last = ledger.facts[-1].step if ledger.facts else -1
    if step is None:
        return last + 1
    if step <= last:
        raise ContractViolation(f"step {step} does not follow {last}")
    return step


def _collapse(ledger, obs, index, probs, projectors, rng_state, step):
    lam, _, label = obs.groups[index]
    post = _project(ledger.state, projectors[index], probs[index])
    fact = FactRecord(
        observer=ledger.observer,
        system=obs.target,
        observable=obs.name,
        outcome=label,
        eigenvalue=lam,
        probability=float(probs[index]),
        step=_next_step(ledger, step),
    )
    new = replace(ledger, state=post, facts=ledger.facts + (fact,), rng_state=rng_state)
    return new, fact


def measure(
    ledger: PerspectiveLedger,
    obs: Observable,
    rng: SplitMix64 | int | None = None,
    step: int | None = None,
) -> tuple[PerspectiveLedger, FactRecord]:
    """Projective measurement relative to ``ledger.observer``.

    Without ``rng`` the ledger's own stream is used and advanced. An explicit
    generator or integer seed is used for this draw only.
    """
    projectors = obs.embedded_projectors(ledger.registry)
    probs = np.clip(_probabilities(ledger.state, projectors), 0.0, None)
    if np.all(probs < NULL_PROBABILITY):
        raise DegenerateMeasurementError(f"every outcome of {obs.name!r} has vanishing probability")
    if rng is None:
        u, gen = SplitMix64(ledger.rng_state).uniform()
        rng_state = gen.state
    else:
        gen = rng if isinstance(rng, SplitMix64) else SplitMix64(rng)
        u, _ = gen.uniform()
        rng_state = ledger.rng_state
    i = _sample(probs, u)
    return _collapse(ledger, obs, i, probs, projectors, rng_state, step)


@dataclass(frozen=True)
class PremeasureStep:
    system: str
    apparatus: str
    observable: Observable
    ready_index: int = 0

    @property
    def systems(self) -> tuple[str, ...]:
        return (self.system, self.apparatus)

    def apply(self, state: State) -> State:
        return premeasure(state, self.system, self.apparatus, self.observable, self.ready_index)


def unitary_view(ledger: PerspectiveLedger, steps: Sequence) -> PerspectiveLedger:
    """Evolve the ledger's state through ``steps`` without collapse or new facts.

    A step is a full-space unitary matrix or any descriptor with ``systems``
    and ``apply(state)`` (:class:`PremeasureStep`, ``facts.DecohereStep``).
    """
    state = ledger.state
    reg = state.registry
    for step in steps:
        if hasattr(step, "apply"):
            involved = step.systems
            for label in involved:
                reg.index(label)
            evolve = step.apply
        else:
            u = as_matrix(step)
            if u.shape != (reg.total_dim, reg.total_dim):
                raise UsageError(f"unitary has shape {u.shape}, state needs side {reg.total_dim}")
            if np.max(np.abs(u.conj().T @ u - np.eye(reg.total_dim))) > 1e-10:
                raise ContractViolation("step matrix is not unitary")
            involved = reg.labels
            evolve = lambda st, u=u: apply_operator(st, u)
        touched = ledger.facts_about(involved)
        if touched:
            raise PreconditionError(
                f"observer {ledger.observer!r} already holds facts about {sorted({f.system for f in touched})}"
            )
        state = evolve(state)
    return replace(ledger, state=state)


@dataclass(frozen=True)
class CrossCheckResult:
    status: str  # "agree", "disagree" or "information-destroyed"
    friend_outcome: str
    pointer_outcome: str
    pointer_probability: float
    system_outcome: str | None = None

    @property
    def agreement(self) -> bool | None:
        if self.status == "information-destroyed":
            return None
        return self.status == "agree"


def cross_check(
    wigner: PerspectiveLedger,
    friend_fact: FactRecord,
    pointer_obs: Observable,
    system_obs: Observable | None = None,
    rng: SplitMix64 | int | None = None,
    destroyed: bool = False,
    step: int | None = None,
) -> tuple[PerspectiveLedger, CrossCheckResult]:
    """The outside observer reads the friend's pointer, then (optionally) the system.

    The pointer reading is the friend's record: the outside observer's state
    is conditioned on the pointer group carrying ``friend_fact.outcome``,
    with that group's probability in the outside observer's own account.
    If that probability vanishes the pointer is sampled instead. The system
    reading, when ``system_obs`` is given, is sampled from the conditioned
    state, so agreement tests whether the outside account really correlates
    pointer and system.
    """
    pointer_obs.check_compatible(wigner.registry)
    if friend_fact.outcome not in pointer_obs.labels:
        raise ConfigurationError(
            f"pointer observable {pointer_obs.name!r} has no outcome {friend_fact.outcome!r}"
        )
    projectors = pointer_obs.embedded_projectors(wigner.registry)
    probs = np.clip(_probabilities(wigner.state, projectors), 0.0, None)
    i = pointer_obs.label_index(friend_fact.outcome)
    if probs[i] >= NULL_PROBABILITY:
        ledger, pfact = _collapse(wigner, pointer_obs, i, probs, projectors, wigner.rng_state, step)
    else:
        ledger, pfact = measure(wigner, pointer_obs, step=step)
    agree = pfact.outcome == friend_fact.outcome
    sys_out = None
    if system_obs is not None and system_obs.target in ledger.registry:
        ledger, sfact = measure(ledger, system_obs)
        sys_out = sfact.outcome
        agree = agree and sys_out == friend_fact.outcome
    status = "information-destroyed" if destroyed else ("agree" if agree else "disagree")
    return ledger, CrossCheckResult(status, friend_fact.outcome, pfact.outcome, pfact.probability, sys_out)


def correlation_probability(state: State, pointer_obs: Observable, system_obs: Observable) -> float:
    """Exact probability that pointer and system readings carry the same label."""
    reg = state.registry
    ps = dict(zip(pointer_obs.labels, pointer_obs.embedded_projectors(reg)))
    qs = dict(zip(system_obs.labels, system_obs.embedded_projectors(reg)))
    rho = state.density()
    total = 0.0
    for label in set(ps) & set(qs):
        total += np.trace(ps[label] @ qs[label] @ rho).real
    return float(total)


def information_destroyed(
    friend: PerspectiveLedger, fact: FactRecord, observables: Mapping[str, Observable]
) -> bool:
    """True when the friend later measured an observable incompatible with ``fact``'s on the same system."""
    later = [f for f in friend.facts if f.step > fact.step and f.system == fact.system]
    first = observables[fact.observable]
    return any(not first.commutes_with(observables[f.observable]) for f in later)
