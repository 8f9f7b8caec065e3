"""Run a parsed scenario against the perspectives engine.

Physical interactions (``premeasure``, ``decohere``) are appended to a shared
event log. An observer who takes part in an interaction records it through
``measure`` (collapse, a new fact); an outside observer folds pending events
into its own state through ``unitary-view`` (no collapse, no facts).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import RelfactsError
from ..facts import (
    DEFAULT_THRESHOLD,
    DecohereStep,
    FactPartition,
    StabilityReport,
    interference_witness,
    overlap_vectors,
    stability_deviation,
)
from ..perspectives import (
    CrossCheckResult,
    PerspectiveLedger,
    PremeasureStep,
    correlation_probability,
    cross_check,
    information_destroyed,
    measure,
    pointer_observable,
    unitary_view,
)
from ..qstate import Observable, SystemRegistry, basis, embed, pointer, product_state, spin_z
from ..rng import derive_seeds
from .syntax import (
    ApparatusDecl,
    CrossCheck,
    Decohere,
    EnvironmentDecl,
    Measure,
    ObservableDecl,
    Premeasure,
    ProjectorDecl,
    ScenarioAst,
    StabilityCheck,
    StateDecl,
    SystemDecl,
    UnitaryView,
)


class ScenarioRuntimeError(RelfactsError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class StabilityEntry:
    observer: str
    partition: str
    target: str
    report: StabilityReport
    witness: float
    facts_held: int
    line: int


@dataclass(frozen=True)
class CrossCheckEntry:
    observer: str
    friend: str
    apparatus: str
    result: CrossCheckResult
    correlation: float | None
    line: int


@dataclass(frozen=True)
class StepRecord:
    kind: str
    line: int
    ledgers: dict[str, PerspectiveLedger]


@dataclass
class ScenarioResult:
    name: str | None
    seed: int
    initial: dict[str, PerspectiveLedger]
    ledgers: dict[str, PerspectiveLedger]
    history: list[StepRecord] = field(default_factory=list)
    stability: list[StabilityEntry] = field(default_factory=list)
    cross_checks: list[CrossCheckEntry] = field(default_factory=list)
    scales: dict[str, float] = field(default_factory=dict)
    observables: dict[str, Observable] = field(default_factory=dict)

    def facts(self, observer: str):
        return self.ledgers[observer].facts


def build_observable(decl: ObservableDecl, dim: int) -> Observable:
    if decl.kind == "spin-z":
        return spin_z(decl.target, decl.name)
    if decl.kind == "pointer":
        return pointer(decl.target, dim, decl.name)
    return Observable.from_matrix(decl.name, decl.target, np.array(decl.matrix, dtype=np.complex128))


def initial_ledgers(ast: ScenarioAst, seed: int) -> dict[str, PerspectiveLedger]:
    registry = SystemRegistry(ast.subsystems())
    components = {}
    for d in ast.declarations:
        if isinstance(d, (SystemDecl, EnvironmentDecl)):
            components[d.label] = basis(d.dim, 0)
        elif isinstance(d, ApparatusDecl):
            components[d.label] = basis(d.dim, d.ready)
    for d in ast.declarations:
        if isinstance(d, StateDecl):
            components[d.label] = np.array(d.normalized, dtype=np.complex128)
    observers = ast.observers()
    ledgers = {}
    for who, s in zip(observers, derive_seeds(seed, len(observers))):
        reg = registry.without(who)
        state = product_state(reg, [components[label] for label in reg.labels])
        ledgers[who] = PerspectiveLedger(who, state, rng_seed=s)
    return ledgers


class _Run:
    def __init__(self, ast: ScenarioAst, seed: int, threshold: float):
        self.ast = ast
        self.threshold = threshold
        self.dims = dict(ast.subsystems())
        self.apparatus = {d.label: d for d in ast.declarations if isinstance(d, ApparatusDecl)}
        self.observables = {
            d.name: build_observable(d, self.dims[d.target])
            for d in ast.declarations
            if isinstance(d, ObservableDecl)
        }
        self.projectors = {d.name: d for d in ast.declarations if isinstance(d, ProjectorDecl)}
        self.ledgers = initial_ledgers(ast, seed)
        self.result = ScenarioResult(
            ast.name, seed, dict(self.ledgers), self.ledgers,
            scales={d.label: d.scale for d in ast.declarations if isinstance(d, StateDecl)},
            observables=self.observables,
        )
        self.events: list = []
        self.premeasures: list[PremeasureStep] = []
        self.cursor = {who: 0 for who in self.ledgers}

    def resolve(self, name: str, system: str) -> Observable:
        """Declared observable, or a builtin named inline for ``system``."""
        if name in self.observables:
            return self.observables[name]
        key = f"{name}[{system}]"
        if key not in self.observables:
            kind = "spin-z" if name == "spin-z" else "pointer"
            self.observables[key] = build_observable(ObservableDecl(key, system, kind), self.dims[system])
        return self.observables[key]

    def next_step(self) -> int:
        steps = [f.step for led in self.ledgers.values() for f in led.facts]
        return max(steps, default=-1) + 1

    def run(self) -> ScenarioResult:
        for node in self.ast.steps:
            try:
                getattr(self, "do_" + type(node).__name__)(node)
            except ScenarioRuntimeError:
                raise
            except RelfactsError as exc:
                raise ScenarioRuntimeError(node.line, str(exc)) from exc
            self.result.history.append(StepRecord(type(node).__name__, node.line, dict(self.ledgers)))
        self.result.ledgers = dict(self.ledgers)
        return self.result

    def do_Premeasure(self, node: Premeasure):
        app = self.apparatus[node.apparatus]
        step = PremeasureStep(node.system, node.apparatus, self.resolve(node.observable, node.system), app.ready)
        self.events.append(step)
        self.premeasures.append(step)

    def do_Decohere(self, node: Decohere):
        vectors = overlap_vectors(self.dims[node.target], node.overlap, self.dims[node.env])
        self.events.append(DecohereStep(node.target, node.env, tuple(vectors)))

    def do_Measure(self, node: Measure):
        led = self.ledgers[node.observer]
        led, _ = measure(led, self.resolve(node.observable, node.system), rng=node.seed, step=self.next_step())
        self.ledgers[node.observer] = led

    def do_UnitaryView(self, node: UnitaryView):
        pending = self.events[self.cursor[node.observer]:]
        self.ledgers[node.observer] = unitary_view(self.ledgers[node.observer], pending)
        self.cursor[node.observer] = len(self.events)

    def do_StabilityCheck(self, node: StabilityCheck):
        led = self.ledgers[node.observer]
        proj = self.projectors[node.target]
        obs = self.observables[node.partition]
        # the observer never touches the rest, so it is traced out
        involved = {obs.target, *proj.targets}
        state = led.state.reduced(involved) if involved != set(led.registry.labels) else led.state
        v = np.array(proj.normalized, dtype=np.complex128)
        b = embed(np.outer(v, v.conj()), state.registry, list(proj.targets))
        part = FactPartition.from_observable(state.registry, obs, b)
        report = stability_deviation(state, part, self.threshold)
        witness = interference_witness(state, part.projectors)
        self.result.stability.append(
            StabilityEntry(node.observer, node.partition, node.target, report, witness, len(led.facts), node.line)
        )

    def do_CrossCheck(self, node: CrossCheck):
        friend = self.ledgers[node.friend]
        if not friend.facts:
            raise ScenarioRuntimeError(node.line, f"observer {node.friend!r} holds no fact to check")
        # the friend's latest fact that some pre-measurement recorded on an apparatus
        found = None
        for fact in reversed(friend.facts):
            matches = [
                p for p in self.premeasures
                if p.system == fact.system and p.observable.name == fact.observable
            ]
            if matches:
                found = fact, matches[-1]
                break
        if found is None:
            raise ScenarioRuntimeError(
                node.line, f"no pre-measurement recorded any fact held by {node.friend!r}"
            )
        fact, pm = found
        ptr = pointer_observable(pm.apparatus, self.dims[pm.apparatus], pm.observable, pm.ready_index)
        self.observables.setdefault(ptr.name, ptr)
        destroyed = information_destroyed(friend, fact, self.observables)
        led = self.ledgers[node.observer]
        sys_obs = self.observables[fact.observable]
        corr = (
            correlation_probability(led.state, ptr, sys_obs)
            if sys_obs.target in led.registry else None
        )
        led, res = cross_check(led, fact, ptr, sys_obs, destroyed=destroyed, step=self.next_step())
        self.ledgers[node.observer] = led
        self.result.cross_checks.append(CrossCheckEntry(node.observer, node.friend, pm.apparatus, res, corr, node.line))


def interpret(ast: ScenarioAst, seed_override: int | None = None, threshold: float = DEFAULT_THRESHOLD) -> ScenarioResult:
    """Execute ``ast`` step by step; deterministic for a fixed seed."""
    seed = seed_override if seed_override is not None else (ast.seed if ast.seed is not None else 0)
    try:
        run = _Run(ast, seed, threshold)
    except RelfactsError as exc:
        raise ScenarioRuntimeError(0, str(exc)) from exc
    return run.run()
