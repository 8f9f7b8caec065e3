import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relfacts import oracles
from relfacts.errors import ContractViolation, PreconditionError, UsageError
from relfacts.facts import (
    AmplitudeChain,
    DecohereStep,
    FactPartition,
    chain_from_state,
    classify_fact,
    decohere,
    interference_deficit,
    interference_witness,
    overlap_vectors,
    p_collapse,
    p_unitary,
    stability_deviation,
)
from relfacts.perspectives import PerspectiveLedger, PremeasureStep, measure, pointer_observable, unitary_view
from relfacts.qstate import State, SystemRegistry, basis, embed, product_state, spin_z

from conftest import R, random_density, random_ket, seeds

SZ = spin_z("s")
LAB = SystemRegistry([("s", 2), ("O", 3)])
ETAS = (1.0, 0.5, 0.1, 0.0)


def amplitudes(n):
    c = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
    return st.lists(c, min_size=n, max_size=n)


def test_chain_validates():
    with pytest.raises(UsageError):
        AmplitudeChain([1], [1, 0])
    with pytest.raises(UsageError):
        AmplitudeChain([], [])
    with pytest.raises(ContractViolation):
        AmplitudeChain([1, 1], [1, 1])
    AmplitudeChain([0.6, 0.7], [1, 1])  # subnormalized is fine


def test_chain_examples():
    half = AmplitudeChain([R, R], [R, R])
    assert p_collapse(half) == pytest.approx(0.5, abs=1e-15)
    assert p_unitary(half) == pytest.approx(1.0, abs=1e-15)
    assert p_collapse(AmplitudeChain([1], [1])) == 1.0
    null = AmplitudeChain([1, 0], [0.3, 0.9])
    assert p_collapse(null) == pytest.approx(p_collapse(AmplitudeChain([1], [0.3])))
    mz = AmplitudeChain([R, R], [R, -R])
    assert abs(p_unitary(mz)) <= 1e-12
    assert interference_deficit(mz) == pytest.approx(0.5, abs=1e-12)


@given(amplitudes(1), amplitudes(1))
def test_single_path_chains_have_no_deficit(a, c):
    chain = AmplitudeChain(a, c)
    assert p_unitary(chain) == p_collapse(chain)
    assert interference_deficit(chain) == 0.0


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(amplitudes(n), amplitudes(n))))
def test_deficit_is_cross_term_sum(pair):
    w_ba, w_cb = pair
    norm = np.sqrt(sum(abs(x) ** 2 for x in w_ba))
    if norm > 1:
        w_ba = [x / norm for x in w_ba]
    chain = AmplitudeChain(w_ba, w_cb)
    ref = oracles.chain(chain.w_ba, chain.w_cb)
    assert abs(interference_deficit(chain) - abs(ref["cross_terms"])) <= 1e-12
    assert abs(p_unitary(chain) - ref["p_unitary"]) <= 1e-12
    assert abs(p_collapse(chain) - ref["p_collapse"]) <= 1e-12


def test_partition_validation():
    with pytest.raises(ContractViolation):
        FactPartition([np.diag([1, 0])], np.eye(2))
    with pytest.raises(ContractViolation):
        # sums to identity but neither piece is a projector
        FactPartition([np.array([[1, 0.5], [0, 0]]), np.array([[0, -0.5], [0, 1]])], np.eye(2))
    with pytest.raises(ContractViolation):
        FactPartition([np.eye(2), np.diag([1, 0]), np.diag([-1, 0])], np.eye(2))
    with pytest.raises(UsageError):
        FactPartition([np.eye(2)], np.eye(3))
    with pytest.raises(UsageError):
        FactPartition([], np.eye(2))


def wigner_state(a=R, b=R):
    v = np.zeros(6, dtype=complex)
    v[1], v[5] = a, b
    return State.pure(LAB, v)


def symmetric_target():
    t = np.zeros(6)
    t[1] = t[5] = R
    return np.outer(t, t), t


def test_stability_diagonal_state_is_stable():
    reg = SystemRegistry([("q", 3)])
    st_ = State.mixed(reg, np.diag([0.2, 0.3, 0.5]))
    part = FactPartition([np.diag([1, 1, 0]), np.diag([0, 0, 1])], np.diag([0, 1, 1]))
    rep = stability_deviation(st_, part)
    assert rep.deviation == 0.0 and rep.stable


def test_stability_wigner_symmetric():
    b, _ = symmetric_target()
    part = FactPartition.from_observable(LAB, pointer_observable("O", 3, SZ, 0), b)
    rep = stability_deviation(wigner_state(), part)
    assert rep.p_direct == pytest.approx(1.0, abs=1e-12)
    assert rep.p_composed == pytest.approx(0.5, abs=1e-12)
    assert rep.deviation == pytest.approx(0.5, abs=1e-12)
    assert not rep.stable
    assert rep.deviation == abs(rep.p_direct - rep.p_composed)


def test_stability_golden_wigner_value():
    b, _ = symmetric_target()
    part = FactPartition.from_observable(LAB, pointer_observable("O", 3, SZ, 0), b)
    rep = stability_deviation(wigner_state(0.6, 0.8), part)
    ref = oracles.stability(wigner_state(0.6, 0.8).density().tolist(), [p.tolist() for p in part.projectors], b.tolist())
    assert abs(rep.deviation - 0.48) <= 1e-10
    assert abs(rep.deviation - ref["deviation"]) <= 1e-10


@given(seeds, st.integers(2, 6), st.data())
def test_stability_commuting_is_zero(seed, n, data):
    rng = np.random.default_rng(seed)
    reg = SystemRegistry([("q", n)])
    cut = data.draw(st.integers(1, n - 1))
    a0 = np.diag([1.0] * cut + [0.0] * (n - cut))
    target = np.diag(rng.integers(0, 2, size=n).astype(float))
    pops = rng.random(n)
    st_ = State.mixed(reg, np.diag(pops / pops.sum()))
    rep = stability_deviation(st_, FactPartition([a0, np.eye(n) - a0], target))
    assert rep.deviation <= 1e-12


def test_stability_null_branch_skipped():
    reg = SystemRegistry([("q", 2)])
    st_ = State.pure(reg, [1, 0])
    rep = stability_deviation(st_, FactPartition([np.diag([1, 0]), np.diag([0, 1])], np.diag([1, 0])))
    assert rep.p_composed == 1.0 and rep.stable


def test_stability_dimension_mismatch():
    with pytest.raises(UsageError):
        stability_deviation(wigner_state(), FactPartition([np.eye(2)], np.eye(2)))


def test_witness():
    ps = pointer_observable("O", 3, SZ, 0).embedded_projectors(LAB)
    assert interference_witness(wigner_state(0.6, 0.8), ps) == pytest.approx(2 * 0.48)
    reg = SystemRegistry([("q", 2)])
    assert interference_witness(State.mixed(reg, np.eye(2) / 2), [np.diag([1, 0]), np.diag([0, 1])]) == 0.0


@given(seeds, st.integers(2, 4))
def test_bridge_projector_and_chain_forms(seed, n):
    rng = np.random.default_rng(seed)
    reg = SystemRegistry([("q", n)])
    psi = State.pure(reg, random_ket(rng, n))
    target = random_ket(rng, n)
    projectors = [np.outer(basis(n, k), basis(n, k)) for k in range(n)]
    part = FactPartition(projectors, np.outer(target, target.conj()))
    rep = stability_deviation(psi, part)
    chain = chain_from_state(psi, part, target)
    assert abs(rep.deviation - interference_deficit(chain)) <= 1e-10
    assert abs(rep.p_direct - p_unitary(chain)) <= 1e-10
    assert abs(rep.p_composed - p_collapse(chain)) <= 1e-10


def test_bridge_on_wigner_state():
    b, t = symmetric_target()
    part = FactPartition.from_observable(LAB, pointer_observable("O", 3, SZ, 0), b)
    chain = chain_from_state(wigner_state(0.6, 0.8), part, t)
    assert abs(stability_deviation(wigner_state(0.6, 0.8), part).deviation - interference_deficit(chain)) <= 1e-10
    with pytest.raises(UsageError):
        chain_from_state(State.mixed(LAB, np.eye(6) / 6), part, t)


def test_overlap_vectors():
    vs = overlap_vectors(3, 0.25, 4)
    gram = np.array([[np.vdot(a, b) for b in vs] for a in vs])
    np.testing.assert_allclose(gram, 0.75 * np.eye(3) + 0.25, atol=1e-12)
    np.testing.assert_allclose(vs[0], basis(4, 0), atol=1e-15)
    assert all(np.array_equal(v, basis(2, 0)) for v in overlap_vectors(3, 1.0, 2))
    with pytest.raises(UsageError):
        overlap_vectors(3, 0.5, 2)
    with pytest.raises(UsageError):
        overlap_vectors(2, 1.5, 2)


def lab_with_env(a=0.6, b=0.8, edim=3):
    reg = SystemRegistry([("s", 2), ("O", 3), ("E", edim)])
    v = product_state(reg, [[a, b], basis(3, 0), basis(edim, 0)])
    led = unitary_view(PerspectiveLedger("W", v), [PremeasureStep("s", "O", SZ)])
    return led.state


def traced_lab(eta, a=0.6, b=0.8):
    st_ = decohere(lab_with_env(a, b), "O", "E", overlap_vectors(3, eta, 3))
    assert abs(np.linalg.norm(st_.vector) - 1) <= 1e-10
    return st_.reduced(["s", "O"])


def test_decohere_orthogonal_env_gives_diagonal_rho():
    rho = traced_lab(0.0).rho
    want = np.zeros((6, 6))
    want[1, 1], want[5, 5] = 0.36, 0.64
    np.testing.assert_allclose(rho, want, atol=1e-12)


def test_decohere_identical_env_changes_nothing():
    plain = wigner_state(0.6, 0.8).density()
    np.testing.assert_allclose(traced_lab(1.0).rho, plain, atol=1e-12)


@pytest.mark.parametrize("eta", ETAS)
def test_decohere_coherence_scales_with_overlap(eta):
    rho = traced_lab(eta).rho
    # pointer branch 1 and 2 record env vectors E_1, E_2 with <E_2|E_1> = eta
    assert rho[1, 5] == pytest.approx(0.6 * 0.8 * eta, abs=1e-12)


def test_decohere_monotone_stabilization():
    b, _ = symmetric_target()
    part = FactPartition.from_observable(LAB, pointer_observable("O", 3, SZ, 0), b)
    devs = [stability_deviation(traced_lab(eta), part).deviation for eta in ETAS]
    np.testing.assert_allclose(devs, [0.48, 0.24, 0.048, 0.0], atol=1e-12)
    assert all(x >= y for x, y in zip(devs, devs[1:]))
    assert devs[-1] <= 1e-10


def test_decohere_errors():
    st_ = lab_with_env()
    with pytest.raises(UsageError):
        decohere(st_, "O", "E", overlap_vectors(2, 0.0, 3))
    with pytest.raises(UsageError):
        decohere(st_, "O", "O", overlap_vectors(3, 0.0, 3))
    with pytest.raises(ContractViolation):
        decohere(st_, "O", "E", [np.ones(3)] * 3)
    once = decohere(st_, "O", "E", overlap_vectors(3, 0.0, 3))
    with pytest.raises(PreconditionError):
        decohere(once, "O", "E", overlap_vectors(3, 0.0, 3))
    step = DecohereStep("O", "E", tuple(overlap_vectors(3, 0.0, 3)))
    assert step.systems == ("O", "E")


def test_classify_fact():
    friend = PerspectiveLedger("O", State.pure(SystemRegistry([("s", 2)]), [0.6, 0.8]), rng_seed=0)
    friend, fact = measure(friend, SZ, rng=0)
    wig = PerspectiveLedger("W", wigner_state(R, R))
    b, _ = symmetric_target()
    own = FactPartition(SZ.embedded_projectors(friend.registry), SZ.embedded_projectors(friend.registry)[1])
    lab_part = FactPartition.from_observable(LAB, pointer_observable("O", 3, SZ, 0), b)
    out = classify_fact(fact, [friend, wig], {"O": own, "W": lab_part})
    assert out["O"].relative and out["O"].stable and out["O"].deviation == 0.0
    assert out["W"].kind == "neither" and out["W"].deviation == pytest.approx(0.5)
    decohered = PerspectiveLedger("W", traced_lab(0.0))
    out = classify_fact(fact, [decohered], lab_part)
    assert out["W"].kind == "stable" and out["W"].deviation <= 1e-10
    out = classify_fact(fact, [friend], lab_part)
    assert out["O"].kind == "relative" and out["O"].deviation is None
