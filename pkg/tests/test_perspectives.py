import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relfacts.errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateMeasurementError,
    PreconditionError,
    SizingError,
    UsageError,
)
from relfacts.facts import interference_witness
from relfacts.perspectives import (
    FactRecord,
    PerspectiveLedger,
    PremeasureStep,
    correlation_probability,
    cross_check,
    information_destroyed,
    measure,
    pointer_indices,
    pointer_observable,
    premeasure,
    unitary_view,
)
from relfacts.qstate import Observable, State, SystemRegistry, basis, pointer, product_state, spin_z
from relfacts.rng import SplitMix64, derive_seeds

from conftest import R, seeds

SEED_UP = 0  # first draw 0.883 lands in the up branch of (0.6, 0.8)
SEED_DOWN = 1
SZ = spin_z("s")
SX = Observable.from_matrix("Sx", "s", [[0, 0.5], [0.5, 0]])


def lab(a=0.6, b=0.8):
    reg = SystemRegistry([("s", 2), ("O", 3)])
    return product_state(reg, [[a, b], basis(3, 0)])


def spin(a=0.6, b=0.8):
    return State.pure(SystemRegistry([("s", 2)]), [a, b])


def test_splitmix_reference_stream():
    g = SplitMix64(1234567)
    out = []
    for _ in range(3):
        x, g = g.next()
        out.append(x)
    assert out == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_splitmix_value_semantics():
    g = SplitMix64(5)
    a, g1 = g.next()
    b, _ = g.next()
    assert a == b and g1 != g
    u, _ = g.uniform()
    assert 0.0 <= u < 1.0
    assert derive_seeds(9, 3) == derive_seeds(9, 3)
    assert len(set(derive_seeds(9, 3))) == 3


def test_fact_record_validates_probability():
    with pytest.raises(ContractViolation):
        FactRecord("O", "s", "Sz", "↑", 0.5, 1.5, 0)
    assert FactRecord("O", "s", "Sz", "↑", 0.5, 1 + 1e-13, 0).probability == 1.0


def test_ledger_invariants():
    reg = SystemRegistry([("s", 2), ("O", 3)])
    with pytest.raises(ContractViolation):
        PerspectiveLedger("O", lab())
    st_ = spin()
    f0 = FactRecord("O", "s", "Sz", "↑", 0.5, 1.0, 3)
    f1 = FactRecord("O", "s", "Sz", "↑", 0.5, 1.0, 3)
    with pytest.raises(ContractViolation):
        PerspectiveLedger("O", st_, (f0, f1))
    assert PerspectiveLedger("W", State.pure(reg, lab().vector)).rng_state == 0


def test_pointer_indices_order():
    # +1/2 lands on position 1 and -1/2 on position 2 next to ready 0
    assert pointer_indices(SZ, 3, 0) == [2, 1]
    assert pointer_indices(SZ, 4, 1) == [2, 0]
    with pytest.raises(SizingError):
        pointer_indices(SZ, 2, 0)
    with pytest.raises(UsageError):
        pointer_indices(SZ, 3, 3)


def test_premeasure_superposition():
    out = premeasure(lab(), "s", "O", SZ)
    want = np.zeros(6)
    want[1], want[5] = 0.6, 0.8  # |up>|phi1>, |down>|phi2>
    np.testing.assert_allclose(out.vector, want, atol=1e-15)
    assert abs(np.linalg.norm(out.vector) - 1) <= 1e-10


def test_premeasure_eigenstate_makes_no_superposition():
    out = premeasure(lab(1.0, 0.0), "s", "O", SZ)
    np.testing.assert_allclose(out.vector, basis(6, 1), atol=1e-15)


def test_premeasure_preconditions():
    reg = SystemRegistry([("s", 2), ("O", 3)])
    not_ready = product_state(reg, [[0.6, 0.8], basis(3, 1)])
    with pytest.raises(PreconditionError):
        premeasure(not_ready, "s", "O", SZ)
    small = product_state(SystemRegistry([("s", 2), ("O", 2)]), [[0.6, 0.8], basis(2, 0)])
    with pytest.raises(SizingError):
        premeasure(small, "s", "O", SZ)


def test_premeasure_on_mixed_state_keeps_trace():
    reg = SystemRegistry([("s", 2), ("O", 3)])
    rho = np.kron(np.diag([0.3, 0.7]), np.diag([1.0, 0, 0]))
    out = premeasure(State.mixed(reg, rho), "s", "O", SZ)
    assert abs(np.trace(out.rho) - 1) <= 1e-10
    np.testing.assert_allclose(np.diag(out.rho).real, [0, 0.3, 0, 0, 0, 0.7], atol=1e-15)


def test_measure_eigenstate():
    led = PerspectiveLedger("O", spin(1.0, 0.0))
    led, fact = measure(led, SZ)
    assert (fact.outcome, fact.probability, fact.eigenvalue) == ("↑", 1.0, 0.5)
    np.testing.assert_allclose(led.state.vector, [1, 0], atol=1e-15)


def test_measure_forced_seed_selects_up():
    led = PerspectiveLedger("O", spin())
    led2, fact = measure(led, SZ, rng=SEED_UP)
    assert fact.outcome == "↑"
    assert fact.probability == pytest.approx(0.36, abs=1e-15)
    np.testing.assert_allclose(np.abs(led2.state.vector), [1, 0], atol=1e-15)
    assert led.facts == () and len(led2.facts) == 1
    _, fact = measure(led, SZ, rng=SEED_DOWN)
    assert fact.outcome == "↓" and fact.probability == pytest.approx(0.64)


@given(seeds, st.floats(0.05, 0.95))
def test_measure_twice_is_idempotent(seed, p_up):
    led = PerspectiveLedger("O", spin(np.sqrt(p_up), np.sqrt(1 - p_up)), rng_seed=seed)
    led, first = measure(led, SZ)
    led, second = measure(led, SZ)
    assert second.outcome == first.outcome
    assert second.probability == pytest.approx(1.0, abs=1e-12)
    assert second.step > first.step
    assert abs(np.linalg.norm(led.state.vector) - 1) <= 1e-10


def test_measure_mixed_state():
    reg = SystemRegistry([("s", 2)])
    led = PerspectiveLedger("O", State.mixed(reg, np.diag([0.25, 0.75])))
    led, fact = measure(led, SZ, rng=SplitMix64(SEED_UP))
    assert fact.outcome == "↑" and fact.probability == pytest.approx(0.25)
    assert abs(np.trace(led.state.rho) - 1) <= 1e-10


def test_measure_uses_and_advances_ledger_stream():
    led = PerspectiveLedger("O", spin(R, R), rng_seed=77)
    a, fa = measure(led, SZ)
    b, fb = measure(led, SZ)
    assert fa == fb and a.rng_state == b.rng_state != led.rng_state
    c, _ = measure(led, SZ, rng=5)
    assert c.rng_state == led.rng_state


def test_measure_degenerate_state():
    reg = SystemRegistry([("s", 2)])
    ghost = State(reg, vector=np.zeros(2, dtype=complex))
    with pytest.raises(DegenerateMeasurementError):
        measure(PerspectiveLedger("O", ghost), SZ)


def test_measure_registry_mismatch():
    with pytest.raises(UsageError):
        measure(PerspectiveLedger("O", spin()), spin_z("t"))


def wigner_view(a=0.6, b=0.8):
    led = PerspectiveLedger("W", lab(a, b), rng_seed=3)
    return unitary_view(led, [PremeasureStep("s", "O", SZ)])


def test_unitary_view_entangles_without_facts():
    led = wigner_view()
    assert led.facts == ()
    want = np.zeros(6)
    want[1], want[5] = 0.6, 0.8
    np.testing.assert_allclose(led.state.vector, want, atol=1e-15)


def test_unitary_view_identity_steps():
    led = PerspectiveLedger("W", lab())
    assert unitary_view(led, []).state.vector is led.state.vector
    out = unitary_view(led, [np.eye(6)])
    np.testing.assert_allclose(out.state.vector, led.state.vector, atol=1e-15)


def test_unitary_view_two_premeasurements_compose():
    reg = SystemRegistry([("s", 2), ("O", 3), ("P", 3)])
    st_ = product_state(reg, [[0.6, 0.8], basis(3, 0), basis(3, 0)])
    led = unitary_view(PerspectiveLedger("W", st_), [PremeasureStep("s", "O", SZ), PremeasureStep("s", "P", SZ)])
    # matrix-product oracle: local isometries on the untouched subsystem are identities
    def step(target_index):
        u = np.zeros((18, 18))
        for s, ptr in ((0, 1), (1, 2)):
            for o in range(3):
                for p in range(3):
                    src = [s, o, p]
                    if src[target_index] != 0:
                        continue
                    dst = list(src)
                    dst[target_index] = ptr
                    u[np.ravel_multi_index(dst, (2, 3, 3)), np.ravel_multi_index(src, (2, 3, 3))] = 1
        return u
    want = step(2) @ step(1) @ st_.vector
    np.testing.assert_allclose(led.state.vector, want, atol=1e-15)
    assert np.count_nonzero(np.abs(led.state.vector) > 1e-12) == 2


def test_unitary_view_rejects():
    led = PerspectiveLedger("W", lab())
    with pytest.raises(UsageError):
        unitary_view(led, [PremeasureStep("s", "X", SZ)])
    with pytest.raises(UsageError):
        unitary_view(led, [np.eye(3)])
    with pytest.raises(ContractViolation):
        unitary_view(led, [2 * np.eye(6)])
    led, _ = measure(led, SZ, rng=0)
    with pytest.raises(PreconditionError):
        unitary_view(led, [PremeasureStep("s", "O", SZ)])


def test_perspectives_diverge():
    friend = PerspectiveLedger("O", spin(), rng_seed=11)
    friend, _ = measure(friend, SZ)
    w = friend.state.vector
    assert np.count_nonzero(np.abs(w) > 1e-12) == 1
    wig = wigner_view()
    ptr = pointer_observable("O", 3, SZ, 0)
    assert interference_witness(wig.state, ptr.embedded_projectors(wig.registry)) > 0


def test_pointer_observable_labels():
    ptr = pointer_observable("O", 3, SZ, 0)
    assert ptr.labels == ("Φ0", "↑", "↓")
    with pytest.raises(ConfigurationError):
        pointer_observable("O", 3, Observable.from_matrix("X", "s", np.diag([1.0, 2.0]), ["Φ0", "b"]), 0)


def test_correlation_is_exact():
    wig = wigner_view()
    ptr = pointer_observable("O", 3, SZ, 0)
    assert abs(correlation_probability(wig.state, ptr, SZ) - 1.0) <= 1e-12
    # a product state has no correlation between the two readings
    assert correlation_probability(lab(), ptr, SZ) == pytest.approx(0.0, abs=1e-15)


def test_cross_check_up_branch():
    wig = wigner_view()
    fact = FactRecord("O", "s", "Sz", "↑", 0.5, 0.36, 0)
    led, res = cross_check(wig, fact, pointer_observable("O", 3, SZ, 0), SZ, step=1)
    assert res.agreement is True and res.status == "agree"
    assert res.pointer_probability == pytest.approx(0.36)
    assert res.system_outcome == "↑"
    assert led.facts[-1].probability == pytest.approx(1.0)


def test_cross_check_pointer_only_and_missing_label():
    wig = wigner_view()
    fact = FactRecord("O", "s", "Sz", "↓", -0.5, 0.64, 0)
    _, res = cross_check(wig, fact, pointer_observable("O", 3, SZ, 0))
    assert res.agreement and res.system_outcome is None
    with pytest.raises(ConfigurationError):
        cross_check(wig, fact, pointer("O", 3))


def test_cross_check_null_branch_samples_instead():
    wig = wigner_view(1.0, 0.0)
    fact = FactRecord("O", "s", "Sz", "↓", -0.5, 1.0, 0)
    _, res = cross_check(wig, fact, pointer_observable("O", 3, SZ, 0), SZ)
    assert res.pointer_outcome == "↑" and res.agreement is False


def test_cross_check_destroyed():
    wig = wigner_view()
    fact = FactRecord("O", "s", "Sz", "↑", 0.5, 0.36, 0)
    _, res = cross_check(wig, fact, pointer_observable("O", 3, SZ, 0), SZ, destroyed=True)
    assert res.status == "information-destroyed" and res.agreement is None


def test_information_destroyed():
    obs = {"Sz": SZ, "Sx": SX, "Sz2": spin_z("s", "Sz2")}
    f0 = FactRecord("O", "s", "Sz", "↑", 0.5, 0.36, 0)
    led = PerspectiveLedger("O", spin(), (f0,))
    assert not information_destroyed(led, f0, obs)
    led2 = PerspectiveLedger("O", spin(), (f0, FactRecord("O", "s", "Sz2", "↑", 0.5, 1, 1)))
    assert not information_destroyed(led2, f0, obs)
    led3 = PerspectiveLedger("O", spin(), (f0, FactRecord("O", "s", "Sx", "0.5", 0.5, 0.5, 1)))
    assert information_destroyed(led3, f0, obs)


@given(seeds)
def test_cross_check_agrees_for_every_seed(seed):
    friend = PerspectiveLedger("O", spin(), rng_seed=seed)
    friend, fact = measure(friend, SZ)
    wig = PerspectiveLedger("W", lab(), rng_seed=seed ^ 0xABCDEF)
    wig = unitary_view(wig, [PremeasureStep("s", "O", SZ)])
    _, res = cross_check(wig, fact, pointer_observable("O", 3, SZ, 0), SZ)
    assert res.agreement is True
