"""
Two accounts of one laboratory
==============================

The friend O measures the spin of s. From inside, the spin now has a
value. Wigner W, outside the sealed lab, describes the same interaction as
a unitary that entangles s with O's pointer. Both accounts are kept side by
side, each in its own ledger.
"""

import numpy as np

from relfacts import (
    FactPartition,
    PerspectiveLedger,
    PremeasureStep,
    SystemRegistry,
    correlation_probability,
    cross_check,
    interference_witness,
    measure,
    spin_z,
    stability_deviation,
    unitary_view,
)
from relfacts.perspectives import pointer_observable
from relfacts.qstate import State, basis, product_state

a, b = 0.6, 0.8
sz = spin_z("s")

# O describes only the spin; W describes spin and friend together.
friend = PerspectiveLedger("O", State.pure(SystemRegistry([("s", 2)]), [a, b]), rng_seed=2024)
lab = SystemRegistry([("s", 2), ("O", 3)])
wigner = PerspectiveLedger("W", product_state(lab, [[a, b], basis(3, 0)]), rng_seed=7)

friend, fact = measure(friend, sz)
print(f"O sees {fact.outcome} with probability {fact.probability:.2f}; O's state is now {friend.state.vector.real}")

wigner = unitary_view(wigner, [PremeasureStep("s", "O", sz)])
print("W holds", len(wigner.facts), "facts; W's state:", np.round(wigner.state.vector.real, 3))

# Does "O's pointer reads some value" compose like a classical alternative for W?
ptr = pointer_observable("O", 3, sz, ready_index=0)
sym = np.zeros(6)
sym[1] = sym[5] = 1 / np.sqrt(2)
part = FactPartition.from_observable(lab, ptr, np.outer(sym, sym))
rep = stability_deviation(wigner.state, part)
print(f"P(b) direct {rep.p_direct:.2f}, through the pointer values {rep.p_composed:.2f},"
      f" deviation {rep.deviation:.2f} -> stable for W: {rep.stable}")
print("interference witness", interference_witness(wigner.state, part.projectors))

# When W finally looks, the two accounts agree.
print("P(pointer label = spin label) for W:", correlation_probability(wigner.state, ptr, sz))
wigner, result = cross_check(wigner, fact, ptr, sz)
print("cross-check:", result.status, "| pointer", result.pointer_outcome, "| spin", result.system_outcome)
