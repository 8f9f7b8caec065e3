"""
Decoherence makes the friend's fact stable for Wigner
=====================================================

Let the friend's pointer leave a record in an environment E. The overlap
eta = <E_1|E_2> between the two records controls how much coherence W can
still see once E is traced out.
"""

import numpy as np

from relfacts import FactPartition, PerspectiveLedger, PremeasureStep, SystemRegistry, spin_z, unitary_view
from relfacts.facts import decohere, overlap_vectors, stability_deviation
from relfacts.perspectives import pointer_observable
from relfacts.qstate import basis, product_state

sz = spin_z("s")
reg = SystemRegistry([("s", 2), ("O", 3), ("E", 3)])
start = product_state(reg, [[0.6, 0.8], basis(3, 0), basis(3, 0)])
entangled = unitary_view(PerspectiveLedger("W", start), [PremeasureStep("s", "O", sz)]).state

lab = SystemRegistry([("s", 2), ("O", 3)])
sym = np.zeros(6)
sym[1] = sym[5] = 1 / np.sqrt(2)
part = FactPartition.from_observable(lab, pointer_observable("O", 3, sz, 0), np.outer(sym, sym))

print(" eta   coherence  deviation  stable")
for eta in (1.0, 0.5, 0.1, 0.0):
    rho = decohere(entangled, "O", "E", overlap_vectors(3, eta, 3)).reduced(["s", "O"])
    rep = stability_deviation(rho, part)
    print(f"{eta:4.1f}   {abs(rho.rho[1, 5]):.3f}      {rep.deviation:.3f}      {rep.stable}")

rho = decohere(entangled, "O", "E", overlap_vectors(3, 0.0, 3)).reduced(["s", "O"])
print("diagonal of the traced state:", np.round(np.diag(rho.rho).real, 3))
