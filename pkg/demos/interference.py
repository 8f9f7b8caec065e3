"""
Collapse versus unitary probabilities
=====================================

A photon meets a beam splitter, takes one of two arms, and meets a second
splitter. If something records the arm, the two routes add as
probabilities. If nothing does, they add as amplitudes and can cancel.
"""

import numpy as np

from relfacts import AmplitudeChain, interference_deficit, p_collapse, p_unitary

r = 1 / np.sqrt(2)

# W(b_i, a): source into each arm; W(c, b_i): each arm into the dark port
dark = AmplitudeChain([r, r], [r, -r])
bright = AmplitudeChain([r, r], [r, r])

for name, chain in (("dark port", dark), ("bright port", bright)):
    print(f"{name:12s} unitary {p_unitary(chain):.3f}  collapse {p_collapse(chain):.3f}"
          f"  deficit {interference_deficit(chain):.3f}")

# A single route has nothing to interfere with.
lone = AmplitudeChain([0.8], [0.6j])
print("single path  unitary", p_unitary(lone), " collapse", p_collapse(lone))

# Phase-scan the second arm: the unitary value swings, the collapse value does not.
for phi in np.linspace(0, np.pi, 5):
    chain = AmplitudeChain([r, r], [r, -r * np.exp(1j * phi)])
    print(f"phase {phi:4.2f}  unitary {p_unitary(chain):.3f}  collapse {p_collapse(chain):.3f}")
