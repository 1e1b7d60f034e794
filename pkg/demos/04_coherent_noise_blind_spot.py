"""
Where the echo is blind
=======================

A coherent over-rotation that is undone exactly when the inverse circuit runs
leaves the echo at 1, even though the prepared state is badly wrong.
"""

import numpy as np

from echoassign import circuits as C
from echoassign import metrics as M
from echoassign.devicegraph import NoiseGraph
from echoassign.simulator import NoiseModel

w = C.unitary(C.Circuit((C.Gate("Rx", (0,), (0.5,)),), (0,)))
# only single-qubit gates on physical qubits 0 and 1 are affected
nm = NoiseModel.unitary({("PhasedXZ", (0,)): w, ("PhasedXZ", (1,)): w})

g = NoiseGraph.grid(2, 3)
c = C.build_ghz(3)
print(f"{'assignment':>12}  {'F':>6}  {'F_LE':>6}")
for a in g.path_space(3).paths[:10]:
    print(f"{str(a):>12}  {M.fidelity(c, a, g, nm):6.3f}  {M.loschmidt_exact(c, a, g, nm):6.3f}")

# under global depolarizing both metrics follow closed forms in the gate-success product
g = NoiseGraph.grid(2, 3, eps=0.01, eta=0.04)
a = (0, 1, 2)
f0 = M.f0_for(c, a, g)
print("\nglobal depolarizing, closed form vs simulation")
print(" F:   ", np.round(M.global_closed_form(f0, 3)[0], 6), np.round(M.fidelity(c, a, g, NoiseModel.global_()), 6))
print(" F_LE:", np.round(M.global_closed_form(f0, 3)[1], 6), np.round(M.loschmidt_exact(c, a, g, NoiseModel.global_()), 6))
