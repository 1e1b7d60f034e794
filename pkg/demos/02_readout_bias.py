"""
Readout errors bias the echo
============================

With perfect gates the echo should return 1, but readout flips make the
all-zeros outcome show up less often. Inverting the per-qubit confusion
matrices on the shot histogram removes the bias.
"""

import numpy as np

from echoassign import circuits as C
from echoassign.devicegraph import NoiseGraph
from echoassign.readout import ConfusionMatrix, corrected_zero_estimate, reject
from echoassign.simulator import NoiseModel, measure_probs, run_echo, sample_bitstrings

g = NoiseGraph.grid(2, 2, eps=0.0, eta=0.0)
c = C.build_ghz(4)
rho = run_echo(c, (0, 1, 3, 2), g, NoiseModel.local())

cm = ConfusionMatrix.from_rates([(0.02, 0.05), (0.08, 0.01), (0.04, 0.06), (0.10, 0.03)])
probs = measure_probs(rho, cm)
print(f"echo with readout errors: {probs[0]:.4f}   product of p(0|0): {cm.p00():.4f}")

rng = np.random.default_rng(1)
counts = sample_bitstrings(probs, 15_000, rng)
print(f"raw estimate from 15000 shots: {counts[0] / 15_000:.4f}")
est, err = corrected_zero_estimate(counts, cm)
print(f"corrected estimate: {est:.4f} +- {err:.4f}")

# a qubit that flips 1->0 more than 15% of the time disqualifies the line
for rates in ([(0.02, 0.05), (0.16, 0.01)], [(0.02, 0.05), (0.15, 0.01)]):
    v = reject(ConfusionMatrix.from_rates(rates))
    print(f"worst rate {v.worst_rate:.2f}: {'rejected' if v.rejected else 'kept'}")
