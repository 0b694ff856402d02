"""
Muckenhoupt constants and the Rubio de Francia iteration
========================================================

Weights are positive grid functions. We compute A_p constants, a reverse
Hölder exponent and build an A_1 majorant of a random function.
"""

import numpy as np

from campanato import (
    Domain,
    Weight,
    WeightClass,
    enumerate_cubes,
    generate,
    global_maximal,
    muckenhoupt_constant,
    reverse_holder_exponent,
    rubio_de_francia,
)
from campanato.weights import maximal_growth

dom = Domain(1, 1.0, 128)
fam = enumerate_cubes(dom, "anchored")

###############################################################################
# A power weight ``|x - 1/2|^a`` is in A_2 for ``-1 < a < 1``.

for a in (0.5, -0.5, 0.9):
    w = Weight(dom, (np.abs(dom.centers(0) - 0.5) + 0.5 / 128) ** a)
    a2 = muckenhoupt_constant(w, WeightClass("Ap", 2.0), fam)
    rh = reverse_holder_exponent(w, fam, C=1.5)
    print(f"a={a:+.1f}: [w]_A2={a2.value:.4f} on cells {a2.cube.lo}-{a2.cube.hi}, RH exponent {rh:.1f}")

###############################################################################
# Rubio de Francia: ``Rg`` dominates ``|g|`` and is nearly A_1 with constant 2B.

g = generate("gaussian", dom, seed=1)
B = maximal_growth(g, fam, 16)
r = rubio_de_francia(g, B, 16, fam)
gap = global_maximal(r.weight, fam).values - 2 * B * r.weight.values
print(f"B={B:.4f}, tail={r.tail:.2e}, max M(Rg) - 2B Rg = {gap.max():.3e}")
print("A1 constant of Rg:", round(muckenhoupt_constant(Weight.of(r.weight), WeightClass("A1"), fam).value, 4))
