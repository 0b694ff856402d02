"""
Barred seminorms and the lambda = n chain
=========================================

The barred functional measures oscillation around ``|f|_Q`` instead of
``f_Q``. On nonnegative functions the two agree; a negative part is
penalized. This script walks through a few sampled functions and prints
the constants of the chain linking them.
"""

import numpy as np

from campanato import Domain, SeminormSpec, enumerate_cubes, generate, seminorm

dom = Domain(1, side=1.0, resolution=128)
family = enumerate_cubes(dom, "anchored")
print(f"{len(family)} cubes in the anchored family")

###############################################################################
# A nonnegative step has equal Campanato and barred values; its mirror image
# does not.

def sup(f, kind):
    return seminorm(f, SeminormSpec(1.0, 1.0, kind, "volume"), family).sup

step = generate("step", dom, low=0.0, high=1.0)
for name, f in [("step", step), ("-step", -step)]:
    print(f"{name:6s} campanato={sup(f, 'campanato'):.4f} barred={sup(f, 'barred'):.4f}")

###############################################################################
# The inf over nonnegative constants sits between barred/2 and barred.

for kind in ["log_singularity", "gaussian", "random_smooth"]:
    f = generate(kind, dom, seed=3)
    bar, inf_ = sup(f, "barred"), sup(f, "inf_nonneg")
    print(f"{kind:16s} barred/inf = {bar / inf_:.4f}")

###############################################################################
# The achieving cube of a report tells where the oscillation concentrates.

rep = seminorm(generate("log_singularity", dom, sign=-1.0), SeminormSpec(1.0, 1.0, "barred"), family)
print("-log singularity peaks on cells", rep.cube.lo, "to", rep.cube.hi, "value", round(rep.sup, 4))
print("cell-centre estimate 2 log N =", round(2 * np.log(128), 4))
