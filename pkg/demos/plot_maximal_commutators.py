"""
Local maximal functions and commutators
=======================================

On an indicator the commutator ``[b, M]`` collapses to ``b - M_Q b``. The
statistic built from that deviation separates functions with bounded and
unbounded negative part.
"""

import numpy as np

from campanato import (
    Domain,
    GridFunction,
    char_statistic,
    commutator,
    enumerate_cubes,
    generate,
    indicator,
    local_maximal,
    make_cube,
)

dom = Domain(1, 1.0, 64)
q = make_cube(dom, (16,), (48,))
b = GridFunction(dom, np.random.default_rng(0).normal(size=64))

###############################################################################
# The identity, cell by cell.

lhs = commutator(b, indicator(dom, q), 0.0, enumerate_cubes(dom, "anchored", base=q))
rhs = b.values[q.slices] - local_maximal(b, q).values
print("max |[b,M]chi_Q - (b - M_Q b)| =", np.abs(lhs.values - rhs).max())

###############################################################################
# Fractional sandwich: ``|f|_Q <= |Q|^(-a) M_{a,Q} f <= M_Q f``. The right
# inequality is attained by the cube itself, where ``|Q|^a |Q|^-a`` may round
# one ulp above 1.

mq = local_maximal(b, q).values
for alpha in (0.25, 0.5):
    m = local_maximal(b, q, alpha).values * q.measure ** -alpha
    lower = np.abs(b.values[q.slices]).mean() - m.min()
    upper = np.max((m - mq) / mq)
    print(f"alpha={alpha}: |f|_Q - min = {lower:.2e}, max relative excess over M_Q f = {upper:.2e}")

###############################################################################
# Refinement behaviour of the statistic for +log and -log singularities.

for sign in (1.0, -1.0):
    vals = []
    for n in (64, 128, 256):
        d = Domain(1, 1.0, n)
        vals.append(char_statistic(generate("log_singularity", d, sign=sign), enumerate_cubes(d, "dyadic")).sup)
    print(f"sign {sign:+.0f}:", np.round(vals, 4))
