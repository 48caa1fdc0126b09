"""
Checking the invariance axioms
==============================

The cascade axiom [R] asks that two successive Doppler shifts equal one shift
at the composed speed. The ordinal axiom [M] asks that composing both speeds
with a common third speed never reverses an order between observed
wavelengths. Both are checked on finite grids.
"""

import numpy as np

from reldoppler import ASTAR, AV, DE, LF, general_composition_law, general_doppler_law
from reldoppler.axioms import check_DC, check_LOI, check_M, check_R, witness_lf_vs_dstar
from reldoppler.monotone import random_monotone_map

# %%
# Matching pairs pass, the relativistic Doppler law with Einstein addition and
# length contraction with perpendicular composition.
for name, L, op in [("de + av", DE, AV), ("lf + perp", LF, ASTAR), ("lf + av", LF, AV)]:
    r, m = check_R(L, op), check_M(L, op)
    print(f"{name:10s} R passed={r.passed} (max residual {r.max_violation:.2e})  M passed={m.passed}")

# %%
# Length contraction cannot be written as a power of (1 - b)/(1 + b): the
# exponent that fits at 0.5 differs from the one that fits at 0.8.
print("exponents at 0.5 and 0.8:", witness_lf_vs_dstar(0.5, 0.8))

# %%
# Any speed map u yields a consistent pair. Pairing the law of one map with
# the composition of another breaks [R].
rng = np.random.default_rng(1)
u1, u2 = random_monotone_map(rng, 10), random_monotone_map(rng, 10)
L = general_doppler_law(u1, 0.8)
print("same map:     ", check_R(L, general_composition_law(u1), tol=1e-7).passed)
print("other map:    ", check_R(L, general_composition_law(u2), tol=1e-7).passed)

# %%
# Factored laws lam * f(beta) respect scaling of the wavelength; an additive
# offset does not, and the checker names the offending tuple.
offset = lambda lam, b: np.asarray(lam) + (1 - np.asarray(b))
print("LOI(de):", check_LOI(DE).passed, " DC(de):", check_DC(DE).passed)
rep = check_LOI(offset)
print("LOI(offset):", rep.passed, "counterexample (x, y, z, w, a) =", rep.worst_tuple)
