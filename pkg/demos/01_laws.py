"""
Doppler and composition laws
============================

Evaluate the closed-form laws and see how a speed map u ties the general
Doppler law to both the relativistic Doppler shift and length contraction.
"""

import numpy as np

from reldoppler import (
    MonotoneMap,
    doppler_de,
    doppler_general,
    lorentz_fitzgerald,
    u_lf_map,
    velocity_add_av,
    velocity_add_perp,
)

# %%
# Speeds are fractions of c. At 0.6 c the Doppler factor is
# sqrt((1 - 0.6) / (1 + 0.6)) = 1/2, while length contraction gives 0.8.
print("DE(1, 0.6) =", doppler_de(1.0, 0.6))
print("LF(1, 0.6) =", lorentz_fitzgerald(1.0, 0.6))

# %%
# Einstein addition never leaves the unit interval; perpendicular composition
# multiplies the factors 1 - beta**2.
print("0.5 (+) 0.5 =", velocity_add_av(0.5, 0.5))
print("0.6 (+)perp 0.8 =", velocity_add_perp(0.6, 0.8), "vs sqrt(0.7696) =", np.sqrt(0.7696))

# %%
# With u the identity and xi = 1/2 the general law is the relativistic one ...
b = np.linspace(0, 0.99, 9)
ident = MonotoneMap.identity()
print("identity map, xi=1/2:", np.max(np.abs(doppler_general(1.0, b, ident, 0.5) - doppler_de(1.0, b))))

# ... and with u_lf(beta) = beta^2 / (2 - beta^2) it is length contraction.
print("u_lf map, xi=1/2:    ", np.max(np.abs(doppler_general(1.0, b, u_lf_map(), 0.5)
                                           - lorentz_fitzgerald(1.0, b))))
