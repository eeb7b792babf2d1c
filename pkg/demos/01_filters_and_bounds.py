# Filters, the Calderon constant and Daubechies bounds
#
# A filter f(s) = s^l e^{-s} sampled at dyadic-like scales a^{2j} gives the
# scale sum h(s) = sum_j f(a^{2j} s)^2.  Its extrema over one period are the
# bounds A_a <= h <= B_a.  As a -> 1 both approach c / (2 ln a), with c the
# Calderon constant.

# %%
import math

import numpy as np

from manifold_frames.filters import (
    FilterSpec,
    build_lp_window,
    calderon_constant,
    daubechies_bounds,
    daubechies_sum,
)

# %%
# The constant for l = 1 and l = 2 has the closed form Gamma(2l) / 4^l.
for l in (1, 2):
    spec = FilterSpec(l=l)
    print(f"l={l}: c = {calderon_constant(spec):.12f}  closed form {math.gamma(2 * l) / 4**l:.12f}")

# %%
# The ratio B/A shrinks very quickly as the dilation approaches 1.
for a in (2.0, 2.0 ** 0.5, 2.0 ** (1 / 3), 2.0 ** (1 / 8)):
    b = daubechies_bounds(FilterSpec(l=1, a=a))
    print(f"a={a:.5f}  A={b.A:.8f}  B={b.B:.8f}  B/A-1={b.ratio - 1:.3e}  c/(2 ln a)={b.c / (2 * math.log(a)):.8f}")

# %%
# h is periodic in s with period a^2; the values below repeat after s -> a^2 s.
spec = FilterSpec(l=1, a=2.0 ** (1 / 3))
s = np.array([1.0, 1.3, 1.5])
print(daubechies_sum(spec, s))
print(daubechies_sum(spec, s * spec.a**2))

# %%
# The Littlewood-Paley window splits [0, lambda_max] into dyadic bands whose
# squares sum to one.
window = build_lp_window(272.0)
lam = np.array([0.0, 2.0, 30.0, 272.0])
table = window.table(lam)
print("bands", list(window.bands))
print("sum of squares", (table**2).sum(axis=0))
