# Besov norms from frame coefficients
#
# The weighted l^q(l^p) norm of analysis coefficients is compared with the
# Littlewood-Paley norm over a fixed suite of test functions.  Equivalent
# norms give ratios within a bounded spread.

# %%
import numpy as np

from manifold_frames.besov import (
    BesovParams,
    equivalence_experiment,
    lp_norm,
    min_l,
    seq_norm,
    standard_suite,
)
from manifold_frames.filters import FilterSpec, build_lp_window
from manifold_frames.frames import analyze, build_frame
from manifold_frames.spectral import build_sphere_model, sphere_degrees

model = build_sphere_model(16, 32, 64)
window = build_lp_window(model.lambda_max)
suite = standard_suite(model)

# %%
for triple in [(1, 2, 2), (0.5, 1, 1), (1.5, np.inf, np.inf), (2, 0.7, 0.7)]:
    params = BesovParams(*triple)
    l = min_l(params, model.dim)
    frame = build_frame(model, FilterSpec(l=l), b=0.35)
    rep = equivalence_experiment(model, frame, window, params, suite)
    print(f"{params.label():16s} l={l} ratios in [{rep['min']:.4f}, {rep['max']:.4f}] spread={rep['spread']:.3f}")

# %%
# For a single harmonic of degree L the B^1_{2,2} norm grows like lambda_L^{1/2}.
params = BesovParams(1, 2, 2)
frame = build_frame(model, FilterSpec(l=1), b=0.35)
degrees = sphere_degrees(16)
lam, lp, sq = [], [], []
for L in range(2, 17):
    c = np.zeros(model.size)
    c[np.flatnonzero(degrees == L)[L]] = 1.0
    lam.append(L * (L + 1))
    lp.append(lp_norm(model, window, c, params))
    sq.append(seq_norm(analyze(frame, c), params, frame.spec.a))
print("log-log slope", np.polyfit(np.log(lam), np.log(lp), 1)[0])
print("seq / lp ratios", np.round(np.array(sq) / np.array(lp), 4))
