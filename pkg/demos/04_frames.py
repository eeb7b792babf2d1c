# Frames of kernel rows and the summation operator
#
# Atoms are rows of f(a^{2j} Delta) at cell centers.  The summation operator
# S is close to the diagonal multiplier Q = H(sqrt(Delta)); its extreme
# eigenvalues on the mean-zero band are the frame bounds.

# %%
import numpy as np

from manifold_frames.filters import FilterSpec, daubechies_bounds
from manifold_frames.frames import (
    apply_S,
    build_frame,
    empirical_frame_bounds,
    invert_S,
    q_minus_s_norm,
)
from manifold_frames.spectral import band_limited_random, build_sphere_model

model = build_sphere_model(16, 32, 64)
spec = FilterSpec(l=1, a=2.0 ** (1 / 3))
ideal = daubechies_bounds(spec)
print(f"multiplier bounds A_a={ideal.A:.6f} B_a={ideal.B:.6f}")

# %%
for b in (0.7, 0.5, 0.35):
    frame = build_frame(model, spec, b=b)
    A, B = empirical_frame_bounds(frame)
    print(f"b={b}: atoms={frame.atom_count} A={A:.5f} B={B:.5f} B/A={B / A:.4f} "
          f"||Q-S||={q_minus_s_norm(frame):.4f}")

# %%
# Reconstruction by damped Richardson iteration.
F = band_limited_random(model, np.random.default_rng(1))
G, iterations, history = invert_S(frame, apply_S(frame, F), full_output=True)
print("iterations", iterations, "relative error", np.linalg.norm(G - F) / np.linalg.norm(F))
print("residual history", ["%.1e" % r for r in history])
