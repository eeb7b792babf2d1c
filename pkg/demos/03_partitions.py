# Multiscale partitions
#
# At level j the nodes are grouped into cells of diameter at most b a^j by
# farthest-point sampling.  Validation reports the worst diameter and
# measure ratios against the floors c0 (b a^j)^n and Cfloor.

# %%
from manifold_frames.errors import ScaleUnresolved
from manifold_frames.partition import build_level, build_multiscale, validate
from manifold_frames.spectral import build_sphere_model

a = 2.0 ** (1 / 3)
model = build_sphere_model(16, 32, 64)

# %%
part = build_multiscale(model, 0.5, a, 1, 7)
report = validate(model, part)
for lev in report["levels"]:
    print(f"j={lev['j']:2d} scale={lev['scale']:.3f} cells={lev['cells']:4d} "
          f"diam ratio={lev['worst_diameter_ratio']:.3f} measure ratio={lev['worst_measure_ratio']:.3f}")
print("passed", report["passed"], "digest", part.digest()[:16])

# %%
# Levels finer than the grid are refused unless explicitly allowed.
try:
    build_level(model, -4, 0.5, a)
except ScaleUnresolved as exc:
    print("refused:", exc)
fine = build_level(model, -4, 0.5, a, allow_subgrid=True)
print("subgrid level has", len(fine), "cells for", model.node_count, "nodes")
