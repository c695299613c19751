# %% [markdown]
# # Levels along lambda and the mountain-pass geometry
#
# The ground-state level should not increase with lambda.  Along any ray
# the action is positive near 0 and eventually negative; the segment from 0
# to a negative point through the ground state gives an upper bound for the
# min-max level.

# %%
import numpy as np

from sbi_radial import ModelParams, evaluate, find_ground_state, geometry_scan, mountain_pass_level, scan_lambda
from sbi_radial.profiles import gaussian, sphere_samples

params = ModelParams(p=3.0)
grid = params.grid()

# %%
curve = scan_lambda(params, [0.5, 0.625, 0.75, 0.875, 1.0])
for lam, level, it in zip(curve.lambdas, curve.levels, curve.iterations):
    print(f"lambda={lam:.3f}  level={level:.6f}  iterations={it}")
print("non-increasing:", curve.non_increasing)

# %%
samples = sphere_samples(grid, 1e-2, 20)
print("min I on the sphere of radius 1e-2:", min(evaluate(w, params).value for w in samples))

scan = geometry_scan(gaussian(grid), params, np.geomspace(1e-2, 100, 40))
print(f"c1={scan.c1:.4f} c2={scan.c2:.4f} c3={scan.c3:.4f} exponent={scan.exponent:.4f}")
print("first t with I(tu) < 0:", scan.first_negative)

# %%
gs = find_ground_state(params)
mp = mountain_pass_level(params, ground_state=gs)
print(f"segment max {mp.level:.10f}  ground level {mp.ground_level:.10f}  at t={mp.argmax_t:.6f}")

# %% [markdown]
# Near the exponent threshold the ray still turns negative at p = 2.6; at
# p = 2.4, outside the range, we only record what happens.

# %%
for p in (2.6, 2.4):
    s = geometry_scan(gaussian(grid), params.with_(p=p), np.geomspace(1e-2, 100, 200))
    print(f"p={p}: first negative at t={s.first_negative}")
