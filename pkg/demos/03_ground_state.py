# %% [markdown]
# # Radial ground states
#
# Nehari-projected Sobolev-gradient descent from three different seeds,
# followed by the a-posteriori checks a solution must pass.

# %%
from sbi_radial import ModelParams, find_ground_state, run_all
from sbi_radial.functional import weak_residuals
from sbi_radial.groundstate import seed_profile
from sbi_radial.profiles import bump_basis

params = ModelParams(p=3.0)
grid = params.grid()

# %%
for name in ("gaussian", "shifted", "ring"):
    res = find_ground_state(params, seed_profile(name, grid))
    print(f"{name:9s} I = {res.value:.10f}  iterations {res.iterations}  converged {res.converged}")

# %%
gs = find_ground_state(params)
print(run_all(gs.u, params, critical=True).table())

# %% [markdown]
# Both weak equations against smooth bumps, and the Pohozaev residual under
# refinement (second order).

# %%
for w in weak_residuals(gs.u, params, bump_basis(grid)):
    print(f"Schrodinger {w.schrodinger:.2e}   Born-Infeld {w.born_infeld:.2e}")

for n in (1024, 2048, 4096, 8192):
    res = find_ground_state(params.with_(n=n))
    print(f"n={n:5d}  I={res.value:.8f}  Pohozaev relative residual {res.pohozaev_relative:.3e}")

# %%
for p in (3.0, 3.5, 4.0):
    res = find_ground_state(params.with_(p=p))
    print(f"p={p}: I={res.value:.6f}  u(0)={res.u.values[0]:.4f}  charge={res.field.charge:.4f}")
