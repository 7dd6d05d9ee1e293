# %% [markdown]
# # Conservation laws and the order of each scheme
#
# The weighted mass M = ||u||^2 + w ||v||^2 and the Hamiltonian are
# invariants of the flow. A scheme of order r drifts like dt^r, so halving
# the step should divide the drift by 2^r: about 4 for Strang splitting and
# about 16 for the integrating-factor RK4. The Gauss collocation scheme keeps
# the mass to round-off at any step size.

# %%
import numpy as np

from quadnls import ComplexField, EvolveConfig, FieldPair, ModelParams, make_grid, run

grid = make_grid(40 * np.pi, 1024)
g = np.exp(-grid.x ** 2) + 0j
state = FieldPair(ComplexField(grid, g), ComplexField(grid, g))
params = ModelParams(sigma=1.0, n2_coefficient=0.5)


def drift(scheme, dt):
    d = run(state, params, EvolveConfig(dt=dt, t_end=1.0, scheme=scheme)).diagnostics
    return (np.max(np.abs(d["mass"] - d["mass"][0])),
            np.max(np.abs(d["hamiltonian"] - d["hamiltonian"][0])))


# %%
for scheme, dt in (("strang", 0.01), ("ifrk4", 0.00625), ("gauss4", 0.01)):
    coarse, fine = drift(scheme, dt), drift(scheme, dt / 2)
    print(f"{scheme:7s} mass drift {coarse[0]:.2e} -> {fine[0]:.2e} (ratio {coarse[0] / fine[0]:.1f}),"
          f" H drift {coarse[1]:.2e} -> {fine[1]:.2e} (ratio {coarse[1] / fine[1]:.1f})")
