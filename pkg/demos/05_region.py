# %% [markdown]
# # The well-posedness region in the (kappa, s) plane
#
# Below sigma = 2 the admissible strip has half-width 1/2, above it
# widens to 1, and at sigma = 2 only the diagonal kappa = s >= 0 is left.
# Each map below marks members with '#'. Rows are s from 2 down to -2
# and columns are kappa from -2 to 2.

# %%
import numpy as np

from quadnls import region_sample

res = 33
for sigma in (1.0, 2.0, 3.0):
    flags = np.array([r[2] for r in region_sample(sigma, (-2, 2), (-2, 2), res)]).reshape(res, res)
    print(f"sigma = {sigma:g}")
    for row in flags.T[::-1]:
        print("   " + "".join("#" if f else "." for f in row))
