# %% [markdown]
# # Probing the bilinear estimates on finite grids
#
# Both bilinear estimates bound a product in a negative Bourgain norm by
# the norms of the factors. On a finite space-time grid their ratio is
# always finite. The useful signal is whether the worst ratio over a
# random ensemble keeps growing as the grid is refined. Inside the
# region it should not.

# %%
from quadnls import probe

for sigma, kappa, s in ((1.0, 0.0, 0.0), (2.0, 0.5, 0.5), (3.0, 0.0, -0.5)):
    res = probe(sigma, kappa, s, b=0.6, d=0.4, resolutions=(16, 32, 64))
    print(f"sigma={sigma:g} kappa={kappa:g} s={s:g}  growth flag: {res.growth_flag}")
    for key in ("n1", "n2"):
        print(f"   {key} max ratio by resolution: {['%.3f' % v for v in res.stats[key]['max']]}")
