"""The four basis families and how well they fit a fading tap."""
# %%
import numpy as np

from bemrank import BemKind, ChannelModel, bem, fit_bem, generate_channel, preset

geo = preset("s2")
print(f"N = {geo.N}, Q = {geo.Q}, f_D = {geo.f_D}")

# %% [markdown]
# Every basis is orthonormalized column-wise, so B^H B = I for each family.

# %%
bases = {kind: bem(kind, geo.N, geo.Q, geo.f_D) for kind in BemKind}
for kind, b in bases.items():
    gram = b.basis.conj().T @ b.basis
    print(f"{kind.value:>4}: |B^H B - I| = {np.max(np.abs(gram - np.eye(geo.Q))):.1e}")

# %% [markdown]
# Fit one channel drawn from the sum-of-sinusoids model. The error is the
# modelling error of the basis, since no noise is added.

# %%
channel = generate_channel(geo, ChannelModel.SUM_OF_SINUSOIDS, seed=3)
tap = channel.taps[0]
for kind, b in bases.items():
    fit = fit_bem(b, tap)
    err = np.sum(np.abs(tap - b.B @ fit.coefficients) ** 2) / np.sum(np.abs(tap) ** 2)
    print(f"{kind.value:>4}: relative fit error {err:.2e}")
