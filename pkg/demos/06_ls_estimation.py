"""Least-squares estimation over SNR, with and without data leakage."""
# %%
import numpy as np

from bemrank import (ChannelModel, assemble_P, bem, design_patterns, generate_channel,
                     ls_estimate, ofdm_demodulate, preset, simulate, transmit_vector)

geo = preset("s1")
basis = bem("ce", geo.N, geo.Q, geo.f_D)
est = assemble_P(geo, design_patterns(geo, "siso"), basis)

# %% [markdown]
# With a channel that lies in the basis, no data and no noise, the
# estimate is exact.

# %%
channel = generate_channel(geo, ChannelModel.BEM_EXACT, seed=1, bem=basis)
x = transmit_vector(est.patterns[0], geo)
frame = ofdm_demodulate(x, channel, geo)
result = ls_estimate(est, frame.y_bar, truth=[channel])
print(f"noiseless coefficient NMSE: {result.nmse_coeff:.1e}")

# %% [markdown]
# Monte-Carlo over SNR. Each trial reuses its channel and noise draw at
# every SNR point.

# %%
for data in (False, True):
    sim = simulate(est, [0, 10, 20, 30], trials=50, seed=0, data=data)
    print("with data" if data else "pilots only")
    for row in sim.summary():
        print(f"  SNR {row['snr_db']:>4}: median NMSE {row['nmse_coeff_median']:.2e}")

# %%
# a doubly-selective channel outside the basis: modelling error floors the NMSE
sim = simulate(est, [40], trials=50, seed=0, model=ChannelModel.SUM_OF_SINUSOIDS)
print("sum-of-sinusoids at 40 dB, tap NMSE median:",
      f"{np.median(sim.nmse_taps[40.0]):.2e}")
