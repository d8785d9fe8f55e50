"""Where the pilots sit and which outputs are observed.

Run with ``python3 demos/01_index_algebra.py``.
"""
# %%
import numpy as np

from bemrank import build_index_matrix, build_observation_indices, index_vectors, preset

geo = preset("s1")
print(geo)
print(f"N = {geo.N}, observation window O = {geo.O}, observations V = {geo.V}")

# %% [markdown]
# Each pilot cluster holds L_P tones spaced P_sep apart. Row c of the
# index matrix lists the tones of cluster c; the unreduced copy keeps the
# phase information, the reduced copy is what indexes arrays.

# %%
q_full = build_index_matrix(geo)
q_mod = build_index_matrix(geo, reduced=True)
print("first clusters (unreduced):\n", q_full[:3])
print("rank of the index matrix:", np.linalg.matrix_rank(q_full.astype(float)))
assert np.array_equal(q_full % geo.N, q_mod)

# %% [markdown]
# Observed outputs are the middle pilots shifted by the Doppler offsets
# -B_c..B_c. They are stored offset-major.

# %%
p2_offsets, p2 = build_observation_indices(geo)
iv = index_vectors(geo)
print("observation indices, first offset block:", p2_offsets[-geo.B_c][:6], "...")
print("V =", p2.size)
print("pilot index vector p1:", iv.p1[:8], "...")

# %%
# a positive P_b wraps the last cluster around subcarrier 0
wrapped = preset("s1", P_b=geo.N - 1)
print("wrapped first row:", build_index_matrix(wrapped, reduced=True)[0])
