"""Pilot designs, the estimation matrix and its rank certificate."""
# %%
import numpy as np

from bemrank import (InfeasibleDesignError, Mode, assemble_P, bem, check_feasibility,
                     design_patterns, harmonic_pattern, preset, rank_report)

geo = preset("s1")
basis = bem("ce", geo.N, geo.Q, geo.f_D)

# %% [markdown]
# The built-in designs satisfy the counting bounds, so the estimation
# matrix has full column rank.

# %%
for mode in (Mode.HARMONIC_SISO, Mode.FDKD_SISO):
    est = assemble_P(geo, design_patterns(geo, mode), basis)
    rep = rank_report(est)
    print(f"{mode.value:>5}: rank {rep.final_rank}/{rep.n_columns}, "
          f"theta orthogonal: {rep.theta_orth.passed}, RNC-BEM: {rep.rnc_passed}")

# %% [markdown]
# Placing the same harmonics on neighbouring columns breaks orthogonality
# of the theta blocks. Orthogonality is sufficient, not necessary: the
# rank here survives anyway.

# %%
crowded = harmonic_pattern(geo, [0, 1, 2])
rep = rank_report(assemble_P(geo, [crowded], basis))
print(f"crowded pattern: ratio {rep.theta_orth.max_ratio:.3f}, "
      f"rank {rep.final_rank}/{rep.n_columns}")

# %% [markdown]
# A geometry with too few clusters for L*L_P harmonics is refused by the
# designer and, built by hand, loses rank.

# %%
tight = preset("s1", N=64, N_P=8, P_sep=8, L_P=5, L=4, Q=3, B_c=1)
print("feasible:", check_feasibility(tight, "siso").passed)
try:
    design_patterns(tight, "siso")
except InfeasibleDesignError as exc:
    print("refused:", exc.violated)
aliased = harmonic_pattern(tight, [r * tight.L for r in range(tight.L_P)])
est = assemble_P(tight, [aliased], bem("ce", tight.N, tight.Q, tight.f_D))
rep = rank_report(est)
print(f"aliased design: rank {rep.final_rank}/{rep.n_columns}")
print("singular values:", np.round(np.linalg.svd(est.P, compute_uv=False), 3))
