"""Rank of MIMO designs as the number of transmitters grows."""
# %%
from bemrank import Mode, assemble_P, bem, check_feasibility, design_patterns, preset, rank_report

geo = preset("s4")
basis = bem("ce", geo.N, geo.Q, geo.f_D)

# %% [markdown]
# Harmonic MIMO gives each transmitter its own block of harmonics and
# runs out of room quickly. FDKD-MIMO only shifts a single column.

# %%
for mode in (Mode.HARMONIC_MIMO, Mode.FDKD_MIMO):
    for n_tx in range(1, 7):
        feas = check_feasibility(geo, mode, n_tx)
        if not feas.passed:
            print(f"{mode.value:>9} N_T={n_tx}: infeasible ({', '.join(c.name for c in feas.violated)})")
            continue
        rep = rank_report(assemble_P(geo, design_patterns(geo, mode, n_tx), basis), rnc=False)
        print(f"{mode.value:>9} N_T={n_tx}: rank {rep.final_rank}/{rep.n_columns}")
