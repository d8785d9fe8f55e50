"""Lambda tables of the rank-nullity test, analytic against numeric."""
# %%
import numpy as np

from bemrank import bem, design_patterns, harmonic_pattern, preset, rnc_bem_check

geo = preset("s1")
pattern = design_patterns(geo, "siso")[0]

# %% [markdown]
# Each table is indexed by Doppler offset (rows) and pilot column. A cell
# is one when theta_l applied to the projected basis is nonzero there.

# %%
for kind in ("ce", "p", "s"):
    report = rnc_bem_check(geo, pattern, bem(kind, geo.N, geo.Q, geo.f_D))
    print(f"{kind}: passed {report.passed}, analytic == numeric: {report.consistent}")
    print(report.tables[0, 0].astype(int))

# %% [markdown]
# A pattern with only zero columns gives all-zero tables for every path,
# which is how the test fails.

# %%
empty = harmonic_pattern(geo, [None] * geo.L_P)
report = rnc_bem_check(geo, empty, bem("ce", geo.N, geo.Q, geo.f_D))
print("empty pattern passes:", report.passed)
print("zero tables:", len(report.as_dict()["zero_tables"]), "of", geo.L * geo.Q)

# %%
# psi values behind one table
report = rnc_bem_check(geo, pattern, bem("gce", geo.N, geo.Q, geo.f_D))
print(np.round(np.abs(report.psi[1, 0]), 4))
