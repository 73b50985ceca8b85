# %% [markdown]
# Flat connections and scalar MLDEs for the level-1 family.
# The printed system is checked as given; a second system derived from the
# heat equation of the lattice characters is checked next to it.

# %%
from jacobiq.characters import char_level1
from jacobiq.mlde import (
    build_level1_scalar,
    build_level1_system,
    build_level1_system_rederived,
    compare_scalar,
    curvature_report,
    eliminate_to_scalar,
    isospectrality_check,
    scalar_residual_report,
)

W = (-8, 8)

# %%
printed = build_level1_system(8, W)
for sign in (1, -1):
    rep = curvature_report(printed, 9, W, sign)
    print(f"printed system, bracket {sign:+d}: zero={rep['zero']} first={rep['first_nonzero']}")

red = build_level1_system_rederived(8, W)
print("rederived system, bracket -1: zero =", curvature_report(red, 9, W, -1)["zero"])

# %%
iso = isospectrality_check(printed, W)
print("char poly of B0:", [str(c) for c in iso.char_poly_coeffs], "exponents", [str(e) for e in iso.exponents])
print("rederived exponents:", [str(e) for e in isospectrality_check(red, W).exponents])

# %%
# the printed y-system and the printed scalar equation are consistent with each other
print("elimination reproduces scalar:", compare_scalar(eliminate_to_scalar(printed), build_level1_scalar(8, W), 9, W)["equal"])

# %%
for i in (0, 1):
    u = char_level1(i, 8, (-30, 30))
    a = scalar_residual_report(build_level1_scalar, u, 8, W)
    b = scalar_residual_report(build_level1_scalar, u, 8, W, q1_sign=-1, e2_sign=-1)
    print(f"chi_{i}: printed residual first {a['first_nonzero']}, sign variant zero={b['zero']}")
