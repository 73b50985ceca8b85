# %% [markdown]
# Characters of affine sl2 at level 1 and at level -4/3.
# The level-1 theta quotient is pinned against an independent lattice sum;
# the level -4/3 quotient is pinned by its own differential equation.

# %%
from jacobiq.characters import (
    char_level1,
    char_level1_oracle,
    count_admissible_sl2,
    family_level1,
    family_m43,
    literal_level1_leading_exponent,
    resolve_level1_convention,
)
from jacobiq.series import first_difference

# %%
rec = resolve_level1_convention(6, (-6, 6))
print("level-1 convention: q ->", f"q^{rec.q_scale}", " y ->", f"y^{rec.y_scale}", " shift", rec.q_shift)
print("literal exponent for i=1:", literal_level1_leading_exponent(1), " (the lattice sum starts at 5/24)")

# %%
for i in (0, 1):
    same = first_difference(char_level1(i, 10, (-8, 8)), char_level1_oracle(i, 10, (-8, 8))) is None
    print(f"chi_{i} = lattice oracle:", same)

# %%
f1 = family_level1(6, (-6, 6))
print(f1.label, "c =", f1.c, "kappa =", f1.kappa, "leading", [str(e) for e in f1.leading_exponents])

f43 = family_m43(6, (-8, 8))
print(f43.label, "c =", f43.c, "kappa =", f43.kappa, "leading", [str(e) for e in f43.leading_exponents])
print("  convention certified by:", f43.convention.certificate["compared_against"])
print("  exponents distinct mod 1:", f43.exponents_distinct_mod_1)

# %%
print("admissible weights at k = -4/3:", count_admissible_sl2(2, 3), " at k = 1:", count_admissible_sl2(3, 1))
