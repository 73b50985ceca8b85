# %% [markdown]
# Floating-point checks of the analytic identities and the Jacobi laws.

# %%
import numpy as np

from jacobiq import numeric as nm
from jacobiq.characters import family_level1, family_m43

tau, alpha, z = 0.1 + 2j, 0.2 - 0.4j, 0.3 + 0.2j

# %%
for chk in (nm.check_theta_quasiperiodicity(z, tau), nm.check_psi(z, alpha, tau),
            nm.check_psi_equals_P1(z, alpha, tau), nm.check_wp_equals_P(2, z, tau)):
    print(f"{chk.law:12s} residual {chk.residual:.2e}")

# %%
f1 = family_level1(20, (-14, 14))
f43 = family_m43(12, (-14, 14))
print("series vs closed form, level -4/3:",
      np.max(np.abs(nm.family_values(f43, alpha, tau, "series") - nm.family_values(f43, alpha, tau, "closed"))))

for fam in (f1, f43):
    chk = nm.check_elliptic_shift(fam, 1, 0, alpha, tau)
    print(fam.label, "kappa", fam.kappa, "residual", f"{chk.residual:.1e}",
          "permutation", chk.matched_permutation_and_factor["permutation"])

# %%
fits = nm.fit_kappa(f43, alpha, tau)
print("best index for level -4/3:", min(fits, key=fits.get))

# %%
M = nm.find_sl2_to_domain(0.5 + 0.5j, 0.2 + 1.5j, 1)
print("SL2 element:", M, "image in domain:", nm.domain_check(*nm.act_sl2(M, 0.5 + 0.5j, 0.2 + 1.5j)))
