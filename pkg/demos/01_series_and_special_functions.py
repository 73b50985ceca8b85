# %% [markdown]
# Exact q/y-series: building blocks and the Eisenstein/Weierstrass family.
# Every coefficient is a rational number; powers of 2*pi*i and i are kept in
# a tag on the side.

# %%
from fractions import Fraction

from jacobiq.series import deriv_y, first_difference, make_series, mul, invert_unit, Direction
from jacobiq.special import eisenstein_E, eisenstein_G, eta, q_k, theta_derivative_series, twisted_E
from jacobiq.special import eta_cubed_by_squaring

# %%
# a Laurent polynomial in y^(1/2) and its inverse as a series in y^-1
d = make_series([(0, Fraction(1, 2), 1), (0, Fraction(-1, 2), -1)])
inv = invert_unit(d, Direction.NEG_Y, y_limit=-6, q_max=1)
print("1/(y^1/2 - y^-1/2) =", " + ".join(f"{c}*y^{y}" for _, y, c in reversed(inv.terms())), "+ ...")
print("check:", [(str(q), str(y), str(c)) for q, y, c in mul(d, inv)[0].terms()])

# %%
E2 = eisenstein_E(2, 6)
print("E2:", [str(c) for _, _, c in E2.terms()])
print("G4 constant:", eisenstein_G(4, 1).terms()[0][2], " prefactor", eisenstein_G(4, 1).tag.prefactor_dict())

# %%
# y d/dy Q_k = k Q_{k+1}
Q1, Q2 = q_k(1, 8, (-8, 8)), q_k(2, 8, (-8, 8))
print("ladder k=1 holds:", first_difference(deriv_y(Q1), Q2) is None)

# %%
# E_m from the plus and minus expansions of P_1 agree
print("E_3 plus = minus:", first_difference(twisted_E(3, 10, (-6, 6), "+"), twisted_E(3, 10, (-6, 6), "-")) is None)

# %%
e = eta(12)
print("eta:", [(str(q), str(c)) for q, _, c in e.terms()])
print("theta'(0) series = eta^3:", first_difference(theta_derivative_series(30), eta_cubed_by_squaring(30)) is None)
