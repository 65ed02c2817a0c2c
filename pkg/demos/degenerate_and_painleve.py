"""Free energies of the rational curve and the Painleve I check they feed."""
from artifact import trdeg

for g in range(2, 6):
    print(f"F_{g} = {trdeg.deg_free_energy_coeff(g)} * q0^{5 - 5 * g}")

rep = trdeg.check_zero_param_pi(5)
print("PI residual orders checked:", rep["hbar_orders_checked"])
print("s-expansion:", rep["s_expansion"])
