"""Irregular conformal block coefficients and the rank 5/2 realization."""
from artifact import painleve, virasoro

U = painleve._block_coeffs(3)
for k in ["ln", 1, 2, 3]:
    print(f"U_{k} =", U[k])

ops = virasoro.check_half_integer_realization(3)["operators"]
for n in sorted(ops, key=int, reverse=True):
    print(f"L_{n} ->", ops[n])
