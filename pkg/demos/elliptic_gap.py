"""Elliptic free energies: HAE solution, the conifold gap, and the TR comparison."""
from artifact import hae, painleve, trell

st = hae.HaeState(4).solve()
for g in range(2, 5):
    rep = hae.verify_strong_gap(st, g, 3)
    print(f"g={g}: constant {rep.constant}, vanishing powers {rep.vanishing}")

print("TR Lambda-series of F_2:", [str(c) for c in trell.lambda_fg(2, 2)])
print("TR vs HAE residuals:", painleve.tr_hae_crosscheck(2, 2)["residuals"])

for g in (2, 3, 4):
    print(f"Weber F_{g} =", trell.weber_free_energy(g))
