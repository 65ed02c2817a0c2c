import itertools
import random

import pytest

from artifact import trell
from artifact.exactcore import bernoulli, fmpq
from artifact.trdeg import deg_free_energy_coeff


def ev(f, **pts):
    """Evaluate a stored rational function at rational points (z, z1, z2, ...)."""
    idx = {"z": 0, **{f"z{i}": i for i in range(1, trell.NVARS)}}
    return trell._scalar(f.subs({idx[k]: ({}, fmpq(v)) for k, v in pts.items()}))


POINTS = [fmpq(5, 2), fmpq(-7, 3), fmpq(11, 4), fmpq(3), fmpq(-13, 5)]


def test_u_series():
    assert trell.u_series(5) == [fmpq(8, 27), -4, fmpq(15, 8), fmpq(705, 256),
                                 fmpq(115755, 16384), fmpq(23968161, 1048576)]


def test_period_normalization():
    assert trell.period_check(4) == [0, 1, 0, 0, 0]


def test_eta_over_omega():
    assert trell.s_ratio_series(5) == [fmpq(-1, 3), fmpq(3, 4), fmpq(45, 32), fmpq(19035, 4096),
                                       fmpq(2430855, 131072), fmpq(1366185177, 16777216)]


def test_y_series_low_orders():
    Y = trell.y_series(2)
    for z in POINTS:
        X = z * z - fmpq(2, 3)
        assert ev(Y[0], z=z) == 2 * (X - fmpq(1, 3)) * z
        assert ev(Y[1], z=z) == -1 / ((X - fmpq(1, 3)) * z)
        assert ev(Y[2], z=z) == (135 * X ** 3 - 45 * X - 62) / (288 * (X - fmpq(1, 3)) ** 3 * z ** 3)


def test_tilde_e_roots():
    e = trell.tilde_e_series(3)
    assert [e["e1"][k] for k in range(0, 7, 2)] == [fmpq(-2, 3), 1, fmpq(49, 32), fmpq(4543, 1024)]
    assert [e["e2"][k] for k in range(7)] == [fmpq(1, 3), 1, fmpq(-1, 2), fmpq(25, 64), fmpq(-49, 64),
                                             fmpq(8139, 8192), fmpq(-4543, 2048)]
    assert [e["e3"][k] for k in range(7)] == [fmpq(1, 3), -1, fmpq(-1, 2), fmpq(-25, 64), fmpq(-49, 64),
                                             fmpq(-8139, 8192), fmpq(-4543, 2048)]


def test_w03_w11_leading():
    w03 = trell.lambda_wgn(0, 3, 0).coeffs[0]
    w11 = trell.lambda_wgn(1, 1, 0).coeffs[0]
    for a, b, c in itertools.permutations(POINTS[:3]):
        # dX = 2 zeta d zeta, sqrt(X + 2/3) = zeta
        assert ev(w03, z1=a, z2=b, z3=c) == 8 * a * b * c / (32 * a ** 3 * b ** 3 * c ** 3)
    for a in POINTS:
        X = a * a - fmpq(2, 3)
        assert ev(w11, z1=a) == 2 * a * (3 * X + 5) / (192 * a ** 5)


def test_w02_leading_and_first():
    W = trell.w02_series(1)
    for a, b in itertools.combinations(POINTS, 2):
        X1, X2 = a * a - fmpq(2, 3), b * b - fmpq(2, 3)
        j = 4 * a * b
        w0 = (4 + 3 * X1 + 3 * X2 + 6 * a * b) / (12 * (X1 - X2) ** 2 * a * b)
        poly = (34 + 66 * (X1 + X2) + 36 * (X1 ** 2 + X2 ** 2) + 171 * X1 * X2
                + 27 * X1 * X2 * (X1 + X2) + 81 * X1 ** 2 * X2 ** 2)
        w1 = poly / (432 * (X1 - fmpq(1, 3)) ** 2 * (X2 - fmpq(1, 3)) ** 2 * a ** 3 * b ** 3)
        assert ev(W[0], z1=a, z2=b) == j * w0
        assert ev(W[1], z1=a, z2=b) == j * w1


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (1, 2), (0, 4), (2, 1)])
def test_leading_order_is_degenerate_curve(g, n):
    assert trell.deg_check(g, n)


@pytest.mark.parametrize("g,n,k", [(0, 3, 2), (1, 1, 3), (0, 4, 1), (1, 2, 1), (2, 1, 1)])
def test_lambda_correlator_structure(g, n, k):
    W = trell.lambda_wgn(g, n, k)
    assert W.is_symmetric()
    assert W.poles_ok()


def test_free_energy_leading_matches_degenerate():
    for g in (2, 3):
        F = trell.lambda_fg(g, 0)
        assert F[0] == deg_free_energy_coeff(g) * fmpq(243) ** (g - 1)


def test_free_energy_coefficients_g2():
    assert trell.lambda_fg(2, 2) == [fmpq(21, 2560), fmpq(541269, 2621440), fmpq(43315827, 16777216)]


def test_weber_free_energies():
    for g in (2, 3, 4):
        assert trell.weber_free_energy(g) == bernoulli(2 * g) / (4 * g * (g - 1))
        assert trell.weber_closed_form(g) == trell.weber_free_energy(g)


def test_weber_w03_and_w11():
    w = trell.weber_tr(0, 3)
    assert w.nu_power == -1
    rng = random.Random(17)
    for _ in range(5):
        p = [fmpq(rng.randint(2, 30), rng.randint(1, 5)) for _ in range(3)]
        if len(set(p)) < 3 or 1 in p:
            continue
        a, b, c = p
        plus = 1 / ((a + 1) ** 2 * (b + 1) ** 2 * (c + 1) ** 2)
        minus = 1 / ((a - 1) ** 2 * (b - 1) ** 2 * (c - 1) ** 2)
        assert ev(w.value, z1=a, z2=b, z3=c) == (plus - minus) / 2
    assert ev(w.value, z1=2, z2=3, z3=5) == fmpq(-5, 648)
    w11 = trell.weber_tr(1, 1)
    for a in POINTS:
        assert ev(w11.value, z1=a) == -a ** 3 / (a * a - 1) ** 4


def test_weber_oddness():
    # the involution w -> -w maps the curve to itself with dX -> -dX
    w = trell.weber_tr(0, 3).value
    for a, b, c in [(2, 3, 5), (fmpq(1, 2), 7, fmpq(-3, 2))]:
        assert ev(w, z1=-a, z2=-b, z3=-c) == -ev(w, z1=a, z2=b, z3=c)


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1)])
def test_weber_structure(g, n):
    w = trell.weber_tr(g, n)
    assert w.is_symmetric()
    assert w.poles_ok()


def test_symmetric_reduction_w11():
    assert trell.symmetrize_w11_json()["matches_closed_form"]
    checks = trell.elementary_checks()
    assert checks["sum_e"] == 0
    assert str(checks["sum_3e2_minus_g2"]) == "-3/2*g2"
