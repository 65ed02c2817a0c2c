import pytest

from artifact import hae
from artifact.exactcore import bernoulli, fmpq
from artifact.modular import COEF_CTX, E2, E4, E6, MOD_CTX, QuasiModularPoly

B, BI = COEF_CTX.gens()


@pytest.fixture(scope="module")
def state():
    return hae.HaeState(6).solve()


@pytest.fixture(scope="module")
def beta_state():
    return hae.HaeState(3, beta_mode=True).solve()


def P2_expected():
    return -(E4 ** 2 * E2 ** 3 * 25 + E4 * E6 * E2 ** 2 * 165
             + (E4 ** 3 * 14 + E6 ** 2 * 11) * E2 * 15 + E4 ** 2 * E6 * 299) / 207360


def P3_expected():
    num = (E4 ** 4 * E2 ** 6 * 525 + E4 ** 3 * E6 * E2 ** 5 * 8400
           + E4 ** 2 * (E4 ** 3 * 56 + E6 ** 2 * 159) * E2 ** 4 * 315
           + E4 * E6 * (E4 ** 3 * 3121 + E6 ** 2 * 1815) * E2 ** 3 * 70
           + (E4 ** 6 * 8023 + E4 ** 3 * E6 ** 2 * 39964 + E6 ** 4 * 4400) * E2 ** 2 * 21
           + E4 ** 2 * E6 * (E4 ** 3 * 24273 + E6 ** 2 * 22463) * E2 * 42
           + (E4 ** 6 * 171350 + E4 ** 3 * E6 ** 2 * 1080611 + E6 ** 4 * 239470) * E4)
    return num / 5016453120


def test_anomaly_derivative_g2(state):
    expected = -(E2 ** 2 * E4 ** 2 * 5 + E2 * E4 * E6 * 22 + E4 ** 3 * 14 + E6 ** 2 * 11) / 13824
    assert state.F[2].pure(2).d_e2() == expected


def test_p2_and_p3(state):
    assert state.F[2].pure(2) == P2_expected()
    assert state.F[3].pure(4) == P3_expected()


def test_ambiguities(state):
    assert state.alphas[2] == [fmpq(-299, 207360)]
    assert state.alphas[3] == [fmpq(1491431, 5016453120), fmpq(-222793, 414720), fmpq(3421, 24)]


def test_weight_and_depth(state):
    for g in range(2, 7):
        P = state.F[g].pure(2 * g - 2)
        assert P.weight() == 14 * (g - 1)
        assert P.depth() == 3 * (g - 1)


def test_kappa_is_bernoulli():
    for g in range(2, 9):
        assert hae.kappa(g) == bernoulli(2 * g) / (4 * g * (g - 1))


def test_gap_tails(state):
    r2 = hae.verify_strong_gap(state, 2, 4)
    assert r2.constant == fmpq(-1, 240)
    assert r2.tail == [fmpq(168, 5), fmpq(70353, 2), fmpq(25505004, 5), fmpq(1790001618, 5)]
    r3 = hae.verify_strong_gap(state, 3, 4)
    assert r3.constant == fmpq(1, 1008)
    assert r3.tail == [564480, 1614901401, 614954090130, fmpq(778563472560150, 7)]


@pytest.mark.parametrize("g", [2, 3, 4, 5, 6])
def test_strong_gap_all_genera(state, g):
    rep = hae.verify_strong_gap(state, g, 2)
    assert rep.constant == hae.kappa(g)
    assert rep.vanishing == list(range(1, 2 * g - 2))


def test_beta_f2_display(beta_state):
    b, bi = QuasiModularPoly(MOD_CTX.gens()[3]), QuasiModularPoly(MOD_CTX.gens()[4])
    expected = -(E2 ** 3 * E4 ** 2 * fmpq(5, 41472)
                 + (b * 2 + 7 + bi * 2) * E2 ** 2 * E4 * E6 / 13824
                 + (b * 6 - 5 + bi * 6) * E2 * E4 ** 3 / 6912
                 + (b * b + b * 8 - 7 + bi * 8 + bi * bi) * E2 * E6 ** 2 / 13824
                 + (b * b * 237 - b * 330 + 485 - bi * 330 + bi * bi * 237) * E4 ** 2 * E6 / 207360)
    assert beta_state.F[2].pure(2) == expected


def test_beta_f2_expansion(beta_state):
    s = hae.scaled_series(beta_state, beta_state.F[2].pure(2), 2, 3)
    assert s[0] == -(B ** 2 * 7 + 10 + BI ** 2 * 7) / 5760
    assert hae._is_zero_coef(s[1])
    assert s[2] == (B ** 2 * 14497 + BI ** 2 * 14497 - B * 39600 - BI * 39600 + 52510) * fmpq(7, 480)


def test_beta_one_reduction(beta_state, state):
    for g in (2, 3):
        P = hae.at_beta_one(beta_state.F[g].pure(2 * g - 2))
        assert P == state.F[g].pure(2 * g - 2)


def test_beta_symmetry(beta_state):
    for g in (2, 3):
        P = beta_state.F[g].pure(2 * g - 2)
        assert hae.reduce_beta(hae.swap_beta(P)) == P
