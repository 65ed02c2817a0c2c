import pytest

from artifact import virasoro as V
from artifact.exactcore import DomainError, ViolationError, fmpq
from artifact.virasoro import CC, NU, Partition, PBWKey

c1 = CC - 1


def key(lam=(), m0=0, m1=0):
    return PBWKey(Partition(tuple(lam)), m0, m1)


def as_dict(vec):
    return {PBWKey.from_word(w): c for w, c in vec.entries.items()}


def test_g1():
    assert as_dict(V.whittaker_descendant(1)) == {key((1,)): fmpq(2, 3) + 0 * NU, key(m1=1): NU * fmpq(16, 3)}


def test_g2():
    want = {key((2,)): fmpq(-7, 6), key((1, 1)): fmpq(2, 9), key((1,), m1=1): NU * fmpq(32, 9),
            key(m0=1): NU * fmpq(-103, 9), key(m1=2): (NU ** 2 * 256 + 57) / 18}
    got = as_dict(V.whittaker_descendant(2))
    assert set(got) == set(want)
    for k, v in want.items():
        assert got[k] == v + 0 * NU


def test_g3():
    want = {
        key((3,)): fmpq(343, 135) + 0 * NU,
        key((2, 1)): fmpq(-7, 9) + 0 * NU,
        key((1, 1, 1)): fmpq(4, 81) + 0 * NU,
        key((2,), m1=1): NU * fmpq(-56, 9),
        key((1, 1), m1=1): NU * fmpq(32, 27),
        key((1,), m0=1): NU * fmpq(-206, 27),
        key((1,), m1=2): (NU ** 2 * 256 + 57) / 27,
        key(m0=1, m1=1): (NU ** 2 * 515 + 146) * fmpq(-16, 135),
        key(m1=3): NU * (NU ** 2 * 256 + 171) * fmpq(8, 81),
        key((1,)): NU * fmpq(14648, 405),
        key(m1=1): (NU ** 2 * 31636 + 4401 - CC * 1029) * fmpq(4, 405),
    }
    assert as_dict(V.whittaker_descendant(3)) == want


def expected_U():
    return {
        "ln": NU ** 2 + fmpq(1, 30) - c1 * fmpq(7, 360),
        1: NU * (NU ** 2 * 94 + 17) / 2 - NU * c1 * fmpq(77, 24),
        2: (NU ** 4 * 38585 + NU ** 2 * 18385 + 336) / 10
        - c1 * (NU ** 2 * 1433520 - CC * 14497 + 124825) * fmpq(7, 17280),
        3: NU * (NU ** 4 * 5326258 + NU ** 2 * 5019530 + 541269) / 10
        - c1 * NU * (NU ** 2 * 25241040 - CC * 880567 + 8708575) * fmpq(49, 8640),
        4: (NU ** 6 * 31386901 + NU ** 4 * 50078328 + NU ** 2 * 14438609 + 188160) * 3
        + c1 ** 2 * (NU ** 2 * 60185465 + 7172941) * fmpq(49, 960)
        - c1 * (NU ** 4 * 686028420 + NU ** 2 * 509742465 + 21788387) * fmpq(7, 120)
        - c1 ** 3 * fmpq(791845439, 34560),
        5: NU * (NU ** 6 * 32160819372 + NU ** 4 * 78779679122 + NU ** 2 * 45102923992 + 3752724735) * fmpq(3, 5)
        - c1 * NU * (NU ** 4 * 51339657369 + NU ** 2 * 72168517621 + 12853630497) * fmpq(7, 30)
        + c1 ** 2 * NU * (NU ** 2 * 1354433276168 - CC * 34511035493 + 636095673641) * fmpq(7, 5760),
    }


def test_block_coefficients_low():
    got = V.block_coeffs(3)
    want = expected_U()
    for k in ("ln", 1, 2, 3):
        assert got[k] == want[k]


@pytest.mark.slow
def test_block_coefficients_through_five():
    from artifact.painleve import _block_coeffs
    got = _block_coeffs(5)
    want = expected_U()
    for k in want:
        assert got[k] == want[k], k


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_support_rules(k):
    rep = V.check_support(k)
    assert rep["deg_bound"] and rep["parity"] and rep["deg1_bound"]
    assert V.check_nu0_parity(k)


@pytest.mark.parametrize("k,n", [(1, 7), (2, 7), (3, 8)])
def test_higher_annihilators(k, n):
    assert V.check_higher_relation(k, n)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_half_integer_realization(s):
    rep = V.check_half_integer_realization(s)
    assert rep["defects"] == []
    assert rep["pairs_checked"] == s * (2 * s - 1)


def test_rank_five_halves_operators():
    ops = V.check_half_integer_realization(3)["operators"]
    assert ops["5"] == "-c5_2^2"
    assert ops["4"] == "-2*c3_2*c5_2"
    assert ops["3"] == "-2*c1_2*c5_2 - c3_2^2"
    assert ops["2"] == "-2*c1_2*c3_2 + (1/2*c5_2)*d/dc1_2"
    assert ops["1"] == "-c1_2^2 + (3/2*c5_2)*d/dc3_2 + (1/2*c3_2)*d/dc1_2"
    assert ops["0"] == "(5/2*c5_2)*d/dc5_2 + (3/2*c3_2)*d/dc3_2 + (1/2*c1_2)*d/dc1_2"


def test_realization_bounds():
    with pytest.raises(DomainError):
        V.check_half_integer_realization(0)


def test_json_is_deterministic():
    a = V.whittaker_descendant(2).to_json()
    b = V.whittaker_descendant(2).to_json()
    assert a == b
    assert all(isinstance(r["coeff"], str) for r in a)
