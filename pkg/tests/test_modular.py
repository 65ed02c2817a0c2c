import random

import pytest

from artifact.exactcore import DomainError, fmpq
from artifact.modular import (DELTA, E2, E4, E6, QuasiModularPoly, d_tau, delta_q, eisenstein,
                              gap_dim_formula, modular_dim, qexpand, vj_basis)

N = 12


def test_eisenstein_leading_coefficients():
    assert [eisenstein(1, 4)[k] for k in range(4)] == [1, -24, -72, -96]
    assert [eisenstein(2, 3)[k] for k in range(3)] == [1, 240, 2160]
    assert [eisenstein(3, 3)[k] for k in range(3)] == [1, -504, -16632]


def test_delta_product_matches_eisenstein():
    d = delta_q(N)
    assert [d[k] for k in range(1, 6)] == [1, -24, 252, -1472, 4830]
    assert qexpand(DELTA, N) == d


@pytest.mark.parametrize("p", [E2, E4, E6, E2 * E4, E4 ** 2 * E6 - E2 ** 3])
def test_ramanujan_derivation_matches_q_derivative(p):
    lhs = qexpand(d_tau(p), N)
    rhs = qexpand(p, N).theta()
    assert lhs == rhs


def test_weight_and_depth():
    p = E2 ** 3 * E4 ** 2 + E4 * E6 * E2 ** 2
    assert p.weight() == 14
    assert p.depth() == 3
    q = p + E4 ** 2 * E6
    assert q.d_e2().integrate_e2() == q - q.e2_free_part()


def test_dimension_formula_agrees():
    for g in range(2, 12):
        assert modular_dim(14 * (g - 1)) == gap_dim_formula(g)
    with pytest.raises(DomainError):
        modular_dim(7)


def test_vj_basis_is_unitriangular():
    for w in (14, 28, 42, 56):
        b = vj_basis(w)
        assert b.dim == modular_dim(w)
        for j, v in enumerate(b.elements):
            s = qexpand(v, b.dim + 1)
            assert s.valuation == j and s[j] == 1


def test_qexpand_linear_seeded():
    rng = random.Random(1)
    mons = [E2, E4, E6, E2 * E4, E6 * E6, E4 ** 3]
    for _ in range(10):
        a, b = (fmpq(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(2))
        p, q = rng.sample(mons, 2)
        assert qexpand(p * a + q * b, 8) == qexpand(p, 8).scale(a) + qexpand(q, 8).scale(b)
        assert qexpand(p * q, 8) == qexpand(p, 8) * qexpand(q, 8)


def test_from_terms_roundtrip():
    p = QuasiModularPoly.from_terms({(2, 1, 0): fmpq(-299, 207360), (1, 1, 2): 3})
    assert p.terms() == {(2, 1, 0): fmpq(-299, 207360), (1, 1, 2): fmpq(3)}
