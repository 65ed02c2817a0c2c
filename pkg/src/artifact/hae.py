"""Holomorphic anomaly recursion for the genus expansion.

State space: Q[E2, E4, E6][Y0, Y0^-1] with Y0 = xi/E4.  The nu-derivative
acts as

    d_nu E_{2k} = Y0 E4 * D_tau E_{2k},      d_nu Y0 = -Y0^2 (7 E2 E4 + 5 E6)/12,

and for g >= 2 the free energy is F_g = Y0^(2g-2) P_g with P_g quasi-modular
of weight 14(g-1).  The E2-independent part of P_g is fixed by demanding
nu^(2g-2) F_g = kappa_g + O(q^d_g), d_g = dim M_{14(g-1)}; the remaining
vanishing conditions q^1 .. q^(2g-3) are then checked, not imposed.

With ``beta_mode`` every coefficient is a polynomial in b = beta^2 and
bi = beta^-2 reduced modulo b*bi = 1.
"""
from __future__ import annotations

from functools import lru_cache

import flint

from .exactcore import (DomainError, SingularSystemError, TruncSeries, ViolationError,
                        bernoulli, factorial, fmpq, scalar_str)
from .modular import (COEF_CTX, DELTA, E2, E4, E6, MOD_CTX, QuasiModularPoly, d_tau,
                      delta_q, eisenstein, qexpand, vj_basis)

_B = QuasiModularPoly(MOD_CTX.gens()[3])
_BI = QuasiModularPoly(MOD_CTX.gens()[4])


def reduce_beta(p: QuasiModularPoly) -> QuasiModularPoly:
    """Normal form modulo b*bi = 1 (no monomial contains both)."""
    d = {}
    changed = False
    for (k, a, bb, u, v), c in p.p.to_dict().items():
        m = min(u, v)
        if m:
            changed = True
        key = (k, a, bb, u - m, v - m)
        d[key] = d.get(key, 0) + c
    if not changed:
        return p
    return QuasiModularPoly(MOD_CTX.from_dict({k: c for k, c in d.items() if c != 0}))


def swap_beta(p: QuasiModularPoly) -> QuasiModularPoly:
    """beta -> 1/beta."""
    d = {(k, a, bb, v, u): c for (k, a, bb, u, v), c in p.p.to_dict().items()}
    return QuasiModularPoly(MOD_CTX.from_dict(d))


def at_beta_one(p: QuasiModularPoly) -> QuasiModularPoly:
    return QuasiModularPoly(p.p.subs({"b": 1, "bi": 1}))


class GradedQM:
    """Finite sum  sum_m Y0^m * P_m  with P_m in Q[E2, E4, E6] (b, bi allowed)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: p for m, p in (terms or {}).items() if not p.is_zero()}

    @classmethod
    def single(cls, m, p):
        return cls({m: p})

    def __add__(self, o):
        t = dict(self.terms)
        for m, p in o.terms.items():
            t[m] = t[m] + p if m in t else p
        return GradedQM(t)

    def __neg__(self):
        return GradedQM({m: -p for m, p in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, GradedQM):
            t: dict = {}
            for m1, p1 in self.terms.items():
                for m2, p2 in o.terms.items():
                    pr = reduce_beta(p1 * p2)
                    t[m1 + m2] = t[m1 + m2] + pr if m1 + m2 in t else pr
            return GradedQM(t)
        if isinstance(o, QuasiModularPoly):
            return GradedQM({m: reduce_beta(p * o) for m, p in self.terms.items()})
        return GradedQM({m: p * fmpq(o) if isinstance(o, int) else p * o for m, p in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, GradedQM):
            return NotImplemented
        return (self - o).is_zero()

    def is_zero(self):
        return not self.terms

    def grades(self):
        return sorted(self.terms)

    def grade(self, m):
        return self.terms.get(m, QuasiModularPoly())

    def pure(self, m):
        """The coefficient of Y0^m, asserting nothing else is present."""
        extra = [k for k in self.terms if k != m]
        if extra:
            raise ViolationError(f"expected pure grade {m}, found grades {sorted(self.terms)}")
        return self.grade(m)

    def d_e2(self):
        return GradedQM({m: p.d_e2() for m, p in self.terms.items()})

    def to_json(self):
        return [{"Y0_power": m, "poly": p.to_json()} for m, p in sorted(self.terms.items())]


_DY0 = (E2 * E4 * 7 + E6 * 5) / 12


def dnu(x: GradedQM) -> GradedQM:
    """nu-derivative: Y0^m P -> Y0^(m+1) [ -m (7E2E4+5E6)/12 P + E4 D_tau P ]."""
    t = {}
    for m, p in x.terms.items():
        t[m + 1] = reduce_beta(_DY0 * p * (-m) + E4 * d_tau(p))
    return GradedQM(t)


def seed_f1() -> GradedQM:
    """nu-derivative of the genus-one free energy."""
    return GradedQM.single(1, -(E2 * E4 + E6) / 24)


def seed_f1_beta() -> GradedQM:
    """Deformed version: -Y0 (E2E4 - E6)/24 - (b + bi)/24 * Y0 E6."""
    return GradedQM.single(1, reduce_beta(-(E2 * E4 - E6) / 24 - (_B + _BI) * E6 / 24))


# ---------------------------------------------------------------- constants

def kappa(g: int) -> fmpq:
    """B_{2g} / (4 g (g-1))."""
    return bernoulli(2 * g) / (4 * g * (g - 1))


def _bhat(m: int) -> fmpq:
    return (1 - fmpq(2) ** (1 - m)) * bernoulli(m) / factorial(m)


def kappa_beta_terms(g: int) -> dict:
    """{power of beta: coefficient} of -(2g-3)! sum_h Bh_{2h} Bh_{2g-2h} beta^(2g-4h)."""
    out: dict = {}
    f = factorial(2 * g - 3)
    for h in range(g + 1):
        e = 2 * g - 4 * h
        out[e] = out.get(e, 0) - f * _bhat(2 * h) * _bhat(2 * g - 2 * h)
    return {e: c for e, c in out.items() if c != 0}


def kappa_beta(g: int) -> QuasiModularPoly:
    """kappa_g^(beta) as a polynomial in b = beta^2, bi = beta^-2."""
    p = QuasiModularPoly()
    for e, c in kappa_beta_terms(g).items():
        k = e // 2
        term = _B ** k if k > 0 else (_BI ** (-k) if k < 0 else QuasiModularPoly(1))
        p = p + term * c
    return p


# ---------------------------------------------------------------- state

class HaeState:
    """Recursion state: F_g for g = 2..gmax and the ambiguity coefficients."""

    def __init__(self, gmax: int = 6, beta_mode: bool = False):
        if gmax < 2:
            raise DomainError("gmax must be >= 2")
        self.gmax = gmax
        self.beta_mode = beta_mode
        self.seed_dnu_F1 = seed_f1_beta() if beta_mode else seed_f1()
        self.F: dict = {}
        self.dF: dict = {1: self.seed_dnu_F1}
        self.alphas: dict = {}
        self.p_part: dict = {}
        self.rhs: dict = {}
        self.metadata = {"F1_additive_constant": "0",
                         "beta_mode": beta_mode}

    def dF_of(self, h):
        if h not in self.dF:
            self.dF[h] = dnu(self.F[h])
        return self.dF[h]

    def solve(self, upto=None):
        upto = upto or self.gmax
        for g in range(2, upto + 1):
            if g not in self.F:
                hae_step(self, g)
                fix_ambiguity(self, g)
        return self


def hae_rhs(state: HaeState, g: int) -> GradedQM:
    """-(1/24) [ d^2 F_{g-1} + sum_{h=1}^{g-1} dF_h dF_{g-h} ]."""
    acc = dnu(state.dF_of(g - 1))
    for h in range(1, g):
        acc = acc + state.dF_of(h) * state.dF_of(g - h)
    return acc * fmpq(-1, 24)


def hae_step(state: HaeState, g: int) -> QuasiModularPoly:
    """E2-dependent part of P_g (antiderivative in E2 with zero constant)."""
    if g < 2:
        raise DomainError("g must be >= 2")
    for h in range(2, g):
        if h not in state.F:
            raise DomainError(f"F_{h} missing; solve lower genera first")
    rhs = hae_rhs(state, g)
    dp = rhs.pure(2 * g - 2)
    p = dp.integrate_e2()
    state.rhs[g] = rhs
    state.p_part[g] = p
    return p


def nu_y0_series(order: int) -> TruncSeries:
    """nu * Y0 = (E2E4 - E6) / (720 Delta(q)) as a q-series."""
    num = qexpand(E2 * E4 - E6, order + 1).shift(-1).truncate(order)
    den = delta_q(order + 1).shift(-1).truncate(order)
    return (num / den).scale(fmpq(1, 720))


def _coef_norm(c):
    """Reduce a coefficient (fmpq or poly in b, bi) modulo b*bi = 1."""
    if isinstance(c, flint.fmpq_mpoly):
        d = {}
        for (u, v), x in c.to_dict().items():
            m = min(u, v)
            d[(u - m, v - m)] = d.get((u - m, v - m), 0) + x
        return COEF_CTX.from_dict({k: x for k, x in d.items() if x != 0})
    return c


def _is_zero_coef(c):
    if isinstance(c, flint.fmpq_mpoly):
        return _coef_norm(c).is_zero()
    return c == 0


def scaled_series(state: HaeState, P: QuasiModularPoly, g: int, order: int) -> TruncSeries:
    """q-expansion of (nu Y0)^(2g-2) P, coefficients reduced mod b*bi = 1."""
    s = qexpand(P, order) * (nu_y0_series(order) ** (2 * g - 2)).truncate(order)
    return s.map(_coef_norm)


def fix_ambiguity(state: HaeState, g: int):
    """Solve for alpha_j in P_g = p_g + sum alpha_j V_j from the weak gap."""
    if g not in state.p_part:
        hae_step(state, g)
    basis = vj_basis(14 * (g - 1))
    d = basis.dim
    pg = state.p_part[g]
    known = scaled_series(state, pg, g, d)
    cols = [scaled_series(state, v, g, d) for v in basis.elements]
    target = kappa_beta(g) if state.beta_mode else QuasiModularPoly(kappa(g))
    tgt = [_coef_norm(_const_coef(target)) if i == 0 else 0 for i in range(d)]
    # unitriangular: column j starts at q^j with coefficient 1
    alphas = [0] * d
    for i in range(d):
        if cols[i][i] != 1:
            raise SingularSystemError(f"basis element {i} is not normalized")
        r = tgt[i] - known[i]
        for j in range(i):
            r = r - alphas[j] * cols[j][i]
        alphas[i] = _coef_norm(r)
    P = pg
    for a, v in zip(alphas, basis.elements):
        P = P + v * _lift_coef(a)
    P = reduce_beta(P)
    if state.beta_mode and not (reduce_beta(swap_beta(P)) == P):
        raise ViolationError(f"F_{g} is not symmetric under beta -> 1/beta")
    state.alphas[g] = alphas
    state.F[g] = GradedQM.single(2 * g - 2, P)
    # consistency: d/dE2 of the stored F_g equals the anomaly right side
    if not (state.F[g].d_e2() == state.rhs[g]):
        raise ViolationError(f"anomaly equation fails for F_{g}")
    return alphas


def _const_coef(p: QuasiModularPoly):
    """Coefficient in Q[b, bi] of the E-free part."""
    d = {}
    for (k, a, bb, u, v), c in p.p.to_dict().items():
        if k == 0 and a == 0 and bb == 0:
            d[(u, v)] = c
    if not d:
        return fmpq(0)
    if set(d) == {(0, 0)}:
        return d[(0, 0)]
    return COEF_CTX.from_dict(d)


def _lift_coef(c):
    if isinstance(c, flint.fmpq_mpoly):
        return QuasiModularPoly(MOD_CTX.from_dict({(0, 0, 0, u, v): x for (u, v), x in c.to_dict().items()}))
    return QuasiModularPoly(c)


class GapReport:
    def __init__(self, g, constant, vanishing, tail, tail_start):
        self.g = g
        self.constant = constant
        self.vanishing = vanishing
        self.tail = tail
        self.tail_start = tail_start

    def to_json(self):
        return {"g": self.g, "constant": _cstr(self.constant),
                "vanishing_powers": self.vanishing,
                "tail": [[self.tail_start + i, _cstr(c)] for i, c in enumerate(self.tail)]}


def _cstr(c):
    if isinstance(c, flint.fmpq_mpoly):
        return str(c)
    return scalar_str(c)


def verify_strong_gap(state: HaeState, g: int, depth: int = 6) -> GapReport:
    """Expand nu^(2g-2) F_g to q^(2g-2+depth) and check the gap structure."""
    if g not in state.F:
        raise DomainError(f"F_{g} not computed")
    order = 2 * g - 2 + depth
    s = scaled_series(state, state.F[g].pure(2 * g - 2), g, order)
    expect = _coef_norm(_const_coef(kappa_beta(g))) if state.beta_mode else kappa(g)
    if not _is_zero_coef(s[0] - expect):
        raise ViolationError(f"constant term of nu^{2*g-2} F_{g} is {s[0]}, expected {expect}",
                             {"g": g, "power": 0})
    for k in range(1, 2 * g - 2):
        if not _is_zero_coef(s[k]):
            raise ViolationError(f"gap violated for g={g} at q^{k}", {"g": g, "power": k})
    tail = [s[k] for k in range(2 * g - 2, order)]
    return GapReport(g, s[0], list(range(1, 2 * g - 2)), tail, 2 * g - 2)


def solve(gmax: int = 6, beta_mode: bool = False) -> HaeState:
    return HaeState(gmax, beta_mode).solve()


# ---------------------------------------------------------------- Weierstrass form

SGG_CTX = flint.fmpq_mpoly_ctx.get(("S", "g2", "g3"), "lex")


def to_weierstrass_form(P: QuasiModularPoly, g: int):
    """Return N with F_g = N(S, g2, g3) / Delta^(2g-2), Delta = g2^3 - 27 g3^2.

    Uses E2 -> 3 S w^2, E4 -> (3/4) g2 w^4, E6 -> (27/8) g3 w^6 with
    w = omega/pi, and Y0^2 = -(1/4) (2 pi/omega)^14 / Delta^2.
    """
    S, g2, g3 = SGG_CTX.gens()
    out = SGG_CTX.from_dict({})
    for (k, a, b, u, v), c in P.p.to_dict().items():
        if u or v:
            raise DomainError("deformed polynomial")
        out += c * (3 * S) ** k * (fmpq(3, 4) * g2) ** a * (fmpq(27, 8) * g3) ** b
    return out * (-(2 ** 12)) ** (g - 1)
