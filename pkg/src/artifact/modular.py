"""Quasi-modular forms for SL(2, Z): Eisenstein q-series, the discriminant,
the Ramanujan derivation and a unitriangular basis of modular forms.

Polynomials live in Q[E2, E4, E6, b, bi]; the two trailing generators carry
the deformation parameter b = beta^2, bi = beta^-2 and are inert for every
operation in this module.
"""
from __future__ import annotations

import threading

import flint

from .exactcore import DomainError, TruncSeries, fmpq, scalar_str, ViolationError

MOD_SYMBOLS = ("E2", "E4", "E6", "b", "bi")
MOD_CTX = flint.fmpq_mpoly_ctx.get(MOD_SYMBOLS, "lex")
COEF_CTX = flint.fmpq_mpoly_ctx.get(("b", "bi"), "lex")
_E2, _E4, _E6, _B, _BI = MOD_CTX.gens()
_WEIGHTS = (2, 4, 6, 0, 0)


def _zero():
    return MOD_CTX.from_dict({})


class QuasiModularPoly:
    """Polynomial in E2, E4, E6 (coefficients possibly in Q[b, bi])."""

    __slots__ = ("p",)

    def __init__(self, p=None):
        if p is None:
            p = _zero()
        elif not isinstance(p, flint.fmpq_mpoly):
            p = MOD_CTX.from_dict({(0, 0, 0, 0, 0): fmpq(p)}) if p != 0 else _zero()
        self.p = p

    @classmethod
    def from_terms(cls, terms: dict):
        """terms: {(a, b, k): coeff} meaning coeff * E4^a E6^b E2^k."""
        d = {}
        for (a, b, k), c in terms.items():
            d[(k, a, b, 0, 0)] = fmpq(c) if not isinstance(c, fmpq) else c
        return cls(MOD_CTX.from_dict(d))

    def terms(self):
        """{(a, b, k): coeff} for beta-free polynomials."""
        out = {}
        for (k, a, b, x, y), c in self.p.to_dict().items():
            if x or y:
                raise DomainError("polynomial carries deformation parameters; use .p")
            out[(a, b, k)] = c
        return out

    def is_zero(self):
        return self.p.is_zero()

    def __add__(self, o):
        return QuasiModularPoly(self.p + _raw(o))

    __radd__ = __add__

    def __sub__(self, o):
        return QuasiModularPoly(self.p - _raw(o))

    def __rsub__(self, o):
        return QuasiModularPoly(_raw(o) - self.p)

    def __neg__(self):
        return QuasiModularPoly(-self.p)

    def __mul__(self, o):
        return QuasiModularPoly(self.p * _raw(o))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return QuasiModularPoly(self.p / fmpq(c) if not isinstance(c, fmpq) else self.p / c)

    def __pow__(self, n):
        return QuasiModularPoly(self.p ** n)

    def __eq__(self, o):
        try:
            return self.p == _raw(o)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(str(self.p))

    def __repr__(self):
        return f"QM({self.p})"

    def weights(self):
        return {sum(w * e for w, e in zip(_WEIGHTS, m)) for m in self.p.monoms()}

    def weight(self):
        """Common weight of a homogeneous polynomial (None for 0)."""
        ws = self.weights()
        if not ws:
            return None
        if len(ws) != 1:
            raise DomainError(f"inhomogeneous quasi-modular polynomial, weights {sorted(ws)}")
        return ws.pop()

    def depth(self):
        if self.p.is_zero():
            return 0
        return self.p.degrees()[0]

    def d_e2(self):
        return QuasiModularPoly(self.p.derivative("E2"))

    def integrate_e2(self):
        """Antiderivative in E2 with zero constant."""
        return QuasiModularPoly(self.p.integral("E2"))

    def e2_free_part(self):
        return QuasiModularPoly(self.p.subs({"E2": 0}))

    def to_json(self):
        out = []
        for (k, a, b, x, y), c in sorted(self.p.to_dict().items(), reverse=True):
            t = {"a": a, "b": b, "k": k, "coeff": scalar_str(c)}
            if x or y:
                t["beta2"] = x
                t["beta_m2"] = y
            out.append(t)
        return out


def _raw(o):
    if isinstance(o, QuasiModularPoly):
        return o.p
    if isinstance(o, flint.fmpq_mpoly):
        return o
    if isinstance(o, (int, fmpq)):
        return MOD_CTX.from_dict({(0,) * 5: fmpq(o)}) if o != 0 else _zero()
    raise TypeError


E2 = QuasiModularPoly(_E2)
E4 = QuasiModularPoly(_E4)
E6 = QuasiModularPoly(_E6)
DELTA = QuasiModularPoly((_E4 ** 3 - _E6 ** 2) / 1728)

_DE2 = (_E2 ** 2 - _E4) / 12
_DE4 = (_E2 * _E4 - _E6) / 3
_DE6 = (_E2 * _E6 - _E4 ** 2) / 2


def d_tau(p: QuasiModularPoly) -> QuasiModularPoly:
    """Ramanujan derivation q d/dq on Q[E2, E4, E6]."""
    x = p.p
    return QuasiModularPoly(x.derivative("E2") * _DE2 + x.derivative("E4") * _DE4
                            + x.derivative("E6") * _DE6)


# ---------------------------------------------------------------- q-series

_LOCK = threading.Lock()
_EIS_CACHE: dict = {}
_EIS_COEF = {1: -24, 2: 240, 3: -504}


def eisenstein(n: int, order: int) -> TruncSeries:
    """E_{2n}(q) to O(q^order), n in {1, 2, 3}."""
    if n not in _EIS_COEF:
        raise DomainError("eisenstein index must be 1, 2 or 3")
    if order < 1:
        raise DomainError("order must be >= 1")
    key = (n, order)
    with _LOCK:
        hit = _EIS_CACHE.get(key)
    if hit is not None:
        return hit
    c = _EIS_COEF[n]
    coeffs = [fmpq(1)] + [fmpq(c * int(flint.fmpz(k).divisor_sigma(2 * n - 1))) for k in range(1, order)]
    s = TruncSeries(coeffs, 0, order, var="q")
    with _LOCK:
        _EIS_CACHE.setdefault(key, s)
    return s


def delta_q(order: int) -> TruncSeries:
    """Discriminant q * prod(1 - q^k)^24, cross-checked against (E4^3 - E6^2)/1728."""
    if order < 1:
        raise DomainError("order must be >= 1")
    prod = TruncSeries([1], 0, order, var="q")
    for k in range(1, order):
        f = TruncSeries([1] + [0] * (k - 1) + [-1], 0, order, var="q")
        prod = prod * (f ** 24).truncate(order)
    eta24 = prod.shift(1).truncate(order)
    e4, e6 = eisenstein(2, order), eisenstein(3, order)
    alt = (e4 * e4 * e4 - e6 * e6).scale(fmpq(1, 1728))
    if alt != eta24:
        raise ViolationError("eta product and Eisenstein discriminant disagree")
    return eta24


class _PowerCache:
    def __init__(self, order):
        self.order = order
        self.base = [eisenstein(1, order), eisenstein(2, order), eisenstein(3, order)]
        self.pw = [[TruncSeries([1], 0, order, var="q")] for _ in range(3)]

    def get(self, i, e):
        lst = self.pw[i]
        while len(lst) <= e:
            lst.append(lst[-1] * self.base[i])
        return lst[e]


def qexpand(p: QuasiModularPoly, order: int, coeff_ring: str = "auto") -> TruncSeries:
    """q-expansion to O(q^order).

    Coefficients are fmpq, or fmpq_mpoly in (b, bi) when the input carries the
    deformation parameters.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    x = p.p if isinstance(p, QuasiModularPoly) else _raw(p)
    groups: dict = {}
    for (k, a, b, u, v), c in x.to_dict().items():
        groups.setdefault((k, a, b), {})[(u, v)] = c
    deformed = any(set(g) != {(0, 0)} for g in groups.values())
    pc = _PowerCache(order)
    acc = [0] * order
    for (k, a, b), cg in groups.items():
        s = pc.get(0, k) * pc.get(1, a) * pc.get(2, b)
        coef = COEF_CTX.from_dict(cg) if deformed else cg[(0, 0)]
        for e in range(order):
            ce = s[e]
            if ce != 0:
                acc[e] = acc[e] + coef * ce
    return TruncSeries(acc, 0, order, var="q")


# ---------------------------------------------------------------- modular basis

class ModularBasis:
    def __init__(self, weight, elements):
        self.weight = weight
        self.elements = elements

    @property
    def dim(self):
        return len(self.elements)

    def to_json(self):
        return {"weight": self.weight, "dim": self.dim,
                "elements": [e.to_json() for e in self.elements]}


def modular_dim(weight: int) -> int:
    if weight < 4 or weight % 2:
        raise DomainError("weight must be an even integer >= 4")
    b0 = 0 if weight % 4 == 0 else 1
    a0 = (weight - 6 * b0) // 4
    return a0 // 3 + 1


def vj_basis(weight: int) -> ModularBasis:
    """V_j = E4^(a0-3j) E6^b0 Delta^j, j = 0..dim-1, with V_j = q^j (1 + O(q))."""
    if weight < 4 or weight % 2:
        raise DomainError("weight must be an even integer >= 4")
    b0 = 0 if weight % 4 == 0 else 1
    a0 = (weight - 6 * b0) // 4
    dim = a0 // 3 + 1
    els = [E4 ** (a0 - 3 * j) * E6 ** b0 * DELTA ** j for j in range(dim)]
    return ModularBasis(weight, els)


def gap_dim_formula(g: int) -> int:
    """Closed form of dim M_{14(g-1)}."""
    return (7 * g - 4) // 6 if g % 2 == 0 else (7 * g - 1) // 6
