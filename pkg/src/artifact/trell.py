"""Topological recursion on the rescaled elliptic curve Y^2 = 4X^3 - 4X/3 + U
as a power series in eps = nu*Lambda, plus the Weber-curve recursion and the
symmetric-function reduction of the elliptic W_{1,1}.

Coordinates: X = zeta^2 - 2/3 on the degenerate curve, so every series
coefficient is a rational function of the uniformizers zeta_i with poles only
at zeta_i in {0, 1, -1} (and the diagonal for W_{0,2}^[0]).  Differentials
are stored by their coefficient of d zeta_1 ... d zeta_n.

Recursion used for 2g - 2 + n >= 1 (z = zeta, K = kernel, R = the usual
quadratic recursion input, F = R / (2 Y dX)):

    W = -res_{z=z1} K R - sum_{j>=2} res_{z=+-z_j} K R - (dX_1 / (Y_1 w_A)) oint_A F

with K = int_{inf}^{z} W_{0,2}(z_1, .) and w_A the A-period of dX/Y.  This is
the residue theorem on the torus; the ramification points never enter, so
each eps-order is an exact rational computation.  The A-cycle is the small
circle around zeta = 1 with (1/2 pi i) oint_A = -res_{zeta=1}.
"""
from __future__ import annotations

import itertools
import re
import math
import threading

import flint

from .exactcore import (ConsistencyError, DomainError, TruncSeries, ViolationError,
                        bernoulli, fmpq, scalar_str)

NVARS = 8
VNAMES = ("z",) + tuple(f"z{i}" for i in range(1, NVARS))
ZCTX = flint.fmpq_mpoly_ctx.get(VNAMES, "lex")
ZG = ZCTX.gens()
_P0 = ZCTX.from_dict({})
_P1 = ZCTX.from_dict({(0,) * NVARS: 1})


def _pconst(c):
    c = fmpq(c)
    return ZCTX.from_dict({(0,) * NVARS: c}) if c != 0 else _P0


# ---------------------------------------------------------------- factored rationals

def _norm_linear(coefs, const):
    """Normalize a linear form sum c_i x_i + const so the first variable has coefficient 1.

    Returns (key, scale) with form = scale * poly(key); key None for a constant form.
    """
    items = sorted((i, fmpq(c)) for i, c in coefs.items() if c != 0)
    if not items:
        return None, fmpq(const)
    lead = items[0][1]
    key = (tuple((i, c / lead) for i, c in items), fmpq(const) / lead)
    return key, lead


_FPOLY: dict = {}


def _fpoly(key):
    p = _FPOLY.get(key)
    if p is None:
        terms, const = key
        p = _pconst(const)
        for i, c in terms:
            p = p + ZG[i] * c
        _FPOLY[key] = p
    return p


def _fvars(key):
    return {i for i, _ in key[0]}


def lin(var, const=0, other=None, sign=1):
    """Key for x_var - const, or x_var - sign * x_other (var < other keeps the scale 1)."""
    if other is None:
        return _norm_linear({var: 1}, -fmpq(const))[0]
    return _norm_linear({var: 1, other: -sign}, 0)[0]


class FR:
    """num / prod f^e with f linear forms in the variables."""

    __slots__ = ("num", "den")

    def __init__(self, num=None, den=None):
        self.num = _P0 if num is None else num
        self.den = {k: e for k, e in (den or {}).items() if e} if not self.num.is_zero() else {}

    @classmethod
    def const(cls, c):
        return cls(_pconst(c))

    @classmethod
    def var(cls, i):
        return cls(ZG[i])

    def is_zero(self):
        return self.num.is_zero()

    def __neg__(self):
        return FR(-self.num, self.den)

    def scale(self, c):
        return FR(self.num * fmpq(c), self.den)

    def __mul__(self, o):
        if not isinstance(o, FR):
            return self.scale(o)
        if self.is_zero() or o.is_zero():
            return FR()
        d = dict(self.den)
        for k, e in o.den.items():
            d[k] = d.get(k, 0) + e
        return FR(self.num * o.num, d)

    __rmul__ = __mul__

    def __add__(self, o):
        if not isinstance(o, FR):
            o = FR.const(o)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        d = {}
        for k in set(self.den) | set(o.den):
            d[k] = max(self.den.get(k, 0), o.den.get(k, 0))
        n1 = self.num
        for k, e in d.items():
            m = e - self.den.get(k, 0)
            if m:
                n1 = n1 * _fpoly(k) ** m
        n2 = o.num
        for k, e in d.items():
            m = e - o.den.get(k, 0)
            if m:
                n2 = n2 * _fpoly(k) ** m
        return FR(n1 + n2, d)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-o)

    def div_factor(self, key, e=1):
        d = dict(self.den)
        d[key] = d.get(key, 0) + e
        return FR(self.num, d)

    def simplify(self):
        num = self.num
        if num.is_zero():
            return FR()
        den = {}
        for k, e in self.den.items():
            f = _fpoly(k)
            while e > 0:
                q, r = divmod(num, f)
                if not r.is_zero():
                    break
                num = q
                e -= 1
            if e:
                den[k] = e
        return FR(num, den)

    def subs(self, mapping):
        """Simultaneous substitution x_i -> sum c_j x_j + const.

        mapping: {i: (dict j -> c, const)}; unmapped variables stay.
        """
        images = []
        forms = {}
        for i in range(NVARS):
            if i in mapping:
                cs, k0 = mapping[i]
            else:
                cs, k0 = {i: 1}, 0
            forms[i] = (cs, fmpq(k0))
            p = _pconst(k0)
            for j, c in cs.items():
                p = p + ZG[j] * c
            images.append(p)
        num = self.num.compose(*images)
        den = {}
        scale = fmpq(1)
        for key, e in self.den.items():
            terms, const = key
            nc = {}
            nk = const
            for i, c in terms:
                cs, k0 = forms[i]
                nk += c * k0
                for j, cj in cs.items():
                    nc[j] = nc.get(j, 0) + c * cj
            nkey, lead = _norm_linear(nc, nk)
            if nkey is None:
                if lead == 0:
                    raise DomainError("substitution hits a pole")
                scale /= lead ** e
            else:
                scale /= lead ** e
                den[nkey] = den.get(nkey, 0) + e
        return FR(num * scale, den)

    def derivative(self, v):
        out = FR(self.num.derivative(VNAMES[v]), self.den)
        for k, e in self.den.items():
            c = dict(k[0]).get(v)
            if c:
                out = out + FR(self.num * (-e * c), self.den).div_factor(k)
        return out

    def pole_order(self, key):
        return self.simplify().den.get(key, 0)

    def residue(self, v, point_key):
        """res_{x_v = p} with (x_v - p) the normalized linear form point_key.

        Expands every factor as a series in t = x_v - p to order m - 1 with a
        common denominator, instead of differentiating the quotient.
        """
        f = self.simplify()
        m = f.den.get(point_key, 0)
        if m == 0:
            return FR()
        terms = dict(point_key[0])
        if terms.get(v) != 1:
            raise DomainError("residue variable must lead the linear form")
        cs = {j: -c for j, c in terms.items() if j != v}
        p0 = -point_key[1]
        img = _pconst(p0)
        for j, c in cs.items():
            img = img + ZG[j] * c
        images = [img if i == v else ZG[i] for i in range(NVARS)]
        ser = []
        h = f.num
        for k in range(m):
            ser.append(h.compose(*images) * fmpq(1, math.factorial(k)) if not h.is_zero() else _P0)
            h = h.derivative(VNAMES[v])
        den = {}
        scale = fmpq(1)
        for key, e in f.den.items():
            if key == point_key:
                continue
            kt = dict(key[0])
            c = kt.get(v, 0)
            if c == 0:
                den[key] = den.get(key, 0) + e
                continue
            nc = {i: ci for i, ci in kt.items() if i != v}
            for j, cj in cs.items():
                nc[j] = nc.get(j, 0) + c * cj
            nkey, lead = _norm_linear(nc, key[1] + c * p0)
            if nkey is None:
                if lead == 0:
                    raise DomainError("coincident poles in residue")
                fac = [_pconst(_binom(-e, k) * c ** k / lead ** (e + k)) for k in range(m)]
            else:
                base = _fpoly(nkey)
                fac = [base ** (m - 1 - k) * (_binom(-e, k) * c ** k * lead ** (m - 1 - k)) for k in range(m)]
                den[nkey] = den.get(nkey, 0) + e + m - 1
                scale /= lead ** (e + m - 1)
            new = []
            for k in range(m):
                acc = _P0
                for i in range(k + 1):
                    if not ser[i].is_zero():
                        acc = acc + ser[i] * fac[k - i]
                new.append(acc)
            ser = new
        return FR(ser[m - 1] * scale, den).simplify()

    def vars(self):
        vs = set()
        if self.num.is_zero():
            return vs
        for i, e in enumerate(self.num.degrees()):
            if e > 0:
                vs.add(i)
        for k in self.den:
            vs |= _fvars(k)
        return vs

    def poles_are_constant(self):
        return all(len(k[0]) == 1 for k in self.den)

    def __eq__(self, o):
        if not isinstance(o, FR):
            o = FR.const(o)
        return (self - o).simplify().is_zero()

    def __hash__(self):
        return hash(str(self.simplify().num))

    def den_poly(self):
        p = _P1
        for k, e in self.den.items():
            p = p * _fpoly(k) ** e
        return p

    def to_json(self):
        f = self.simplify()
        return {"numerator": str(f.num).replace("^", "**"),
                "denominator": str(f.den_poly()).replace("^", "**")}

    def __repr__(self):
        j = self.to_json()
        return f"({j['numerator']})/({j['denominator']})"

    def laurent_at_infinity(self, v, order):
        """Expansion in t = 1/x_v of a univariate FR: (valuation, TruncSeries in t)."""
        f = self.simplify()
        if f.vars() - {v}:
            raise DomainError("laurent_at_infinity needs a univariate function")
        nd = f.num.to_dict()
        degn = max(m[v] for m in nd)
        ncoef = [fmpq(0)] * (degn + 1)
        for m, c in nd.items():
            ncoef[degn - m[v]] += c  # N(1/t) t^degn
        dd = f.den_poly().to_dict()
        degd = max(m[v] for m in dd)
        dcoef = [fmpq(0)] * (degd + 1)
        for m, c in dd.items():
            dcoef[degd - m[v]] += c
        s = TruncSeries(ncoef, 0, order) / TruncSeries(dcoef, 0, order)
        return degd - degn, s


def zkey(i, a):
    return lin(i, a)


# ---------------------------------------------------------------- epsilon series of FR

def s_mul(a, b, K):
    out = [FR() for _ in range(K + 1)]
    for i, x in enumerate(a[:K + 1]):
        if x.is_zero():
            continue
        for j, y in enumerate(b[:K + 1 - i]):
            if y.is_zero():
                continue
            out[i + j] = out[i + j] + x * y
    return [o.simplify() for o in out]


def s_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else FR()) + (b[i] if i < len(b) else FR()) for i in range(n)]


def s_scale(a, c):
    return [x.scale(c) for x in a]


def s_subs(a, mapping):
    return [x.subs(mapping) for x in a]


# ---------------------------------------------------------------- the curve data

_LOCK = threading.RLock()
_CURVE: dict = {}


def _y0():
    # Y^[0] = 2 (z^2 - 1) z
    return FR(ZG[0] * (ZG[0] ** 2 - 1) * 2)


def _binom(alpha, m):
    r = fmpq(1)
    for i in range(m):
        r = r * (alpha - i) / (i + 1)
    return r


class CurveSeries:
    """U, Y, 1/Y, the A-period data and W_{0,2} to order K in eps."""

    def __init__(self, K):
        self.K = K
        self.u = [fmpq(0)] * (K + 1)  # U - 8/27
        self._solve_u()
        self.y = self._power_series(fmpq(1, 2))
        self.yinv = self._power_series(fmpq(-1, 2))
        self.omega = [self._res1(FR(ZG[0] * 2) * c) for c in self.yinv]
        self.eta = [-self._res1(FR((ZG[0] ** 2 - fmpq(2, 3)) * ZG[0] * 2) * c) for c in self.yinv]
        self.s_ratio = _series_div(self.eta, self.omega, K)  # eta/omega
        self.w02 = None

    @staticmethod
    def _res1(f):
        r = f.residue(0, zkey(0, 1))
        if r.vars():
            raise ConsistencyError("A-period residue is not constant")
        return r.num.leading_coefficient() if not r.is_zero() else fmpq(0)

    def _power_series(self, alpha, upto=None):
        """(Y0^2 + dU)^alpha with dU = sum u_k eps^k, coefficients as FR in z."""
        K = self.K if upto is None else upto
        y0 = _y0()
        y02 = y0 * y0
        # powers of dU as scalar series
        du = [fmpq(0)] + self.u[1:K + 1]
        powers = [[fmpq(1)] + [fmpq(0)] * K]
        for m in range(1, K + 1):
            prev = powers[-1]
            nxt = [fmpq(0)] * (K + 1)
            for i, a in enumerate(prev):
                if a == 0:
                    continue
                for j in range(1, K + 1 - i):
                    nxt[i + j] += a * du[j]
            powers.append(nxt)
        out = []
        base = FR(y0.num ** 1, {})  # Y0
        for k in range(K + 1):
            acc = FR()
            for m in range(0, k + 1):
                c = powers[m][k]
                if c == 0:
                    continue
                coef = _binom(alpha, m) * c
                # Y0^(2 alpha - 2m)
                e = 2 * alpha - 2 * m
                e = int(e)
                term = _y0_power(e).scale(coef)
                acc = acc + term
            out.append(acc.simplify())
        return out

    def _solve_u(self):
        """Fix u_k from -res_{zeta=1} Y^[k] dX = delta_{k1}."""
        for k in range(1, self.K + 1):
            self.u[k] = fmpq(0)
            yk = self._power_series(fmpq(1, 2), upto=k)[k]
            base = self._res1(yk * FR(ZG[0] * 2))
            # the u_k contribution is u_k / (2 Y0); its residue against dX is u_k / 4
            target = fmpq(1) if k == 1 else fmpq(0)
            self.u[k] = (-target - base) * 4

    def u_series(self):
        return [fmpq(8, 27)] + self.u[1:]

    def bergman(self):
        """W_{0,2} coefficient series in (z1, z2)."""
        if self.w02 is not None:
            return self.w02
        K = self.K
        s1 = {0: ({1: 1}, 0)}
        y1 = s_subs(self.y, s1)
        y2 = s_subs(self.y, {0: ({2: 1}, 0)})
        i1 = s_subs(self.yinv, s1)
        i2 = s_subs(self.yinv, {0: ({2: 1}, 0)})
        ysum = s_add(y1, y2)
        sq = s_mul(ysum, ysum, K)
        dkeys = {lin(1, other=2, sign=1): 2, lin(1, other=2, sign=-1): 2}
        first = [FR(x.num, _merge(x.den, dkeys)).scale(fmpq(1, 4)).simplify() for x in sq]
        x1 = FR(ZG[1] ** 2 - fmpq(2, 3))
        x2 = FR(ZG[2] ** 2 - fmpq(2, 3))
        bracket = list(first)
        bracket[0] = bracket[0] - x1 - x2
        for k in range(K + 1):
            bracket[k] = bracket[k] + FR.const(self.s_ratio[k])
        prod = s_mul(s_mul(bracket, i1, K), i2, K)
        jac = FR(ZG[1] * ZG[2] * 4)
        self.w02 = [(p * jac).simplify() for p in prod]
        return self.w02


def _merge(a, b):
    d = dict(a)
    for k, e in b.items():
        d[k] = d.get(k, 0) + e
    return d


_Y0POW: dict = {}


def _y0_power(e):
    """Y0^e as FR for integer e."""
    hit = _Y0POW.get(e)
    if hit is not None:
        return hit
    if e >= 0:
        r = FR(_y0().num ** e)
    else:
        m = -e
        r = FR(_pconst(fmpq(1, 2 ** m)), {zkey(0, 0): m, zkey(0, 1): m, zkey(0, -1): m})
    _Y0POW[e] = r
    return r


def _series_div(a, b, K):
    """Scalar power series a / b."""
    inv0 = 1 / b[0]
    out = []
    for k in range(K + 1):
        s = a[k] if k < len(a) else fmpq(0)
        for j in range(1, k + 1):
            s -= b[j] * out[k - j]
        out.append(s * inv0)
    return out


def curve_series(K: int) -> CurveSeries:
    with _LOCK:
        best = None
        for k, c in _CURVE.items():
            if k >= K:
                best = c if best is None or k < best.K else best
        if best is None:
            best = CurveSeries(K)
            _CURVE[K] = best
        return best


def u_series(kmax: int):
    """U = 8/27 - 4 eps + 15/8 eps^2 + ..., fixed by the A-period normalization."""
    return curve_series(kmax).u_series()[:kmax + 1]


def s_ratio_series(kmax: int):
    """eta_A / omega_A in eps = nu Lambda."""
    return curve_series(kmax).s_ratio[:kmax + 1]


def y_series(kmax: int):
    """[Y^[k](zeta)] for k = 0..kmax."""
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    return curve_series(kmax).y[:kmax + 1]


def period_check(kmax: int):
    """-res_{X=1/3} Y^[k] dX for k = 0..kmax (should be delta_{k,1})."""
    cs = curve_series(kmax)
    return [CurveSeries._res1(cs.y[k] * FR(ZG[0] * 2)) * -1 for k in range(kmax + 1)]


def w02_series(kmax: int):
    """[W_{0,2}^[k](zeta1, zeta2)] as coefficient of d zeta1 d zeta2."""
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    return curve_series(kmax).bergman()[:kmax + 1]


def tilde_e_series(kmax: int) -> dict:
    """Roots of 4X^3 - 4X/3 + U as series: e1 in eps, e2/e3 in eps^(1/2).

    Returned as TruncSeries in the variable r = eps^(1/2) (so e1 has only even
    powers).  Computed by Newton iteration on the cubic.
    """
    U = u_series(kmax)
    n = 2 * kmax + 2
    ucoef = [fmpq(0)] * n
    for k, c in enumerate(U):
        if 2 * k < n:
            ucoef[2 * k] = c
    us = TruncSeries(ucoef, 0, n, var="r")

    def newton(x0):
        x = TruncSeries([x0], 0, n, var="r")
        for _ in range(n + 2):
            f = x * x * x * 4 - x * fmpq(4, 3) + us
            fp = x * x * 12 - fmpq(4, 3)
            if f.is_zero():
                break
            x = x - f / fp
        return x

    e1 = newton(fmpq(-2, 3))
    # 4X^3 - 4X/3 + U = 4 (X - e1)(X^2 + e1 X + e1^2 - 1/3)
    disc = e1 * e1 * -3 + fmpq(4, 3)
    root = disc.sqrt()
    e2 = (-e1 + root) * fmpq(1, 2)
    e3 = (-e1 - root) * fmpq(1, 2)
    return {"e1": e1.truncate(n - 1), "e2": e2.truncate(n - 1), "e3": e3.truncate(n - 1)}


# ---------------------------------------------------------------- correlators

class LambdaCorrelator:
    def __init__(self, g, n, coeffs):
        self.g = g
        self.n = n
        self.coeffs = coeffs

    @property
    def kmax(self):
        return len(self.coeffs) - 1

    def to_json(self):
        return {"g": self.g, "n": self.n,
                "coefficients": [dict(k=k, **c.to_json()) for k, c in enumerate(self.coeffs)]}

    def is_symmetric(self):
        for perm in itertools.permutations(range(1, self.n + 1)):
            mp = {i + 1: ({p: 1}, 0) for i, p in enumerate(perm)}
            for c in self.coeffs:
                if c.subs(mp) != c:
                    return False
        return True

    def poles_ok(self):
        """Every pole sits at zeta_i in {0, 1, -1}."""
        ok = {zkey(i, a) for i in range(1, self.n + 1) for a in (0, 1, -1)}
        return all(set(c.simplify().den) <= ok for c in self.coeffs)


_WCACHE: dict = {}


def _w(g, n, K):
    """Raw coefficient series of W_{g,n} (stored variables 1..n)."""
    if (g, n) == (0, 2):
        return curve_series(K).bergman()[:K + 1]
    return lambda_wgn(g, n, K).coeffs


def _kernel(K):
    """kappa(z1, z) = int_inf^z W02(z1, z') dz' as series; variables x1, x0."""
    key = ("kernel", K)
    hit = _WCACHE.get(key)
    if hit is not None:
        return hit
    w02 = curve_series(K).bergman()
    out = [FR(_pconst(-1), {lin(0, other=1, sign=1): 1})]  # 1 / (z1 - z)
    for k in range(1, K + 1):
        f = w02[k].subs({2: ({0: 1}, 0)})  # W02^[k](z1, z)
        out.append(_antiderivative_at_inf(f, 0))
    _WCACHE[key] = out
    return out


def _antiderivative_at_inf(f, v):
    """Primitive in x_v vanishing at infinity, for poles at constants only."""
    f = f.simplify()
    total = FR()
    for key, m in f.den.items():
        if _fvars(key) != {v}:
            continue
        a = -key[1]
        d = dict(f.den)
        del d[key]
        g = FR(f.num, d)
        # Taylor coefficients of g at x_v = a
        taylor = []
        h = g
        for i in range(m):
            taylor.append(h.subs({v: ({}, a)}).scale(fmpq(1, math.factorial(i))))
            h = h.derivative(v)
        if not taylor[m - 1].simplify().is_zero():
            raise ConsistencyError("W02 coefficient has a nonzero residue; primitive is not rational")
        for j in range(2, m + 1):
            cj = taylor[m - j]
            total = total + FR(cj.num, _merge(cj.den, {key: j - 1})).scale(fmpq(1, 1 - j))
    total = total.simplify()
    if (total.derivative(v) - f).simplify().is_zero():
        return total
    raise ConsistencyError("primitive check failed (polynomial part or diagonal pole present)")


def lambda_wgn(g: int, n: int, kmax: int) -> LambdaCorrelator:
    """W_{g,n}^[k], k = 0..kmax, for 2g - 2 + n >= 1."""
    if g < 0 or n < 1 or 2 * g - 2 + n < 1:
        raise DomainError("need 2g - 2 + n >= 1")
    if n + 1 > NVARS:
        raise DomainError("too many variables")
    with _LOCK:
        best = None
        for key, v in _WCACHE.items():
            if key[0] == "W" and key[1] == g and key[2] == n and key[3] >= kmax:
                best = v
                break
        if best is not None:
            return LambdaCorrelator(g, n, best.coeffs[:kmax + 1])
        res = _compute_wgn(g, n, kmax)
        _WCACHE[("W", g, n, kmax)] = res
        return res


def _recursion_input(g, n, K):
    """Coefficient series of R(z, z_2..z_n) (variables x0, x2..xn)."""
    others = list(range(2, n + 1))
    total = [FR() for _ in range(K + 1)]
    if g >= 1:
        src = _w(g - 1, n + 1, K)
        mp = {1: ({0: 1}, 0), 2: ({0: -1}, 0)}
        for idx, tgt in enumerate(others, start=3):
            mp[idx] = ({tgt: 1}, 0)
        total = s_add(total, s_scale(s_subs(src, mp), -1))
    for g1 in range(g + 1):
        g2 = g - g1
        for r in range(len(others) + 1):
            for I in itertools.combinations(others, r):
                J = [j for j in others if j not in I]
                if (g1, len(I)) == (0, 0) or (g2, len(J)) == (0, 0):
                    continue
                a = _w(g1, len(I) + 1, K)
                b = _w(g2, len(J) + 1, K)
                ma = {1: ({0: 1}, 0)}
                for idx, tgt in enumerate(I, start=2):
                    ma[idx] = ({tgt: 1}, 0)
                mb = {1: ({0: -1}, 0)}
                for idx, tgt in enumerate(J, start=2):
                    mb[idx] = ({tgt: 1}, 0)
                prod = s_mul(s_subs(a, ma), s_subs(b, mb), K)
                total = s_add(total, s_scale(prod, -1))
    return [t.simplify() for t in total]


A_TERM_SIGN = -1


def _compute_wgn(g, n, K):
    cs = curve_series(K)
    r = _recursion_input(g, n, K)
    # F = r / (4 z Y(z))
    yinv = cs.yinv[:K + 1]
    quarter = FR(_pconst(fmpq(1, 4)), {zkey(0, 0): 1})
    F = s_mul(r, [y * quarter for y in yinv], K)
    kap = _kernel(K)
    kF = s_mul(kap, F, K)
    out = [FR() for _ in range(K + 1)]
    # -res_{z=z1}: kappa^[0] = 1/(z1 - z) gives +F(z1)
    to_z1 = {0: ({1: 1}, 0)}
    for k in range(K + 1):
        out[k] = out[k] + F[k].subs(to_z1)
    for j in range(2, n + 1):
        for sgn in (1, -1):
            pk = lin(0, other=j, sign=sgn)
            for k in range(K + 1):
                out[k] = out[k] - kF[k].residue(0, pk)
    # A-cycle term
    resA = [f.residue(0, zkey(0, 1)) for f in F]
    ratio = []
    inv = 1 / cs.omega[0]
    for k in range(K + 1):
        s = resA[k]
        for j in range(1, k + 1):
            s = s - ratio[k - j].scale(cs.omega[j])
        ratio.append(s.scale(inv).simplify())
    hol = [(y.subs(to_z1) * FR(ZG[1] * 2)).simplify() for y in yinv]  # dX1 / Y1
    aterm = s_mul(hol, ratio, K)
    for k in range(K + 1):
        out[k] = (out[k] + aterm[k].scale(A_TERM_SIGN)).simplify()
        if not out[k].poles_are_constant():
            raise ConsistencyError(f"W_{g},{n}^[{k}] has a pole off the allowed set")
    return LambdaCorrelator(g, n, out)


def lambda_fg(g: int, kmax: int) -> list:
    """F_g^[k] for k = 0..kmax from (15(2g-2+k)/8) F_g^[k] = 2 res_{X=inf} X^(1/2) W_{g,1}^[k]."""
    if g < 2:
        raise DomainError("g must be >= 2")
    W = lambda_wgn(g, 1, kmax)
    out = []
    for k, w in enumerate(W.coeffs):
        out.append(_res_inf_sqrtx(w) / (fmpq(15 * (2 * g - 2 + k), 8)))
    return out


def _res_inf_sqrtx(w):
    """2 res_{X=inf} X^(1/2) w(zeta) d zeta, with the branch X^(1/2) = -zeta (1 + O(zeta^-2)).

    The branch is the one for which the k = 0 term reproduces the degenerate
    curve free energy; a circle around X = inf is half a circle in zeta.
    """
    order = 40
    val, s = w.laurent_at_infinity(1, order)  # w = t^val * s(t), t = 1/zeta
    # X^(1/2) = zeta (1 - 2 t^2 / 3)^(1/2)
    root = TruncSeries([1, 0, fmpq(-2, 3)], 0, order).sqrt()
    h = s * root  # X^(1/2) w = t^(val - 1) h(t)
    # res_{zeta=inf} f(zeta) d zeta = -[t^1] f(1/t); the branch sign flips it back
    need = 1 - (val - 1)
    return h[need] if need >= 0 else fmpq(0)


def deg_check(g: int, n: int) -> bool:
    """W_{g,n}^[0] against the degenerate-curve correlator under X = (z/gamma)^2 - 2/3.

    With q0 = 1/3 (gamma = 1) the degenerate uniformizer z equals zeta.
    """
    from .trdeg import deg_correlator
    W0 = lambda_wgn(g, n, 0).coeffs[0]
    D = deg_correlator(g, n)
    f = FR()
    for key, c in D.terms.items():
        qe = key[0]
        num = _pconst(fmpq(c) * fmpq(3) ** qe)
        den = {}
        for i, e in enumerate(key[1:], start=1):
            if e > 0:
                den[zkey(i, 0)] = e
            elif e < 0:
                num = num * ZG[i] ** (-e)
        f = f + FR(num, den)
    return (f - W0).simplify().is_zero()


# ---------------------------------------------------------------- Weber curve
#
# Zhukovsky form: X = sqrt(nu) (w + 1/w), W01 = nu (w^2 - 1)^2 / (2 w^3) dw,
# sigma(w) = 1/w.  The recursion runs in u = (w - 1)/(w + 1), where sigma is
# u -> -u, W01 = 16 nu u^2 / (1 - u^2)^3 du and the ramification points are
# u = 0, inf.  Everything is computed at nu = 1; W_{g,n} scales as nu^(2-2g-n).

_WEB: dict = {}


class WeberCorrelator:
    def __init__(self, g, n, value_u):
        self.g = g
        self.n = n
        self.value_u = value_u  # coefficient of du_1 ... du_n, variables 1..n
        self._value = None

    @property
    def value(self):
        """Coefficient of dw_1 ... dw_n."""
        if self._value is None:
            self._value = _u_to_w(self.value_u, self.n)
        return self._value

    @property
    def nu_power(self):
        return -(2 * self.g - 2 + self.n)

    def is_symmetric(self):
        for perm in itertools.permutations(range(1, self.n + 1)):
            mp = {i + 1: ({p: 1}, 0) for i, p in enumerate(perm)}
            if self.value.subs(mp) != self.value:
                return False
        return True

    def poles_ok(self):
        ok = {zkey(i, a) for i in range(1, self.n + 1) for a in (1, -1)}
        return set(self.value.simplify().den) <= ok

    def to_json(self):
        d = {k: re.sub(r"\bz(\d)", r"w\1", v) for k, v in self.value.to_json().items()}
        d.update(g=self.g, n=self.n, nu_power=self.nu_power, variables=[f"w{i}" for i in range(1, self.n + 1)])
        return d


def mobius(f, v, a, b, c, d):
    """f with x_v -> (a x_v + b)/(c x_v + d); factors of f must not mix x_v with other variables."""
    f = f.simplify()
    a, b, c, d = (fmpq(t) for t in (a, b, c, d))
    nd = f.num.to_dict()
    D = max((m[v] for m in nd), default=0)
    top = a * ZG[v] + b
    bot = c * ZG[v] + d
    groups: dict = {}
    for m, coef in nd.items():
        mm = list(m)
        e = mm[v]
        mm[v] = 0
        groups.setdefault(e, {})[tuple(mm)] = coef
    tp = [_P1]
    bp = [_P1]
    for _ in range(D):
        tp.append(tp[-1] * top)
        bp.append(bp[-1] * bot)
    num = _P0
    for e, part in groups.items():
        num = num + ZCTX.from_dict(part) * tp[e] * bp[D - e]
    den = {}
    scale = fmpq(1)
    bot_key, bot_lead = _norm_linear({v: c}, d)
    bot_pow = D
    for key, e in f.den.items():
        terms = dict(key[0])
        if v not in terms:
            den[key] = den.get(key, 0) + e
            continue
        if len(terms) > 1:
            raise DomainError("mobius substitution inside a mixed factor")
        p = -key[1]  # factor x_v - p -> ((a - p c) x + (b - p d)) / (c x + d)
        nkey, lead = _norm_linear({v: a - p * c}, b - p * d)
        if nkey is None:
            scale /= lead ** e
        else:
            den[nkey] = den.get(nkey, 0) + e
            scale /= lead ** e
        bot_pow -= e
    if bot_key is None:
        scale /= bot_lead ** bot_pow
    elif bot_pow >= 0:
        den[bot_key] = den.get(bot_key, 0) + bot_pow
        scale /= bot_lead ** bot_pow
    else:
        num = num * bot ** (-bot_pow)
    return FR(num * scale, den).simplify()


def _u_to_w(f, n):
    """u-coefficient -> w-coefficient, u = (w - 1)/(w + 1), du = 2 dw / (w + 1)^2."""
    for i in range(1, n + 1):
        f = mobius(f, i, 1, -1, 1, 1)
        f = FR(f.num * 2, _merge(f.den, {zkey(i, -1): 2})).simplify()
    return f


def weber_tr(g: int, n: int) -> WeberCorrelator:
    """W^Web_{g,n} at nu = 1 (the nu dependence is nu^(2-2g-n))."""
    if g < 0 or n < 1 or 2 * g - 2 + n < 1:
        raise DomainError("need 2g - 2 + n >= 1")
    if n + 1 > NVARS:
        raise DomainError("too many variables")
    with _LOCK:
        hit = _WEB.get((g, n))
        if hit is not None:
            return hit
        vu = _weber_compute(g, n)
        res = WeberCorrelator(g, n, vu)
        _WEB[(g, n)] = res
        return res


def _web_raw(g, n):
    if (g, n) == (0, 2):
        return FR(_P1, {lin(1, other=2, sign=1): 2})
    return weber_tr(g, n).value_u


def _weber_compute(g, n):
    others = list(range(2, n + 1))
    # R(u, u_K) as coefficient of du^2; sigma flips the sign of the variable and of du
    R = FR()
    if g >= 1:
        src = _web_raw(g - 1, n + 1)
        mp = {1: ({0: 1}, 0), 2: ({0: -1}, 0)}
        for idx, tgt in enumerate(others, start=3):
            mp[idx] = ({tgt: 1}, 0)
        R = R - src.subs(mp)
    for g1 in range(g + 1):
        g2 = g - g1
        for r in range(len(others) + 1):
            for I in itertools.combinations(others, r):
                J = [j for j in others if j not in I]
                if (g1, len(I)) == (0, 0) or (g2, len(J)) == (0, 0):
                    continue
                ma = {1: ({0: 1}, 0)}
                for idx, tgt in enumerate(I, start=2):
                    ma[idx] = ({tgt: 1}, 0)
                mb = {1: ({0: -1}, 0)}
                for idx, tgt in enumerate(J, start=2):
                    mb[idx] = ({tgt: 1}, 0)
                R = R - _web_raw(g1, len(I) + 1).subs(ma) * _web_raw(g2, len(J) + 1).subs(mb)
    # K = (1/(u1 - u) - 1/(u1 + u)) (1 - u^2)^3 / (64 u^2)
    base = FR(_pconst(fmpq(1, 64)) * (1 - ZG[0] ** 2) ** 3, {zkey(0, 0): 2})
    kern = (FR(_pconst(-1), {lin(0, other=1, sign=1): 1})
            - FR(_P1, {lin(0, other=1, sign=-1): 1})) * base
    KR = (kern * R).simplify()
    # ramification residues (u = 0, inf) = minus the residues at u = +-u_1, +-u_j
    out = FR()
    for j in range(1, n + 1):
        for sgn in (1, -1):
            out = out - KR.residue(0, lin(0, other=j, sign=sgn))
    return out.simplify()


def weber_free_energy(g: int) -> fmpq:
    """F_g^Web * nu^(2g-2) = (2 - 2g)^-1 sum_{w=+-1} res Phi W_{g,1} (g >= 2)."""
    if g < 2:
        raise DomainError("g must be >= 2")
    w = weber_tr(g, 1).value.subs({1: ({0: 1}, 0)}).simplify()
    phi_d = FR(((ZG[0] ** 2 - 1) ** 2) * fmpq(1, 2), {zkey(0, 0): 3})
    total = fmpq(0)
    for a in (1, -1):
        key = zkey(0, a)
        m = w.den.get(key, 0)
        if m == 0:
            continue
        d = dict(w.den)
        del d[key]
        gfun = FR(w.num, d)
        taylor = _taylor(gfun, a, m)   # w = sum taylor[i] t^(i - m), t = w - a
        phis = _taylor(phi_d, a, m)    # Phi' = sum phis[i] t^i
        # Phi - Phi(a) = sum_{i>=1} phis[i-1] t^i / i ; residue picks t^i * t^(j - m) with i + j - m = -1
        for i in range(1, m):
            total += phis[i - 1] / i * taylor[m - i - 1]
    return total / (2 - 2 * g)


def _taylor(f, a, m):
    out = []
    h = f
    for i in range(m):
        out.append(_scalar(h.subs({0: ({}, a)})) / math.factorial(i))
        h = h.derivative(0)
    return out


def _scalar(f):
    f = f.simplify()
    if f.vars():
        raise ConsistencyError("expected a constant")
    if f.is_zero():
        return fmpq(0)
    return f.num.leading_coefficient() / f.den_poly().leading_coefficient()


def weber_closed_form(g: int) -> fmpq:
    """B_{2g} / (4 g (g - 1)), the coefficient of nu^(2-2g)."""
    return bernoulli(2 * g) / (4 * g * (g - 1))


# ---------------------------------------------------------------- symmetric reduction of W_{1,1}

SYM_CTX = flint.fmpq_mpoly_ctx.get(("e1", "e2", "e3", "x", "S"), "lex")
_E1, _E2, _E3, _X, _S = SYM_CTX.gens()
INV_CTX = flint.fmpq_mpoly_ctx.get(("s1", "s2", "s3", "x", "S"), "lex")
OUT_CTX = flint.fmpq_mpoly_ctx.get(("x", "S", "g2", "g3"), "lex")


def symmetric_reduce(p):
    """Write a symmetric polynomial in e1, e2, e3 via elementary symmetric s1, s2, s3."""
    s1, s2, s3, xx, SS = INV_CTX.gens()
    e = (_E1 + _E2 + _E3, _E1 * _E2 + _E1 * _E3 + _E2 * _E3, _E1 * _E2 * _E3)
    out = INV_CTX.from_dict({})
    rem = p
    guard = 0
    while not rem.is_zero():
        guard += 1
        if guard > 100000:
            raise ViolationError("symmetric reduction did not terminate")
        terms = rem.to_dict()
        mono = max(terms)
        c = terms[mono]
        a, b, cc, px, pS = mono
        if not (a >= b >= cc):
            raise DomainError("polynomial is not symmetric in e1, e2, e3")
        rem = rem - c * e[0] ** (a - b) * e[1] ** (b - cc) * e[2] ** cc * _X ** px * _S ** pS
        out = out + c * s1 ** (a - b) * s2 ** (b - cc) * s3 ** cc * xx ** px * SS ** pS
    return out


def _to_g(q):
    """s1 = 0, s2 = -g2/4, s3 = g3/4."""
    x, S, g2, g3 = OUT_CTX.gens()
    return q.compose(OUT_CTX.from_dict({}), -g2 / 4, g3 / 4, x, S, ctx=OUT_CTX)


def symmetrize_w11() -> dict:
    """Eliminate the e_i from the half-period sum for the elliptic W_{1,1}.

    W11 = (2/Delta) sum_i (3 e_i^2 - g2) (P''_i / 24 + (S - e_i)(P_i + S)) dz with
    P_i = p(z - r_i) = e_i + (12 e_i^2 - g2)(x - e_j)(x - e_k)/y^2 and
    P'' = 6 P^2 - g2/2.  Returns the y^-4, y^-2 and Delta^-1 parts over Q[x, S, g2, g3].
    """
    es = (_E1, _E2, _E3)
    g2e = -4 * (_E1 * _E2 + _E1 * _E3 + _E2 * _E3)
    # y^2 = 4 prod (x - e_i); write P_i = e_i + A_i / y^2
    total_y0 = SYM_CTX.from_dict({})
    total_y2 = SYM_CTX.from_dict({})
    total_y4 = SYM_CTX.from_dict({})
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        ei = es[i]
        A = (12 * ei ** 2 - g2e) * (_X - es[j]) * (_X - es[k])
        w = 3 * ei ** 2 - g2e
        # P''/24 = (6 P^2 - g2/2)/24 ; P = ei + A u, u = 1/y^2
        # coefficient of u^0, u^1, u^2
        c0 = (6 * ei ** 2 - g2e / 2) / 24 + (_S - ei) * (ei + _S)
        c1 = (12 * ei * A) / 24 + (_S - ei) * A
        c2 = 6 * A ** 2 / 24
        total_y0 += w * c0
        total_y2 += w * c1
        total_y4 += w * c2
    # multiply by 2/Delta; Delta symmetric. Reduce each part.
    parts = {}
    for name, p in (("y0", total_y0), ("y2", total_y2), ("y4", total_y4)):
        parts[name] = _to_g(symmetric_reduce(p)) * 2
    x, S, g2, g3 = OUT_CTX.gens()
    delta = g2 ** 3 - 27 * g3 ** 2
    y2 = 4 * x ** 3 - g2 * x - g3
    # parts[name] / Delta / y^(...) ; push x-degree >= 3 of the y^-4 part into y^-2, etc.
    n4 = parts["y4"]
    q4, r4 = _divmod_x(n4, y2)
    n2 = parts["y2"] + q4
    q2, r2 = _divmod_x(n2, y2)
    n0 = parts["y0"] + q2
    out = {}
    for name, num in (("y^-4", r4), ("y^-2", r2)):
        q, r = divmod(num, delta)
        if not r.is_zero():
            raise ConsistencyError(f"{name} part keeps a 1/Delta denominator")
        out[name] = q
    q0, r0 = divmod(n0, delta)
    out["Delta^-1"] = r0
    out["polynomial"] = q0
    return out


def symmetrize_w11_json() -> dict:
    parts = symmetrize_w11()
    target = w11_weierstrass_target()
    return {"terms": {k: str(v).replace("^", "**") for k, v in parts.items()},
            "matches_closed_form": all(parts[k] == target[k] for k in target)}


def elementary_checks() -> dict:
    """sum e_i and sum (3 e_i^2 - g2) in terms of g2, g3."""
    g2e = -4 * (_E1 * _E2 + _E1 * _E3 + _E2 * _E3)
    s1 = _to_g(symmetric_reduce(_E1 + _E2 + _E3))
    s2 = _to_g(symmetric_reduce(sum(3 * e ** 2 - g2e for e in (_E1, _E2, _E3))))
    return {"sum_e": s1, "sum_3e2_minus_g2": s2}


def _divmod_x(p, y2):
    """Division by y2 = 4 x^3 - g2 x - g3 as a polynomial in x."""
    q = OUT_CTX.from_dict({})
    r = p
    x = OUT_CTX.gens()[0]
    while True:
        d = r.degrees()[0]
        if d < 3 or r.is_zero():
            return q, r
        lead = OUT_CTX.from_dict({(0,) + m[1:]: c for m, c in r.to_dict().items() if m[0] == d})
        t = lead * x ** (d - 3) / 4
        q = q + t
        r = r - t * y2


def w11_weierstrass_target():
    """-(12 g2 x^2 + 36 g3 x + g2^2)/(32 y^4) - (x + 4S)/(8 y^2) + g2 (g2 - 12 S^2)/(4 Delta)."""
    x, S, g2, g3 = OUT_CTX.gens()
    return {"y^-4": -(12 * g2 * x ** 2 + 36 * g3 * x + g2 ** 2) / 32,
            "y^-2": -(x + 4 * S) / 8,
            "Delta^-1": g2 * (g2 - 12 * S ** 2) / 4,
            "polynomial": OUT_CTX.from_dict({})}
