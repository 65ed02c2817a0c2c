"""Period dictionary, large-s free energies and the Painleve I / irregular
block comparisons.

Expansions are stored in the real variable x = i nu / s.  A stored term

    c * x^j * nu^a * m      stands for      c * i^j * nu^(j+a) * s^(-j) * m

with m one of the transcendental markers in MARKERS.  Homogeneity of the
free energies ties the genus to the nu power alone: F_g only produces
a = 2 - 2g, so the hbar power of a term is -a.  Coefficients are rationals,
or polynomials in b = beta^2, bi = beta^-2 for the deformed theory.
"""
from __future__ import annotations

import threading

import flint

from .exactcore import (EXACT, DomainError, GaussRat, TruncSeries, ViolationError,
                        bernoulli, fmpq, scalar_str)
from .hae import HaeState, _coef_norm, _is_zero_coef, kappa, kappa_beta_terms, scaled_series
from .modular import COEF_CTX, E2, E4, E6, delta_q, eisenstein, qexpand

SCHEMA = "artifact.painleve/1"

MARKERS = ("1", "ln(s)", "ln(nu)", "ln(2)", "ln(3)", "ln(pi)", "i*pi", "zeta'(-1)", "c0(beta)")
CONSTANT_MARKERS = ("1", "ln(2)", "ln(3)", "ln(pi)", "i*pi", "zeta'(-1)", "c0(beta)")

_B, _BI = COEF_CTX.gens()
_LOCK = threading.RLock()
_CACHE: dict = {}


def _cached(key, fn):
    with _LOCK:
        if key in _CACHE:
            return _CACHE[key]
    val = fn()
    with _LOCK:
        _CACHE.setdefault(key, val)
        return _CACHE[key]


def _istr(c, j):
    """String of i^j * c."""
    j %= 4
    if isinstance(c, flint.fmpq_mpoly):
        body = f"({c})"
        return {0: body, 1: f"{body}*i", 2: f"-{body}", 3: f"-{body}*i"}[j]
    c = fmpq(c) if isinstance(c, int) else c
    return str(GaussRat(c) * GaussRat(0, 1) ** j)


def _cstr(c):
    return str(c) if isinstance(c, flint.fmpq_mpoly) else scalar_str(c)


# ---------------------------------------------------------------- PiSeries

class PiSeries:
    """Finite sum of terms c x^j nu^a m, known for x-powers below ``order``."""

    __slots__ = ("terms", "order")

    def __init__(self, terms=None, order=EXACT):
        self.terms = {}
        for k, c in (terms or {}).items():
            c = _coef_norm(c)
            if not _is_zero_coef(c):
                self.terms[k] = c
        self.order = order

    @classmethod
    def from_x(cls, ts: TruncSeries, a: int, coef=1, marker="1"):
        return cls({(e, a, marker): c * coef for e, c in ts.items()}, ts.order)

    def __add__(self, o):
        t = dict(self.terms)
        for k, c in o.terms.items():
            t[k] = t[k] + c if k in t else c
        return PiSeries(t, min(self.order, o.order))

    def __neg__(self):
        return PiSeries({k: -c for k, c in self.terms.items()}, self.order)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        return PiSeries({k: v * c for k, v in self.terms.items()}, self.order)

    def coeff(self, j, a, marker="1"):
        return self.terms.get((j, a, marker), fmpq(0))

    def truncate(self, order):
        return PiSeries({k: c for k, c in self.terms.items() if k[0] < order}, min(order, self.order))

    def hbar_part(self, h):
        return PiSeries({k: c for k, c in self.terms.items() if k[1] == -h}, self.order)

    def is_zero(self):
        return not self.terms

    def d_nu(self):
        """Derivative in nu at fixed s."""
        t: dict = {}
        for (j, a, m), c in self.terms.items():
            p = j + a
            if p:
                key = (j, a - 1, m)
                t[key] = t.get(key, 0) + c * p
            if m == "ln(nu)":
                key = (j, a - 1, "1")
                t[key] = t.get(key, 0) + c
        return PiSeries(t, self.order)

    def s_terms(self):
        """[(s power, nu power, marker, coefficient string)] in the s variable."""
        out = []
        for (j, a, m), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0], -kv[0][1], MARKERS.index(kv[0][2]))):
            out.append((-j, j + a, m, _istr(c, j)))
        return out

    def to_json(self):
        return {"order_s_inverse": self.order if self.order < EXACT // 2 else None,
                "terms": [{"s_power": sp, "nu_power": npow, "marker": m, "coeff": c}
                          for sp, npow, m, c in self.s_terms()]}


def s_coefficient(series: PiSeries, s_power: int, nu_power: int, marker="1"):
    """Coefficient (GaussRat, or string for deformed data) of nu^p s^k m."""
    j = -s_power
    c = series.coeff(j, nu_power - j, marker)
    if isinstance(c, flint.fmpq_mpoly):
        return _istr(c, j)
    return GaussRat(c) * GaussRat(0, 1) ** (j % 4)


def _real_from(g: GaussRat, j: int):
    """c with g = i^j c; raises if c is not real."""
    r = g * GaussRat(0, -1) ** (j % 4)
    if not r.is_real():
        raise ViolationError(f"coefficient {g} of s^-{j} has the wrong phase")
    return r.re


# ---------------------------------------------------------------- dictionary

def _rename(ts: TruncSeries, var: str) -> TruncSeries:
    return TruncSeries(list(ts.coeffs), ts.start, ts.order, var, ts.base_den)


def forward_nome_map(order: int) -> TruncSeries:
    """(E6 - E2 E4) / (15 E4^(5/4)) as a q-series, E4^(5/4) = 1 + O(q)."""
    e2, e4, e6 = (eisenstein(n, order) for n in (1, 2, 3))
    return ((e6 - e2 * e4) * e4.power(fmpq(-5, 4), lead=1)).scale(fmpq(1, 15)).truncate(order)


BRANCHES = {
    # x = i nu / s = kappa * nu * Lambda
    "minus": {"a": "-sqrt(1/6)", "Lambda": "-4*i/(3*s)", "kappa": GaussRat(fmpq(-3, 4))},
    "plus": {"a": "sqrt(1/6)", "Lambda": "4/(3*s)", "kappa": GaussRat(0, fmpq(3, 4))},
}


class Dictionary:
    def __init__(self, order, branch, q_of_x, omega_bracket):
        self.order = order
        self.branch = branch
        self.q_of_x = q_of_x
        self.omega_bracket = omega_bracket
        kap = BRANCHES[branch]["kappa"]
        self.kappa = kap
        self.q_of_lambda = [GaussRat(c) * kap ** e for e, c in q_of_x.items()]
        self.lambda_map = {
            "s": "24^(1/4)*(-t)^(5/4)",
            "Lambda": BRANCHES[branch]["Lambda"],
            "x": f"({kap})*nu*Lambda",
            "epsilon": "epsilon^-2 = 48*i*s, x = -48*nu*epsilon^2",
        }

    @property
    def omegaA5(self):
        """(omega_A / 2 pi)^5 = -1/(24 s) * bracket(x)."""
        return self.omega_bracket

    def q_lambda_series(self):
        """Nome as a series in y = nu Lambda (GaussRat coefficients)."""
        return [(e, GaussRat(c) * self.kappa ** e) for e, c in self.q_of_x.items()]

    def roundtrip_ok(self):
        f = _rename(forward_nome_map(self.order + 1), "x")
        back = f.compose(self.q_of_x)
        return back == TruncSeries([1], 1, back.order, "x")

    def to_json(self):
        def s_form(ts):
            return [{"s_power": -e, "nu_power": e, "coeff": _istr(c, e)} for e, c in ts.items()]
        return {"schema": SCHEMA, "order": self.order, "branch": self.branch,
                "a": BRANCHES[self.branch]["a"],
                "q_of_x": self.q_of_x.to_json(),
                "q_large_s": s_form(self.q_of_x),
                "omegaA5_prefactor": "-1/(24*s)",
                "omegaA5_bracket": s_form(self.omega_bracket),
                "q_of_nu_Lambda": [[e, str(c)] for e, c in self.q_lambda_series()],
                "maps": self.lambda_map,
                "roundtrip_ok": self.roundtrip_ok()}


def build_dictionary(order: int = 6, branch: str = "minus") -> Dictionary:
    """Invert the nome relation in x = i nu/s and expand (omega_A/2pi)^5."""
    if order < 2:
        raise DomainError("order must be >= 2")
    if branch not in BRANCHES:
        raise DomainError(f"branch must be one of {sorted(BRANCHES)}")

    def make():
        f = forward_nome_map(order + 1)
        qx = _rename(f.reversion(), "x")
        e4 = eisenstein(2, order + 1).power(fmpq(5, 4), lead=1)
        bracket = _rename(e4, "x").compose(qx)
        d = Dictionary(order, branch, qx, bracket)
        if not d.roundtrip_ok():
            raise ViolationError("nome reversion does not round-trip")
        return d
    return _cached(("dict", order, branch), make)


# ---------------------------------------------------------------- large s free energies

def _unit_of_q(d: Dictionary, n: int) -> TruncSeries:
    """w(x) = q(x)/x."""
    return d.q_of_x.truncate(n + 1).shift(-1)


def _in_x(ps: TruncSeries, d: Dictionary) -> TruncSeries:
    return _rename(ps, "x").compose(d.q_of_x)


def _ln_minus_x_over_48(coef, a):
    """coef * nu^a * ln(-x/48) with ln(-i) = -i pi/2."""
    c = coef
    return PiSeries({(0, a, "ln(nu)"): c, (0, a, "ln(s)"): -c, (0, a, "ln(2)"): -4 * c,
                     (0, a, "ln(3)"): -c, (0, a, "i*pi"): c * fmpq(-1, 2)})


def f0_large_s(order: int, d: Dictionary | None = None) -> PiSeries:
    """F0 = nu^2 [ (1/2) ln q + E4 (6 E2 E4 - 11 E6) / (E6 - E2 E4)^2 ]."""
    n = order + 1
    d = d or build_dictionary(max(order + 3, 2))
    N = n + 2
    num = qexpand(E4 * (E2 * E4 * 6 - E6 * 11), N)
    den = qexpand(E6 - E2 * E4, N + 1).shift(-1).truncate(N)
    r = _in_x(num / (den * den), d)
    w = _unit_of_q(d, N)
    rx = (r * (w * w).inverse()).shift(-2).truncate(n)
    logw = (w.scale(fmpq(-48))).log().truncate(n)
    body = PiSeries.from_x(rx, 2) + PiSeries.from_x(logw, 2, fmpq(1, 2))
    return (body + _ln_minus_x_over_48(fmpq(1, 2), 2)).truncate(n)


def _f1_pieces(n, d):
    lnE4 = _in_x(eisenstein(2, n).log(), d).truncate(n)
    w = _unit_of_q(d, n)
    lnw = w.scale(fmpq(-48)).log().truncate(n)
    dq = delta_q(n + 1).shift(-1).truncate(n)
    lnd = _in_x(dq.log(), d).truncate(n)
    return lnE4, lnw, lnd


def f1_large_s(order: int, d: Dictionary | None = None, beta: bool = False) -> PiSeries:
    """F1 up to an additive constant.

    With ``beta`` the deformed F1 = -(1/2) ln omega_A - (b + bi)/24 ln(Delta(q)/omega_A^12),
    otherwise the same expression at b = bi = 1.
    ln omega_A ~ -(1/5) ln s + (1/4) ln E4,  ln Delta(q) ~ ln nu - ln s + ln(-48 w) + ln(Delta/q).
    """
    n = order + 1
    d = d or build_dictionary(max(order + 1, 2))
    lnE4, lnw, lnd = _f1_pieces(n, d)
    sig = (_B + _BI) if beta else fmpq(2)
    cL = fmpq(-1, 2) + sig * fmpq(1, 2)     # coefficient of ln omega_A
    cD = -sig / 24                          # coefficient of ln Delta(q)
    out = PiSeries({(0, 0, "ln(s)"): cL * fmpq(-1, 5) - cD, (0, 0, "ln(nu)"): cD})
    out = out + PiSeries.from_x(lnE4, 0, cL * fmpq(1, 4))
    out = out + PiSeries.from_x(lnw + lnd, 0, cD)
    return out.truncate(n)


def fg_large_s(g: int, order: int, state: HaeState | None = None, d: Dictionary | None = None) -> PiSeries:
    """Large-s expansion of F_g through s^-order (deformed if state.beta_mode)."""
    if g < 0:
        raise DomainError("g must be >= 0")
    d = d or build_dictionary(max(order + 3, 2))
    if g == 0:
        return f0_large_s(order, d)
    if g == 1:
        return f1_large_s(order, d, beta=bool(state and state.beta_mode))
    if state is None:
        state = _hae_state(g, False)
    state.solve(g)
    ser = scaled_series(state, state.F[g].pure(2 * g - 2), g, order + 1)
    return PiSeries.from_x(_in_x(ser, d).truncate(order + 1), 2 - 2 * g)


def _hae_state(gmax, beta):
    return _cached(("hae", gmax, beta), lambda: HaeState(gmax, beta).solve())


def total_free_energy(gmax: int, order: int, beta: bool = False) -> PiSeries:
    state = _hae_state(max(gmax, 2), beta)
    d = build_dictionary(max(order + 3, 2))
    tot = PiSeries()
    for g in range(gmax + 1):
        tot = tot + fg_large_s(g, order, state, d)
    return tot


# ---------------------------------------------------------------- Barnes asymptotics

class GammaAsym:
    """z^2/2 ln z - 3 z^2/4 + lin_ln2pi z ln(2 pi) + lnz ln z + const + sum kappa_g z^(2-2g)."""

    def __init__(self, tail, lnz, lin_ln2pi, const_marker):
        self.tail = tail              # TruncSeries in w = z^-2: coefficient of w^(g-1) is kappa_g
        self.lnz = lnz
        self.lin_ln2pi = lin_ln2pi
        self.const_marker = const_marker

    def kappa(self, g):
        return self.tail[g - 1]

    def as_pi_series(self, gmax) -> PiSeries:
        """The expansion with z = nu (hbar = 1), through kappa_gmax."""
        t = {(0, 2, "ln(nu)"): fmpq(1, 2), (0, 2, "1"): fmpq(-3, 4),
             (0, 0, "ln(nu)"): self.lnz, (0, 0, self.const_marker): fmpq(1)}
        if self.lin_ln2pi:
            t[(0, 1, "ln(2)")] = self.lin_ln2pi
            t[(0, 1, "ln(pi)")] = self.lin_ln2pi
        for g in range(2, gmax + 1):
            t[(0, 2 - 2 * g, "1")] = self.kappa(g)
        return PiSeries(t)

    def to_json(self):
        return {"z2_ln_z": "1/2", "z2": "-3/4", "z_ln_2pi": _cstr(self.lin_ln2pi),
                "ln_z": _cstr(self.lnz), "constant": self.const_marker,
                "kappa": [{"g": e + 1, "value": _cstr(c)} for e, c in self.tail.items()]}


def barnes_asym(order: int) -> GammaAsym:
    """ln G(1+z) as z -> inf; tail through kappa_order."""
    if order < 2:
        raise DomainError("order must be >= 2")
    tail = TruncSeries([0] + [kappa(g) for g in range(2, order + 1)], 0, order, "w")
    return GammaAsym(tail, fmpq(-1, 12), fmpq(1, 2), "zeta'(-1)")


def bhat(m: int) -> fmpq:
    return (1 - fmpq(2) ** (1 - m)) * bernoulli(m) / _fact(m)


def _fact(m):
    r = 1
    for i in range(2, m + 1):
        r *= i
    return r


def kappa_beta_poly(g: int):
    """kappa_g^(beta) in Q[b, bi]."""
    p = COEF_CTX.from_dict({})
    for e, c in kappa_beta_terms(g).items():
        k = e // 2
        p += c * (_B ** k if k > 0 else (_BI ** (-k) if k < 0 else 1))
    return p


def gamma_beta_asym(order: int, beta=None) -> GammaAsym:
    """ln Gamma_beta^-1(Q/2 + z) as z -> inf.

    ``beta`` None keeps b = beta^2 symbolic; a rational value is substituted.
    """
    if order < 2:
        raise DomainError("order must be >= 2")
    coeffs = [0] + [kappa_beta_poly(g) for g in range(2, order + 1)]
    lnz = -(_B + _BI) / 24
    if beta is not None:
        b = fmpq(beta) ** 2
        coeffs = [c if c == 0 else _eval_b(c, b) for c in coeffs]
        lnz = _eval_b(lnz, b)
    tail = TruncSeries(coeffs, 0, order, "w")
    return GammaAsym(tail, lnz, fmpq(0), "c0(beta)")


def _eval_b(p, b):
    return sum((c * b ** u * (1 / b) ** v for (u, v), c in p.to_dict().items()), fmpq(0))


# ---------------------------------------------------------------- Painleve I fixtures

# E_k(nu) = i^k * sign * (sum coeffs nu^m) / den   (k <= 5)
E_TABLE_RAW = {
    1: (-1, {3: 94, 1: 17}, 96),
    2: (1, {4: 38585, 2: 18385, 0: 336}, 23040),
    3: (-1, {5: 5326258, 3: 5019530, 1: 541269}, 1105920),
    4: (1, {6: 31386901, 4: 50078328, 2: 14438609, 0: 188160}, 1769472),
    5: (-1, {7: 32160819372, 5: 78779679122, 3: 45102923992, 1: 3752724735}, 424673280),
}
# Z_k for k <= 3, same convention
Z_TABLE_RAW = {
    1: (-1, {3: 94, 1: 17}, 96),
    2: (1, {6: 44180, 4: 170320, 2: 74985, 0: 1344}, 92160),
    3: (-1, {9: 4152920, 7: 45777060, 5: 156847302, 3: 124622833, 1: 13059000}, 26542080),
}
PIFE = {2: fmpq(-7, 480), 4: fmpq(245, 2304), 6: fmpq(-259553, 92160)}


def _table(raw):
    """{k: {m: GaussRat}}."""
    out = {}
    for k, (sgn, poly, den) in raw.items():
        ph = GaussRat(0, 1) ** k * sgn
        out[k] = {m: ph * fmpq(c, den) for m, c in poly.items()}
    return out


def e_table() -> dict:
    return _table(E_TABLE_RAW)


def z_table() -> dict:
    return _table(Z_TABLE_RAW)


def pi_series_from_table(table: dict) -> PiSeries:
    """sum_k E_k(nu) s^-k in the x variable."""
    t = {}
    for k, poly in table.items():
        for m, c in poly.items():
            t[(k, m - k, "1")] = _real_from(c, k)
    return PiSeries(t)


def derived_e_table(lhs: PiSeries, kmin: int, kmax: int) -> dict:
    """E_k read off the TR/HAE free energy."""
    out = {}
    for k in range(kmin, kmax + 1):
        poly = {}
        for (j, a, m), c in lhs.terms.items():
            if j == k and m == "1":
                poly[j + a] = GaussRat(c) * GaussRat(0, 1) ** (k % 4)
        out[k] = poly
    return out


def e_structure_ok(table: dict) -> bool:
    """deg E_k <= k + 2 and parity (-1)^k."""
    return all(all(m <= k + 2 and (m - k) % 2 == 0 for m in poly) for k, poly in table.items())


def z_from_e(table: dict, kmax: int) -> dict:
    """Z = exp(sum E_k s^-k): k Z_k = sum_j j E_j Z_(k-j)."""
    def mul(p, q):
        r = {}
        for a, x in p.items():
            for b, y in q.items():
                r[a + b] = r.get(a + b, GaussRat(0)) + x * y
        return {m: c for m, c in r.items() if c}
    Z = {0: {0: GaussRat(1)}}
    for k in range(1, kmax + 1):
        acc = {}
        for j in range(1, k + 1):
            for m, c in mul(table.get(j, {}), Z[k - j]).items():
                acc[m] = acc.get(m, GaussRat(0)) + c * j
        Z[k] = {m: c / k for m, c in acc.items() if c}
    return {k: v for k, v in Z.items() if k}


def _poly_json(p):
    return [[m, str(c)] for m, c in sorted(p.items(), reverse=True)]


# ---------------------------------------------------------------- residual machinery

def _residuals(lhs: PiSeries, rhs: PiSeries, order: int, hmin: int, hmax: int,
               skip_constants_at_h0=True):
    diff = lhs - rhs
    out = []
    for (j, a, m), c in sorted(diff.terms.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        h = -a
        if j > order or h < hmin or h > hmax:
            continue
        if skip_constants_at_h0 and j == 0 and a == 0 and m in CONSTANT_MARKERS:
            continue
        out.append({"s_power": -j, "nu_power": j + a, "hbar_power": h, "marker": m,
                    "difference": _istr(c, j)})
    return out


def _report(name, orders, residuals, fixtures, extra=None):
    r = {"schema": SCHEMA, "check_name": name, "orders_tested": orders,
         "residuals": residuals, "fixtures_used": fixtures}
    if extra:
        r.update(extra)
    return r


def trpi_rhs(gmax: int, order: int, table: dict) -> PiSeries:
    """Right side with hbar = 1: leading terms, ln G(1+nu) - (nu/2) ln 2pi, -(1/60) ln s, E."""
    lead = PiSeries({(-2, 2, "1"): fmpq(-1, 45), (-1, 2, "1"): fmpq(-4, 5),
                     (0, 2, "ln(2)"): fmpq(-2), (0, 2, "ln(3)"): fmpq(-1, 2),
                     (0, 2, "i*pi"): fmpq(-1, 4), (0, 2, "ln(s)"): fmpq(-1, 2),
                     (0, 1, "ln(2)"): fmpq(-1, 2), (0, 1, "ln(pi)"): fmpq(-1, 2),
                     (0, 0, "ln(s)"): fmpq(-1, 60)})
    return lead + barnes_asym(max(gmax, 2)).as_pi_series(gmax) + pi_series_from_table(table)


def tr_pi_residual(gmax: int = 4, order: int = 6) -> dict:
    """Both sides of the TR / Painleve I relation as double series in hbar and 1/s."""
    if gmax < 2 or order < 1:
        raise DomainError("need gmax >= 2 and order >= 1")
    lhs = total_free_energy(gmax, order)
    table = {k: v for k, v in e_table().items() if k <= order}
    derived = {}
    if order > 5:
        derived = derived_e_table(lhs, 6, order)
        table.update(derived)
    rhs = trpi_rhs(gmax, order, table)
    res = _residuals(lhs, rhs, order, -2, 2 * gmax - 2)
    # zero-parameter sector against the independent data
    extra_checks = []
    from .trdeg import pi_series_coeffs
    deg = pi_series_coeffs(gmax)
    for g in range(2, gmax + 1):
        k = 2 * g - 2
        if k > order:
            continue
        val = s_coefficient(lhs, -k, 0)
        for label, want in (("PIFE", PIFE.get(k)), ("degenerate_TR", deg[g])):
            if want is None:
                continue
            if val != want:
                extra_checks.append({"s_power": -k, "source": label, "expected": scalar_str(want),
                                     "got": str(val)})
    if not e_structure_ok(table):
        extra_checks.append({"structure": "degree/parity of E_k"})
    fixtures = {"E_k": [f"E_{k}" for k in sorted(table) if k <= 5],
                "E_k_derived": [f"E_{k}" for k in sorted(derived)],
                "PIFE": [f"s^-{k}" for k in sorted(PIFE) if k <= order and k <= 2 * gmax - 2]}
    rep = _report("tr-pi", {"s_inverse": order, "hbar": 2 * gmax - 2}, res + extra_checks, fixtures,
                  {"derived_E": {f"E_{k}": _poly_json(p) for k, p in derived.items()}})
    return rep


# ---------------------------------------------------------------- blocks

def _u_at(poly, cval):
    """{nu power: coefficient} of U(nu, c) at c = cval (fmpq or Q[b, bi])."""
    out: dict = {}
    for (m, n), c in poly.to_dict().items():
        out[m] = out.get(m, 0) + c * cval ** n
    return {m: _coef_norm(v) for m, v in out.items() if not _is_zero_coef(_coef_norm(v))}


def c_of_beta():
    """c = 1 - 6 (beta - 1/beta)^2 = 13 - 6 b - 6 bi."""
    return 13 - 6 * _B - 6 * _BI


def _block_pi_series(bc: dict, kmax: int, cval) -> PiSeries:
    """sum_k U_k (48 i)^-k s^-k in the x variable: (-1)^k 48^-k U_k nu^-k x^k."""
    t = {}
    for k in range(1, kmax + 1):
        for m, c in _u_at(bc[k], cval).items():
            t[(k, m - k, "1")] = c * fmpq(-1) ** k / fmpq(48) ** k
    return PiSeries(t)


def _block_coeffs(kmax):
    from .virasoro import block_coeffs
    return _cached(("blocks", kmax), lambda: block_coeffs(kmax))


def cft_pi_check(kmax: int = 5, with_tr: bool = True) -> dict:
    """E_k = U_k|_(c=1) (48 i)^-k and U_ln|_(c=1) = nu^2 + 1/30."""
    if kmax < 1:
        raise DomainError("kmax must be >= 1")
    bc = _block_coeffs(kmax)
    res = []
    uln = _u_at(bc["ln"], fmpq(1))
    if uln != {2: fmpq(1), 0: fmpq(1, 30)}:
        res.append({"coefficient": "U_ln", "got": {str(m): _cstr(c) for m, c in uln.items()}})
    blocks = _block_pi_series(bc, kmax, fmpq(1))
    tabled = pi_series_from_table({k: v for k, v in e_table().items() if k <= kmax})
    for (j, a, m), c in sorted((blocks - tabled).terms.items()):
        if j <= 5:
            res.append({"source": "table_E", "s_power": -j, "nu_power": j + a, "difference": _istr(c, j)})
    sources = ["table_E"]
    if with_tr:
        gmax = max(2, (kmax + 2) // 2)
        lhs = total_free_energy(gmax, kmax)
        tr = PiSeries({k: c for k, c in lhs.terms.items() if k[0] >= 1})
        for (j, a, m), c in sorted((blocks - tr).terms.items()):
            res.append({"source": "tr_hae", "s_power": -j, "nu_power": j + a, "difference": _istr(c, j)})
        sources.append("tr_hae")
    rep = _report("cft-pi", {"k": list(range(1, kmax + 1))}, res,
                  {"E_k": [f"E_{k}" for k in range(1, min(kmax, 5) + 1)], "compared_against": sources})
    if res:
        raise ViolationError("irregular block and Painleve free energy disagree", rep)
    return rep


def beta_block_check(kmax: int = 5) -> dict:
    """Deformed free energies against the block at c = 1 - 6 (beta - 1/beta)^2."""
    if kmax < 1:
        raise DomainError("kmax must be >= 1")
    gmax = max(2, (kmax + 2) // 2)
    lhs = total_free_energy(gmax, kmax, beta=True)
    bc = _block_coeffs(kmax)
    c = c_of_beta()
    uln = _u_at(bc["ln"], c)
    # U_ln ln(epsilon), ln(epsilon) = -(1/2)(ln 48 + i pi/2 + ln s)
    t = {}
    for m, u in uln.items():
        for mk, w in (("ln(2)", -2), ("ln(3)", fmpq(-1, 2)), ("i*pi", fmpq(-1, 4)), ("ln(s)", fmpq(-1, 2))):
            t[(0, m, mk)] = u * w
    rhs = PiSeries(t) + PiSeries({(-2, 2, "1"): fmpq(-1, 45), (-1, 2, "1"): fmpq(-4, 5)})
    gam = gamma_beta_asym(max(gmax, 2))
    rhs = rhs + gam.as_pi_series(gmax) + _block_pi_series(bc, kmax, c)
    res = _residuals(lhs, rhs, kmax, -2, 2 * gmax - 2)
    rep = _report("beta-block", {"k": list(range(1, kmax + 1)), "genus": gmax}, res,
                  {"U": ["U_ln"] + [f"U_{k}" for k in range(1, kmax + 1)]},
                  {"central_charge": "13 - 6*beta^2 - 6*beta^-2"})
    if res:
        raise ViolationError("deformed free energy and block disagree", rep)
    return rep


# ---------------------------------------------------------------- TR versus HAE

def tr_hae_crosscheck(g: int, kmax: int) -> dict:
    """nu^(2g-2) F_g (HAE) in y = nu Lambda against kappa_g + sum F_g^[k] y^(2g-2+k) (TR)."""
    from .trell import lambda_fg
    d = build_dictionary(max(2 * g - 1 + kmax, 2))
    state = _hae_state(max(g, 2), False)
    n = 2 * g - 1 + kmax
    ser = scaled_series(state, state.F[g].pure(2 * g - 2), g, n)
    qy = TruncSeries([c.re for _, c in d.q_lambda_series()], 1, d.q_of_x.order, "y")
    if any(not c.is_real() for _, c in d.q_lambda_series()):
        raise DomainError("cross-check needs the real branch")
    hae_y = _rename(ser, "y").compose(qy).truncate(n)
    tr = lambda_fg(g, kmax)
    mism = []
    if hae_y[0] != kappa(g):
        mism.append({"power": 0, "hae": scalar_str(hae_y[0]), "tr": scalar_str(kappa(g))})
    for p in range(1, 2 * g - 2):
        if hae_y[p] != 0:
            mism.append({"power": p, "hae": scalar_str(hae_y[p]), "tr": "0"})
    for k, v in enumerate(tr):
        if hae_y[2 * g - 2 + k] != v:
            mism.append({"power": 2 * g - 2 + k, "hae": scalar_str(hae_y[2 * g - 2 + k]), "tr": scalar_str(v)})
    rep = _report("tr-hae", {"g": g, "k": kmax}, mism, {},
                  {"F_g^[k]": [scalar_str(v) for v in tr],
                   "vanishing_powers": list(range(1, 2 * g - 2))})
    if mism:
        raise ViolationError(f"TR and HAE disagree for g={g}", rep)
    return rep


# ---------------------------------------------------------------- one instanton

class InstantonDatum:
    def __init__(self, action, action_lambda, shift, prefactor, hbar_order):
        self.action = action
        self.action_lambda = action_lambda
        self.shift = shift
        self.prefactor = prefactor
        self.hbar_order = hbar_order

    def to_json(self):
        return {"schema": SCHEMA, "check_name": "instanton",
                "exponent_leading": "-phi/hbar, phi = d F0/d nu",
                "phi": self.action.to_json(),
                "phi_lambda": self.action_lambda,
                "shift_difference": {str(h): p.to_json() for h, p in sorted(self.shift.items())},
                "prefactor_times_2pi_i": {str(h): p.to_json() for h, p in sorted(self.prefactor.items())},
                "hbar_order": self.hbar_order}


def phi_in_lambda(phi: PiSeries, d: Dictionary):
    """phi = (1/Lambda) (L(y) ln(y/64) + P(y)) with y = nu Lambda (minus branch)."""
    if d.branch != "minus":
        raise DomainError("Lambda form implemented for the real branch")
    kap = d.kappa.re
    poly: dict = {}
    log = fmpq(0)
    for (j, a, m), c in phi.terms.items():
        # c x^j nu^a, x = kap y, nu = y / Lambda; a = 1 for genus zero
        if a != 1:
            raise ViolationError("action is not of genus zero")
        e = j + 1
        if m == "1":
            poly[e] = poly.get(e, 0) + c * kap ** j
        elif m in ("ln(nu)", "ln(s)", "ln(2)", "ln(3)", "i*pi"):
            # nu ln(-x/48) = nu ln(y/64) on this branch
            if m == "ln(nu)":
                log += c
        else:
            raise ViolationError(f"unexpected marker {m}")
    out = {"log_coeff_y": scalar_str(log), "series": [[e, scalar_str(c)] for e, c in sorted(poly.items()) if c != 0]}
    return out


def one_instanton(order: int = 4, hbar_order: int = 2) -> InstantonDatum:
    """Formal pieces of F(t, nu - hbar) - F(t, nu) and (1 + hbar dF/dnu(nu - hbar)).

    The difference D = sum_m hbar^m D_m starts at m = -1 with D_-1 = -phi.
    """
    if order < 1 or hbar_order < -1:
        raise DomainError("order >= 1 and hbar_order >= -1 required")
    gmax = max(2, (hbar_order + 3) // 2 + 1)
    state = _hae_state(gmax, False)
    d = build_dictionary(max(order + 3, 2))
    F = {g: fg_large_s(g, order, state, d) for g in range(gmax + 1)}
    ders: dict = {}

    def der(g, n):
        if (g, n) not in ders:
            ders[(g, n)] = F[g] if n == 0 else der(g, n - 1).d_nu()
        return ders[(g, n)]
    phi = der(0, 1)
    shift = {}
    # F(nu - hbar) - F(nu): hbar^(2g-2+n) (-1)^n / n! d^n F_g
    for m in range(-1, hbar_order + 1):
        acc = PiSeries(order=phi.order)
        for g in range(gmax + 1):
            n = m - (2 * g - 2)
            if n >= 1:
                acc = acc + der(g, n).scale(fmpq(-1) ** n / _fact(n))
        shift[m] = acc
    # hbar dF/dnu (nu - hbar) = sum hbar^(2g-1+n) (-1)^n / n! d^(n+1) F_g
    pref = {}
    for m in range(-1, hbar_order + 1):
        acc = PiSeries({(0, 0, "1"): fmpq(1)} if m == 0 else {}, phi.order)
        for g in range(gmax + 1):
            n = m - (2 * g - 1)
            if n >= 0:
                acc = acc + der(g, n + 1).scale(fmpq(-1) ** n / _fact(n))
        pref[m] = acc
    return InstantonDatum(phi, phi_in_lambda(phi, d), shift, pref, hbar_order)
