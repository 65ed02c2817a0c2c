"""Topological recursion on the rational curve x = z^2 - 2 q0, y = 2 z (z^2 - 3 q0).

Correlators are Laurent polynomials in z_i (poles at z_i = 0 only) whose
coefficients are monomials in q0.  A correlator is stored as a dict

    (Qexp, e_1, ..., e_n) -> rational      meaning   c * q0^(-Qexp) * prod z_i^(-e_i) dz_i.

The kernel 1/(8 z^2 (z^2 - 3 q0) (z1 - z)) is expanded around z = 0 in closed
form, so each residue is a finite sum.
"""
from __future__ import annotations

import itertools
import threading
from collections import defaultdict

from .exactcore import DomainError, TruncSeries, ViolationError, fmpq, scalar_str

_CACHE: dict = {}
_LOCK = threading.RLock()


class DegCorrelator:
    def __init__(self, g, n, terms):
        self.g = g
        self.n = n
        self.terms = terms

    @property
    def chi(self):
        return 2 * self.g - 2 + self.n

    def to_json(self):
        out = []
        for key, c in sorted(self.terms.items()):
            out.append({"q0_power": -key[0], "z_powers": [-e for e in key[1:]], "coeff": scalar_str(c)})
        return {"g": self.g, "n": self.n, "laurent_terms": out}

    def coefficient(self, q0_power, z_powers):
        return self.terms.get((-q0_power,) + tuple(-e for e in z_powers), fmpq(0))

    def is_symmetric(self):
        for key in self.terms:
            for perm in itertools.permutations(key[1:]):
                if self.terms.get((key[0],) + perm) != self.terms[key]:
                    return False
        return True

    def max_pole_order(self):
        return max((max(k[1:]) for k in self.terms), default=0)

    def has_zero_residues(self):
        """No z_i^-1 term in any variable."""
        return all(1 not in k[1:] for k in self.terms)

    def only_even_powers(self):
        return all(all(e % 2 == 0 for e in k[1:]) for k in self.terms)

    def homogeneity_ok(self):
        """Scaling z -> r^(-1/5) z, q0 -> r^(-2/5) q0 multiplies W by r^(-chi).

        A term q0^-Q prod z^-e dz has weight (2Q + sum e - n)/5; it must equal chi.
        """
        return all(2 * k[0] + sum(k[1:]) - self.n == 5 * self.chi for k in self.terms)


def _w02_series(kmax, sign):
    """Taylor coefficients in z of 1/(sign*z - w)^2 = sum (k+1) (sign z)^k w^-(k+2)."""
    return [((sign ** k) * (k + 1), k + 2) for k in range(kmax + 1)]


def _factor_terms(g, m, sign, kmax_hint):
    """Terms of f_{g,m}(sign*z, others) as list of (zexp, Qexp, other_exps, coeff).

    For (0, 2) returns its Taylor expansion truncated at z^kmax_hint.
    """
    if (g, m) == (0, 2):
        return [(e - 2, 0, (e,), fmpq(c)) for c, e in _w02_series(kmax_hint, sign)]
    W = deg_correlator(g, m).terms
    out = []
    for key, c in W.items():
        a = key[1]
        s = c if (sign > 0 or a % 2 == 0) else -c
        out.append((-a, key[0], key[2:], s))
    return out


def _min_zexp(g, m):
    if (g, m) == (0, 2):
        return 0
    return -deg_correlator(g, m).max_pole_order()


def deg_correlator(g: int, n: int) -> DegCorrelator:
    """W_{g,n} on the degenerate curve (memoized)."""
    if n < 1 or g < 0:
        raise DomainError("need g >= 0, n >= 1")
    if 2 * g - 2 + n < 1:
        raise DomainError(f"(g, n) = ({g}, {n}) is not computed by the recursion")
    with _LOCK:
        hit = _CACHE.get((g, n))
        if hit is not None:
            return hit
        res = _compute(g, n)
        _CACHE[(g, n)] = res
        return res


def _compute(g, n):
    K = n - 1  # other variables z_2..z_n
    R = defaultdict(lambda: fmpq(0))  # (zexp, Qexp, exps over K) -> coeff

    # W_{g-1,n+1}(z, -z, z_K)
    if g >= 1:
        if (g - 1, n + 1) == (0, 2):
            R[(-2, 0, ())] += fmpq(-1, 4)
        else:
            for key, c in deg_correlator(g - 1, n + 1).terms.items():
                a, b = key[1], key[2]
                s = c if b % 2 == 0 else -c
                R[(-a - b, key[0], key[3:])] -= s

    # sum over splittings
    idx = list(range(K))
    for g1 in range(g + 1):
        g2 = g - g1
        for r in range(K + 1):
            for I in itertools.combinations(idx, r):
                J = tuple(j for j in idx if j not in I)
                if (g1, len(I)) == (0, 0) or (g2, len(J)) == (0, 0):
                    continue
                if 2 * g1 - 1 + len(I) < 0 or 2 * g2 - 1 + len(J) < 0:
                    continue
                m1, m2 = len(I) + 1, len(J) + 1
                lo1, lo2 = _min_zexp(g1, m1), _min_zexp(g2, m2)
                t1 = _factor_terms(g1, m1, 1, 1 - lo2)
                t2 = _factor_terms(g2, m2, -1, 1 - lo1)
                for z1, q1, o1, c1 in t1:
                    for z2, q2, o2, c2 in t2:
                        ze = z1 + z2
                        if ze > 1:
                            continue
                        ex = [0] * K
                        for pos, e in zip(I, o1):
                            ex[pos] = e
                        for pos, e in zip(J, o2):
                            ex[pos] = e
                        R[(ze, q1 + q2, tuple(ex))] -= c1 * c2

    # residue against the kernel expansion
    W = defaultdict(lambda: fmpq(0))
    for (e, qe, ex), c in R.items():
        if c == 0 or e > 1:
            continue
        pref = -c / 24
        for m in range(0, (1 - e) // 2 + 1):
            W[(qe + 1 + m, 2 - e - 2 * m) + ex] += pref / fmpq(3) ** m
    terms = {k: v for k, v in W.items() if v != 0}
    return DegCorrelator(g, n, terms)


def deg_free_energy_coeff(g: int) -> fmpq:
    """c_g with F_g = c_g q0^(5-5g)."""
    if g < 2:
        raise DomainError("free energies via the residue formula need g >= 2")
    W = deg_correlator(g, 1).terms
    total = fmpq(0)
    for (qe, e), c in W.items():
        # Phi = 4/5 z^5 - 4 q0 z^3
        if e == 6:
            if qe != 5 * g - 5:
                raise ViolationError("homogeneity failure in free energy")
            total += fmpq(4, 5) * c
        elif e == 4:
            if qe - 1 != 5 * g - 5:
                raise ViolationError("homogeneity failure in free energy")
            total += -4 * c
    return total / (2 - 2 * g)


def deg_free_energy(g: int) -> dict:
    """{'g', 'c_g', 'q0_power'} for F_g = c_g q0^(5-5g)."""
    return {"g": g, "c_g": deg_free_energy_coeff(g), "q0_power": 5 - 5 * g}


# ---------------------------------------------------------------- Painleve checks

F0_COEFF = fmpq(-48, 5)   # F0 = -(48/5) q0^5
F1_LOG_COEFF = fmpq(-1, 24)  # F1 = -(1/24) ln q0 (fixed by the ODE below)


def pi_series_coeffs(gmax: int) -> dict:
    """Coefficients of s^(2-2g) in the free energy, using s^2 = -432 q0^5."""
    return {g: deg_free_energy_coeff(g) * fmpq(-432) ** (g - 1) for g in range(2, gmax + 1)}


def _d_dt(poly: dict) -> dict:
    """d/dt = -(12 q0)^-1 d/dq0 on {q0 exponent: coeff}."""
    out = {}
    for e, c in poly.items():
        if e != 0:
            out[e - 2] = out.get(e - 2, 0) + c * e * fmpq(-1, 12)
    return {e: c for e, c in out.items() if c != 0}


def _mul(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def check_zero_param_pi(gmax: int = 5) -> dict:
    """Build q = -hbar^2 d^2/dt^2 sum hbar^(2g-2) F_g and test hbar^2 q'' = 6 q^2 + t.

    Every power hbar^0 .. hbar^(2 gmax) of the residual must vanish.  Also
    returns the s^-2k coefficients of the free energy.
    """
    if gmax < 2:
        raise DomainError("gmax must be >= 2")
    # q_g as Laurent polynomials in q0: q_g = -d^2/dt^2 F_g
    dF1 = {-2: F1_LOG_COEFF * fmpq(-1, 12)}  # d/dt of (-1/24) ln q0
    qs = [_scale(_d_dt(_d_dt({5: F0_COEFF})), -1), _scale(_d_dt(dF1), -1)]
    for g in range(2, gmax + 1):
        qs.append(_scale(_d_dt(_d_dt({5 - 5 * g: deg_free_energy_coeff(g)})), -1))
    residuals = {}
    for k in range(gmax + 1):
        # hbar^(2k): q_{k-1}'' - 6 sum q_i q_{k-i} - t delta_k0, t = -6 q0^2
        r = {}
        if k >= 1:
            r = _add(r, _d_dt(_d_dt(qs[k - 1])))
        for i in range(k + 1):
            r = _add(r, _scale(_mul(qs[i], qs[k - i]), -6))
        if k == 0:
            r = _add(r, {2: fmpq(6)})
        residuals[2 * k] = r
    bad = {k: v for k, v in residuals.items() if v}
    coeffs = pi_series_coeffs(gmax)
    report = {
        "hbar_orders_checked": sorted(residuals),
        "nonzero_residuals": {str(k): {str(e): scalar_str(c) for e, c in v.items()} for k, v in bad.items()},
        "s_expansion": {f"s^{2 - 2 * g}": scalar_str(c) for g, c in coeffs.items()},
        "F0": "-48/5*q0^5",
        "F1": "-1/24*ln(q0)",
        "s_relation": "s^2 = -432*q0^5",
    }
    if bad:
        raise ViolationError(f"Painleve I residual nonzero at hbar orders {sorted(bad)}", report)
    return report


def _scale(p, c):
    return {e: v * c for e, v in p.items() if v * c != 0}


def _add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}
