"""Exact arithmetic kernel.

Gaussian rationals, sparse multivariate polynomials and rational functions
(backed by FLINT through python-flint), truncated formal series with a hard
precision contract, univariate rational differentials with residue calculus,
and a fraction-free linear solver.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

import flint

fmpq = flint.fmpq


# ---------------------------------------------------------------- errors

class ArtifactError(Exception):
    """Base class of every error raised by the package."""


class DomainError(ArtifactError, ValueError):
    pass


class TruncationError(ArtifactError):
    pass


class SingularSystemError(ArtifactError):
    pass


class ConsistencyError(ArtifactError):
    """Overdetermined system with a non-vanishing residual row."""

    def __init__(self, msg, row=None):
        super().__init__(msg)
        self.row = row


class ViolationError(ArtifactError):
    """A checked mathematical statement failed.  Maps to CLI exit code 2."""

    def __init__(self, msg, details=None):
        super().__init__(msg)
        self.details = details or {}


# ---------------------------------------------------------------- scalars

def Q(x) -> fmpq:
    """Coerce int / Fraction / str / fmpq to an fmpq."""
    if isinstance(x, fmpq):
        return x
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, flint.fmpz):
        return fmpq(x)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def qstr(x: fmpq) -> str:
    return str(x)


_GAUSS_RE = re.compile(r"^\s*([+-]?[0-9/]+)?\s*(?:([+-])\s*([0-9/]*)\*?i)?\s*$")


class GaussRat:
    """a + b*i with a, b exact rationals (the package-wide ExactScalar)."""

    __slots__ = ("re", "im")

    def __init__(self, re_=0, im_=0):
        self.re = Q(re_)
        self.im = Q(im_)

    # conversions
    @staticmethod
    def coerce(x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        return GaussRat(x, 0)

    @staticmethod
    def parse(s: str) -> "GaussRat":
        s = s.replace(" ", "")
        if s.endswith("i"):
            body = s[:-1].rstrip("*")
            # split at the last sign that is not the leading one
            k = max(body.rfind("+", 1), body.rfind("-", 1))
            if k <= 0:
                im = body if body not in ("", "+", "-") else body + "1"
                return GaussRat(0, Q(im))
            re_, im = body[:k], body[k:]
            if im in ("+", "-"):
                im += "1"
            return GaussRat(Q(re_), Q(im))
        return GaussRat(Q(s), 0)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"

    def __repr__(self):
        return f"GaussRat({self})"

    def is_real(self):
        return self.im == 0

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def conj(self):
        return GaussRat(self.re, -self.im)

    def norm(self) -> fmpq:
        return self.re * self.re + self.im * self.im

    # arithmetic
    def __add__(self, o):
        if isinstance(o, GaussRat):
            return GaussRat(self.re + o.re, self.im + o.im)
        try:
            return GaussRat(self.re + Q(o), self.im)
        except TypeError:
            return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, o):
        if isinstance(o, GaussRat):
            return GaussRat(self.re - o.re, self.im - o.im)
        try:
            return GaussRat(self.re - Q(o), self.im)
        except TypeError:
            return NotImplemented

    def __rsub__(self, o):
        try:
            return GaussRat(Q(o) - self.re, -self.im)
        except TypeError:
            return NotImplemented

    def __mul__(self, o):
        if isinstance(o, GaussRat):
            return GaussRat(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)
        try:
            q = Q(o)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re * q, self.im * q)

    __rmul__ = __mul__

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, o):
        if isinstance(o, GaussRat):
            return self * o.inverse()
        try:
            q = Q(o)
        except TypeError:
            return NotImplemented
        if q == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat(self.re / q, self.im / q)

    def __rtruediv__(self, o):
        try:
            return GaussRat(o) * self.inverse()
        except TypeError:
            return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        r, b = GaussRat(1), self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __eq__(self, o):
        if isinstance(o, GaussRat):
            return self.re == o.re and self.im == o.im
        try:
            return self.im == 0 and self.re == Q(o)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()


I = GaussRat(0, 1)


def G(x) -> GaussRat:
    """Shorthand coercion to GaussRat (accepts 'p/q+r/s*i' strings)."""
    if isinstance(x, str):
        return GaussRat.parse(x)
    return GaussRat.coerce(x)


def scalar_str(x) -> str:
    """Serialize an exact scalar (fmpq, int, GaussRat)."""
    if isinstance(x, GaussRat):
        return str(x)
    return str(Q(x))


# ---------------------------------------------------------------- polynomials

def poly_ctx(symbols: Sequence[str]):
    return flint.fmpq_mpoly_ctx.get(tuple(symbols), "lex")


class MultiPoly:
    """Sparse polynomial with Gaussian-rational coefficients.

    Stored as a pair (re, im) of FLINT rational polynomials over a fixed
    ordered symbol table.
    """

    __slots__ = ("re", "im")

    def __init__(self, re_, im_=None):
        self.re = re_
        self.im = im_ if im_ is not None else re_.context().from_dict({})

    @property
    def ctx(self):
        return self.re.context()

    @property
    def symbols(self):
        return tuple(self.ctx.names())

    @classmethod
    def gens(cls, symbols):
        ctx = poly_ctx(symbols)
        return [cls(g) for g in ctx.gens()]

    @classmethod
    def const(cls, symbols_or_ctx, c):
        ctx = symbols_or_ctx if not isinstance(symbols_or_ctx, (tuple, list)) else poly_ctx(symbols_or_ctx)
        c = G(c)
        return cls(ctx.from_dict({(0,) * ctx.nvars(): c.re}) if c.re != 0 else ctx.from_dict({}),
                   ctx.from_dict({(0,) * ctx.nvars(): c.im}) if c.im != 0 else ctx.from_dict({}))

    @classmethod
    def from_terms(cls, symbols, terms: dict):
        ctx = poly_ctx(symbols)
        re_, im_ = {}, {}
        for e, c in terms.items():
            c = G(c)
            if c.re != 0:
                re_[tuple(e)] = c.re
            if c.im != 0:
                im_[tuple(e)] = c.im
        return cls(ctx.from_dict(re_), ctx.from_dict(im_))

    def terms(self) -> dict:
        out = {}
        for e, c in self.re.to_dict().items():
            out[e] = GaussRat(c, 0)
        for e, c in self.im.to_dict().items():
            out[e] = out.get(e, GaussRat(0)) + GaussRat(0, c)
        return out

    def is_zero(self):
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self):
        return self.im.is_zero()

    def _lift(self, o):
        if isinstance(o, MultiPoly):
            return o
        if isinstance(o, GaussRat):
            return MultiPoly.const(self.ctx, o)
        if isinstance(o, (int, Fraction, fmpq, flint.fmpz)):
            return MultiPoly.const(self.ctx, o)
        raise TypeError

    def __add__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return MultiPoly(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(-self.re, -self.im)

    def __sub__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return MultiPoly(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        if o.im.is_zero():
            return MultiPoly(self.re * o.re, self.im * o.re)
        if self.im.is_zero():
            return MultiPoly(self.re * o.re, self.re * o.im)
        return MultiPoly(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise DomainError("negative power of a polynomial")
        r = MultiPoly.const(self.ctx, 1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def conj(self):
        return MultiPoly(self.re, -self.im)

    def __eq__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(tuple(sorted((e, str(c)) for e, c in self.terms().items())))

    def degree(self, sym) -> int:
        i = self.symbols.index(sym)
        d = -1
        for p in (self.re, self.im):
            if not p.is_zero():
                d = max(d, p.degrees()[i])
        return d

    def derivative(self, sym):
        return MultiPoly(self.re.derivative(sym), self.im.derivative(sym))

    def subs(self, values: dict):
        """Substitute rational values for some symbols (keeps the context)."""
        vals = {k: Q(v) for k, v in values.items()}
        return MultiPoly(self.re.subs(vals), self.im.subs(vals))

    def exact_div(self, d: "MultiPoly"):
        if not d.is_real():
            raise DomainError("exact division only by real polynomials")
        return MultiPoly(self.re / d.re, self.im / d.re)

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if self.re.is_zero():
            return f"({self.im})*i"
        return f"({self.re})+({self.im})*i"

    __repr__ = __str__

    def to_json(self):
        return [[list(e), scalar_str(c)] for e, c in sorted(self.terms().items(), reverse=True)]


# ---------------------------------------------------------------- rational functions

def _monic_scale(den):
    lc = den.leading_coefficient()
    return lc


class RatFunc:
    """num/den with den real, gcd-normalized and monic in the lex order.

    The numerator may carry Gaussian coefficients; cancellation is performed
    with the gcd of den and both real parts of num, which is exact for the
    real-coefficient systems the package solves.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _normalized=False):
        if not isinstance(num, MultiPoly):
            raise TypeError("RatFunc numerator must be a MultiPoly")
        if den is None:
            den = MultiPoly.const(num.ctx, 1)
        if not isinstance(den, MultiPoly):
            den = MultiPoly(den)
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        if not den.is_real():
            # multiply through by the conjugate to make den real
            c = den.conj()
            num, den = num * c, den * c
            _normalized = False
        if not _normalized:
            dn = den.re
            if num.is_zero():
                num, dn = num, dn.context().from_dict({(0,) * dn.context().nvars(): 1})
            else:
                g = dn.gcd(num.re) if not num.re.is_zero() else dn
                if not num.im.is_zero():
                    g = g.gcd(num.im)
                if not g.is_one():
                    dn = dn / g
                    num = MultiPoly(num.re / g, num.im / g)
                lc = dn.leading_coefficient()
                if lc != 1:
                    dn = dn / lc
                    num = MultiPoly(num.re / lc, num.im / lc)
            den = MultiPoly(dn)
        self.num = num
        self.den = den

    @property
    def ctx(self):
        return self.num.ctx

    @classmethod
    def const(cls, ctx, c):
        return cls(MultiPoly.const(ctx, c), _normalized=True)

    @classmethod
    def gens(cls, symbols):
        return [cls(g, _normalized=True) for g in MultiPoly.gens(symbols)]

    def is_zero(self):
        return self.num.is_zero()

    def _lift(self, o):
        if isinstance(o, RatFunc):
            return o
        if isinstance(o, MultiPoly):
            return RatFunc(o, _normalized=True)
        return RatFunc(MultiPoly.const(self.ctx, o), _normalized=True)

    def __add__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __sub__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("RatFunc division by zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self._lift(o) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        r = RatFunc.const(self.ctx, 1)
        for _ in range(n):
            r = r * self
        return r

    def __eq__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((hash(self.num), hash(self.den)))

    def is_polynomial(self):
        return self.den.re.is_one()

    def subs(self, values):
        return RatFunc(self.num.subs(values), self.den.subs(values))

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__

    def to_json(self):
        return {"num": str(self.num), "den": str(self.den)}


# ---------------------------------------------------------------- truncated series

def _is_zero(c) -> bool:
    if isinstance(c, (int, fmpq, Fraction, flint.fmpz)):
        return c == 0
    z = getattr(c, "is_zero", None)
    if z is not None:
        return z()
    return c == 0


EXACT = 1 << 40  # order of a series known exactly (a Laurent polynomial)


class TruncSeries:
    """Truncated series sum_j coeffs[j] * var**((start + j)/base_den).

    Exponents (times base_den) at or above ``order`` are unknown; coefficients
    between the stored ones and ``order`` are zero.  Every operation returns
    the largest order that is provably correct.
    """

    __slots__ = ("var", "base_den", "start", "coeffs", "order")

    def __init__(self, coeffs: Iterable, start: int = 0, order: int | None = None,
                 var: str = "x", base_den: int = 1):
        coeffs = [fmpq(c) if isinstance(c, int) else c for c in coeffs]
        if order is None:
            order = start + len(coeffs)
        if len(coeffs) > order - start:
            coeffs = coeffs[: max(0, order - start)]
        k = 0
        while k < len(coeffs) and _is_zero(coeffs[k]):
            k += 1
        while coeffs and _is_zero(coeffs[-1]):
            coeffs.pop()
        self.var = var
        self.base_den = base_den
        if k < len(coeffs):
            self.start = start + k
            self.coeffs = tuple(coeffs[k:])
        else:
            self.start = order
            self.coeffs = ()
        self.order = order

    # construction helpers
    @classmethod
    def gen(cls, order, var="x", base_den=1):
        """The series var**(1/base_den) known to the given order."""
        return cls([1], start=1, order=order, var=var, base_den=base_den)

    @classmethod
    def const(cls, c, order=EXACT, var="x", base_den=1):
        return cls([c], start=0, order=order, var=var, base_den=base_den)

    def _like(self, coeffs, start, order):
        return TruncSeries(coeffs, start, order, self.var, self.base_den)

    def is_zero(self):
        return len(self.coeffs) == 0

    @property
    def valuation(self):
        return self.start

    @property
    def top(self):
        """One past the largest stored exponent."""
        return self.start + len(self.coeffs)

    def __getitem__(self, e: int):
        """Coefficient of var**(e/base_den)."""
        if e >= self.order:
            raise TruncationError(f"coefficient {e}/{self.base_den} beyond order {self.order}/{self.base_den}")
        j = e - self.start
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return 0

    def items(self):
        for j, c in enumerate(self.coeffs):
            if not _is_zero(c):
                yield self.start + j, c

    def _coerce(self, o):
        if isinstance(o, TruncSeries):
            if o.var != self.var or o.base_den != self.base_den:
                raise DomainError("incompatible series (variable or exponent denominator differ)")
            return o
        return TruncSeries([o], 0, EXACT, self.var, self.base_den)

    def __add__(self, o):
        o = self._coerce(o)
        order = min(self.order, o.order)
        if self.is_zero():
            return o.truncate(order)
        if o.is_zero():
            return self.truncate(order)
        start = min(self.start, o.start)
        top = min(max(self.top, o.top), order)
        out = [0] * max(0, top - start)
        for j, c in enumerate(self.coeffs):
            e = self.start + j
            if e < top:
                out[e - start] = c
        for j, c in enumerate(o.coeffs):
            e = o.start + j
            if e < top:
                out[e - start] = out[e - start] + c
        return self._like(out, start, order)

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs], self.start, self.order)

    def __sub__(self, o):
        return self + (-self._coerce(o))

    def __rsub__(self, o):
        return (-self) + o

    def scale(self, c):
        return self._like([c * x for x in self.coeffs], self.start, self.order)

    def __mul__(self, o):
        if not isinstance(o, TruncSeries):
            return self.scale(o)
        o = self._coerce(o)
        if self.is_zero() or o.is_zero():
            order = min(self.order + o.start, o.order + self.start)
            return self._like([], order, order)
        start = self.start + o.start
        order = min(self.order + o.start, o.order + self.start)
        n = min(order - start, len(self.coeffs) + len(o.coeffs) - 1)
        a, b = self.coeffs, o.coeffs
        out = []
        for k in range(max(n, 0)):
            s = 0
            for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
                s = s + a[i] * b[k - i]
            out.append(s)
        return self._like(out, start, order)

    __rmul__ = __mul__

    def shift(self, e: int):
        """Multiply by var**(e/base_den)."""
        return self._like(list(self.coeffs), self.start + e, self.order + e)

    def truncate(self, order):
        if order >= self.order:
            return self
        return self._like(list(self.coeffs), self.start, order)

    def inverse(self):
        if self.is_zero():
            raise DomainError("inverse of a series with no known nonzero coefficient")
        a = self.coeffs
        n = self.order - self.start
        if n >= EXACT // 2:
            raise TruncationError("inverse of an exact series needs an explicit order; truncate first")
        try:
            inv0 = 1 / a[0]
        except (ZeroDivisionError, TypeError) as exc:
            raise DomainError("leading coefficient is not invertible") from exc
        out = [inv0]
        for k in range(1, n):
            s = 0
            for i in range(1, min(k, len(a) - 1) + 1):
                s = s + a[i] * out[k - i]
            out.append(-s * inv0)
        return self._like(out, -self.start, -self.start + n)

    def __truediv__(self, o):
        if not isinstance(o, TruncSeries):
            inv = 1 / o
            return self.scale(inv)
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("use .power() for non-integer exponents")
        if n < 0:
            return self.inverse() ** (-n)
        r = self._like([1], 0, EXACT)
        b = self
        while n:
            if n & 1:
                r = r * b
            n >>= 1
            if n:
                b = b * b
        return r

    def derivative(self):
        """d/dvar, exponents in units of 1/base_den."""
        out = [c * (Q(self.start + j) / self.base_den) for j, c in enumerate(self.coeffs)]
        return self._like(out, self.start - self.base_den, self.order - self.base_den)

    def theta(self):
        """var * d/dvar."""
        out = [c * (Q(self.start + j) / self.base_den) for j, c in enumerate(self.coeffs)]
        return self._like(out, self.start, self.order)

    def with_base_den(self, d: int):
        if d % self.base_den:
            raise DomainError("new exponent denominator must be a multiple")
        m = d // self.base_den
        out = []
        for c in self.coeffs:
            out.append(c)
            out.extend([0] * (m - 1))
        return TruncSeries(out, self.start * m, self.order * m, self.var, d)

    def _unit_part(self):
        """(c0, h) with self = c0 * var^start * (1 + h), h of positive valuation."""
        if self.is_zero():
            raise DomainError("series has no known nonzero coefficient")
        c0 = self.coeffs[0]
        inv = 1 / c0
        h = [0] + [c * inv for c in self.coeffs[1:]]
        return c0, self._like(h, 0, self.order - self.start)

    def _dense(self, n):
        return [self[e] if e < self.order else 0 for e in range(n)]

    def exp(self):
        if not self.is_zero() and self.start <= 0:
            raise DomainError("exp requires a series without constant or negative-power terms")
        n = self.order
        if n >= EXACT // 2:
            raise TruncationError("exp of an exact series needs an explicit order")
        f = self._dense(n)
        g = [1] + [0] * (n - 1)
        for k in range(1, n):
            s = 0
            for j in range(1, k + 1):
                if not _is_zero(f[j]):
                    s = s + f[j] * g[k - j] * j
            g[k] = s * fmpq(1, k)
        return self._like(g, 0, n)

    def log(self):
        if self.start != 0 or not (self.coeffs[0] == 1):
            raise DomainError("log requires constant term 1")
        n = self.order
        if n >= EXACT // 2:
            raise TruncationError("log of an exact series needs an explicit order")
        f = self._dense(n)
        g = [0] * n
        for k in range(1, n):
            s = f[k] * k
            for j in range(1, k):
                if not _is_zero(f[k - j]):
                    s = s - j * g[j] * f[k - j]
            g[k] = s * fmpq(1, k)
        return self._like(g, 0, n)

    def power(self, alpha, lead=None):
        """self**alpha for rational alpha.

        ``lead`` is the chosen value of c0**alpha (the branch); it is required
        unless alpha is an integer.  The leading exponent times alpha must be
        on the exponent lattice (raise base_den first if needed).
        """
        alpha = Q(alpha)
        c0, h = self._unit_part()
        v = self.start * alpha
        if v.q != 1:
            raise DomainError("leading exponent not representable; raise base_den")
        if lead is None:
            if alpha.q == 1:
                k = int(alpha.p)
                lead = c0 ** k if k >= 0 else 1 / (c0 ** (-k))
            else:
                raise DomainError("branch value required for fractional power")
        n = h.order
        if n >= EXACT // 2:
            raise TruncationError("power of an exact series needs an explicit order")
        hc = h._dense(n)
        g = [1] + [0] * (n - 1)
        for k in range(1, n):
            s = 0
            for j in range(1, k + 1):
                if not _is_zero(hc[j]):
                    s = s + hc[j] * g[k - j] * ((alpha + 1) * j - k)
            g[k] = s * fmpq(1, k)
        return self._like([lead * x for x in g], int(v.p), int(v.p) + n)

    def sqrt(self, branch=None):
        """Square root; ``branch`` is the leading coefficient of the result."""
        if self.is_zero():
            raise DomainError("sqrt of an unknown series")
        c0 = self.coeffs[0]
        if branch is None:
            branch = _exact_sqrt(c0)
        elif not (branch * branch == c0):
            raise DomainError("supplied branch does not square to the leading coefficient")
        s = self
        if self.start % 2:
            s = self.with_base_den(2 * self.base_den)
        return s.power(fmpq(1, 2), lead=branch)

    def compose(self, g: "TruncSeries"):
        """self(g(x)) for g of positive valuation (integral exponents)."""
        if self.base_den != 1 or g.base_den != 1:
            raise DomainError("composition implemented for integral exponents")
        if g.is_zero() or g.start < 1:
            raise DomainError("inner series must have positive valuation")
        vg = g.start
        order = self.order * vg if self.order < EXACT // 2 else EXACT
        nz = [e for e, _ in self.items() if e != 0]
        if nz:
            order = min(order, g.order + (min(nz) - 1) * vg)
        acc = TruncSeries([], order, order, g.var, 1)
        if self.is_zero():
            return acc
        gt = g.truncate(order)
        gp = (gt ** self.start).truncate(order) if self.start != 0 else TruncSeries([1], 0, order, g.var, 1)
        top = self.top - 1
        for e in range(self.start, top + 1):
            c = self.coeffs[e - self.start]
            if not _is_zero(c):
                acc = acc + gp.scale(c)
            if e < top:
                gp = (gp * gt).truncate(order)
        return acc.truncate(order)

    def reversion(self):
        """Compositional inverse g with self(g(x)) = x + O(x^order)."""
        if self.base_den != 1:
            raise DomainError("reversion implemented for integral exponents")
        if self.start != 1:
            raise DomainError("reversion needs zero constant term and invertible linear term")
        n = self.order
        h = self.shift(-1).inverse()  # x / f, known to order n-1
        out = [0] * n
        hp = TruncSeries([1], 0, h.order, self.var, 1)
        for k in range(1, n):
            hp = hp * h
            out[k] = hp[k - 1] * fmpq(1, k)
        return self._like(out, 0, n)

    def map(self, fn):
        return self._like([fn(c) for c in self.coeffs], self.start, self.order)

    def __eq__(self, o):
        if not isinstance(o, TruncSeries):
            return NotImplemented
        if (self.var, self.base_den, self.order) != (o.var, o.base_den, o.order):
            return False
        return self.start == o.start and len(self.coeffs) == len(o.coeffs) and \
            all(a == b for a, b in zip(self.coeffs, o.coeffs))

    def __hash__(self):
        return hash((self.var, self.base_den, self.start, self.order, len(self.coeffs)))

    def __repr__(self):
        terms = [f"({scalar_or_str(c)})*{self.var}^({e}/{self.base_den})" for e, c in self.items()]
        if self.order < EXACT // 2:
            terms.append(f"O({self.var}^({self.order}/{self.base_den}))")
        return " + ".join(terms) if terms else "0"

    def to_json(self):
        return {"var": self.var, "base_den": self.base_den,
                "order": self.order if self.order < EXACT // 2 else None,
                "terms": [[e, scalar_or_str(c)] for e, c in self.items()]}


def scalar_or_str(c):
    if isinstance(c, (GaussRat, fmpq, int, Fraction, flint.fmpz)):
        return scalar_str(c)
    return str(c)


def _exact_sqrt(c):
    if isinstance(c, (int, fmpq, flint.fmpz, Fraction)):
        q = Q(c)
        if q < 0:
            r = _exact_sqrt(-q)
            return GaussRat(0, r)
        try:
            return q.sqrt()
        except Exception as exc:
            raise DomainError(f"{q} is not a rational square") from exc
    if isinstance(c, GaussRat) and c.im == 0:
        return G(_exact_sqrt(c.re))
    raise DomainError("no canonical square root; supply a branch")


# ---------------------------------------------------------------- differentials

class UniRatDifferential:
    """f(zeta) d zeta with f = num/den, coefficient lists (lowest degree first).

    Coefficients may live in any exact field (fmpq, GaussRat, RatFunc).
    """

    __slots__ = ("coord", "num", "den")

    def __init__(self, num: Sequence, den: Sequence = (1,), coord: str = "zeta"):
        self.coord = coord
        self.num = _strip(list(num))
        self.den = _strip(list(den))
        if not self.den:
            raise ZeroDivisionError("zero denominator")

    @classmethod
    def from_flint(cls, num, den, coord="zeta"):
        """From univariate fmpq_poly objects."""
        return cls([Q(c) for c in num.coeffs()], [Q(c) for c in den.coeffs()], coord)

    def pole_structure(self):
        """(a, b, rest): den = zeta^a * (zeta^2-1)^b * rest, rest coprime to both."""
        d = flint.fmpq_poly([Q(c) for c in self.den])
        n = flint.fmpq_poly([Q(c) for c in self.num])
        g = d.gcd(n)
        d = d // g
        z = flint.fmpq_poly([0, 1])
        w = flint.fmpq_poly([-1, 0, 1])
        a = 0
        while d[0] == 0 and d.degree() > 0:
            d = d // z
            a += 1
        b = 0
        while d.degree() >= 2 and d % w == 0:
            d = d // w
            b += 1
        return a, b, d

    def laurent_at(self, point, order: int) -> TruncSeries:
        """Laurent expansion of f(point + h) in h up to h^order (exclusive)."""
        num = _taylor_shift(self.num, point)
        den = _taylor_shift(self.den, point)
        m = 0
        while m < len(den) and _is_zero(den[m]):
            m += 1
        ns = TruncSeries(num, 0, order + m + 1, var="h")
        ds = TruncSeries(den, 0, order + m + 1, var="h")
        return (ns / ds).truncate(order)

    def laurent_at_infinity(self, order: int) -> TruncSeries:
        """Expansion of f(1/w) * (-1/w^2) in w (the form in the chart w = 1/zeta)."""
        dn, dd = len(self.num) - 1, len(self.den) - 1
        num = list(reversed(self.num))  # w^dn * num(1/w)
        den = list(reversed(self.den))  # w^dd * den(1/w)
        # f(1/w) = w^(dd-dn) num~/den~ ; times -w^-2
        shift = dd - dn - 2
        ns = TruncSeries([-c for c in num], 0, order - shift + 1, var="w")
        ds = TruncSeries(den, 0, order - shift + 1, var="w")
        return (ns / ds).shift(shift).truncate(order)

    def residue(self, point="inf"):
        if isinstance(point, str) and point in ("inf", "oo", "infinity"):
            s = self.laurent_at_infinity(0)
            return s[-1] if s.order > -1 else 0
        s = self.laurent_at(point, 0)
        return s[-1] if s.order > -1 else 0


def _strip(c):
    while c and _is_zero(c[-1]):
        c.pop()
    return c


def _taylor_shift(coeffs, p):
    """Coefficients of P(p + h) in h."""
    n = len(coeffs)
    out = list(coeffs)
    if _is_zero(p) if not isinstance(p, int) else p == 0:
        return out
    # synthetic division repeated
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + p * out[j + 1]
    return out


# ---------------------------------------------------------------- linear algebra

def _to_poly_rows(A, b):
    """Clear denominators row-wise: returns rows of real fmpq_mpoly or None."""
    rows = []
    for Ai, bi in zip(A, b):
        entries = list(Ai) + [bi]
        if not all(isinstance(e, RatFunc) and e.num.is_real() for e in entries):
            return None
        l = None
        for e in entries:
            d = e.den.re
            l = d if l is None else (l * d) / l.gcd(d)
        rows.append([e.num.re * (l / e.den.re) for e in entries])
    return rows


def linsolve_fraction_free(A: Sequence[Sequence], b: Sequence):
    """Solve A x = b exactly.

    RatFunc systems with real coefficients use Bareiss elimination on the
    denominator-cleared polynomial matrix; anything else (scalars, Gaussian
    coefficients) is eliminated over its field.  Extra rows are checked and a
    ConsistencyError names the first failing one.  The returned solution is
    verified by substitution.
    """
    nrow = len(A)
    if nrow != len(b):
        raise DomainError("row count mismatch")
    ncol = len(A[0]) if nrow else 0
    rows = _to_poly_rows(A, b) if nrow and isinstance(A[0][0], RatFunc) else None
    if rows is not None:
        x = _bareiss(rows, ncol)
        ctx = A[0][0].ctx
        x = [RatFunc(MultiPoly(n), MultiPoly(d)) for n, d in x]
    else:
        x = _gauss(A, b, ncol)
    # residual check
    for i in range(nrow):
        r = -b[i]
        for j in range(ncol):
            if not _is_zero(A[i][j]):
                r = r + A[i][j] * x[j]
        if not _is_zero(r):
            raise ConsistencyError(f"residual row {i} does not vanish", row=i)
    return x


def _bareiss(rows, ncol):
    M = [list(r) for r in rows]
    n = len(M)
    ctx = M[0][0].context()
    one = ctx.from_dict({(0,) * ctx.nvars(): 1})
    prev = one
    piv_rows = []
    r = 0
    for c in range(ncol):
        p = None
        best = None
        for i in range(r, n):
            if not M[i][c].is_zero():
                size = len(M[i][c])
                if best is None or size < best:
                    p, best = i, size
        if p is None:
            raise SingularSystemError(f"column {c} has no pivot")
        M[r], M[p] = M[p], M[r]
        for i in range(r + 1, n):
            for j in range(c + 1, ncol + 1):
                M[i][j] = (M[r][c] * M[i][j] - M[i][c] * M[r][j]) / prev
            M[i][c] = ctx.from_dict({})
        prev = M[r][c]
        r += 1
    for i in range(r, n):
        if not M[i][ncol].is_zero():
            raise ConsistencyError(f"overdetermined row inconsistent after elimination (row {i})", row=i)
    # back substitution with fractions num/den
    x = [None] * ncol
    for i in range(ncol - 1, -1, -1):
        # M[i][i] x_i = M[i][ncol] - sum_j M[i][j] x_j
        num, den = M[i][ncol], one
        for j in range(i + 1, ncol):
            if not M[i][j].is_zero():
                nj, dj = x[j]
                num = num * dj - M[i][j] * nj * den
                den = den * dj
                g = num.gcd(den)
                if not g.is_one() and not g.is_zero():
                    num, den = num / g, den / g
        den = den * M[i][i]
        g = num.gcd(den)
        if not g.is_zero() and not g.is_one():
            num, den = num / g, den / g
        x[i] = (num, den)
    return x


def _gauss(A, b, ncol):
    M = [list(A[i]) + [b[i]] for i in range(len(A))]
    n = len(M)
    r = 0
    where = []
    for c in range(ncol):
        p = next((i for i in range(r, n) if not _is_zero(M[i][c])), None)
        if p is None:
            raise SingularSystemError(f"column {c} has no pivot")
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [e * inv for e in M[r]]
        for i in range(n):
            if i != r and not _is_zero(M[i][c]):
                f = M[i][c]
                M[i] = [ei - f * er for ei, er in zip(M[i], M[r])]
        where.append(r)
        r += 1
    for i in range(r, n):
        if not _is_zero(M[i][ncol]):
            raise ConsistencyError(f"overdetermined row inconsistent after elimination (row {i})", row=i)
    return [M[i][ncol] for i in range(ncol)]


# ---------------------------------------------------------------- misc exact helpers

def bernoulli(n: int) -> fmpq:
    """Bernoulli number B_n with B_1 = -1/2."""
    return fmpq(flint.fmpq.bernoulli(n)) if hasattr(flint.fmpq, "bernoulli") else _bern(n)


_BERN_CACHE = [fmpq(1)]


def _bern(n):
    while len(_BERN_CACHE) <= n:
        m = len(_BERN_CACHE)
        s = fmpq(0)
        for k in range(m):
            s += flint.fmpz.bin(m + 1, k) * _BERN_CACHE[k]
        _BERN_CACHE.append(-s / (m + 1))
    return _BERN_CACHE[n]


def factorial(n: int) -> int:
    r = 1
    for k in range(2, n + 1):
        r *= k
    return r
