"""Rank-2 Whittaker module: PBW normal ordering, the rank-5/2 Whittaker
vector, irregular block coefficients and half-integer-rank realizations.

Basis vectors are words: ascending tuples of generator indices, all <= 1,
standing for L_{w1} L_{w2} ... |J> (most negative index leftmost, then L0
powers, then L1 powers).  Coefficients are fmpq_mpoly in (nu, c).

The cyclic vector satisfies L2|J> = -nu|J>, L3|J> = 0, L4|J> = 1/4 |J> and
L_n|J> = 0 for n >= 5.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import flint

from .exactcore import (ConsistencyError, DomainError, SingularSystemError,
                        ViolationError, fmpq, scalar_str)

NC_CTX = flint.fmpq_mpoly_ctx.get(("nu", "c"), "lex")
NU, CC = NC_CTX.gens()
_ONE = NC_CTX.from_dict({(0, 0): 1})
_ZERO = NC_CTX.from_dict({})

DEFAULT_KMAX = 12


def _const(x):
    return NC_CTX.from_dict({(0, 0): fmpq(x)}) if x != 0 else _ZERO


# ---------------------------------------------------------------- keys

@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple = ()

    def __post_init__(self):
        p = tuple(self.parts)
        if any(x <= 0 for x in p) or any(a < b for a, b in zip(p, p[1:])):
            raise DomainError(f"not a partition: {p}")
        object.__setattr__(self, "parts", p)

    @property
    def size(self):
        return sum(self.parts)


@dataclass(frozen=True, order=True)
class PBWKey:
    """L_{-lam_1} ... L_{-lam_r} L0^m0 L1^m1 |J>."""
    lam: Partition = Partition()
    m0: int = 0
    m1: int = 0

    @property
    def deg(self):
        return self.lam.size + 2 * self.m0 + self.m1

    @property
    def deg1(self):
        return self.lam.size + self.m0 + self.m1

    @property
    def deg2(self):
        return self.deg

    def word(self):
        return tuple(-x for x in self.lam.parts) + (0,) * self.m0 + (1,) * self.m1

    @classmethod
    def from_word(cls, w):
        neg = tuple(-x for x in w if x < 0)
        return cls(Partition(neg), w.count(0), w.count(1))

    def label(self):
        s = "".join(f"L[{-x}]" for x in self.lam.parts)
        s += "L[0]" * self.m0 + "L[1]" * self.m1
        return s or "1"

    def to_json(self):
        return {"lambda": list(self.lam.parts), "m0": self.m0, "m1": self.m1}


def word_deg(w):
    return sum(-x if x < 0 else (2 if x == 0 else 1) for x in w)


def word_deg1(w):
    return sum(-x if x < 0 else 1 for x in w)


# ---------------------------------------------------------------- normal ordering

_LOCK = threading.RLock()
_STEP_LIMIT = 10 ** 8


def _addto(acc, word, coef):
    v = acc.get(word)
    v = coef if v is None else v + coef
    if v.is_zero():
        acc.pop(word, None)
    else:
        acc[word] = v


class NormalOrderer:
    """Memoized left action of L_n on PBW words for given eigenvalues of L2, L3, L4.

    The rewriting only ever moves a generator of larger index to the right of
    one with smaller index, lowering the graded degree; a step counter guards
    termination.
    """

    def __init__(self, lam2, lam3, lam4):
        self.base = {2: lam2, 3: lam3, 4: lam4}
        self.cache = {}
        self.steps = 0

    def act(self, n, w):
        """L_n applied to the basis word w, as {word: coeff}."""
        key = (n, w)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        self.steps += 1
        if self.steps > _STEP_LIMIT:
            raise ViolationError("normal ordering exceeded its step budget")
        if not w:
            if n <= 1:
                res = {(n,): _ONE}
            else:
                b = self.base.get(n, _ZERO)
                res = {} if b.is_zero() else {(): b}
        elif n <= w[0]:
            res = {(n,) + w: _ONE}
        else:
            # L_n L_a R = L_a (L_n R) + (n - a) L_{n+a} R + central
            a, rest = w[0], w[1:]
            res = {}
            for w2, c2 in self.act(n, rest).items():
                for w3, c3 in self.act(a, w2).items():
                    _addto(res, w3, c2 * c3)
            if n + a != 0:
                for w2, c2 in self.act(n + a, rest).items():
                    _addto(res, w2, c2 * (n - a))
            else:
                for w2, c2 in self.act(0, rest).items():
                    _addto(res, w2, c2 * (2 * n))
                if n * n * n - n:
                    _addto(res, rest, CC * fmpq(n * n * n - n, 12))
        self.cache[key] = res
        return res


_ORDERER = NormalOrderer(-NU, _ZERO, _const(fmpq(1, 4)))


def _act_word(n, w):
    return _ORDERER.act(n, w)


def clear_cache():
    with _LOCK:
        _ORDERER.cache.clear()
        _ORDERER.steps = 0


class PBWVector:
    """Finite combination of PBW words with (nu, c) polynomial coefficients."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {}
        for w, c in (entries or {}).items():
            if isinstance(w, PBWKey):
                w = w.word()
            c = c if isinstance(c, flint.fmpq_mpoly) else _const(c)
            if not c.is_zero():
                self.entries[tuple(w)] = c

    @classmethod
    def vacuum(cls):
        return cls({(): _ONE})

    def __add__(self, o):
        out = dict(self.entries)
        for w, c in o.entries.items():
            _addto(out, w, c)
        return PBWVector(out)

    def __sub__(self, o):
        return self + o.scale(-1)

    def scale(self, c):
        c = c if isinstance(c, flint.fmpq_mpoly) else _const(c)
        if c.is_zero():
            return PBWVector()
        return PBWVector({w: v * c for w, v in self.entries.items()})

    def is_zero(self):
        return not self.entries

    def __eq__(self, o):
        return isinstance(o, PBWVector) and self.entries == o.entries

    def coefficient(self, key):
        w = key.word() if isinstance(key, PBWKey) else tuple(key)
        return self.entries.get(w, _ZERO)

    def keys(self):
        return [PBWKey.from_word(w) for w in self.entries]

    def subs(self, **vals):
        out = {}
        for w, c in self.entries.items():
            out[w] = c.subs({k: fmpq(v) for k, v in vals.items()})
        return PBWVector(out)

    def to_json(self):
        rows = []
        for w in sorted(self.entries, key=lambda w: (-word_deg(w), w)):
            d = PBWKey.from_word(w).to_json()
            d["coeff"] = poly_str(self.entries[w])
            rows.append(d)
        return rows

    def __repr__(self):
        return " + ".join(f"({self.entries[w]})*{PBWKey.from_word(w).label()}"
                          for w in sorted(self.entries)) or "0"


def poly_str(p):
    """(nu, c) polynomial as a string with rational coefficients."""
    if p.is_zero():
        return "0"
    return str(p).replace("^", "**")


def act_ln(n: int, v: PBWVector) -> PBWVector:
    """Left action of L_n, normal ordered."""
    with _LOCK:
        out = {}
        for w, c in v.entries.items():
            for w2, c2 in _act_word(n, w).items():
                _addto(out, w2, c * c2)
    return PBWVector(out)


def vacuum_xi(v: PBWVector):
    """Coefficient of |J> in the PBW decomposition."""
    return v.entries.get((), _ZERO)


# ---------------------------------------------------------------- Whittaker descendants

def ansatz_keys(k: int, restricted: bool = True):
    """Words allowed in G_k: 1 <= deg <= k, deg = k mod 2 (restricted)."""
    out = []
    for ell in range(1, k + 1):
        if restricted and (k - ell) % 2:
            continue
        for a in range(ell + 1):
            for m0 in range((ell - a) // 2 + 1):
                m1 = ell - a - 2 * m0
                for lam in _partitions(a):
                    out.append(PBWKey(Partition(lam), m0, m1).word())
    return out


def _partitions(n):
    if n == 0:
        yield ()
        return
    def rec(n, mx):
        if n == 0:
            yield ()
            return
        for p in range(min(n, mx), 0, -1):
            for rest in rec(n - p, p):
                yield (p,) + rest
    yield from rec(n, n)


_RELATIONS = (3, 4, 5, 6)
_EIG = {3: fmpq(0), 4: fmpq(1, 4), 5: fmpq(0), 6: fmpq(0)}


def _eliminate(rows, ncols):
    """Sparse Gaussian elimination with constant pivots.

    rows: list of (dict col -> poly, rhs poly).  Returns the unique solution
    {col: poly}; raises SingularSystemError or ConsistencyError.
    """
    live = [r for r in rows if r[0] or not r[1].is_zero()]
    col_rows = {}
    for i, (cs, _) in enumerate(live):
        for j in cs:
            col_rows.setdefault(j, set()).add(i)
    pivots = []  # (col, row dict, rhs)
    done_rows = set()
    remaining = set(range(ncols))
    while remaining:
        best = None
        for j in remaining:
            for i in col_rows.get(j, ()):
                if i in done_rows:
                    continue
                a = live[i][0][j]
                if a.is_constant():
                    cost = len(live[i][0]) * len(col_rows[j])
                    if best is None or cost < best[0]:
                        best = (cost, i, j)
            if best is not None and best[0] <= 2:
                break
        if best is None:
            raise SingularSystemError(f"no constant pivot among {len(remaining)} unknowns")
        _, i, j = best
        prow, prhs = live[i]
        inv = 1 / fmpq(prow[j].leading_coefficient())
        prow = {jj: a * inv for jj, a in prow.items()}
        prhs = prhs * inv
        live[i] = (prow, prhs)
        done_rows.add(i)
        remaining.discard(j)
        for i2 in list(col_rows[j]):
            if i2 == i or i2 in done_rows:
                continue
            cs, rhs = live[i2]
            f = cs[j]
            new = dict(cs)
            for jj, a in prow.items():
                v = new.get(jj)
                v = -f * a if v is None else v - f * a
                if v.is_zero():
                    new.pop(jj, None)
                    col_rows[jj].discard(i2)
                else:
                    if jj not in cs:
                        col_rows.setdefault(jj, set()).add(i2)
                    new[jj] = v
            live[i2] = (new, rhs - f * prhs)
        pivots.append((j, i))
    # leftover rows must be 0 = 0 after back substitution; check afterwards
    sol = {}
    for j, i in reversed(pivots):
        cs, rhs = live[i]
        v = rhs
        for jj, a in cs.items():
            if jj != j:
                v = v - a * sol[jj]
        sol[j] = v
    return sol


class WhittakerBuilder:
    """Computes G_k|J> order by order, caching every descendant."""

    def __init__(self):
        self.desc = {0: PBWVector.vacuum()}
        self.reports = {}

    def _rows(self, k, cols):
        rows = {}
        for n in _RELATIONS:
            for j, w in enumerate(cols):
                for w2, c in _act_word(n, w).items():
                    rows.setdefault((n, w2), [{}, _ZERO])
                    r = rows[(n, w2)][0]
                    r[j] = r[j] + c if j in r else c
                if _EIG[n] != 0:
                    r = rows.setdefault((n, w), [{}, _ZERO])[0]
                    r[j] = r[j] - _const(_EIG[n]) if j in r else _const(-_EIG[n])
        prev = self.desc[k - 1]
        for w, c in prev.entries.items():
            rows.setdefault((5, w), [{}, _ZERO])
            rows[(5, w)][1] = rows[(5, w)][1] + c
        out = []
        labels = []
        for lab, (cs, rhs) in rows.items():
            cs = {j: a for j, a in cs.items() if not a.is_zero()}
            out.append((cs, rhs))
            labels.append(lab)
        return out, labels

    def _verify(self, k, vec):
        prev = self.desc[k - 1]
        for n in _RELATIONS:
            lhs = act_ln(n, vec) - vec.scale(_EIG[n])
            rhs = prev if n == 5 else PBWVector()
            if lhs != rhs:
                bad = (lhs - rhs)
                w = next(iter(bad.entries))
                raise ConsistencyError(
                    f"relation L{n} fails for G{k} at {PBWKey.from_word(w).label()}", row=(n, w))

    def _solve(self, k, restricted):
        cols = ansatz_keys(k, restricted)
        rows, _ = self._rows(k, cols)
        sol = _eliminate(rows, len(cols))
        vec = PBWVector({cols[j]: v for j, v in sol.items()})
        self._verify(k, vec)
        return vec

    def descendant(self, k: int) -> PBWVector:
        if k < 0:
            raise DomainError("k must be >= 0")
        with _LOCK:
            for j in range(1, k + 1):
                if j in self.desc:
                    continue
                try:
                    vec = self._solve(j, True)
                    self.reports[j] = {"ansatz": "restricted"}
                except (ConsistencyError, SingularSystemError) as err:
                    try:
                        vec = self._solve(j, False)
                    except (ConsistencyError, SingularSystemError) as err2:
                        raise ViolationError(
                            f"no Whittaker descendant at order {j}: {err2}",
                            {"k": j, "restricted_error": str(err), "widened_error": str(err2)})
                    bad = [PBWKey.from_word(w).label() for w in vec.entries
                           if (j - word_deg(w)) % 2]
                    raise ViolationError(
                        f"order {j}: solution exists only outside the selection rules",
                        {"k": j, "parity_violating_keys": bad, "restricted_error": str(err)})
                self.desc[j] = vec
            return self.desc[k]


_BUILDER = WhittakerBuilder()


def whittaker_descendant(k: int) -> PBWVector:
    """G_k|J> (k >= 1), built from the shared cache."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return _BUILDER.descendant(k)


def check_support(k: int) -> dict:
    v = whittaker_descendant(k)
    degs = [word_deg(w) for w in v.entries]
    return {
        "k": k,
        "terms": len(v.entries),
        "deg_bound": all(1 <= d <= k for d in degs),
        "parity": all((k - d) % 2 == 0 for d in degs),
        "deg1_bound": all(word_deg1(w) <= k for w in v.entries),
    }


def check_higher_relation(k: int, n: int = 7) -> bool:
    """[L_n, G_k]|J> = 0 for n >= 7, checked directly."""
    if n < 7:
        raise DomainError("n must be >= 7")
    return act_ln(n, whittaker_descendant(k)).is_zero()


def check_nu0_parity(k: int) -> bool:
    """At nu = 0: m0 + m1 = (k - deg)/2 mod 2 on the support."""
    v = whittaker_descendant(k).subs(nu=0)
    for w in v.entries:
        key = PBWKey.from_word(w)
        if (key.m0 + key.m1 - (k - key.deg) // 2) % 2:
            return False
    return True


def generic_first_descendant(lam2, lam3, lam4) -> PBWVector:
    """|Psi_1> for arbitrary rational eigenvalues of L2, L3, L4 (lam4 != 0).

    Solves (L3 - lam3)v = 0, (L4 - lam4)v = 0, L5 v = |J>, L6 v = 0 with xi(v) = 0
    over words of shifted degree <= 3.
    """
    lam2, lam3, lam4 = fmpq(lam2), fmpq(lam3), fmpq(lam4)
    if lam4 == 0:
        raise DomainError("L4 eigenvalue must be nonzero")
    eng = NormalOrderer(_const(lam2), _const(lam3), _const(lam4))
    cols = [(-1,), (0,), (1,), (1, 1), (0, 1), (1, 1, 1)]
    eig = {3: lam3, 4: lam4, 5: fmpq(0), 6: fmpq(0)}
    rows = {}
    for n in _RELATIONS:
        for j, w in enumerate(cols):
            for w2, c in eng.act(n, w).items():
                r = rows.setdefault((n, w2), [{}, _ZERO])[0]
                r[j] = r[j] + c if j in r else c
            if eig[n] != 0:
                r = rows.setdefault((n, w), [{}, _ZERO])[0]
                r[j] = r[j] - _const(eig[n]) if j in r else _const(-eig[n])
    rows.setdefault((5, ()), [{}, _ZERO])[1] = _ONE
    system = [({j: a for j, a in cs.items() if not a.is_zero()}, rhs) for cs, rhs in rows.values()]
    sol = _eliminate(system, len(cols))
    vec = PBWVector({cols[j]: v for j, v in sol.items()})
    for n in _RELATIONS:
        out = {}
        for w, c in vec.entries.items():
            for w2, c2 in eng.act(n, w).items():
                _addto(out, w2, c * c2)
        lhs = PBWVector(out) - vec.scale(eig[n])
        if lhs != (PBWVector.vacuum() if n == 5 else PBWVector()):
            raise ConsistencyError(f"generic first descendant fails relation L{n}")
    return vec


# ---------------------------------------------------------------- block coefficients

def l2_commutator_xi(k: int):
    """xi([L2, G_k]|J>) = xi(L2 G_k|J>) + nu xi(G_k|J>)."""
    v = whittaker_descendant(k)
    return vacuum_xi(act_ln(2, v)) + NU * vacuum_xi(v)


def xi_shortcut(k: int):
    """The same quantity from a handful of coefficients of G_k (k even)."""
    if k % 2 or k < 2:
        raise DomainError("shortcut identity is stated for even k >= 2")
    v = whittaker_descendant(k)
    half = k // 2
    total = CC * fmpq(1, 2) * v.coefficient(PBWKey(Partition((2,))))
    for ell in range(1, half + 1):
        a = v.coefficient(PBWKey(Partition(), ell - 1, 2))
        b = v.coefficient(PBWKey(Partition(), ell, 0))
        total = total + (a - 4 * NU * b) * (fmpq(2) ** (ell - 2))
    return total


def block_coeffs(kmax: int) -> dict:
    """{'ln': U_ln, 1: U_1, ..., kmax: U_kmax} as (nu, c) polynomials."""
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    out = {"ln": l2_commutator_xi(2) * fmpq(1, 30)}
    for k in range(1, kmax + 1):
        out[k] = l2_commutator_xi(2 * k + 2) * fmpq(1, 60 * k)
    return out


def block_coeffs_json(kmax: int) -> dict:
    bc = block_coeffs(kmax)
    return {"U_ln": poly_str(bc["ln"]),
            "U": [{"k": k, "poly": poly_str(bc[k])} for k in range(1, kmax + 1)]}


# ---------------------------------------------------------------- half-integer ranks

class DiffOp:
    """scalar + sum_i coef_i d/dc_i with polynomial coefficients."""

    def __init__(self, ctx, scalar, vec):
        self.ctx = ctx
        self.scalar = scalar
        self.vec = vec  # {var index: poly}

    def apply(self, f):
        out = self.scalar * f
        names = self.ctx.names()
        for i, co in self.vec.items():
            out = out + co * f.derivative(names[i])
        return out

    def is_zero(self):
        return self.scalar.is_zero() and all(v.is_zero() for v in self.vec.values())


def _commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    """[A, B] as a first-order operator."""
    scalar = A.apply(B.scalar) - A.scalar * B.scalar - (B.apply(A.scalar) - B.scalar * A.scalar)
    vec = {}
    for i in set(A.vec) | set(B.vec):
        v = A.apply(B.vec.get(i, A.ctx.from_dict({}))) - A.scalar * B.vec.get(i, A.ctx.from_dict({}))
        v = v - (B.apply(A.vec.get(i, A.ctx.from_dict({}))) - B.scalar * A.vec.get(i, A.ctx.from_dict({})))
        if not v.is_zero():
            vec[i] = v
    return DiffOp(A.ctx, scalar, vec)


class DiffOpRealization:
    """L_n -> first-order operators in c_{1/2}, ..., c_{s-1/2} (rank s - 1/2)."""

    def __init__(self, s: int):
        if s < 1:
            raise DomainError("s must be a positive integer")
        self.s = s
        self.rank = fmpq(2 * s - 1, 2)
        names = tuple(f"c{2 * j + 1}_2" for j in range(s))
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "lex")
        self.cvars = self.ctx.gens()
        self.ops = {n: self._op(n) for n in range(0, 2 * s + 1)}

    def _c(self, half2):
        """c_{half2/2} for odd half2 in 1..2s-1, else 0."""
        if half2 % 2 == 1 and 1 <= half2 <= 2 * self.s - 1:
            return self.cvars[(half2 - 1) // 2]
        return None

    def _op(self, n):
        z = self.ctx.from_dict({})
        s = self.s
        if n >= 2 * s:
            return DiffOp(self.ctx, z, {})
        scalar = z
        lo = 1 if n <= s - 1 else 2 * (n - s) + 1
        for k2 in range(lo, 2 * s, 2):
            a, b = self._c(k2), self._c(2 * n - k2)
            if a is not None and b is not None:
                scalar = scalar - a * b
        vec = {}
        if n <= s - 1:
            for k2 in range(1, 2 * (s - n), 2):
                tgt = self._c(2 * n + k2)
                if tgt is not None:
                    vec[(k2 - 1) // 2] = tgt * fmpq(k2, 2)
        return DiffOp(self.ctx, scalar, vec)

    def describe(self, n):
        op = self.ops[n]
        names = self.ctx.names()
        parts = []
        if not op.scalar.is_zero():
            parts.append(str(op.scalar))
        for i, co in sorted(op.vec.items(), reverse=True):
            parts.append(f"({co})*d/d{names[i]}")
        return " + ".join(parts) or "0"


def check_half_integer_realization(s: int, bound: int = 5) -> dict:
    """All commutators [L_m, L_n] = (n - m) L_{m+n}, 0 <= m < n <= 2s - 1."""
    if s < 1 or s > bound:
        raise DomainError(f"s must be in 1..{bound}")
    R = DiffOpRealization(s)
    defects = []
    checked = 0
    zero = DiffOp(R.ctx, R.ctx.from_dict({}), {})
    for m in range(0, 2 * s):
        for n in range(m + 1, 2 * s):
            lhs = _commutator(R.ops[m], R.ops[n])
            tgt = R.ops.get(m + n, zero) if m + n < 2 * s else zero
            diff = DiffOp(R.ctx, lhs.scalar - (n - m) * tgt.scalar,
                          {i: lhs.vec.get(i, R.ctx.from_dict({})) - (n - m) * tgt.vec.get(i, R.ctx.from_dict({}))
                           for i in set(lhs.vec) | set(tgt.vec)})
            checked += 1
            if not diff.is_zero():
                defects.append([m, n])
    report = {"s": s, "rank": scalar_str(R.rank), "pairs_checked": checked,
              "defects": defects,
              "operators": {str(n): R.describe(n) for n in range(0, 2 * s)}}
    if defects:
        raise ViolationError(f"realization of rank {R.rank} fails on {defects}", report)
    return report
