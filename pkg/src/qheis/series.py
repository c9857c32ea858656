"""Exact scalar tower: rationals, central-parameter polynomials, truncated
power series in the deformation parameter h, and multivariate Laurent
expressions with explicit expansion regions.

Everything is exact: coefficients are `fractions.Fraction` (or `CPoly` over
them), and truncation is always explicit.  An `HSeries` carries its h-order
cap K and is an element of R[[h]]/(h^(K+1)) for whatever coefficient ring R
its payloads live in.  A `LaurentExpr` carries per-variable *degree caps*
(maximum retained exponent); coefficients at or below every cap are exact,
terms above a cap are dropped and the cap records the loss.  Negative
exponents are never capped -- in this calculus they are finite at each
h-order by construction.

Negative powers of sums are only ever expanded relative to a declared
`Region`: the dominant variable keeps the negative exponents and every
subordinate variable appears with nonnegative (capped) powers.  There is no
default region; the two expansions of the same expression differ, and that
difference is meaningful, so callers must always say which one they want.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

Q = Fraction


class TruncationError(Exception):
    """Requested data lies beyond a declared truncation cap."""


class RegionError(Exception):
    """A negative power of a sum was expanded without a declared region."""


@functools.lru_cache(maxsize=None)
def genbinom(m: int, k: int) -> Q:
    """Generalized binomial coefficient C(m, k), integer m, k >= 0."""
    if k < 0:
        raise ValueError("lower index of a binomial must be nonnegative")
    num = 1
    for i in range(k):
        num *= m - i
    return Q(num, math.factorial(k))


# ---------------------------------------------------------------------------
# polynomials in the central parameter


class CPoly:
    """Polynomial in the central parameter C with Fraction coefficients.

    Stored sparsely as {exponent: coefficient}; zero coefficients are never
    kept.  Comparisons against plain numbers treat them as constants.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        cs = {}
        if coeffs:
            for e, v in coeffs.items():
                v = Q(v)
                if v:
                    cs[int(e)] = v
        self.coeffs = cs

    @classmethod
    def const(cls, value):
        return cls({0: Q(value)})

    @classmethod
    def gen(cls):
        """The polynomial C itself."""
        return cls({1: Q(1)})

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def degree(self):
        return max(self.coeffs, default=-1)

    def evaluate(self, c) -> Q:
        c = Q(c)
        return sum((v * c**e for e, v in self.coeffs.items()), Q(0))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CPoly.const(other)
        if not isinstance(other, CPoly):
            return NotImplemented
        out = dict(self.coeffs)
        for e, v in other.coeffs.items():
            s = out.get(e, Q(0)) + v
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        res = CPoly.__new__(CPoly)
        res.coeffs = out
        return res

    __radd__ = __add__

    def __neg__(self):
        res = CPoly.__new__(CPoly)
        res.coeffs = {e: -v for e, v in self.coeffs.items()}
        return res

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CPoly.const(other)
        if not isinstance(other, CPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Q(other)
            if not q:
                return CPoly()
            res = CPoly.__new__(CPoly)
            res.coeffs = {e: v * q for e, v in self.coeffs.items()}
            return res
        if not isinstance(other, CPoly):
            return NotImplemented
        out = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                e = e1 + e2
                s = out.get(e, Q(0)) + v1 * v2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        res = CPoly.__new__(CPoly)
        res.coeffs = out
        return res

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CPoly.const(other)
        if not isinstance(other, CPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs, reverse=True):
            v = self.coeffs[e]
            if e == 0:
                parts.append(str(v))
            elif e == 1:
                parts.append(f"{v}*C" if v != 1 else "C")
            else:
                parts.append(f"{v}*C^{e}" if v != 1 else f"C^{e}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def as_cpoly(x) -> CPoly:
    if isinstance(x, CPoly):
        return x
    return CPoly.const(x)


# ---------------------------------------------------------------------------
# expansion regions


@dataclass(frozen=True)
class Region:
    """Declares which variable dominates a negative-power expansion.

    The expansion of (x1 +- x2 +- ...)^r with r < 0 keeps negative powers of
    `dominant` and nonnegative (capped) powers of every `subordinate`.
    """

    dominant: str
    subordinate: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.dominant in self.subordinate:
            raise RegionError("dominant variable listed as subordinate")


# ---------------------------------------------------------------------------
# multivariate Laurent expressions

# term key: tuple of (variable, exponent) pairs sorted by variable name,
# zero exponents omitted; the empty tuple is the constant term.


def _key(exps: dict) -> tuple:
    return tuple(sorted((v, e) for v, e in exps.items() if e))


class LaurentExpr:
    """Sparse multivariate Laurent expression with per-variable degree caps.

    `terms` maps exponent keys to Fraction or CPoly coefficients; `caps`
    maps a variable name to the maximum exponent retained for it.  A
    variable absent from `caps` is untruncated (the stored data is exact in
    it).  Arithmetic combines caps so that every stored coefficient within
    the resulting caps is exact: sums take the minimum cap, and a product
    caps v at min(cap_a[v] + minexp_b[v], cap_b[v] + minexp_a[v]).
    """

    __slots__ = ("terms", "caps")

    def __init__(self, terms=None, caps=None):
        self.caps = dict(caps) if caps else {}
        ts = {}
        if terms:
            for k, c in terms.items():
                if isinstance(k, dict):
                    k = _key(k)
                if not self._within(k):
                    continue
                if isinstance(c, int):
                    c = Q(c)
                if (isinstance(c, (Fraction,)) and c) or (isinstance(c, CPoly) and c):
                    ts[k] = c
        self.terms = ts

    def _within(self, key) -> bool:
        for v, e in key:
            cap = self.caps.get(v)
            if cap is not None and e > cap:
                return False
        return True

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, value, caps=None):
        return cls({(): value}, caps)

    @classmethod
    def zero(cls, caps=None):
        return cls({}, caps)

    @classmethod
    def one(cls, caps=None):
        return cls({(): Q(1)}, caps)

    @classmethod
    def monomial(cls, var, exp, coeff=Q(1), caps=None):
        return cls({((var, exp),) if exp else (): coeff}, caps)

    # -- inspection ----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def variables(self):
        vs = set(self.caps)
        for k in self.terms:
            vs.update(v for v, _ in k)
        return sorted(vs)

    def min_exp(self, var) -> int:
        """Smallest stored exponent of `var` (0 when absent from a term)."""
        if not self.terms:
            return 0
        return min(dict(k).get(var, 0) for k in self.terms)

    def max_exp(self, var) -> int:
        if not self.terms:
            return 0
        return max(dict(k).get(var, 0) for k in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items())

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CPoly)):
            other = LaurentExpr.const(other)
        if not isinstance(other, LaurentExpr):
            return NotImplemented
        caps = dict(self.caps)
        for v, c in other.caps.items():
            caps[v] = min(caps.get(v, c), c)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if (isinstance(s, CPoly) and s) or (isinstance(s, Fraction) and s):
                out[k] = s
            else:
                out.pop(k, None)
        res = LaurentExpr.__new__(LaurentExpr)
        res.caps = caps
        res.terms = {k: c for k, c in out.items() if _key_within(k, caps)}
        return res

    __radd__ = __add__

    def __neg__(self):
        res = LaurentExpr.__new__(LaurentExpr)
        res.caps = dict(self.caps)
        res.terms = {k: -c for k, c in self.terms.items()}
        return res

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CPoly)):
            other = LaurentExpr.const(other)
        if not isinstance(other, LaurentExpr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scaled(self, s):
        if isinstance(s, int):
            s = Q(s)
        if (isinstance(s, Fraction) and not s) or (isinstance(s, CPoly) and not s):
            return LaurentExpr.zero(self.caps)
        res = LaurentExpr.__new__(LaurentExpr)
        res.caps = dict(self.caps)
        res.terms = {k: c * s for k, c in self.terms.items()}
        return res

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CPoly)):
            return self._scaled(other)
        if not isinstance(other, LaurentExpr):
            return NotImplemented
        caps = {}
        for v, cap in self.caps.items():
            caps[v] = cap + other.min_exp(v)
        for v, cap in other.caps.items():
            c2 = cap + self.min_exp(v)
            caps[v] = min(caps.get(v, c2), c2)
        out = {}
        for k1, c1 in self.terms.items():
            d1 = dict(k1)
            for k2, c2 in other.terms.items():
                d = dict(d1)
                for v, e in k2:
                    ne = d.get(v, 0) + e
                    if ne:
                        d[v] = ne
                    else:
                        del d[v]
                ok = True
                for v, e in d.items():
                    cap = caps.get(v)
                    if cap is not None and e > cap:
                        ok = False
                        break
                if not ok:
                    continue
                k = tuple(sorted(d.items()))
                c = c1 * c2
                acc = out.get(k)
                acc = c if acc is None else acc + c
                if (isinstance(acc, CPoly) and acc) or (isinstance(acc, Fraction) and acc):
                    out[k] = acc
                else:
                    out.pop(k, None)
        res = LaurentExpr.__new__(LaurentExpr)
        res.caps = caps
        res.terms = out
        return res

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CPoly)):
            return self._scaled(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CPoly)):
            other = LaurentExpr.const(other)
        if not isinstance(other, LaurentExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted((k, str(c)) for k, c in self.terms.items())))

    # -- extraction ----------------------------------------------------------

    def coefficient(self, mono: dict):
        """Exact coefficient of the monomial given by {var: exponent}.

        Variables not mentioned must have exponent zero in a matching term.
        Raises TruncationError when the request lies above a cap, since the
        stored answer there would be truncation-incomplete.
        """
        for v, e in mono.items():
            cap = self.caps.get(v)
            if cap is not None and e > cap:
                raise TruncationError(f"coefficient at {v}^{e} exceeds cap {cap}")
        return self.terms.get(_key(mono), Q(0))

    def extract(self, fixed: dict) -> "LaurentExpr":
        """Partial coefficient: fix exponents of some variables, keep the rest."""
        for v, e in fixed.items():
            cap = self.caps.get(v)
            if cap is not None and e > cap:
                raise TruncationError(f"coefficient at {v}^{e} exceeds cap {cap}")
        want = {v: e for v, e in fixed.items() if e}
        names = set(fixed)
        out = {}
        for k, c in self.terms.items():
            d = dict(k)
            got = {v: d.pop(v) for v in list(d) if v in names}
            if got != want:
                continue
            out[tuple(sorted(d.items()))] = c
        caps = {v: c for v, c in self.caps.items() if v not in names}
        return LaurentExpr(out, caps)

    # -- transformations -----------------------------------------------------

    def map_coeffs(self, fn) -> "LaurentExpr":
        out = {}
        for k, c in self.terms.items():
            nc = fn(c)
            if (isinstance(nc, CPoly) and nc) or (isinstance(nc, Fraction) and nc):
                out[k] = nc
        res = LaurentExpr.__new__(LaurentExpr)
        res.caps = dict(self.caps)
        res.terms = out
        return res

    def rename(self, var, new) -> "LaurentExpr":
        out = {}
        for k, c in self.terms.items():
            d = dict(k)
            if var in d:
                d[new] = d.pop(var)
            out[tuple(sorted(d.items()))] = c
        caps = dict(self.caps)
        if var in caps:
            caps[new] = caps.pop(var)
        return LaurentExpr(out, caps)

    def derivative(self, var) -> "LaurentExpr":
        out = {}
        for k, c in self.terms.items():
            d = dict(k)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            nk = tuple(sorted(d.items()))
            acc = out.get(nk)
            nc = c * e
            acc = nc if acc is None else acc + nc
            if (isinstance(acc, CPoly) and acc) or (isinstance(acc, Fraction) and acc):
                out[nk] = acc
            else:
                out.pop(nk, None)
        caps = dict(self.caps)
        if var in caps:
            caps[var] = caps[var] - 1  # the dropped x^(cap+1) term would land here
        return LaurentExpr(out, caps)

    def restrict(self, caps: dict) -> "LaurentExpr":
        """Tighten caps (and prune) -- used to align comparison windows."""
        nc = dict(self.caps)
        for v, c in caps.items():
            nc[v] = min(nc.get(v, c), c)
        return LaurentExpr(self.terms, nc)

    def substitute(self, var, parts, sub_caps=None) -> "LaurentExpr":
        """Replace `var` by a signed sum of variables.

        `parts` is a list of (sign, name) with the first entry dominant:
        negative powers are expanded with nonnegative powers of the later
        names, which therefore need entries in `sub_caps`.
        """
        sub_caps = dict(sub_caps or {})
        rest_caps = {v: c for v, c in self.caps.items() if v != var}
        acc = LaurentExpr.zero(rest_caps)
        cache = {}
        for k, c in self.terms.items():
            d = dict(k)
            e = d.pop(var, 0)
            rest = LaurentExpr({tuple(sorted(d.items())): c}, rest_caps)
            if e == 0:
                acc = acc + rest
                continue
            if e not in cache:
                cache[e] = expand_power(parts, e, sub_caps)
            acc = acc + rest * cache[e]
        if var in self.caps:
            # a dropped var^(cap+1) term spreads across the new variables;
            # within these tightened caps the result stays exact
            dom = parts[0][1]
            spread = sum(sub_caps.get(v, 0) for _, v in parts[1:])
            acc = acc.restrict({dom: self.caps[var] - spread})
        return acc

    def evaluate_central(self, c: Q) -> "LaurentExpr":
        return self.map_coeffs(lambda v: v.evaluate(c) if isinstance(v, CPoly) else v)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.sorted_terms():
            mono = "*".join(f"{v}^{e}" if e != 1 else v for v, e in k)
            cs = f"({c})" if isinstance(c, CPoly) and len(c.coeffs) > 1 else str(c)
            parts.append(f"{cs}*{mono}" if mono else cs)
        return " + ".join(parts)

    __repr__ = __str__


def _key_within(key, caps) -> bool:
    for v, e in key:
        cap = caps.get(v)
        if cap is not None and e > cap:
            return False
    return True


def expand_power(parts, exponent: int, sub_caps=None) -> LaurentExpr:
    """(s1*x1 + s2*x2 + ...)^exponent as a LaurentExpr, x1 dominant.

    For a nonnegative exponent this is the exact multinomial expansion
    (pruned only if `sub_caps` limits a subordinate variable).  For a
    negative exponent every subordinate variable must carry a cap, and the
    expansion keeps negative powers of the dominant variable only.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("empty replacement")
    dsign, dvar = parts[0]
    subs = parts[1:]
    sub_caps = dict(sub_caps or {})
    if exponent >= 0:
        caps = {v: sub_caps[v] for _, v in subs if v in sub_caps}
        lin = LaurentExpr(
            {((v, 1),): Q(s) for s, v in parts}, caps
        )
        out = LaurentExpr.one(caps)
        for _ in range(exponent):
            out = out * lin
        return out
    missing = [v for _, v in subs if v not in sub_caps]
    if missing:
        raise RegionError(
            f"negative power needs degree caps for subordinate variables {missing}"
        )
    ycaps = {v: sub_caps[v] for _, v in subs}
    sign = Q(1) if (dsign > 0 or exponent % 2 == 0) else Q(-1)
    y = LaurentExpr({((v, 1),): Q(s * dsign) for s, v in subs}, ycaps)
    out = LaurentExpr.zero(ycaps)
    ypow = LaurentExpr.one(ycaps)
    jmax = sum(ycaps.values())
    for j in range(jmax + 1):
        if ypow.is_zero():
            break
        out = out + LaurentExpr.monomial(dvar, exponent - j, genbinom(exponent, j)) * ypow
        ypow = ypow * y
    return out._scaled(sign)


def binomial_expand(var_pos: str, var_neg: str, exponent: int, region: Region = None,
                    caps: dict = None) -> LaurentExpr:
    """Expansion of (var_pos - var_neg)^exponent in the declared region."""
    if exponent < 0 and region is None:
        raise RegionError("negative exponent requires an explicit Region")
    if region is None or region.dominant == var_pos:
        parts = [(1, var_pos), (-1, var_neg)]
    elif region.dominant == var_neg:
        parts = [(-1, var_neg), (1, var_pos)]
    else:
        raise RegionError(f"region dominant {region.dominant!r} is not a binomial variable")
    return expand_power(parts, exponent, caps)


# ---------------------------------------------------------------------------
# truncated series in the deformation parameter


def payload_is_zero(p) -> bool:
    if isinstance(p, int):
        return p == 0
    if isinstance(p, Fraction):
        return p == 0
    if isinstance(p, CPoly):
        return not p.coeffs
    if isinstance(p, LaurentExpr):
        return not p.terms
    return p.is_zero()


def _norm(p):
    return 0 if payload_is_zero(p) else p


def _padd(a, b):
    if isinstance(a, int) and a == 0:
        return b
    if isinstance(b, int) and b == 0:
        return a
    return _norm(a + b)


def _pmul(a, b):
    if (isinstance(a, int) and a == 0) or (isinstance(b, int) and b == 0):
        return 0
    return _norm(a * b)


def payload_invert(p):
    """Inverse of a unit payload: a nonzero rational, a unit-constant CPoly,
    or a single Laurent monomial with an invertible coefficient."""
    if isinstance(p, int):
        p = Q(p)
    if isinstance(p, Fraction):
        if not p:
            raise ZeroDivisionError("zero constant term")
        return 1 / p
    if isinstance(p, CPoly):
        if p.degree() != 0:
            raise ValueError("CPoly constant term is not a unit")
        return CPoly.const(1 / p.coeffs[0])
    if isinstance(p, LaurentExpr):
        if len(p.terms) != 1:
            raise ValueError("LaurentExpr constant term is not a monomial unit")
        (k, c), = p.terms.items()
        return LaurentExpr({tuple((v, -e) for v, e in k): payload_invert(c)})
    raise ValueError(f"cannot invert payload of type {type(p).__name__}")


class HSeries:
    """Truncated power series in h: payloads live in any commutative-enough
    coefficient ring (Fraction, CPoly, LaurentExpr, or tensor operators).

    All arithmetic is modulo h^(cap+1); combining two series truncates at
    the smaller cap.  Payload slots holding the int 0 mean an exact zero.
    """

    __slots__ = ("cap", "coeffs")

    def __init__(self, cap: int, coeffs=None):
        if cap < 0:
            raise ValueError("h-order cap must be nonnegative")
        self.cap = cap
        cs = [0] * (cap + 1)
        if coeffs is not None:
            for i, p in enumerate(coeffs[: cap + 1]):
                cs[i] = _norm(p)
        self.coeffs = cs

    @classmethod
    def const(cls, payload, cap: int):
        return cls(cap, [payload])

    @classmethod
    def one(cls, cap: int):
        return cls(cap, [Q(1)])

    @classmethod
    def h_power(cls, k: int, cap: int, payload=Q(1)):
        cs = [0] * (cap + 1)
        if k <= cap:
            cs[k] = payload
        return cls(cap, cs)

    def is_zero(self) -> bool:
        return all(isinstance(c, int) and c == 0 for c in self.coeffs)

    def coefficient(self, k: int):
        if k > self.cap:
            raise TruncationError(f"h^{k} exceeds series cap {self.cap}")
        return self.coeffs[k]

    def map(self, fn) -> "HSeries":
        return HSeries(self.cap, [0 if isinstance(c, int) and c == 0 else fn(c)
                                  for c in self.coeffs])

    def truncate(self, cap: int) -> "HSeries":
        return HSeries(min(self.cap, cap), self.coeffs[: min(self.cap, cap) + 1])

    def __add__(self, other):
        if not isinstance(other, HSeries):
            other = HSeries.const(other, self.cap)
        cap = min(self.cap, other.cap)
        return HSeries(cap, [_padd(self.coeffs[i], other.coeffs[i]) for i in range(cap + 1)])

    __radd__ = __add__

    def __neg__(self):
        return HSeries(self.cap, [0 if isinstance(c, int) and c == 0 else -c
                                  for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, HSeries):
            other = HSeries.const(other, self.cap)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, HSeries):
            return self.map(lambda c: _pmul(c, other))
        cap = min(self.cap, other.cap)
        out = [0] * (cap + 1)
        for i in range(cap + 1):
            a = self.coeffs[i]
            if isinstance(a, int) and a == 0:
                continue
            for j in range(cap + 1 - i):
                b = other.coeffs[j]
                if isinstance(b, int) and b == 0:
                    continue
                out[i + j] = _padd(out[i + j], a * b)
        return HSeries(cap, out)

    def __rmul__(self, other):
        # scalars commute with every payload we use
        return self.map(lambda c: _pmul(other, c))

    def invert(self) -> "HSeries":
        """Multiplicative inverse modulo h^(cap+1); the h^0 payload must be a unit."""
        inv0 = payload_invert(self.coeffs[0])
        out = [0] * (self.cap + 1)
        out[0] = inv0
        for k in range(1, self.cap + 1):
            acc = 0
            for i in range(1, k + 1):
                acc = _padd(acc, _pmul(self.coeffs[i], out[k - i]))
            out[k] = _pmul(-1, _pmul(inv0, acc)) if not (isinstance(acc, int) and acc == 0) else 0
        return HSeries(self.cap, out)

    def shifted(self, k: int) -> "HSeries":
        """Multiply by h^k.  For k < 0 the low coefficients must vanish and
        the cap drops by |k| (those top orders are no longer known)."""
        if k >= 0:
            return HSeries(self.cap, [0] * k + self.coeffs[: self.cap + 1 - k])
        k = -k
        for i in range(min(k, self.cap + 1)):
            if not (isinstance(self.coeffs[i], int) and self.coeffs[i] == 0):
                raise ValueError(f"h^{i} coefficient nonzero; cannot divide by h^{k}")
        if self.cap < k:
            raise TruncationError("series cap too small for the h-shift")
        return HSeries(self.cap - k, self.coeffs[k:])

    def agrees(self, other: "HSeries", hmod=None):
        """First differing coefficient up to min cap (or h^hmod), else None."""
        last = min(self.cap, other.cap)
        if hmod is not None:
            if hmod - 1 > last:
                raise TruncationError(f"cannot compare mod h^{hmod} at caps {last}")
            last = hmod - 1
        for k in range(last + 1):
            d = _padd(self.coeffs[k], _pmul(-1, other.coeffs[k]))
            if not payload_is_zero(d):
                return (k, d)
        return None

    def __eq__(self, other):
        if not isinstance(other, HSeries):
            other = HSeries.const(other, self.cap)
        return self.cap == other.cap and self.agrees(other) is None

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if isinstance(c, int) and c == 0:
                continue
            mono = "" if k == 0 else ("h" if k == 1 else f"h^{k}")
            parts.append(f"({c}){('*' + mono) if mono else ''}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


# spec-shaped functional surface -------------------------------------------


def series_mul(a: HSeries, b: HSeries) -> HSeries:
    return a * b


def series_invert(a: HSeries) -> HSeries:
    return a.invert()


def extract_coefficient(e, mono: dict):
    """Coefficient of a Laurent monomial in a LaurentExpr, or, for an
    HSeries of LaurentExpr payloads, the HSeries of those coefficients."""
    if isinstance(e, HSeries):
        return e.map(lambda p: p.coefficient(mono) if isinstance(p, LaurentExpr)
                     else (p if not mono or all(v == 0 for v in mono.values()) else Q(0)))
    return e.coefficient(mono)


def substitute_shift(e, var: str, parts, sub_caps=None):
    """Region-correct substitution var -> signed sum (first part dominant),
    on a LaurentExpr or coefficient-wise on an HSeries."""
    if isinstance(e, HSeries):
        return e.map(lambda p: p.substitute(var, parts, sub_caps)
                     if isinstance(p, LaurentExpr) else p)
    return e.substitute(var, parts, sub_caps)
