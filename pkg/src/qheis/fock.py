"""The state algebra: polynomials in generators x_ij^(-r) modulo the trace
ideal, with creation/annihilation fields and normal-ordered products.

A generator is a triple (i, j, r) standing for x_ij^(-r) with depth r >= 1;
a monomial is a sorted tuple of generators (the algebra is commutative); a
`State` maps monomials to truncated h-series coefficients.  The trace ideal
is generated by the diagonal sums over i of x_ii^(-r); normal form
eliminates the (N, N, r) generator by the substitution
x_NN^(-r) -> -(x_11^(-r) + ... + x_{N-1,N-1}^(-r)).

The annihilation field acts as a derivation: on each generator occurrence
it emits a mode of the contraction kernel -s(u0 - v) (u0 dominant) and
deletes the generator; on the vacuum it gives zero.  Normal-ordered
products sum kernel factors over matchings, with the remaining positions
acting as plain fields.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .series import HSeries, LaurentExpr, Q, genbinom, payload_is_zero
from .rmatrix import RMatrixBundle

VACUUM = ()


def generator(i: int, j: int, r: int) -> tuple:
    if r < 1:
        raise ValueError("generator depth must be >= 1")
    return (i, j, r)


def monomial(*gens) -> tuple:
    return tuple(sorted(gens, key=lambda g: (g[2], g[0], g[1])))


def monomial_degree(mono) -> int:
    """Total depth: the sum of generator depths."""
    return sum(g[2] for g in mono)


def _normal_mono(mono, N):
    """Expand every (N,N,r) factor via the trace relation.

    Returns {normal monomial: Fraction multiplier}."""
    for pos, g in enumerate(mono):
        if g[0] == N and g[1] == N:
            rest = mono[:pos] + mono[pos + 1:]
            out = {}
            for i in range(1, N):
                sub = _normal_mono(monomial(*rest, (i, i, g[2])), N)
                for m, c in sub.items():
                    out[m] = out.get(m, Q(0)) - c
            return {m: c for m, c in out.items() if c}
    return {mono: Q(1)}


class State:
    """Finite linear combination of monomials with HSeries coefficients.

    Also serves as the result type of field applications, in which case
    the coefficients are h-series of Laurent expressions in the field
    variables."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        ts = {}
        if terms:
            for m, c in terms.items():
                if isinstance(c, HSeries):
                    if not c.is_zero():
                        ts[m] = c
                else:
                    raise TypeError("state coefficients must be HSeries")
        self.terms = ts

    @classmethod
    def vacuum(cls, K: int):
        return cls({VACUUM: HSeries.one(K)})

    @classmethod
    def from_mono(cls, mono, K: int, coeff=Q(1)):
        return cls({monomial(*mono): HSeries.const(coeff, K)})

    @classmethod
    def zero(cls):
        return cls()

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self):
        return sorted(self.terms)

    def coeff(self, mono) -> HSeries:
        return self.terms.get(tuple(mono))

    def degree(self) -> int:
        return max((monomial_degree(m) for m in self.terms), default=0)

    def __add__(self, other: "State") -> "State":
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
        st = State.__new__(State)
        st.terms = out
        return st

    def __sub__(self, other: "State") -> "State":
        return self + other.scale(Q(-1))

    def __neg__(self) -> "State":
        return self.scale(Q(-1))

    def scale(self, factor) -> "State":
        """Multiply every coefficient by a scalar or an HSeries."""
        out = {}
        for m, c in self.terms.items():
            nc = c * factor if isinstance(factor, HSeries) else c * factor
            if not nc.is_zero():
                out[m] = nc
        st = State.__new__(State)
        st.terms = out
        return st

    def map_coeffs(self, fn) -> "State":
        out = {}
        for m, c in self.terms.items():
            nc = fn(c)
            if not nc.is_zero():
                out[m] = nc
        st = State.__new__(State)
        st.terms = out
        return st

    def normalize(self, N: int) -> "State":
        """Canonical coset representative modulo the trace ideal."""
        out = {}
        for m, c in self.terms.items():
            for nm, mult in _normal_mono(m, N).items():
                s = out.get(nm)
                add = c * mult
                s = add if s is None else s + add
                if s.is_zero():
                    out.pop(nm, None)
                else:
                    out[nm] = s
        st = State.__new__(State)
        st.terms = out
        return st

    def diff_witness(self, other: "State", hmod=None):
        """First differing coefficient within common caps, or None.

        Comparison is per monomial and per h-order; Laurent payloads are
        compared after subtracting, which restricts to the common capped
        window automatically."""
        monos = sorted(set(self.terms) | set(other.terms))
        for m in monos:
            a = self.terms.get(m)
            b = other.terms.get(m)
            if a is None:
                a = HSeries(b.cap, [])
            if b is None:
                b = HSeries(a.cap, [])
            bad = a.agrees(b, hmod)
            if bad is not None:
                return (m, bad[0], bad[1])
        return None

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.diff_witness(other) is None

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for m in self.monomials():
            name = "*".join(f"x[{i},{j}](-{r})" for i, j, r in m) or "1"
            bits.append(f"({self.terms[m]}) {name}")
        return " + ".join(bits)

    __repr__ = __str__


FieldResult = State  # field values: monomial -> Laurent-valued h-series


# ---------------------------------------------------------------------------
# matchings


def matchings(n: int, k: int):
    """All sets of k disjoint ordered pairs (p, q), p < q, in {1..n}, each
    returned with its sorted complement."""
    if k < 0 or 2 * k > n:
        raise ValueError("pair count out of range")
    out = []

    def rec(avail, acc):
        if len(acc) == k:
            used = {x for pq in acc for x in pq}
            out.append((tuple(acc), tuple(i for i in range(1, n + 1) if i not in used)))
            return
        if len(avail) < 2 * (k - len(acc)):
            return
        p = avail[0]
        rest = avail[1:]
        for qi, q in enumerate(rest):
            rec(rest[:qi] + rest[qi + 1:], acc + [(p, q)])
        rec(rest, acc)  # p stays unpaired

    rec(list(range(1, n + 1)), [])
    return sorted(out)


def bipartite_matchings(n: int, m: int, k: int):
    """All sets of k disjoint pairs (p, q) with p in {1..n}, q in {n+1..n+m}."""
    if k < 0 or k > min(n, m):
        raise ValueError("pair count out of range")
    out = []
    for left in itertools.combinations(range(1, n + 1), k):
        for right in itertools.permutations(range(n + 1, n + m + 1), k):
            pairs = tuple(sorted(zip(left, right)))
            used = {x for pq in pairs for x in pq}
            comp = tuple(i for i in range(1, n + m + 1) if i not in used)
            out.append((pairs, comp))
    return sorted(set(out))


def matching_count(n: int, k: int) -> int:
    import math
    return math.factorial(n) // (2**k * math.factorial(k) * math.factorial(n - 2 * k))


# ---------------------------------------------------------------------------
# fields


def annihilate(bundle: RMatrixBundle, a: int, b: int, state: State, var: str,
               caps=None) -> State:
    """Action of the annihilation field entry (a, b) in the variable `var`.

    Derivation rule: each generator occurrence (c, d, r) contributes the
    coefficient of v^(r-1) in -s_abcd(var - v), var dominant, times the
    monomial with that occurrence removed; the vacuum maps to zero."""
    if bundle.formal:
        raise ValueError("field actions need a numeric central parameter")
    out = State.zero()
    for mono, coeff in state.terms.items():
        seen = set()
        for pos, g in enumerate(mono):
            if g in seen:
                continue
            seen.add(g)
            mult = mono.count(g)
            kern = bundle.s_mode(a, b, g[0], g[1], g[2], var) * Q(-mult)
            rest = mono[:pos] + mono[pos + 1:]
            out = out + State({rest: coeff * kern})
    return out.normalize(bundle.N)


def create(bundle: RMatrixBundle, a: int, b: int, state: State, var: str,
           caps) -> State:
    """Multiplication by the creation series of entry (a, b): the sum over
    depths r >= 1 of x_ab^(-r) var^(r-1), truncated by the cap on var."""
    ucap = caps[var]
    out = State.zero()
    for mono, coeff in state.terms.items():
        for r in range(1, ucap + 2):
            nm = monomial(*mono, (a, b, r))
            c = coeff * LaurentExpr.monomial(var, r - 1, Q(1), caps={var: ucap})
            out = out + State({nm: c})
    return out.normalize(bundle.N)


def field_apply(bundle: RMatrixBundle, a: int, b: int, state: State, var: str,
                caps) -> State:
    """The full field entry (a, b): creation plus annihilation."""
    return create(bundle, a, b, state, var, caps) + \
        annihilate(bundle, a, b, state, var, caps)


def matching_sum_apply(field, kernel, n: int, variables, state: State, caps) -> State:
    """Generic normal-ordered product: sum over matchings of kernel factors
    times the ordered product of the remaining fields (applied right to
    left).  `field(pos, state)` applies the field at 1-based position pos;
    `kernel(p, q)` returns the scalar h-series for a contracted pair."""
    out = State.zero()
    for k in range(n // 2 + 1):
        for pairs, comp in matchings(n, k):
            factor = None
            for p, q in pairs:
                ker = kernel(p, q)
                factor = ker if factor is None else factor * ker
            cur = state
            for pos in reversed(comp):
                cur = field(pos, cur)
            if factor is not None:
                cur = cur.scale(factor)
            out = out + cur
    return out


def normal_ordered_apply(bundle: RMatrixBundle, entries, variables, state: State,
                         caps) -> State:
    """Matrix entry of the n-fold normal-ordered product of fields.

    `entries[t]` is the (a, b) entry carried by position t+1, acting in
    `variables[t]`; contracted pairs (p, q) emit the kernel
    s_(entries p, entries q)(u_p - u_q), u_p dominant."""
    n = len(entries)
    if n == 0:
        return state
    if n == 1:
        return field_apply(bundle, entries[0][0], entries[0][1], state, variables[0], caps)

    def field(pos, st):
        a, b = entries[pos - 1]
        return field_apply(bundle, a, b, st, variables[pos - 1], caps)

    def kernel(p, q):
        return bundle.s_pair(tuple(entries[p - 1]), tuple(entries[q - 1]),
                             variables[p - 1], variables[q - 1], caps[variables[q - 1]])

    return matching_sum_apply(field, kernel, n, variables, state, caps)


def shift_substitute(fr: State, var: str, parts, sub_caps=None) -> State:
    """Coefficient-wise region-correct substitution on a field result."""
    return fr.map_coeffs(
        lambda hs: hs.map(lambda p: p.substitute(var, parts, sub_caps)
                          if isinstance(p, LaurentExpr) else p))


def D_apply(state: State) -> State:
    """Translation operator: derivation with D(x_ij^(-r)) = r x_ij^(-r-1)."""
    out = State.zero()
    for mono, coeff in state.terms.items():
        seen = set()
        for pos, g in enumerate(mono):
            if g in seen:
                continue
            seen.add(g)
            mult = mono.count(g)
            nm = monomial(*(mono[:pos] + mono[pos + 1:]), (g[0], g[1], g[2] + 1))
            out = out + State({nm: coeff * Q(g[2] * mult)})
    return out


# ---------------------------------------------------------------------------
# enumeration and sampling


def generators_of(N: int, depth: int, diagonal_only=False):
    """Normal-form generators of one depth: all (i, j) except (N, N)."""
    if diagonal_only:
        return [(i, i, depth) for i in range(1, N)]
    return [(i, j, depth) for i in range(1, N + 1) for j in range(1, N + 1)
            if not (i == N and j == N)]


def monomials_of_degree(N: int, degree: int, diagonal_only=False):
    """All normal-form monomials of the given total depth."""
    if degree == 0:
        return [VACUUM]
    out = set()

    def rec(remaining, minimum, acc):
        if remaining == 0:
            out.add(tuple(acc))
            return
        for r in range(1, remaining + 1):
            for g in generators_of(N, r, diagonal_only):
                cand = (r, g[0], g[1])
                if cand < minimum:
                    continue
                rec(remaining - r, cand, acc + [g])

    rec(degree, (0, 0, 0), [])
    return sorted(out)


def monomials_up_to_degree(N: int, degree: int, diagonal_only=False):
    res = []
    for d in range(degree + 1):
        res.extend(monomials_of_degree(N, d, diagonal_only))
    return res


def random_state(rng, N: int, K: int, max_degree: int, n_terms=2,
                 diagonal_only=False) -> State:
    """Small random state: a few monomials with small integer coefficients."""
    pool = monomials_up_to_degree(N, max_degree, diagonal_only)
    st = State.zero()
    for _ in range(n_terms):
        mono = pool[rng.randrange(len(pool))]
        coeff = Q(rng.choice([1, -1, 2, -2, 1, 3]))
        st = st + State({mono: HSeries.const(coeff, K)})
    if st.is_zero():
        st = State.vacuum(K)
    return st
