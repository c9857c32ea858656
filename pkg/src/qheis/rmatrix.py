"""Deformation-kernel construction around the rational two-site operator.

The basic object is R(u) = I - (h/u)P on an N-dimensional pair of tensor
factors.  A unique scalar series G(u, C) makes both partial traces of
G(u,C) R(u) R(-u-hC) - I vanish; G is found order by order in h from that
trace condition.  Dividing the normalized double product by h^2 yields the
kernel S(u, C), whose entries drive every commutator, contraction and
braiding computation downstream, and T(z) = S(z) - S(-z) is the odd
combination the braiding map is built from.

A second, independent route to the same data goes through the closed form
R(u) R(-u-hC) = (1 - h^2/(u(u+hC))) I - (h^2 C/(u(u+hC))) P, giving
G = N / (N - (N+C) h^2/(u(u+hC))) and
S = C (I - N P) / (N u (u+hC) - (N+C) h^2).
Those are exposed as `oracle_G` / `oracle_S` and exercised by tests only;
the bundle itself never consults them.
"""

from __future__ import annotations

from fractions import Fraction

from .series import (CPoly, HSeries, LaurentExpr, Q, genbinom, payload_is_zero)
from .tensor import TensorOp

FORMAL = "C"


def _central(central):
    """Normalize the central parameter: the string "C" means formal."""
    if central == FORMAL or central is None:
        return CPoly.gen(), True
    if isinstance(central, str):
        return Q(central), False
    return Q(central), False


class RMatrixBundle:
    """All kernel data for one (N, K, central parameter) triple.

    S and T are h-series of tensor operators with Laurent entries in `u`
    (resp. `z`); entry extraction and the cached mode kernels below are
    what the state-space and braiding layers consume.
    """

    def __init__(self, N: int, K: int, central=FORMAL, uvar: str = "u", zvar: str = "z"):
        if N < 2:
            raise ValueError("need at least two dimensions")
        if K < 0:
            raise ValueError("h-order cap must be nonnegative")
        self.N = N
        self.K = K
        self.uvar = uvar
        self.zvar = zvar
        self.central, self.formal = _central(central)
        self._caches = {}
        self._build()

    # -- construction ---------------------------------------------------------

    def _build(self):
        N, K, u = self.N, self.K, self.uvar
        cap = K + 2  # two orders are consumed by the h^-2 shift into S
        I = TensorOp.identity(N, 2)
        P = TensorOp.perm(N)
        self.I2, self.P = I, P

        self.R = HSeries(cap, [I, P * LaurentExpr.monomial(u, -1, Q(-1))])

        # R(-u-hC) = I + (h/(u+hC)) P: h^m coefficient (-C)^(m-1) u^-m P, m >= 1
        coeffs = [I]
        power = 1 if not self.formal else CPoly.const(1)
        for m in range(1, cap + 1):
            coeffs.append(P * LaurentExpr.monomial(u, -m, Q(1)) * power)
            power = power * (-self.central)
        self.R_shifted = HSeries(cap, coeffs)

        self.RR = self.R * self.R_shifted
        self.G = self._solve_G(cap)

        E = self.G * self.RR - HSeries.const(I, cap)
        for k in (0, 1):
            if not payload_is_zero(E.coeffs[k]):
                raise ArithmeticError(
                    f"normalized double product has nonzero h^{k} part: {E.coeffs[k]}")
        self.S = E.shifted(-2)
        self.T = self._build_T()

    def _solve_G(self, cap: int) -> HSeries:
        """Order-by-order solve of the vanishing-partial-trace condition.

        At each h-order the condition pins the next coefficient of G
        uniquely; an unsolvable order would be an implementation bug, not a
        property of the input, so it raises."""
        N, u = self.N, self.uvar
        I1 = TensorOp.identity(N, 1)
        G = HSeries(cap, [])
        for m in range(cap + 1):
            acc = 0
            for k in range(m + 1):
                gk = G.coeffs[k]
                if isinstance(gk, int) and gk == 0:
                    continue
                rr = self.RR.coeffs[m - k]
                if isinstance(rr, int) and rr == 0:
                    continue
                acc = acc + rr * gk if not isinstance(acc, int) else rr * gk
            tr = acc.partial_trace(1) if not isinstance(acc, int) else TensorOp.zero(N, 1)
            if m == 0:
                tr = tr - I1 * Q(N)
            residual = self._as_scalar_multiple(tr, I1)
            if payload_is_zero(residual):
                continue
            # need N * g_m * u^-m to cancel the residual
            mono = {}
            for key, c in residual.terms.items():
                exp = dict(key).get(u, 0)
                if key and (len(key) != 1 or exp == 0):
                    raise ArithmeticError(f"trace residual not a power of {u}: {residual}")
                mono[exp] = c
            if len(mono) != 1 or -m not in mono:
                raise ArithmeticError(
                    f"trace residual at h^{m} is not a u^{-m} multiple: {residual}")
            g = mono[-m] * Q(-1, N)
            G.coeffs[m] = LaurentExpr.monomial(u, -m, Q(1)) * g
        return G

    @staticmethod
    def _as_scalar_multiple(op: TensorOp, ident: TensorOp):
        """Express op as scalar * ident (raises when it is not one)."""
        if op.is_zero():
            return LaurentExpr.zero()
        scalar = None
        for (r, c), v in op.entries.items():
            if r != c:
                raise ArithmeticError("trace residual has off-diagonal entries")
            v = v if isinstance(v, LaurentExpr) else LaurentExpr.const(v)
            if scalar is None:
                scalar = v
            elif scalar != v:
                raise ArithmeticError("trace residual is not a scalar multiple of I")
        if len(op.entries) != len(ident.entries):
            raise ArithmeticError("trace residual misses diagonal entries")
        return scalar

    def _build_T(self) -> HSeries:
        z = self.zvar

        def to_z(expr: LaurentExpr) -> LaurentExpr:
            return expr if isinstance(expr, (Fraction, CPoly)) else expr.rename(self.uvar, z)

        def to_neg(expr: LaurentExpr) -> LaurentExpr:
            out = {}
            for k, c in expr.terms.items():
                e = dict(k).get(z, 0)
                out[k] = -c if e % 2 else c
            res = LaurentExpr(out, expr.caps)
            return res

        Sz = self.S.map(lambda op: op.map_entries(to_z))
        Snegz = Sz.map(lambda op: op.map_entries(to_neg))
        return Sz - Snegz

    # -- entry extraction -------------------------------------------------------

    def s_entry(self, i, j, k, l) -> HSeries:
        """Scalar series s_ijkl(u): coefficient of e_ij x e_kl in S."""
        return self._entry(self.S, i, j, k, l)

    def t_entry(self, i, j, k, l) -> HSeries:
        return self._entry(self.T, i, j, k, l)

    def s_diag(self, i, j) -> HSeries:
        """Diagonal entry s_ij(u) = s_iijj(u)."""
        return self.s_entry(i, i, j, j)

    def _entry(self, series: HSeries, i, j, k, l) -> HSeries:
        if not all(1 <= x <= self.N for x in (i, j, k, l)):
            raise ValueError("entry index out of range")
        key = ((i, k), (j, l))

        def pick(op: TensorOp):
            v = op.entries.get(key, Q(0))
            return v if isinstance(v, LaurentExpr) else LaurentExpr.const(v)

        return series.map(pick)

    # -- cached mode kernels ------------------------------------------------------

    def specialize(self, c) -> "RMatrixBundle":
        """Evaluate the formal central parameter at a rational value.

        Reuses the computed series; nothing is re-solved."""
        if not self.formal:
            raise ValueError("bundle is already numeric")
        c = Q(c) if not isinstance(c, str) else Q(c)
        clone = RMatrixBundle.__new__(RMatrixBundle)
        clone.N, clone.K = self.N, self.K
        clone.uvar, clone.zvar = self.uvar, self.zvar
        clone.central, clone.formal = c, False
        clone._caches = {}
        clone.I2, clone.P = self.I2, self.P

        def ev_expr(e):
            return e.evaluate_central(c) if isinstance(e, LaurentExpr) else \
                (e.evaluate(c) if isinstance(e, CPoly) else e)

        def ev_op(op):
            return op.map_entries(ev_expr)

        for name in ("R", "R_shifted", "RR", "S", "T"):
            setattr(clone, name, getattr(self, name).map(ev_op))
        clone.G = self.G.map(ev_expr)
        return clone

    def _cache(self, kind):
        return self._caches.setdefault(kind, {})

    def s_mode(self, a, b, c, d, r: int, var: str) -> HSeries:
        """Coefficient of v^(r-1) in s_abcd(var - v), var dominant.

        This is the contraction kernel a depth-r generator emits under the
        annihilation field; exact at every h-order (no caps)."""
        cache = self._cache("s_mode")
        key = (a, b, c, d, r, var)
        if key not in cache:
            cache[key] = self._mode1(self.s_entry(a, b, c, d), self.uvar, r, var)
        return cache[key]

    @staticmethod
    def _mode1(entry: HSeries, srcvar: str, r: int, var: str) -> HSeries:
        # term x^m of an h-order: coeff of v^(r-1) in (x - v)^m, x dominant,
        # equals C(m, r-1) (-1)^(r-1) x^(m-r+1)
        sign = Q(-1) ** ((r - 1) % 2)

        def mode(expr: LaurentExpr) -> LaurentExpr:
            out = {}
            for k, c in expr.terms.items():
                m = dict(k).get(srcvar, 0)
                if len(k) > (1 if m else 0):
                    raise ValueError("kernel entry involves unexpected variables")
                w = genbinom(m, r - 1) * sign
                if not w:
                    continue
                e = m - r + 1
                nk = ((var, e),) if e else ()
                acc = out.get(nk, Q(0)) + c * w
                if acc:
                    out[nk] = acc
                else:
                    out.pop(nk, None)
            return LaurentExpr(out)

        return entry.map(mode)

    def s_pair(self, entL, entR, vdom: str, vsub: str, subcap: int) -> HSeries:
        """The kernel series s_(entL entR)(vdom - vsub), vdom dominant,
        with nonnegative powers of vsub kept up to subcap."""
        cache = self._cache("s_pair")
        key = (entL, entR, vdom, vsub, subcap)
        if key not in cache:
            a, b = entL
            c, d = entR
            acc = HSeries(self.K, [])
            for t in range(subcap + 1):
                term = self.s_mode(a, b, c, d, t + 1, vdom) * \
                    LaurentExpr.monomial(vsub, t, Q(1), caps={vsub: subcap})
                acc = acc + term
            cache[key] = acc
        return cache[key]

    def t_mode(self, a, b, c, d, r: int, s: int) -> HSeries:
        """Coefficient of u^(r-1) v^(s-1) in t_abcd(z + u - v), z dominant.

        The braiding contraction kernel for a depth-r generator on the left
        paired with a depth-s generator on the right; exact per h-order."""
        cache = self._cache("t_mode")
        key = (a, b, c, d, r, s)
        if key not in cache:
            z = self.zvar
            j = r + s - 2
            w2 = genbinom(j, r - 1) * (Q(-1) ** ((s - 1) % 2))

            def mode(expr: LaurentExpr) -> LaurentExpr:
                out = {}
                for k, cf in expr.terms.items():
                    m = dict(k).get(z, 0)
                    w = genbinom(m, j) * w2
                    if not w:
                        continue
                    e = m - j
                    nk = ((z, e),) if e else ()
                    acc = out.get(nk, Q(0)) + cf * w
                    if acc:
                        out[nk] = acc
                    else:
                        out.pop(nk, None)
                return LaurentExpr(out)

            cache[key] = self.t_entry(a, b, c, d).map(mode)
        return cache[key]

    def t_mode_sub(self, a, b, c, d, r: int, s: int, parts, sub_caps) -> HSeries:
        """t_mode with its z argument replaced by a signed sum of variables."""
        parts = tuple(parts)
        caps_sig = tuple(sorted((sub_caps or {}).items()))
        cache = self._cache("t_mode_sub")
        key = (a, b, c, d, r, s, parts, caps_sig)
        if key not in cache:
            base = self.t_mode(a, b, c, d, r, s)
            if list(parts) == [(1, self.zvar)]:
                cache[key] = base
            else:
                cache[key] = base.map(
                    lambda p: p.substitute(self.zvar, list(parts), dict(sub_caps or {})))
        return cache[key]

    def residue_u(self) -> TensorOp:
        """Sum over h-orders of the u^-1 coefficient of every entry of S."""
        acc = TensorOp.zero(self.N, 2)
        for coeff in self.S.coeffs:
            if isinstance(coeff, int):
                continue
            picked = coeff.map_entries(
                lambda e: e.coefficient({self.uvar: -1}) if isinstance(e, LaurentExpr) else Q(0))
            acc = acc + picked
        return acc


# ---------------------------------------------------------------------------
# independent closed-form oracles (tests only)


def oracle_G(N: int, K: int, central=FORMAL, uvar: str = "u") -> HSeries:
    """G = N / (N - (N+C) h^2/(u(u+hC))), expanded by series inversion."""
    c, formal = _central(central)
    u2 = LaurentExpr.monomial(uvar, 2)
    u1 = LaurentExpr.monomial(uvar, 1)
    denom = HSeries(K + 2, [u2, u1 * c])  # u(u+hC)
    f = denom.invert().shifted(2)  # h^2/(u(u+hC))
    inner = HSeries.const(Q(N), K) - f.truncate(K) * (c + N)
    return inner.invert() * Q(N)


def oracle_S(N: int, K: int, central=FORMAL, uvar: str = "u") -> HSeries:
    """S = C (I - N P) / (N u(u+hC) - (N+C) h^2), expanded by inversion."""
    c, formal = _central(central)
    u2 = LaurentExpr.monomial(uvar, 2)
    u1 = LaurentExpr.monomial(uvar, 1)
    one = CPoly.const(1) if formal else Q(1)
    denom = HSeries(K, [u2 * (one * N), u1 * (c * N), one * (-(c + N))])
    lam = denom.invert() * c
    op = TensorOp.identity(N, 2) - TensorOp.perm(N) * Q(N)
    return lam.map(lambda e: op * e)
