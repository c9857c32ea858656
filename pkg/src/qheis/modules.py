"""Restricted modules over the deformed mode algebra, realized on diagonal
polynomial states, with the module vertex map and its verifiers.

A module is determined by a level c (the scalar action of the central
element) and a zero-mode character: N exact h-series values summing to
zero, one for each diagonal direction.  Negative modes multiply, positive
modes act by the diagonal Wick contraction, and level-zero modes act by
the character.  The module vertex map sends a diagonal monomial to the
diagonal matching-sum product at shifted arguments, exactly parallel to
the vertex map of the state algebra, with kernels restricted to the
diagonal entries.

Characters are sampled with h-degree at most 2; nothing here pins how far
the character may be deformed in h beyond that, so tests stay within it.
"""

from __future__ import annotations

from fractions import Fraction

from .series import HSeries, LaurentExpr, Q
from .rmatrix import RMatrixBundle
from .fock import (State, VACUUM, matchings, matching_sum_apply, monomial,
                   monomial_degree)
from .braiding import (Y_apply, _shift_extract, _kernel_shifted, heis_form,
                       verify_weak_assoc)
from .report import AxiomReport

__all__ = ["ZeroModeCharacter", "HeisModule"]


class ZeroModeCharacter:
    """The N pairing values of the zero modes, summing to zero."""

    def __init__(self, values):
        vals = []
        for v in values:
            if not isinstance(v, HSeries):
                raise TypeError("character values must be HSeries")
            vals.append(v)
        total = vals[0]
        for v in vals[1:]:
            total = total + v
        if not total.is_zero():
            raise ValueError("character values must sum to zero")
        self.values = vals

    @classmethod
    def zero(cls, N: int, K: int):
        return cls([HSeries(K, []) for _ in range(N)])

    @classmethod
    def from_rationals(cls, rows, K: int):
        """Build from per-index lists of h-coefficients (h-degree <= K)."""
        return cls([HSeries(K, [Q(x) for x in row]) for row in rows])

    @classmethod
    def random(cls, rng, N: int, K: int, h_degree: int = 2):
        rows = []
        acc = [Q(0)] * (h_degree + 1)
        for _ in range(N - 1):
            row = [Q(rng.randrange(-3, 4)) for _ in range(h_degree + 1)]
            rows.append(row)
            acc = [a + b for a, b in zip(acc, row)]
        rows.append([-a for a in acc])
        return cls.from_rationals(rows, K)

    def __getitem__(self, i: int) -> HSeries:
        return self.values[i - 1]


class HeisModule:
    """Level-c module on diagonal polynomial states with a zero-mode character."""

    def __init__(self, bundle: RMatrixBundle, character: ZeroModeCharacter = None):
        if bundle.formal:
            raise ValueError("module actions need a numeric central parameter")
        self.bundle = bundle
        self.N = bundle.N
        self.K = bundle.K
        self.c = bundle.central
        self.character = character or ZeroModeCharacter.zero(self.N, self.K)
        if len(self.character.values) != self.N:
            raise ValueError("character length must match the dimension")

    def check_state(self, w: State):
        for mono in w.terms:
            for i, j, _ in mono:
                if i != j:
                    raise ValueError("module states are diagonal polynomials")

    # -- mode action -----------------------------------------------------------

    def act_mode(self, i: int, r: int, w: State) -> State:
        """Action of the (i, r) mode: multiplication for r < 0, the
        character for r = 0, diagonal contraction for r > 0."""
        self.check_state(w)
        if not 1 <= i <= self.N:
            raise ValueError("mode index out of range")
        if r < 0:
            out = State.zero()
            for mono, coeff in w.terms.items():
                out = out + State({monomial(*mono, (i, i, -r)): coeff})
            return out.normalize(self.N)
        if r == 0:
            return w.scale(self.character[i])
        out = State.zero()
        for mono, coeff in w.terms.items():
            seen = set()
            for pos, g in enumerate(mono):
                if g in seen:
                    continue
                seen.add(g)
                mult = mono.count(g)
                kern = self.bundle.s_mode(i, i, g[0], g[1], g[2], "@m")
                picked = kern.map(lambda p: p.coefficient({"@m": -r - 1}))
                rest = mono[:pos] + mono[pos + 1:]
                out = out + State({rest: coeff * (picked * Q(-mult))})
        return out.normalize(self.N)

    def field(self, i: int, w: State, var: str, cap: int) -> State:
        """The generating field of direction i: all modes at once."""
        self.check_state(w)
        out = State.zero()
        for mono, coeff in w.terms.items():
            for rho in range(1, cap + 2):
                out = out + State({monomial(*mono, (i, i, rho)):
                                   coeff * LaurentExpr.monomial(var, rho - 1, Q(1),
                                                                caps={var: cap})})
            seen = set()
            for pos, g in enumerate(mono):
                if g in seen:
                    continue
                seen.add(g)
                mult = mono.count(g)
                kern = self.bundle.s_mode(i, i, g[0], g[1], g[2], var) * Q(-mult)
                out = out + State({mono[:pos] + mono[pos + 1:]: coeff * kern})
        zero_mode = w.scale(self.character[i]).map_coeffs(
            lambda hs: hs * LaurentExpr.monomial(var, -1, Q(1)))
        return (out + zero_mode).normalize(self.N)

    # -- module vertex map --------------------------------------------------------

    def _field_shifted(self, i: int, w: State, mode_r: int, zvar: str, zcap: int) -> State:
        """Generating field at argument z+u with the u^(mode_r-1) mode taken."""
        from .series import genbinom
        out = State.zero()
        for mono, coeff in w.terms.items():
            for rho in range(mode_r, zcap + mode_r + 1):
                wgt = genbinom(rho - 1, mode_r - 1)
                if not wgt:
                    continue
                lex = LaurentExpr.monomial(zvar, rho - mode_r, wgt, caps={zvar: zcap})
                out = out + State({monomial(*mono, (i, i, rho)): coeff * lex})
            seen = set()
            for pos, g in enumerate(mono):
                if g in seen:
                    continue
                seen.add(g)
                mult = mono.count(g)
                kern = _shift_extract(self.bundle.s_mode(i, i, g[0], g[1], g[2], "@s"),
                                      "@s", mode_r, zvar, zcap) * Q(-mult)
                out = out + State({mono[:pos] + mono[pos + 1:]: coeff * kern})
        # zero mode: coefficient of u^(mode_r-1) in (z+u)^-1 is (-1)^(mode_r-1) z^-mode_r
        zm = genbinom(-1, mode_r - 1)
        zlex = LaurentExpr.monomial(zvar, -mode_r, zm, caps={zvar: zcap})
        out = out + w.scale(self.character[i]).map_coeffs(lambda hs: hs * zlex)
        return out.normalize(self.N)

    def Y_W(self, v_mono, zvar: str, w: State, zcap: int) -> State:
        """Module vertex map on a diagonal monomial: the diagonal
        matching-sum product at arguments z + u_t, modes extracted.

        As with the algebra's vertex map, every creation loop and kernel
        mode sum runs to one shared internal cutoff (so truncation tails
        cancel) and the result is pruned to the requested window."""
        from .braiding import _restrict_state, _y_cutoff
        v_mono = monomial(*v_mono)
        for i, j, _ in v_mono:
            if i != j:
                raise ValueError("module vertex map takes diagonal monomials")
        n = len(v_mono)
        if n == 0:
            return w
        cut = _y_cutoff(v_mono, w, zcap)

        def field(pos, st):
            i, _, r = v_mono[pos - 1]
            return self._field_shifted(i, st, r, zvar, cut)

        def kernel(p, q):
            gp, gq = v_mono[p - 1], v_mono[q - 1]
            return _kernel_shifted(self.bundle, (gp[0], gp[0]), (gq[0], gq[0]),
                                   gp[2], gq[2], zvar, cut)

        out = matching_sum_apply(field, kernel, n, None, w, None)
        return _restrict_state(out, {zvar: zcap})

    # -- verifiers -----------------------------------------------------------------

    def verify_defining_relations(self, samples, ucap=3, params=None) -> AxiomReport:
        """Field form of the commutation and trace relations on samples."""
        witness = None
        caps = {"u1": ucap, "u2": ucap}
        for w in samples:
            for i in range(1, self.N + 1):
                for j in range(1, self.N + 1):
                    lhs = self.field(j, w, "u2", ucap)
                    lhs = self.field(i, lhs, "u1", ucap)
                    lhs = lhs + w.scale(self.bundle.s_pair((i, i), (j, j),
                                                           "u1", "u2", ucap))
                    rhs = self.field(i, w, "u1", ucap)
                    rhs = self.field(j, rhs, "u2", ucap)
                    rhs = rhs + w.scale(self.bundle.s_pair((i, i), (j, j),
                                                           "u2", "u1", ucap))
                    bad = lhs.diff_witness(rhs)
                    if bad is not None:
                        witness = f"commutation fails at (i,j)=({i},{j}): {bad}"
                        break
                if witness:
                    break
            if witness:
                break
            total = State.zero()
            for i in range(1, self.N + 1):
                total = total + self.field(i, w, "u1", ucap)
            if not total.is_zero():
                witness = "trace relation fails: sum of fields nonzero"
                break
        return AxiomReport.from_witness(
            "module_relations", dict(params or {}, samples=len(list(samples))), witness)

    def verify_classical_action(self, samples, params=None) -> AxiomReport:
        """h^0 action: creation multiplies, level r > 0 acts as the
        r c <a_i, a_j>-weighted derivative, level 0 by the character."""
        witness = None
        for w in samples:
            for i in range(1, self.N + 1):
                for r in range(1, 4):
                    got = self.act_mode(i, r, w).map_coeffs(lambda hs: hs.truncate(0))
                    exp = State.zero()
                    for mono, coeff in w.terms.items():
                        seen = set()
                        for pos, g in enumerate(mono):
                            if g in seen:
                                continue
                            seen.add(g)
                            if g[2] != r:
                                continue
                            mult = mono.count(g)
                            wgt = Q(r) * self.c * heis_form(self.N, i, g[0]) * mult
                            exp = exp + State({mono[:pos] + mono[pos + 1:]:
                                               coeff.truncate(0) * wgt})
                    exp = exp.normalize(self.N)
                    bad = got.diff_witness(exp)
                    if bad is not None:
                        witness = f"h^0 action mismatch at (i,r)=({i},{r}): {bad}"
                        break
                if witness:
                    break
            if witness:
                break
        return AxiomReport.from_witness(
            "module_classical_action",
            dict(params or {}, samples=len(list(samples))), witness)

    def verify_roundtrip(self, samples, zcap=3, params=None) -> AxiomReport:
        """The fields read back from the module vertex map at depth one
        reproduce the direct mode action, the level reads back as c, and
        the zero mode as the character."""
        witness = None
        for w in samples:
            for i in range(1, self.N + 1):
                via_map = self.Y_W(((i, i, 1),), "z", w, zcap)
                direct = self.field(i, w, "z", zcap)
                bad = via_map.diff_witness(direct)
                if bad is not None:
                    witness = f"vertex-map readback differs for i={i}: {bad}"
                    break
                zm = via_map.map_coeffs(lambda hs: hs.map(
                    lambda p: p.coefficient({"z": -1}) if isinstance(p, LaurentExpr) else Q(0)))
                expect = w.scale(self.character[i])
                bad = zm.diff_witness(expect)
                if bad is not None:
                    witness = f"zero-mode readback differs for i={i}: {bad}"
                    break
            if witness:
                break
        return AxiomReport.from_witness(
            "module_roundtrip", dict(params or {}, samples=len(list(samples))), witness)

    def verify_weak_assoc(self, u_mono, v_mono, w: State, n_target: int,
                          s_max=None, params=None) -> AxiomReport:
        """Weak associativity of the module vertex map against the algebra
        vertex map (the certification route for module structure)."""
        rep = verify_weak_assoc(
            self.bundle, u_mono, v_mono, w, n_target, s_max=s_max,
            params=params,
            Y_outer=lambda mono, zv, st, cap: self.Y_W(mono, zv, st, cap),
            Y_inner=lambda mono, zv, st, cap: Y_apply(self.bundle, mono, zv, st, cap))
        rep.axiom = "module_weak_associativity"
        return rep
