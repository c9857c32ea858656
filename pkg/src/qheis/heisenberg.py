"""The deformed mode algebras: central commutators extracted from the
diagonal kernel entries, and reduction of words to the ordered basis.

Modes are pairs (i, r): index i in 1..N (index N is eliminated from normal
forms by the trace relation, which makes the sum of all same-level fields
vanish), level r an integer.  The commutator of two modes is central: it
is the coefficient of u^(-r-1) v^(-s-1) in s_ij(v-u, C) - s_ij(u-v, C),
the first term expanded with nonnegative powers of u and the second with
nonnegative powers of v.  The variant algebra without level-zero modes is
the same machinery with r = 0 rejected at mode construction.

Reduction repeatedly eliminates index-N modes and swaps adjacent
out-of-order factors, emitting the central bracket as a correction; since
all brackets are central the rewriting is confluent, which the test suite
checks by comparing independent swap strategies.
"""

from __future__ import annotations

from fractions import Fraction

from .series import CPoly, HSeries, LaurentExpr, Q, payload_is_zero
from .rmatrix import RMatrixBundle, FORMAL
from .report import AxiomReport

__all__ = ["HeisenbergAlgebra", "Mode", "mode_key", "parse_word"]

Mode = tuple  # (index, level)


def mode_key(mode: Mode):
    """Sort key for the mode ordering: by level, then index."""
    i, r = mode
    return (r, i)


class HeisenbergAlgebra:
    """Mode arithmetic for one (N, K); central parameter kept formal.

    `exclude_zero_modes` selects the variant algebra whose generators skip
    level zero."""

    def __init__(self, N: int, K: int, bundle: RMatrixBundle = None,
                 exclude_zero_modes: bool = False):
        self.N = N
        self.K = K
        self.exclude_zero_modes = exclude_zero_modes
        self.bundle = bundle or RMatrixBundle(N, K, FORMAL)
        if not self.bundle.formal:
            raise ValueError("mode brackets need the formal central parameter")
        self._brackets = {}

    # -- modes ----------------------------------------------------------------

    def check_mode(self, mode: Mode):
        i, r = mode
        if not 1 <= i <= self.N:
            raise ValueError(f"mode index {i} out of range")
        if self.exclude_zero_modes and r == 0:
            raise ValueError("level-zero modes are excluded in this algebra")
        return (i, r)

    def eliminate_index_N(self, word):
        """Expand index-N modes by the trace relation.

        Returns {word over indices 1..N-1: Fraction multiplier}."""
        out = {(): Q(1)}
        for mode in word:
            i, r = self.check_mode(mode)
            repl = [((i, r), Q(1))] if i < self.N else \
                [((j, r), Q(-1)) for j in range(1, self.N)]
            nxt = {}
            for w, c in out.items():
                for m, s in repl:
                    k = w + (m,)
                    nxt[k] = nxt.get(k, Q(0)) + c * s
            out = {k: c for k, c in nxt.items() if c}
        return out

    # -- brackets ---------------------------------------------------------------

    def bracket(self, i: int, r: int, j: int, s: int) -> HSeries:
        """Central commutator of the (i, r) and (j, s) modes.

        Coefficient of u^(-r-1) v^(-s-1) in s_ij(v-u, C) - s_ij(u-v, C),
        each difference expanded in its own region.  Cached."""
        key = (i, r, j, s)
        if key in self._brackets:
            return self._brackets[key]
        uexp, vexp = -r - 1, -s - 1
        entry = self.bundle.s_diag(i, j)
        first = entry.map(lambda p: p.rename(self.bundle.uvar, "@x")
                          .substitute("@x", [(1, "@v"), (-1, "@u")],
                                      {"@u": max(uexp, 0)})
                          .coefficient({"@u": uexp, "@v": vexp}))
        second = entry.map(lambda p: p.rename(self.bundle.uvar, "@x")
                           .substitute("@x", [(1, "@u"), (-1, "@v")],
                                       {"@v": max(vexp, 0)})
                           .coefficient({"@u": uexp, "@v": vexp}))
        res = (first - second).map(lambda c: as_central(c))
        self._brackets[key] = res
        return res

    # -- normal form -------------------------------------------------------------

    def pbw_reduce(self, word, coeff=None, strategy=None):
        """Linear combination of weakly increasing monomials equal to `word`.

        `strategy(descents, rng_state)` picks which adjacent descent to swap
        next; the default takes the leftmost, and any admissible choice must
        give the same answer (confluence)."""
        if coeff is None:
            coeff = HSeries.const(CPoly.const(1), self.K)
        out = {}
        work = [(tuple(w), coeff * c) for w, c in self.eliminate_index_N(word).items()]
        while work:
            w, c = work.pop()
            descents = [t for t in range(len(w) - 1)
                        if mode_key(w[t]) > mode_key(w[t + 1])]
            if not descents:
                key = tuple(w)
                s = out.get(key)
                s = c if s is None else s + c
                if s.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = s
                continue
            t = descents[0] if strategy is None else strategy(descents)
            a, b = w[t], w[t + 1]
            swapped = w[:t] + (b, a) + w[t + 2:]
            work.append((swapped, c))
            br = self.bracket(a[0], a[1], b[0], b[1])
            if not br.is_zero():
                work.append((w[:t] + w[t + 2:], c * br))
        return out

    def multiply_normal(self, nf1: dict, nf2: dict) -> dict:
        """Product of two normal forms, reduced again."""
        out = {}
        for w1, c1 in nf1.items():
            for w2, c2 in nf2.items():
                for w, c in self.pbw_reduce(w1 + w2, c1 * c2).items():
                    s = out.get(w)
                    s = c if s is None else s + c
                    if s.is_zero():
                        out.pop(w, None)
                    else:
                        out[w] = s
        return out

    def specialize_central(self, nf: dict, c) -> dict:
        """Evaluate every CPoly coefficient at C = c."""
        c = Q(c)
        out = {}
        for w, hs in nf.items():
            ev = hs.map(lambda p: p.evaluate(c) if isinstance(p, CPoly) else Q(p))
            if not ev.is_zero():
                out[w] = ev
        return out

    # -- checks -----------------------------------------------------------------

    def verify_confluence(self, words, rng, params=None) -> AxiomReport:
        """Random admissible swap orders agree with the canonical one, and
        reduce(concat) agrees with multiply(reduce, reduce)."""
        witness = None
        for word in words:
            base = self.pbw_reduce(word)
            for _ in range(3):
                alt = self.pbw_reduce(
                    word, strategy=lambda ds: ds[rng.randrange(len(ds))])
                if not _nf_equal(base, alt):
                    witness = f"strategy-dependent normal form for {word}"
                    break
            if witness:
                break
            cut = len(word) // 2
            left, right = word[:cut], word[cut:]
            prod = self.multiply_normal(self.pbw_reduce(left), self.pbw_reduce(right))
            if not _nf_equal(base, prod):
                witness = f"multiplication/reduction mismatch for {word}"
                break
            again = {}
            for w, c in base.items():
                for w2, c2 in self.pbw_reduce(w, c).items():
                    again[w2] = again.get(w2, c2 - c2) + c2
            if not _nf_equal(base, {w: c for w, c in again.items() if not c.is_zero()}):
                witness = f"reduction not idempotent for {word}"
                break
        return AxiomReport.from_witness(
            "pbw_confluence", dict(params or {}, words=len(list(words))), witness)


def as_central(c):
    if isinstance(c, CPoly):
        return c
    if isinstance(c, (int, Fraction)):
        return CPoly.const(c)
    raise TypeError(f"bracket coefficient of unexpected type {type(c).__name__}")


def _nf_equal(a: dict, b: dict) -> bool:
    if set(a) != set(b):
        return False
    return all(a[w].agrees(b[w]) is None for w in a)


def parse_word(text: str, N: int):
    """Parse "y1(1) y2(-3) yN(0)" into a mode tuple; 'N' means index N."""
    import re
    word = []
    for tok in text.split():
        m = re.fullmatch(r"y(\d+|N)\((-?\d+)\)", tok)
        if not m:
            raise ValueError(f"cannot parse mode {tok!r}")
        idx = N if m.group(1) == "N" else int(m.group(1))
        word.append((idx, int(m.group(2))))
    return tuple(word)


def format_normal_form(nf: dict) -> str:
    if not nf:
        return "0"
    bits = []
    for w in sorted(nf, key=lambda word: (len(word), [mode_key(m) for m in word])):
        name = " ".join(f"y{i}({r})" for i, r in w) or "1"
        bits.append(f"[{nf[w]}] {name}")
    return " + ".join(bits)
