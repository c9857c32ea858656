"""Sparse linear operators on n-fold tensor powers of an N-dimensional space.

Entries are exact scalars (Fraction, CPoly, or LaurentExpr) keyed by pairs
of 1-based multi-indices, so an operator sum e_{i1 j1} x ... x e_{in jn}
has its coefficient stored at ((i1,...,in), (j1,...,jn)).  Zero entries are
never stored.  Operators compose with `*`, embed into larger tensor powers
with `embed_legs`, and support partial traces and diagonal extraction.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .series import CPoly, LaurentExpr, Q

_SCALARS = (int, Fraction, CPoly, LaurentExpr)


def _nz(c):
    if isinstance(c, int):
        c = Q(c)
    if isinstance(c, Fraction):
        return c if c else None
    if isinstance(c, (CPoly, LaurentExpr)):
        return c if c else None
    raise TypeError(f"unsupported entry type {type(c).__name__}")


class TensorOp:
    """Sparse operator on (C^N)^(x n) with exact scalar entries."""

    __slots__ = ("dim", "arity", "entries")

    def __init__(self, dim: int, arity: int, entries=None):
        if dim < 1 or arity < 1:
            raise ValueError("dimension and arity must be positive")
        self.dim = dim
        self.arity = arity
        es = {}
        if entries:
            for (row, col), c in entries.items():
                row, col = tuple(row), tuple(col)
                if len(row) != arity or len(col) != arity:
                    raise ValueError("multi-index length must equal arity")
                if not all(1 <= i <= dim for i in row + col):
                    raise ValueError("multi-index out of range")
                c = _nz(c)
                if c is not None:
                    es[(row, col)] = c
        self.entries = es

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls, dim: int, arity: int = 1):
        op = cls.__new__(cls)
        op.dim, op.arity = dim, arity
        op.entries = {(v, v): Q(1) for v in itertools.product(range(1, dim + 1), repeat=arity)}
        return op

    @classmethod
    def perm(cls, dim: int):
        """The flip of two tensor factors: sum of e_ij x e_ji."""
        op = cls.__new__(cls)
        op.dim, op.arity = dim, 2
        op.entries = {((i, j), (j, i)): Q(1)
                      for i in range(1, dim + 1) for j in range(1, dim + 1)}
        return op

    @classmethod
    def unit(cls, dim: int, i: int, j: int):
        """The matrix unit e_ij on a single factor."""
        return cls(dim, 1, {((i,), (j,)): Q(1)})

    @classmethod
    def zero(cls, dim: int, arity: int):
        return cls(dim, arity, {})

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.entries

    def __bool__(self):
        return bool(self.entries)

    def entry(self, row, col):
        return self.entries.get((tuple(row), tuple(col)), Q(0))

    def sorted_entries(self):
        return sorted(self.entries.items())

    # -- ring structure ------------------------------------------------------

    def _check(self, other):
        if self.dim != other.dim or self.arity != other.arity:
            raise ValueError("operator shape mismatch")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, TensorOp):
            return NotImplemented
        self._check(other)
        out = dict(self.entries)
        for k, c in other.entries.items():
            s = out.get(k)
            s = c if s is None else s + c
            s = _nz(s)
            if s is None:
                out.pop(k, None)
            else:
                out[k] = s
        op = TensorOp.__new__(TensorOp)
        op.dim, op.arity, op.entries = self.dim, self.arity, out
        return op

    __radd__ = __add__

    def __neg__(self):
        op = TensorOp.__new__(TensorOp)
        op.dim, op.arity = self.dim, self.arity
        op.entries = {k: -c for k, c in self.entries.items()}
        return op

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scaled(self, s):
        out = {}
        for k, c in self.entries.items():
            v = _nz(c * s)
            if v is not None:
                out[k] = v
        op = TensorOp.__new__(TensorOp)
        op.dim, op.arity, op.entries = self.dim, self.arity, out
        return op

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return self._scaled(other)
        if not isinstance(other, TensorOp):
            return NotImplemented
        self._check(other)
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        out = {}
        for (r1, c1), v1 in self.entries.items():
            for c2, v2 in by_row.get(c1, ()):
                k = (r1, c2)
                s = out.get(k)
                p = v1 * v2
                s = p if s is None else s + p
                out[k] = s
        out = {k: v for k, v in out.items() if _nz(v) is not None}
        op = TensorOp.__new__(TensorOp)
        op.dim, op.arity, op.entries = self.dim, self.arity, out
        return op

    def __rmul__(self, other):
        if isinstance(other, _SCALARS):
            return self._scaled(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.entries
        if not isinstance(other, TensorOp):
            return NotImplemented
        return (self.dim, self.arity) == (other.dim, other.arity) and \
            self.entries == other.entries

    def __hash__(self):
        return hash((self.dim, self.arity, tuple(sorted((k, str(v)) for k, v in self.entries.items()))))

    # -- structural operations -------------------------------------------------

    def tensor(self, other: "TensorOp") -> "TensorOp":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = {}
        for (r1, c1), v1 in self.entries.items():
            for (r2, c2), v2 in other.entries.items():
                out[(r1 + r2, c1 + c2)] = v1 * v2
        return TensorOp(self.dim, self.arity + other.arity, out)

    def embed_legs(self, legs, target_arity: int) -> "TensorOp":
        """Act on the listed legs of a larger tensor power, identity elsewhere."""
        legs = list(legs)
        if len(legs) != self.arity:
            raise ValueError("need one leg per operator factor")
        if len(set(legs)) != len(legs):
            raise ValueError("legs must be distinct")
        if not all(1 <= p <= target_arity for p in legs):
            raise ValueError("leg out of range")
        others = [p for p in range(1, target_arity + 1) if p not in legs]
        out = {}
        for (r, c), v in self.entries.items():
            for idx in itertools.product(range(1, self.dim + 1), repeat=len(others)):
                row = [0] * target_arity
                col = [0] * target_arity
                for p, (ri, ci) in zip(legs, zip(r, c)):
                    row[p - 1], col[p - 1] = ri, ci
                for p, i in zip(others, idx):
                    row[p - 1] = col[p - 1] = i
                out[(tuple(row), tuple(col))] = v
        return TensorOp(self.dim, target_arity, out)

    def partial_trace(self, leg: int) -> "TensorOp":
        """Trace out one tensor factor (1-based leg index)."""
        if not 1 <= leg <= self.arity:
            raise ValueError("leg out of range")
        if self.arity == 1:
            raise ValueError("cannot reduce a single-factor operator to arity zero")
        out = {}
        for (r, c), v in self.entries.items():
            if r[leg - 1] != c[leg - 1]:
                continue
            k = (r[: leg - 1] + r[leg:], c[: leg - 1] + c[leg:])
            s = out.get(k)
            s = v if s is None else s + v
            out[k] = s
        return TensorOp(self.dim, self.arity - 1, out)

    def trace(self):
        """Full trace (scalar)."""
        acc = Q(0)
        for (r, c), v in self.entries.items():
            if r == c:
                acc = acc + v
        return acc

    def diag_part(self) -> "TensorOp":
        """Keep only entries whose row and column multi-indices coincide."""
        return TensorOp(self.dim, self.arity,
                        {k: v for k, v in self.entries.items() if k[0] == k[1]})

    def swap_legs(self, perm) -> "TensorOp":
        """Relabel tensor factors: new factor p carries old factor perm[p-1]."""
        perm = list(perm)
        out = {}
        for (r, c), v in self.entries.items():
            nr = tuple(r[p - 1] for p in perm)
            ncol = tuple(c[p - 1] for p in perm)
            out[(nr, ncol)] = v
        return TensorOp(self.dim, self.arity, out)

    def map_entries(self, fn) -> "TensorOp":
        out = {}
        for k, v in self.entries.items():
            nv = _nz(fn(v))
            if nv is not None:
                out[k] = nv
        op = TensorOp.__new__(TensorOp)
        op.dim, op.arity, op.entries = self.dim, self.arity, out
        return op

    def __str__(self):
        if not self.entries:
            return "0"
        bits = [f"e{list(r)}->{list(c)}: {v}" for (r, c), v in self.sorted_entries()]
        return "{" + ", ".join(bits) + "}"

    __repr__ = __str__


def identity(dim: int, arity: int = 1) -> TensorOp:
    return TensorOp.identity(dim, arity)


def perm_P(dim: int) -> TensorOp:
    return TensorOp.perm(dim)
