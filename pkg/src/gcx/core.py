"""Exact k x n matrices, positive elementary moves and sign-change counting.

Indices are 1-based at every public boundary. Internally a matrix is stored
column-major, since the columns v_1, ..., v_n are the objects that moves act on.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

Rational = Fraction
Column = tuple[Fraction, ...]


class GcxError(Exception):
    """Base class for errors raised by this package."""


class DegenerateSequenceError(GcxError):
    """A leading minor vanished where a nonzero value is required."""

    def __init__(self, s: int, message: str | None = None):
        self.s = s
        super().__init__(message or f"leading minor vanishes at M_{s}")


class InternalInvariantError(GcxError):
    """Raised when something that should be impossible happens."""


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and strings like "-3/4" to a Fraction.

    Floats are rejected: every sign decision downstream must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def sign(q) -> int:
    return (q > 0) - (q < 0)


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant of a small square matrix."""
    size = len(rows)
    if size == 1:
        return rows[0][0]
    if size == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if size == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    work = [list(r) for r in rows]
    result = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if work[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            result = -result
        p = work[col][col]
        result *= p
        for r in range(col + 1, size):
            factor = work[r][col]
            if factor:
                factor /= p
                row, prow = work[r], work[col]
                for c in range(col + 1, size):
                    row[c] -= factor * prow[c]
    return result


def det_columns(cols: Sequence[Sequence[Fraction]]) -> Fraction:
    # det is invariant under transposition, so columns can be passed as rows
    return det(cols)


@dataclass(frozen=True)
class ExactMatrix:
    """A k x n matrix of rationals with 0 < k < n, stored by columns."""

    cols: tuple[Column, ...]

    def __post_init__(self):
        cols = tuple(tuple(as_rational(x) for x in c) for c in self.cols)
        object.__setattr__(self, "cols", cols)
        if not cols:
            raise ValueError("matrix needs at least one column")
        k = len(cols[0])
        if any(len(c) != k for c in cols):
            raise ValueError("ragged columns")
        if not 0 < k < len(cols):
            raise ValueError(f"need 0 < k < n, got k={k}, n={len(cols)}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> ExactMatrix:
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged rows")
        return cls(tuple(zip(*rows)))

    @classmethod
    def from_columns(cls, cols: Iterable[Sequence]) -> ExactMatrix:
        return cls(tuple(tuple(c) for c in cols))

    @property
    def k(self) -> int:
        return len(self.cols[0])

    @property
    def n(self) -> int:
        return len(self.cols)

    def column(self, j: int) -> Column:
        """Column v_j, 1-based."""
        if not 1 <= j <= self.n:
            raise IndexError(f"column index {j} outside 1..{self.n}")
        return self.cols[j - 1]

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in zip(*self.cols)]

    def scale_columns(self, factors: Sequence[Fraction]) -> ExactMatrix:
        """Right multiplication by diag(factors)."""
        if len(factors) != self.n:
            raise ValueError("one factor per column")
        return ExactMatrix(tuple(tuple(d * x for x in c) for c, d in zip(self.cols, factors)))

    def left_multiply(self, a: Sequence[Sequence[Fraction]]) -> ExactMatrix:
        """A @ M for a k x k matrix A."""
        return ExactMatrix(
            tuple(tuple(sum((ar[i] * c[i] for i in range(self.k)), Fraction(0)) for ar in a) for c in self.cols)
        )

    def __str__(self) -> str:
        return "\n".join(" ".join(format_rational(x) for x in r) for r in self.rows())


@dataclass(frozen=True)
class MoveStep:
    """v_j <- v_j + t v_{j+1} with t > 0."""

    j: int
    t: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", as_rational(self.t))
        if not isinstance(self.j, int) or self.j < 1:
            raise ValueError(f"move index must be a positive integer, got {self.j!r}")
        if self.t <= 0:
            raise ValueError(f"move parameter must be positive, got {self.t}")


@dataclass(frozen=True)
class ConvexSeq:
    initial: ExactMatrix
    moves: tuple[MoveStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple(self.moves))
        for mv in self.moves:
            if mv.j >= self.initial.n:
                raise ValueError(f"move index {mv.j} out of range for n={self.initial.n}")

    @property
    def k(self) -> int:
        return self.initial.k

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def length(self) -> int:
        return len(self.moves)

    @cached_property
    def matrices(self) -> tuple[ExactMatrix, ...]:
        out = [self.initial]
        for mv in self.moves:
            out.append(apply_move(out[-1], mv))
        return tuple(out)


def check_index_set(J: Sequence[int], k: int, n: int) -> tuple[int, ...]:
    J = tuple(J)
    if len(J) != k:
        raise ValueError(f"index set {J} must have {k} elements")
    if any(not 1 <= j <= n for j in J) or any(a >= b for a, b in zip(J, J[1:])):
        raise ValueError(f"index set {J} must be strictly increasing within 1..{n}")
    return J


def index_sets(k: int, n: int) -> list[tuple[int, ...]]:
    return list(combinations(range(1, n + 1), k))


def apply_move(M: ExactMatrix, mv: MoveStep) -> ExactMatrix:
    if not 1 <= mv.j < M.n:
        raise IndexError(f"move index {mv.j} outside 1..{M.n - 1}")
    cols = list(M.cols)
    a, b = cols[mv.j - 1], cols[mv.j]
    cols[mv.j - 1] = tuple(x + mv.t * y for x, y in zip(a, b))
    return ExactMatrix(tuple(cols))


def minor(M: ExactMatrix, J: Sequence[int]) -> Fraction:
    J = check_index_set(J, M.k, M.n)
    return det_columns([M.cols[j - 1] for j in J])


def leading_minor(M: ExactMatrix) -> Fraction:
    return det_columns(M.cols[: M.k])


def is_generic(M: ExactMatrix) -> bool:
    """True iff every k x k minor is nonzero."""
    return all(det_columns([M.cols[j - 1] for j in J]) != 0 for J in index_sets(M.k, M.n))


def leading_minor_signs(seq: ConvexSeq) -> list[int]:
    return [sign(leading_minor(M)) for M in seq.matrices]


def nsc(seq: ConvexSeq) -> int:
    """Number of s with m(M_s) m(M_{s+1}) < 0."""
    signs = leading_minor_signs(seq)
    for s, sg in enumerate(signs):
        if sg == 0:
            raise DegenerateSequenceError(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def functional_value(omega: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((w * x for w, x in zip(omega, v)), Fraction(0))


def affine_observables(
    M: ExactMatrix,
    j: int,
    minors: Iterable[Sequence[int]] | None = None,
    omega: Sequence[Fraction] | None = None,
) -> list[tuple[object, Fraction, Fraction]]:
    """Observables along the move at index j, as (label, value at 0, slope).

    Multilinearity of the determinant makes every m_J(M + t v_{j+1} e_j^T)
    affine in t; its slope is the minor with v_j replaced by v_{j+1}.
    Only observables that actually depend on t are returned.
    """
    if minors is None:
        minors = index_sets(M.k, M.n)
    out = []
    vnext = M.cols[j]
    for J in minors:
        J = check_index_set(J, M.k, M.n)
        if j not in J or j + 1 in J:
            continue
        cols = [M.cols[i - 1] for i in J]
        value = det_columns(cols)
        cols[J.index(j)] = vnext
        out.append((("minor", J), value, det_columns(cols)))
    if omega is not None:
        value = functional_value(omega, M.cols[j - 1])
        out.append((("omega", j), value, functional_value(omega, vnext)))
    return out


def positive_roots(observables) -> list[Fraction]:
    """Sorted distinct roots t > 0 of affine observables (value + slope t)."""
    roots = set()
    for label, value, slope in observables:
        if slope == 0:
            if value == 0:
                raise InternalInvariantError(f"observable {label} vanishes identically along the move")
            continue
        r = -value / slope
        if r > 0:
            roots.add(r)
    return sorted(roots)


def event_roots(
    M: ExactMatrix,
    mv: MoveStep,
    minors: Iterable[Sequence[int]] | None = None,
    omega: Sequence[Fraction] | None = None,
) -> list[Fraction]:
    """Parameters in (0, mv.t) where some observable vanishes along the move.

    `minors` defaults to every k-subset; `omega`, when given, adds the value of
    that linear functional on the moving column.
    """
    if not 1 <= mv.j < M.n:
        raise IndexError(f"move index {mv.j} outside 1..{M.n - 1}")
    roots = positive_roots(affine_observables(M, mv.j, minors, omega))
    return [r for r in roots if r < mv.t]


def random_rational(rng: random.Random, magnitude: int, max_den: int = 4) -> Fraction:
    """Random positive rational p/q with 1 <= p <= magnitude*q."""
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(1, magnitude * q), q)


def random_generic_matrix(k: int, n: int, rng: random.Random, magnitude: int = 3, budget: int = 10_000) -> ExactMatrix:
    for _ in range(budget):
        M = ExactMatrix.from_rows([[rng.randint(-magnitude, magnitude) for _ in range(n)] for _ in range(k)])
        if is_generic(M):
            return M
    raise GcxError(f"no generic {k}x{n} matrix found with entries bounded by {magnitude}")


def nudge_off_roots(t: Fraction, roots: Sequence[Fraction]) -> Fraction:
    """Move t to the midpoint of the root gap it sits on, if it hits a root."""
    if t not in roots:
        return t
    i = roots.index(t)
    nxt = roots[i + 1] if i + 1 < len(roots) else t + 1
    return (t + nxt) / 2


def random_convex_seq(k: int, n: int, length: int, seed, magnitude: int = 3) -> ConvexSeq:
    """Deterministic random generic convex sequence."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = random.Random(seed)
    M = random_generic_matrix(k, n, rng, magnitude)
    initial, moves = M, []
    for _ in range(length):
        j = rng.randint(1, n - 1)
        t = random_rational(rng, magnitude)
        t = nudge_off_roots(t, positive_roots(affine_observables(M, j)))
        mv = MoveStep(j, t)
        M = apply_move(M, mv)
        moves.append(mv)
    return ConvexSeq(initial, tuple(moves))


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")
