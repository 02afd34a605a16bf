"""Convex curves in the unipotent lower triangular group and the discrete bridge.

Curves are piecewise exponentials Gamma(t) = G_i exp(u * sum_j c_j l_j) with
all c_j > 0 on every arc, where l_j is the elementary matrix with a single 1
at position (j+1, j). The leading minor of the bottom k rows along such an
arc is an exact polynomial in u, so zeros are counted exactly with Sturm
sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Sequence

from .core import (
    ConvexSeq,
    ExactMatrix,
    GcxError,
    MoveStep,
    apply_move,
    as_rational,
    det,
    leading_minor,
    sign,
)
from .poly import Poly, isolate_roots, refine_root, sturm_count

Matrix = tuple[tuple[Fraction, ...], ...]

EPS_FLOOR_EXPONENT = 64


class CurveError(GcxError):
    pass


def _identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(r == c)) for c in range(n)) for r in range(n))


def _matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    n, m, p = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[r][i] * b[i][c] for i in range(m) if a[r][i]), Fraction(0)) for c in range(p)) for r in range(n)
    )


@dataclass(frozen=True)
class UnipotentMatrix:
    """Lower triangular n x n rational matrix with unit diagonal."""

    rows: Matrix

    def __post_init__(self):
        rows = tuple(tuple(as_rational(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n < 2 or any(len(r) != n for r in rows):
            raise ValueError("need a square matrix of size >= 2")
        for r in range(n):
            if rows[r][r] != 1 or any(rows[r][c] != 0 for c in range(r + 1, n)):
                raise ValueError("not unipotent lower triangular")

    @classmethod
    def identity(cls, n: int) -> UnipotentMatrix:
        return cls(_identity(n))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __matmul__(self, other: UnipotentMatrix) -> UnipotentMatrix:
        return UnipotentMatrix(_matmul(self.rows, other.rows))

    def inverse(self) -> UnipotentMatrix:
        n = self.n
        inv = [list(r) for r in _identity(n)]
        # forward substitution, column by column
        for c in range(n):
            for r in range(c + 1, n):
                inv[r][c] = -sum((self.rows[r][i] * inv[i][c] for i in range(c, r)), Fraction(0))
        return UnipotentMatrix(tuple(tuple(r) for r in inv))

    def bottom_rows(self, k: int) -> ExactMatrix:
        """SubMatrix(L, {n-k+1..n}, {1..n})."""
        return ExactMatrix.from_rows(self.rows[self.n - k :])


def lambda_arc(n: int, j: int, t) -> UnipotentMatrix:
    """exp(t l_j): identity plus t at (j+1, j)."""
    if not 1 <= j < n:
        raise IndexError(f"generator index {j} outside 1..{n - 1}")
    rows = [list(r) for r in _identity(n)]
    rows[j][j - 1] = as_rational(t)
    return UnipotentMatrix(tuple(tuple(r) for r in rows))


def _check_coefficients(c: Sequence[Fraction]) -> tuple[Fraction, ...]:
    c = tuple(as_rational(x) for x in c)
    if any(x <= 0 for x in c):
        raise ValueError("arc coefficients must be positive")
    return c


def exp_arc_poly(c: Sequence) -> tuple[tuple[Poly, ...], ...]:
    """exp(t sum_j c_j l_j) with polynomial entries in t.

    The nilpotent series terminates; entry (r, q) is the monomial
    c_q ... c_{r-1} t^(r-q) / (r-q)!.
    """
    c = _check_coefficients(c)
    n = len(c) + 1
    rows = []
    for r in range(n):
        row = []
        for q in range(n):
            if q > r:
                row.append(Poly())
            else:
                coeff = Fraction(1, factorial(r - q))
                for j in range(q, r):
                    coeff *= c[j]
                row.append(Poly.monomial(coeff, r - q))
        rows.append(tuple(row))
    return tuple(rows)


def exp_arc(c: Sequence, t) -> UnipotentMatrix:
    """exp(t sum_j c_j l_j) evaluated at a rational t."""
    t = as_rational(t)
    return UnipotentMatrix(tuple(tuple(p(t) for p in row) for row in exp_arc_poly(c)))


@dataclass(frozen=True)
class Arc:
    c: tuple[Fraction, ...]
    t_max: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", _check_coefficients(self.c))
        object.__setattr__(self, "t_max", as_rational(self.t_max))
        if self.t_max <= 0:
            raise ValueError("arc duration must be positive")


@dataclass(frozen=True)
class CurveSpec:
    n: int
    k: int
    initial: UnipotentMatrix
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if not 0 < self.k < self.n:
            raise ValueError("need 0 < k < n")
        if self.initial.n != self.n:
            raise ValueError("initial matrix has the wrong size")
        if not self.arcs:
            raise ValueError("a curve needs at least one arc")
        for a in self.arcs:
            if len(a.c) != self.n - 1:
                raise ValueError("each arc needs n-1 coefficients")

    @property
    def duration(self) -> Fraction:
        return sum((a.t_max for a in self.arcs), Fraction(0))

    def arc_start(self, i: int) -> UnipotentMatrix:
        """Gamma at the left end of arc i."""
        g = self.initial
        for a in self.arcs[:i]:
            g = g @ exp_arc(a.c, a.t_max)
        return g

    def junctions(self) -> list[UnipotentMatrix]:
        out = [self.initial]
        for a in self.arcs:
            out.append(out[-1] @ exp_arc(a.c, a.t_max))
        return out

    def locate(self, t) -> tuple[int, Fraction]:
        """(arc index, local parameter) for a global parameter in [0, duration]."""
        t = as_rational(t)
        if t < 0 or t > self.duration:
            raise ValueError(f"t={t} outside [0, {self.duration}]")
        offset = Fraction(0)
        for i, a in enumerate(self.arcs):
            if t <= offset + a.t_max:
                return i, t - offset
            offset += a.t_max
        raise AssertionError("unreachable")

    def at(self, t) -> UnipotentMatrix:
        i, u = self.locate(t)
        return self.arc_start(i) @ exp_arc(self.arcs[i].c, u)


def poly_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Division-free determinant (Leibniz expansion; fine for k <= 6)."""
    size = len(rows)
    total = Poly()
    for perm in permutations(range(size)):
        inversions = sum(1 for a in range(size) for b in range(a + 1, size) if perm[a] > perm[b])
        term = Poly.const(1)
        for r, c in enumerate(perm):
            term = term * rows[r][c]
            if term.is_zero():
                break
        total = total - term if inversions % 2 else total + term
    return total


def leading_minor_poly(start: UnipotentMatrix, c: Sequence, k: int) -> Poly:
    """m of the bottom k rows of start @ exp(u sum c_j l_j), as a polynomial in u."""
    n = start.n
    e = exp_arc_poly(c)
    rows = []
    for r in range(n - k, n):
        row = []
        for q in range(k):
            acc = Poly()
            for i in range(n):
                if start.rows[r][i]:
                    acc = acc + e[i][q] * start.rows[r][i]
            row.append(acc)
        rows.append(row)
    return poly_det(rows)


def curve_minor_poly(spec: CurveSpec, arc_index: int) -> Poly:
    return leading_minor_poly(spec.arc_start(arc_index), spec.arcs[arc_index].c, spec.k)


def _arc_root_intervals(spec: CurveSpec) -> list[tuple[int, Poly, Fraction, Fraction]]:
    """Isolating intervals of the zeros of m along each arc, in local coordinates.

    Arc i covers (0, t_max] except the first arc, which also owns u = 0.
    """
    out = []
    for i, arc in enumerate(spec.arcs):
        p = curve_minor_poly(spec, i)
        if p.is_zero():
            raise CurveError(f"leading minor vanishes identically on arc {i}")
        if i == 0 and p(0) == 0:
            out.append((i, p, Fraction(0), Fraction(0)))
        for lo, hi in isolate_roots(p, 0, arc.t_max):
            out.append((i, p, lo, hi))
    return out


def nz(spec: CurveSpec) -> int:
    """Number of distinct zeros of the leading minor along the curve."""
    total = 0
    for i, arc in enumerate(spec.arcs):
        p = curve_minor_poly(spec, i)
        if p.is_zero():
            raise CurveError(f"leading minor vanishes identically on arc {i}")
        total += sturm_count(p, 0, arc.t_max)
        if i == 0 and p(0) == 0:
            total += 1
    return total


# -- factorisation along the canonical reduced word --------------------------


def canonical_word(n: int) -> tuple[int, ...]:
    """(1)(2,1)(3,2,1)...(n-1,...,1), a reduced word of the longest permutation."""
    return tuple(i for r in range(1, n) for i in range(r, 0, -1))


def word_permutation(word: Sequence[int], n: int) -> list[int]:
    perm = list(range(n))
    for i in word:
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
    return perm


def is_reduced(word: Sequence[int], n: int) -> bool:
    perm = word_permutation(word, n)
    inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
    return inversions == len(word)


def word_product(word: Sequence[int], params: Sequence, n: int) -> UnipotentMatrix:
    g = UnipotentMatrix.identity(n)
    for i, t in zip(word, params, strict=True):
        g = g @ lambda_arc(n, i, t)
    return g


@dataclass(frozen=True)
class Factorization:
    ok: bool
    params: tuple[Fraction, ...] = ()
    reason: str = ""


def factor_pos_eta(L: UnipotentMatrix, word: Sequence[int] | None = None) -> Factorization:
    """Positive parameters t with L = lambda_{i_1}(t_1) ... lambda_{i_m}(t_m), if they exist.

    Only the canonical word is supported. Its last block
    lambda_{n-1}(a_{n-1}) ... lambda_1(a_1) fixes the last row of L, whose
    entries are the products a_j ... a_{n-1}; peeling that block leaves
    diag(L', 1) with L' of size n - 1, and the procedure recurses.
    """
    n = L.n
    if word is None:
        word = canonical_word(n)
    word = tuple(word)
    if word != canonical_word(n):
        if not is_reduced(word, n) or len(word) != n * (n - 1) // 2:
            raise ValueError("word is not a reduced word of the longest permutation")
        raise NotImplementedError("factorization is implemented for the canonical word only")
    rows = [list(r) for r in L.rows]
    blocks: list[list[Fraction]] = []
    for size in range(n, 1, -1):
        last = rows[size - 1]
        if any(last[q] <= 0 for q in range(size - 1)):
            return Factorization(False, reason=f"row {size} has a non-positive entry below the diagonal")
        a = [Fraction(0)] * (size - 1)
        a[size - 2] = last[size - 2]
        for q in range(size - 3, -1, -1):
            a[q] = last[q] / last[q + 1]
        # undo the block on the right: multiply by lambda_1(-a_1) ... lambda_{size-1}(-a_{size-1})
        for q in range(size - 1):
            t = -a[q]
            for r in range(size):
                rows[r][q] += t * rows[r][q + 1]
        if any(rows[size - 1][q] != 0 for q in range(size - 1)):
            raise AssertionError("peeling did not clear the last row")
        blocks.append(a[::-1])
    params: list[Fraction] = []
    for a in reversed(blocks):
        params.extend(a)
    return Factorization(True, tuple(params))


# -- the bridge between curves and sequences ----------------------------------


def _right_lambda(M: ExactMatrix, j: int, t: Fraction) -> ExactMatrix:
    """M @ lambda_j(t): column j gains t times column j+1 (any sign of t)."""
    cols = list(M.cols)
    cols[j - 1] = tuple(x + t * y for x, y in zip(cols[j - 1], cols[j]))
    return ExactMatrix(tuple(cols))


def all_ones(n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1) for _ in range(n - 1))


def curve_zeros(spec: CurveSpec) -> list[tuple[int, Poly, Fraction, Fraction]]:
    return _arc_root_intervals(spec)


def discretize_curve(spec: CurveSpec, max_exponent: int = EPS_FLOOR_EXPONENT) -> ConvexSeq:
    """Convex sequence with a leading-minor sign change at every zero of the curve.

    For each zero we pick a rational tau near it (exact if the zero is
    rational), B = Gamma(tau) exp(delta sum l_j) and the two samples
    P B lambda_k(-eps), P B lambda_k(eps), P the bottom-k-rows projection.
    Consecutive pairs are joined by factoring
    lambda_k(-eps) B_s^{-1} B_{s+1} lambda_k(-eps) along the canonical word.
    eps = 2^-a and delta = eps^2 shrink until every sign condition holds.
    """
    k, n = spec.k, spec.n
    zeros = _arc_root_intervals(spec)
    if not zeros:
        M0 = spec.initial.bottom_rows(k)
        if leading_minor(M0) == 0:
            raise CurveError("leading minor vanishes at the start of a curve without zeros")
        return ConvexSeq(M0, ())
    word = canonical_word(n)
    starts = [spec.arc_start(i) for i in range(len(spec.arcs))]
    for a in range(1, max_exponent + 1):
        eps = Fraction(1, 2**a)
        delta = eps * eps
        width = delta * delta
        nudge = exp_arc(all_ones(n), delta)
        B = []
        for i, p, lo, hi in zeros:
            lo, hi = refine_root(p, lo, hi, width)
            tau = hi if lo == hi else (lo + hi) / 2
            B.append(starts[i] @ exp_arc(spec.arcs[i].c, tau) @ nudge)
        seq = _bracket_sequence(B, k, eps, word)
        if seq is not None:
            return seq
    raise CurveError(f"no admissible eps down to 2^-{max_exponent}")


def _bracket_sequence(B: list[UnipotentMatrix], k: int, eps: Fraction, word) -> ConvexSeq | None:
    moves: list[MoveStep] = []
    first = _right_lambda(B[0].bottom_rows(k), k, -eps)
    M = first
    signs = [sign(leading_minor(M))]
    for s, b in enumerate(B):
        # bracket move from P B lambda_k(-eps) to P B lambda_k(eps)
        mv = MoveStep(k, 2 * eps)
        M = apply_move(M, mv)
        moves.append(mv)
        signs.append(sign(leading_minor(M)))
        if signs[-1] * signs[-2] >= 0:
            return None
        if s + 1 == len(B):
            break
        link = _conjugated_link(b, B[s + 1], k, eps)
        fac = factor_pos_eta(link, word)
        if not fac.ok:
            return None
        for i, t in zip(word, fac.params):
            mv = MoveStep(i, t)
            M = apply_move(M, mv)
            moves.append(mv)
            signs.append(sign(leading_minor(M)))
    if 0 in signs:
        return None
    return ConvexSeq(first, tuple(moves))


def _conjugated_link(b0: UnipotentMatrix, b1: UnipotentMatrix, k: int, eps: Fraction) -> UnipotentMatrix:
    """lambda_k(-eps) b0^{-1} b1 lambda_k(-eps), built without the positivity check of lambda_arc."""
    n = b0.n
    m = [list(r) for r in (b0.inverse() @ b1).rows]
    # right multiplication by lambda_k(-eps): column k += -eps * column k+1
    for r in range(n):
        m[r][k - 1] -= eps * m[r][k]
    # left multiplication by lambda_k(-eps): row k+1 += -eps * row k
    m[k] = [x - eps * y for x, y in zip(m[k], m[k - 1])]
    return UnipotentMatrix(tuple(tuple(r) for r in m))


def lift_matrix(M: ExactMatrix) -> tuple[UnipotentMatrix, list[list[Fraction]]]:
    """Unipotent G with bottom rows A M, where A inverts the last k columns of M."""
    k, n = M.k, M.n
    B = [[M.cols[n - k + c][r] for c in range(k)] for r in range(k)]
    A = _inverse(B)
    N = M.left_multiply(A)
    rows = [list(r) for r in _identity(n)]
    for i, row in enumerate(N.rows()):
        rows[n - k + i] = row
    return UnipotentMatrix(tuple(tuple(r) for r in rows)), A


def _inverse(B: list[list[Fraction]]) -> list[list[Fraction]]:
    size = len(B)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(size)] for i, r in enumerate(B)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise CurveError("last k columns are singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [r[size:] for r in aug]


def continuize_seq(seq: ConvexSeq, max_exponent: int = EPS_FLOOR_EXPONENT) -> CurveSpec:
    """Convex curve through (normalised) perturbations of the sequence.

    The move (j, t) becomes the arc exp(t (l_j + eps sum_{i != j} l_i)); as
    eps -> 0 this tends to lambda_j(t), so for small eps the leading minor at
    every junction has the sign of the corresponding M_s (up to the global
    factor det A). Each sign change then forces a zero inside an arc.
    """
    k, n = seq.k, seq.n
    G0, A = lift_matrix(seq.initial)
    flip = sign(det(A))
    target = [flip * sign(leading_minor(M)) for M in seq.matrices]
    if 0 in target:
        raise CurveError("leading minor vanishes on the sequence")
    if not seq.moves:
        return CurveSpec(n, k, G0, (Arc(all_ones(n), Fraction(1, 16)),))
    for a in range(0, max_exponent + 1):
        eps = Fraction(1, 2**a)
        arcs = []
        for mv in seq.moves:
            c = [eps] * (n - 1)
            c[mv.j - 1] = Fraction(1)
            arcs.append(Arc(tuple(c), mv.t))
        spec = CurveSpec(n, k, G0, tuple(arcs))
        got = [sign(leading_minor(G.bottom_rows(k))) for G in spec.junctions()]
        if got == target:
            return spec
    raise CurveError(f"no admissible eps down to 2^-{max_exponent}")


def random_curve(k: int, n: int, seed, arcs: int = 2, magnitude: int = 3) -> CurveSpec:
    """Seeded random curve: random unipotent start, random positive piecewise coefficients."""
    import random

    rng = random.Random(seed)

    def q(lo: int, hi: int) -> Fraction:
        d = rng.randint(1, 4)
        return Fraction(rng.randint(lo * d, hi * d), d)

    rows = [[Fraction(int(r == c)) if c >= r else q(-magnitude, magnitude) for c in range(n)] for r in range(n)]
    pieces = []
    for _ in range(arcs):
        c = tuple(q(1, magnitude) for _ in range(n - 1))
        pieces.append(Arc(c, q(1, magnitude)))
    return CurveSpec(n, k, UnipotentMatrix(tuple(tuple(r) for r in rows)), tuple(pieces))
