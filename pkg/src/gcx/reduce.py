"""Projection of a k x n convex sequence to a (k-1) x (n-1) one.

A generic linear form omega splits the columns by the sign of omega(v_j).
Moves that keep every sign (type I) descend, after normalising each column
onto the affine hyperplane omega = 1 and taking consecutive differences, to
positive elementary moves downstairs up to a positive diagonal rescaling.
Moves that flip a sign (type II) are paid for by a weighted count of the
sign alternations of omega along the columns.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    ConvexSeq,
    ExactMatrix,
    GcxError,
    InternalInvariantError,
    MoveStep,
    affine_observables,
    apply_move,
    derive_seed,
    functional_value,
    is_generic,
    leading_minor,
    positive_roots,
    sign,
)

DEFAULT_MAX_DENOMINATOR = 16
DEFAULT_RETRY_BUDGET = 200


class InvalidFunctionalError(GcxError):
    """omega vanishes on a column, or violates the positivity requirement."""


class CoincidentRootsError(GcxError):
    """An omega root and a leading-minor root fall on the same parameter."""

    def __init__(self, s: int, t: Fraction):
        self.s, self.t = s, t
        super().__init__(f"omega and leading minor vanish together at t={t} on move {s}")


class FunctionalBudgetError(GcxError):
    pass


@dataclass(frozen=True)
class Functional:
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not any(coeffs):
            raise ValueError("functional must be nonzero")

    def __call__(self, v: Sequence[Fraction]) -> Fraction:
        return functional_value(self.coefficients, v)

    def __len__(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class MoveType:
    """Type I (all omega-signs kept) or type II (omega-sign of column `flipped` changes)."""

    flipped: int | None = None

    @property
    def is_type_one(self) -> bool:
        return self.flipped is None

    @property
    def tag(self) -> str:
        return "I" if self.flipped is None else f"II:{self.flipped}"

    @classmethod
    def parse(cls, tag: str) -> MoveType:
        if tag == "I":
            return cls()
        head, _, j = tag.partition(":")
        if head != "II" or not j:
            raise ValueError(f"bad move type tag {tag!r}")
        return cls(int(j))


TYPE_I = MoveType()


@dataclass(frozen=True)
class ReducedStep:
    """Downstairs effect of one type I move: R1 = apply_move(R0, (j, t)) @ diag(scaling).

    `j` is None for an upstairs move at index 1, which only rescales.
    """

    j: int | None
    t: Fraction | None
    scaling: tuple[Fraction, ...]


@dataclass(frozen=True)
class ReducedRun:
    """A maximal type I run pushed downstairs.

    `sample_map[i]` is the index in `seq` of the reduced upstairs sample
    `start + i`; that reduced matrix equals the mapped sample of `seq` times
    diag(`scalings[i]`).
    """

    start: int
    stop: int
    seq: ConvexSeq
    sample_map: tuple[int, ...]
    scalings: tuple[tuple[Fraction, ...], ...]


def omega_values(M: ExactMatrix, omega: Functional) -> list[Fraction]:
    return [omega(c) for c in M.cols]


def _require_nonvanishing(M: ExactMatrix, omega: Functional) -> list[Fraction]:
    values = omega_values(M, omega)
    for j, x in enumerate(values, 1):
        if x == 0:
            raise InvalidFunctionalError(f"omega vanishes on column {j}")
    return values


def _dual_basis_sum(M: ExactMatrix) -> list[Fraction]:
    """omega with omega(v_j) = 1 for each of the last k columns."""
    k, n = M.k, M.n
    # solve B^T x = 1, B = last k columns
    aug = [list(M.cols[n - k + i]) + [Fraction(1)] for i in range(k)]
    for col in range(k):
        pivot = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][k] for i in range(k)]


def functional_defects(seq: ConvexSeq, omega: Functional) -> list[str]:
    """Reasons why omega is unusable for seq (empty when it is valid)."""
    defects = []
    k, n = seq.k, seq.n
    for j in range(n - k + 1, n + 1):
        if omega(seq.initial.cols[j - 1]) <= 0:
            defects.append(f"omega(v_0,{j}) <= 0")
    for s, M in enumerate(seq.matrices):
        for j, x in enumerate(omega_values(M, omega), 1):
            if x == 0:
                defects.append(f"omega(v_{s},{j}) = 0")
    if k >= 2:
        for s, (M, mv) in enumerate(zip(seq.matrices, seq.moves)):
            obs = affine_observables(M, mv.j, omega=omega.coefficients)
            omega_obs = [o for o in obs if o[0][0] == "omega"]
            minor_obs = [o for o in obs if o[0][0] == "minor"]
            omega_roots = {r for r in positive_roots(omega_obs) if r < mv.t}
            minor_roots = {r for r in positive_roots(minor_obs) if r < mv.t}
            if omega_roots & minor_roots:
                defects.append(f"omega root coincides with a minor root on move {s}")
    return defects


def choose_functional(
    seq: ConvexSeq,
    seed=0,
    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
    budget: int = DEFAULT_RETRY_BUDGET,
) -> Functional:
    """Pick a generic omega, positive on the last k columns of M_0.

    Starts from the sum of the dual basis of the last k columns and adds a
    seeded rational perturbation small enough to keep those values >= 1/2.
    """
    M0 = seq.initial
    k, n = seq.k, seq.n
    if k == 1:
        omega = Functional((Fraction(sign(M0.cols[-1][0])),))
        if functional_defects(seq, omega):
            raise InvalidFunctionalError("k = 1 needs all entries nonzero")
        return omega
    base = _dual_basis_sum(M0)
    norm = max(sum(abs(x) for x in M0.cols[j]) for j in range(n - k, n))
    scale = Fraction(1, 2) / norm
    rng = random.Random(derive_seed("functional", seed))
    for _ in range(budget):
        pert = [Fraction(rng.randint(-max_denominator, max_denominator), max_denominator) for _ in range(k)]
        coeffs = [b + scale * p for b, p in zip(base, pert)]
        if not any(coeffs):
            continue
        omega = Functional(tuple(coeffs))
        if not functional_defects(seq, omega):
            return omega
    raise FunctionalBudgetError(f"no valid functional after {budget} draws")


def classify_move(seq: ConvexSeq, s: int, omega: Functional) -> MoveType:
    M0, M1 = seq.matrices[s], seq.matrices[s + 1]
    j = seq.moves[s].j
    before = [sign(x) for x in _require_nonvanishing(M0, omega)]
    after = [sign(x) for x in _require_nonvanishing(M1, omega)]
    flipped = [i for i, (a, b) in enumerate(zip(before, after), 1) if a != b]
    if not flipped:
        return TYPE_I
    # only column j moves, and omega is affine along the move, so a flip must
    # head towards the sign of omega(v_{s,j+1})
    if flipped != [j] or not (after[j - 1] == before[j] == -before[j - 1]):
        raise InternalInvariantError(f"move {s}: impossible omega-sign pattern {before} -> {after}")
    return MoveType(j)


def _split_points(roots: list[Fraction]) -> list[Fraction]:
    return [(a + b) / 2 for a, b in zip(roots, roots[1:])]


def refine_with_index(seq: ConvexSeq, omega: Functional) -> tuple[ConvexSeq, tuple[int, ...]]:
    """`refine`, also returning the positions of the original samples."""
    moves: list[MoveStep] = []
    index = [0]
    for s, (M, mv) in enumerate(zip(seq.matrices, seq.moves)):
        obs = affine_observables(M, mv.j, omega=omega.coefficients)
        roots = [r for r in positive_roots(obs) if r < mv.t]
        if seq.k >= 2:
            lead = tuple(range(1, seq.k + 1))
            omega_roots = {r for r in positive_roots([o for o in obs if o[0] == ("omega", mv.j)]) if r < mv.t}
            lead_roots = {r for r in positive_roots([o for o in obs if o[0] == ("minor", lead)]) if r < mv.t}
            common = omega_roots & lead_roots
            if common:
                raise CoincidentRootsError(s, min(common))
        prev = Fraction(0)
        for c in _split_points(roots):
            moves.append(MoveStep(mv.j, c - prev))
            prev = c
        moves.append(MoveStep(mv.j, mv.t - prev))
        index.append(len(moves))
    return ConvexSeq(seq.initial, tuple(moves)), tuple(index)


def refine(seq: ConvexSeq, omega: Functional) -> ConvexSeq:
    """Split moves at midpoints between consecutive event roots.

    Events are zeros of any k x k minor or of omega on the moving column.
    Afterwards every move crosses at most one event parameter, so no move can
    both flip the leading minor and be of type II.
    """
    return refine_with_index(seq, omega)[0]


def kernel_pivot(omega: Functional) -> int:
    """Largest (1-based) index q with omega_q != 0."""
    return max(i for i, c in enumerate(omega.coefficients, 1) if c != 0)


def reduce_matrix(M: ExactMatrix, omega: Functional) -> ExactMatrix:
    """Columns w_j = omega(v_{j+1}) (v~_{j+1} - v~_j), v~ = v / omega(v), in the kernel basis.

    The basis of ker omega is b_i = e_i - (omega_i / omega_q) e_q over i != q,
    so coordinates are the vector with its q-th entry deleted.
    """
    if M.k < 2:
        raise ValueError("reduction needs k >= 2")
    values = _require_nonvanishing(M, omega)
    q = kernel_pivot(omega) - 1
    tilde = [tuple(x / w for x in c) for c, w in zip(M.cols, values)]
    cols = []
    for j in range(M.n - 1):
        scale = values[j + 1]
        w = [scale * (a - b) for a, b in zip(tilde[j + 1], tilde[j])]
        del w[q]
        cols.append(tuple(w))
    return ExactMatrix(tuple(cols))


def elementary_factor(M: ExactMatrix, mv: MoveStep, omega: Functional) -> ReducedStep:
    """Factor the reduced image of a type I move as a downstairs move times a diagonal.

    With a = omega(v_j) before and b = omega(v_j) after the move:
    scaling_{j-1} = b / a, scaling_j = a / b, and downstairs t' = t a / b.
    The identity is re-checked exactly before returning.
    """
    M1 = apply_move(M, mv)
    j = mv.j
    a = omega(M.cols[j - 1])
    b = omega(M1.cols[j - 1])
    if a == 0 or b == 0 or sign(a) != sign(b):
        raise InternalInvariantError(f"move at j={j} is not of type I for this functional")
    R0, R1 = reduce_matrix(M, omega), reduce_matrix(M1, omega)
    scaling = [Fraction(1)] * (M.n - 1)
    scaling[j - 1] = a / b
    if j == 1:
        step = ReducedStep(None, None, tuple(scaling))
        expected = R0.scale_columns(scaling)
    else:
        scaling[j - 2] = b / a
        step = ReducedStep(j - 1, mv.t / scaling[j - 2], tuple(scaling))
        expected = apply_move(R0, MoveStep(step.j, step.t)).scale_columns(scaling)
    if expected != R1:
        raise InternalInvariantError(f"reduced move at j={j} does not factor as elementary move times diagonal")
    return step


def maximal_runs(types: Sequence[MoveType]) -> list[tuple[int, int]]:
    """Sample intervals [a, b] joined by type I moves; type II moves separate them."""
    runs = []
    start = 0
    for s, mt in enumerate(types):
        if not mt.is_type_one:
            runs.append((start, s))
            start = s + 1
    runs.append((start, len(types)))
    return runs


def reduce_run(seq: ConvexSeq, omega: Functional, run: tuple[int, int]) -> ReducedRun:
    """Push a type I run downstairs as a genuine convex sequence.

    Diagonal scalings are commuted to the right: with R_s = S_s diag(p),
    a downstairs move (j', t') on R_s becomes (j', t' p_{j'+1} / p_{j'}) on S_s.
    """
    a, b = run
    R = reduce_matrix(seq.matrices[a], omega)
    p = [Fraction(1)] * (seq.n - 1)
    moves: list[MoveStep] = []
    sample_map = [0]
    scalings = [tuple(p)]
    for s in range(a, b):
        mv = seq.moves[s]
        if not classify_move(seq, s, omega).is_type_one:
            raise InternalInvariantError(f"move {s} in run {run} is not of type I")
        step = elementary_factor(seq.matrices[s], mv, omega)
        if step.j is not None:
            jj = step.j
            moves.append(MoveStep(jj, step.t * p[jj] / p[jj - 1]))
        p = [x * d for x, d in zip(p, step.scaling)]
        sample_map.append(len(moves))
        scalings.append(tuple(p))
    return ReducedRun(a, b, ConvexSeq(R, tuple(moves)), tuple(sample_map), tuple(scalings))


def reduce_sequence(seq: ConvexSeq, omega: Functional) -> tuple[list[MoveType], list[ReducedRun]]:
    types = [classify_move(seq, s, omega) for s in range(seq.length)]
    return types, [reduce_run(seq, omega, run) for run in maximal_runs(types)]


def runs_generic(runs: Sequence[ReducedRun]) -> bool:
    return all(is_generic(M) for r in runs for M in r.seq.matrices)


def leading_sign_changes(seq: ConvexSeq) -> list[int]:
    """Indices s where the leading minor flips between M_s and M_{s+1}."""
    signs = [sign(leading_minor(M)) for M in seq.matrices]
    return [s for s in range(seq.length) if signs[s] * signs[s + 1] < 0]
