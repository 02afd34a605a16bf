"""Per-sequence prerank certificates and their independent checker.

A certificate assigns to every matrix of a (refined) convex sequence an
integer pr so that pr never increases along a move and strictly drops across
every sign change of the leading minor; then nsc <= pr(first) - pr(last).

For k >= 2 the values are pr = pr_I + pr_II * r_minus, where pr_II is the
weighted alternation count of omega along the columns and pr_I is read off a
certificate of the reduced (k-1) x (n-1) sequence. The recursion bottoms out
at a base prerank, by default the k = 1 alternation count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

from .core import (
    ConvexSeq,
    ExactMatrix,
    GcxError,
    InternalInvariantError,
    derive_seed,
    leading_minor,
    sign,
)
from .reduce import (
    CoincidentRootsError,
    Functional,
    FunctionalBudgetError,
    InvalidFunctionalError,
    choose_functional,
    reduce_sequence,
    refine_with_index,
    runs_generic,
)

K1_BASE_NAME = "k1-alternation"


class CertificateError(GcxError):
    """The builder produced something its own checker rejects."""

    def __init__(self, report: CheckReport):
        self.report = report
        super().__init__(f"certificate failed self-check: {report}")


class BasePrerank(Protocol):
    """A prerank known for all sequences of one fixed k; plugs into the recursion."""

    name: str
    k: int

    def range(self, n: int) -> int: ...

    def values(self, seq: ConvexSeq) -> list[int]: ...


def _alternations(values: Sequence[Fraction]) -> int:
    return sum(1 for a, b in zip(values, values[1:]) if a * b < 0)


@dataclass(frozen=True)
class AlternationBase:
    """k = 1: the number of sign alternations among the entries (range n - 1)."""

    name: str = K1_BASE_NAME
    k: int = 1

    def range(self, n: int) -> int:
        return n - 1

    def values(self, seq: ConvexSeq) -> list[int]:
        return base_prerank_k1(seq)


K1_BASE = AlternationBase()


def base_prerank_k1(seq: ConvexSeq) -> list[int]:
    """pr(M_s) = #{j : v_{s,j} v_{s,j+1} < 0} for a 1 x n sequence."""
    if seq.k != 1:
        raise ValueError("base prerank is defined for k = 1")
    out = []
    for s, M in enumerate(seq.matrices):
        row = [c[0] for c in M.cols]
        if any(x == 0 for x in row):
            raise InvalidFunctionalError(f"zero entry in M_{s}")
        out.append(_alternations(row))
    return out


def pr_two(M: ExactMatrix, omega: Functional) -> int:
    """sum over j < n of j * [omega(v_j) omega(v_{j+1}) < 0]."""
    values = [omega(c) for c in M.cols]
    if any(x == 0 for x in values):
        raise InvalidFunctionalError("omega vanishes on a column")
    total = 0
    for j in range(1, M.n):
        if values[j - 1] * values[j] < 0:
            if j > M.n - M.k:
                raise InternalInvariantError(f"omega alternates at j={j} > n-k={M.n - M.k}")
            total += j
    return total


def certified_range(k: int, n: int, base: BasePrerank = K1_BASE) -> int:
    """Upper end of the pr range: T(base.k, n') = base.range(n'), T(k, n) = (1 + (n-k)(n-k+1)/2) T(k-1, n-1)."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if k < base.k:
        raise ValueError(f"k={k} is below the base level {base.k}")
    if k == base.k:
        return base.range(n)
    return (1 + (n - k) * (n - k + 1) // 2) * certified_range(k - 1, n - 1, base)


@dataclass(frozen=True)
class ChildLink:
    """Certificate of one reduced type I run [start, stop]."""

    start: int
    stop: int
    sample_map: tuple[int, ...]
    certificate: PrerankCertificate


@dataclass(frozen=True)
class PrerankCertificate:
    k: int
    n: int
    refined: ConvexSeq
    sample_index: tuple[int, ...]
    pr: tuple[int, ...]
    base: str | None = None
    omega: tuple[Fraction, ...] | None = None
    r_minus: int | None = None
    pr_I: tuple[int, ...] | None = None
    pr_II: tuple[int, ...] | None = None
    move_types: tuple[str, ...] | None = None
    children: tuple[ChildLink, ...] = field(default_factory=tuple)

    @property
    def is_base(self) -> bool:
        return self.base is not None

    @property
    def certified_drop(self) -> int:
        return self.pr[0] - self.pr[-1]

    def original_pr(self) -> list[int]:
        """pr at the samples of the unrefined sequence."""
        return [self.pr[i] for i in self.sample_index]

    def depth(self) -> int:
        return 1 + max((c.certificate.depth() for c in self.children), default=0)


def _base_certificate(seq: ConvexSeq, base: BasePrerank) -> PrerankCertificate:
    values = tuple(base.values(seq))
    return PrerankCertificate(
        k=seq.k,
        n=seq.n,
        refined=seq,
        sample_index=tuple(range(seq.length + 1)),
        pr=values,
        base=base.name,
    )


def build_certificate(
    seq: ConvexSeq,
    seed=0,
    base: BasePrerank = K1_BASE,
    budget: int = 50,
    self_check: bool = True,
) -> PrerankCertificate:
    """Recursively construct a prerank certificate for a generic convex sequence.

    Functionals that make a reduced sample non-generic, or whose roots collide
    with leading-minor roots, are re-drawn with a derived seed.
    """
    if seq.k < base.k:
        raise ValueError(f"k={seq.k} is below the base level {base.k}")
    if seq.k == base.k:
        cert = _base_certificate(seq, base)
    else:
        cert = None
        for attempt in range(budget):
            try:
                omega = choose_functional(seq, derive_seed(seed, "omega", attempt))
                refined, index = refine_with_index(seq, omega)
            except (CoincidentRootsError, FunctionalBudgetError):
                continue
            types, runs = reduce_sequence(refined, omega)
            if not runs_generic(runs):
                continue
            cert = _assemble(seq, refined, index, omega, types, runs, seed, base, budget)
            break
        if cert is None:
            raise FunctionalBudgetError(f"no usable functional for a {seq.k}x{seq.n} sequence after {budget} attempts")
    if self_check:
        report = check_certificate(seq, cert, base)
        if not report.ok:
            raise CertificateError(report)
    return cert


def _assemble(seq, refined, index, omega, types, runs, seed, base, budget) -> PrerankCertificate:
    k, n = seq.k, seq.n
    r_minus = certified_range(k - 1, n - 1, base)
    pr_I = [0] * (refined.length + 1)
    children = []
    for i, run in enumerate(runs):
        child = build_certificate(run.seq, derive_seed(seed, "run", i), base, budget, self_check=False)
        for s in range(run.start, run.stop + 1):
            pr_I[s] = child.pr[child.sample_index[run.sample_map[s - run.start]]]
        children.append(ChildLink(run.start, run.stop, run.sample_map, child))
    pr_II = [pr_two(M, omega) for M in refined.matrices]
    pr = [a + b * r_minus for a, b in zip(pr_I, pr_II)]
    return PrerankCertificate(
        k=k,
        n=n,
        refined=refined,
        sample_index=index,
        pr=tuple(pr),
        omega=omega.coefficients,
        r_minus=r_minus,
        pr_I=tuple(pr_I),
        pr_II=tuple(pr_II),
        move_types=tuple(t.tag for t in types),
        children=tuple(children),
    )


# ---------------------------------------------------------------------------
# Checker. Deliberately shares nothing with the builder beyond matrix
# arithmetic from `core`: reductions, omega signs and alternation counts are
# recomputed here from scratch.


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    kind: str = "pass"
    step: int | None = None
    level: tuple[int, ...] = ()
    message: str = ""

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        where = f" at step {self.step}" if self.step is not None else ""
        path = f" (level path {list(self.level)})" if self.level else ""
        return f"FAIL [{self.kind}]{where}{path}: {self.message}"


PASS = CheckReport(True)


class _Fail(Exception):
    def __init__(self, kind, step, message, level=()):
        self.report = CheckReport(False, kind, step, tuple(level), message)


def check_certificate(seq: ConvexSeq, cert: PrerankCertificate, base: BasePrerank = K1_BASE) -> CheckReport:
    """Re-verify a certificate; never raises on bad certificates.

    Order of checks: refinement structure, prerank axioms along the refined
    sequence, the nsc inequality, value ranges, then consistency of every
    stored intermediate (pr_II, pr_I, reductions, move types) recursively.
    """
    try:
        _check_refinement(seq, cert)
        _check_level(cert, base, (), top=seq)
    except _Fail as f:
        return f.report
    except (GcxError, ValueError, IndexError, TypeError, ZeroDivisionError) as e:
        return CheckReport(False, "structure", None, (), f"malformed certificate: {e}")
    return PASS


def _check_refinement(seq: ConvexSeq, cert: PrerankCertificate) -> None:
    if (cert.k, cert.n) != (seq.k, seq.n):
        raise _Fail("structure", None, "dimension mismatch")
    if cert.refined.initial != seq.initial:
        raise _Fail("structure", None, "refined sequence starts elsewhere")
    idx = cert.sample_index
    if len(idx) != seq.length + 1 or idx[0] != 0 or idx[-1] != cert.refined.length:
        raise _Fail("structure", None, "sample index does not cover the refined sequence")
    for s, mv in enumerate(seq.moves):
        pieces = cert.refined.moves[idx[s] : idx[s + 1]]
        if not pieces or any(p.j != mv.j for p in pieces) or sum(p.t for p in pieces) != mv.t:
            raise _Fail("structure", s, "refined moves do not compose to the original move")


def _signs(values) -> list[int]:
    return [(x > 0) - (x < 0) for x in values]


def _check_axioms(refined: ConvexSeq, pr: Sequence[int], level) -> int:
    if len(pr) != refined.length + 1:
        raise _Fail("structure", None, "one pr value per refined matrix required", level)
    lead = [sign(leading_minor(M)) for M in refined.matrices]
    if 0 in lead:
        raise _Fail("structure", lead.index(0), "leading minor vanishes", level)
    flips = 0
    for s in range(refined.length):
        if pr[s + 1] > pr[s]:
            raise _Fail("axiom1", s, f"pr increases {pr[s]} -> {pr[s + 1]}", level)
        if lead[s] != lead[s + 1]:
            flips += 1
            if pr[s + 1] >= pr[s]:
                raise _Fail("axiom2", s, f"leading minor flips but pr {pr[s]} -> {pr[s + 1]} does not drop", level)
    return flips


def _check_level(cert: PrerankCertificate, base: BasePrerank, level, top: ConvexSeq | None = None) -> None:
    refined = cert.refined
    flips = _check_axioms(refined, cert.pr, level)
    if top is not None:
        lead = _signs(leading_minor(M) for M in top.matrices)
        nsc_top = sum(1 for a, b in zip(lead, lead[1:]) if a != b)
        if nsc_top > cert.pr[0] - cert.pr[-1]:
            raise _Fail("inequality", None, f"nsc={nsc_top} exceeds pr drop {cert.pr[0] - cert.pr[-1]}", level)
    elif flips > cert.pr[0] - cert.pr[-1]:
        raise _Fail("inequality", None, "refined nsc exceeds pr drop", level)
    k, n = cert.k, cert.n
    if (refined.k, refined.n) != (k, n):
        raise _Fail("structure", None, "dimension mismatch", level)
    top_range = certified_range(k, n, base)
    for s, v in enumerate(cert.pr):
        if not 0 <= v <= top_range:
            raise _Fail("range", s, f"pr={v} outside [0, {top_range}]", level)
    if k == base.k:
        if cert.base != base.name:
            raise _Fail("structure", None, f"base {cert.base!r} where {base.name!r} expected", level)
        if base.name == K1_BASE_NAME:
            for s, M in enumerate(refined.matrices):
                row = [c[0] for c in M.cols]
                if 0 in row:
                    raise _Fail("structure", s, "zero entry in base sequence", level)
                count = sum(1 for a, b in zip(row, row[1:]) if (a > 0) != (b > 0))
                if count != cert.pr[s]:
                    raise _Fail("structure", s, f"base pr {cert.pr[s]} != alternation count {count}", level)
        return
    _check_composite(cert, base, level)


def _check_composite(cert: PrerankCertificate, base: BasePrerank, level) -> None:
    refined = cert.refined
    k, n = cert.k, cert.n
    if cert.omega is None or cert.pr_I is None or cert.pr_II is None or cert.move_types is None:
        raise _Fail("structure", None, "composite level lacks omega / pr_I / pr_II / move types", level)
    omega = tuple(cert.omega)
    if len(omega) != k or not any(omega):
        raise _Fail("structure", None, "omega has wrong shape", level)
    r_minus = certified_range(k - 1, n - 1, base)
    if cert.r_minus != r_minus:
        raise _Fail("structure", None, f"r_minus={cert.r_minus}, expected {r_minus}", level)
    length = refined.length
    if len(cert.pr_I) != length + 1 or len(cert.pr_II) != length + 1 or len(cert.move_types) != length:
        raise _Fail("structure", None, "per-step arrays have wrong length", level)

    def ev(v):
        return sum((a * b for a, b in zip(omega, v)), Fraction(0))

    signs = []
    for s, M in enumerate(refined.matrices):
        vals = [ev(c) for c in M.cols]
        if any(x == 0 for x in vals):
            raise _Fail("structure", s, "omega vanishes on a column", level)
        signs.append([x > 0 for x in vals])
    if not all(signs[0][j] for j in range(n - k, n)):
        raise _Fail("structure", 0, "omega not positive on the last k columns", level)
    pr2_max = (n - k) * (n - k + 1) // 2
    for s in range(length + 1):
        expect = sum(j for j in range(1, n) if signs[s][j - 1] != signs[s][j])
        if cert.pr_II[s] != expect:
            raise _Fail("structure", s, f"pr_II={cert.pr_II[s]} but omega alternations give {expect}", level)
        if not 0 <= cert.pr_II[s] <= pr2_max:
            raise _Fail("range", s, f"pr_II outside [0, {pr2_max}]", level)
        if not 0 <= cert.pr_I[s] <= r_minus:
            raise _Fail("range", s, f"pr_I outside [0, {r_minus}]", level)
        if cert.pr[s] != cert.pr_I[s] + cert.pr_II[s] * r_minus:
            raise _Fail("structure", s, "pr != pr_I + pr_II * r_minus", level)

    boundaries = []
    for s, mv in enumerate(refined.moves):
        changed = [j for j in range(1, n + 1) if signs[s][j - 1] != signs[s + 1][j - 1]]
        tag = "I" if not changed else f"II:{changed[0]}"
        if len(changed) > 1 or cert.move_types[s] != tag:
            raise _Fail("structure", s, f"move type {cert.move_types[s]!r}, recomputed {tag!r}", level)
        if changed:
            boundaries.append(s)

    runs = []
    start = 0
    for s in boundaries:
        runs.append((start, s))
        start = s + 1
    runs.append((start, length))
    if [(c.start, c.stop) for c in cert.children] != runs:
        raise _Fail("structure", None, "children do not match the maximal type I runs", level)

    q = max(i for i, c in enumerate(omega) if c != 0)
    for i, child in enumerate(cert.children):
        sub = child.certificate
        if (sub.k, sub.n) != (k - 1, n - 1):
            raise _Fail("structure", child.start, "child has wrong dimensions", level)
        smap = child.sample_map
        if len(smap) != child.stop - child.start + 1 or smap[0] != 0 or smap[-1] != len(sub.sample_index) - 1:
            raise _Fail("structure", child.start, "sample map does not span the child sequence", level)
        if any(b - a not in (0, 1) for a, b in zip(smap, smap[1:])):
            raise _Fail("structure", child.start, "sample map skips", level)
        child_samples = sub.refined.matrices
        for off, s in enumerate(range(child.start, child.stop + 1)):
            reduced = _reduced_columns(refined.matrices[s].cols, ev, q)
            pos = sub.sample_index[smap[off]]
            got = child_samples[pos].cols
            if not _positive_rescaling(got, reduced):
                raise _Fail("structure", s, "child sample is not a positive rescaling of the reduction", level)
            if cert.pr_I[s] != sub.pr[pos]:
                raise _Fail("structure", s, f"pr_I={cert.pr_I[s]} but child certifies {sub.pr[pos]}", level)
        if any(a > b for a, b in zip(sub.sample_index, sub.sample_index[1:])):
            raise _Fail("structure", child.start, "child sample index not monotone", level)
        _check_level(sub, base, level + (i,))


def _reduced_columns(cols, ev, q):
    vals = [ev(c) for c in cols]
    out = []
    for j in range(len(cols) - 1):
        ratio = vals[j + 1] / vals[j]
        w = [a - ratio * b for a, b in zip(cols[j + 1], cols[j])]
        del w[q]
        out.append(w)
    return out


def _positive_rescaling(got, want) -> bool:
    """got[j] = d_j * want[j] with d_j > 0, column by column."""
    for g, w in zip(got, want):
        pivot = next((i for i, x in enumerate(w) if x != 0), None)
        if pivot is None:
            return False
        d = g[pivot] / w[pivot]
        if d <= 0 or any(a != d * b for a, b in zip(g, w)):
            return False
    return len(got) == len(want)
