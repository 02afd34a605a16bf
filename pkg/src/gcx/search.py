"""Seeded heuristic maximisation of nsc, producing re-verifiable witnesses.

Two strategies:

* ``greedy`` works on sequences directly. At every step it looks for a move
  at index k whose affine leading minor has a positive root and banks the
  sign change by stepping just past it; otherwise it repositions with a
  random move whose parameter sits strictly between consecutive event roots.
* ``anneal`` works on the curve model. A proposal is a rational mutation of
  the bottom k rows of L0; its score is the exact number of distinct real
  zeros of m along t -> L0 exp(t sum_j l_j), counted with an integer Sturm
  chain. The best curve is then discretized into a convex sequence whose nsc
  is at least that score and is recomputed exactly.

Every restart draws from its own stream seeded by derive_seed(seed, restart),
so results do not depend on how restarts are scheduled across workers.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import factorial, gcd
from pathlib import Path
from typing import Any, Sequence

from . import bound as bounds
from .core import (
    ConvexSeq,
    DegenerateSequenceError,
    ExactMatrix,
    MoveStep,
    affine_observables,
    apply_move,
    derive_seed,
    is_generic,
    leading_minor,
    nsc,
    positive_roots,
    random_generic_matrix,
    random_rational,
    sign,
)
from .curve import Arc, CurveError, CurveSpec, UnipotentMatrix, all_ones, discretize_curve, exp_arc
from .poly import _primitive, cauchy_bound, count_real_roots, simplest_between
from .serialize import canonical_json, content_hash, seq_from_dict, seq_to_dict, write_json

log = logging.getLogger(__name__)

STRATEGIES = ("greedy", "anneal")
WITNESS_DIR_ENV = "GCX_WITNESS_DIR"


@dataclass(frozen=True)
class SearchConfig:
    k: int
    n: int
    budget: int = 100_000
    restarts: int = 8
    seed: int = 0
    strategy: str = "anneal"
    max_length: int = 1000
    magnitude: int = 6
    target: int | None = None
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got k={self.k}, n={self.n}")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if self.max_length < 1 or self.magnitude < 1 or self.threads < 1:
            raise ValueError("max_length, magnitude and threads must be positive")

    @property
    def goal(self) -> int:
        """The score at which a restart stops early."""
        return self.target if self.target is not None else self.k * (self.n - self.k)


@dataclass(frozen=True)
class Witness:
    seq: ConvexSeq
    nsc: int
    config: dict[str, Any]
    provenance: dict[str, Any]
    red_alert: bool = False

    def to_dict(self) -> dict:
        return {
            "sequence": seq_to_dict(self.seq),
            "nsc": self.nsc,
            "config": self.config,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Witness:
        seq = seq_from_dict(data["sequence"])
        return cls(seq, int(data["nsc"]), dict(data.get("config", {})), dict(data.get("provenance", {})))

    def tie_key(self) -> tuple:
        """Larger nsc wins; then shorter sequences; then the smaller serialization."""
        return (-self.nsc, self.seq.length, canonical_json(seq_to_dict(self.seq)))


@dataclass
class RestartResult:
    restart: int
    proposals: int
    witness: Witness | None
    score: int


@dataclass
class SearchResult:
    witness: Witness | None
    proposals: int
    restarts_run: int
    progress: list[tuple[int, int, int, int]] = field(default_factory=list)

    @property
    def best_nsc(self) -> int:
        return self.witness.nsc if self.witness else 0


# -- greedy: banking sign changes on sequences -------------------------------------


def _event_roots(M: ExactMatrix, j: int) -> list[Fraction]:
    return positive_roots(affine_observables(M, j))


def _pick_parameter(roots: Sequence[Fraction], rng: random.Random) -> Fraction:
    """A simple rational strictly inside a randomly chosen gap between event roots."""
    cuts = sorted(set(roots))
    gap = rng.randrange(len(cuts) + 1)
    lo = cuts[gap - 1] if gap else Fraction(0)
    hi = cuts[gap] if gap < len(cuts) else None
    return simplest_between(lo, hi)


def _bank_parameter(M: ExactMatrix, k: int) -> Fraction | None:
    """t just past the zero of m along the move (k, t), if that zero is positive."""
    m = leading_minor(M)
    obs = affine_observables(M, k)
    slope = next(s for label, _, s in obs if label == ("minor", tuple(range(1, k + 1))))
    if slope == 0 or sign(slope) == sign(m):
        return None
    t_star = -m / slope
    later = [r for r in positive_roots(obs) if r > t_star]
    return simplest_between(t_star, min(later) if later else None)


def _gap_parameters(roots: Sequence[Fraction]) -> list[Fraction]:
    """One simple rational inside every gap between consecutive event roots."""
    cuts = [Fraction(0)] + sorted(set(roots))
    return [simplest_between(a, b) for a, b in zip(cuts, cuts[1:])] + [simplest_between(cuts[-1], None)]


def _greedy_restart(cfg: SearchConfig, restart: int, budget: int) -> RestartResult:
    """Bank a sign change when one is available; otherwise take a repositioning
    move after which one is available, falling back to a random move."""
    rng = random.Random(derive_seed(cfg.seed, "restart", restart))
    k, n = cfg.k, cfg.n
    M0 = random_generic_matrix(k, n, rng, magnitude=cfg.magnitude)
    M, moves, proposals = M0, [], 0
    changes = 0
    others = [i for i in range(1, n) if i != k]
    while proposals < budget and len(moves) < cfg.max_length and changes < cfg.goal:
        proposals += 1
        t = _bank_parameter(M, k)
        if t is not None:
            mv = MoveStep(k, t)
        else:
            good = []
            for j in others:
                for t in _gap_parameters(_event_roots(M, j)):
                    proposals += 1
                    if _bank_parameter(apply_move(M, MoveStep(j, t)), k) is not None:
                        good.append(MoveStep(j, t))
            if good:
                mv = rng.choice(good)
            else:
                j = rng.choice(others or [k])
                mv = MoveStep(j, _pick_parameter(_event_roots(M, j), rng))
        nxt = apply_move(M, mv)
        if not is_generic(nxt):
            continue
        if sign(leading_minor(nxt)) != sign(leading_minor(M)):
            changes += 1
        M = nxt
        moves.append(mv)
    seq = ConvexSeq(M0, tuple(moves))
    return RestartResult(restart, proposals, _make_witness(cfg, seq, restart), changes)


# -- anneal: curve-model search ----------------------------------------------------


def _param_count(k: int, n: int) -> int:
    return sum(range(n - k, n))


def _bottom_rows(k: int, n: int, x: Sequence[Fraction]) -> list[list[Fraction]]:
    rows, it = [], iter(x)
    for r in range(n - k, n):
        rows.append([next(it) if c < r else Fraction(int(c == r)) for c in range(n)])
    return rows


def wronskian_coefficients(k: int, n: int, x: Sequence[Fraction]) -> list[int]:
    """Positive integer multiple of m(L0 exp(t sum_j l_j)), L0 given by its bottom rows.

    Row r of that product is P_r, P_r', P_r'', ... with P_r = sum_i L0[r][i] t^i / i!,
    so the leading minor is the Wronskian of the P_r. Each P_r is scaled to
    integer coefficients first, which multiplies the determinant by a positive
    constant.
    """
    polys = []
    for row in _bottom_rows(k, n, x):
        coeffs = [Fraction(c, factorial(i)) for i, c in enumerate(row)]
        den = 1
        for c in coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        polys.append([int(c * den) for c in coeffs])
    entries = []
    for p in polys:
        row, d = [], p
        for _ in range(k):
            row.append(d)
            d = [i * c for i, c in enumerate(d)][1:]
        entries.append(row)
    return _primitive(_int_det(entries)) if any(_int_det(entries)) else []


def _pmul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a: list[int], b: list[int], s: int = 1) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] += s * y
    while out and out[-1] == 0:
        out.pop()
    return out


def _int_det(m: list[list[list[int]]]) -> list[int]:
    """Determinant of a square matrix of integer polynomials by cofactor expansion."""
    if len(m) == 1:
        return m[0][0]
    total: list[int] = []
    for c in range(len(m)):
        if not m[0][c]:
            continue
        minor = [row[:c] + row[c + 1 :] for row in m[1:]]
        total = _padd(total, _pmul(m[0][c], _int_det(minor)), -1 if c % 2 else 1)
    return total


def curve_score(k: int, n: int, x: Sequence[Fraction]) -> int:
    w = wronskian_coefficients(k, n, x)
    return count_real_roots(w) if w else -1


def _mutate(x: list[Fraction], rng: random.Random, magnitude: int) -> list[Fraction]:
    y = list(x)
    i = rng.randrange(len(y))
    step = Fraction(rng.randint(-8, 8), 4) / 2 ** rng.randint(0, 5)
    y[i] = max(-magnitude * 4, min(magnitude * 4, y[i] + step))
    return y


def curve_from_parameters(k: int, n: int, x: Sequence[Fraction]) -> CurveSpec:
    """The curve t -> L0 exp(t sum_j l_j) over an interval that holds every real zero."""
    from .curve import leading_minor_poly

    rows = [[Fraction(int(r == c)) for c in range(n)] for r in range(n - k)] + _bottom_rows(k, n, x)
    L0 = UnipotentMatrix(tuple(tuple(r) for r in rows))
    p = leading_minor_poly(L0, all_ones(n), k)
    B = cauchy_bound(p)
    start = L0 @ exp_arc(all_ones(n), -B) if B else L0
    return CurveSpec(n, k, start, (Arc(all_ones(n), 2 * B),))


def _anneal_restart(cfg: SearchConfig, restart: int, budget: int) -> RestartResult:
    rng = random.Random(derive_seed(cfg.seed, "restart", restart))
    k, n = cfg.k, cfg.n
    dim = _param_count(k, n)
    x = [random_rational(rng, cfg.magnitude) for _ in range(dim)]
    score = curve_score(k, n, x)
    best, best_score = x, score
    temperature = 1.0
    cooling = math.exp(math.log(1e-3) / max(budget, 1))
    proposals = 1
    while proposals < budget and best_score < cfg.goal:
        proposals += 1
        y = _mutate(x, rng, cfg.magnitude)
        s = curve_score(k, n, y)
        if s >= score or rng.random() < temperature * 0.3 ** (score - s):
            x, score = y, s
            if s > best_score:
                best, best_score = y, s
        temperature *= cooling
    witness = None
    if best_score > 0:
        try:
            seq = discretize_curve(curve_from_parameters(k, n, best))
            if seq.length > cfg.max_length:
                log.warning("restart %d: discretized sequence has %d > %d moves", restart, seq.length, cfg.max_length)
            else:
                witness = _make_witness(cfg, seq, restart)
        except (CurveError, DegenerateSequenceError) as exc:
            log.warning("restart %d: discretization failed (%s)", restart, exc)
    return RestartResult(restart, proposals, witness, best_score)


# -- driver ------------------------------------------------------------------------


def _make_witness(cfg: SearchConfig, seq: ConvexSeq, restart: int) -> Witness | None:
    try:
        value = nsc(seq)
    except DegenerateSequenceError:
        return None
    alert = value > bounds.max_nsc_allowed("theorem", cfg.k, cfg.n)
    return Witness(
        seq,
        value,
        config=asdict(cfg),
        provenance={"restart": restart, "stream_seed": derive_seed(cfg.seed, "restart", restart)},
        red_alert=alert,
    )


def _run_restart(args: tuple[SearchConfig, int, int]) -> RestartResult:
    cfg, restart, budget = args
    if cfg.strategy == "greedy":
        return _greedy_restart(cfg, restart, budget)
    return _anneal_restart(cfg, restart, budget)


def _budgets(cfg: SearchConfig) -> list[int]:
    share, extra = divmod(cfg.budget, cfg.restarts)
    return [share + (1 if i < extra else 0) for i in range(cfg.restarts)]


def maximize_nsc(cfg: SearchConfig, progress_path: str | Path | None = None) -> SearchResult:
    """Best witness over the configured restarts.

    Restarts are merged in index order, so the result (including the early
    stop on reaching the target) is the same for any thread count.
    """
    started = time.monotonic()
    jobs = [(cfg, i, b) for i, b in enumerate(_budgets(cfg)) if b > 0]
    result = SearchResult(None, 0, 0)
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = pool.map(_run_restart, jobs)
            _merge(cfg, outcomes, result, started)
    else:
        _merge(cfg, map(_run_restart, jobs), result, started)
    if progress_path is not None:
        with open(progress_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["restart", "proposals", "best_nsc", "elapsed_ms"])
            writer.writerows(result.progress)
    if result.witness and result.witness.red_alert:
        log.error(
            "RED ALERT: nsc=%d reaches the theorem bound %s for k=%d, n=%d",
            result.witness.nsc,
            bounds.theorem_bound(cfg.k, cfg.n),
            cfg.k,
            cfg.n,
        )
    return result


def _merge(cfg: SearchConfig, outcomes, result: SearchResult, started: float) -> None:
    for out in outcomes:
        result.proposals += out.proposals
        result.restarts_run += 1
        w = out.witness
        if w is not None and (result.witness is None or w.tie_key() < result.witness.tie_key()):
            result.witness = w
        elapsed = int((time.monotonic() - started) * 1000)
        result.progress.append((out.restart, result.proposals, result.best_nsc, elapsed))
        log.info("restart %d: score %d, best nsc %d", out.restart, out.score, result.best_nsc)
        if cfg.target is not None and result.best_nsc >= cfg.target:
            break


# -- verification and the witness library ------------------------------------------------


@dataclass
class VerifyReport:
    ok: bool
    nsc: int | None
    stored_nsc: int | None
    problems: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    archived: str | None = None
    certificate: Any = None

    def __str__(self) -> str:
        lines = [f"nsc: {self.nsc} (stored {self.stored_nsc})", "status: " + ("pass" if self.ok else "FAIL")]
        lines += [f"problem: {p}" for p in self.problems]
        lines += [f"flag: {f}" for f in self.flags]
        if self.archived:
            lines.append(f"archived: {self.archived}")
        return "\n".join(lines)


def _raw_convexity(data: dict) -> list[str]:
    problems = []
    for s, mv in enumerate(data.get("sequence", {}).get("moves", [])):
        try:
            t = Fraction(str(mv["t"]))
        except (KeyError, ValueError, ZeroDivisionError):
            problems.append(f"convexity: move {s} has no readable parameter")
            continue
        if t <= 0:
            problems.append(f"convexity: move {s} has t = {t} <= 0")
    return problems


def verify_witness(w: Witness | dict, certify: bool = False, library: str | Path | None = None) -> VerifyReport:
    """Re-validate a witness from scratch.

    Accepts a Witness or its raw JSON form; the raw form is checked for
    non-positive parameters before anything is parsed, so a tampered file
    yields a report rather than an exception.
    """
    if isinstance(w, dict):
        stored = w.get("nsc")
        problems = _raw_convexity(w)
        if problems:
            return VerifyReport(False, None, stored, problems)
        try:
            w = Witness.from_dict(w)
        except (ValueError, KeyError, TypeError) as exc:
            return VerifyReport(False, None, stored, [f"format: {exc}"])
    seq = w.seq
    report = VerifyReport(True, None, w.nsc)
    bad = [s for s, M in enumerate(seq.matrices) if not is_generic(M)]
    if bad:
        report.problems.append(f"genericity: samples {bad[:5]} have a vanishing minor")
    try:
        report.nsc = nsc(seq)
    except DegenerateSequenceError as exc:
        report.problems.append(f"degenerate: {exc}")
    if report.nsc is not None and report.nsc != w.nsc:
        report.problems.append(f"mismatch: recomputed nsc {report.nsc} != stored {w.nsc}")
    report.ok = not report.problems
    if report.nsc is None:
        return report
    k, n = seq.k, seq.n
    if report.nsc > bounds.max_nsc_allowed("theorem", k, n):
        report.flags.append("RED ALERT: nsc reaches the theorem bound")
    if report.nsc > bounds.conjecture_bound(k, n):
        report.flags.append("conjecture counterexample candidate")
        certify = True
        library = library or default_library()
    if certify and report.ok:
        from .certify import build_certificate

        report.certificate = build_certificate(seq)
    if library is not None and report.ok and report.flags:
        report.archived = str(save_witness(w, library))
    return report


def default_library() -> Path:
    return Path(os.environ.get(WITNESS_DIR_ENV, "witnesses"))


def save_witness(w: Witness, directory: str | Path | None = None) -> Path:
    """Store under a content-addressed name; an existing identical witness is kept."""
    directory = Path(directory) if directory is not None else default_library()
    directory.mkdir(parents=True, exist_ok=True)
    data = w.to_dict()
    path = directory / f"{content_hash(data['sequence'])}.json"
    if not path.exists():
        write_json(path, data)
    return path


def load_library(directory: str | Path | None = None) -> list[Witness]:
    from .serialize import read_json

    directory = Path(directory) if directory is not None else default_library()
    if not directory.is_dir():
        return []
    return [Witness.from_dict(read_json(p)) for p in sorted(directory.glob("*.json"))]
