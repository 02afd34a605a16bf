"""Quick built-in consistency suite behind `gcx selftest`.

Each check returns (ok, detail). The suite is a reduced-size version of the
acceptance tests and needs nothing beyond the package itself.
"""

from __future__ import annotations

import random
import time
from dataclasses import replace
from fractions import Fraction
from typing import Callable

from . import bound as bounds
from .certify import build_certificate, check_certificate
from .core import derive_seed, nsc, random_convex_seq
from .curve import canonical_word, factor_pos_eta, word_product
from .reduce import choose_functional, elementary_factor, leading_sign_changes, reduce_sequence, refine
from .search import SearchConfig, maximize_nsc


def check_bounds() -> tuple[bool, str]:
    ok = all(bounds.theorem_bound(3, n) == (n - 2) ** 3 for n in range(4, 11))
    ok &= all(bounds.theorem_bound(2, n) == 2 * (n - 2) for n in range(3, 11))
    ok &= bounds.dual_bound(4, 6) == 10 and bounds.conjecture_bound(3, 6) == 9
    return ok, "bound table"


def check_certificates(count: int = 40) -> tuple[bool, str]:
    for i in range(count):
        rng = random.Random(derive_seed("selftest", i))
        k = rng.randint(1, 3)
        n = rng.randint(k + 1, 6)
        seq = random_convex_seq(k, n, rng.randint(0, 20), derive_seed("selftest-seq", i))
        cert = build_certificate(seq, seed=i, self_check=False)
        report = check_certificate(seq, cert)
        drop = cert.original_pr()[0] - cert.original_pr()[-1]
        if not report.ok or not nsc(seq) <= drop <= bounds.constructive_bound(k, n):
            return False, f"instance {i}: {report}"
    return True, f"{count} certificates"


def check_tamper(count: int = 20) -> tuple[bool, str]:
    done = 0
    for i in range(200):
        seq = random_convex_seq(2, 4, 20, derive_seed("selftest-tamper", i))
        cert = build_certificate(seq, seed=i, self_check=False)
        flips = leading_sign_changes(cert.refined)
        if not flips:
            continue
        s = flips[0]
        pr = list(cert.pr)
        pr[s + 1] += 1
        if check_certificate(seq, replace(cert, pr=tuple(pr))).ok:
            return False, f"tampered certificate {i} passed"
        done += 1
        if done == count:
            break
    return True, f"{done} tampered certificates rejected"


def check_reduction(count: int = 40) -> tuple[bool, str]:
    seen = 0
    for i in range(count):
        seq = random_convex_seq(3, 5, 10, derive_seed("selftest-reduce", i))
        omega = choose_functional(seq, seed=i)
        fine = refine(seq, omega)
        types, _ = reduce_sequence(fine, omega)
        for s, kind in enumerate(types):
            if kind.is_type_one:
                elementary_factor(fine.matrices[s], fine.moves[s], omega)
                seen += 1
    return True, f"{seen} type I steps reconstructed"


def check_factorization(count: int = 30) -> tuple[bool, str]:
    rng = random.Random(7)
    for _ in range(count):
        n = rng.randint(2, 6)
        word = canonical_word(n)
        params = [Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in word]
        got = factor_pos_eta(word_product(word, params, n))
        if not got.ok or list(got.params) != params:
            return False, f"round trip failed for n={n}"
    return True, f"{count} factorization round trips"


def check_search() -> tuple[bool, str]:
    for k, n in ((1, 3), (2, 4)):
        result = maximize_nsc(SearchConfig(k, n, budget=20_000, restarts=4, seed=1, target=k * (n - k)))
        if result.best_nsc != k * (n - k):
            return False, f"search reached {result.best_nsc} for k={k}, n={n}"
    return True, "search targets for (1,3), (2,4)"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("bounds", check_bounds),
    ("certificates", check_certificates),
    ("tamper", check_tamper),
    ("reduction", check_reduction),
    ("factorization", check_factorization),
    ("search", check_search),
]


def run_selftest(emit: Callable[[str], None] = print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        started = time.monotonic()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        emit(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.monotonic() - started:.1f}s)")
    return all_ok
