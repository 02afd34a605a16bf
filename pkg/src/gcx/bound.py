"""Closed-form upper and lower bound values for nsc over convex sequences."""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from functools import lru_cache


class BoundKind(str, Enum):
    CONJECTURE = "conjecture"
    THEOREM = "theorem"
    DUAL = "dual"
    CONSTRUCTIVE = "constructive"


def _check(k: int, n: int) -> None:
    if not (isinstance(k, int) and isinstance(n, int) and 0 < k < n):
        raise ValueError(f"need integers 0 < k < n, got k={k!r}, n={n!r}")


def conjecture_bound(k: int, n: int) -> int:
    """k(n - k), the dimension of the Grassmannian; conjecturally sharp."""
    _check(k, n)
    return k * (n - k)


def theorem_bound(k: int, n: int) -> Fraction:
    """Upper bound on nsc.

    For k > 2 the bound is strict: nsc < (n-k+1)^(2k-3) / 2^(k-3).
    For k = 2 and k = 1 the returned value is attained (nsc <= value):
    2(n-2) and n-1 respectively. Use `is_strict` to tell the cases apart.
    """
    _check(k, n)
    if k == 1:
        return Fraction(n - 1)
    if k == 2:
        return Fraction(2 * (n - 2))
    return Fraction((n - k + 1) ** (2 * k - 3)) / Fraction(2) ** (k - 3)


def is_strict(k: int) -> bool:
    return k > 2


def _side(k: int, n: int) -> tuple[Fraction, bool]:
    """Closed-form bound for one side of the duality, with strictness."""
    if k == 1:
        return Fraction(n - 1), False
    return Fraction(2) ** (3 - k) * Fraction(n - k + 1) ** (2 * k - 3), True


def dual_bound(k: int, n: int) -> Fraction:
    """min(2^(3-k) (n-k+1)^(2k-3), 2^(3-n+k) (k+1)^(2(n-k)-3)).

    Both expressions are evaluated literally whenever their side index is at
    least 2 (for index 2 this is the valid but weaker 2(n-1)); a side with
    index 1 contributes n - 1 instead, since the formula degenerates there.
    """
    _check(k, n)
    return min(_side(k, n)[0], _side(n - k, n)[0])


@lru_cache(maxsize=None)
def constructive_bound(k: int, n: int) -> int:
    """Range of the recursively constructed preranks.

    T(1, n) = n - 1 and T(k, n) = (1 + (n-k)(n-k+1)/2) T(k-1, n-1).
    """
    _check(k, n)
    if k == 1:
        return n - 1
    return (1 + (n - k) * (n - k + 1) // 2) * constructive_bound(k - 1, n - 1)


def bound(kind: BoundKind | str, k: int, n: int) -> Fraction:
    kind = BoundKind(kind)
    fn = {
        BoundKind.CONJECTURE: conjecture_bound,
        BoundKind.THEOREM: theorem_bound,
        BoundKind.DUAL: dual_bound,
        BoundKind.CONSTRUCTIVE: constructive_bound,
    }[kind]
    return Fraction(fn(k, n))


def max_nsc_allowed(kind: BoundKind | str, k: int, n: int) -> int:
    """Largest integer nsc consistent with the bound, honouring strictness."""
    kind = BoundKind(kind)
    if kind is BoundKind.DUAL:
        value, strict = min(_side(k, n), _side(n - k, n), key=lambda vs: (vs[0], not vs[1]))
    else:
        value = bound(kind, k, n)
        strict = kind is BoundKind.THEOREM and is_strict(k)
    if strict:
        return math.ceil(value) - 1
    return math.floor(value)
