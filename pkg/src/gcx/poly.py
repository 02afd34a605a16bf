"""Univariate polynomials over the rationals, with Sturm-sequence root counting."""

from __future__ import annotations

from fractions import Fraction
from math import floor, gcd
from typing import Iterable, Sequence


class Poly:
    """Immutable polynomial; coefficients are stored lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def const(cls, a) -> Poly:
        return cls((a,))

    @classmethod
    def monomial(cls, coeff, degree: int) -> Poly:
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"

    def _lift(self, other) -> Poly:
        return other if isinstance(other, Poly) else Poly.const(other)

    def __add__(self, other) -> Poly:
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly([-x for x in self.coeffs])

    def __sub__(self, other) -> Poly:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> Poly:
        return self._lift(other) - self

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            other = Fraction(other)
            return Poly([x * other for x in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> Poly:
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __divmod__(self, other: Poly) -> tuple[Poly, Poly]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for i in range(len(rem) - 1, dq - 1, -1):
            f = rem[i] / lead
            if f:
                quot[i - dq] = f
                for j, c in enumerate(other.coeffs):
                    rem[i - dq + j] -= f * c
        return Poly(quot), Poly(rem[:dq] if dq > 0 else [])

    def __mod__(self, other: Poly) -> Poly:
        return divmod(self, other)[1]

    def __floordiv__(self, other: Poly) -> Poly:
        return divmod(self, other)[0]

    def monic(self) -> Poly:
        return self * (1 / self.leading) if self.coeffs else self

    def shift(self, a) -> Poly:
        """p(x + a)."""
        out = Poly()
        x_plus_a = Poly((a, 1))
        for c in reversed(self.coeffs):
            out = out * x_plus_a + c
        return out


X = Poly((0, 1))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: Poly) -> Poly:
    """p / gcd(p, p'): same distinct roots, all simple."""
    if p.degree <= 0:
        return p
    g = poly_gcd(p, p.derivative())
    return (p // g).monic()


def sturm_chain(p: Poly) -> list[Poly]:
    chain = [p, p.derivative()]
    while chain[-1]:
        r = -(chain[-2] % chain[-1])
        if not r:
            break
        chain.append(r)
    return [c for c in chain if c]


def sign_variations(values: Sequence[Fraction]) -> int:
    nz = [v for v in values if v != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if (a > 0) != (b > 0))


def _variations_at(chain: Sequence[Poly], x) -> int:
    return sign_variations([c(x) for c in chain])


def _strip_root(p: Poly, a) -> tuple[Poly, bool]:
    """Divide out (x - a) once if a is a root of the squarefree p."""
    if p(a) == 0:
        return p // Poly((-Fraction(a), 1)), True
    return p, False


def sturm_count(p: Poly, a, b) -> int:
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        return 0
    q = squarefree_part(p)
    q, _ = _strip_root(q, a)
    q, at_b = _strip_root(q, b)
    if q.degree <= 0:
        return int(at_b)
    chain = sturm_chain(q)
    return _variations_at(chain, a) - _variations_at(chain, b) + int(at_b)


def cauchy_bound(p: Poly) -> Fraction:
    """All real roots lie in (-B, B)."""
    lead = abs(p.leading)
    return 1 + max((abs(c) / lead for c in p.coeffs[:-1]), default=Fraction(0))


def isolate_roots(p: Poly, a, b) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi] each holding exactly one distinct root of p in (a, b].

    A degenerate interval lo == hi marks an exactly located rational root.
    """
    a, b = Fraction(a), Fraction(b)
    q = squarefree_part(p)
    if q.degree <= 0:
        return []
    chain = sturm_chain(q)

    def count(lo, hi):
        return _variations_at(chain, lo) - _variations_at(chain, hi) + 0

    out = []
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        # chain counts on (lo, hi] are valid even when hi is a root of q
        c = count(lo, hi)
        if c == 0:
            continue
        if c == 1:
            if q(hi) == 0:
                out.append((hi, hi))
            else:
                out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    return sorted(out)


def refine_root(p: Poly, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval (lo, hi] of a simple root of squarefree p by bisection."""
    q = squarefree_part(p)
    if lo == hi:
        return lo, hi
    if q(hi) == 0:
        return hi, hi
    s_hi = q(hi) > 0
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = q(mid)
        if v == 0:
            return mid, mid
        if (v > 0) == s_hi:
            hi = mid
        else:
            lo = mid
    return lo, hi


def simplest_between(lo: Fraction, hi: Fraction | None) -> Fraction:
    """The rational with smallest denominator (then numerator) strictly inside (lo, hi).

    `hi=None` means +infinity. Requires lo >= 0 and lo < hi.
    """
    lo = Fraction(lo)
    fl = floor(lo)
    if hi is None or fl + 1 < hi:
        return Fraction(fl + 1)
    hi = Fraction(hi)
    if lo >= hi:
        raise ValueError("empty interval")
    if lo == fl:
        return fl + Fraction(1, floor(1 / (hi - fl)) + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


# -- integer fast path ------------------------------------------------------------
#
# Search scores only need the number of distinct real roots over the whole line.
# Sturm's theorem at -inf/+inf needs just degrees and leading signs, and a
# pseudo-remainder sequence scaled by positive constants keeps every sign, so
# plain integers suffice.


def integer_coefficients(p: Poly) -> list[int]:
    """Positive multiple of p with coprime integer coefficients (lowest degree first)."""
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    out = [int(c * den) for c in p.coeffs]
    return _primitive(out)


def _primitive(a: list[int]) -> list[int]:
    g = 0
    for x in a:
        g = gcd(g, x)
    return [x // g for x in a] if g > 1 else a


def _int_derivative(a: list[int]) -> list[int]:
    return [i * x for i, x in enumerate(a)][1:]


def _neg_prem(a: list[int], b: list[int]) -> list[int]:
    """-(|lc(b)|^e a mod b), made primitive; a positive multiple of -(a mod b)."""
    r = list(a)
    db, lb = len(b) - 1, b[-1]
    scale = abs(lb)
    sgn = 1 if lb > 0 else -1
    while len(r) - 1 >= db and r:
        lr = r[-1]
        shift = len(r) - 1 - db
        # r <- |lb| r - sgn * lr * x^shift b, which kills the leading term
        r = [scale * x for x in r]
        for i, y in enumerate(b):
            r[i + shift] -= sgn * lr * y
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return _primitive([-x for x in r]) if r else []


def count_real_roots(coeffs: list[int]) -> int:
    """Number of distinct real roots of a nonzero integer polynomial."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if not coeffs:
        raise ValueError("the zero polynomial has infinitely many roots")
    chain = [coeffs, _int_derivative(coeffs)]
    while chain[-1]:
        chain.append(_neg_prem(chain[-2], chain[-1]))
    chain = [c for c in chain if c]
    at_plus = [1 if c[-1] > 0 else -1 for c in chain]
    at_minus = [s if (len(c) - 1) % 2 == 0 else -s for s, c in zip(at_plus, chain)]
    return sign_variations(at_minus) - sign_variations(at_plus)
