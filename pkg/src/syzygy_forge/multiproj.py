"""Line-bundle cohomology on a product of two projective spaces.

Everything here is closed-form: single-factor cohomology of O(a) and its
Kunneth convolution. Only sums of line bundles are supported; the bigraded
zero-regularity predicate and the band-vanishing splitting conditions are
checked by direct enumeration of the quantified twist set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import binom
from .errors import BandViolation


def line_cohomology(m: int, a: int) -> tuple[int, ...]:
    """h^i(P^m, O(a)) for i = 0..m."""
    out = [0] * (m + 1)
    out[0] = binom(a + m, m)
    out[m] += binom(-a - 1, m)
    return tuple(out)


def kunneth_line_cohomology(m: int, n: int, a: int, b: int) -> tuple[int, ...]:
    """h^i(P^m x P^n, O(a, b)) for i = 0..m+n by Kunneth convolution."""
    ha = line_cohomology(m, a)
    hb = line_cohomology(n, b)
    out = [0] * (m + n + 1)
    for i, x in enumerate(ha):
        if not x:
            continue
        for j, y in enumerate(hb):
            out[i + j] += x * y
    return tuple(out)


@dataclass
class BigradedTable:
    m: int
    n: int
    window: tuple[int, int]
    h: dict  # (i, (a, b)) -> dim

    def to_tsv(self) -> str:
        lo, hi = self.window
        lines = []
        for i in range(self.m + self.n + 1):
            lines.append(f"# h^{i}")
            header = "a\\b\t" + "\t".join(str(b) for b in range(lo, hi + 1))
            lines.append(header)
            for a in range(lo, hi + 1):
                row = [str(self.h.get((i, (a, b)), 0)) for b in range(lo, hi + 1)]
                lines.append(f"{a}\t" + "\t".join(row))
        return "\n".join(lines)


def bigraded_table(m: int, n: int, twists, window=(-4, 4)) -> BigradedTable:
    """Cohomology of a sum of line bundles over a rectangular twist window."""
    lo, hi = window
    h = {}
    for a in range(lo, hi + 1):
        for b in range(lo, hi + 1):
            acc = [0] * (m + n + 1)
            for (u, v) in twists:
                for i, x in enumerate(kunneth_line_cohomology(m, n, u + a, v + b)):
                    acc[i] += x
            for i, x in enumerate(acc):
                if x:
                    h[(i, (a, b))] = x
    return BigradedTable(m, n, window, h)


def is_zero_regular_linesum(m: int, n: int, twists) -> bool:
    """The bigraded zero-regularity predicate for a sum of O(u, v).

    Checks exactly the quantified vanishing set: h^i(F(j1, j2)) = 0 for all
    i >= 1 with j1 + j2 = -i, -m <= j1 <= 0, -n <= j2 <= 0.
    """
    for j1 in range(-m, 1):
        for j2 in range(-n, 1):
            i = -(j1 + j2)
            if i < 1:
                continue
            for (u, v) in twists:
                if kunneth_line_cohomology(m, n, u + j1, v + j2)[i]:
                    return False
    return True


def check_splitting_conditions(n: int, twists, window_bound: int = 6) -> bool:
    """Band vanishing on P^n x P^n for a sum of line bundles O(u, v).

    Verifies h^i(E(l1, l2)) = 0 for i != n inside the band |l1 - l2| <= n and
    h^n(E(l, l)) = 0 on the diagonal, over twists bounded by window_bound.
    Inputs violating the band constraint |u - v| <= n are rejected.
    """
    for (u, v) in twists:
        if abs(u - v) > n:
            raise BandViolation(f"twist ({u}, {v}) violates |u - v| <= {n}")
    spread = window_bound + max(abs(u) + abs(v) for (u, v) in twists)
    for l1 in range(-spread, spread + 1):
        for l2 in range(-spread, spread + 1):
            if abs(l1 - l2) > n:
                continue
            for (u, v) in twists:
                h = kunneth_line_cohomology(n, n, u + l1, v + l2)
                for i in range(1, 2 * n):
                    if i != n and h[i]:
                        return False
                if l1 == l2 and h[n]:
                    return False
    return True
