"""Exact arithmetic over GF(p) and homogeneous polynomial slices.

Matrices over GF(p) are plain ``numpy`` ``int64`` arrays with entries reduced
into ``[0, p)``; all elimination is dense. Trailing-block updates go through
float64 BLAS matmuls, which are exact as long as the inner dimension times
(p-1)^2 stays below 2^53 (asserted).

Monomials are exponent tuples. The monomial order is graded lexicographic
(within one degree: descending lex on exponent vectors) and is fixed globally
so every slice matrix is reproducible bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import ParseError

Matrix = np.ndarray

_PANEL = 48
_F64_EXACT = 2**53


def binom(a: int, b: int) -> int:
    """Binomial coefficient with C(a, b) = 0 for a < b or b < 0."""
    if b < 0 or a < b:
        return 0
    return comb(a, b)


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PolyRing:
    """The graded polynomial ring k[x0..xn] over GF(p), k of odd characteristic."""

    p: int = 32003
    n: int = 3

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or not _is_prime(self.p):
            raise ValueError(f"modulus must be an odd prime >= 3, got {self.p}")
        if self.n < 1:
            raise ValueError("need at least two variables")

    @property
    def nvars(self) -> int:
        return self.n + 1

    def variable(self, i: int) -> "HomogPoly":
        return HomogPoly.variable(self, i)

    def variables(self) -> list["HomogPoly"]:
        return [HomogPoly.variable(self, i) for i in range(self.nvars)]

    def zero(self, degree: int = 0) -> "HomogPoly":
        return HomogPoly(self, degree, {})

    def one(self) -> "HomogPoly":
        return HomogPoly.constant(self, 1)


# ---------------------------------------------------------------------------
# monomials


@lru_cache(maxsize=None)
def monomial_basis(nvars: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All monomials of total degree d, graded-lex (descending) order."""
    if d < 0:
        return ()
    if nvars == 1:
        return ((d,),)
    out = []
    for e in range(d, -1, -1):
        for rest in monomial_basis(nvars - 1, d - e):
            out.append((e,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars: int, d: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomial_basis(nvars, d))}


def slice_dimension(nvars: int, d: int) -> int:
    return binom(d + nvars - 1, nvars - 1)


def mono_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def _mult_indices(nvars: int, d: int, mono: tuple[int, ...]) -> np.ndarray:
    """Index of basis(d)[j] * mono inside basis(d + |mono|), as an int array."""
    target = monomial_index(nvars, d + sum(mono))
    return np.array(
        [target[mono_mul(m, mono)] for m in monomial_basis(nvars, d)], dtype=np.int64
    )


# ---------------------------------------------------------------------------
# dense GF(p) linear algebra


def zeros_matrix(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.int64)


def matmul(a: Matrix, b: Matrix, p: int) -> Matrix:
    k = a.shape[1]
    if k == 0:
        return zeros_matrix(a.shape[0], b.shape[1])
    assert k * (p - 1) ** 2 < _F64_EXACT, "float64 matmul would lose exactness"
    c = np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
    return c % p


def _rref_small(a: Matrix, p: int) -> tuple[Matrix, list[int]]:
    r = (a % p).astype(np.int64)
    m, n = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        i = row + int(nz[0])
        if i != row:
            r[[row, i]] = r[[i, row]]
        inv = pow(int(r[row, col]), p - 2, p)
        r[row] = (r[row] * inv) % p
        others = np.nonzero(r[:, col])[0]
        others = others[others != row]
        if others.size:
            r[others] = (r[others] - np.outer(r[others, col], r[row])) % p
        pivots.append(col)
        row += 1
    return r, pivots


def rref(a: Matrix, p: int) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over GF(p); returns (R, pivot columns).

    Pivot k sits in row k of R. Column panels are eliminated with the classic
    per-pivot loop, then each panel's accumulated row transform is replayed on
    the trailing columns with one exact float64 matmul.
    """
    a = np.asarray(a, dtype=np.int64)
    m, n = a.shape
    if m == 0 or n == 0 or n <= 2 * _PANEL or m <= _PANEL:
        return _rref_small(a, p)

    r = (a % p).copy()
    pivots: list[int] = []
    row = 0
    c0 = 0
    while c0 < n and row < m:
        c1 = min(c0 + _PANEL, n)
        u = r[:, c0:c1].copy()
        u0 = u.copy()
        local_pivots: list[tuple[int, int]] = []  # (row, local col)
        prow = row
        for lc in range(c1 - c0):
            if prow == m:
                break
            nz = np.nonzero(u[prow:, lc])[0]
            if nz.size == 0:
                continue
            i = prow + int(nz[0])
            if i != prow:
                u[[prow, i]] = u[[i, prow]]
                u0[[prow, i]] = u0[[i, prow]]
                r[[prow, i]] = r[[i, prow]]
            inv = pow(int(u[prow, lc]), p - 2, p)
            u[prow] = (u[prow] * inv) % p
            others = np.nonzero(u[:, lc])[0]
            others = others[others != prow]
            if others.size:
                u[others] = (u[others] - np.outer(u[others, lc], u[prow])) % p
            local_pivots.append((prow, lc))
            prow += 1
        r[:, c0:c1] = u
        k = len(local_pivots)
        if k and c1 < n:
            prows = [pr for pr, _ in local_pivots]
            pcols = [lc for _, lc in local_pivots]
            # u = (I + C·S)·u0 with S selecting the pivot rows, so C solves
            # C · u0[prows][:, pcols] = units - u0[:, pcols]
            block = u0[np.ix_(prows, pcols)]
            binv = _inv_small(block, p)
            units = zeros_matrix(m, k)
            for t, pr in enumerate(prows):
                units[pr, t] = 1
            cmat = matmul((units - u0[:, pcols]) % p, binv, p)
            trail = r[:, c1:]
            update = np.rint(
                cmat.astype(np.float64) @ trail[prows, :].astype(np.float64)
            ).astype(np.int64)
            r[:, c1:] = (trail + update) % p
        pivots.extend(c0 + lc for _, lc in local_pivots)
        row = prow
        c0 = c1
    return r, pivots


def _inv_small(a: Matrix, p: int) -> Matrix:
    k = a.shape[0]
    r, piv = _rref_small(np.hstack([a, np.eye(k, dtype=np.int64)]), p)
    assert piv == list(range(k)), "panel pivot block must be invertible"
    return r[:, k:]


def rank(a: Matrix, p: int) -> int:
    return len(rref(a, p)[1])


def kernel_basis(a: Matrix, p: int) -> Matrix:
    """Columns form a basis of the right kernel, ordered by free column index."""
    a = np.asarray(a, dtype=np.int64)
    m, n = a.shape
    r, piv = rref(a, p)
    free = [j for j in range(n) if j not in set(piv)]
    out = zeros_matrix(n, len(free))
    for t, f in enumerate(free):
        out[f, t] = 1
        for k, c in enumerate(piv):
            out[c, t] = (-int(r[k, f])) % p
    return out


def solve(a: Matrix, b: np.ndarray, p: int) -> np.ndarray | None:
    """Some x with a·x = b, or None when the system is inconsistent."""
    x = solve_matrix(a, b.reshape(-1, 1), p)
    return None if x is None else x[:, 0]


def solve_matrix(a: Matrix, b: Matrix, p: int) -> Matrix | None:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64) % p
    m, n = a.shape
    r, piv = rref(np.hstack([a, b]), p)
    if any(c >= n for c in piv):
        return None
    x = zeros_matrix(n, b.shape[1])
    for k, c in enumerate(piv):
        x[c] = r[k, n:]
    return x


def invert(a: Matrix, p: int) -> Matrix | None:
    k = a.shape[0]
    x = solve_matrix(a, np.eye(k, dtype=np.int64), p)
    if x is None or rank(a, p) < k:
        return None
    return x


def random_matrix(rng, rows: int, cols: int, p: int) -> Matrix:
    return np.array(
        [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)], dtype=np.int64
    )


def random_invertible(rng, k: int, p: int) -> Matrix:
    while True:
        a = random_matrix(rng, k, k, p)
        if rank(a, p) == k:
            return a


# ---------------------------------------------------------------------------
# homogeneous polynomials


class HomogPoly:
    """A homogeneous polynomial with GF(p) coefficients.

    The zero polynomial is allowed to carry any nominal degree (including a
    negative one) so that graded map entries always know their slot degree.
    """

    __slots__ = ("ring", "degree", "coeffs")

    def __init__(self, ring: PolyRing, degree: int, coeffs: dict | None = None):
        self.ring = ring
        self.degree = degree
        clean: dict[tuple[int, ...], int] = {}
        if coeffs:
            for mono, c in coeffs.items():
                c %= ring.p
                if c == 0:
                    continue
                if len(mono) != ring.nvars or sum(mono) != degree:
                    raise ValueError(f"monomial {mono} is not of degree {degree}")
                clean[mono] = c
        self.coeffs = clean

    @staticmethod
    def constant(ring: PolyRing, c: int) -> "HomogPoly":
        return HomogPoly(ring, 0, {(0,) * ring.nvars: c})

    @staticmethod
    def variable(ring: PolyRing, i: int) -> "HomogPoly":
        e = [0] * ring.nvars
        e[i] = 1
        return HomogPoly(ring, 1, {tuple(e): 1})

    @staticmethod
    def linear(ring: PolyRing, coefficients) -> "HomogPoly":
        """Linear form sum_i coefficients[i]*x_i."""
        coeffs = {}
        for i, c in enumerate(coefficients):
            e = [0] * ring.nvars
            e[i] = 1
            coeffs[tuple(e)] = int(c)
        return HomogPoly(ring, 1, coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_value(self) -> int:
        """The scalar when degree 0, else 0."""
        if self.degree != 0:
            return 0
        return self.coeffs.get((0,) * self.ring.nvars, 0)

    def linear_coefficients(self) -> np.ndarray:
        assert self.degree == 1
        out = np.zeros(self.ring.nvars, dtype=np.int64)
        for mono, c in self.coeffs.items():
            out[mono.index(1)] = c
        return out

    def __add__(self, other: "HomogPoly") -> "HomogPoly":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        assert self.degree == other.degree, "can only add equal degrees"
        coeffs = dict(self.coeffs)
        for m, c in other.coeffs.items():
            coeffs[m] = (coeffs.get(m, 0) + c) % self.ring.p
        return HomogPoly(self.ring, self.degree, coeffs)

    def __neg__(self) -> "HomogPoly":
        return HomogPoly(
            self.ring, self.degree, {m: -c for m, c in self.coeffs.items()}
        )

    def __sub__(self, other: "HomogPoly") -> "HomogPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return HomogPoly(
                self.ring, self.degree, {m: c * other for m, c in self.coeffs.items()}
            )
        coeffs: dict[tuple[int, ...], int] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = mono_mul(m1, m2)
                coeffs[m] = (coeffs.get(m, 0) + c1 * c2) % self.ring.p
        return HomogPoly(self.ring, self.degree + other.degree, coeffs)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogPoly) or self.ring != other.ring:
            return NotImplemented if not isinstance(other, HomogPoly) else False
        if self.coeffs != other.coeffs:
            return False
        return not self.coeffs or self.degree == other.degree

    def __hash__(self):
        return hash((self.ring, frozenset(self.coeffs.items())))

    def substitute_linear(self, c: Matrix) -> "HomogPoly":
        """Apply x_i -> sum_j c[i][j]·x_j."""
        ring = self.ring
        forms = [HomogPoly.linear(ring, c[i]) for i in range(ring.nvars)]
        out = HomogPoly(ring, self.degree, {})
        for mono, coef in self.coeffs.items():
            term = HomogPoly.constant(ring, coef)
            for i, e in enumerate(mono):
                for _ in range(e):
                    term = term * forms[i]
            out = out + term
        return out

    def mult_slice(self, d: int) -> Matrix:
        """Matrix of multiplication S_d -> S_{d+deg} on the monomial bases."""
        nv = self.ring.nvars
        rows = slice_dimension(nv, d + self.degree)
        cols = slice_dimension(nv, d)
        out = zeros_matrix(rows, cols)
        if cols == 0 or rows == 0:
            return out
        col_idx = np.arange(cols)
        for mono, c in self.coeffs.items():
            out[_mult_indices(nv, d, mono), col_idx] += c
        return out % self.ring.p

    def __repr__(self):
        return f"HomogPoly({poly_str(self)!r})"


# ---------------------------------------------------------------------------
# the polynomial text grammar shared by all file formats


_TOKEN_RE = re.compile(r"(\d+|x\d+|\^|\*|\+|\-)|(\S)")


def parse_poly(ring: PolyRing, text: str, degree: int | None = None) -> HomogPoly:
    """Parse `2*x0^2*x3 - x1*x2^2` style text; whitespace insignificant."""
    tokens: list[str] = []
    for good, bad in _TOKEN_RE.findall(text):
        if bad:
            raise ParseError(f"unexpected character {bad!r} in polynomial {text!r}")
        tokens.append(good)
    terms: dict[tuple[int, ...], int] = {}
    degrees: set[int] = set()
    i = 0
    while i < len(tokens):
        sign = 1
        if tokens[i] in "+-":
            sign = 1 if tokens[i] == "+" else -1
            i += 1
        if i >= len(tokens) or tokens[i] in "+-":
            raise ParseError(f"empty term in {text!r}")
        coef = sign
        expo = [0] * ring.nvars
        while i < len(tokens) and tokens[i] not in "+-":
            tok = tokens[i]
            if tok == "*":
                i += 1
                continue
            if tok.isdigit():
                coef *= int(tok)
                i += 1
            elif tok.startswith("x"):
                vi = int(tok[1:])
                if vi >= ring.nvars:
                    raise ParseError(f"variable {tok} out of range in {text!r}")
                e = 1
                if i + 1 < len(tokens) and tokens[i + 1] == "^":
                    if i + 2 >= len(tokens) or not tokens[i + 2].isdigit():
                        raise ParseError(f"malformed exponent in {text!r}")
                    e = int(tokens[i + 2])
                    i += 2
                expo[vi] += e
                i += 1
            else:
                raise ParseError(f"unexpected token {tok!r} in {text!r}")
        mono = tuple(expo)
        terms[mono] = (terms.get(mono, 0) + coef) % ring.p
        degrees.add(sum(mono))

    if len(degrees) > 1:
        raise ParseError(f"polynomial {text!r} is not homogeneous")
    terms = {m: c for m, c in terms.items() if c}
    deg = degrees.pop() if degrees else (degree if degree is not None else 0)
    if degree is not None and terms and degree != deg:
        raise ParseError(f"expected degree {degree}, parsed degree {deg} in {text!r}")
    if not terms:
        return HomogPoly(ring, degree if degree is not None else deg, {})
    return HomogPoly(ring, deg, terms)


def poly_str(f: HomogPoly) -> str:
    """Canonical text form; round-trips exactly through parse_poly."""
    if f.is_zero():
        return "0"
    p = f.ring.p
    parts: list[str] = []
    order = monomial_index(f.ring.nvars, f.degree)
    for mono in sorted(f.coeffs, key=order.__getitem__):
        c = f.coeffs[mono]
        signed = c if c <= p // 2 else c - p
        sign = "-" if signed < 0 else "+"
        mag = abs(signed)
        factors = []
        for i, e in enumerate(mono):
            if e == 1:
                factors.append(f"x{i}")
            elif e > 1:
                factors.append(f"x{i}^{e}")
        if not factors or mag != 1:
            factors.insert(0, str(mag))
        term = "*".join(factors)
        if not parts:
            parts.append(term if sign == "+" else f"-{term}")
        else:
            parts.append(f" {sign} {term}")
    return "".join(parts)
