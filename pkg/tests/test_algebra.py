import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from syzygy_forge.algebra import (
    HomogPoly,
    PolyRing,
    binom,
    kernel_basis,
    matmul,
    monomial_basis,
    parse_poly,
    poly_str,
    rank,
    random_invertible,
    random_matrix,
    rref,
    solve,
    zeros_matrix,
)
from syzygy_forge.errors import ParseError


def reference_rref(a, p):
    """Independent classic per-pivot implementation used as the oracle."""
    r = (np.array(a) % p).astype(np.int64)
    m, n = r.shape
    piv = []
    row = 0
    for c in range(n):
        if row == m:
            break
        hits = [i for i in range(row, m) if r[i, c]]
        if not hits:
            continue
        i = hits[0]
        if i != row:
            r[[row, i]] = r[[i, row]]
        r[row] = (r[row] * pow(int(r[row, c]), p - 2, p)) % p
        for k in range(m):
            if k != row and r[k, c]:
                r[k] = (r[k] - r[k, c] * r[row]) % p
        piv.append(c)
        row += 1
    return r, piv


class TestLinearAlgebra:
    def test_rank_identity(self):
        assert rank(np.eye(3, dtype=np.int64), 7) == 3

    def test_rank_zero_matrix(self):
        assert rank(zeros_matrix(2, 3), 7) == 0

    def test_rank_first_reference_form(self):
        a = np.array(
            [[0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 1], [-1, -1, -1, 0]],
            dtype=np.int64,
        )
        assert rank(a % 32003, 32003) == 2

    def test_kernel_of_zero_map(self):
        k = kernel_basis(zeros_matrix(2, 3), 5)
        assert k.shape == (3, 3)

    def test_kernel_of_identity(self):
        assert kernel_basis(np.eye(3, dtype=np.int64), 5).shape[1] == 0

    def test_kernel_annihilates(self):
        rng = random.Random(0)
        a = random_matrix(rng, 5, 8, 101)
        k = kernel_basis(a, 101)
        assert k.shape[1] == 8 - rank(a, 101)
        assert not np.any(matmul(a, k, 101))

    def test_solve_identity(self):
        b = np.array([3, 1, 4], dtype=np.int64)
        x = solve(np.eye(3, dtype=np.int64), b, 7)
        assert np.array_equal(x, b % 7)

    def test_solve_inconsistent(self):
        assert solve(zeros_matrix(2, 2), np.array([1, 0]), 7) is None

    def test_solve_random_consistent(self):
        rng = random.Random(1)
        a = random_matrix(rng, 7, 5, 32003)
        x0 = random_matrix(rng, 5, 1, 32003)
        b = matmul(a, x0, 32003)[:, 0]
        x = solve(a, b, 32003)
        assert x is not None
        assert np.array_equal(matmul(a, x.reshape(-1, 1), 32003)[:, 0], b)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_blocked_rref_matches_reference(self, data):
        p = data.draw(st.sampled_from([3, 7, 101, 32003]))
        m = data.draw(st.integers(1, 60))
        n = data.draw(st.integers(1, 60))
        seed = data.draw(st.integers(0, 10**6))
        rng = random.Random(seed)
        a = random_matrix(rng, m, n, p)
        if m > 2 and rng.random() < 0.5:
            a[m // 2] = (2 * a[0] + a[-1]) % p
        r1, p1 = rref(a, p)
        r2, p2 = reference_rref(a, p)
        assert p1 == p2
        assert np.array_equal(r1[: len(p1)], r2[: len(p2)])

    def test_blocked_path_large(self):
        rng = random.Random(5)
        a = random_matrix(rng, 220, 260, 32003)
        r1, p1 = rref(a, 32003)
        r2, p2 = reference_rref(a, 32003)
        assert p1 == p2 and np.array_equal(r1, r2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_rank_product_inequality(self, seed):
        rng = random.Random(seed)
        a = random_matrix(rng, 6, 5, 101)
        b = random_matrix(rng, 5, 7, 101)
        assert rank(matmul(a, b, 101), 101) <= min(rank(a, 101), rank(b, 101))

    def test_random_invertible(self):
        rng = random.Random(2)
        a = random_invertible(rng, 4, 32003)
        assert rank(a, 32003) == 4


class TestMonomials:
    def test_degree_zero(self):
        assert monomial_basis(4, 0) == ((0, 0, 0, 0),)

    def test_stars_and_bars_count(self):
        assert len(monomial_basis(4, 2)) == 10
        assert len(monomial_basis(4, 5)) == binom(5 + 3, 3)

    def test_explicit_order_two_vars(self):
        assert monomial_basis(2, 3) == ((3, 0), (2, 1), (1, 2), (0, 3))

    def test_binom_convention(self):
        assert binom(-1, 0) == 0
        assert binom(3, -1) == 0
        assert binom(2, 3) == 0
        assert binom(5, 2) == 10


class TestMultiplicationSlices:
    def test_one_gives_identity(self, ring):
        f = ring.one()
        assert np.array_equal(f.mult_slice(2), np.eye(10, dtype=np.int64))

    def test_variable_slice_two_vars(self):
        ring = PolyRing(7, 1)
        m = ring.variable(0).mult_slice(1)
        # x0, x1 -> x0^2, x0 x1 inside (x0^2, x0 x1, x1^2)
        assert m.tolist() == [[1, 0], [0, 1], [0, 0]]

    def test_linearity(self, ring):
        f = ring.variable(0) + ring.variable(1)
        expect = (ring.variable(0).mult_slice(2) + ring.variable(1).mult_slice(2)) % ring.p
        assert np.array_equal(f.mult_slice(2), expect)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_composition_law(self, seed):
        ring = PolyRing(101, 2)
        rng = random.Random(seed)

        def rand_poly(deg):
            coeffs = {m: rng.randrange(101) for m in monomial_basis(3, deg)}
            return HomogPoly(ring, deg, coeffs)

        f, g = rand_poly(rng.randrange(1, 3)), rand_poly(rng.randrange(1, 3))
        d = rng.randrange(0, 3)
        lhs = (f * g).mult_slice(d)
        rhs = matmul(f.mult_slice(d + g.degree), g.mult_slice(d), 101)
        assert np.array_equal(lhs, rhs)


class TestGrammar:
    def test_spec_example(self, ring):
        f = parse_poly(ring, "2*x0^2*x3 - x1*x2^2")
        assert f.degree == 3
        assert poly_str(f) == "2*x0^2*x3 - x1*x2^2"

    def test_whitespace_and_optional_star(self, ring):
        assert parse_poly(ring, " 2x0 + x1 ") == parse_poly(ring, "2*x0+x1")

    def test_zero(self, ring):
        assert parse_poly(ring, "0").is_zero()
        assert poly_str(ring.zero()) == "0"

    def test_rejects_inhomogeneous(self, ring):
        with pytest.raises(ParseError):
            parse_poly(ring, "x0^2 + x1")

    def test_rejects_bad_symbols(self, ring):
        with pytest.raises(ParseError):
            parse_poly(ring, "x0 + y1")

    def test_rejects_out_of_range_variable(self, ring):
        with pytest.raises(ParseError):
            parse_poly(ring, "x9")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(0, 3))
    def test_round_trip(self, seed, deg):
        ring = PolyRing(32003, 3)
        rng = random.Random(seed)
        coeffs = {
            m: rng.randrange(1, 32003)
            for m in monomial_basis(4, deg)
            if rng.random() < 0.4
        }
        f = HomogPoly(ring, deg, coeffs)
        assert parse_poly(ring, poly_str(f), degree=deg if coeffs else None) == f


class TestRing:
    def test_rejects_even_modulus(self):
        with pytest.raises(ValueError):
            PolyRing(8, 3)

    def test_rejects_characteristic_two(self):
        with pytest.raises(ValueError):
            PolyRing(2, 3)

    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            PolyRing(32001, 3)
