"""Constructors for the fixture modules: line sums, differential-form syzygy
modules, null-correlation bundles, skew-map cokernels, and the worked
examples. Every constructor returns the module of twisted global sections as
a PresentedModule, built so that taking global sections of the defining
sequence stays exact (the relevant first cohomology of the kernel vanishes).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .algebra import HomogPoly, Matrix, PolyRing, matmul, rank, rref, zeros_matrix
from .errors import BadIdeal, EvenN, WrongRank
from .modules import (
    GradedFreeModule,
    GradedMap,
    PresentedModule,
    betti_table,
    cokernel_module,
    direct_sum,
    hilbert_polynomial,
    hp_degree,
    koszul_syzygy_module,
    minimal_free_resolution,
    prune_map,
    sheaf_rank,
    twist_module,
)


def free_module(ring: PolyRing, degrees, name=None) -> PresentedModule:
    return PresentedModule(
        GradedMap.zero(GradedFreeModule(ring, ()), GradedFreeModule(ring, tuple(degrees))),
        name=name,
    )


def line_sum_module(ring: PolyRing, twists, name=None) -> PresentedModule:
    """Module of a direct sum of line bundles O(t): generators in degrees -t."""
    return free_module(ring, tuple(-t for t in twists), name=name)


def omega_module(ring: PolyRing, p: int, ell: int = 0) -> PresentedModule:
    """The p-th Koszul syzygy module twisted by ell (sheaf side: (p-1)-forms).

    For p = 1 the sections module of the structure sheaf is substituted, since
    the sheafification of the first syzygy module is the structure sheaf.
    """
    assert 1 <= p <= ring.nvars
    if p == 1:
        return free_module(ring, (-ell,), name=f"O({ell})")
    m = koszul_syzygy_module(ring, p)
    out = twist_module(m, ell) if ell else m
    out.name = f"E_{p}({ell})"
    return out


# ---------------------------------------------------------------------------
# skew-matrix sections of the twisted cotangent sheaf


def _check_skew(a: Matrix, p: int):
    a = np.asarray(a, dtype=np.int64) % p
    if a.shape[0] != a.shape[1] or np.any((a + a.T) % p) or np.any(a.diagonal()):
        raise WrongRank("matrix must be skew-symmetric with zero diagonal")
    return a


def _skew_section_column(ring: PolyRing, a: Matrix) -> list[HomogPoly]:
    """The element of E_2 with Koszul coordinates -a_{st}, i.e. the section
    A·x of the twisted cotangent sheaf."""
    pairs = [(s, t) for s in range(ring.nvars) for t in range(s + 1, ring.nvars)]
    out = []
    for s, t in pairs:
        c = (-int(a[s, t])) % ring.p
        out.append(
            HomogPoly.constant(ring, c) if c else HomogPoly(ring, 0, {})
        )
    return out


def null_correlation_module(ring: PolyRing, a: Matrix) -> PresentedModule:
    """Sections of the dual null-correlation bundle cut out by a full-rank
    skew matrix: the cokernel of the matrix section inside E_2(1)."""
    if ring.n % 2 == 0:
        raise EvenN("null-correlation bundles need odd projective dimension")
    a = _check_skew(a, ring.p)
    if rank(a, ring.p) != ring.nvars:
        raise WrongRank("the defining skew matrix must have full rank")
    e2 = twist_module(koszul_syzygy_module(ring, 2), 1)
    f = GradedMap.from_columns(e2.f0, [(1, _skew_section_column(ring, a))])
    out = cokernel_module(f, e2)
    out.name = "nc"
    return out


def _ideal_gens_from_skew(ring: PolyRing, a: Matrix) -> list[HomogPoly]:
    """Independent linear forms spanning the components of A·x."""
    rows, piv = rref(a % ring.p, ring.p)
    return [HomogPoly.linear(ring, rows[k]) for k in range(len(piv))]


def _is_irrelevant_primary(ring: PolyRing, gens: list[HomogPoly]) -> bool:
    tgt = GradedFreeModule(ring, (0,))
    cols = [(g.degree, [g]) for g in gens]
    quot = PresentedModule(GradedMap.from_columns(tgt, cols))
    return hp_degree(hilbert_polynomial(quot.resolution())) == -1


def _is_minimally_generated(ring: PolyRing, gens: list[HomogPoly]) -> bool:
    from .algebra import solve
    from .modules import polyvec_slice

    tgt = GradedFreeModule(ring, (0,))
    for k, g in enumerate(gens):
        others = [(h.degree, [h]) for i, h in enumerate(gens) if i != k]
        phi = GradedMap.from_columns(tgt, others)
        vec = polyvec_slice(tgt, [g], g.degree)
        if solve(phi.slice(g.degree), vec[:, 0], ring.p) is not None:
            return False
    return True


def cokernel_bundle(
    ring: PolyRing, a: Matrix, extra_forms: list[HomogPoly]
) -> PresentedModule:
    """Module of the dual bundle presented by a rank-2m skew map plus forms.

    The section A·x of the twisted cotangent sheaf and the extra forms make up
    an injective map from O(-1); the combined ideal must be irrelevant-primary
    and minimally generated, otherwise the cokernel is not locally free.
    """
    a = _check_skew(a, ring.p)
    if rank(a, ring.p) == 0:
        raise WrongRank("the skew part must be nonzero")
    gens = _ideal_gens_from_skew(ring, a) + list(extra_forms)
    if not _is_irrelevant_primary(ring, gens):
        raise BadIdeal("the defining forms have a common zero")
    if not _is_minimally_generated(ring, gens):
        raise BadIdeal("the defining forms are not minimal generators")
    e2 = twist_module(koszul_syzygy_module(ring, 2), 1)
    extra_degrees = tuple(1 - f.degree for f in extra_forms)
    tgt = GradedFreeModule(ring, e2.f0.degrees + extra_degrees)
    col = _skew_section_column(ring, a) + list(extra_forms)
    f = GradedMap.from_columns(tgt, [(1, col)])
    amb = PresentedModule(
        GradedMap(
            GradedFreeModule(ring, e2.presentation.source.degrees),
            tgt,
            [
                list(e2.presentation.entries[i])
                if i < e2.f0.rank
                else [
                    HomogPoly(ring, d - tgt.degrees[i], {})
                    for d in e2.presentation.source.degrees
                ]
                for i in range(tgt.rank)
            ],
            check=False,
        )
    )
    return cokernel_module(f, amb)


F1_SKEW_FORM = np.array(
    [[0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 1], [-1, -1, -1, 0]], dtype=np.int64
)
F2_SKEW_FORM = np.array(
    [[0, 0, 0, 0], [0, 0, 1, 1], [0, -1, 0, 1], [0, -1, -1, 0]], dtype=np.int64
)


def pseudo_buchsbaum_bundle(
    ring: PolyRing, target_form: Matrix, extra_forms
) -> PresentedModule:
    """Rank-4 pseudo-Buchsbaum module whose snake matrix is the given rank-2
    form. The defining section matrix is the wedge complement of the target,
    since the snake pairing of a cokernel picks up the complementary indices.
    """
    from .classify import wedge_complement4

    return cokernel_bundle(
        ring, wedge_complement4(np.asarray(target_form) % ring.p, ring.p), extra_forms
    )


def example_f1(ring: PolyRing) -> PresentedModule:
    """First rank-2 fixture: snake matrix with last column (1,1,1), so the
    coordinate triple x0, x1, x2 generates a standard ideal."""
    out = pseudo_buchsbaum_bundle(
        ring, F1_SKEW_FORM, [ring.variable(2), ring.variable(3)]
    )
    out.name = "F1"
    return out


def example_f2(ring: PolyRing) -> PresentedModule:
    """Second rank-2 fixture: the snake matrix kills e_0, so the restriction
    to the hyperplane x0 = 0 is Buchsbaum."""
    out = pseudo_buchsbaum_bundle(
        ring, F2_SKEW_FORM, [ring.variable(1), ring.variable(2)]
    )
    out.name = "F2"
    return out


def example_rank5(ring: PolyRing) -> PresentedModule:
    """Rank-5 quasi-Buchsbaum bundle: cokernel of two disjoint-plane sections
    inside a doubled twisted cotangent module."""
    a1 = zeros_matrix(4, 4)
    a1[0, 1], a1[1, 0] = 1, ring.p - 1
    a2 = zeros_matrix(4, 4)
    a2[2, 3], a2[3, 2] = 1, ring.p - 1
    e2 = twist_module(koszul_syzygy_module(ring, 2), 2)
    both = direct_sum([e2, e2])
    col = _skew_section_column(ring, a1) + _skew_section_column(ring, a2)
    f = GradedMap.from_columns(both.f0, [(0, col)])
    out = cokernel_module(f, both)
    out.name = "rank5"
    return out


def buchsbaum_sum_module(ring: PolyRing) -> PresentedModule:
    """The normalized Buchsbaum fixture: one-form module twisted by 1 plus
    two-form module twisted by 3."""
    out = direct_sum([omega_module(ring, 2, 1), omega_module(ring, 3, 3)])
    out.name = "omega_sum"
    return out


# ---------------------------------------------------------------------------
# monomial curve fixtures over two variables


def monomial_curve_modules(p: int = 32003):
    """Section modules of the degree-3 and degree-4 monomial curves, entered
    from their explicit decompositions over k[u, v] (u, v the cubes resp.
    quartics of the parameters).

    cubic: free with generators 1, s^2 t, s t^2.
    quartic: free part (1, s^3 t, s t^3) plus the shifted irrelevant ideal
    (the summand generated by s^6 t^2 and s^2 t^6).
    """
    ring = PolyRing(p, 1)
    cubic = free_module(ring, (0, 1, 1), name="curve3")
    # m(-1) over k[u,v]: generators in degree 2 with the Koszul relation
    u, v = ring.variable(0), ring.variable(1)
    tgt = GradedFreeModule(ring, (0, 1, 1, 2, 2))
    src = GradedFreeModule(ring, (3,))
    zero = lambda d: HomogPoly(ring, d, {})
    col = [zero(3), zero(2), zero(2), v, -u]
    quartic = PresentedModule(
        GradedMap(src, tgt, [[col[i]] for i in range(5)]), name="curve4"
    )
    return cubic, quartic


# ---------------------------------------------------------------------------
# obfuscated free modules (splitting-test generators)


def obfuscated_line_sum(ring: PolyRing, twists, seed: int = 0) -> PresentedModule:
    """A presentation of a sum of line bundles with redundant generators and a
    random graded change of generators, so freeness is not visible."""
    rng = random.Random(seed)
    base = sorted(-t for t in twists)
    extra = [base[-1] + rng.randrange(0, 2) for _ in range(rng.randrange(1, 3))]
    degs = base + extra
    tgt = GradedFreeModule(ring, tuple(degs))
    cols = []
    for k, b in enumerate(extra):
        polys = []
        for i, a in enumerate(degs):
            idx = len(base) + k
            if i == idx:
                polys.append(HomogPoly.constant(ring, ring.p - 1))
            elif i < len(base) and b - a >= 0:
                polys.append(_random_poly(ring, rng, b - a))
            else:
                polys.append(HomogPoly(ring, b - a, {}))
        cols.append((b, polys))
    pres = GradedMap.from_columns(tgt, cols)
    u = _random_graded_automorphism(ring, rng, degs)
    pres = GradedMap(pres.source, tgt, matpoly_mul(u, pres.entries, ring), check=False)
    out = PresentedModule(pres)
    out.name = f"linesum{tuple(twists)}"
    return out


def _random_poly(ring: PolyRing, rng, degree: int) -> HomogPoly:
    from .algebra import monomial_basis

    coeffs = {}
    for mono in monomial_basis(ring.nvars, degree):
        if rng.random() < 0.5:
            coeffs[mono] = rng.randrange(ring.p)
    return HomogPoly(ring, degree, coeffs)


def _random_graded_automorphism(ring: PolyRing, rng, degs):
    """Block upper-triangular (by degree) invertible polynomial matrix."""
    from .algebra import random_invertible

    r = len(degs)
    ents = [[HomogPoly(ring, degs[j] - degs[i], {}) for j in range(r)] for i in range(r)]
    for value in sorted(set(degs)):
        idx = [i for i, a in enumerate(degs) if a == value]
        block = random_invertible(rng, len(idx), ring.p)
        for bi, i in enumerate(idx):
            for bj, j in enumerate(idx):
                ents[i][j] = HomogPoly.constant(ring, int(block[bi, bj]))
    for i in range(r):
        for j in range(r):
            if degs[j] > degs[i]:
                ents[i][j] = _random_poly(ring, rng, degs[j] - degs[i])
    return ents


def matpoly_mul(a_entries, b_entries, ring: PolyRing):
    rows = len(a_entries)
    mid = len(b_entries)
    cols = len(b_entries[0]) if mid else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = None
            for k in range(mid):
                x, y = a_entries[i][k], b_entries[k][j]
                if x.is_zero() or y.is_zero():
                    continue
                term = x * y
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else HomogPoly(ring, 0, {}))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# coordinate changes and fingerprints


def coordinate_change(m: PresentedModule, c: Matrix) -> PresentedModule:
    from .modules import substitute_module

    out = substitute_module(m, c)
    out.name = m.name and f"{m.name}~"
    return out


def fingerprint(m: PresentedModule, window: tuple[int, int] = (-8, 8)) -> dict:
    """(Hilbert values, minimal Betti table, cohomology table, quasi flag):
    the engine's isomorphism certificate for distinguishing modules."""
    from .classify import is_quasi_buchsbaum
    from .cohomology import sheaf_cohomology_table

    lo, hi = window
    res = m.resolution()
    table = sheaf_cohomology_table(m, window)
    return {
        "hilbert": tuple(m.hilbert_function(d) for d in range(lo, hi + 1)),
        "betti": tuple(sorted(betti_table(res).items())),
        "cohomology": tuple(tuple(row) for row in table.h),
        "quasi_buchsbaum": is_quasi_buchsbaum(m),
    }
