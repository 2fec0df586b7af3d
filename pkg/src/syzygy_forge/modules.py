"""Graded free modules, graded maps, presented modules and resolutions.

Conventions fixed here and inherited by everything downstream:

* ``S(-a)`` has its generator in degree ``a``; a free module is the tuple of
  its generator degrees.
* A graded map stores a target-rows x source-cols matrix of homogeneous
  polynomials; entry (i, j) has degree ``source_deg(j) - target_deg(i)``.
* ``FreeResolution.maps[k]`` is the differential F_{k+1} -> F_k, so
  ``maps[0]`` presents the resolved module.
* All kernel and exactness computations run over finite degree windows; a
  window is certified by checking that no new kernel generators appear in the
  two degrees past its top, else ``BoundTooSmall`` is raised.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import (
    HomogPoly,
    Matrix,
    PolyRing,
    binom,
    kernel_basis,
    matmul,
    monomial_basis,
    parse_poly,
    poly_str,
    rank,
    rref,
    slice_dimension,
    solve,
    zeros_matrix,
)
from .errors import BoundTooSmall, NotAModuleMap, ParseError


@dataclass(frozen=True)
class GradedFreeModule:
    ring: PolyRing
    degrees: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def slice_dim(self, d: int) -> int:
        nv = self.ring.nvars
        return sum(slice_dimension(nv, d - a) for a in self.degrees)

    def offsets(self, d: int) -> list[int]:
        nv = self.ring.nvars
        out = []
        acc = 0
        for a in self.degrees:
            out.append(acc)
            acc += slice_dimension(nv, d - a)
        return out

    def twist(self, ell: int) -> "GradedFreeModule":
        return GradedFreeModule(self.ring, tuple(a - ell for a in self.degrees))

    def basis_column(self, i: int) -> list[HomogPoly]:
        col = [self.ring.zero(0) for _ in range(self.rank)]
        col[i] = self.ring.one()
        return col


def free_mult_slice(f: GradedFreeModule, g: HomogPoly, d: int) -> Matrix:
    """Multiplication by g on the degree-d slice of a free module."""
    rows = f.slice_dim(d + g.degree)
    cols = f.slice_dim(d)
    out = zeros_matrix(rows, cols)
    roff = f.offsets(d + g.degree)
    coff = f.offsets(d)
    nv = f.ring.nvars
    for i, a in enumerate(f.degrees):
        if d - a < 0:
            continue
        block = g.mult_slice(d - a)
        out[
            roff[i] : roff[i] + block.shape[0], coff[i] : coff[i] + slice_dimension(nv, d - a)
        ] = block
    return out


class GradedMap:
    """A degree-0 map of graded free modules given by a polynomial matrix."""

    def __init__(
        self,
        source: GradedFreeModule,
        target: GradedFreeModule,
        entries,
        check: bool = True,
    ):
        self.source = source
        self.target = target
        self.ring = source.ring
        ents: list[tuple[HomogPoly, ...]] = []
        for i in range(target.rank):
            row = []
            for j in range(source.rank):
                e = entries[i][j]
                want = source.degrees[j] - target.degrees[i]
                if check:
                    if e.is_zero():
                        e = HomogPoly(self.ring, want, {})
                    elif e.degree != want:
                        raise ValueError(
                            f"entry ({i},{j}) has degree {e.degree}, expected {want}"
                        )
                row.append(e)
            ents.append(tuple(row))
        self.entries = tuple(ents)
        self._slices: dict[int, Matrix] = {}

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def zero(source: GradedFreeModule, target: GradedFreeModule) -> "GradedMap":
        ring = source.ring
        return GradedMap(
            source,
            target,
            [
                [HomogPoly(ring, source.degrees[j] - target.degrees[i], {}) for j in range(source.rank)]
                for i in range(target.rank)
            ],
            check=False,
        )

    @staticmethod
    def identity(f: GradedFreeModule) -> "GradedMap":
        ring = f.ring
        ents = [
            [
                HomogPoly.constant(ring, 1) if i == j else HomogPoly(ring, 0, {})
                for j in range(f.rank)
            ]
            for i in range(f.rank)
        ]
        return GradedMap(f, f, ents, check=False)

    @staticmethod
    def multiplication(f: GradedFreeModule, g: HomogPoly) -> "GradedMap":
        """g·id as a map f(-deg g) -> f."""
        src = f.twist(-g.degree)
        ents = [
            [g if i == j else HomogPoly(f.ring, g.degree, {}) for j in range(f.rank)]
            for i in range(f.rank)
        ]
        return GradedMap(src, f, ents, check=False)

    @staticmethod
    def from_columns(target: GradedFreeModule, columns) -> "GradedMap":
        """Map out of a free module with one generator per (degree, polys) column."""
        degs = tuple(d for d, _ in columns)
        source = GradedFreeModule(target.ring, degs)
        ents = [
            [columns[j][1][i] for j in range(len(columns))] for i in range(target.rank)
        ]
        return GradedMap(source, target, ents)

    # -- structure ------------------------------------------------------------

    def column(self, j: int) -> list[HomogPoly]:
        return [self.entries[i][j] for i in range(self.target.rank)]

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def slice(self, d: int) -> Matrix:
        """The linear map (source)_d -> (target)_d on monomial bases."""
        got = self._slices.get(d)
        if got is not None:
            return got
        src, tgt = self.source, self.target
        nv = self.ring.nvars
        rows, cols = tgt.slice_dim(d), src.slice_dim(d)
        out = zeros_matrix(rows, cols)
        roff, coff = tgt.offsets(d), src.offsets(d)
        for j, aj in enumerate(src.degrees):
            if d - aj < 0:
                continue
            for i, ai in enumerate(tgt.degrees):
                e = self.entries[i][j]
                if e.is_zero() or d - ai < 0:
                    continue
                block = e.mult_slice(d - aj)
                out[
                    roff[i] : roff[i] + block.shape[0],
                    coff[j] : coff[j] + block.shape[1],
                ] += block
        out %= self.ring.p
        self._slices[d] = out
        return out

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self ∘ other."""
        assert other.target.degrees == self.source.degrees
        ring = self.ring
        ents = []
        for i in range(self.target.rank):
            row = []
            for j in range(other.source.rank):
                acc = HomogPoly(
                    ring, other.source.degrees[j] - self.target.degrees[i], {}
                )
                for k in range(self.source.rank):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            ents.append(row)
        return GradedMap(other.source, self.target, ents, check=False)

    def twist(self, ell: int) -> "GradedMap":
        return GradedMap(
            self.source.twist(ell), self.target.twist(ell), self.entries, check=False
        )

    def dual(self, w: int) -> "GradedMap":
        """Hom(-, S(-w)) applied to the map: transpose with dualized degrees."""
        src = GradedFreeModule(self.ring, tuple(w - a for a in self.target.degrees))
        tgt = GradedFreeModule(self.ring, tuple(w - a for a in self.source.degrees))
        ents = [
            [self.entries[i][j] for i in range(self.target.rank)]
            for j in range(self.source.rank)
        ]
        return GradedMap(src, tgt, ents, check=False)

    def hstack(self, other: "GradedMap") -> "GradedMap":
        """Concatenate sources over the shared target."""
        assert self.target.degrees == other.target.degrees
        src = GradedFreeModule(self.ring, self.source.degrees + other.source.degrees)
        ents = [
            list(self.entries[i]) + list(other.entries[i])
            for i in range(self.target.rank)
        ]
        return GradedMap(src, self.target, ents, check=False)

    def submatrix(self, rows: list[int], cols: list[int]) -> "GradedMap":
        src = GradedFreeModule(self.ring, tuple(self.source.degrees[j] for j in cols))
        tgt = GradedFreeModule(self.ring, tuple(self.target.degrees[i] for i in rows))
        ents = [[self.entries[i][j] for j in cols] for i in rows]
        return GradedMap(src, tgt, ents, check=False)

    def substitute_linear(self, c: Matrix) -> "GradedMap":
        ents = [
            [e.substitute_linear(c) if not e.is_zero() else e for e in row]
            for row in self.entries
        ]
        return GradedMap(self.source, self.target, ents, check=False)

    def column_slice_vector(self, j: int) -> Matrix:
        """Column j as a coordinate vector of (target)_{deg j}."""
        return polyvec_slice(self.target, self.column(j), self.source.degrees[j])

    def __repr__(self):
        return f"GradedMap({self.source.degrees} -> {self.target.degrees})"


def polyvec_slice(f: GradedFreeModule, polys, d: int) -> Matrix:
    """Coordinates of a polynomial column inside the degree-d slice of f."""
    from .algebra import monomial_index

    out = zeros_matrix(f.slice_dim(d), 1)
    off = f.offsets(d)
    nv = f.ring.nvars
    for i, a in enumerate(f.degrees):
        e = polys[i]
        if e.is_zero():
            continue
        assert e.degree == d - a
        idx = monomial_index(nv, d - a)
        for mono, c in e.coeffs.items():
            out[off[i] + idx[mono], 0] = c
    return out


def slice_vector_to_polys(
    f: GradedFreeModule, v: np.ndarray, d: int
) -> list[HomogPoly]:
    """Inverse of polyvec_slice for a single slice vector."""
    ring = f.ring
    nv = ring.nvars
    off = f.offsets(d)
    out = []
    for i, a in enumerate(f.degrees):
        di = d - a
        if di < 0:
            out.append(HomogPoly(ring, di, {}))
            continue
        basis = monomial_basis(nv, di)
        coeffs = {
            mono: int(v[off[i] + t]) for t, mono in enumerate(basis) if v[off[i] + t]
        }
        out.append(HomogPoly(ring, di, coeffs))
    return out


# ---------------------------------------------------------------------------
# presented modules


class PresentedModule:
    """A graded module presented as the cokernel of a graded map."""

    def __init__(self, presentation: GradedMap, name: str | None = None):
        self.presentation = presentation
        self.ring = presentation.ring
        self.name = name
        self._cache: dict = {}

    @property
    def f0(self) -> GradedFreeModule:
        return self.presentation.target

    def hilbert_function(self, d: int) -> int:
        got = self._cache.setdefault("hilbert", {})
        if d not in got:
            got[d] = self.f0.slice_dim(d) - rank(
                self.presentation.slice(d), self.ring.p
            )
        return got[d]

    def minimal_presentation(self) -> GradedMap:
        if "minpres" not in self._cache:
            self._cache["minpres"] = prune_map(self.presentation)
        return self._cache["minpres"]

    def min_gen_degrees(self) -> tuple[int, ...]:
        return self.minimal_presentation().target.degrees

    def is_zero_module(self) -> bool:
        return self.minimal_presentation().target.rank == 0

    def resolution(self, degree_bound: int | None = None) -> "FreeResolution":
        if "resolution" not in self._cache:
            self._cache["resolution"] = minimal_free_resolution(
                self, degree_bound=degree_bound
            )
        return self._cache["resolution"]

    def __repr__(self):
        tag = self.name or "module"
        return f"PresentedModule({tag}, gens={self.f0.degrees})"


def twist_module(m: PresentedModule, ell: int) -> PresentedModule:
    out = PresentedModule(m.presentation.twist(ell), name=m.name and f"{m.name}({ell})")
    res = m._cache.get("resolution")
    if res is not None:
        out._cache["resolution"] = res.twist(ell)
    if "minpres" in m._cache:
        out._cache["minpres"] = m._cache["minpres"].twist(ell)
    return out


def direct_sum(ms: list[PresentedModule]) -> PresentedModule:
    ring = ms[0].ring
    tgt = GradedFreeModule(ring, sum((m.f0.degrees for m in ms), ()))
    src = GradedFreeModule(
        ring, sum((m.presentation.source.degrees for m in ms), ())
    )
    ents = [
        [
            HomogPoly(ring, src.degrees[j] - tgt.degrees[i], {})
            for j in range(src.rank)
        ]
        for i in range(tgt.rank)
    ]
    ro = co = 0
    for m in ms:
        pres = m.presentation
        for i in range(pres.target.rank):
            for j in range(pres.source.rank):
                ents[ro + i][co + j] = pres.entries[i][j]
        ro += pres.target.rank
        co += pres.source.rank
    return PresentedModule(GradedMap(src, tgt, ents, check=False))


def quotient_by_linear(m: PresentedModule, ys) -> PresentedModule:
    """M/(y_1,..,y_j)M; appends y·(each generator) columns to the presentation."""
    pres = m.presentation
    for y in ys:
        assert y.degree == 1, "quotient_by_linear takes linear forms"
        pres = pres.hstack(GradedMap.multiplication(pres.target, y))
    return PresentedModule(pres)


def cokernel_module(f: GradedMap, q: PresentedModule) -> PresentedModule:
    """Cokernel of a map from a free module into q (f hits q's generators)."""
    assert f.target.degrees == q.f0.degrees
    return PresentedModule(f.hstack(q.presentation))


def substitute_module(m: PresentedModule, c: Matrix) -> PresentedModule:
    """The module after the linear coordinate change x_i -> sum_j c[i][j] x_j."""
    return PresentedModule(m.presentation.substitute_linear(c))


# ---------------------------------------------------------------------------
# syzygies


def _span_complement(kern: Matrix, span: Matrix, p: int) -> Matrix:
    """Canonical columns extending col-span(span) to col-span(span)+col-span(kern).

    Vectors are reduced against the old span and re-echelonized, so the chosen
    representatives are reproducible.
    """
    if kern.shape[1] == 0:
        return kern
    if span.shape[1] == 0:
        red = kern.T
    else:
        rs, piv = rref(span.T, p)
        rs = rs[: len(piv)]
        red = (kern.T - matmul(kern.T[:, piv], rs, p)) % p
    rk, pivk = rref(red, p)
    return rk[: len(pivk)].T


def syzygy(
    phi: GradedMap, degree_bound: int | None = None, certify: bool = True
) -> GradedMap:
    """A graded map whose image is ker(phi), with minimal generators.

    Generators are found degree by degree: the new generators in degree d are
    canonical representatives of the kernel slice modulo the span of earlier
    generators. With ``certify`` the degree past the window is checked to
    carry no new generators, else BoundTooSmall; resolution building skips
    this in favour of the cheaper Hilbert-function double check.
    """
    ring = phi.ring
    p = ring.p
    f1 = phi.source
    if f1.rank == 0:
        return GradedMap.zero(GradedFreeModule(ring, ()), f1)
    lo = min(f1.degrees)
    hi = degree_bound if degree_bound is not None else max(f1.degrees) + ring.n + 3
    columns: list[tuple[int, list[HomogPoly]]] = []
    genmap: GradedMap | None = None

    for d in range(lo, hi + 1):
        kern = kernel_basis(phi.slice(d), p)
        if kern.shape[1] == 0:
            continue
        span = (
            genmap.slice(d) if genmap is not None else zeros_matrix(kern.shape[0], 0)
        )
        new = _span_complement(kern, span, p)
        if new.shape[1] == 0:
            continue
        for t in range(new.shape[1]):
            columns.append((d, slice_vector_to_polys(f1, new[:, t], d)))
        genmap = GradedMap.from_columns(f1, columns)
    if certify:
        d = hi + 1
        ker_dim = f1.slice_dim(d) - rank(phi.slice(d), p)
        span_rank = 0 if genmap is None else rank(genmap.slice(d), p)
        if span_rank != ker_dim:
            raise BoundTooSmall(
                f"kernel generators of {phi!r} still appear past degree {hi}"
            )
    if not columns:
        return GradedMap.zero(GradedFreeModule(ring, ()), f1)
    return genmap


def _syzygy_retry(
    phi: GradedMap, degree_bound: int | None, retries: int = 3, certify: bool = True
):
    bound = degree_bound
    for attempt in range(retries + 1):
        try:
            return syzygy(phi, bound, certify=certify)
        except BoundTooSmall:
            if attempt == retries:
                raise
            base = bound if bound is not None else max(phi.source.degrees) + phi.ring.n + 3
            bound = base + 4


# ---------------------------------------------------------------------------
# resolutions


@dataclass
class FreeResolution:
    """F_L -> ... -> F_1 -> F_0 with maps[k]: F_{k+1} -> F_k."""

    f0: GradedFreeModule
    maps: list[GradedMap]
    minimal: bool = False
    complete: bool = True
    target: PresentedModule | None = None

    @property
    def length(self) -> int:
        return len(self.maps)

    def module(self, k: int) -> GradedFreeModule:
        if k == 0:
            return self.f0
        if k <= len(self.maps):
            return self.maps[k - 1].source
        return GradedFreeModule(self.f0.ring, ())

    def twist(self, ell: int) -> "FreeResolution":
        return FreeResolution(
            self.f0.twist(ell),
            [m.twist(ell) for m in self.maps],
            minimal=self.minimal,
            complete=self.complete,
        )

    def verify_window(self, lo: int, hi: int) -> bool:
        """Slice composites vanish and interior positions are exact."""
        p = self.f0.ring.p
        for d in range(lo, hi + 1):
            for k in range(len(self.maps) - 1):
                a, b = self.maps[k], self.maps[k + 1]
                if b.source.slice_dim(d) and np.any(
                    matmul(a.slice(d), b.slice(d), p)
                ):
                    return False
                kdim = a.source.slice_dim(d) - rank(a.slice(d), p)
                if kdim != rank(b.slice(d), p):
                    return False
        return True


def minimal_free_resolution(
    m: PresentedModule,
    length_bound: int | None = None,
    degree_bound: int | None = None,
) -> FreeResolution:
    """Iterated syzygies on the pruned presentation.

    Stops when the kernel vanishes; Hilbert's syzygy theorem caps the length
    at n+1, which is enforced as a hard assertion. The resulting Hilbert
    function is double-checked against the input presentation in two degrees
    past the window.
    """
    ring = m.ring
    pres = m.minimal_presentation()

    def build(bound: int) -> FreeResolution:
        maps: list[GradedMap] = []
        if pres.source.rank > 0:
            maps.append(pres)
            while maps[-1].source.rank > 0:
                if length_bound is not None and len(maps) >= length_bound:
                    return FreeResolution(
                        pres.target, maps, minimal=True, complete=False, target=m
                    )
                nxt = syzygy(maps[-1], bound, certify=False)
                if nxt.source.rank == 0:
                    break
                maps.append(nxt)
                assert len(maps) <= ring.n + 1, "resolution longer than Hilbert bound"
        res = FreeResolution(pres.target, maps, minimal=True, complete=True, target=m)
        if res.complete:
            top = max(
                (a for k in range(res.length + 1) for a in res.module(k).degrees),
                default=0,
            )
            for d in (top + 1, top + 2):
                alt = sum(
                    (-1) ** k * res.module(k).slice_dim(d)
                    for k in range(res.length + 1)
                )
                if alt != m.hilbert_function(d):
                    raise BoundTooSmall(
                        f"resolution Hilbert mismatch at degree {d}"
                    )
        return res

    degs = pres.target.degrees + pres.source.degrees
    base = (max(degs) if degs else 0) + ring.n + 3
    if degree_bound is not None:
        return build(degree_bound)
    for attempt in range(4):
        try:
            return build(base + 4 * attempt)
        except BoundTooSmall:
            if attempt == 3:
                raise


# ---------------------------------------------------------------------------
# minimality pruning


def _eliminate_constant(entries, degs_t, degs_s, i, j, p, ring):
    """Pivot out a nonzero constant entry (i, j): classic cancellation."""
    c = entries[i][j].constant_value()
    cinv = pow(c, p - 2, p)
    rows = len(degs_t)
    cols = len(degs_s)
    new_entries = []
    for r in range(rows):
        if r == i:
            continue
        row = []
        erj = entries[r][j]
        for s in range(cols):
            if s == j:
                continue
            e = entries[r][s]
            if not erj.is_zero() and not entries[i][s].is_zero():
                e = e - (erj * entries[i][s]) * cinv
            row.append(e)
        new_entries.append(row)
    return new_entries


def prune_resolution(res: FreeResolution) -> FreeResolution:
    """Cancel constant entries of all differentials, cascading level changes.

    Pivot order is deterministic: first differential, then lowest row, then
    lowest column. Adjacent differentials only lose the dual row/column, which
    the complex property forces to zero.
    """
    ring = res.f0.ring
    p = ring.p
    degs = [list(res.module(k).degrees) for k in range(res.length + 1)]
    mats = [[list(row) for row in mp.entries] for mp in res.maps]

    def find_constant():
        for k, mat in enumerate(mats):
            for i, row in enumerate(mat):
                for j, e in enumerate(row):
                    if e.constant_value() % p != 0:
                        return k, i, j
        return None

    while True:
        found = find_constant()
        if found is None:
            break
        k, i, j = found
        mats[k] = _eliminate_constant(mats[k], degs[k], degs[k + 1], i, j, p, ring)
        del degs[k][i]
        del degs[k + 1][j]
        if k + 1 < len(mats):
            # column j of F_{k+1} disappeared: drop the dual row, forced zero
            del mats[k + 1][j]
        if k > 0:
            # row i of F_k disappeared: drop the dual column, forced zero
            for row in mats[k - 1]:
                del row[i]

    # drop trailing rank-0 levels
    while mats and not degs[len(mats)]:
        mats.pop()
    out_maps = []
    for k, mat in enumerate(mats):
        src = GradedFreeModule(ring, tuple(degs[k + 1]))
        tgt = GradedFreeModule(ring, tuple(degs[k]))
        out_maps.append(GradedMap(src, tgt, mat, check=False))
    return FreeResolution(
        GradedFreeModule(ring, tuple(degs[0])),
        out_maps,
        minimal=True,
        complete=res.complete,
        target=res.target,
    )


def prune_map(phi: GradedMap) -> GradedMap:
    """Minimal presentation map: constants cancelled, zero columns dropped."""
    pruned = prune_resolution(FreeResolution(phi.target, [phi]))
    if not pruned.maps:
        return GradedMap.zero(GradedFreeModule(phi.ring, ()), pruned.f0)
    out = pruned.maps[0]
    keep = [j for j in range(out.source.rank) if any(
        not out.entries[i][j].is_zero() for i in range(out.target.rank)
    )]
    if len(keep) < out.source.rank:
        out = out.submatrix(list(range(out.target.rank)), keep)
    return out


# ---------------------------------------------------------------------------
# Koszul complexes


def _subsets(nvars: int, r: int):
    from itertools import combinations

    return list(combinations(range(nvars), r))


def koszul_complex(ring: PolyRing) -> FreeResolution:
    """The Koszul complex on x_0..x_n; the minimal free resolution of k.

    Basis of stage r: size-r subsets in lexicographic order, with the standard
    alternating signs d(e_T) = sum_pos (-1)^pos x_t e_{T-t}.
    """
    nv = ring.nvars
    maps = []
    for r in range(1, nv + 1):
        src_sets = _subsets(nv, r)
        tgt_sets = _subsets(nv, r - 1)
        tgt_idx = {s: i for i, s in enumerate(tgt_sets)}
        src = GradedFreeModule(ring, (r,) * len(src_sets))
        tgt = GradedFreeModule(ring, (r - 1,) * len(tgt_sets))
        ents = [
            [HomogPoly(ring, 1, {}) for _ in range(src.rank)] for _ in range(tgt.rank)
        ]
        for j, t in enumerate(src_sets):
            for pos, v in enumerate(t):
                rest = tuple(x for x in t if x != v)
                sign = 1 if pos % 2 == 0 else -1
                ents[tgt_idx[rest]][j] = HomogPoly.variable(ring, v) * sign
        maps.append(GradedMap(src, tgt, ents, check=False))
    f0 = GradedFreeModule(ring, (0,))
    res = FreeResolution(f0, maps, minimal=True, complete=True)
    res.target = PresentedModule(maps[0], name="k")
    return res


def koszul_syzygy_module(ring: PolyRing, p: int) -> PresentedModule:
    """The p-th syzygy module of k, presented by the (p+1)-st Koszul map."""
    assert 1 <= p <= ring.nvars
    kc = koszul_complex(ring)
    if p == ring.nvars:
        pres = GradedMap.zero(
            GradedFreeModule(ring, ()), GradedFreeModule(ring, (ring.nvars,))
        )
    else:
        pres = kc.maps[p]
    out = PresentedModule(pres, name=f"E_{p}")
    return out


# ---------------------------------------------------------------------------
# chain maps and mapping cones


@dataclass
class ChainMap:
    source_res: FreeResolution
    target_res: FreeResolution
    levels: list[GradedMap]

    def verify_window(self, lo: int, hi: int) -> bool:
        p = self.levels[0].ring.p
        for k in range(1, len(self.levels)):
            if k > self.source_res.length:
                break
            df = self.source_res.maps[k - 1]
            dg = self.target_res.maps[k - 1]
            for d in range(lo, hi + 1):
                lhs = matmul(dg.slice(d), self.levels[k].slice(d), p)
                rhs = matmul(self.levels[k - 1].slice(d), df.slice(d), p)
                if not np.array_equal(lhs, rhs):
                    return False
        return True


def mult_chain_map(res: FreeResolution, g: HomogPoly) -> ChainMap:
    """g·id: res(-deg g) -> res."""
    src = res.twist(-g.degree)
    levels = [
        GradedMap.multiplication(res.module(k), g) for k in range(res.length + 1)
    ]
    return ChainMap(src, res, levels)


def lift_chain_map(
    f0: GradedMap, res_f: FreeResolution, res_g: FreeResolution
) -> ChainMap:
    """Lift a module map (given on generators) to a chain map of resolutions.

    Level k solves the commuting square d^G_k h_k = h_{k-1} d^F_k slice by
    slice; failure at level 1 means the generator images do not respect the
    source relations.
    """
    assert f0.source.degrees == res_f.f0.degrees
    assert f0.target.degrees == res_g.f0.degrees
    p = f0.ring.p
    levels = [f0]
    for k in range(1, res_f.length + 1):
        rhs = levels[k - 1].compose(res_f.maps[k - 1])
        if k > res_g.length:
            if not rhs.is_zero():
                raise NotAModuleMap(
                    f"composite does not vanish past the target resolution (level {k})"
                )
            levels.append(
                GradedMap.zero(res_f.module(k), GradedFreeModule(f0.ring, ()))
            )
            continue
        dg = res_g.maps[k - 1]
        cols = []
        for j in range(rhs.source.rank):
            d = rhs.source.degrees[j]
            b = rhs.column_slice_vector(j)
            x = solve(dg.slice(d), b[:, 0], p)
            if x is None:
                raise NotAModuleMap(
                    f"generator images do not satisfy the source relations (level {k})"
                )
            cols.append((d, slice_vector_to_polys(dg.source, x, d)))
        levels.append(
            GradedMap.from_columns(res_g.module(k), cols)
            if cols
            else GradedMap.zero(GradedFreeModule(f0.ring, ()), res_g.module(k))
        )
    return ChainMap(res_f, res_g, levels)


def mapping_cone(c: ChainMap, minimize: bool = False) -> FreeResolution:
    """The cone of a chain map lifting an injective module map.

    Resolves coker(f); not necessarily minimal unless ``minimize`` is set.
    """
    ring = c.levels[0].ring
    fres, gres = c.source_res, c.target_res
    length = max(fres.length + 1, gres.length)
    maps = []
    for k in range(1, length + 1):
        gk = gres.module(k)
        fk1 = fres.module(k - 1)
        src = GradedFreeModule(ring, gk.degrees + fk1.degrees)
        gk_t = gres.module(k - 1)
        fk2 = fres.module(k - 2) if k >= 2 else GradedFreeModule(ring, ())
        tgt = GradedFreeModule(ring, gk_t.degrees + fk2.degrees)
        ents = [
            [HomogPoly(ring, src.degrees[j] - tgt.degrees[i], {}) for j in range(src.rank)]
            for i in range(tgt.rank)
        ]
        if k <= gres.length:
            dg = gres.maps[k - 1]
            for i in range(dg.target.rank):
                for j in range(dg.source.rank):
                    ents[i][j] = dg.entries[i][j]
        if k - 1 < len(c.levels):
            lvl = c.levels[k - 1]
            for i in range(lvl.target.rank):
                for j in range(lvl.source.rank):
                    ents[i][gk.rank + j] = lvl.entries[i][j]
        if k >= 2 and k - 1 <= fres.length:
            df = fres.maps[k - 2]
            for i in range(df.target.rank):
                for j in range(df.source.rank):
                    ents[gk_t.rank + i][gk.rank + j] = -df.entries[i][j]
        maps.append(GradedMap(src, tgt, ents, check=False))
    while maps and maps[-1].source.rank == 0:
        maps.pop()
    res = FreeResolution(gres.f0, maps, minimal=False, complete=True)
    res.target = PresentedModule(maps[0]) if maps else PresentedModule(
        GradedMap.zero(GradedFreeModule(ring, ()), gres.f0)
    )
    if minimize:
        res = prune_resolution(res)
        res.target = PresentedModule(res.maps[0]) if res.maps else PresentedModule(
            GradedMap.zero(GradedFreeModule(ring, ()), res.f0)
        )
    return res


def quotient_resolution(m: PresentedModule, y: HomogPoly) -> FreeResolution:
    """Resolution of M/yM as the cone over y·id (y must be a nonzerodivisor)."""
    return mapping_cone(mult_chain_map(m.resolution(), y))


# ---------------------------------------------------------------------------
# duals, Betti tables, Hilbert polynomials


def hom_dual_module(m: PresentedModule) -> PresentedModule:
    """Hom_S(M, S): the kernel of the dualized presentation, presented."""
    phi_t = m.minimal_presentation().dual(0)
    psi = _syzygy_retry(phi_t, None)
    rel = _syzygy_retry(psi, None)
    out = PresentedModule(rel, name=m.name and f"{m.name}^v")
    out._cache["dual_realization"] = psi
    return out


def betti_table(res: FreeResolution) -> dict[tuple[int, int], int]:
    assert res.complete and res.minimal, "Betti numbers need a minimal resolution"
    out: dict[tuple[int, int], int] = {}
    for k in range(res.length + 1):
        for a in res.module(k).degrees:
            out[(k, a)] = out.get((k, a), 0) + 1
    return out


def _binom_poly(shift: int, n: int) -> list[Fraction]:
    """Coefficients (ascending) of C(d + shift, n) as a polynomial in d."""
    coeffs = [Fraction(1)]
    for t in range(1, n + 1):
        # multiply by (d + shift - n + t)
        const = Fraction(shift - n + t)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] += c * const
            nxt[i + 1] += c
        coeffs = nxt
    fact = 1
    for t in range(2, n + 1):
        fact *= t
    return [c / fact for c in coeffs]


def hilbert_polynomial(res: FreeResolution) -> tuple[Fraction, ...]:
    """Ascending coefficients of the Hilbert polynomial from a resolution."""
    n = res.f0.ring.n
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(res.length + 1):
        sign = (-1) ** k
        for a in res.module(k).degrees:
            for i, c in enumerate(_binom_poly(n - a, n)):
                coeffs[i] += sign * c
    return tuple(coeffs)


def hp_evaluate(coeffs, d: int) -> int:
    acc = Fraction(0)
    for i, c in enumerate(coeffs):
        acc += c * d**i
    assert acc.denominator == 1
    return int(acc)


def hp_degree(coeffs) -> int:
    """Degree of the Hilbert polynomial; -1 for the zero polynomial."""
    deg = -1
    for i, c in enumerate(coeffs):
        if c != 0:
            deg = i
    return deg


def sheaf_rank(m: PresentedModule) -> int:
    """Leading Hilbert coefficient times n!, the generic rank of the sheaf."""
    coeffs = hilbert_polynomial(m.resolution())
    n = m.ring.n
    fact = 1
    for t in range(2, n + 1):
        fact *= t
    lead = coeffs[n] * fact
    assert lead.denominator == 1
    return int(lead)


# ---------------------------------------------------------------------------
# quotient slices (degree pieces of a presented module)


class QuotientSlice:
    """Canonical basis data for (F_0)_d / im(presentation at d)."""

    def __init__(self, m: PresentedModule, d: int):
        self.module = m
        self.d = d
        self.p = m.ring.p
        amb = m.f0.slice_dim(d)
        img = m.presentation.slice(d)
        r, piv = rref(img.T, self.p)
        self.red_rows = r[: len(piv)]
        self.red_piv = piv
        self.free = [j for j in range(amb) if j not in set(piv)]
        self.dim = len(self.free)
        self.ambient_dim = amb

    def reduce(self, v: Matrix) -> Matrix:
        """Representative of v modulo the image (columns)."""
        if not self.red_piv:
            return v % self.p
        return (v - matmul(self.red_rows.T, v[self.red_piv, :], self.p)) % self.p

    def coords(self, v: Matrix) -> Matrix:
        return self.reduce(v)[self.free, :]

    def representatives(self) -> Matrix:
        out = zeros_matrix(self.ambient_dim, self.dim)
        for t, f in enumerate(self.free):
            out[f, t] = 1
        return out


def quotient_mult_matrix(
    m: PresentedModule, g: HomogPoly, sl_from: QuotientSlice, sl_to: QuotientSlice
) -> Matrix:
    """Multiplication by g between quotient slices, in canonical coordinates."""
    reps = sl_from.representatives()
    moved = matmul(free_mult_slice(m.f0, g, sl_from.d), reps, m.ring.p)
    return sl_to.coords(moved)


def cached_quotient_slice(m: PresentedModule, d: int) -> QuotientSlice:
    cache = m._cache.setdefault("qslices", {})
    if d not in cache:
        cache[d] = QuotientSlice(m, d)
    return cache[d]


# ---------------------------------------------------------------------------
# presentation files


def module_to_json(m: PresentedModule) -> dict:
    pres = m.presentation
    return {
        "p": m.ring.p,
        "n": m.ring.n,
        "target_degrees": list(pres.target.degrees),
        "source_degrees": list(pres.source.degrees),
        "matrix": [
            [poly_str(pres.entries[i][j]) for j in range(pres.source.rank)]
            for i in range(pres.target.rank)
        ],
    }


def module_from_json(data: dict) -> PresentedModule:
    try:
        ring = PolyRing(int(data["p"]), int(data["n"]))
        tgt = GradedFreeModule(ring, tuple(int(a) for a in data["target_degrees"]))
        src = GradedFreeModule(ring, tuple(int(a) for a in data["source_degrees"]))
        matrix = data["matrix"]
        ents = []
        for i in range(tgt.rank):
            row = []
            for j in range(src.rank):
                want = src.degrees[j] - tgt.degrees[i]
                row.append(parse_poly(ring, matrix[i][j], degree=want if matrix[i][j].strip() not in ("0", "") else None))
            ents.append(row)
    except (KeyError, IndexError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed presentation file: {exc}") from exc
    try:
        return PresentedModule(GradedMap(src, tgt, ents))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def module_dumps(m: PresentedModule) -> str:
    return json.dumps(module_to_json(m), indent=2, sort_keys=True)


def module_loads(text: str) -> PresentedModule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return module_from_json(data)
