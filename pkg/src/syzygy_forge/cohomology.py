"""Ext against the canonical twist, local duality, sheaf cohomology tables.

Local cohomology is computed only through graded local duality,

    dim H^i_m(M)_d  =  dim Ext^{n+1-i}(M, S(-n-1))_{-d},

so everything reduces to cohomology of the dualized minimal free resolution.
Sheaf cohomology of the sheafified module follows from H^i_*(E) = H^{i+1}_m(M).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import HomogPoly, Matrix, PolyRing, binom, kernel_basis, matmul, rank, rref, solve, zeros_matrix
from .errors import NotNZD
from .modules import (
    FreeResolution,
    GradedFreeModule,
    GradedMap,
    PresentedModule,
    betti_table,
    free_mult_slice,
    hilbert_polynomial,
    hp_evaluate,
    hom_dual_module,
    mapping_cone,
    minimal_free_resolution,
    mult_chain_map,
    prune_map,
    slice_vector_to_polys,
    _syzygy_retry,
)

NEG_INF = float("-inf")


def canonical_twist(ring: PolyRing) -> int:
    return ring.n + 1


# ---------------------------------------------------------------------------
# dualized resolutions as cochain complexes


@dataclass
class CochainComplex:
    """G^0 -> G^1 -> ... with maps[k]: G^k -> G^{k+1}."""

    mods: list[GradedFreeModule]
    maps: list[GradedMap]

    @property
    def length(self) -> int:
        return len(self.mods) - 1

    def module(self, j: int) -> GradedFreeModule:
        if 0 <= j < len(self.mods):
            return self.mods[j]
        return GradedFreeModule(self.mods[0].ring, ())

    def cocycles(self, j: int, d: int) -> Matrix:
        """Columns spanning ker(G^j_d -> G^{j+1}_d)."""
        gj = self.module(j)
        if j < self.length:
            return kernel_basis(self.maps[j].slice(d), gj.ring.p)
        return np.eye(gj.slice_dim(d), dtype=np.int64)

    def coboundaries(self, j: int, d: int) -> Matrix:
        if j == 0 or j > self.length:
            return zeros_matrix(self.module(j).slice_dim(d), 0)
        return self.maps[j - 1].slice(d)

    def subquotient(self, j: int, d: int) -> "SubquotientSlice":
        return SubquotientSlice(
            self.cocycles(j, d), self.coboundaries(j, d), self.mods[0].ring.p
        )


def dual_cochain(res: FreeResolution, w: int | None = None) -> CochainComplex:
    """Hom(F_., S(-w)) of a resolution, default w = n+1 (the canonical twist)."""
    ring = res.f0.ring
    if w is None:
        w = canonical_twist(ring)
    mods = [
        GradedFreeModule(ring, tuple(w - a for a in res.module(k).degrees))
        for k in range(res.length + 1)
    ]
    maps = [res.maps[k].dual(w) for k in range(res.length)]
    return CochainComplex(mods, maps)


class SubquotientSlice:
    """Canonical coordinates on (cocycles mod coboundaries) in one degree slice.

    Representatives are reduced-echelon complements of the boundary span inside
    the cocycle span, so generator choices are reproducible bit for bit.
    """

    def __init__(self, z: Matrix, b: Matrix, p: int):
        self.p = p
        self.ambient = z.shape[0]
        rb, pivb = rref(b.T, p)
        self.b_rows = rb[: len(pivb)]
        self.b_piv = pivb
        if z.shape[1] == 0:
            red = zeros_matrix(0, self.ambient)
        elif len(pivb) == 0:
            red = z.T % p
        else:
            red = (z.T - matmul(z.T[:, pivb], self.b_rows, p)) % p
        rh, pivh = rref(red, p)
        self.reps = rh[: len(pivh)].T
        self.dim = len(pivh)
        self._solve_cols = (
            np.hstack([self.b_rows.T, self.reps]) if len(pivb) else self.reps
        )

    def coords(self, v: Matrix) -> Matrix:
        """Class coordinates of cocycle columns v against the representatives."""
        if self.dim == 0:
            return zeros_matrix(0, v.shape[1])
        from .algebra import solve_matrix

        x = solve_matrix(self._solve_cols, v, self.p)
        assert x is not None, "vector is not a cocycle of this slice"
        return x[-self.dim :, :]


# ---------------------------------------------------------------------------
# Ext modules


class ExtModule:
    """Ext^j_S(M, S(-n-1)) as a presented module, built lazily per index."""

    def __init__(self, index: int, cochain: "CochainComplex"):
        self.index = index
        self._cochain = cochain
        self._module: PresentedModule | None = None

    @property
    def module(self) -> PresentedModule:
        if self._module is None:
            self._module = ext_from_cochain(self._cochain, self.index)
        return self._module

    def hilbert(self, e: int) -> int:
        return self.module.hilbert_function(e)

    def is_zero(self) -> bool:
        if self._module is None and self.index > self._cochain.length:
            return True
        return self.module.is_zero_module()

    def min_degree(self):
        """Smallest degree with a nonzero slice; None for the zero module."""
        if self.is_zero():
            return None
        return min(self.module.min_gen_degrees())

    def finite_length(self) -> bool:
        from .modules import hp_degree

        if self.is_zero():
            return True
        return hp_degree(hilbert_polynomial(self.module.resolution())) == -1

    def support(self):
        """(lo, hi) with certified vanishing outside; hi is None when infinite."""
        if self.is_zero():
            return None
        lo = self.min_degree()
        if not self.finite_length():
            return (lo, None)
        res = self.module.resolution()
        reg = max(a - k for k in range(res.length + 1) for a in res.module(k).degrees)
        return (lo, reg)

    def multiplication_is_zero(self, y: HomogPoly) -> bool:
        """Membership test: y·(each generator) lands in the relation submodule."""
        pres = self.module.minimal_presentation()
        p = self.module.ring.p
        tgt = pres.target
        for i, a in enumerate(tgt.degrees):
            col = tgt.basis_column(i)
            vec = free_mult_slice(tgt, y, a)[:, tgt.offsets(a)[i]]
            if solve(pres.slice(a + y.degree), vec, p) is None:
                return False
        return True


def _lift_through(psi: GradedMap, phi: GradedMap) -> GradedMap:
    """Factor phi = psi ∘ h column by column (phi's image inside im psi)."""
    p = psi.ring.p
    cols = []
    for j in range(phi.source.rank):
        d = phi.source.degrees[j]
        b = phi.column_slice_vector(j)
        x = solve(psi.slice(d), b[:, 0], p)
        assert x is not None, "image column misses the kernel span"
        cols.append((d, slice_vector_to_polys(psi.source, x, d)))
    if not cols:
        return GradedMap.zero(GradedFreeModule(psi.ring, ()), psi.source)
    return GradedMap.from_columns(psi.source, cols)


def ext_from_cochain(c: CochainComplex, j: int) -> PresentedModule:
    """H^j of the cochain complex as a presented module (kernel mod image)."""
    ring = c.mods[0].ring
    if j > c.length or j < 0:
        return PresentedModule(
            GradedMap.zero(GradedFreeModule(ring, ()), GradedFreeModule(ring, ()))
        )
    if j < c.length:
        psi = _syzygy_retry(c.maps[j], None)
    else:
        psi = GradedMap.identity(c.mods[j])
    rel = _syzygy_retry(psi, None)
    if j > 0:
        rel = rel.hstack(_lift_through(psi, c.maps[j - 1]))
    return PresentedModule(rel)


def ext_modules(m: PresentedModule) -> list[ExtModule]:
    """Ext^j(M, S(-n-1)) for j = 0..n+1, lazy and cached on the module."""
    if "ext" in m._cache:
        return m._cache["ext"]
    ring = m.ring
    c = dual_cochain(m.resolution())
    out = [ExtModule(j, c) for j in range(ring.n + 2)]
    m._cache["ext"] = out
    m._cache["dual_cochain"] = c
    return out


def certify_locally_free(m: PresentedModule) -> bool:
    """Saturated with finite-length intermediate Ext: the sheafification is
    locally free and the module is torsion free, so every nonzero form is a
    nonzerodivisor."""
    if "_torsion_free" in m._cache:
        return m._cache["_torsion_free"]
    ext = ext_modules(m)
    n = m.ring.n
    ok = ext[n + 1].is_zero() and ext[n].is_zero()
    ok = ok and all(ext[j].finite_length() for j in range(1, n))
    m._cache["_torsion_free"] = ok
    return ok


def module_dual_cochain(m: PresentedModule) -> CochainComplex:
    if "dual_cochain" not in m._cache:
        ext_modules(m)
    return m._cache["dual_cochain"]


# ---------------------------------------------------------------------------
# tables


@dataclass
class LocalCohomologyTable:
    """dims[i][d - lo] = dim_k H^i_m(M)_d for i = 0..n+1 over [lo, hi]."""

    n: int
    window: tuple[int, int]
    dims: list[list[int]]

    def value(self, i: int, d: int) -> int:
        lo, hi = self.window
        assert lo <= d <= hi
        return self.dims[i][d - lo]


@dataclass
class SheafCohomologyTable:
    """h[i][d - lo] = h^i(E(d)) for i = 0..n over [lo, hi]."""

    n: int
    window: tuple[int, int]
    h: list[list[int]]

    def value(self, i: int, d: int) -> int:
        lo, hi = self.window
        assert lo <= d <= hi
        return self.h[i][d - lo]

    def row(self, i: int) -> list[int]:
        return list(self.h[i])

    def to_tsv(self) -> str:
        lo, hi = self.window
        lines = ["d\t" + "\t".join(str(d) for d in range(lo, hi + 1))]
        for i in range(self.n + 1):
            lines.append(f"h^{i}\t" + "\t".join(str(v) for v in self.h[i]))
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {"window": list(self.window), "h": self.h}


def local_cohomology_dims(
    m: PresentedModule, window: tuple[int, int] = (-8, 8)
) -> LocalCohomologyTable:
    ring = m.ring
    ext = ext_modules(m)
    lo, hi = window
    dims = [
        [ext[ring.n + 1 - i].hilbert(-d) for d in range(lo, hi + 1)]
        for i in range(ring.n + 2)
    ]
    return LocalCohomologyTable(ring.n, window, dims)


def sheaf_cohomology_table(
    m: PresentedModule, window: tuple[int, int] = (-8, 8)
) -> SheafCohomologyTable:
    ring = m.ring
    lc = local_cohomology_dims(m, window)
    lo, hi = window
    h = []
    h.append(
        [
            m.hilbert_function(d) - lc.value(0, d) + lc.value(1, d)
            for d in range(lo, hi + 1)
        ]
    )
    for i in range(1, ring.n + 1):
        h.append([lc.value(i + 1, d) for d in range(lo, hi + 1)])
    return SheafCohomologyTable(ring.n, window, h)


def a_invariant(m: PresentedModule, i: int):
    """max{d : h^i(E(d)) != 0}, or -inf; certified through Ext support."""
    assert i >= 1
    ring = m.ring
    ext = ext_modules(m)[ring.n - i]
    lo = ext.min_degree()
    if lo is None:
        return NEG_INF
    return -lo


@dataclass
class Regularity:
    sheaf: int
    module: int


def regularity(m: PresentedModule) -> Regularity:
    """Castelnuovo-Mumford regularity max(a_i + i + 1), plus max(b_j - j)."""
    ring = m.ring
    best = NEG_INF
    for i in range(1, ring.n + 1):
        a = a_invariant(m, i)
        if a != NEG_INF:
            best = max(best, a + i + 1)
    res = m.resolution()
    mod_reg = max(
        a - k for k in range(res.length + 1) for a in res.module(k).degrees
    )
    return Regularity(int(best) if best != NEG_INF else best, mod_reg)


# ---------------------------------------------------------------------------
# the independent Bott oracle


def bott_oracle(n: int, p: int, ell: int) -> tuple[int, ...]:
    """Closed-form h^q of the p-th differential-form sheaf twisted by ell."""
    assert 0 <= p <= n
    out = [0] * (n + 1)
    if ell > p:
        out[0] = binom(ell + n - p, ell) * binom(ell - 1, p)
    elif ell == 0:
        out[p] = 1
    elif ell < p - n:
        out[n] = binom(-ell + p, -ell) * binom(-ell - 1, n - p)
    return tuple(out)


# ---------------------------------------------------------------------------
# Serre duality and Euler characteristic checks


def serre_duality_check(m: PresentedModule, window: tuple[int, int] = (-8, 8)) -> bool:
    """h^i(E(d)) = h^{n-i}(E^v(-d-n-1)) over the window, E^v from the Hom dual."""
    ring = m.ring
    n = ring.n
    lo, hi = window
    dual = hom_dual_module(m)
    full = (min(lo, -hi - n - 1), max(hi, -lo - n - 1))
    tm = sheaf_cohomology_table(m, full)
    td = sheaf_cohomology_table(dual, full)
    for i in range(n + 1):
        for d in range(lo, hi + 1):
            if tm.value(i, d) != td.value(n - i, -d - n - 1):
                return False
    return True


def euler_characteristic_check(
    m: PresentedModule, window: tuple[int, int] = (-8, 8)
) -> bool:
    """sum_i (-1)^i h^i(E(d)) equals the Hilbert polynomial at every d."""
    ring = m.ring
    table = sheaf_cohomology_table(m, window)
    hp = hilbert_polynomial(m.resolution())
    lo, hi = window
    for d in range(lo, hi + 1):
        chi = sum((-1) ** i * table.value(i, d) for i in range(ring.n + 1))
        if chi != hp_evaluate(hp, d):
            return False
    return True


# ---------------------------------------------------------------------------
# nonzerodivisors and the connecting Ext sequence


def is_nonzerodivisor(m: PresentedModule, y: HomogPoly) -> bool:
    """Windowed torsion check: y-multiplication injective on every slice.

    Modules certified torsion free (saturated, locally free sheafification)
    short-circuit: any nonzero form is a nonzerodivisor there.
    """
    if y.is_zero():
        return False
    if m._cache.get("_torsion_free"):
        return True
    key = ("nzd", tuple(sorted(y.coeffs.items())))
    if key in m._cache:
        return m._cache[key]
    pres = m.minimal_presentation()
    degs = pres.target.degrees
    if not degs:
        return True
    lo = min(degs)
    hi = max(max(degs), max(pres.source.degrees, default=lo)) + m.ring.n + 3
    from .modules import cached_quotient_slice, quotient_mult_matrix

    out = True
    for d in range(lo, hi + 1):
        sl_from = cached_quotient_slice(m, d)
        if sl_from.dim == 0:
            continue
        sl_to = cached_quotient_slice(m, d + y.degree)
        mult = quotient_mult_matrix(m, y, sl_from, sl_to)
        if rank(mult, m.ring.p) < sl_from.dim:
            out = False
            break
    m._cache[key] = out
    return out


@dataclass
class ConnectingExtSequence:
    """Slice-level long exact sequence of Ext for 0 -> M(-1) -> M -> M/yM -> 0.

    For each cohomological index j and internal degree d the three stored maps
    realize

        Ext^j(M) --y--> Ext^j(M(-1)) --iota--> Ext^{j+1}(M/yM) --pi--> Ext^{j+1}(M)

    in the canonical subquotient coordinates (Ext^j(M(-1))_d = Ext^j(M)_{d+1}).
    """

    y: HomogPoly
    window: tuple[int, int]
    mult: dict
    iota: dict
    pi: dict
    dims_m: dict
    dims_q: dict

    def verify_exactness(self) -> bool:
        p = self.y.ring.p
        lo, hi = self.window
        for (j, d), iota in self.iota.items():
            mult = self.mult[(j, d)]
            pi = self.pi[(j + 1, d)]
            # im(mult) = ker(iota)
            if rank(mult, p) != iota.shape[1] - rank(iota, p):
                return False
            # im(iota) = ker(pi)
            if rank(iota, p) != pi.shape[1] - rank(pi, p):
                return False
            if np.any(matmul(iota, mult, p)) or np.any(matmul(pi, iota, p)):
                return False
        return True


def connecting_ext_sequence(
    m: PresentedModule, y: HomogPoly, window: tuple[int, int] | None = None
) -> ConnectingExtSequence:
    """Explicit slice maps of the Ext long exact sequence along y.

    The quotient M/yM is resolved by the cone over y·id, whose dualized
    complex D^k = G^k ⊕ G^{k-1}(1) carries the inclusion (second block) and
    projection (first block) realizing the sequence.
    """
    if not is_nonzerodivisor(m, y):
        raise NotNZD("multiplication by the form has torsion")
    ring = m.ring
    p = ring.p
    res = m.resolution()
    gm = module_dual_cochain(m)
    cone = mapping_cone(mult_chain_map(res, y))
    gq = dual_cochain(cone)
    if window is None:
        los, his = [], []
        for e in ext_modules(m):
            sup = e.support()
            if sup is not None:
                los.append(sup[0])
                his.append(sup[0] if sup[1] is None else sup[1])
        if not los:
            window = (0, 0)
        else:
            window = (min(los) - 1, max(his) + 1)
    lo, hi = window
    mult, iota, pi, dims_m, dims_q = {}, {}, {}, {}, {}
    for j in range(ring.n + 1):
        for d in range(lo, hi + 1):
            sq_m_d = gm.subquotient(j, d)
            sq_m_d1 = gm.subquotient(j, d + 1)
            sq_q = gq.subquotient(j + 1, d)
            dims_m[(j, d)] = sq_m_d.dim
            dims_q[(j + 1, d)] = sq_q.dim
            # multiplication by y on Ext^j(M): degree d -> d+1
            reps = sq_m_d.reps
            moved = matmul(free_mult_slice(gm.module(j), y, d), reps, p)
            mult[(j, d)] = sq_m_d1.coords(moved)
            # iota: Ext^j(M)_{d+1} -> Ext^{j+1}(M/yM)_d via the second block
            gq_mod = gq.module(j + 1)
            top = gq.module(j + 1).slice_dim(d)
            first = gm.module(j + 1).slice_dim(d)
            emb = zeros_matrix(top, sq_m_d1.reps.shape[1])
            block = gm.module(j).slice_dim(d + 1)
            emb[first : first + block, :] = sq_m_d1.reps
            iota[(j, d)] = sq_q.coords(emb)
            # pi: Ext^{j+1}(M/yM)_d -> Ext^{j+1}(M)_d via the first block
            sq_m_next = gm.subquotient(j + 1, d)
            qreps = sq_q.reps
            pi[(j + 1, d)] = sq_m_next.coords(qreps[:first, :] % p)
    return ConnectingExtSequence(y, window, mult, iota, pi, dims_m, dims_q)
