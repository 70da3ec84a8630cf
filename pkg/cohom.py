"""
Mod-p cohomology of small p-groups from the normalized bar complex.

Cochains of degree n are functions on n-tuples of non-identity elements of
Q, stored as vectors of length m^n (m = |Q| - 1) indexed lexicographically
with the first entry most significant. With that indexing the front/back
cup product of two cochains is np.outer(a, b).ravel().

Differentials are assembled as COO triples and fed to gfp.RowSpace, so the
largest slices used here (order 8 and 9 groups in degree 4) stay at a few
thousand columns. Coefficients are GF(p); for trivial coefficients this
gives the same dimensions and stability verdicts as any extension field.
"""

import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

import fusion
import gcore
import gfp
import mylog
import settings

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))


# ============================================================================
# Bar complex slices
# ============================================================================


class BarCells:
    """Index machinery for the bar complex of Q.

    normalized=True uses the non-identity elements (products equal to the
    identity are dropped); normalized=False keeps all of Q and is only used
    as a brute-force oracle.
    """

    def __init__(self, Q, normalized=True):
        els = Q.elements
        if not els[0].is_identity():
            raise ValueError("element list does not start with the identity")
        self.Q = Q
        self.normalized = normalized
        self.cells = els[1:] if normalized else els
        self.k = len(self.cells)
        index = {x: i for i, x in enumerate(self.cells)}
        self.mult = np.array([[index.get(a * b, -1) for b in self.cells] for a in self.cells],
                             dtype=np.int64).reshape(self.k, self.k)

    def dim(self, n):
        return self.k ** n

    def digits(self, n):
        """(k^n, n) array; row t holds the cell indices of tuple t."""
        idx = np.arange(self.k ** n, dtype=np.int64)
        out = np.empty((idx.size, n), dtype=np.int64)
        for j in range(n):
            out[:, j] = (idx // self.k ** (n - 1 - j)) % self.k
        return out

    def ravel(self, digits):
        n = digits.shape[1]
        weights = np.array([self.k ** (n - 1 - j) for j in range(n)], dtype=np.int64)
        return digits @ weights if n else np.zeros(digits.shape[0], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """Sparse matrix over GF(p) as COO triples; duplicates add up."""
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    shape: tuple
    p: int

    def to_dense(self):
        M = np.zeros(self.shape, dtype=np.int64)
        np.add.at(M, (self.rows, self.cols), self.vals)
        return M % self.p

    def apply(self, f):
        """Row vector(s) f times the matrix."""
        f = gfp.mod_p(f, self.p)
        if f.ndim == 2:
            return np.stack([self.apply(v) for v in f]) if len(f) else np.zeros((0, self.shape[1]), np.int64)
        out = np.zeros(self.shape[1], dtype=np.int64)
        np.add.at(out, self.cols, self.vals * f[self.rows])
        return out % self.p

    def rank(self):
        # rank of the transpose; rows of D^T are the short side
        rs = gfp.RowSpace(self.shape[0], self.p)
        rs.add_coo(self.cols, self.rows, self.vals, self.shape[1])
        return rs.rank


def _differential(cells, p, n):
    settings.check_cap(f"differential d^{n} columns", cells.dim(n + 1), 'max_columns')
    T = cells.digits(n + 1)
    t = np.arange(T.shape[0], dtype=np.int64)
    rows, cols, vals = [cells.ravel(T[:, 1:])], [t], [np.ones_like(t)]
    for i in range(1, n + 1):
        prod = cells.mult[T[:, i - 1], T[:, i]]
        ok = prod >= 0
        merged = np.concatenate([T[ok, :i - 1], prod[ok, None], T[ok, i + 1:]], axis=1)
        rows.append(cells.ravel(merged))
        cols.append(t[ok])
        vals.append(np.full(int(ok.sum()), (-1) ** i, dtype=np.int64))
    rows.append(cells.ravel(T[:, :n]))
    cols.append(t)
    vals.append(np.full(t.size, (-1) ** (n + 1), dtype=np.int64))
    return FieldMatrix(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals) % p,
                       (cells.dim(n), cells.dim(n + 1)), p)


def differential(Q, p, n, normalized=True):
    """d^n: C^n -> C^{n+1} as a (m^n x m^{n+1}) FieldMatrix acting on row vectors."""
    return _differential(BarCells(Q, normalized), p, n)


@lru_cache(maxsize=128)
def _cached_differential(Q, p, n):
    return differential(Q, p, n)


# ============================================================================
# Cohomology bases
# ============================================================================


class CohomologyBasis:
    """H^n(Q; GF(p)) as explicit cocycle representatives.

    reps are the reduced row echelon rows of Z^n modulo B^n; their pivot
    columns avoid those of B^n, so the class of a cocycle z is read off the
    pivot entries of z reduced by B^n.
    """

    def __init__(self, Q, p, n):
        self.Q = Q
        self.p = p
        self.n = n
        cells = BarCells(Q)
        self.cochain_dim = cells.dim(n)
        d = _cached_differential(Q, p, n)
        Z = gfp.RowSpace(self.cochain_dim, p)
        Z.add_coo(d.cols, d.rows, d.vals, d.shape[1])
        cycles = Z.kernel()
        self._B = gfp.RowSpace(self.cochain_dim, p)
        if n > 0:
            prev = _cached_differential(Q, p, n - 1)
            self._B.add_coo(prev.rows, prev.cols, prev.vals, prev.shape[0])
        reps, pivots = gfp.rref(self._B.reduce(cycles), p) if len(cycles) else \
            (np.zeros((0, self.cochain_dim), dtype=np.int64), [])
        if len(pivots) != len(cycles) - self._B.rank:
            raise RuntimeError(f"H^{n}: |Z| - |B| = {len(cycles) - self._B.rank} but {len(pivots)} classes")
        reps.setflags(write=False)
        self.reps = reps
        self.pivots = np.asarray(pivots, dtype=np.int64)
        self.cycle_dim = len(cycles)
        self.boundary_dim = self._B.rank

    @property
    def dim(self):
        return len(self.pivots)

    def coordinates(self, z, check=False):
        """Coordinates of the class of the cocycle(s) z in this basis."""
        z = gfp.mod_p(z, self.p)
        if check and not self.is_cocycle(z):
            raise ValueError("not a cocycle")
        return self._B.reduce(z)[..., self.pivots] % self.p

    def is_cocycle(self, z):
        return not _cached_differential(self.Q, self.p, self.n).apply(z).any()

    def is_coboundary(self, z):
        return not self._B.reduce(gfp.mod_p(z, self.p)).any()

    def cocycle(self, coords):
        """Representative cochain for the given coordinates."""
        return (gfp.mod_p(coords, self.p) @ self.reps) % self.p

    def classes(self):
        eye = np.eye(self.dim, dtype=np.int64)
        return [CohomologyClass(self.Q, self.p, self.n, tuple(int(c) for c in row)) for row in eye]

    def __repr__(self):
        return f"CohomologyBasis(|Q|={len(self.Q.elements)}, p={self.p}, n={self.n}, dim={self.dim})"


@lru_cache(maxsize=256)
def _cached_basis(Q, p, n):
    basis = CohomologyBasis(Q, p, n)
    log.info("H^%d(%s; GF(%d)): dim %d (Z %d, B %d)", n, gcore.structure_label(Q), p,
             basis.dim, basis.cycle_dim, basis.boundary_dim)
    return basis


def cohomology_basis(Q, p, n):
    if n < 0:
        raise ValueError("negative degree")
    settings.check_cap(f"cochains of degree {n}", (len(Q.elements) - 1) ** n, 'max_cochain_dim')
    settings.check_cap(f"differential d^{n} columns", (len(Q.elements) - 1) ** (n + 1), 'max_columns')
    return _cached_basis(Q, p, n)


def group_dims(Q, p, N):
    return [cohomology_basis(Q, p, n).dim for n in range(N + 1)]


def unnormalized_dims(Q, p, N):
    """dim H^n for n = 0..N from the full bar complex on all |Q|^n tuples."""
    cells = BarCells(Q, normalized=False)
    ranks = [_differential(cells, p, n).rank() for n in range(N + 1)]
    return [cells.dim(n) - ranks[n] - (ranks[n - 1] if n else 0) for n in range(N + 1)]


def default_max_degree(order, p):
    """Largest degree checked by default for a p-group of the given order."""
    if order <= 16:
        N = 4 if p == 2 else 5
    elif order <= 27:
        N = 3
    else:
        N = 2
    config = settings.current()
    while N > 0 and ((order - 1) ** N > config.max_cochain_dim
                     or (order - 1) ** (N + 1) > config.max_columns):
        N -= 1
    return N


# ============================================================================
# Classes, cup products, restriction
# ============================================================================


@dataclass(frozen=True)
class CohomologyClass:
    Q: object = field(repr=False)
    p: int
    degree: int
    coords: tuple

    @property
    def basis(self):
        return cohomology_basis(self.Q, self.p, self.degree)

    def is_zero(self):
        return not any(self.coords)

    def representative(self):
        return self.basis.cocycle(np.asarray(self.coords, dtype=np.int64))

    def __add__(self, other):
        _same_group(self, other)
        if self.degree != other.degree:
            raise ValueError("adding classes of different degree")
        return CohomologyClass(self.Q, self.p, self.degree,
                               tuple((a + b) % self.p for a, b in zip(self.coords, other.coords)))

    def scale(self, c):
        return CohomologyClass(self.Q, self.p, self.degree, tuple((c * a) % self.p for a in self.coords))


def _same_group(a, b):
    if a.Q != b.Q or a.p != b.p:
        raise ValueError("classes live in different cohomology rings")


def make_class(Q, p, n, coords):
    basis = cohomology_basis(Q, p, n)
    coords = tuple(int(c) % p for c in coords)
    if len(coords) != basis.dim:
        raise ValueError(f"H^{n} has dimension {basis.dim}, got {len(coords)} coordinates")
    return CohomologyClass(Q, p, n, coords)


def unit(Q, p):
    return CohomologyClass(Q, p, 0, (1,))


def cup(a, b):
    """Front/back face cup product a ⌣ b."""
    _same_group(a, b)
    target = cohomology_basis(a.Q, a.p, a.degree + b.degree)
    z = np.outer(a.representative(), b.representative()).ravel() % a.p
    return CohomologyClass(a.Q, a.p, a.degree + b.degree,
                           tuple(int(c) for c in target.coordinates(z)))


def frobenius_power(z, r):
    """z^(p^r) by repeated cup products."""
    e = z.p ** r
    final = cohomology_basis(z.Q, z.p, z.degree * e)
    result = z
    for _ in range(e - 1):
        if result.is_zero():
            return CohomologyClass(z.Q, z.p, z.degree * e, (0,) * final.dim)
        result = cup(result, z)
    return result


def _pullback_index(phi, n):
    """For each n-tuple of the domain, the index of its image tuple (or -1)."""
    cod_index = phi.codomain.index
    k_cod = len(phi.codomain.elements) - 1
    # identity maps to cell -1
    cellmap = np.array([cod_index[phi(x)] - 1 for x in phi.domain.elements[1:]], dtype=np.int64)
    dom = BarCells(phi.domain)
    mapped = cellmap[dom.digits(n)]
    valid = (mapped >= 0).all(axis=1)
    weights = np.array([k_cod ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    idx = mapped @ weights if n else np.zeros(mapped.shape[0], dtype=np.int64)
    return np.where(valid, idx, -1)


@lru_cache(maxsize=1024)
def _restriction(phi, cod_key, n, p):
    src = cohomology_basis(phi.codomain, p, n)
    dst = cohomology_basis(phi.domain, p, n)
    if src.dim == 0 or dst.dim == 0:
        M = np.zeros((src.dim, dst.dim), dtype=np.int64)
    else:
        idx = _pullback_index(phi, n)
        pulled = np.zeros((src.dim, dst.cochain_dim), dtype=np.int64)
        valid = idx >= 0
        pulled[:, valid] = src.reps[:, idx[valid]]
        M = dst.coordinates(pulled)
    M.setflags(write=False)
    return M


def restriction_along(phi, n, p):
    """res_phi: H^n(codomain) -> H^n(domain) as a matrix acting on row coordinates.

    Row i holds the coordinates of the pullback of the i-th basis class, so
    restriction_along(compose(f, g)) = restriction_along(f) @ restriction_along(g).
    """
    if len(phi.images) != len(phi.domain.elements):
        raise ValueError("hom table incomplete")
    return _restriction(phi, phi.codomain.elements, n, p)


def restrict_class(z, phi):
    if phi.codomain.elements != z.Q.elements:
        raise ValueError("class does not live on the codomain of phi")
    coords = (np.asarray(z.coords, dtype=np.int64) @ restriction_along(phi, z.degree, z.p)) % z.p
    return CohomologyClass(phi.domain, z.p, z.degree, tuple(int(c) for c in coords))


# ============================================================================
# Stable elements
# ============================================================================


@dataclass
class StableSubspace:
    F: object = field(repr=False)
    n: int
    basis: np.ndarray = field(repr=False)
    ambient_dim: int

    @property
    def dim(self):
        return len(self.basis)

    def contains(self, coords):
        return gfp.in_rowspace(np.asarray(coords, dtype=np.int64), self.basis, self.F.p)

    def classes(self):
        return [CohomologyClass(self.F.S, self.F.p, self.n, tuple(int(c) for c in row))
                for row in self.basis]

    def to_dict(self):
        return {'n': self.n, 'dim': self.dim, 'ambient_dim': self.ambient_dim}


def stable_subspace(F, n):
    """Classes z in H^n(S) with res^S_Q(z) = res_phi(z) for all phi in Hom_F(Q, S)."""
    S, p = F.S, F.p
    HS = cohomology_basis(S, p, n)
    blocks = []
    for Q in F.subgroups:
        homs = [phi for phi in F.hom(Q, S) if phi.images != Q.elements]
        if not homs or HS.dim == 0 or cohomology_basis(Q, p, n).dim == 0:
            continue
        incl = restriction_along(gcore.inclusion(Q, S), n, p)
        for phi in homs:
            blocks.append((incl - restriction_along(phi, n, p)) % p)
    if HS.dim == 0:
        basis = np.zeros((0, 0), dtype=np.int64)
    elif blocks:
        K = gfp.left_nullspace(np.hstack(blocks), p)
        basis = gfp.rref(K, p)[0] if len(K) else np.zeros((0, HS.dim), dtype=np.int64)
    else:
        basis = np.eye(HS.dim, dtype=np.int64)
    log.debug("%s: H^%d stable dim %d of %d (%d constraint blocks)",
              F.name, n, len(basis), HS.dim, len(blocks))
    return StableSubspace(F, n, basis, HS.dim)


def dims_table(F, N):
    return [stable_subspace(F, n).dim for n in range(N + 1)]


@dataclass
class StableInclusion:
    n: int
    dim_system: int
    dim_subsystem: int
    holds: bool
    strict: bool

    def to_dict(self):
        return dict(self.__dict__)


def stable_inclusion(Gsys, Fsys, n):
    """Compare H^n(F) <= H^n(G) inside H^n(S) for a subsystem G <= F."""
    sf, sg = stable_subspace(Fsys, n), stable_subspace(Gsys, n)
    holds = all(sg.contains(row) for row in sf.basis)
    return StableInclusion(n, sf.dim, sg.dim, holds, holds and sf.dim < sg.dim)


# ============================================================================
# Frobenius-power probe
# ============================================================================


@dataclass
class ProbeRow:
    index: int
    coords: tuple
    least_r: object = None


@dataclass
class ProbeReport:
    n: int
    rmax: int
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(row.least_r is not None for row in self.rows)

    def to_dict(self):
        return {
            'n': self.n,
            'rmax': self.rmax,
            'passed': self.passed,
            'rows': [{'index': r.index, 'coords': list(r.coords),
                      'least_r': 'none' if r.least_r is None else r.least_r} for r in self.rows],
        }


def mislin_hypothesis_probe(Gsys, Fsys, n, rmax):
    """For each basis class z of H^n(G), the least r <= rmax with z^(p^r) in H^*(F)."""
    if not fusion.is_subsystem(Gsys, Fsys):
        raise ValueError(f"{Gsys.name} is not a subsystem of {Fsys.name}")
    p = Fsys.p
    stable_f = {}
    report = ProbeReport(n, rmax)
    for i, z in enumerate(stable_subspace(Gsys, n).classes()):
        row = ProbeRow(i, z.coords)
        for r in range(rmax + 1):
            d = n * p ** r
            if d not in stable_f:
                stable_f[d] = stable_subspace(Fsys, d)
            if stable_f[d].contains(frobenius_power(z, r).coords):
                row.least_r = r
                break
        report.rows.append(row)
    log.info("probe n=%d rmax=%d: passed=%s", n, rmax, report.passed)
    return report
