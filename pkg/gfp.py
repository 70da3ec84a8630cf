"""
Linear algebra over the prime field GF(p).

Dense helpers (rref, nullspace, solve) work on small int64 matrices. RowSpace
is the incremental eliminator used for bar-complex differentials: rows
arrive as sparse batches and the basis is kept in reduced row echelon form,
so reducing a new row only touches the basis rows of its own support.
"""

import os

import numpy as np

import mylog
import settings

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))


def mod_p(A, p):
    return np.asarray(A, dtype=np.int64) % p


def inv_mod(a, p):
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


def rref(A, p):
    """Reduced row echelon form over GF(p).

    Returns (R, pivots): R holds only the nonzero rows, pivots their leading
    columns in increasing order. Pivot choice is always the leftmost column,
    so the result is canonical for the row space.
    """
    M = mod_p(A, p).copy()
    if M.ndim != 2:
        raise ValueError("rref needs a 2-d matrix")
    rows = M.shape[0]
    pivots = []
    r = 0
    while r < rows:
        live = np.flatnonzero(M[r:].any(axis=0))
        if live.size == 0:
            break
        c = int(live[0])
        i = r + int(np.flatnonzero(M[r:, c])[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * inv_mod(M[r, c], p)) % p
        col = M[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            M[hit] = (M[hit] - np.outer(col[hit], M[r])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(A, p):
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace_from_rref(R, pivots, ncols, p):
    """Rows spanning {x : R x = 0}, one per free column (x_free = e_f)."""
    free = np.setdiff1d(np.arange(ncols), np.asarray(pivots, dtype=np.int64))
    N = np.zeros((free.size, ncols), dtype=np.int64)
    N[np.arange(free.size), free] = 1
    if len(pivots):
        N[:, pivots] = (-np.asarray(R, dtype=np.int64)[:, free].T) % p
    return N


def nullspace(A, p):
    """Basis (as rows) of the right kernel of A."""
    A = mod_p(A, p)
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots = rref(A, p)
    return nullspace_from_rref(R, pivots, ncols, p)


def left_nullspace(A, p):
    """Rows y with y A = 0."""
    return nullspace(mod_p(A, p).T, p)


def intersect_rowspaces(A, B, p):
    """Basis of rowspace(A) ∩ rowspace(B), as rows."""
    A, B = mod_p(A, p), mod_p(B, p)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, A.shape[1] if A.ndim == 2 else B.shape[1]), dtype=np.int64)
    # y A = z B  <=>  [y z] [A; -B] = 0
    K = left_nullspace(np.vstack([A, (-B) % p]), p)
    V = (K[:, :A.shape[0]] @ A) % p
    R, _ = rref(V, p)
    return R


def in_rowspace(v, A, p):
    A = mod_p(A, p)
    if A.shape[0] == 0:
        return not np.any(mod_p(v, p))
    return rank(np.vstack([A, mod_p(v, p)]), p) == rank(A, p)


def solve(A, b, p):
    """One solution x of x A = b (row convention), or None."""
    A = mod_p(A, p)
    b = mod_p(b, p).reshape(1, -1)
    k = A.shape[0]
    if k == 0:
        return np.zeros(0, dtype=np.int64) if not b.any() else None
    # kernel of [A; -b] with last coordinate 1
    K = left_nullspace(np.vstack([A, (-b) % p]), p)
    for row in K:
        if row[k] % p:
            return (row[:k] * inv_mod(row[k], p)) % p
    return None


class RowSpace:
    """Row space of a matrix fed in sparse batches, kept in RREF.

    The basis lives in a float array so the merge step can use BLAS; all
    entries stay exact integers in [0, p).
    """

    def __init__(self, ncols, p):
        self.ncols = ncols
        self.p = p
        self.batch_rows = settings.current().batch_rows
        exact32 = max(self.batch_rows, ncols) * (p - 1) ** 2 < 2 ** 24
        self.dtype = np.float32 if exact32 else np.float64
        self._E = np.zeros((min(ncols, 16), ncols), dtype=self.dtype)
        self.rank = 0
        self.where = np.full(ncols, -1, dtype=np.int64)  # column -> basis row

    @property
    def basis(self):
        return self._E[:self.rank]

    @property
    def pivots(self):
        return np.flatnonzero(self.where >= 0)

    def add_coo(self, rows, cols, vals, nrows):
        """Add the rows of a COO matrix (nrows x ncols), batch by batch."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64) % self.p
        order = np.argsort(rows, kind='stable')
        rows, cols, vals = rows[order], cols[order], vals[order]
        bounds = np.searchsorted(rows, np.arange(0, nrows + self.batch_rows, self.batch_rows))
        for lo_row in range(0, nrows, self.batch_rows):
            b = lo_row // self.batch_rows
            lo, hi = bounds[b], bounds[b + 1]
            if lo == hi:
                continue
            if self.rank == self.ncols:
                break
            B = np.zeros((self.batch_rows, self.ncols), dtype=self.dtype)
            np.add.at(B, (rows[lo:hi] - lo_row, cols[lo:hi]), vals[lo:hi].astype(self.dtype))
            self._absorb(np.mod(B, self.p))

    def add_dense(self, B):
        B = np.mod(np.asarray(B, dtype=self.dtype), self.p)
        for lo in range(0, B.shape[0], self.batch_rows):
            if self.rank == self.ncols:
                break
            self._absorb(B[lo:lo + self.batch_rows].copy())

    def reduce(self, V):
        """V minus its projection on the basis; zero on every pivot column."""
        V = np.mod(np.asarray(V, dtype=self.dtype), self.p)
        if self.rank == 0:
            return V.astype(np.int64)
        piv = self.pivots
        rows_of = self.where[piv]
        R = V - V[..., piv] @ self._E[rows_of]
        return np.mod(R, self.p).astype(np.int64)

    def _absorb(self, B):
        p = self.p
        if self.rank:
            piv_mask = self.where >= 0
            ri, ci = np.nonzero(B[:, piv_mask])
            if ri.size:
                cols = np.flatnonzero(piv_mask)[ci]
                coef = B[ri, cols]
                contrib = coef[:, None] * self._E[self.where[cols]]
                # np.nonzero is row-major, so ri is already grouped
                hit, starts = np.unique(ri, return_index=True)
                B[hit] -= np.add.reduceat(contrib, starts, axis=0)
                B = np.mod(B, p)
        live = B.any(axis=1)
        if not live.any():
            return
        R, new_piv = rref(B[live].astype(np.int64), p)
        R = R.astype(self.dtype)
        if self.rank:
            F = self._E[:self.rank][:, new_piv]
            if F.any():
                self._E[:self.rank] = np.mod(self._E[:self.rank] - F @ R, p)
        self._grow(self.rank + len(new_piv))
        self._E[self.rank:self.rank + len(new_piv)] = R
        self.where[new_piv] = np.arange(self.rank, self.rank + len(new_piv))
        self.rank += len(new_piv)

    def _grow(self, need):
        cap = self._E.shape[0]
        if need <= cap:
            return
        cap = min(self.ncols, max(need, 2 * cap))
        E = np.zeros((cap, self.ncols), dtype=self.dtype)
        E[:self.rank] = self._E[:self.rank]
        self._E = E

    def rref(self):
        """(R, pivots) with rows sorted by pivot column, as int64."""
        piv = self.pivots
        return self._E[self.where[piv]].astype(np.int64), [int(c) for c in piv]

    def kernel(self):
        """Rows spanning the right kernel of the matrix added so far."""
        piv = self.pivots
        free = np.setdiff1d(np.arange(self.ncols), piv)
        N = np.zeros((free.size, self.ncols), dtype=np.int64)
        N[np.arange(free.size), free] = 1
        if piv.size and free.size:
            # free columns only
            block = self._E[self.where[piv][:, None], free[None, :]]
            N[:, piv] = (-block.T.astype(np.int64)) % self.p
        return N
