"""Semi-infinite lattice construction for disordered ensembles.

An :class:`EnsembleSpec` describes a family of N-level Hamiltonians
``H = H0 + sum_i f_i(lambda_i)`` with independent disorder variables
``lambda_i``.  Expanding over polynomials orthonormal under each disorder
measure turns the continuum of realizations into a single lattice whose nodes
carry a multi-index K = (k_1, ..., k_l): the disorder-free part H0 lands on
every node, a linear coupling ``C * lambda_i`` produces nearest-neighbour
hops ``C * sqrt(beta_{k_i+1})`` along axis i (plus on-node shifts
``C * alpha_{k_i}``), and a degree-d polynomial coupling produces bands of
width d.

The assembled operator is Hermitian and sparse; it is stored as upper-triangle
triplets (:class:`LatticeOperator`) and converted to CSR for propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NotHermitian, QuadratureUnderResolved, TableTooShort
from .measures import DisorderDistribution, RecurrenceTable, gauss_rule, orthonormal_values

__all__ = [
    "LinearCoupling",
    "PolynomialCoupling",
    "TabulatedCoupling",
    "EnsembleSpec",
    "LatticeBasis",
    "LatticeOperator",
    "build_linear",
    "build_general",
    "boundary_shell",
    "save_triplets",
    "load_triplets",
]

HERMITICITY_TOL = 1e-12


def _check_hermitian(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    defect = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if defect > HERMITICITY_TOL:
        raise NotHermitian(f"{name} is not Hermitian (max |A - A^dag| = {defect:.3e})")
    return mat


@dataclass(frozen=True, eq=False)
class LinearCoupling:
    """Disorder enters as ``matrix * lambda``."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_hermitian(self.matrix, "coupling matrix"))

    @property
    def degree(self) -> int:
        return 1


@dataclass(frozen=True, eq=False)
class PolynomialCoupling:
    """Disorder enters as ``sum_d matrices[d] * lambda**d`` (d = 0..degree)."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(_check_hermitian(m, f"polynomial coefficient {d}")
                     for d, m in enumerate(self.matrices))
        if not mats:
            raise ValueError("polynomial coupling needs at least one coefficient matrix")
        object.__setattr__(self, "matrices", mats)

    @property
    def degree(self) -> int:
        return len(self.matrices) - 1


@dataclass(frozen=True, eq=False)
class TabulatedCoupling:
    """Matrix-valued disorder function sampled on a grid, entry-wise.

    Before assembly the samples are fitted with a degree-``fit_degree``
    polynomial (the lattice is only banded for polynomial couplings); the
    maximum fit residual on the grid is reported in the assembled operator's
    ``info``.
    """

    lam: np.ndarray
    values: np.ndarray  # (npoints, N, N)
    fit_degree: int = 8

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if lam.ndim != 1 or vals.shape[0] != lam.size or vals.ndim != 3:
            raise ValueError("need lam (M,) and values (M, N, N)")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("tabulated coupling grid must be strictly increasing")
        for i in range(lam.size):
            _check_hermitian(vals[i], f"tabulated coupling sample {i}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "values", vals)

    @property
    def degree(self) -> int:
        return self.fit_degree

    def fit(self) -> tuple["PolynomialCoupling", float]:
        """Least-squares polynomial fit; returns (coupling, max residual)."""
        deg = min(self.fit_degree, self.lam.size - 1)
        V = np.vander(self.lam, deg + 1, increasing=True)
        flat = self.values.reshape(self.lam.size, -1)
        coef, *_ = np.linalg.lstsq(V, flat, rcond=None)
        resid = float(np.max(np.abs(V @ coef - flat))) if flat.size else 0.0
        n = self.values.shape[1]
        mats = [0.5 * (c.reshape(n, n) + c.reshape(n, n).conj().T) for c in coef]
        return PolynomialCoupling(tuple(mats)), resid


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Ensemble of N-level systems with l independent disorder variables.

    Attributes
    ----------
    h0 : ndarray (N, N)
        Disorder-independent Hermitian part (energy units).
    couplings : tuple
        One coupling (Linear/Polynomial/Tabulated) per disorder variable.
    distributions : tuple of DisorderDistribution
        One measure per disorder variable.
    """

    h0: np.ndarray
    couplings: tuple
    distributions: tuple

    def __post_init__(self):
        object.__setattr__(self, "h0", _check_hermitian(self.h0, "h0"))
        couplings = tuple(self.couplings)
        dists = tuple(self.distributions)
        if len(couplings) < 1:
            raise ValueError("need at least one disorder variable")
        if len(couplings) != len(dists):
            raise DimensionMismatch(
                f"{len(couplings)} couplings vs {len(dists)} distributions")
        n = self.h0.shape[0]
        for i, c in enumerate(couplings):
            mat = c.matrix if isinstance(c, LinearCoupling) else (
                c.matrices[0] if isinstance(c, PolynomialCoupling) else c.values[0])
            if mat.shape != (n, n):
                raise DimensionMismatch(f"coupling {i} has shape {mat.shape}, expected {(n, n)}")
            if not isinstance(dists[i], DisorderDistribution):
                raise TypeError(f"distributions[{i}] is not a DisorderDistribution")
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "distributions", dists)

    @property
    def n(self) -> int:
        """System dimension N."""
        return self.h0.shape[0]

    @property
    def l(self) -> int:
        """Number of disorder variables."""
        return len(self.couplings)

    def hamiltonian(self, lam) -> np.ndarray:
        """Dense H(lambda) for one realization (used by the oracles)."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if lam.size != self.l:
            raise DimensionMismatch(f"expected {self.l} disorder values, got {lam.size}")
        h = self.h0.copy()
        for li, c in zip(lam, self.couplings):
            if isinstance(c, LinearCoupling):
                h = h + li * c.matrix
            elif isinstance(c, PolynomialCoupling):
                for d, m in enumerate(c.matrices):
                    h = h + (li ** d) * m
            else:
                for a in range(self.n):
                    for b in range(self.n):
                        h[a, b] += np.interp(li, c.lam, c.values[:, a, b].real) \
                            + 1j * np.interp(li, c.lam, c.values[:, a, b].imag)
        return h


@dataclass(frozen=True)
class LatticeBasis:
    """Truncated basis |n, K> with K = (k_1..k_l), 0 <= k_i <= depths[i].

    Flat layout is node-major: ``flat = node * N + n`` where ``node`` is the
    row-major raveled multi-index.  The origin K = 0 is node 0.
    """

    n_system: int
    depths: tuple

    def __post_init__(self):
        depths = tuple(int(d) for d in self.depths)
        if self.n_system < 1 or any(d < 0 for d in depths):
            raise ValueError("need n_system >= 1 and depths >= 0")
        object.__setattr__(self, "depths", depths)

    @property
    def l(self) -> int:
        return len(self.depths)

    @property
    def node_count(self) -> int:
        return int(np.prod([d + 1 for d in self.depths]))

    @property
    def size(self) -> int:
        return self.n_system * self.node_count

    @property
    def shape(self) -> tuple:
        """Per-axis node counts (D_i + 1)."""
        return tuple(d + 1 for d in self.depths)

    def node_index(self, multi) -> int:
        return int(np.ravel_multi_index(tuple(int(k) for k in multi), self.shape))

    def flat_index(self, n: int, multi) -> int:
        return self.node_index(multi) * self.n_system + int(n)

    def unflatten(self, flat: int) -> tuple[int, tuple]:
        node, n = divmod(int(flat), self.n_system)
        return n, tuple(int(k) for k in np.unravel_index(node, self.shape))

    def node_multi_indices(self) -> np.ndarray:
        """(node_count, l) array of multi-indices in node order."""
        grids = np.meshgrid(*[np.arange(s) for s in self.shape], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(eq=False)
class LatticeOperator:
    """Sparse Hermitian operator stored as upper-triangle triplets.

    Only entries with ``row <= col`` are stored; the lower triangle is implied
    by Hermitian completion.  ``info`` carries assembly diagnostics (e.g.
    tabulated-coupling fit residuals).
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=complex)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols, vals must have identical shapes")
        if np.any(rows > cols):
            raise ValueError("only the upper triangle (row <= col) may be stored")
        diag = rows == cols
        if np.any(np.abs(vals[diag].imag) > 1e-14):
            raise NotHermitian("diagonal entries must be real to 1e-14")
        self.rows, self.cols, self.vals = rows, cols, vals

    @property
    def nnz(self) -> int:
        return self.vals.size

    def to_csr(self) -> sp.csr_matrix:
        """Hermitian completion as a CSR matrix."""
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.vals, self.vals[off].conj()])
        m = sp.coo_matrix((v, (r, c)), shape=(self.dim, self.dim)).tocsr()
        m.sum_duplicates()
        return m

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()


def _merge_triplets(dim: int, rows, cols, vals, info=None, drop_tol: float = 0.0) -> LatticeOperator:
    """Accumulate-then-merge by (row, col) with summation; fixed ordering."""
    rows = np.concatenate(rows) if rows else np.empty(0, np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0, complex)
    keys = rows * dim + cols
    uniq, inv = np.unique(keys, return_inverse=True)
    merged = np.zeros(uniq.size, dtype=complex)
    np.add.at(merged, inv, vals)
    keep = np.abs(merged) > drop_tol
    uniq, merged = uniq[keep], merged[keep]
    return LatticeOperator(dim, uniq // dim, uniq % dim, merged, info=info or {})


def _require_linear(spec: EnsembleSpec):
    for i, c in enumerate(spec.couplings):
        if not isinstance(c, LinearCoupling):
            raise TypeError(f"coupling {i} is not linear; use build_general")


def _check_tables(spec: EnsembleSpec, tables, min_order):
    tables = tuple(tables)
    if len(tables) != spec.l:
        raise DimensionMismatch(f"{spec.l} disorder variables but {len(tables)} tables")
    for i, (t, need) in enumerate(zip(tables, min_order)):
        if not isinstance(t, RecurrenceTable):
            raise TypeError(f"tables[{i}] is not a RecurrenceTable")
        if t.order < need:
            raise TableTooShort(f"table {i} has order {t.order}, need >= {need}")
    return tables


def build_linear(spec: EnsembleSpec, tables, depths) -> LatticeOperator:
    """Assemble the lattice operator for linear couplings.

    On-node blocks are ``H0 + sum_i alpha_i[k_i] C_i``; the hop block between
    K and K+1_i along axis i is ``sqrt(beta_i[k_i + 1]) C_i``.  Only
    nearest-neighbour inter-node blocks appear, so the operator is a chain for
    l = 1 and an l-dimensional nearest-neighbour lattice in general.

    Parameters
    ----------
    tables : sequence of RecurrenceTable
        One per disorder variable, order >= depth + 1.
    depths : sequence of int
        Truncation depth D_i per axis (k_i = 0..D_i).
    """
    _require_linear(spec)
    depths = tuple(int(d) for d in (depths if np.iterable(depths) else [depths]))
    if len(depths) != spec.l:
        raise DimensionMismatch(f"{spec.l} disorder variables but {len(depths)} depths")
    tables = _check_tables(spec, tables, [d + 1 for d in depths])

    basis = LatticeBasis(spec.n, depths)
    n = spec.n
    multi = basis.node_multi_indices()          # (nodes, l)
    node = np.arange(basis.node_count)
    strides = np.array([int(np.prod(basis.shape[i + 1:])) for i in range(basis.l)])

    rows, cols, vals = [], [], []
    # on-node blocks: upper triangle of H0 + sum_i alpha_i[k_i] C_i per node
    for a in range(n):
        for b in range(a, n):
            per_node = np.full(basis.node_count, spec.h0[a, b], dtype=complex)
            for i, (c, t) in enumerate(zip(spec.couplings, tables)):
                if c.matrix[a, b] != 0:
                    per_node = per_node + c.matrix[a, b] * t.alpha[multi[:, i]]
            nz = per_node != 0
            if np.any(nz):
                rows.append(node[nz] * n + a)
                cols.append(node[nz] * n + b)
                vals.append(per_node[nz])
    # hop blocks along each axis: sqrt(beta[k+1]) C_i between node and node+stride
    for i, (c, t) in enumerate(zip(spec.couplings, tables)):
        if depths[i] == 0:
            continue
        sel = multi[:, i] < depths[i]
        src = node[sel]
        dst = src + strides[i]
        hop = np.sqrt(t.beta[multi[sel, i]])    # beta_{k+1} at index k
        for a in range(n):
            for b in range(n):
                if c.matrix[a, b] != 0:
                    rows.append(src * n + a)
                    cols.append(dst * n + b)
                    vals.append(c.matrix[a, b] * hop)
    return _merge_triplets(basis.size, rows, cols, vals)


def build_general(spec: EnsembleSpec, tables, depths, quad_points: int) -> LatticeOperator:
    """Assemble the lattice operator for polynomial or tabulated couplings.

    Every coupling block ``F_i[k, k'] = int dp_i f_i phi_k phi_k'`` is computed
    by Gauss quadrature built from the recurrence table of axis i, which is
    exact for polynomial couplings whenever ``2*quad_points - 1`` covers the
    integrand degree.  A degree-d coupling yields a banded operator with
    bandwidth d along its axis; entries beyond the band are identically zero
    and not stored.  Tabulated couplings are fitted with a polynomial first
    (residual reported under ``info["tabulated_fit_residual"]``).

    Requires ``quad_points >= depth + degree + 1`` per axis
    (QuadratureUnderResolved otherwise) and table order >= quad_points.
    """
    depths = tuple(int(d) for d in (depths if np.iterable(depths) else [depths]))
    if len(depths) != spec.l:
        raise DimensionMismatch(f"{spec.l} disorder variables but {len(depths)} depths")
    info: dict = {}
    couplings = []
    for i, c in enumerate(spec.couplings):
        if isinstance(c, LinearCoupling):
            zero = np.zeros_like(c.matrix)
            couplings.append(PolynomialCoupling((zero, c.matrix)))
        elif isinstance(c, TabulatedCoupling):
            fitted, resid = c.fit()
            info.setdefault("tabulated_fit_residual", {})[i] = resid
            couplings.append(fitted)
        else:
            couplings.append(c)
    for i, (c, d) in enumerate(zip(couplings, depths)):
        if quad_points < d + c.degree + 1:
            raise QuadratureUnderResolved(
                f"axis {i}: quad_points={quad_points} < depth + degree + 1 = {d + c.degree + 1}")
    tables = _check_tables(spec, tables, [quad_points] * spec.l)

    basis = LatticeBasis(spec.n, depths)
    n = spec.n
    multi = basis.node_multi_indices()
    node = np.arange(basis.node_count)
    strides = np.array([int(np.prod(basis.shape[i + 1:])) for i in range(basis.l)])

    # per-axis coupling blocks F_i[:, :, k, k'] via Gauss quadrature
    blocks = []
    for i, (c, t, d) in enumerate(zip(couplings, tables, depths)):
        x, w = gauss_rule(t, quad_points)
        phi = orthonormal_values(t, x, d)                       # (d+1, Q)
        fvals = np.zeros((n, n, x.size), dtype=complex)
        for dd, m in enumerate(c.matrices):
            fvals += m[:, :, None] * (x ** dd)[None, None, :]
        F = np.einsum("kq,abq,mq->abkm", phi, fvals * w[None, None, :], phi, optimize=True)
        # exact band structure: zero everything beyond |k - k'| > degree
        k1, k2 = np.meshgrid(np.arange(d + 1), np.arange(d + 1), indexing="ij")
        F[:, :, np.abs(k1 - k2) > c.degree] = 0.0
        blocks.append(F)

    rows, cols, vals = [], [], []
    # on-node: H0 + sum_i F_i[k_i, k_i]
    for a in range(n):
        for b in range(a, n):
            per_node = np.full(basis.node_count, spec.h0[a, b], dtype=complex)
            for i, F in enumerate(blocks):
                per_node = per_node + F[a, b, multi[:, i], multi[:, i]]
            nz = per_node != 0
            if np.any(nz):
                rows.append(node[nz] * n + a)
                cols.append(node[nz] * n + b)
                vals.append(per_node[nz])
    # inter-node bands along each axis, offsets 1..degree
    for i, (c, F) in enumerate(zip(couplings, blocks)):
        for off in range(1, min(c.degree, depths[i]) + 1):
            sel = multi[:, i] + off <= depths[i]
            src = node[sel]
            dst = src + off * strides[i]
            fk = F[:, :, multi[sel, i], multi[sel, i] + off]    # (n, n, nsel)
            for a in range(n):
                for b in range(n):
                    v = fk[a, b]
                    nz = v != 0
                    if np.any(nz):
                        rows.append(src[nz] * n + a)
                        cols.append(dst[nz] * n + b)
                        vals.append(v[nz])
    return _merge_triplets(basis.size, rows, cols, vals, info=info)


def boundary_shell(basis: LatticeBasis, width: int = 1) -> np.ndarray:
    """Flat indices of all states whose multi-index has any k_i > D_i - width.

    The population on this shell is the truncation-leakage monitor used by the
    propagator.
    """
    if width < 1 or width > min(basis.depths):
        raise ValueError(f"width must be in [1, {min(basis.depths)}]")
    multi = basis.node_multi_indices()
    shell = np.zeros(basis.node_count, dtype=bool)
    for i, d in enumerate(basis.depths):
        shell |= multi[:, i] > d - width
    nodes = np.where(shell)[0]
    return (nodes[:, None] * basis.n_system + np.arange(basis.n_system)[None, :]).ravel()


def save_triplets(op: LatticeOperator, path) -> None:
    """Dump as text: header ``dim nnz``, then ``row col re im`` per line."""
    with open(path, "w") as fh:
        fh.write(f"{op.dim} {op.nnz}\n")
        for r, c, v in zip(op.rows, op.cols, op.vals):
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")


def load_triplets(path) -> LatticeOperator:
    """Inverse of :func:`save_triplets`."""
    with open(path) as fh:
        dim, nnz = (int(tok) for tok in fh.readline().split())
        rows = np.empty(nnz, np.int64)
        cols = np.empty(nnz, np.int64)
        vals = np.empty(nnz, complex)
        for i in range(nnz):
            r, c, re, im = fh.readline().split()
            rows[i], cols[i], vals[i] = int(r), int(c), complex(float(re), float(im))
    return LatticeOperator(dim, rows, cols, vals)
