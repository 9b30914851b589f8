"""Initial lattice wavefunctions for the ensemble.

The ensemble state |Psi_0> = int dlam sqrt(p(lam)) |psi_0(lam), lam> expands
over the lattice basis with coefficients

    d_{n,K} = int dlam p(lam) phi_K(lam) c_n(lam),

where c_n(lam) are the per-realization amplitudes.  A disorder-independent
initial state collapses to the single origin node K = 0
(:func:`localized_initial`); a disorder-dependent one spreads over K and is
computed by quadrature (:func:`expanded_initial`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NormDefectExceeded, NotNormalized
from .lattice import LatticeBasis
from .measures import (
    DisorderDistribution,
    RecurrenceTable,
    discretize,
    orthonormal_values,
    recurrence_table,
)

__all__ = [
    "LatticeState",
    "localized_initial",
    "expanded_initial",
    "spectral_disorder_initial",
]


@dataclass(eq=False)
class LatticeState:
    """Wavefunction over a truncated lattice basis.

    Amplitudes are indexed by the basis flat layout (node-major).  States
    produced by the constructors below are normalized to 1 within 1e-10,
    except for truncated expansions, whose norm defect is the truncation
    diagnostic reported in ``info["norm_defect"]``.
    """

    basis: LatticeBasis
    amplitudes: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise DimensionMismatch(
                f"amplitudes have shape {amps.shape}, basis size is {self.basis.size}")
        self.amplitudes = amps

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def node_amplitudes(self) -> np.ndarray:
        """Amplitudes reshaped to (node_count, N)."""
        return self.amplitudes.reshape(self.basis.node_count, self.basis.n_system)


def localized_initial(c, basis: LatticeBasis) -> LatticeState:
    """State with amplitudes c_n on the origin node (n, K = 0), zero elsewhere.

    This is the lattice image of any disorder-independent initial state; the
    whole ensemble sits on the single node at the origin.  Requires ||c|| = 1
    within 1e-10 (NotNormalized otherwise).
    """
    c = np.asarray(c, dtype=complex)
    if c.shape != (basis.n_system,):
        raise DimensionMismatch(f"c has shape {c.shape}, expected ({basis.n_system},)")
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise NotNormalized(f"||c|| = {np.linalg.norm(c)!r}, expected 1 within 1e-10")
    amps = np.zeros(basis.size, dtype=complex)
    amps[: basis.n_system] = c      # node 0 is K = 0
    return LatticeState(basis, amps)


def expanded_initial(c_fn, dists, tables, basis: LatticeBasis,
                     quad_points: int | None = None, *,
                     warn_defect: float = 1e-8,
                     max_defect: float = 1e-6) -> LatticeState:
    """Expand a disorder-dependent initial state over the lattice basis.

    Parameters
    ----------
    c_fn : callable
        Per-realization amplitudes.  Called as ``c_fn(lam)`` with an (M, l)
        array of disorder points, expected to return an (M, N) complex array;
        a scalar signature ``c_fn(lam_vector) -> (N,)`` also works (detected
        and looped over).  Each row must be normalized (the norm check happens
        globally via the Parseval defect).
    dists, tables : sequences, one per disorder variable
        The measures (for the quadrature grid) and their recurrence tables
        (for the orthonormal polynomial values).
    quad_points : int, optional
        Quadrature points per axis; default ``max(4*(D+1), 1000)``.

    The Parseval norm defect ``|sum |d|^2 - 1|`` measures exactly the weight
    lost to the K-truncation (plus quadrature error); it is reported in
    ``info["norm_defect"]``, warned about above `warn_defect` and raised as
    NormDefectExceeded above `max_defect`.
    """
    dists = tuple(dists)
    tables = tuple(tables)
    if len(dists) != basis.l or len(tables) != basis.l:
        raise DimensionMismatch(
            f"basis has {basis.l} axes; got {len(dists)} distributions, {len(tables)} tables")

    # per-axis quadrature grids and orthonormal polynomial values
    axes = []
    for dist, table, depth in zip(dists, tables, basis.depths):
        npts = quad_points if quad_points is not None else max(4 * (depth + 1), 1000)
        x, w = discretize(dist, npts)
        phi = orthonormal_values(table, x, depth)    # (D+1, M_i)
        axes.append((x, w, phi))

    # evaluate c on the tensor grid
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)          # (M, l)
    cvals = _eval_c(c_fn, pts, basis.n_system)                  # (M, l) -> (M, N)

    # d_{n,K} = sum_q (prod_i w_i phi_{k_i}) c_n(q): contract one axis at a time
    shape = tuple(a[0].size for a in axes)
    work = cvals.reshape(shape + (basis.n_system,))
    for x, w, phi in axes:
        # fold quadrature weight into the polynomial matrix, contract axis 0
        work = np.tensordot(phi * w[None, :], work, axes=([1], [0]))
        # park the new k_i axis just before N; K axes accumulate in reverse
        work = np.moveaxis(work, 0, len(shape) - 1)
        shape = shape[1:]
    work = work.transpose(*range(basis.l - 1, -1, -1), basis.l)
    # shape (D_1+1, ..., D_l+1, N): flatten node-major (row-major multi-index)
    d = work.reshape(basis.node_count, basis.n_system).reshape(-1)

    defect = abs(float(np.sum(np.abs(d) ** 2)) - 1.0)
    if defect > max_defect:
        raise NormDefectExceeded(
            f"norm defect {defect:.3e} > {max_defect:.1e}: "
            "increase the truncation depth or quadrature resolution")
    if defect > warn_defect:
        warnings.warn(f"initial-state norm defect {defect:.3e}", stacklevel=2)
    return LatticeState(basis, d, info={"norm_defect": defect})


def _eval_c(c_fn, pts: np.ndarray, n: int) -> np.ndarray:
    """Evaluate c_fn on (M, l) points, accepting vectorized or scalar callables."""
    try:
        out = np.asarray(c_fn(pts), dtype=complex)
        if out.shape == (pts.shape[0], n):
            return out
    except Exception:
        pass
    out = np.empty((pts.shape[0], n), dtype=complex)
    for i, p in enumerate(pts):
        out[i] = np.asarray(c_fn(p), dtype=complex).reshape(n)
    return out


def spectral_disorder_initial(energy_dist: DisorderDistribution, basis: LatticeBasis,
                              c, order: int | None = None,
                              grid_points: int | None = None
                              ) -> tuple[LatticeState, RecurrenceTable]:
    """Initial state and chain table for an ensemble of stationary states.

    When every realization sits in an eigenstate, only the eigenenergy
    distribution matters: the caller supplies the induced energy measure
    (tabulated is typical) and the chain is built from *its* recurrence
    coefficients, with the K = 0-localized state carrying the amplitudes
    ``c``.  Dynamics then reproduce eigenstate-ensemble dephasing with the
    same machinery as any other diagonal-disorder model.

    Returns the localized state together with the energy-measure table (order
    defaults to depth + 1).  Raises as :func:`measures.recurrence_stieltjes`
    for measures needing a cutoff.
    """
    if basis.l != 1:
        raise DimensionMismatch("spectral disorder uses a single energy variable (l = 1)")
    if order is None:
        order = basis.depths[0] + 1
    table = recurrence_table(energy_dist, order, grid_points)
    return localized_initial(c, basis), table
