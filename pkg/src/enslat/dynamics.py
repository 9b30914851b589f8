"""Exact time propagation of lattice states.

The operator is large, sparse and Hermitian, so states are advanced with
short-iterate Krylov exponentiation: a Lanczos basis of modest dimension is
built per substep and the small tridiagonal projection is exponentiated
exactly.  The substep is halved adaptively until the a-posteriori error
estimate (the weight leaking past the last Krylov vector) meets the step
tolerance, which preserves the norm to the same order and makes the result
insensitive to the substep partition.

Truncation error of the finite lattice is monitored separately, as the
population of the boundary shell; once the wavefront reaches the boundary the
dynamics are no longer those of the semi-infinite lattice, so crossing the
leakage threshold raises :class:`~enslat.errors.LeakageExceeded`.
:func:`auto_depth` turns that monitor into a depth-selection loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import DepthCapExceeded, KrylovBreakdown, LeakageExceeded
from .lattice import LatticeBasis, LatticeOperator, boundary_shell, build_general, build_linear
from .lattice import LinearCoupling
from .measures import recurrence_table
from .reduction import partial_trace
from .states import LatticeState

__all__ = [
    "PropagationPlan",
    "LeakageReport",
    "propagate",
    "evolve",
    "propagate_dense",
    "auto_depth",
]


@dataclass(frozen=True)
class PropagationPlan:
    """Time grid and numerical controls for one propagation run.

    ``times`` must be strictly increasing and start at 0; ``tol`` is the
    per-output-step local error budget.
    """

    times: np.ndarray
    tol: float = 1e-12
    max_krylov_dim: int = 30
    leakage_threshold: float = 1e-8
    leakage_width: int = 1

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 1:
            raise ValueError("times must be a 1-D grid")
        if times[0] != 0.0:
            raise ValueError("times must start at 0")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_krylov_dim < 2:
            raise ValueError("max_krylov_dim must be >= 2")
        object.__setattr__(self, "times", times)

    @classmethod
    def linspace(cls, t_max: float, n_steps: int, **kw) -> "PropagationPlan":
        return cls(np.linspace(0.0, t_max, n_steps), **kw)


@dataclass
class LeakageReport:
    """Boundary-shell population along the trajectory."""

    times: np.ndarray
    leakage: np.ndarray
    threshold: float
    width: int

    @property
    def max_leakage(self) -> float:
        return float(np.max(self.leakage)) if self.leakage.size else 0.0

    @property
    def exceeded(self) -> bool:
        return self.max_leakage > self.threshold


def _as_csr(h) -> sp.csr_matrix:
    if isinstance(h, LatticeOperator):
        return h.to_csr()
    return sp.csr_matrix(h)


def evolve(h, psi: np.ndarray, dt: float, tol: float = 1e-12,
           max_krylov_dim: int = 30) -> np.ndarray:
    """Apply exp(-i H dt) to a vector (dt of either sign); adaptive Lanczos.

    Low-level kernel behind :func:`propagate`; returns a new vector.
    """
    csr = _as_csr(h)
    work = np.empty((max_krylov_dim, psi.size), dtype=complex)
    return _expm_krylov(csr, np.asarray(psi, dtype=complex), dt, tol,
                        max_krylov_dim, work)


def _small_expm(alph, bet, used, tau):
    """x = exp(-i tau T) e1 for the tridiagonal Krylov projection T."""
    evals, evecs = eigh_tridiagonal(alph[:used], bet[:used - 1])
    return evecs @ (np.exp(-1j * tau * evals) * evecs[0])


def _expm_krylov(csr, v, dt, tol, m, work) -> np.ndarray:
    """exp(-i H dt) v with substep adaptivity; |dt| may be subdivided.

    The Lanczos basis grows until the a-posteriori error estimate (weight
    pushed past the last basis vector) meets the budget; if the full basis is
    not enough the substep is halved.  Error checks run at checkpoints: the
    small exponential costs microseconds against matvecs on the full space.
    """
    total = abs(dt)
    if total == 0.0:
        return v.copy()
    sign = 1.0 if dt >= 0 else -1.0
    remaining = total
    out = v
    while remaining > 0.0:
        sub = remaining
        while True:
            nrm = np.linalg.norm(out)
            if nrm == 0.0:
                return out
            budget = tol * (sub / total)
            work[0] = out / nrm
            alph = np.zeros(m)
            bet = np.zeros(m)
            w = csr @ work[0]
            alph[0] = np.vdot(work[0], w).real
            w -= alph[0] * work[0]
            used = 1
            happy = False
            small = None
            for j in range(1, m):
                b = np.linalg.norm(w)
                if not np.isfinite(b):
                    raise KrylovBreakdown("non-finite Krylov iterate")
                if b < 1e-14:
                    happy = True   # Krylov space is invariant: result exact
                    break
                bet[j - 1] = b
                work[j] = w / b
                w = csr @ work[j]
                w -= b * work[j - 1]
                alph[j] = np.vdot(work[j], w).real
                w -= alph[j] * work[j]
                used = j + 1
                if used >= 6 and (used % 4 == 0 or used == m):
                    x = _small_expm(alph, bet, used, sign * sub)
                    if bet[used - 2] * abs(x[-1]) * sub <= budget:
                        small = x
                        break
            if small is None:
                small = _small_expm(alph, bet, used, sign * sub)
                err = 0.0 if (happy or used < 2) else bet[used - 2] * abs(small[-1]) * sub
                if not (happy or err <= budget):
                    sub /= 2.0
                    if sub < 1e-300:
                        raise KrylovBreakdown("substep underflow; operator may be ill-formed")
                    continue
            out = nrm * (work[:used].T @ small)
            break
        remaining -= sub
    return out


def propagate(h, psi0: LatticeState, plan: PropagationPlan
              ) -> tuple[list[LatticeState], LeakageReport]:
    """Propagate psi0 over the plan's time grid under the lattice operator.

    Returns the states psi(t_j) = exp(-i H t_j) psi0 together with a
    :class:`LeakageReport` of the boundary-shell population at each grid
    time.  The norm is preserved to the propagator tolerance (the evolution
    is unitary; leakage is *monitored*, not absorbed).

    Raises
    ------
    LeakageExceeded
        When the shell population crosses ``plan.leakage_threshold``; the
        exception carries the partial trajectory and report.
    """
    basis = psi0.basis
    csr = _as_csr(h)
    if csr.shape[0] != basis.size:
        raise ValueError(f"operator dim {csr.shape[0]} != basis size {basis.size}")
    shell = boundary_shell(basis, plan.leakage_width)
    work = np.empty((plan.max_krylov_dim, basis.size), dtype=complex)

    states: list[LatticeState] = []
    leak = np.zeros(plan.times.size)
    cur = psi0.amplitudes.astype(complex)
    t_prev = 0.0
    for j, t in enumerate(plan.times):
        if t > t_prev:
            cur = _expm_krylov(csr, cur, t - t_prev, plan.tol, plan.max_krylov_dim, work)
        t_prev = t
        leak[j] = float(np.sum(np.abs(cur[shell]) ** 2))
        states.append(LatticeState(basis, cur.copy()))
        if leak[j] > plan.leakage_threshold:
            report = LeakageReport(plan.times[: j + 1], leak[: j + 1],
                                   plan.leakage_threshold, plan.leakage_width)
            raise LeakageExceeded(
                f"boundary-shell population {leak[j]:.3e} > {plan.leakage_threshold:.1e} "
                f"at t = {t:g}: lattice depth too small for this horizon",
                time=t, leakage=leak[j], states=states, report=report)
    report = LeakageReport(plan.times.copy(), leak, plan.leakage_threshold,
                           plan.leakage_width)
    return states, report


def propagate_dense(h, psi0: LatticeState, times) -> list[LatticeState]:
    """Reference path: exact evolution by dense eigendecomposition.

    Cross-check for the Krylov propagator; refuses dimensions above 2000.
    """
    basis = psi0.basis
    hd = h.to_dense() if isinstance(h, LatticeOperator) else np.asarray(h)
    if hd.shape[0] > 2000:
        raise ValueError("dense path limited to dimension <= 2000")
    evals, vecs = eigh(hd)
    c0 = vecs.conj().T @ psi0.amplitudes
    return [LatticeState(basis, vecs @ (np.exp(-1j * evals * t) * c0))
            for t in np.asarray(times, dtype=float)]


def auto_depth(spec, psi0_builder, horizon: float, plan: PropagationPlan | None = None,
               *, start: int = 16, cap: int = 4096, quad_points=None,
               table_builder=None, grid_points=None) -> tuple:
    """Choose truncation depths by doubling until the dynamics are stable.

    Per-dimension depth starts at `start` and doubles until (a) the final-time
    boundary leakage is below the plan threshold and (b) the reduced density
    matrix at the horizon changes by less than ``10 * plan.tol`` in max entry
    between successive depths.  Convergence-by-doubling is its own oracle: the
    accepted depth is returned, not the trajectory.

    Parameters
    ----------
    psi0_builder : callable
        ``basis -> LatticeState`` (e.g. a localized_initial closure).
    table_builder : callable, optional
        ``(axis_index, order) -> RecurrenceTable``; defaults to
        :func:`~enslat.measures.recurrence_table` on the ensemble's
        distributions.
    quad_points : callable or int, optional
        When set, assembly goes through :func:`build_general` with this
        quadrature order (an int, or a callable of the current depth).

    Raises
    ------
    DepthCapExceeded
        If the cap is reached without satisfying both criteria.
    """
    if plan is None:
        plan = PropagationPlan(np.array([0.0, float(horizon)]))
    else:
        plan = PropagationPlan(np.array([0.0, float(horizon)]), tol=plan.tol,
                               max_krylov_dim=plan.max_krylov_dim,
                               leakage_threshold=plan.leakage_threshold,
                               leakage_width=plan.leakage_width)
    if table_builder is None:
        def table_builder(i, order):
            return recurrence_table(spec.distributions[i], order, grid_points)

    prev_rho = None
    depth = start
    while depth <= cap:
        depths = tuple([depth] * spec.l)
        basis = LatticeBasis(spec.n, depths)
        if quad_points is None and all(isinstance(c, LinearCoupling) for c in spec.couplings):
            tables = [table_builder(i, depth + 1) for i in range(spec.l)]
            op = build_linear(spec, tables, depths)
        else:
            qp = quad_points(depth) if callable(quad_points) else quad_points
            if qp is None:
                qp = depth + 1 + max(getattr(c, "degree", 1) for c in spec.couplings)
            tables = [table_builder(i, qp) for i in range(spec.l)]
            op = build_general(spec, tables, depths, qp)
        psi0 = psi0_builder(basis)
        try:
            states, report = propagate(op, psi0, plan)
        except LeakageExceeded:
            prev_rho = None
            depth *= 2
            continue
        if report.leakage[-1] == 0.0:
            return depths          # nothing reached the boundary: no transport
        rho = partial_trace(states[-1])
        if prev_rho is not None and np.max(np.abs(rho - prev_rho)) < 10 * plan.tol:
            return depths
        prev_rho = rho
        depth *= 2
    raise DepthCapExceeded(f"no stable depth found up to cap {cap}")
