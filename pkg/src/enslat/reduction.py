"""Disorder-averaged quantities from lattice states.

Tracing out the lattice index recovers the ensemble-averaged density matrix:
rho_{nm} = sum_K psi_{n,K} psi*_{m,K}.  Coherence between different lattice
nodes is invisible to the trace; that loss is the geometric picture of
ensemble dephasing, with strictly unitary global dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian
from .states import LatticeState

__all__ = [
    "DensityTrajectory",
    "partial_trace",
    "observable_average",
    "coherence_trace",
    "trajectory_from_states",
]


@dataclass(eq=False)
class DensityTrajectory:
    """Time grid plus N x N density matrices, with optional per-entry errors.

    ``errors`` holds the standard error of the mean per entry for Monte Carlo
    results and is absent (None) for deterministic ones.  ``info`` carries
    method metadata.
    """

    times: np.ndarray
    rho: np.ndarray            # (T, N, N) complex
    errors: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.ndim != 3 or self.rho.shape[0] != self.times.size \
                or self.rho.shape[1] != self.rho.shape[2]:
            raise ValueError("rho must have shape (len(times), N, N)")
        if self.errors is not None:
            self.errors = np.asarray(self.errors, dtype=float)
            if self.errors.shape != self.rho.shape:
                raise ValueError("errors must match rho's shape")

    @property
    def n(self) -> int:
        return self.rho.shape[1]

    def entry(self, a: int, b: int) -> np.ndarray:
        """Time series of one density-matrix entry."""
        return self.rho[:, a, b]

    def populations(self) -> np.ndarray:
        """(T, N) real diagonal entries."""
        return np.real(np.einsum("tnn->tn", self.rho))

    def validate(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                 psd_tol: float = 1e-10) -> None:
        """Assert Hermiticity, unit trace and positive semidefiniteness."""
        herm = np.max(np.abs(self.rho - self.rho.conj().transpose(0, 2, 1)))
        if herm > herm_tol:
            raise NotHermitian(f"max |rho - rho^dag| = {herm:.3e}")
        tr = np.einsum("tnn->t", self.rho)
        if np.max(np.abs(tr - 1.0)) > trace_tol:
            raise ValueError(f"max |trace - 1| = {np.max(np.abs(tr - 1.0)):.3e}")
        eigs = np.linalg.eigvalsh(self.rho)
        if eigs.min() < -psd_tol:
            raise ValueError(f"negative eigenvalue {eigs.min():.3e}")


def partial_trace(state: LatticeState) -> np.ndarray:
    """Average density matrix: rho_{nm} = sum_K psi_{n,K} psi*_{m,K}.

    The sum runs over the truncated K range only; the propagator's leakage
    report quantifies the omitted tail.  The result is Hermitized (averaged
    with its adjoint) to scrub float-roundoff asymmetry.
    """
    a = state.node_amplitudes()
    rho = a.T @ a.conj()
    return 0.5 * (rho + rho.conj().T)


def observable_average(state: LatticeState, observable: np.ndarray) -> float:
    """Disorder-averaged expectation value trace(O rho).

    Raises NotHermitian unless O is Hermitian to 1e-12.
    """
    o = np.asarray(observable, dtype=complex)
    if np.max(np.abs(o - o.conj().T)) > 1e-12:
        raise NotHermitian("observable must be Hermitian")
    return float(np.trace(o @ partial_trace(state)).real)


def coherence_trace(states, a: int, b: int) -> np.ndarray:
    """Time series rho_{ab}(t) over a list of lattice states (a != b)."""
    if a == b:
        raise ValueError("coherence_trace needs two different levels; "
                         "use DensityTrajectory.populations for diagonals")
    return np.array([partial_trace(s)[a, b] for s in states])


def trajectory_from_states(times, states, **info) -> DensityTrajectory:
    """Bundle propagated states into a DensityTrajectory (no error bars)."""
    rho = np.array([partial_trace(s) for s in states])
    return DensityTrajectory(np.asarray(times, float), rho, info=dict(info))
