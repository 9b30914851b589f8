"""Independent reference computations for cross-validation.

Three routes to the disorder-averaged density matrix that never touch the
lattice machinery:

* :func:`mc_average` samples realizations and evolves each one exactly by
  dense eigendecomposition (with per-entry standard errors);
* :func:`quad_average` replaces random samples with tensor-product Gauss
  nodes of the disorder measures (deterministic, spectrally convergent);
* :func:`analytic_qubit` is the closed form for the dephasing qubit, where
  the coherence is the characteristic function of the disorder.

:func:`chain_to_ensemble` is the reverse map: a constant-coupling
semi-infinite lattice is the chain image of semicircle-distributed disorder,
so lattice dynamics can be reproduced by averaging over an ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized, SystemTooLarge, TableTooShort
from .lattice import EnsembleSpec, LinearCoupling
from .measures import (
    DisorderDistribution,
    RecurrenceTable,
    characteristic_function,
    gauss_rule,
    quantile,
    recurrence_table,
)
from .reduction import DensityTrajectory

__all__ = [
    "OracleConfig",
    "gauss_nodes",
    "mc_average",
    "quad_average",
    "analytic_qubit",
    "chain_to_ensemble",
]

_MAX_DENSE_N = 64
_CHUNK = 4096       # fixed chunk size keeps the summation order reproducible


@dataclass(frozen=True)
class OracleConfig:
    """Controls for the oracle routes.

    ``seed`` keys the counter-based per-sample random streams, so mc_average
    output is bitwise reproducible and independent of execution order.
    """

    samples: int = 10_000
    seed: int = 0
    quad_order: int = 40
    method: str = "mc"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.quad_order < 1:
            raise ValueError("quad_order must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


def gauss_nodes(table: RecurrenceTable, order: int):
    """Gauss nodes and weights of the measure behind a recurrence table.

    Golub-Welsch construction; weights sum to one.  Raises TableTooShort when
    the table cannot support the requested order.
    """
    if order > table.order:
        raise TableTooShort(f"order {order} exceeds table order {table.order}")
    return gauss_rule(table, order)


# ---------------------------------------------------------------------------
# dense per-realization evolution
# ---------------------------------------------------------------------------

def _resolve_c(c_fn, lam: np.ndarray, n: int) -> np.ndarray:
    """Per-realization initial amplitudes for a (B, l) batch of draws."""
    if c_fn is None:
        raise ValueError("an initial state (vector or callable) is required")
    if not callable(c_fn):
        c = np.asarray(c_fn, dtype=complex).reshape(n)
        return np.broadcast_to(c, (lam.shape[0], n)).copy()
    try:
        out = np.asarray(c_fn(lam), dtype=complex)
        if out.shape == (lam.shape[0], n):
            return out
    except Exception:
        pass
    out = np.empty((lam.shape[0], n), dtype=complex)
    for i, p in enumerate(lam):
        out[i] = np.asarray(c_fn(p), dtype=complex).reshape(n)
    return out


def _hamiltonian_batch(spec: EnsembleSpec, lam: np.ndarray) -> np.ndarray:
    """H(lambda) for a (B, l) batch of draws, vectorized per coupling."""
    b = lam.shape[0]
    h = np.broadcast_to(spec.h0, (b, spec.n, spec.n)).astype(complex).copy()
    for i, c in enumerate(spec.couplings):
        li = lam[:, i]
        if isinstance(c, LinearCoupling):
            h += li[:, None, None] * c.matrix
        elif hasattr(c, "matrices"):
            for d, m in enumerate(c.matrices):
                h += (li ** d)[:, None, None] * m
        else:
            for a in range(spec.n):
                for bb in range(spec.n):
                    h[:, a, bb] += np.interp(li, c.lam, c.values[:, a, bb].real) \
                        + 1j * np.interp(li, c.lam, c.values[:, a, bb].imag)
    return h


def _evolve_batch(hb: np.ndarray, c0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """rho_lambda(t) for a batch: (B, N, N), (B, N) -> (B, T, N, N)."""
    evals, vecs = np.linalg.eigh(hb)
    ceig = np.einsum("bmn,bm->bn", vecs.conj(), c0)
    phases = np.exp(-1j * evals[:, None, :] * times[None, :, None])     # (B,T,N)
    amps = np.einsum("bnm,btm->btn", vecs, phases * ceig[:, None, :])
    return amps[..., :, None] * amps[..., None, :].conj()


def mc_average(spec: EnsembleSpec, c_fn, times, cfg: OracleConfig) -> DensityTrajectory:
    """Monte Carlo disorder average with exact per-realization evolution.

    Each sample draws its disorder vector from its own counter-based stream
    (Philox keyed by ``(seed, sample_index)``), so the result is independent
    of chunking or execution order.  The ``errors`` field holds the per-entry
    standard error of the mean.

    ``c_fn`` may be a constant amplitude vector or a callable of the disorder
    (as in :func:`~enslat.states.expanded_initial`); per-realization vectors
    must be normalized.
    """
    if spec.n > _MAX_DENSE_N:
        raise SystemTooLarge(f"dense oracle limited to N <= {_MAX_DENSE_N}")
    times = np.asarray(times, dtype=float)
    s, l = int(cfg.samples), spec.l

    uniforms = np.empty((s, l))
    for i in range(s):
        gen = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, i], dtype=np.uint64)))
        uniforms[i] = gen.random(l)
    lam = np.column_stack([quantile(spec.distributions[j], uniforms[:, j])
                           for j in range(l)])

    n = spec.n
    # chunked Welford/Chan accumulation: robust to cancellation, exactly zero
    # spread for degenerate (zero-variance) ensembles
    mean = np.zeros((times.size, n, n), dtype=complex)
    m2 = np.zeros((times.size, n, n))
    count = 0
    for s0 in range(0, s, _CHUNK):
        chunk = lam[s0:s0 + _CHUNK]
        c0 = _resolve_c(c_fn, chunk, n)
        worst = np.max(np.abs(np.linalg.norm(c0, axis=1) - 1.0))
        if worst > 1e-8:
            raise NotNormalized(f"per-realization initial state off by {worst:.3e}")
        rho = _evolve_batch(_hamiltonian_batch(spec, chunk), c0, times)
        nb = rho.shape[0]
        cmean = rho.mean(axis=0)
        dev = rho - cmean
        # corrected two-pass sum of squares (exact zero for identical samples)
        cm2 = (np.abs(dev) ** 2).sum(axis=0) - np.abs(dev.sum(axis=0)) ** 2 / nb
        np.clip(cm2, 0.0, None, out=cm2)
        delta = cmean - mean
        total = count + nb
        mean += delta * (nb / total)
        m2 += cm2 + np.abs(delta) ** 2 * (count * nb / total)
        count = total
    sem = np.sqrt(m2 / s) / np.sqrt(s)
    sem[sem < 1e-18] = 0.0      # float-floor residue of an exactly degenerate spread
    info = {"method": "mc", "samples": s, "seed": int(cfg.seed)}
    if s > 1 and float(sem.max()) == 0.0:
        info["degenerate_distribution"] = True
    return DensityTrajectory(times, mean, errors=sem, info=info)


def quad_average(spec: EnsembleSpec, c_fn, times, cfg: OracleConfig,
                 tables=None) -> DensityTrajectory:
    """Disorder average over tensor-product Gauss nodes (deterministic).

    Nodes and weights per dimension come from the recurrence tables of the
    disorder measures (computed here unless supplied).  Exact realization
    evolution at every node, weighted mean; no error bars.
    """
    if spec.n > _MAX_DENSE_N:
        raise SystemTooLarge(f"dense oracle limited to N <= {_MAX_DENSE_N}")
    times = np.asarray(times, dtype=float)
    orders = cfg.quad_order if np.iterable(cfg.quad_order) else [cfg.quad_order] * spec.l
    if tables is None:
        tables = [recurrence_table(d, int(q)) for d, q in zip(spec.distributions, orders)]
    rules = [gauss_nodes(t, int(q)) for t, q in zip(tables, orders)]

    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    lam = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)

    n = spec.n
    acc = np.zeros((times.size, n, n), dtype=complex)
    for s0 in range(0, lam.shape[0], _CHUNK):
        chunk = lam[s0:s0 + _CHUNK]
        c0 = _resolve_c(c_fn, chunk, n)
        rho = _evolve_batch(_hamiltonian_batch(spec, chunk), c0, times)
        acc += np.einsum("b,btnm->tnm", weights[s0:s0 + _CHUNK], rho)
    info = {"method": "quad", "quad_order": list(int(q) for q in orders)}
    return DensityTrajectory(times, acc, info=info)


def analytic_qubit(a: complex, b: complex, e0: float, e1: float,
                   dist: DisorderDistribution, times) -> DensityTrajectory:
    """Closed-form dephasing of a disordered qubit ensemble.

    For H(lam) = diag(e0, e1 + lam) and initial state a|0> + b|1>, the
    populations are constant and the coherence is

        rho_01(t) = a b* exp(-i (e0 - e1) t) phi(t),

    with phi the characteristic function of the disorder.  Valid for the four
    named families without cutoff (UnsupportedFamily otherwise).
    """
    times = np.asarray(times, dtype=float)
    phi = np.atleast_1d(characteristic_function(dist, times))
    rho = np.zeros((times.size, 2, 2), dtype=complex)
    rho[:, 0, 0] = abs(a) ** 2
    rho[:, 1, 1] = abs(b) ** 2
    rho[:, 0, 1] = a * np.conj(b) * np.exp(-1j * (e0 - e1) * times) * phi
    rho[:, 1, 0] = np.conj(rho[:, 0, 1])
    return DensityTrajectory(times, rho, info={"method": "analytic"})


def chain_to_ensemble(g: float, unit_cell: np.ndarray, attach: int) -> EnsembleSpec:
    """Reverse map: constant-coupling lattice -> semicircle-disordered ensemble.

    A semi-infinite lattice of `unit_cell` copies whose neighbours couple with
    amplitude g through component `attach` has constant recurrence
    coefficients beta = g^2, i.e. it is the chain image of a single disorder
    variable with a Wigner semicircle distribution of width w = 2g coupling
    linearly to that component.  Ensemble-averaging over that disorder
    reproduces the lattice dynamics traced to the unit cell.
    """
    if not g > 0:
        raise ValueError("coupling g must be positive")
    unit_cell = np.asarray(unit_cell, dtype=complex)
    n = unit_cell.shape[0]
    if not 0 <= attach < n:
        raise ValueError(f"attach index {attach} outside 0..{n - 1}")
    proj = np.zeros((n, n), dtype=complex)
    proj[attach, attach] = 1.0
    return EnsembleSpec(unit_cell, (LinearCoupling(proj),),
                        (DisorderDistribution.semicircle(2.0 * g),))
