"""Reference routes: Monte Carlo, Gauss quadrature, closed forms, reverse map."""

import numpy as np
import pytest

from enslat import (
    DisorderDistribution,
    EnsembleSpec,
    LatticeBasis,
    LinearCoupling,
    OracleConfig,
    PropagationPlan,
    SystemTooLarge,
    TableTooShort,
    UnsupportedFamily,
    analytic_qubit,
    build_linear,
    chain_to_ensemble,
    characteristic_function,
    gauss_nodes,
    localized_initial,
    mc_average,
    propagate,
    quad_average,
    recurrence_analytic,
    trajectory_from_states,
)
from conftest import qubit_spec

C_HALF = np.array([1.0, 1.0]) / np.sqrt(2)


# ---------------------------------------------------------------------------
# gauss nodes
# ---------------------------------------------------------------------------

def test_gauss_nodes_uniform_two_point():
    table = recurrence_analytic(DisorderDistribution.uniform(1.0), 4)
    nodes, weights = gauss_nodes(table, 2)
    assert np.allclose(np.sort(nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-14)
    assert np.allclose(weights, [0.5, 0.5], atol=1e-14)


def test_gauss_nodes_semicircle_single():
    table = recurrence_analytic(DisorderDistribution.semicircle(1.0), 2)
    nodes, weights = gauss_nodes(table, 1)
    assert abs(nodes[0]) < 1e-15 and abs(weights[0] - 1.0) < 1e-15


def test_gauss_nodes_gaussian_three_point():
    table = recurrence_analytic(DisorderDistribution.gaussian(1.0), 4)
    nodes, weights = gauss_nodes(table, 3)
    assert np.allclose(np.sort(nodes), [-np.sqrt(3), 0.0, np.sqrt(3)], atol=1e-13)
    assert np.allclose(np.sort(weights), [1 / 6, 1 / 6, 2 / 3][::1] if False else
                       sorted([1 / 6, 2 / 3, 1 / 6]), atol=1e-13)


def test_gauss_nodes_table_too_short():
    table = recurrence_analytic(DisorderDistribution.uniform(1.0), 3)
    with pytest.raises(TableTooShort):
        gauss_nodes(table, 5)


# ---------------------------------------------------------------------------
# monte carlo
# ---------------------------------------------------------------------------

def test_mc_zero_disorder_equals_unitary():
    spec = EnsembleSpec(np.array([[0.0, 0.4], [0.4, 1.0]]),
                        (LinearCoupling(np.zeros((2, 2))),),
                        (DisorderDistribution.gaussian(1.0),))
    times = np.linspace(0.0, 3.0, 11)
    traj = mc_average(spec, np.array([1.0, 0.0]), times, OracleConfig(samples=50, seed=3))
    assert traj.errors.max() == 0.0
    assert traj.info.get("degenerate_distribution") is True
    evals, vecs = np.linalg.eigh(spec.h0)
    c0 = vecs.conj().T @ np.array([1.0, 0.0])
    for i, t in enumerate(times):
        psi = vecs @ (np.exp(-1j * evals * t) * c0)
        assert np.abs(traj.rho[i] - np.outer(psi, psi.conj())).max() < 1e-12


def test_mc_gaussian_qubit_within_clt_band():
    dist = DisorderDistribution.gaussian(1.0)
    spec = qubit_spec(dist)
    times = np.linspace(0.0, 5.0, 21)
    traj = mc_average(spec, C_HALF, times, OracleConfig(samples=20_000, seed=7))
    ref = analytic_qubit(C_HALF[0], C_HALF[1], 0.0, 1.0, dist, times)
    assert np.all(np.abs(traj.rho - ref.rho) <= 4.0 * traj.errors + 1e-10)
    # the band is tight enough to be meaningful
    assert np.median(traj.errors[traj.errors > 0]) < 5e-3


def test_mc_seed_determinism_bitwise():
    spec = qubit_spec(DisorderDistribution.semicircle(1.0))
    times = np.linspace(0.0, 2.0, 5)
    a = mc_average(spec, C_HALF, times, OracleConfig(samples=3000, seed=11))
    b = mc_average(spec, C_HALF, times, OracleConfig(samples=3000, seed=11))
    assert np.array_equal(a.rho, b.rho) and np.array_equal(a.errors, b.errors)
    c = mc_average(spec, C_HALF, times, OracleConfig(samples=3000, seed=12))
    assert not np.array_equal(a.rho, c.rho)


def test_mc_system_too_large():
    n = 65
    spec = EnsembleSpec(np.zeros((n, n)), (LinearCoupling(np.eye(n)),),
                        (DisorderDistribution.uniform(1.0),))
    with pytest.raises(SystemTooLarge):
        mc_average(spec, np.eye(n)[0], [0.0, 1.0], OracleConfig(samples=2))


def test_mc_lambda_dependent_initial_state():
    # disorder-dependent c: populations become nontrivial averages;
    # cross-check rho(0) against direct quadrature of |c(lam)><c(lam)|
    dist = DisorderDistribution.semicircle(1.0)
    spec = qubit_spec(dist)

    def c_fn(lam):
        lam = np.atleast_2d(lam)[:, 0]
        return np.stack([lam, np.sqrt(1 - lam ** 2)], axis=1).astype(complex)

    traj = mc_average(spec, c_fn, np.array([0.0, 1.0]), OracleConfig(samples=40_000, seed=5))
    from enslat.measures import discretize
    nodes, w = discretize(dist, 3000)
    c = np.stack([nodes, np.sqrt(1 - nodes ** 2)], axis=1)
    rho0 = np.einsum("q,qa,qb->ab", w, c, c.conj())
    assert np.all(np.abs(traj.rho[0] - rho0) <= 4 * traj.errors[0] + 1e-10)


# ---------------------------------------------------------------------------
# quadrature average
# ---------------------------------------------------------------------------

def test_quad_gaussian_qubit_converges_to_closed_form():
    # degree-(2Q-1)-exact quadrature of e^{i lambda t}: at t <= 2 and Q = 40
    # the remaining error is below 1e-10
    dist = DisorderDistribution.gaussian(1.0)
    spec = qubit_spec(dist)
    times = np.linspace(0.0, 2.0, 9)
    traj = quad_average(spec, C_HALF, times, OracleConfig(quad_order=40))
    ref = analytic_qubit(C_HALF[0], C_HALF[1], 0.0, 1.0, dist, times)
    assert np.abs(traj.rho - ref.rho).max() <= 1e-10
    assert traj.errors is None


def test_quad_order_one_is_disorder_free():
    dist = DisorderDistribution.uniform(1.0)
    spec = qubit_spec(dist)
    times = np.linspace(0.0, 4.0, 7)
    traj = quad_average(spec, C_HALF, times, OracleConfig(quad_order=1))
    # single symmetric node at lambda = 0: plain unitary dynamics of h0
    free = analytic_qubit(C_HALF[0], C_HALF[1], 0.0, 1.0,
                          DisorderDistribution.uniform(1e-12), times)
    assert np.abs(traj.rho - free.rho).max() < 1e-9


def test_quad_convergence_with_order():
    dist = DisorderDistribution.semicircle(1.0)
    spec = qubit_spec(dist)
    times = np.linspace(0.0, 6.0, 13)
    ref = analytic_qubit(C_HALF[0], C_HALF[1], 0.0, 1.0, dist, times)
    errs = []
    for q in (4, 8, 16, 32):
        traj = quad_average(spec, C_HALF, times, OracleConfig(quad_order=q))
        errs.append(np.abs(traj.rho - ref.rho).max())
    assert errs[-1] < 1e-10
    assert errs[0] > errs[-1]


# ---------------------------------------------------------------------------
# analytic qubit
# ---------------------------------------------------------------------------

def test_analytic_qubit_structure():
    dist = DisorderDistribution.gaussian(0.8)
    times = np.linspace(0.0, 4.0, 9)
    traj = analytic_qubit(0.6, 0.8, 0.2, 1.1, dist, times)
    assert np.allclose(traj.rho[:, 0, 0], 0.36)
    assert np.allclose(traj.rho[:, 1, 1], 0.64)
    want = 0.48 * np.exp(-1j * (0.2 - 1.1) * times) * np.exp(-(0.8 * times) ** 2 / 2)
    assert np.abs(traj.rho[:, 0, 1] - want).max() < 1e-15


def test_analytic_qubit_no_coherence():
    traj = analytic_qubit(1.0, 0.0, 0.0, 1.0, DisorderDistribution.uniform(1.0),
                          np.linspace(0.0, 3.0, 5))
    assert np.abs(traj.rho - np.diag([1.0, 0.0])[None]).max() == 0.0


def test_analytic_qubit_semicircle_bessel_zero():
    from scipy.special import jn_zeros
    j11 = jn_zeros(1, 1)[0]
    dist = DisorderDistribution.semicircle(1.0)
    times = np.array([0.0, j11, j11 + 2.0])
    traj = analytic_qubit(*C_HALF, 0.0, 1.0, dist, times)
    coh = np.abs(traj.rho[:, 0, 1])
    assert coh[1] < 1e-12          # first Bessel zero kills the coherence
    assert coh[2] > 1e-3           # later revival


def test_analytic_qubit_rejects_tabulated():
    with pytest.raises(UnsupportedFamily):
        analytic_qubit(*C_HALF, 0.0, 1.0,
                       DisorderDistribution.tabulated([0, 1], [1, 1]), [0.0, 1.0])


# ---------------------------------------------------------------------------
# reverse map
# ---------------------------------------------------------------------------

def test_chain_to_ensemble_roundtrip_hops():
    g = 0.7
    spec = chain_to_ensemble(g, np.zeros((1, 1)), 0)
    assert spec.distributions[0].family == "semicircle"
    assert spec.distributions[0].width == 2 * g
    d = 10
    table = recurrence_analytic(spec.distributions[0], d + 1)
    h = build_linear(spec, [table], [d]).to_dense()
    off = np.diag(h, 1)
    assert np.allclose(off, g)                    # constant hops, exactly g
    assert np.abs(np.diag(h)).max() == 0.0


def test_chain_survival_amplitude_is_semicircle_cf():
    # single-site survival amplitude of the constant chain equals
    # 2 J1(2 g t) / (2 g t)
    g = 1.0
    spec = chain_to_ensemble(g, np.zeros((1, 1)), 0)
    d = 60
    table = recurrence_analytic(spec.distributions[0], d + 1)
    op = build_linear(spec, [table], [d])
    basis = LatticeBasis(1, (d,))
    psi0 = localized_initial(np.array([1.0]), basis)
    plan = PropagationPlan.linspace(10.0, 21)
    states, _ = propagate(op, psi0, plan)
    surv = np.array([s.amplitudes[0] for s in states])
    phi = characteristic_function(spec.distributions[0], plan.times)
    assert np.abs(surv - phi).max() < 1e-10


def test_chain_qubit_cell_matches_mc():
    g = 0.5
    cell = np.array([[0.0, 0.25], [0.25, 1.0]])
    spec = chain_to_ensemble(g, cell, 1)
    d = 48
    table = recurrence_analytic(spec.distributions[0], d + 1)
    op = build_linear(spec, [table], [d])
    basis = LatticeBasis(2, (d,))
    psi0 = localized_initial(C_HALF, basis)
    plan = PropagationPlan.linspace(8.0, 17)
    states, _ = propagate(op, psi0, plan)
    chain = trajectory_from_states(plan.times, states)
    mc = mc_average(spec, C_HALF, plan.times, OracleConfig(samples=30_000, seed=21))
    assert np.all(np.abs(chain.rho - mc.rho) <= 4 * mc.errors + 1e-10)


def test_chain_to_ensemble_validation():
    with pytest.raises(ValueError):
        chain_to_ensemble(0.0, np.zeros((1, 1)), 0)
    with pytest.raises(ValueError):
        chain_to_ensemble(1.0, np.zeros((2, 2)), 5)
