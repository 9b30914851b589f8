"""Disorder distributions and their orthogonal-polynomial machinery.

A :class:`DisorderDistribution` is a one-dimensional probability measure for a
single disorder variable: one of four named families (gaussian, cauchy,
semicircle, uniform, each centered at zero with a single width parameter) or a
tabulated density, optionally restricted to a hard cutoff window and
renormalized to unit mass.

For a measure ``p(x) dx`` the monic orthogonal polynomials satisfy the
three-term recurrence

    P_{k+1}(x) = (x - alpha_k) P_k(x) - beta_k P_{k-1}(x),

with ``alpha_k = <x P_k, P_k> / <P_k, P_k>`` and
``beta_k = <P_k, P_k> / <P_{k-1}, P_{k-1}>``.  A :class:`RecurrenceTable`
stores these coefficients; ``sqrt(beta_k)`` are the hopping amplitudes of the
equivalent lattice and ``alpha_k`` its node energy shifts.

Coefficients come either from closed forms (:func:`recurrence_analytic`, for
the three classical symmetric families) or from a discretized Stieltjes
procedure (:func:`recurrence_stieltjes`) that runs the recurrence on a
composite Gauss-Legendre grid over the (cut) support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import betaincinv, j1, ndtr, ndtri

from .errors import (
    EmptySupport,
    InvalidOrder,
    NumericalBreakdown,
    UnboundedSupport,
    UnsupportedFamily,
)

__all__ = [
    "DisorderDistribution",
    "RecurrenceTable",
    "recurrence_analytic",
    "recurrence_stieltjes",
    "recurrence_table",
    "apply_cutoff",
    "characteristic_function",
    "quantile",
    "sample",
    "orthonormal_values",
    "gauss_rule",
]

_NAMED_FAMILIES = ("gaussian", "cauchy", "semicircle", "uniform")

_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True, eq=False)
class DisorderDistribution:
    """One-dimensional probability measure for a single disorder variable.

    Attributes
    ----------
    family : str
        One of ``gaussian``, ``cauchy``, ``semicircle``, ``uniform``,
        ``tabulated``.
    width : float or None
        Family width parameter (sigma, theta, w, v); None for tabulated.
    grid : tuple(ndarray, ndarray) or None
        For tabulated measures: strictly increasing abscissae and the
        (renormalized) density values, interpolated linearly in between.
    cutoff : tuple(float, float) or None
        Hard support window; the density is renormalized to unit mass on it.
    """

    family: str
    width: float | None = None
    grid: tuple[np.ndarray, np.ndarray] | None = None
    cutoff: tuple[float, float] | None = None

    def __post_init__(self):
        if self.family not in _NAMED_FAMILIES + ("tabulated",):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "tabulated":
            lam, dens = self.grid
            lam = np.asarray(lam, dtype=float)
            dens = np.asarray(dens, dtype=float)
            if lam.size < 2 or np.any(np.diff(lam) <= 0):
                raise ValueError("tabulated grid must be strictly increasing with >= 2 points")
            if np.any(dens < 0):
                raise ValueError("tabulated density must be nonnegative")
            mass = _trapz(dens, lam)
            if mass <= 0:
                raise EmptySupport("tabulated density has zero mass")
            object.__setattr__(self, "grid", (lam, dens / mass))
        else:
            if self.width is None or not self.width > 0:
                raise ValueError(f"{self.family} width must be positive")
        if self.cutoff is not None:
            lo, hi = self.cutoff
            if not lo < hi:
                raise ValueError("cutoff must satisfy lo < hi")

    # -- constructors ------------------------------------------------------

    @classmethod
    def gaussian(cls, sigma: float, cutoff=None) -> "DisorderDistribution":
        """Gaussian with standard deviation ``sigma``, centered at zero."""
        return cls("gaussian", width=float(sigma), cutoff=cutoff)

    @classmethod
    def cauchy(cls, theta: float, cutoff=None) -> "DisorderDistribution":
        """Cauchy (Lorentzian) with half width ``theta``; moments are undefined
        unless a cutoff is set (a window of +-30*theta is a reasonable default)."""
        return cls("cauchy", width=float(theta), cutoff=cutoff)

    @classmethod
    def semicircle(cls, w: float, cutoff=None) -> "DisorderDistribution":
        """Wigner semicircle on [-w, w]."""
        return cls("semicircle", width=float(w), cutoff=cutoff)

    @classmethod
    def uniform(cls, v: float, cutoff=None) -> "DisorderDistribution":
        """Uniform on [-v, v]."""
        return cls("uniform", width=float(v), cutoff=cutoff)

    @classmethod
    def tabulated(cls, lam, density, cutoff=None) -> "DisorderDistribution":
        """Tabulated density, linearly interpolated and normalized to unit mass."""
        dist = cls("tabulated", grid=(np.asarray(lam, float), np.asarray(density, float)))
        if cutoff is not None:
            dist = apply_cutoff(dist, *cutoff)
        return dist

    # -- geometry ----------------------------------------------------------

    def native_support(self) -> tuple[float, float]:
        """Support of the uncut family (may be infinite)."""
        w = self.width
        if self.family in ("gaussian", "cauchy"):
            return (-np.inf, np.inf)
        if self.family in ("semicircle", "uniform"):
            return (-w, w)
        lam = self.grid[0]
        return (float(lam[0]), float(lam[-1]))

    def support(self) -> tuple[float, float]:
        """Effective support after the cutoff (intersection with native)."""
        lo, hi = self.native_support()
        if self.cutoff is not None:
            lo, hi = max(lo, self.cutoff[0]), min(hi, self.cutoff[1])
        return (lo, hi)

    @property
    def bounded(self) -> bool:
        lo, hi = self.support()
        return np.isfinite(lo) and np.isfinite(hi)

    @property
    def moments_defined(self) -> bool:
        """False only for the uncut Cauchy, whose moments do not exist."""
        return not (self.family == "cauchy" and self.cutoff is None)

    # -- density -----------------------------------------------------------

    def _cdf_native(self, x):
        """CDF of the uncut family (used for cutoff renormalization)."""
        w = self.width
        if self.family == "gaussian":
            return ndtr(np.asarray(x, float) / w)
        if self.family == "cauchy":
            return 0.5 + np.arctan(np.asarray(x, float) / w) / np.pi
        if self.family == "semicircle":
            u = np.clip(np.asarray(x, float) / w, -1.0, 1.0)
            return 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / np.pi
        if self.family == "uniform":
            return np.clip((np.asarray(x, float) + w) / (2 * w), 0.0, 1.0)
        lam, dens = self.grid
        xs = np.clip(np.asarray(x, float), lam[0], lam[-1])
        cum = np.concatenate(([0.0], np.cumsum(np.diff(lam) * (dens[1:] + dens[:-1]) / 2)))
        idx = np.clip(np.searchsorted(lam, xs, side="right") - 1, 0, lam.size - 2)
        x0, x1 = lam[idx], lam[idx + 1]
        p0, p1 = dens[idx], dens[idx + 1]
        dx = xs - x0
        slope = (p1 - p0) / (x1 - x0)
        return cum[idx] + p0 * dx + 0.5 * slope * dx * dx

    def window_mass(self) -> float:
        """Native probability mass inside the cutoff window (1 if uncut)."""
        if self.cutoff is None:
            return 1.0
        lo, hi = self.support()
        if lo >= hi:
            return 0.0
        return float(self._cdf_native(hi) - self._cdf_native(lo))

    def pdf(self, x):
        """Normalized density, zero outside the (cut) support."""
        x = np.asarray(x, dtype=float)
        w = self.width
        if self.family == "gaussian":
            d = np.exp(-(x * x) / (2 * w * w)) / (np.sqrt(2 * np.pi) * w)
        elif self.family == "cauchy":
            d = (w / np.pi) / (x * x + w * w)
        elif self.family == "semicircle":
            d = (2 / (np.pi * w * w)) * np.sqrt(np.clip(w * w - x * x, 0.0, None))
        elif self.family == "uniform":
            d = np.where(np.abs(x) <= w, 1.0 / (2 * w), 0.0)
        else:
            lam, dens = self.grid
            d = np.interp(x, lam, dens, left=0.0, right=0.0)
        if self.cutoff is not None:
            lo, hi = self.support()
            d = np.where((x >= lo) & (x <= hi), d / self.window_mass(), 0.0)
        return d

    def __repr__(self):
        core = f"{self.family}(width={self.width})" if self.family != "tabulated" \
            else f"tabulated({self.grid[0].size} pts)"
        if self.cutoff is not None:
            core += f", cutoff={self.cutoff}"
        return f"DisorderDistribution[{core}]"


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Monic three-term recurrence coefficients of one measure, to order K.

    ``alpha[k]`` holds alpha_k for k = 0..K-1; ``beta[k-1]`` holds beta_k for
    k = 1..K (all strictly positive).  The derived norms zeta_k = prod_{j<=k}
    beta_j (zeta_0 = 1) may overflow for large K; they are exposed as a
    property and only needed at small orders.
    """

    order: int
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise InvalidOrder(f"order must be >= 1, got {self.order}")
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if alpha.shape != (self.order,) or beta.shape != (self.order,):
            raise ValueError("alpha and beta must both have length `order`")
        if np.any(beta <= 0):
            raise NumericalBreakdown("all beta_k must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def zeta(self) -> np.ndarray:
        """Norms zeta_0..zeta_K of the monic polynomials (zeta_0 = 1)."""
        return np.concatenate(([1.0], np.cumprod(self.beta)))

    @property
    def hops(self) -> np.ndarray:
        """Lattice hopping amplitudes sqrt(beta_1)..sqrt(beta_K)."""
        return np.sqrt(self.beta)


# ---------------------------------------------------------------------------
# recurrence coefficients
# ---------------------------------------------------------------------------

def recurrence_analytic(dist: DisorderDistribution, order: int) -> RecurrenceTable:
    """Closed-form monic recurrence coefficients for the classical families.

    gaussian(sigma):   alpha_k = 0,  beta_k = sigma^2 k
    semicircle(w):     alpha_k = 0,  beta_k = w^2 / 4
    uniform(v):        alpha_k = 0,  beta_k = v^2 k^2 / (4 k^2 - 1)

    Raises
    ------
    UnsupportedFamily
        For cauchy/tabulated measures, or when a cutoff is set (a cut measure
        has no closed form; use :func:`recurrence_stieltjes`).
    InvalidOrder
        For order < 1.
    """
    if order < 1:
        raise InvalidOrder(f"order must be >= 1, got {order}")
    if dist.family not in ("gaussian", "semicircle", "uniform"):
        raise UnsupportedFamily(
            f"no closed-form coefficients for {dist.family}; use recurrence_stieltjes")
    if dist.cutoff is not None:
        raise UnsupportedFamily(
            "cut distributions have no closed-form coefficients; use recurrence_stieltjes")
    k = np.arange(1, order + 1, dtype=float)
    w = dist.width
    if dist.family == "gaussian":
        beta = w * w * k
    elif dist.family == "semicircle":
        beta = np.full(order, w * w / 4.0)
    else:
        beta = (w * w) * k * k / (4.0 * k * k - 1.0)
    return RecurrenceTable(order, np.zeros(order), beta)


def _panel_edges(a: float, b: float, n_panels: int, n_geo: int = 10, ratio: float = 0.25):
    """Uniform panel edges on [a, b] with the outermost panel at each end
    subdivided geometrically toward the endpoint; the refinement renders
    sqrt-type edge singularities (semicircle ends) harmless."""
    base = np.linspace(a, b, max(n_panels, 3) + 1)
    h = base[1] - base[0]
    left = a + h * ratio ** np.arange(n_geo, 0, -1)
    right = b - h * ratio ** np.arange(1, n_geo + 1)
    return np.concatenate(([a], left, base[1:-1], right, [b]))


def _composite_gl(edges: np.ndarray, m: int):
    xg, wg = leggauss(m)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def discretize(dist: DisorderDistribution, npoints: int):
    """Discretize the measure: nodes and weights with sum(w_j f(x_j)) ~ int f dp.

    Composite Gauss-Legendre panels over the (cut) support.  For tabulated
    measures the panels are aligned with the tabulation breakpoints so the
    piecewise-linear density is integrated exactly against polynomials.

    Raises
    ------
    UnboundedSupport
        If the support is infinite (no cutoff on gaussian/cauchy).
    """
    lo, hi = dist.support()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise UnboundedSupport(
            f"{dist.family} support is unbounded; apply_cutoff first")
    if dist.family == "tabulated":
        lam = dist.grid[0]
        brk = np.unique(np.clip(lam, lo, hi))
        brk = np.concatenate(([lo], brk[(brk > lo) & (brk < hi)], [hi]))
        m = max(8, int(np.ceil(npoints / (brk.size - 1))))
        nodes, weights = _composite_gl(brk, m)
    else:
        m = 24
        n_panels = max(3, int(np.ceil(npoints / m)) - 20)
        edges = _panel_edges(lo, hi, n_panels)
        nodes, weights = _composite_gl(edges, m)
    return nodes, weights * dist.pdf(nodes)


def recurrence_stieltjes(dist: DisorderDistribution, order: int,
                         grid_points: int | None = None) -> RecurrenceTable:
    """Recurrence coefficients via the discretized Stieltjes procedure.

    The measure is discretized on a composite quadrature grid over its (cut)
    support; the monic recurrence is then run on the discrete measure, with
    the polynomial iterates kept normalized so the procedure is stable to
    orders of several hundred.  The grid defaults to ``max(4*order, 1000)``
    points; coefficients are accurate to the quadrature error of the grid.

    Raises
    ------
    UnboundedSupport
        If the support is infinite.  The cutoff is never applied implicitly:
        it changes the physics (e.g. coherence revivals) and must be explicit.
    NumericalBreakdown
        If a computed beta_k is non-positive: `order` too large for the grid.
    """
    if order < 1:
        raise InvalidOrder(f"order must be >= 1, got {order}")
    if not dist.moments_defined:
        raise UnboundedSupport("cauchy moments are undefined; apply_cutoff first")
    if grid_points is None:
        grid_points = max(4 * order, 1000)
    if grid_points < 4 * order:
        raise InvalidOrder(f"grid_points must be >= 4*order = {4 * order}")
    nodes, w = discretize(dist, grid_points)

    alpha = np.zeros(order)
    beta = np.zeros(order)
    v = np.ones_like(nodes) / np.sqrt(w.sum())
    v_prev = np.zeros_like(v)
    b_prev = 0.0
    for k in range(order):
        xv = nodes * v
        a_k = float(np.sum(w * v * xv))
        u = xv - a_k * v - b_prev * v_prev
        b2 = float(np.sum(w * u * u))
        if b2 <= 0 or not np.isfinite(b2):
            raise NumericalBreakdown(
                f"beta_{k + 1} = {b2} <= 0: order {order} too large for {grid_points} grid points")
        b_k = np.sqrt(b2)
        alpha[k], beta[k] = a_k, b2
        v_prev, v, b_prev = v, u / b_k, b_k
    return RecurrenceTable(order, alpha, beta)


def recurrence_table(dist: DisorderDistribution, order: int,
                     grid_points: int | None = None) -> RecurrenceTable:
    """Analytic coefficients when a closed form exists, Stieltjes otherwise."""
    if dist.cutoff is None and dist.family in ("gaussian", "semicircle", "uniform"):
        return recurrence_analytic(dist, order)
    return recurrence_stieltjes(dist, order, grid_points)


# ---------------------------------------------------------------------------
# cutoff
# ---------------------------------------------------------------------------

def apply_cutoff(dist: DisorderDistribution, lam_min: float, lam_max: float) -> DisorderDistribution:
    """Restrict the density to [lam_min, lam_max] and renormalize to unit mass.

    The returned distribution always has bounded support and therefore admits
    :func:`recurrence_stieltjes`.  Cutting a measure curbs the growth of its
    lattice couplings (sqrt(beta_k) saturates at a quarter of the window
    width), at the price of a controlled distortion of the ensemble.

    Raises
    ------
    EmptySupport
        If the window carries zero probability mass.
    """
    if not lam_min < lam_max:
        raise ValueError("need lam_min < lam_max")
    lo, hi = dist.support()
    lo, hi = max(lo, float(lam_min)), min(hi, float(lam_max))
    if lo >= hi:
        raise EmptySupport("cutoff window does not overlap the support")
    if dist.family == "tabulated":
        lam, dens = dist.grid
        inner = (lam > lo) & (lam < hi)
        new_lam = np.concatenate(([lo], lam[inner], [hi]))
        new_dens = np.interp(new_lam, lam, dens)
        if _trapz(new_dens, new_lam) <= 0:
            raise EmptySupport("cutoff window carries zero mass")
        return DisorderDistribution.tabulated(new_lam, new_dens)
    out = DisorderDistribution(dist.family, width=dist.width, cutoff=(lo, hi))
    if out.window_mass() <= 0:
        raise EmptySupport("cutoff window carries zero mass")
    return out


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

def characteristic_function(dist: DisorderDistribution, t):
    """E[exp(i lambda t)] in closed form, for the four uncut named families.

    gaussian:   exp(-sigma^2 t^2 / 2)
    cauchy:     exp(-theta |t|)
    semicircle: 2 J1(w t) / (w t)
    uniform:    sin(v t) / (v t)

    Exactly 1 at t = 0.  Raises UnsupportedFamily for tabulated or cut
    distributions (no closed form).
    """
    if dist.family not in _NAMED_FAMILIES:
        raise UnsupportedFamily("no closed-form characteristic function for tabulated measures")
    if dist.cutoff is not None:
        raise UnsupportedFamily("no closed-form characteristic function for cut distributions")
    t = np.asarray(t, dtype=float)
    w = dist.width
    if dist.family == "gaussian":
        out = np.exp(-(w * t) ** 2 / 2)
    elif dist.family == "cauchy":
        out = np.exp(-w * np.abs(t))
    elif dist.family == "semicircle":
        z = w * t
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)
        out = np.where(small, 1.0 - z * z / 8.0, 2.0 * j1(zs) / zs)
    else:
        out = np.sinc(w * t / np.pi)
    out = out.astype(complex)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def quantile(dist: DisorderDistribution, u):
    """Inverse CDF; maps uniforms in (0, 1) to draws from the distribution.

    Exact for all named families (cut or uncut, via inverse-CDF restriction
    to the window); exact for tabulated measures as well, since their CDF is
    piecewise quadratic and inverted segment-wise.
    """
    u = np.clip(np.asarray(u, dtype=float), 1e-16, 1.0 - 1e-16)
    w = dist.width
    if dist.cutoff is not None and dist.family != "tabulated":
        lo, hi = dist.support()
        flo, fhi = dist._cdf_native(lo), dist._cdf_native(hi)
        u = flo + u * (fhi - flo)
    if dist.family == "gaussian":
        return w * ndtri(u)
    if dist.family == "cauchy":
        return w * np.tan(np.pi * (u - 0.5))
    if dist.family == "semicircle":
        return w * (2.0 * betaincinv(1.5, 1.5, u) - 1.0)
    if dist.family == "uniform":
        return w * (2.0 * u - 1.0)
    # tabulated: invert the piecewise-quadratic CDF segment by segment
    lam, dens = dist.grid
    seg_mass = np.diff(lam) * (dens[1:] + dens[:-1]) / 2
    cum = np.concatenate(([0.0], np.cumsum(seg_mass)))
    cum /= cum[-1]
    idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, lam.size - 2)
    x0, x1 = lam[idx], lam[idx + 1]
    p0, p1 = dens[idx], dens[idx + 1]
    target = (u - cum[idx]) * cum[-1]
    slope = (p1 - p0) / (x1 - x0)
    lin = np.abs(slope) < 1e-300
    safe_slope = np.where(lin, 1.0, slope)
    disc = np.sqrt(np.clip(p0 * p0 + 2 * safe_slope * target, 0.0, None))
    dx = np.where(lin,
                  target / np.where(p0 > 0, p0, 1.0),
                  (disc - p0) / safe_slope)
    return x0 + np.clip(dx, 0.0, x1 - x0)


def sample(dist: DisorderDistribution, rng: np.random.Generator, size=None):
    """Draw from the distribution; deterministic given the generator state.

    Cutoffs are respected exactly by inverse-CDF restriction.  ``size=None``
    returns a scalar.
    """
    u = rng.random(size if size is not None else 1)
    out = quantile(dist, u)
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# orthonormal polynomial evaluation
# ---------------------------------------------------------------------------

def orthonormal_values(table: RecurrenceTable, x, kmax: int) -> np.ndarray:
    """Evaluate the orthonormal polynomials phi_0..phi_kmax at points x.

    Row k of the returned (kmax+1, len(x)) array holds phi_k(x), built from
    the normalized form of the recurrence (stable at any order the table
    supports).  Requires ``table.order >= kmax``.
    """
    if kmax > table.order:
        raise InvalidOrder(f"kmax={kmax} exceeds table order {table.order}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax + 1, x.size))
    out[0] = 1.0
    if kmax >= 1:
        sb = np.sqrt(table.beta)
        out[1] = (x - table.alpha[0]) / sb[0]
        for k in range(1, kmax):
            out[k + 1] = ((x - table.alpha[k]) * out[k] - sb[k - 1] * out[k - 1]) / sb[k]
    return out


def gauss_rule(table: RecurrenceTable, order: int):
    """Gauss quadrature rule of the measure behind a recurrence table.

    Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
    Jacobi matrix built from (alpha, sqrt(beta)); weights are the squared
    first components of its eigenvectors (times the unit total mass).  The
    rule integrates polynomials of degree <= 2*order - 1 exactly against the
    measure.  Requires ``table.order >= order``.
    """
    from scipy.linalg import eigh_tridiagonal

    if order < 1:
        raise InvalidOrder(f"order must be >= 1, got {order}")
    if order > table.order:
        raise InvalidOrder(f"order {order} exceeds table order {table.order}")
    if order == 1:
        return np.array([table.alpha[0]]), np.array([1.0])
    nodes, vecs = eigh_tridiagonal(table.alpha[:order], np.sqrt(table.beta[:order - 1]))
    return nodes, vecs[0] ** 2
