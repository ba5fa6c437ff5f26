"""Propagators of an uncoupled CTRW.

Every propagator is split into a point mass at zero displacement (no jump
in the observation window) and a sub-stochastic density.  The density is
obtained from its spatial Fourier transform ``G(w) = sum_n a_n h_tilde(w)**n``,
``a_n`` being the probability of exactly ``n`` jumps in the window.  For a
biased jump law ``|h_tilde|`` decays only like ``1/w``, and the low-order
terms carry the kinks of the density at ``x = 0``.  The first
``closed_terms`` of them are therefore added back in closed form through the
convolution powers of the jump law, and only the remainder, of order
``h_tilde**(closed_terms + 1)``, goes through Fourier quadrature.

Two routes produce ``G``:

* transform route -- invert ``phi_hat(s) h_tilde(w) Pi_hat(w, s)`` where
  ``phi_hat`` is the Laplace transform of the lag to the first jump;
* lag route -- integrate ``f(tau') h_tilde(w) Pi1(w, t - tau')`` over the
  lag density ``f`` on ``[0, t]``, for lags whose transform is not at hand.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConditioningError, DomainError, PoleError
from .models import CtrwProcess
from .numerics import BromwichContour, FourierGrid, fourier_invert, laplace_invert
from .renewal import ExcessLifeLaw, StationaryExcess, erlang_roots

__all__ = [
    "Numerics",
    "PropagatorResult",
    "default_x_grid",
    "pi_transform",
    "pi_laplace_density",
    "bessel_density",
    "after_jump_propagator",
    "general_propagator",
    "conditioned_propagator",
    "stationary_propagator",
    "accumulated_distribution",
    "chapman_kolmogorov_defect",
]


@dataclass(frozen=True)
class Numerics:
    """Tuning knobs shared by the propagator routes.

    ``omega_max`` and ``omega_spacing`` default to ``100 gamma`` and
    ``gamma / 16`` of the jump law.
    """

    n_nodes: int = 364
    omega_max: float | None = None
    omega_spacing: float | None = None
    tail_threshold: float = 1e-4
    lag_nodes: int = 48
    closed_terms: int = 4

    @property
    def contour(self) -> BromwichContour:
        return BromwichContour(n_nodes=self.n_nodes)

    def fourier_grid(self, jump, x_grid) -> FourierGrid:
        return FourierGrid.for_jump(
            jump.gamma, x_grid, self.omega_max, self.omega_spacing, self.tail_threshold
        )


@dataclass
class PropagatorResult:
    """Point mass ``delta_weight`` at x = 0 plus ``density`` on ``x_grid``."""

    delta_weight: float
    x_grid: np.ndarray
    density: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def mass(self) -> float:
        return float(self.delta_weight + np.trapezoid(self.density, self.x_grid))

    def clipped_density(self):
        """Density with quadrature noise in [-1e-8, 0) set to zero."""
        d = self.density.copy()
        d[(d < 0) & (d >= -1e-8)] = 0.0
        return d


def default_x_grid(jump, n=1024, half_width=12.0):
    """``n`` points on ``[-half_width/gamma, half_width/gamma]``.

    With even ``n`` the origin falls midway between two nodes, so the
    trapezoidal rule straddles the jump of the density symmetrically.
    """
    return np.linspace(-half_width / jump.gamma, half_width / jump.gamma, n)


def pi_transform(proc: CtrwProcess, omega, s):
    """Joint Fourier-Laplace transform of the after-jump propagator."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0):
        raise DomainError("Fourier-Laplace transform needs Re(s) > 0")
    psi = proc.waiting.laplace(s)
    ht = proc.jump.characteristic(omega)
    den = (1.0 - ht * psi) * s
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("vanishing denominator in the Fourier-Laplace transform")
    return (1.0 - psi) / den


def pi_laplace_density(proc: CtrwProcess, x, s):
    """Laplace transform in time of the after-jump density at displacement ``x``.

    Closed form for the bi-exponential jump law; ``x`` and ``s`` broadcast.
    The branch ``x >= 0`` uses the right-hand exponential.
    """
    s = np.asarray(s, dtype=complex)
    x = np.asarray(x, dtype=float)
    g, k = proc.jump.gamma, proc.jump.kappa
    psi = proc.waiting.laplace(s)
    # principal root: Re >= 0
    phi = 2.0 * np.sqrt(1.0 - psi + k * k * psi * psi)
    common = (1.0 - psi) / s * g * psi
    base = (1.0 - 2.0 * k * k * psi) / phi
    # a right bias (kappa > 0) slows the decay on the right
    right = (base + k) * np.exp(-(phi - 2.0 * k * psi) * g * np.abs(x) / 2.0)
    left = (base - k) * np.exp(-(phi + 2.0 * k * psi) * g * np.abs(x) / 2.0)
    return common * np.where(x >= 0, right, left)


def bessel_density(x, t, rate, gamma):
    """After-jump density for exponential waits and right-only jumps."""
    x = np.asarray(x, dtype=float)
    lt = rate * t
    xp = np.where(x > 0, x, 1.0)
    z = 2.0 * np.sqrt(lt * gamma * xp)
    val = np.sqrt(gamma * lt / xp) * special.ive(1, z) * np.exp(z - lt - gamma * xp)
    at_zero = gamma * lt * np.exp(-lt)
    return np.where(x > 0, val, np.where(x == 0, at_zero, 0.0))


# -- Fourier-domain ingredients -------------------------------------------


def _pi1_residue(proc, omega, u):
    """Fourier transform of the after-jump density at time ``u`` (Erlang).

    Residue sum over the poles ``rate (q eps_n - 1)`` with ``q`` any
    ``nu``-th root of ``h_tilde``; the sum does not depend on the root chosen.
    """
    nu, lam = proc.waiting.integer_shape, proc.waiting.rate
    ht = proc.jump.characteristic(omega)
    eps, _ = erlang_roots(nu, 1.0)
    q = ht ** (1.0 / nu)
    total = np.zeros(np.shape(ht), dtype=complex)
    for n in range(1, nu + 1):
        e = eps[n - 1]
        z = e * q
        if n == nu:
            # (q**nu - 1) / (q - 1) as a geometric sum
            ratio = sum(q**j for j in range(nu))
        else:
            ratio = (ht - 1.0) / (z - 1.0)
        total += e / (nu * q ** (nu - 1)) * ratio * np.exp(lam * (z - 1.0) * u)
    poisson = sum((lam * u) ** (n - 1) / special.factorial(n - 1) for n in range(1, nu + 1))
    return total - poisson * np.exp(-lam * u)


def _pi1_nu2(proc, omega, u):
    lam = proc.waiting.rate
    root = np.sqrt(proc.jump.characteristic(omega) + 0j)
    z = lam * root * u
    return np.exp(-lam * u) * (np.sinh(z) / root + np.cosh(z) - 1.0 - lam * u)


def _pinf_nu2(proc, omega, tau):
    lam = proc.waiting.rate
    ht = proc.jump.characteristic(omega) + 0j
    root = np.sqrt(ht)
    z = lam * root * tau
    return np.exp(-lam * tau) * (
        (1.0 + ht) / (2.0 * root) * np.sinh(z) + np.cosh(z) - 1.0 - lam * tau / 2.0
    )


def _pi1_bromwich(proc, omega, u, contour):
    psi_of = proc.waiting.laplace
    ht = proc.jump.characteristic(omega)[None, :]

    def F(s):
        psi = psi_of(s)[:, None]
        return (1.0 - psi) * ht * psi / (s[:, None] * (1.0 - ht * psi))

    return laplace_invert(F, u, contour, hermitian=False)


def _pi1(proc, omega, u, numerics, backend):
    if u <= 0:
        return np.zeros(np.shape(omega), dtype=complex)
    if backend == "nu2":
        return _pi1_nu2(proc, omega, u)
    if backend == "residue":
        return _pi1_residue(proc, omega, u)
    return _pi1_bromwich(proc, omega, u, numerics.contour)


def _powers(ht, n):
    # ht**1 .. ht**n along a new trailing axis
    return np.cumprod(np.repeat(np.asarray(ht)[..., None], n, axis=-1), axis=-1)


def _assemble(proc, x_grid, grid, delta, weights, g_rem, diag):
    fi = fourier_invert(None, grid, values=g_rem)
    weights = np.asarray(weights, dtype=float)
    density = fi.values.copy()
    for n, a in enumerate(weights, 1):
        density += a * proc.jump.convolution_power(n, x_grid)
    diag = dict(diag)
    diag.update(
        truncated=fi.truncated,
        tail=fi.tail,
        jump_count_weights=weights,
        single_jump_weight=float(weights[0]),
    )
    lowest = float(density.min()) if density.size else 0.0
    if lowest < -1e-8:
        warnings.warn(f"propagator density dips to {lowest:.2e}", RuntimeWarning, stacklevel=3)
    return PropagatorResult(float(delta), np.asarray(x_grid, dtype=float), density, diag)


def _transform_route(proc, t, x_grid, lag_hat, delta, numerics, backend):
    psi_of = proc.waiting.laplace
    contour = numerics.contour
    grid = numerics.fourier_grid(proc.jump, x_grid)
    ht = proc.jump.characteristic(grid.omega)[None, :]
    N = numerics.closed_terms
    expo = np.arange(N)[None, :]

    def A(s):
        psi = psi_of(s)[:, None]
        return (lag_hat(s) * (1.0 - psi_of(s)) / s)[:, None] * psi**expo

    weights, leak = laplace_invert(A, t, contour, full_output=True)

    def F(s):
        psi = psi_of(s)[:, None]
        lag = lag_hat(s)[:, None]
        hp = ht * psi
        return lag * (1.0 - psi) * ht * hp**N / (s[:, None] * (1.0 - hp))

    g = laplace_invert(F, t, contour, hermitian=False)
    return _assemble(proc, x_grid, grid, delta, weights, g, {"backend": backend, "imag_leakage": leak})


def _smoothstep_nodes(t, n):
    # tau' = t S(v), S(v) = v^2 (3 - 2 v): S' vanishes at both ends, taming
    # algebraic endpoint behaviour of the lag density and of Pi1 near u = 0
    v, w = np.polynomial.legendre.leggauss(n)
    v = 0.5 * (v + 1.0)
    w = 0.5 * w
    lag = t * v * v * (3.0 - 2.0 * v)
    jac = t * 6.0 * v * (1.0 - v)
    return lag, w * jac


def _lag_route(proc, t, x_grid, lag_pdf, delta, numerics, backend):
    grid = numerics.fourier_grid(proc.jump, x_grid)
    w = grid.omega
    ht = proc.jump.characteristic(w)
    lag, wts = _smoothstep_nodes(t, numerics.lag_nodes)
    wts = wts * np.asarray(lag_pdf(lag), dtype=float)
    remaining = t - lag
    N = numerics.closed_terms
    pmf = proc.waiting.jump_count_pmf(remaining, N - 1)
    weights = wts @ pmf
    hp = _powers(ht, N - 1)
    g = np.zeros(w.shape, dtype=complex)
    for wk, u, pk in zip(wts, remaining, pmf):
        g += wk * (_pi1(proc, w, u, numerics, backend) - hp @ pk[1:])
    g *= ht
    return _assemble(proc, x_grid, grid, delta, weights, g, {"backend": f"lag/{backend}"})


def _pi1_backend(proc):
    nu = proc.waiting.integer_shape
    if nu == 2:
        return "nu2"
    if nu is not None:
        return "residue"
    return "bromwich"


# -- public propagators ---------------------------------------------------


def after_jump_propagator(proc: CtrwProcess, t, x_grid=None, backend=None, numerics=None):
    """Propagator over elapsed time ``t`` starting at a jump epoch.

    backend : {'bessel', 'nu2', 'residue', 'transform', 'laplace_x'}
        ``bessel`` needs exponential waits and ``kappa = 1/2``; ``nu2`` and
        ``residue`` need Erlang waits (shape 2, any integer shape);
        ``transform`` is the generic double inversion; ``laplace_x`` inverts
        the closed-form Laplace transform at each grid point.  By default the
        first applicable one in that order.
    """
    numerics = numerics or Numerics()
    x_grid = default_x_grid(proc.jump) if x_grid is None else np.asarray(x_grid, dtype=float)
    t = float(t)
    if not t > 0:
        raise DomainError(f"propagator needs t > 0, got {t}")
    waiting, jump = proc.waiting, proc.jump
    nu = waiting.integer_shape
    if backend is None:
        if nu == 1 and jump.kappa == 0.5:
            backend = "bessel"
        else:
            backend = {1: "residue", 2: "nu2"}.get(nu, "residue" if nu else "transform")
    delta = float(waiting.sf(t))

    if backend == "bessel":
        if nu != 1 or jump.kappa != 0.5:
            raise ValueError("Bessel closed form needs exponential waits and kappa = 1/2")
        density = bessel_density(x_grid, t, waiting.rate, jump.gamma)
        return PropagatorResult(delta, x_grid, density, {"backend": "bessel"})
    if backend == "transform":
        return _transform_route(proc, t, x_grid, waiting.laplace, delta, numerics, backend)
    if backend == "laplace_x":
        vals, leak = laplace_invert(
            lambda s: pi_laplace_density(proc, x_grid[None, :], s[:, None]),
            t,
            numerics.contour,
            full_output=True,
        )
        return PropagatorResult(delta, x_grid, vals, {"backend": backend, "imag_leakage": leak})
    if backend in ("nu2", "residue"):
        if nu is None or (backend == "nu2" and nu != 2):
            raise ValueError(f"backend {backend!r} does not apply to shape {waiting.shape_fraction}")
        grid = numerics.fourier_grid(jump, x_grid)
        w = grid.omega
        weights = waiting.jump_count_pmf(t, numerics.closed_terms)[1:]
        g = _pi1(proc, w, t, numerics, backend) - _powers(jump.characteristic(w), len(weights)) @ weights
        return _assemble(proc, x_grid, grid, delta, weights, g, {"backend": backend})
    raise ValueError(f"unknown backend {backend!r}")


def general_propagator(proc: CtrwProcess, r, tau, x_grid=None, backend=None, numerics=None):
    """Propagator of the displacement over ``(r, r + tau]``, observed at lag ``r``.

    backend : {'transform', 'lag'}
        ``transform`` needs an integer shape (closed excess-life transform);
        ``lag`` integrates over the excess-life density.
    """
    numerics = numerics or Numerics()
    x_grid = default_x_grid(proc.jump) if x_grid is None else np.asarray(x_grid, dtype=float)
    tau = float(tau)
    if not tau > 0 or not r >= 0:
        raise DomainError("general propagator needs r >= 0 and tau > 0")
    law = ExcessLifeLaw(proc.waiting, r)
    delta = 1.0 - float(law.cdf(tau))
    if backend is None:
        backend = "transform" if proc.waiting.integer_shape is not None else "lag"
    if backend == "transform":
        return _transform_route(proc, tau, x_grid, law.laplace, delta, numerics, backend)
    if backend == "lag":
        return _lag_route(proc, tau, x_grid, law.pdf, delta, numerics, _pi1_backend(proc))
    raise ValueError(f"unknown backend {backend!r}")


def conditioned_propagator(proc: CtrwProcess, r, tau, x_grid=None, numerics=None):
    """Propagator given that the last jump happened exactly ``r`` ago.

    The lag to the next jump then has density ``psi(r + tau') / (1 - Psi(r))``.
    """
    numerics = numerics or Numerics()
    x_grid = default_x_grid(proc.jump) if x_grid is None else np.asarray(x_grid, dtype=float)
    tau = float(tau)
    if not tau > 0 or not r >= 0:
        raise DomainError("conditioned propagator needs r >= 0 and tau > 0")
    w = proc.waiting
    survive = float(w.sf(r))
    if w.cdf(r) >= 1.0 - 1e-12 or survive <= 0:
        raise ConditioningError(f"no-jump probability over lag {r} underflows")
    delta = float(w.sf(r + tau)) / survive
    return _lag_route(
        proc, tau, x_grid, lambda u: w.pdf(r + u) / survive, delta, numerics, _pi1_backend(proc)
    )


def stationary_propagator(proc: CtrwProcess, tau, x_grid=None, backend=None, numerics=None):
    """Propagator for an observer with no information on the jump phase.

    backend : {'pinf', 'transform'}
        ``pinf`` is the closed Fourier integrand for Erlang shape 2.
    """
    numerics = numerics or Numerics()
    x_grid = default_x_grid(proc.jump) if x_grid is None else np.asarray(x_grid, dtype=float)
    tau = float(tau)
    if not tau > 0:
        raise DomainError("stationary propagator needs tau > 0")
    law = StationaryExcess(proc.waiting)
    delta = 1.0 - float(law.cdf(tau))
    if backend is None:
        backend = "pinf" if proc.waiting.integer_shape == 2 else "transform"
    if backend == "transform":
        return _transform_route(proc, tau, x_grid, law.laplace, delta, numerics, backend)
    if backend == "pinf":
        if proc.waiting.integer_shape != 2:
            raise ValueError("closed stationary integrand needs Erlang shape 2")
        grid = numerics.fourier_grid(proc.jump, x_grid)
        w = grid.omega
        psi_of = proc.waiting.laplace
        expo = np.arange(numerics.closed_terms)[None, :]
        weights = laplace_invert(
            lambda s: (law.laplace(s) * (1.0 - psi_of(s)) / s)[:, None] * psi_of(s)[:, None] ** expo,
            tau,
            numerics.contour,
        )
        g = _pinf_nu2(proc, w, tau) - _powers(proc.jump.characteristic(w), len(weights)) @ weights
        return _assemble(proc, x_grid, grid, delta, weights, g, {"backend": backend})
    raise ValueError(f"unknown backend {backend!r}")


def accumulated_distribution(result: PropagatorResult, x, side="right", clip=False):
    """Distribution function ``F(x)`` including the point mass at the origin.

    ``side='left'`` gives the left limit ``F(x-)``, which differs from
    ``F(x)`` by ``delta_weight`` at ``x = 0`` only.  With ``clip`` the
    density is taken from :meth:`PropagatorResult.clipped_density`.
    """
    grid = result.x_grid
    x = np.asarray(x, dtype=float)
    if np.any(x < grid[0]) or np.any(x > grid[-1]):
        raise DomainError("x outside the propagator grid")
    d = result.clipped_density() if clip else result.density
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(grid))])
    cont = np.interp(x, grid, cum)
    atom = (x >= 0) if side == "right" else (x > 0)
    return cont + result.delta_weight * atom


def pi_fourier_time(proc: CtrwProcess, omega, t, contour=None):
    """``Pi_tilde(omega, t)`` by Laplace inversion at fixed ``omega``."""
    ht = complex(proc.jump.characteristic(omega))
    if ht == 1.0:
        return 1.0 + 0j
    return complex(
        laplace_invert(lambda s: pi_transform(proc, omega, s), t, contour, hermitian=False)
    )


def chapman_kolmogorov_defect(proc: CtrwProcess, omega, t, l, contour=None):
    """``|Pi(w, t + l) - Pi(w, t) Pi(w, l)|`` in the Fourier domain."""
    if not (t > 0 and l > 0):
        raise DomainError("Chapman-Kolmogorov check needs t, l > 0")
    a = pi_fourier_time(proc, omega, t + l, contour)
    b = pi_fourier_time(proc, omega, t, contour)
    c = pi_fourier_time(proc, omega, l, contour)
    return abs(a - b * c)
