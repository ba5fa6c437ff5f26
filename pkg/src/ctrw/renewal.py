"""Renewal function and the excess-life law of the first jump past ``r``.

The renewal function ``m(t)`` counts the mean number of jumps in ``(0, t]``
given a jump at the time origin.  The excess life ``tau_r`` is the delay
between the observation instant ``r`` and the next jump; its law
``Phi(tau | r)`` interpolates between the waiting-time law (``r = 0``) and
the stationary law ``(1 - Psi(tau)) / mu`` (``r -> inf``).

Closed forms are used for Erlang shapes and for shape 1/2; every other
rational shape goes through a pole-plus-branch-cut representation, and a
Bromwich backend is always available as a cross-check.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .models import WaitingTimeModel
from .numerics import BromwichContour, laplace_invert, residue_invert

__all__ = [
    "RenewalFunction",
    "ExcessLifeLaw",
    "StationaryExcess",
    "renewal_density",
    "renewal_function",
    "excess_cdf",
    "excess_density",
    "excess_mean",
    "stationary_excess",
    "excess_law",
]

# lags and durations beyond CAP / rate are treated as infinite
CAP = 1e4

_QUAD = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


def erlang_roots(nu: int, rate: float):
    """Roots of unity ``eps_j = exp(2 pi i j / nu)`` and ``b_j = rate (eps_j - 1)``.

    ``j = 1..nu`` so the last entry is ``eps = 1, b = 0``.
    """
    j = np.arange(1, nu + 1)
    eps = np.exp(2j * np.pi * j / nu)
    eps[-1] = 1.0
    return eps, rate * (eps - 1.0)


def _principal_poles(model: WaitingTimeModel):
    """Unit-modulus roots ``u`` of ``u**nu = 1`` on the principal sheet."""
    n, q = model.shape_fraction
    if q == 1:
        return erlang_roots(n, 1.0)[0]
    nu = n / q
    kmax = int(np.floor(nu / 2.0))
    ks = [k for k in range(-kmax, kmax + 1) if abs(k) < nu / 2.0]
    return np.exp(2j * np.pi * np.array(ks, dtype=float) / nu)


def _cut_weight(model: WaitingTimeModel):
    """Jump of psi_hat/(1-psi_hat) across the cut, as a function of y >= 0.

    With ``s = -rate (1 + y)`` the contribution of the cut to ``m'(t)`` is
    ``(rate/pi) exp(-rate t) int_0^inf exp(-rate t y) g(y) dy``.
    """
    nu = model.shape
    sin, cos = np.sin(np.pi * nu), np.cos(np.pi * nu)

    def g(y):
        yn = y**nu
        return sin * yn / (yn * yn - 2.0 * cos * yn + 1.0)

    return g


def _series_terms(model, t):
    # k = 1..K with K past the bulk of the Poisson-like weights
    x = model.rate * t
    kmax = int((x + 10.0 * np.sqrt(x) + 40.0) / model.shape) + 1
    return np.arange(1, kmax + 1) * model.shape, x


def _series_density(model, t):
    """``sum_k psi^{*k}(t)``: the k-fold convolutions are Gamma(k nu) densities."""
    a, x = _series_terms(model, t)
    logs = special.xlogy(a - 1.0, x) - x - special.gammaln(a)
    return model.rate * float(np.sum(np.exp(logs)))


def _series_function(model, t):
    a, x = _series_terms(model, t)
    return float(np.sum(special.gammainc(a, x)))


def _quad_half_line(f):
    a, _ = integrate.quad(f, 0.0, 1.0, **_QUAD)
    b, _ = integrate.quad(f, 1.0, np.inf, **_QUAD)
    return a + b


class RenewalFunction:
    """Renewal function ``m(t)`` and renewal density ``m'(t)`` of a waiting law.

    Parameters
    ----------
    model : WaitingTimeModel
    backend : {'closed', 'residue', 'bromwich', 'series'}, optional
        ``closed`` is available for integer shapes and shape 1/2, ``residue``
        for every rational shape (poles on the principal sheet plus a
        branch-cut integral), ``bromwich`` and ``series`` (sum of the
        convolution powers of the waiting law) for everything.  The default
        is the first of ``closed`` and ``residue`` available.

    Notes
    -----
    For ``rate * t < 1`` the ``residue`` backend switches to the series: the
    cut integrand then decays too slowly for adaptive quadrature, while the
    series needs only a few dozen terms.
    """

    def __init__(self, model: WaitingTimeModel, backend: str | None = None, contour=None):
        self.model = model
        self.contour = contour or BromwichContour()
        if backend is None:
            backend = "closed" if self._has_closed_form else "residue"
        if backend not in ("closed", "residue", "bromwich", "series"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "closed" and not self._has_closed_form:
            raise ValueError(f"no closed form for shape {model.shape_fraction}")
        self.backend = backend

    @property
    def _has_closed_form(self):
        return self.model.integer_shape is not None or self.model.shape_fraction == (1, 2)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("renewal density needs t > 0")
        return _vectorize(self._density, t)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("renewal function needs t >= 0")
        return _vectorize(self._function, t)

    # -- backends -----------------------------------------------------
    def _density(self, t):
        lam = self.model.rate
        if self.backend == "closed":
            nu = self.model.integer_shape
            if nu is None:
                x = lam * t
                return np.sqrt(lam / (np.pi * t)) * np.exp(-x) + lam * special.erfc(-np.sqrt(x))
            eps, b = erlang_roots(nu, lam)
            return residue_invert(list(zip(b, lam * eps / nu)), t)
        if self.backend == "series" or (self.backend == "residue" and lam * t < 1.0 and self.model.integer_shape is None):
            return _series_density(self.model, t)
        if self.backend == "residue":
            nu = self.model.shape
            u = _principal_poles(self.model)
            poles = np.sum(lam * u / nu * np.exp(lam * (u - 1.0) * t)).real
            if self.model.integer_shape is not None:
                return poles
            g = _cut_weight(self.model)
            cut = _quad_half_line(lambda y: np.exp(-lam * t * y) * g(y))
            return poles + lam / np.pi * np.exp(-lam * t) * cut
        psi = self.model.laplace
        return laplace_invert(lambda s: psi(s) / (1.0 - psi(s)), t, self.contour)

    def _function(self, t):
        if t == 0:
            return 0.0
        lam = self.model.rate
        if self.backend == "closed":
            nu = self.model.integer_shape
            if nu is None:
                x = lam * t
                return (
                    np.sqrt(x / np.pi) * np.exp(-x)
                    + (2.0 * x + 1.0) / 2.0 * special.erfc(-np.sqrt(x))
                    - 0.5
                )
            eps, b = erlang_roots(nu, lam)
            coef = eps[:-1] / (nu * (1.0 - eps[:-1]))
            return residue_invert(list(zip(b[:-1], -coef)), t, growth=(lam / nu, np.sum(coef).real))
        if self.backend == "series" or (self.backend == "residue" and lam * t < 1.0 and self.model.integer_shape is None):
            return _series_function(self.model, t)
        if self.backend == "residue":
            nu = self.model.shape
            u = _principal_poles(self.model)
            total = 0.0
            for uk in u:
                if abs(uk - 1.0) < 1e-14:
                    total += lam * t / nu
                else:
                    total += (uk / nu * np.expm1(lam * (uk - 1.0) * t) / (uk - 1.0)).real
            if self.model.integer_shape is not None:
                return total
            g = _cut_weight(self.model)
            cut = _quad_half_line(lambda y: g(y) * -np.expm1(-lam * (1.0 + y) * t) / (1.0 + y))
            return total + cut / np.pi
        psi = self.model.laplace
        return laplace_invert(lambda s: psi(s) / (s * (1.0 - psi(s))), t, self.contour)


def _vectorize(fn, t):
    if t.ndim == 0:
        return float(fn(float(t)))
    return np.array([fn(float(v)) for v in t.ravel()]).reshape(t.shape)


def renewal_density(rf: RenewalFunction, t):
    return rf.density(t)


def renewal_function(rf: RenewalFunction, t):
    return rf(t)


class StationaryExcess:
    """Excess-life law seen by an observer with no phase information.

    ``phi_inf(tau) = (1 - Psi(tau)) / mu``.
    """

    r = np.inf

    def __init__(self, model: WaitingTimeModel):
        self.model = model

    def pdf(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.model.sf(tau) / self.model.mean

    def cdf(self, tau):
        # 1 - (1/mu) int_0^inf t psi(t + tau) dt, written with regularised
        # upper incomplete gammas
        tau = np.maximum(np.asarray(tau, dtype=float), 0.0)
        nu, lam = self.model.shape, self.model.rate
        x = lam * tau
        return 1.0 - special.gammaincc(nu + 1.0, x) + x / nu * special.gammaincc(nu, x)

    def mean(self):
        m = self.model
        return (m.variance + m.mean**2) / (2.0 * m.mean)

    def laplace(self, s):
        s = np.asarray(s, dtype=complex)
        return (1.0 - self.model.laplace(s)) / (self.model.mean * s)


class ExcessLifeLaw:
    """Law of the excess life ``tau_r`` for an observation lag ``r``.

    Parameters
    ----------
    model : WaitingTimeModel
    r : float
        Time elapsed since the jump at the time origin.
    backend : {'closed', 'generic'}, optional
        ``closed`` (integer shapes only) uses the root-of-unity sums;
        ``generic`` integrates against the renewal density.
    """

    def __init__(self, model: WaitingTimeModel, r: float, backend: str | None = None, renewal=None):
        if not r >= 0:
            raise DomainError(f"observation lag must be >= 0, got {r}")
        self.model = model
        self.r = float(r)
        if backend is None:
            backend = "closed" if model.integer_shape is not None else "generic"
        if backend == "closed" and model.integer_shape is None:
            raise ValueError("closed excess-life law needs an integer shape")
        if backend not in ("closed", "generic"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self.renewal = renewal or RenewalFunction(model)
        self._stationary = self.r * model.rate > CAP

    @cached_property
    def alphas(self):
        """``alpha_n(r)``, n = 1..nu (integer shapes)."""
        nu = self.model.integer_shape
        eps, b = erlang_roots(nu, self.model.rate)
        n = np.arange(1, nu + 1)[:, None]
        return (eps[None, :] ** n * np.exp(b * self.r)[None, :]).sum(axis=1).real / nu

    def pdf(self, tau):
        tau = _check_tau(tau)
        if self._stationary:
            return StationaryExcess(self.model).pdf(tau)
        if self.backend == "closed":
            lam = self.model.rate
            nu = self.model.integer_shape
            n = np.arange(1, nu + 1)
            x = lam * tau[..., None]
            terms = lam * np.exp((n - 1) * np.log(np.where(x > 0, x, 1.0)) - x - special.gammaln(n))
            terms = np.where(x > 0, terms, np.where(n == 1, lam, 0.0))
            return terms @ self.alphas
        return _vectorize(self._pdf_generic, tau)

    def cdf(self, tau, form="repp"):
        tau = _check_tau(tau)
        if self._stationary:
            return StationaryExcess(self.model).cdf(tau)
        if self.backend == "closed":
            lam = self.model.rate
            nu = self.model.integer_shape
            n = np.arange(1, nu + 1)
            x = lam * tau[..., None]
            poisson = np.exp((n - 1) * np.log(np.where(x > 0, x, 1.0)) - x - special.gammaln(n))
            poisson = np.where(x > 0, poisson, np.where(n == 1, 1.0, 0.0))
            tails = np.cumsum(self.alphas[::-1])[::-1]
            return 1.0 - poisson @ tails
        fn = self._cdf_repp if form == "repp" else self._cdf_rep
        return _vectorize(fn, tau)

    def mean(self):
        if self._stationary:
            return StationaryExcess(self.model).mean()
        lam = self.model.rate
        if self.backend == "closed":
            nu = self.model.integer_shape
            eps, b = erlang_roots(nu, lam)
            s = np.sum(eps[:-1] / (eps[:-1] - 1.0) * np.exp(b[:-1] * self.r)).real
            return ((nu + 1) / 2.0 + s) / lam
        # Wald: E[first jump past r] = mu (1 + m(r))
        return self.model.mean * (1.0 + self.renewal(self.r)) - self.r

    def laplace(self, s):
        """Laplace transform of the excess-life density in ``tau``."""
        if self._stationary:
            return StationaryExcess(self.model).laplace(s)
        if self.model.integer_shape is None:
            raise NotImplementedError("excess-life transform needs an integer shape")
        s = np.asarray(s, dtype=complex)
        nu, lam = self.model.integer_shape, self.model.rate
        eps, b = erlang_roots(nu, lam)
        weights = lam * eps / nu * np.exp(b * self.r)
        poles = (weights / (s[..., None] - b)).sum(axis=-1)
        return poles * (1.0 - self.model.laplace(s))

    # -- generic quadratures --------------------------------------------
    def _pdf_generic(self, tau):
        m, r = self.model, self.r
        if r == 0:
            return float(m.pdf(tau))
        integrand = lambda u: m.pdf(r + tau - u) * self.renewal.density(u)
        val, _ = integrate.quad(integrand, 0.0, r, **_QUAD)
        return float(m.pdf(r + tau)) + val

    def _cdf_repp(self, tau):
        m, r = self.model, self.r
        if tau == 0:
            return 0.0
        if r == 0:
            return float(m.cdf(tau))
        integrand = lambda u: m.sf(r + tau - u) * self.renewal.density(u)
        val, _ = integrate.quad(integrand, r, r + tau, **_QUAD)
        return val

    def _cdf_rep(self, tau):
        m, r = self.model, self.r
        if r == 0:
            return float(m.cdf(tau))
        integrand = lambda u: m.sf(r + tau - u) * self.renewal.density(u)
        val, _ = integrate.quad(integrand, 0.0, r, **_QUAD)
        return float(m.cdf(r + tau)) - val


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("excess-life duration must be >= 0")
    return tau


def excess_law(model: WaitingTimeModel, r: float, **kwargs):
    """ExcessLifeLaw for finite ``r``; the stationary law for ``r = inf``."""
    if np.isinf(r):
        return StationaryExcess(model)
    return ExcessLifeLaw(model, r, **kwargs)


def excess_cdf(law, tau):
    return law.cdf(tau)


def excess_density(law, tau):
    return law.pdf(tau)


def excess_mean(law):
    return law.mean()


def stationary_excess(model: WaitingTimeModel) -> StationaryExcess:
    if not np.isfinite(model.mean):
        raise DomainError("stationary excess life needs a finite mean")
    return StationaryExcess(model)
