import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from ctrw.errors import DomainError
from ctrw.models import Erlang, Exponential, GammaRational
from ctrw.renewal import (
    ExcessLifeLaw,
    RenewalFunction,
    StationaryExcess,
    excess_cdf,
    excess_density,
    excess_law,
    excess_mean,
    renewal_density,
    renewal_function,
    stationary_excess,
)


def half_density(t, lam=1.0):
    return np.sqrt(lam / (np.pi * t)) * np.exp(-lam * t) + lam * special.erfc(-np.sqrt(lam * t))


def half_function(t, lam=1.0):
    # integral of half_density from 0 to t
    lt = lam * t
    return np.sqrt(lt / np.pi) * np.exp(-lt) + (lt + 0.5) * special.erfc(-np.sqrt(lt)) - 0.5


def test_exponential_renewal():
    rf = RenewalFunction(Exponential(2.5))
    t = np.array([0.1, 1.0, 7.0])
    np.testing.assert_allclose(renewal_function(rf, t), 2.5 * t, rtol=1e-14)
    np.testing.assert_allclose(renewal_density(rf, t), 2.5, rtol=1e-14)


@pytest.mark.parametrize("backend", ["closed", "residue", "bromwich"])
def test_erlang2_renewal(backend):
    lam = 1.3
    rf = RenewalFunction(Erlang(2, lam), backend=backend)
    for t in (0.1, 1.0, 5.0):
        assert rf.density(t) == pytest.approx(lam / 2 * (1 - np.exp(-2 * lam * t)), abs=1e-9)
        assert rf(t) == pytest.approx(lam * t / 2 - (1 - np.exp(-2 * lam * t)) / 4, abs=1e-9)


def test_half_shape_closed_form():
    rf = RenewalFunction(GammaRational(1, 2, 1.0))
    for t in (0.1, 1.0, 5.0):
        assert rf.density(t) == pytest.approx(half_density(t), rel=1e-12)
        assert rf(t) == pytest.approx(half_function(t), abs=1e-8)
    assert rf(1.0) == pytest.approx(np.exp(-1) / np.sqrt(np.pi) + 1.5 * special.erfc(-1.0) - 0.5, abs=1e-12)


@pytest.mark.parametrize("backend", ["residue", "bromwich"])
def test_half_shape_generic_backends(backend):
    rf = RenewalFunction(GammaRational(1, 2, 1.0), backend=backend)
    for t in (0.1, 1.0, 5.0):
        assert rf(t) == pytest.approx(half_function(t), abs=1e-6)
        assert rf.density(t) == pytest.approx(half_density(t), abs=1e-6)


@pytest.mark.parametrize("n,q", [(3, 2), (1, 3), (5, 2), (2, 3)])
def test_rational_cut_backend_matches_bromwich(n, q):
    w = GammaRational(n, q, 0.8)
    cut = RenewalFunction(w, backend="residue")
    bro = RenewalFunction(w, backend="bromwich")
    for t in (0.3, 2.0, 9.0):
        assert cut.density(t) == pytest.approx(bro.density(t), abs=1e-7)
        assert cut(t) == pytest.approx(bro(t), abs=1e-6)


def test_renewal_basic_properties(waiting):
    rf = RenewalFunction(waiting)
    assert rf(0.0) == 0.0
    t = np.linspace(0, 20 * waiting.mean, 60)
    m = rf(t)
    assert np.all(np.diff(m) >= -1e-12)
    big = 50 * waiting.mean
    assert abs(rf(big) / (big / waiting.mean) - 1) <= 0.01


def test_renewal_domain():
    rf = RenewalFunction(Erlang(2, 1.0))
    with pytest.raises(DomainError):
        rf.density(0.0)
    with pytest.raises(DomainError):
        rf(-1.0)


# -- excess life --------------------------------------------------------------


def test_erlang2_closed_lattice():
    lam = 1.0
    w = Erlang(2, lam)
    for r in (0.0, 0.5, 1.0, 2.0):
        law = ExcessLifeLaw(w, r)
        for tau in (0.1, 0.5, 1.0, 2.0, 5.0):
            exact = 1 - np.exp(-lam * tau) * (1 + (1 + np.exp(-2 * lam * r)) / 2 * lam * tau)
            assert abs(excess_cdf(law, tau) - exact) <= 1e-12
        assert abs(excess_mean(law) - (3 + np.exp(-2 * lam * r)) / (2 * lam)) <= 1e-12


@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_generic_backend_matches_closed(r):
    for nu in (2, 3):
        w = Erlang(nu, 1.2)
        closed = ExcessLifeLaw(w, r, backend="closed")
        generic = ExcessLifeLaw(w, r, backend="generic")
        for tau in (0.2, 1.0, 4.0):
            assert generic.cdf(tau) == pytest.approx(closed.cdf(tau), abs=1e-9)
            assert generic.pdf(tau) == pytest.approx(closed.pdf(tau), abs=1e-9)
        assert generic.mean() == pytest.approx(closed.mean(), abs=1e-9)


def test_exponential_memoryless():
    w = Exponential(0.9)
    tau = np.array([0.0, 0.3, 2.0])
    for r in (0.0, 1.0, 7.0):
        law = ExcessLifeLaw(w, r)
        np.testing.assert_allclose(law.cdf(tau), 1 - np.exp(-0.9 * tau), atol=1e-14)
        np.testing.assert_allclose(law.pdf(tau), 0.9 * np.exp(-0.9 * tau), atol=1e-14)
        assert law.mean() == pytest.approx(1 / 0.9, rel=1e-13)


def test_zero_lag_is_waiting_law(waiting):
    law = ExcessLifeLaw(waiting, 0.0)
    tau = np.array([0.05, 0.5, 2.0])
    np.testing.assert_allclose(law.pdf(tau), waiting.pdf(tau), rtol=1e-12)
    np.testing.assert_allclose(law.cdf(tau), waiting.cdf(tau), atol=1e-12)
    assert law.mean() == pytest.approx(waiting.mean, rel=1e-12)


def test_excess_cdf_shape(waiting):
    law = ExcessLifeLaw(waiting, 1.1)
    assert law.cdf(0.0) == 0.0
    tau = np.linspace(0, 40 / waiting.rate, 40)
    F = np.array([law.cdf(t) for t in tau])
    assert np.all(np.diff(F) >= -1e-12)
    assert F[-1] == pytest.approx(1.0, abs=1e-5)


def test_density_normalised():
    law = ExcessLifeLaw(Erlang(2, 1.0), 1.0)
    val, _ = integrate.quad(law.pdf, 0, 40, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_density_is_cdf_derivative(waiting):
    law = ExcessLifeLaw(waiting, 0.8)
    h = 1e-4
    for tau in (0.3, 1.0, 2.5):
        fd = (law.cdf(tau + h) - law.cdf(tau - h)) / (2 * h)
        assert fd == pytest.approx(law.pdf(tau), rel=1e-5)


@pytest.mark.parametrize("nu", [1, 2, 3])
def test_renewal_equation_residual(nu):
    w = Erlang(nu, 1.0)
    for r in (0.5, 1.5):
        for tau in (0.4, 1.2):
            integrand = lambda u: (ExcessLifeLaw(w, r - u).cdf(tau) - 1) * w.pdf(u)
            val, _ = integrate.quad(integrand, 0, r, epsabs=1e-12)
            resid = ExcessLifeLaw(w, r).cdf(tau) - w.cdf(r + tau) - val
            assert abs(resid) <= 1e-6


def test_cdf_forms_agree():
    for w in (Erlang(2, 1.0), GammaRational(1, 2, 1.0), GammaRational(3, 2, 1.0)):
        law = ExcessLifeLaw(w, 1.3, backend="generic")
        for tau in (0.2, 1.0, 3.0):
            assert law.cdf(tau, form="rep") == pytest.approx(law.cdf(tau, form="repp"), abs=1e-7)


def test_generic_mean_is_first_moment():
    law = ExcessLifeLaw(GammaRational(1, 2, 1.0), 1.0)
    moment, _ = integrate.quad(lambda t: 1 - law.cdf(t), 0, np.inf, limit=200)
    assert law.mean() == pytest.approx(moment, abs=1e-6)


def test_stationary_limits():
    lam = 1.0
    w = Erlang(2, lam)
    st_law = stationary_excess(w)
    tau = np.linspace(0, 6, 13)
    np.testing.assert_allclose(st_law.pdf(tau), lam / 2 * (1 + lam * tau) * np.exp(-lam * tau), atol=1e-15)
    far = ExcessLifeLaw(w, 100 / lam)
    np.testing.assert_allclose(far.pdf(tau), st_law.pdf(tau), atol=1e-6)
    assert integrate.quad(st_law.pdf, 0, np.inf)[0] == pytest.approx(1.0, abs=1e-10)
    assert st_law.mean() == pytest.approx(1.5 / lam)
    assert excess_law(w, np.inf).mean() == st_law.mean()


def test_stationary_cdf_matches_quadrature(waiting):
    st_law = StationaryExcess(waiting)
    mu = waiting.mean
    for tau in (0.1, 1.0, 3.0):
        # Phi_inf = 1 - (1/mu) int_0^inf t psi(t + tau) dt
        tail, _ = integrate.quad(lambda t: t * waiting.pdf(t + tau), 0, np.inf, limit=200)
        assert st_law.cdf(tau) == pytest.approx(1 - tail / mu, abs=1e-8)


def test_exponential_stationary_is_ordinary():
    st_law = StationaryExcess(Exponential(2.0))
    tau = np.linspace(0, 3, 7)
    np.testing.assert_allclose(st_law.pdf(tau), 2 * np.exp(-2 * tau), atol=1e-15)


@pytest.mark.parametrize("waiting_key", ["erlang2", "erlang3", "gamma1/2", "gamma3/2"])
def test_large_lag_converges(waiting_key):
    from conftest import WAITING

    w = WAITING[waiting_key]
    law = ExcessLifeLaw(w, 100 * w.mean)
    st_law = StationaryExcess(w)
    tau = np.linspace(0.05, 6 * w.mean, 15)
    got = np.array([law.pdf(t) for t in tau])
    assert np.max(np.abs(got - st_law.pdf(tau))) <= 1e-4


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 5), st.floats(0, 8), st.integers(1, 4))
def test_erlang_cdf_in_unit_interval(r, tau, nu):
    law = ExcessLifeLaw(Erlang(nu, 1.0), r)
    F = law.cdf(tau)
    assert -1e-14 <= F <= 1 + 1e-14
    assert law.pdf(tau) >= -1e-14


def test_excess_domain():
    law = ExcessLifeLaw(Erlang(2, 1.0), 1.0)
    with pytest.raises(DomainError):
        excess_cdf(law, -0.1)
    with pytest.raises(DomainError):
        excess_density(law, -0.1)


@pytest.mark.parametrize("n,q", [(1, 2), (3, 2), (1, 3), (3, 1)])
def test_convolution_series_backend(n, q):
    w = GammaRational(n, q, 1.0) if q > 1 else Erlang(n, 1.0)
    series = RenewalFunction(w, backend="series")
    ref = RenewalFunction(w, backend="bromwich")
    for t in (0.3, 2.0, 30.0):
        assert series.density(t) == pytest.approx(ref.density(t), abs=1e-9)
        assert series(t) == pytest.approx(ref(t), rel=1e-9, abs=1e-10)


def test_small_time_rational_shape():
    # first-jump term dominates: m'(t) ~ psi(t) as t -> 0
    w = GammaRational(3, 2, 1.0)
    rf = RenewalFunction(w)
    for t in (1e-8, 1e-6, 1e-3):
        assert rf.density(t) == pytest.approx(w.pdf(t), rel=1e-3)
