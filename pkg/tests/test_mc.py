import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctrw import mc
from ctrw.errors import DomainError, PathCapError
from ctrw.models import CtrwProcess, Erlang, Exponential, GammaRational, JumpModel
from ctrw.renewal import ExcessLifeLaw, RenewalFunction


def P(w, gamma=1.0, kappa=0.0):
    return CtrwProcess(w, JumpModel(gamma, kappa))


def test_stream_reproducible_and_distinct():
    a = mc.RngStream(7, 3).generator().random(5)
    b = mc.RngStream(7, 3).generator().random(5)
    c = mc.RngStream(7, 4).generator().random(5)
    d = mc.RngStream(7, 3, key=1).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


@pytest.mark.parametrize("w,mean,var", [
    (Erlang(2, 1.0), 2.0, 2.0),
    (Exponential(1.0), 1.0, 1.0),
    (GammaRational(1, 2, 1.0), 0.5, 0.5),
    (GammaRational(3, 2, 2.0), 0.75, 0.375),
])
def test_waiting_moments(w, mean, var):
    x = mc.sample_waiting(w, mc.RngStream(1, 0).generator(), 10**6)
    assert x.shape == (10**6,) and np.all(x > 0)
    assert abs(x.mean() - mean) <= 5 * np.sqrt(var / x.size)
    assert x.var(ddof=1) == pytest.approx(var, rel=0.01)
    assert np.ndim(mc.sample_waiting(w, mc.RngStream(1, 0).generator())) == 0


def test_jump_sampler():
    j = JumpModel(2.0, 0.3)
    x = mc.sample_jump(j, mc.RngStream(2, 0).generator(), 10**6)
    assert np.mean(x > 0) == pytest.approx(0.8, abs=2e-3)
    assert np.mean(np.abs(x)) == pytest.approx(0.5, rel=5e-3)


def test_sample_path_structure():
    rng = mc.RngStream(3, 0).generator()
    proc = P(Erlang(2, 1.0))
    for _ in range(50):
        path = mc.sample_path(proc, 10.0, rng)
        assert path.jump_times.size == path.jump_sizes.size
        assert np.all(np.diff(path.jump_times) > 0)
        assert np.all(path.jump_times <= 10.0)
        assert path.position(0.0) == 0.0
        assert path.position(10.0) == pytest.approx(path.jump_sizes.sum())
    # horizon shorter than any plausible first wait
    short = mc.sample_path(P(Exponential(1e-9)), 1.0, rng)
    assert short.jump_times.size == 0
    with pytest.raises(DomainError):
        mc.sample_path(proc, 0.0, rng)


def test_path_cap(monkeypatch):
    monkeypatch.setattr(mc, "JUMP_CAP", 100)
    with pytest.raises(PathCapError):
        mc.sample_path(P(Exponential(1.0)), 1000.0, mc.RngStream(0, 0).generator())
    with pytest.raises(PathCapError):
        mc.estimate_met(P(Exponential(1.0), gamma=1e-4), 0.0, 1e6, 5e5, 0.0, 10, 0)


@pytest.mark.parametrize("w", [Exponential(1.0), Erlang(2, 1.0), GammaRational(1, 2, 1.0)])
def test_jump_counts_match_renewal(w):
    rf = RenewalFunction(w)
    for mult in (1, 5, 20):
        est = mc.count_jumps(P(w), mult * w.mean, 100_000, 11)
        assert est.z(rf(mult * w.mean)) <= 3


def test_poisson_count():
    est = mc.count_jumps(P(Exponential(2.0)), 3.0, 100_000, 5)
    assert est.z(6.0) <= 3
    assert est.se == pytest.approx(np.sqrt(6.0 / 100_000), rel=0.02)


def test_thread_count_does_not_change_results(monkeypatch):
    proc = P(Erlang(2, 1.0), kappa=0.2)
    edges = np.linspace(-5, 5, 11)
    out = []
    for threads in ("1", "4"):
        monkeypatch.setenv("CTRW_THREADS", threads)
        assert mc.worker_count() == int(threads)
        out.append((
            mc.count_jumps(proc, 5.0, 70_000, 9),
            mc.estimate_excess_life(proc, 1.0, 70_000, 9).samples,
            mc.estimate_propagator(proc, 1.0, 2.0, edges, 70_000, 9).counts,
            mc.estimate_met(proc, 0.0, 2.0, 1.0, 0.5, 70_000, 9),
        ))
    assert out[0][0] == out[1][0]
    assert np.array_equal(out[0][1], out[1][1])
    assert np.array_equal(out[0][2], out[1][2])
    assert out[0][3] == out[1][3]
    monkeypatch.setenv("CTRW_THREADS", "many")
    with pytest.raises(DomainError):
        mc.worker_count()


def test_excess_life_samples():
    er2 = P(Erlang(2, 1.0))
    s = mc.estimate_excess_life(er2, 1.0, 100_000, 4)
    assert np.all(np.diff(s.samples) >= 0) and np.all(s.samples > 0)
    assert s.mean.z((3 + np.exp(-2.0)) / 2) <= 3
    law = ExcessLifeLaw(er2.waiting, 1.0)
    assert mc.ks_test(s.samples, law.cdf) >= 0.01
    for tau in (0.5, 2.0):
        assert abs(s.ecdf(tau) - law.cdf(tau)) <= 0.01
    with pytest.raises(DomainError):
        mc.estimate_excess_life(er2, -1.0, 10, 0)


def test_memorylessness_witness():
    expo, er2 = P(Exponential(1.0)), P(Erlang(2, 1.0))
    a = mc.estimate_excess_life(expo, 0.0, 100_000, 1).samples
    b = mc.estimate_excess_life(expo, 5.0, 100_000, 2).samples
    assert mc.ks_two_sample(a, b) >= 0.01
    a = mc.estimate_excess_life(er2, 0.0, 100_000, 1).samples
    b = mc.estimate_excess_life(er2, 5.0, 100_000, 2).samples
    assert mc.ks_two_sample(a, b) < 0.01


def test_propagator_histogram():
    proc = P(Erlang(2, 1.0), kappa=0.1)
    edges = np.linspace(-50, 50, 5)
    h = mc.estimate_propagator(proc, 1.0, 2.0, edges, 50_000, 3)
    assert h.counts.sum() + h.n_no_jump == 50_000
    delta = 1 - float(ExcessLifeLaw(proc.waiting, 1.0).cdf(2.0))
    assert abs(h.no_jump_weight - delta) <= 3 * h.no_jump_se
    assert np.allclose(h.density * 25, h.probabilities)
    small = mc.estimate_propagator(P(Exponential(1.0)), 0.0, 0.001, edges, 50_000, 3)
    assert small.no_jump_weight >= 0.999


def test_met_estimates():
    er2 = P(Erlang(2, 1.0))
    tiny = mc.estimate_met(er2, 0.0, 1e-9, 0.0, 1.0, 100_000, 8)
    assert tiny.z((3 + np.exp(-2.0)) / 2) <= 3
    with pytest.raises(DomainError):
        mc.estimate_met(er2, 0.0, 1.0, 2.0, 0.0, 10, 0)
    with pytest.raises(DomainError):
        mc.estimate_met(er2, 0.0, 1.0, 0.5, -1.0, 10, 0)
    with pytest.raises(DomainError):
        mc.count_jumps(er2, 1.0, 0, 0)
    with pytest.raises(DomainError):
        mc.count_jumps(er2, 1.0, 1, 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(2, 3000))
def test_estimates_deterministic(seed, n):
    proc = P(Erlang(2, 1.5))
    assert mc.count_jumps(proc, 2.0, n, seed) == mc.count_jumps(proc, 2.0, n, seed)
    s = mc.estimate_excess_life(proc, 0.7, n, seed)
    assert s.samples.size == n and np.all(s.samples > 0)
