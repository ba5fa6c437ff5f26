"""Monte Carlo oracle for the analytic modules.

Paths start with a jump at ``t0 = 0``; "observed at r" means clock time
``r`` on that frame.  All estimators work on batches of paths advanced in
lockstep.  A batch of ``CHUNK`` paths draws from its own counter-based
Philox stream keyed by ``(seed, key, chunk index)``, and batches are reduced
in index order, so results do not depend on how many workers ran them.
``CTRW_THREADS`` caps the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError, PathCapError
from .models import CtrwProcess, WaitingTimeModel

__all__ = [
    "RngStream",
    "PathSample",
    "SampleMean",
    "ExcessLifeSample",
    "PropagatorHistogram",
    "sample_waiting",
    "sample_path",
    "count_jumps",
    "estimate_excess_life",
    "estimate_propagator",
    "estimate_met",
    "worker_count",
]

CHUNK = 1 << 14
JUMP_CAP = 10**6


@dataclass(frozen=True)
class RngStream:
    """Independent random stream ``(seed, stream_id)``; ``key`` separates estimators."""

    seed: int
    stream_id: int
    key: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.key, self.stream_id))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PathSample:
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    horizon: float

    def position(self, t, x0=0.0):
        """Position at time ``t`` (right-continuous)."""
        n = np.searchsorted(self.jump_times, t, side="right")
        return x0 + float(np.sum(self.jump_sizes[:n]))


@dataclass(frozen=True)
class SampleMean:
    mean: float
    se: float
    n: int

    @classmethod
    def of(cls, x):
        x = np.asarray(x, dtype=float)
        if x.size < 2:
            raise DomainError("a standard error needs at least two samples")
        return cls(float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size)), int(x.size))

    def z(self, value) -> float:
        """Standardised distance to ``value``."""
        return abs(self.mean - value) / self.se if self.se > 0 else (0.0 if self.mean == value else np.inf)


@dataclass(frozen=True)
class ExcessLifeSample:
    samples: np.ndarray  # sorted

    def ecdf(self, tau):
        return np.searchsorted(self.samples, tau, side="right") / self.samples.size

    @property
    def mean(self) -> SampleMean:
        return SampleMean.of(self.samples)


@dataclass(frozen=True)
class PropagatorHistogram:
    """Histogram of displacements of the paths that jumped in the window.

    ``counts[k] / n_paths`` estimates the probability of bin ``k``; paths
    without a jump only enter ``no_jump_weight``.
    """

    edges: np.ndarray
    counts: np.ndarray
    n_no_jump: int
    n_paths: int

    @property
    def no_jump_weight(self) -> float:
        return self.n_no_jump / self.n_paths

    @property
    def no_jump_se(self) -> float:
        p = self.no_jump_weight
        return float(np.sqrt(p * (1 - p) / self.n_paths))

    @property
    def probabilities(self):
        return self.counts / self.n_paths

    @property
    def se(self):
        p = self.probabilities
        return np.sqrt(p * (1 - p) / self.n_paths)

    @property
    def density(self):
        return self.probabilities / np.diff(self.edges)


def worker_count() -> int:
    env = os.environ.get("CTRW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"CTRW_THREADS must be an integer, got {env!r}") from None
    return min(os.cpu_count() or 1, 8)


def _run_chunks(fn, n_paths, seed, key):
    """Apply ``fn(rng, n)`` to consecutive batches and return results in order."""
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    sizes = [min(CHUNK, n_paths - s) for s in range(0, n_paths, CHUNK)]
    jobs = [(RngStream(seed, i, key).generator(), n) for i, n in enumerate(sizes)]
    workers = min(worker_count(), len(jobs))
    if workers == 1:
        return [fn(rng, n) for rng, n in jobs]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# -- samplers ---------------------------------------------------------------


def sample_waiting(model: WaitingTimeModel, rng, size=None):
    """Draw waiting times.

    Exponential by inverting the CDF, Erlang as a sum of exponentials, and
    other shapes with numpy's Gamma rejection sampler (valid for any shape).
    """
    lam = model.rate
    nu = model.integer_shape
    if nu == 1:
        return -np.log1p(-rng.random(size)) / lam
    if nu is not None:
        shape = (nu,) if size is None else (nu,) + tuple(np.atleast_1d(size))
        return -np.log1p(-rng.random(shape)).sum(axis=0) / lam
    return rng.standard_gamma(model.shape, size) / lam


def sample_jump(jump, rng, size=None):
    """Bi-exponential jumps: exponential magnitude, sign right w.p. 1/2 + kappa."""
    mag = rng.exponential(1.0 / jump.gamma, size)
    right = rng.random(size) < jump.p_right
    return np.where(right, mag, -mag)


def sample_path(proc: CtrwProcess, horizon: float, rng) -> PathSample:
    """One path on ``(0, horizon]``; the first jump past the horizon is dropped."""
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    times = []
    t = 0.0
    while True:
        t += float(sample_waiting(proc.waiting, rng))
        if t > horizon:
            break
        times.append(t)
        if len(times) > JUMP_CAP:
            raise PathCapError(f"path exceeded {JUMP_CAP} jumps before t = {horizon}")
    times = np.asarray(times)
    sizes = sample_jump(proc.jump, rng, times.size)
    return PathSample(times, np.asarray(sizes, dtype=float), float(horizon))


def _first_jump_after(model, r, rng, n):
    """Epoch of the first jump strictly after ``r`` for ``n`` renewal sequences."""
    t = sample_waiting(model, rng, n)
    active = np.flatnonzero(t <= r)
    steps = 0
    while active.size:
        t[active] += sample_waiting(model, rng, active.size)
        active = active[t[active] <= r]
        steps += 1
        if steps > JUMP_CAP:
            raise PathCapError(f"renewal sequence exceeded {JUMP_CAP} jumps before r = {r}")
    return t


# -- estimators ----------------------------------------------------------


def count_jumps(proc: CtrwProcess, horizon: float, n_paths: int, seed: int, key: int = 1) -> SampleMean:
    """Mean number of jumps in ``(0, horizon]``."""
    if not horizon > 0:
        raise DomainError("horizon must be positive")

    def run(rng, n):
        t = sample_waiting(proc.waiting, rng, n)
        count = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(t <= horizon)
        while active.size:
            count[active] += 1
            t[active] += sample_waiting(proc.waiting, rng, active.size)
            active = active[t[active] <= horizon]
        return count

    return SampleMean.of(np.concatenate(_run_chunks(run, n_paths, seed, key)))


def estimate_excess_life(proc: CtrwProcess, r: float, n_paths: int, seed: int, key: int = 2) -> ExcessLifeSample:
    """Delay from ``r`` to the next jump, one sample per path."""
    if not r >= 0:
        raise DomainError("r must be >= 0")
    run = lambda rng, n: _first_jump_after(proc.waiting, r, rng, n) - r
    return ExcessLifeSample(np.sort(np.concatenate(_run_chunks(run, n_paths, seed, key))))


def estimate_propagator(
    proc: CtrwProcess, r: float, tau: float, bins, n_paths: int, seed: int, key: int = 3
) -> PropagatorHistogram:
    """Displacement over ``(r, r + tau]`` split into no-jump mass and a histogram."""
    if not (r >= 0 and tau > 0):
        raise DomainError("need r >= 0 and tau > 0")
    edges = np.asarray(bins, dtype=float)
    end = r + tau

    def run(rng, n):
        t = _first_jump_after(proc.waiting, r, rng, n)
        x = np.zeros(n)
        jumped = t <= end
        active = np.flatnonzero(jumped)
        while active.size:
            x[active] += sample_jump(proc.jump, rng, active.size)
            t[active] += sample_waiting(proc.waiting, rng, active.size)
            active = active[t[active] <= end]
        counts, _ = np.histogram(x[jumped], edges)
        return counts, int(n - jumped.sum())

    parts = _run_chunks(run, n_paths, seed, key)
    counts = np.sum([c for c, _ in parts], axis=0)
    return PropagatorHistogram(edges, counts, sum(k for _, k in parts), n_paths)


def estimate_met(
    proc: CtrwProcess, a, b, x_r, r, n_paths: int, seed: int, key: int = 4
) -> SampleMean:
    """Mean time from ``r`` until a jump lands strictly outside ``[a, b]``."""
    if not a <= x_r <= b:
        raise DomainError(f"x_r = {x_r} outside [{a}, {b}]")
    if not r >= 0:
        raise DomainError("r must be >= 0")

    def run(rng, n):
        t = _first_jump_after(proc.waiting, r, rng, n)
        x = np.full(n, float(x_r))
        active = np.arange(n)
        jumps = 0
        while True:
            x[active] += sample_jump(proc.jump, rng, active.size)
            inside = (x[active] >= a) & (x[active] <= b)
            active = active[inside]
            if not active.size:
                break
            jumps += 1
            if jumps > JUMP_CAP:
                raise PathCapError(f"a path made {JUMP_CAP} jumps without leaving [{a}, {b}]")
            t[active] += sample_waiting(proc.waiting, rng, active.size)
        return t - r

    return SampleMean.of(np.concatenate(_run_chunks(run, n_paths, seed, key)))


def ks_test(sample, cdf):
    """One-sample Kolmogorov-Smirnov p-value."""
    return float(stats.kstest(sample, cdf).pvalue)


def ks_two_sample(x, y):
    return float(stats.ks_2samp(x, y).pvalue)
