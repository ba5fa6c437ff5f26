"""Cross-validation battery: analytic results against Monte Carlo.

Every check compares in both directions, i.e. it fails whether the
analytic or the simulated side is wrong.  Mean-type checks pass when the
two sides agree within three standard errors; distribution checks use
Kolmogorov-Smirnov or chi-square tests at the 1% level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from . import mc
from .exit_times import ExitProblem, mean_exit_time, met_correction, solve_after_jump_met
from .models import CtrwProcess, Erlang, Exponential, GammaRational, JumpModel
from .propagator import after_jump_propagator, bessel_density, general_propagator
from .renewal import ExcessLifeLaw, RenewalFunction

__all__ = ["Check", "run_battery", "bin_probabilities"]

ALPHA = 0.01
N_SE = 3.0


@dataclass(frozen=True)
class Check:
    statistic: str
    analytic: float
    mc: float
    se: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _mean_check(name, analytic, est: mc.SampleMean):
    return Check(name, float(analytic), est.mean, est.se, bool(abs(est.mean - analytic) <= N_SE * est.se))


def _pvalue_check(name, p, expect_reject=False):
    # analytic column holds the significance level, mc the p-value
    ok = p < ALPHA if expect_reject else p >= ALPHA
    return Check(name, ALPHA, float(p), float("nan"), bool(ok))


def bin_probabilities(result, edges, sub=16):
    """Integrate a propagator density over histogram bins (Gauss-Legendre per bin)."""
    gx, gw = np.polynomial.legendre.leggauss(sub)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = half[:, None] * (gx[None, :] + 1.0) + lo[:, None]
    vals = np.interp(x.ravel(), result.x_grid, result.density).reshape(x.shape)
    return (vals * gw[None, :]).sum(axis=1) * half


def _waiting_checks(n, seed):
    out = []
    rng = mc.RngStream(seed, 0, key=10).generator()
    out.append(_mean_check("waiting_mean_erlang2", 2.0, mc.SampleMean.of(mc.sample_waiting(Erlang(2, 1.0), rng, n))))
    rng = mc.RngStream(seed, 0, key=11).generator()
    x = mc.sample_waiting(Exponential(1.0), rng, n)
    out.append(_mean_check("waiting_var_exponential", 1.0, mc.SampleMean.of((x - x.mean()) ** 2 * n / (n - 1))))
    rng = mc.RngStream(seed, 0, key=12).generator()
    out.append(_mean_check("waiting_mean_gamma_1/2", 0.5, mc.SampleMean.of(mc.sample_waiting(GammaRational(1, 2, 1.0), rng, n))))
    return out


def _renewal_checks(n, seed):
    out = []
    jump = JumpModel(1.0)
    for i, w in enumerate((Exponential(1.0), Erlang(2, 1.0), GammaRational(1, 2, 1.0))):
        rf = RenewalFunction(w)
        for j, mult in enumerate((1, 5, 20)):
            t = mult * w.mean
            est = mc.count_jumps(CtrwProcess(w, jump), t, n, seed, key=20 + 3 * i + j)
            out.append(_mean_check(f"jump_count_nu={w.shape:g}_t={mult}mu", rf(t), est))
    return out


def _excess_checks(n, seed):
    jump = JumpModel(1.0)
    expo = CtrwProcess(Exponential(1.0), jump)
    er2 = CtrwProcess(Erlang(2, 1.0), jump)
    half = CtrwProcess(GammaRational(1, 2, 1.0), jump)
    out = []
    s = mc.estimate_excess_life(expo, 2.0, n, seed, key=40)
    out.append(_pvalue_check("excess_ks_exponential_r=2", mc.ks_test(s.samples, lambda t: 1 - np.exp(-t))))
    s = mc.estimate_excess_life(er2, 1.0, n, seed, key=41)
    out.append(_mean_check("excess_mean_erlang2_r=1", (3 + np.exp(-2.0)) / 2.0, s.mean))
    s = mc.estimate_excess_life(er2, 0.0, n, seed, key=42)
    out.append(_pvalue_check("excess_ks_erlang2_r=0", mc.ks_test(s.samples, er2.waiting.cdf)))
    s = mc.estimate_excess_life(half, 1.0, n, seed, key=43)
    out.append(_mean_check("excess_mean_gamma_1/2_r=1", ExcessLifeLaw(half.waiting, 1.0).mean(), s.mean))
    law = ExcessLifeLaw(er2.waiting, 1.0)
    s = mc.estimate_excess_life(er2, 1.0, n, seed, key=44)
    out.append(_pvalue_check("excess_ks_erlang2_r=1", mc.ks_test(s.samples, law.cdf)))
    a = mc.estimate_excess_life(expo, 0.0, n, seed, key=45)
    b = mc.estimate_excess_life(expo, 5.0, n, seed, key=46)
    out.append(_pvalue_check("memoryless_exponential_r=0_vs_5", mc.ks_two_sample(a.samples, b.samples)))
    a = mc.estimate_excess_life(er2, 0.0, n, seed, key=47)
    b = mc.estimate_excess_life(er2, 5.0, n, seed, key=48)
    out.append(
        _pvalue_check("non_markov_erlang2_r=0_vs_5", mc.ks_two_sample(a.samples, b.samples), expect_reject=True)
    )
    return out


def _propagator_checks(n, seed):
    out = []
    # one-sided jumps, exponential waits: per-bin against the Bessel form
    bessel = CtrwProcess(Exponential(1.0), JumpModel(1.0, 0.5))
    edges = np.linspace(0.0, 10.0, 21)
    hist = mc.estimate_propagator(bessel, 0.0, 2.0, edges, n, seed, key=60)
    out.append(
        Check("bessel_no_jump", float(np.exp(-2.0)), hist.no_jump_weight, hist.no_jump_se,
              abs(hist.no_jump_weight - np.exp(-2.0)) <= N_SE * hist.no_jump_se)
    )
    for k in range(len(edges) - 1):
        p, _ = integrate.quad(lambda x: bessel_density(x, 2.0, 1.0, 1.0), edges[k], edges[k + 1])
        q, se = hist.probabilities[k], hist.se[k]
        out.append(Check(f"bessel_bin[{edges[k]:g},{edges[k + 1]:g})", p, float(q), float(se), abs(q - p) <= N_SE * se))

    # general propagator for Erlang 2 observed one time unit after a jump
    proc = CtrwProcess(Erlang(2, 1.0), JumpModel(1.0, 0.1))
    r, tau = 1.0, 2.0
    law = ExcessLifeLaw(proc.waiting, r)
    edges = np.linspace(-6.0, 6.0, 25)
    hist = mc.estimate_propagator(proc, r, tau, edges, n, seed, key=61)
    delta = 1.0 - float(law.cdf(tau))
    out.append(
        Check("general_no_jump_erlang2_r=1_tau=2", delta, hist.no_jump_weight, hist.no_jump_se,
              abs(hist.no_jump_weight - delta) <= N_SE * hist.no_jump_se)
    )
    x = np.linspace(-6.5, 6.5, 2048)
    gen = general_propagator(proc, r, tau, x_grid=x)
    after = after_jump_propagator(proc, tau, x_grid=x)
    counts = hist.counts
    for name, res, reject in (("general", gen, False), ("after_jump", after, True)):
        expected = bin_probabilities(res, edges) * n
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        p = float(stats.chi2.sf(chi2, len(counts)))
        label = f"histogram_vs_{name}_erlang2_r=1_tau=2"
        out.append(_pvalue_check(label, p, expect_reject=reject))

    small = mc.estimate_propagator(proc, 0.0, 0.001, edges, n, seed, key=62)
    out.append(Check("no_jump_small_tau", 0.999, small.no_jump_weight, small.no_jump_se, small.no_jump_weight >= 0.999))
    return out


def _met_checks(n, seed):
    out = []
    expo = CtrwProcess(Exponential(1.0), JumpModel(1.0))
    sol = solve_after_jump_met(ExitProblem(expo, 0.0, 2.0))
    out.append(_mean_check("met_exponential_[0,2]_x=1", sol(1.0), mc.estimate_met(expo, 0.0, 2.0, 1.0, 0.0, n, seed, key=80)))

    er2 = CtrwProcess(Erlang(2, 1.0), JumpModel(1.0))
    problem = ExitProblem(er2, 0.0, 4.0)
    sol = solve_after_jump_met(problem)
    base = mc.estimate_met(er2, 0.0, 4.0, 2.0, 0.0, n, seed, key=81)
    out.append(_mean_check("met_erlang2_[0,4]_x=2_r=0", sol(2.0), base))
    for i, r in enumerate((0.5, 1.0, 2.0)):
        est = mc.estimate_met(er2, 0.0, 4.0, 2.0, r, n, seed, key=82 + i)
        diff = mc.SampleMean(est.mean - base.mean, float(np.hypot(est.se, base.se)), n)
        out.append(_mean_check(f"met_shift_erlang2_r={r:g}", met_correction(er2.waiting, r), diff))
        if r == 1.0:
            out.append(_mean_check("met_erlang2_[0,4]_x=2_r=1", mean_exit_time(problem, 2.0, r, sol), est))

    tiny = ExitProblem(er2, 0.0, 1e-3, 16)
    est = mc.estimate_met(er2, 0.0, 1e-3, 5e-4, 1.0, n, seed, key=86)
    out.append(_mean_check("met_tiny_interval_erlang2_r=1", mean_exit_time(tiny, 5e-4, 1.0), est))
    return out


def run_battery(seed: int = 42, n_paths: int = 100_000) -> list[Check]:
    """Run every Monte Carlo cross-check and return the results in a fixed order."""
    checks = []
    for group in (_waiting_checks, _renewal_checks, _excess_checks, _propagator_checks, _met_checks):
        checks.extend(group(n_paths, seed))
    return checks
