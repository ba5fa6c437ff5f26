"""Data behind the two propagator figures.

* ``fig2``: exponential waits with ``lambda tau = 2``, unit ``gamma`` and
  bias ``kappa`` in {0, 0.1, 0.25, 0.4, 0.5}.
* ``fig3``: ``kappa = 0.1`` and Erlang shapes 1..4, each rate chosen so
  that the no-jump probability ``1 - Psi(tau)`` equals ``exp(-2)``.

Both use the after-jump propagator on a grid wide enough that the one-sided
case keeps its right tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .models import CtrwProcess, Erlang, Exponential, JumpModel
from .propagator import Numerics, accumulated_distribution, after_jump_propagator, default_x_grid

__all__ = ["FigureData", "fig2", "fig3", "fig3_rates", "FIGURES"]

FIG2_KAPPAS = (0.0, 0.1, 0.25, 0.4, 0.5)
NO_JUMP_LOG = -2.0


@dataclass
class FigureData:
    name: str
    x: np.ndarray
    labels: list[str]
    density: np.ndarray  # (n_curves, n_x), clipped
    F: np.ndarray
    delta_weights: np.ndarray
    params: dict


def _grid(gamma):
    # twice the default span at the default spacing
    return default_x_grid(JumpModel(gamma), n=2048, half_width=24.0)


def _collect(name, procs, labels, tau, gamma, numerics, params):
    x = _grid(gamma)
    dens, F, delta = [], [], []
    for proc in procs:
        res = after_jump_propagator(proc, tau, x_grid=x, numerics=numerics)
        dens.append(res.clipped_density())
        F.append(accumulated_distribution(res, x, clip=True))
        delta.append(res.delta_weight)
    return FigureData(name, x, labels, np.array(dens), np.array(F), np.array(delta), params)


def fig2(tau=1.0, gamma=1.0, numerics=None):
    lam = 2.0 / tau
    procs = [CtrwProcess(Exponential(lam), JumpModel(gamma, k)) for k in FIG2_KAPPAS]
    labels = [f"kappa={k:g}" for k in FIG2_KAPPAS]
    params = {"tau": tau, "lambda": lam, "gamma": gamma, "kappa": list(FIG2_KAPPAS)}
    return _collect("fig2", procs, labels, tau, gamma, numerics or Numerics(), params)


def fig3_rates(tau=1.0, shapes=(1, 2, 3, 4)):
    """Rates giving ``1 - Psi(tau) = exp(-2)`` for each Erlang shape."""
    return [float(special.gammainccinv(nu, np.exp(NO_JUMP_LOG))) / tau for nu in shapes]


def fig3(tau=1.0, gamma=1.0, kappa=0.1, numerics=None):
    shapes = (1, 2, 3, 4)
    rates = fig3_rates(tau, shapes)
    procs = [CtrwProcess(Erlang(nu, lam), JumpModel(gamma, kappa)) for nu, lam in zip(shapes, rates)]
    labels = [f"nu={nu}" for nu in shapes]
    params = {"tau": tau, "gamma": gamma, "kappa": kappa, "lambda": rates}
    return _collect("fig3", procs, labels, tau, gamma, numerics or Numerics(), params)


FIGURES = {"fig2": fig2, "fig3": fig3}
