"""Transform inversion engines.

Three engines are provided:

* :func:`laplace_invert` -- trapezoidal quadrature of the Bromwich integral
  along the vertical line ``Re(s) = c``.  The node spacing is ``pi / (l t)``
  so the discretisation (aliasing) error is of order ``exp(-2 l c t)``; the
  slowly convergent tail of the truncated sum is accelerated by Euler
  (binomial) averaging of partial sums taken over blocks of ``l`` nodes.
* :func:`residue_invert` -- sum of exponential residues plus linear growth,
  for transforms whose poles are known.
* :func:`fourier_invert` -- midpoint/trapezoidal quadrature of
  ``(1/2pi) int exp(-i w x) G(w) dw`` for Hermitian ``G``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .errors import DomainError, InversionError, StabilityError

__all__ = [
    "BromwichContour",
    "FourierGrid",
    "FourierInversion",
    "TruncationWarning",
    "laplace_invert",
    "residue_invert",
    "fourier_invert",
]

# nodes per Euler block; c*T = 2*_BLOCK for c = 1/t
_BLOCK = 13
_EULER_ORDER = 11


class TruncationWarning(UserWarning):
    """The Fourier integrand has not decayed at the truncation frequency."""


@dataclass(frozen=True)
class BromwichContour:
    """Vertical inversion contour ``Re(s) = c``.

    Parameters
    ----------
    c : float, optional
        Absolute abscissa.  When None the abscissa is ``1/t`` for each target
        time ``t``.
    n_nodes : int
        Number of quadrature nodes on the upper half of the line.
    """

    c: float | None = None
    n_nodes: int = 28 * _BLOCK

    def __post_init__(self):
        if self.c is not None and not self.c > 0:
            raise DomainError(f"contour abscissa must be positive, got {self.c}")
        if self.n_nodes < 32:
            raise DomainError(f"n_nodes must be >= 32, got {self.n_nodes}")

    def abscissa(self, t: float) -> float:
        return self.c if self.c is not None else 1.0 / t


def _euler_sum(partial, order):
    # partial: (n_blocks, ...) partial sums; binomial average of the last order+1
    n = partial.shape[0]
    order = min(order, n - 1)
    weights = comb(order, np.arange(order + 1)) / 2.0**order
    tail = partial[n - order - 1 :]
    return np.tensordot(weights, tail, axes=(0, 0))


def laplace_invert(F, t, contour=None, *, hermitian=True, full_output=False):
    """Invert a Laplace transform at a single time ``t > 0``.

    Parameters
    ----------
    F : callable
        Vectorised transform.  Called with a 1-D complex array of nodes of
        shape ``(K,)`` and must return an array of shape ``(K, ...)``; the
        trailing axes are carried through, so many transforms can be inverted
        in one call.
    t : float
        Target time.
    contour : BromwichContour, optional
    hermitian : bool
        Assume ``F(conj(s)) == conj(F(s))`` (real original).  Only the upper
        half of the line is evaluated and a real value is returned.  With
        ``hermitian=False`` both halves are evaluated and the (possibly
        complex) original is returned.
    full_output : bool
        With ``hermitian=True``, evaluate both halves anyway and also return
        the imaginary residue of the symmetric sum as a diagnostic.

    Returns
    -------
    value or (value, imag_residue)
    """
    contour = contour or BromwichContour()
    t = float(t)
    if not t > 0:
        raise DomainError(f"Laplace inversion needs t > 0, got {t}")
    c = contour.abscissa(t)
    l = _BLOCK
    n_blocks = max(contour.n_nodes // l, 2)
    order = min(_EULER_ORDER, n_blocks // 2)
    k = np.arange(1, n_blocks * l + 1)
    step = np.pi / (l * t)
    nodes = c + 1j * step * k
    phase = np.exp(1j * np.pi * k / l)

    f0 = _checked(F, np.array([c + 0j]))[0]
    fu = _checked(F, nodes)
    extra = (1,) * (fu.ndim - 1)
    phase = phase.reshape((-1,) + extra)
    two_sided = not hermitian or full_output
    if two_sided:
        fl = _checked(F, np.conj(nodes))
        terms = phase * fu + np.conj(phase) * fl
        head = f0 + 0j
    else:
        terms = 2.0 * (phase * fu).real
        head = np.real(f0)

    blocks = terms.reshape((n_blocks, l) + fu.shape[1:]).sum(axis=1)
    partial = head + np.cumsum(blocks, axis=0)
    total = _euler_sum(partial, order)
    value = step / (2.0 * np.pi) * np.exp(c * t) * total

    if not hermitian:
        return value[()] if np.ndim(value) == 0 else value
    if full_output:
        resid = np.max(np.abs(np.imag(value)))
        real = np.real(value)
        return (real[()] if np.ndim(real) == 0 else real), float(resid)
    return value[()] if np.ndim(value) == 0 else value


def _checked(F, s):
    out = np.asarray(F(s))
    if out.shape[:1] != s.shape:
        raise InversionError(f"transform returned shape {out.shape} for {s.shape[0]} nodes")
    bad = ~np.isfinite(out)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        node = complex(s[idx[0]])
        raise InversionError(f"non-finite transform value at s = {node}", node=node)
    return out


def residue_invert(poles, t, growth=(0.0, 0.0)):
    """Evaluate ``intercept + slope t + sum_j res_j exp(p_j t)``.

    Parameters
    ----------
    poles : sequence of (location, residue)
        Simple poles of the transform, all with ``Re(location) <= 0``.
        Conjugate pairs must both be listed; the real part of the sum is
        returned.
    t : float or array
    growth : (slope, intercept)
        Contribution of a double pole at the origin.
    """
    slope, intercept = growth
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape, dtype=complex) + intercept + slope * t
    for loc, res in poles:
        loc = complex(loc)
        if loc.real > 1e-12 * max(1.0, abs(loc)):
            raise StabilityError(f"pole at {loc} lies in the right half-plane")
        total = total + complex(res) * np.exp(loc * t)
    out = total.real
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class FourierGrid:
    """Symmetric frequency grid ``w_k = +-(k + 1/2) dw``, ``k < n_omega/2``.

    ``dw = 2 omega_max / n_omega``; the nodes are the midpoints of an even
    number of cells covering ``[-omega_max, omega_max]``.
    """

    omega_max: float
    n_omega: int
    x_grid: np.ndarray = field(repr=False)
    tail_threshold: float = 1e-4

    def __post_init__(self):
        if not self.omega_max > 0:
            raise DomainError("omega_max must be positive")
        if self.n_omega < 2 or self.n_omega % 2:
            raise DomainError(f"n_omega must be even and >= 2, got {self.n_omega}")
        object.__setattr__(self, "x_grid", np.asarray(self.x_grid, dtype=float))

    @property
    def d_omega(self) -> float:
        return 2.0 * self.omega_max / self.n_omega

    @property
    def omega(self) -> np.ndarray:
        """The non-negative half of the nodes."""
        return (np.arange(self.n_omega // 2) + 0.5) * self.d_omega

    @classmethod
    def for_jump(cls, gamma, x_grid, omega_max=None, spacing=None, tail_threshold=1e-4):
        """Default grid for a bi-exponential jump law of scale ``gamma``.

        ``omega_max = 100 gamma`` puts ``|h(omega_max)|`` at 1e-4; a spacing
        of ``gamma / 16`` keeps the aliasing period near ``100 / gamma``.
        """
        omega_max = 100.0 * gamma if omega_max is None else omega_max
        spacing = gamma / 16.0 if spacing is None else spacing
        n_half = max(int(np.ceil(omega_max / spacing)), 1)
        return cls(omega_max, 2 * n_half, x_grid, tail_threshold)


@dataclass
class FourierInversion:
    x: np.ndarray
    values: np.ndarray
    tail: float
    truncated: bool


def fourier_invert(G, grid: FourierGrid, *, values=None):
    """Compute ``(1/2pi) int exp(-i w x) G(w) dw`` on ``grid.x_grid``.

    ``G`` is evaluated on the non-negative nodes only; Hermitian symmetry
    ``G(-w) = conj(G(w))`` makes the result real by construction.  Pass
    precomputed ``values`` (aligned with ``grid.omega``) to skip the call.
    """
    w = grid.omega
    g = np.asarray(G(w) if values is None else values, dtype=complex)
    if g.shape != w.shape:
        raise InversionError(f"integrand has shape {g.shape}, expected {w.shape}")
    if not np.all(np.isfinite(g)):
        raise InversionError("non-finite Fourier integrand")
    x = grid.x_grid
    # chunk over x to bound the size of the phase matrix
    out = np.empty(x.shape, dtype=float)
    flat = x.ravel()
    res = out.ravel()
    for start in range(0, flat.size, 512):
        xs = flat[start : start + 512]
        arg = np.outer(xs, w)
        res[start : start + 512] = np.cos(arg) @ g.real + np.sin(arg) @ g.imag
    out = res.reshape(x.shape) * grid.d_omega / np.pi
    # tail check at the cutoff itself when G can be evaluated there
    edge = G(np.array([grid.omega_max])) if values is None else g[-1:]
    tail = float(np.max(np.abs(edge)))
    truncated = tail > grid.tail_threshold
    if truncated:
        warnings.warn(
            f"Fourier integrand still {tail:.2e} at omega_max={grid.omega_max:g}",
            TruncationWarning,
            stacklevel=2,
        )
    return FourierInversion(x, out, tail, truncated)
