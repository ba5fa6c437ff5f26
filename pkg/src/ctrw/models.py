"""Waiting-time and jump-size laws of an uncoupled CTRW.

Waiting times belong to the Gamma family with rate ``rate`` and shape
``nu``: exponential (``nu = 1``), Erlang (integer ``nu``) and Gamma with a
rational shape ``nu = n / q``.  Jumps follow the asymmetric bi-exponential
law

    h(x) = gamma (1/2 + kappa) exp(-gamma x)   for x >= 0
    h(x) = gamma (1/2 - kappa) exp(+gamma x)   for x < 0

All objects are immutable; every downstream module only talks to them
through the methods defined here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, gcd

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError

__all__ = [
    "WaitingTimeModel",
    "Exponential",
    "Erlang",
    "GammaRational",
    "JumpModel",
    "BiExponential",
    "OneSidedExponential",
    "CtrwProcess",
    "waiting_density",
    "waiting_laplace",
    "jump_density",
    "jump_characteristic",
    "parse_config",
    "models_from_config",
]


class WaitingTimeModel:
    """Common interface of the Gamma-family waiting-time laws.

    Subclasses provide ``rate`` and the shape as a reduced fraction
    ``shape_fraction = (n, q)``.
    """

    rate: float

    @property
    def shape_fraction(self) -> tuple[int, int]:
        raise NotImplementedError

    @property
    def shape(self) -> float:
        n, q = self.shape_fraction
        return n / q

    @property
    def integer_shape(self) -> int | None:
        """The shape as an int when it is integral, else None."""
        n, q = self.shape_fraction
        return n if q == 1 else None

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("waiting-time density needs t >= 0")
        lam, nu = self.rate, self.shape
        with np.errstate(divide="ignore"):
            log_pdf = special.xlogy(nu - 1.0, lam * t) - lam * t - special.gammaln(nu)
        return lam * np.exp(log_pdf)

    def cdf(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return special.gammainc(self.shape, self.rate * t)

    def sf(self, t):
        """Survival function 1 - Psi(t)."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return special.gammaincc(self.shape, self.rate * t)

    def laplace(self, s):
        """psi_hat(s) = (rate / (rate + s))**nu on the principal branch."""
        s = np.asarray(s, dtype=complex)
        lam = self.rate
        n, q = self.shape_fraction
        on_cut = (s.imag == 0) & (s.real <= -lam) if q > 1 else (s == -lam)
        if np.any(on_cut):
            raise DomainError(f"Laplace transform undefined at s <= -rate (rate={lam})")
        if q == 1:
            return (lam / (lam + s)) ** n
        return np.exp(-self.shape * np.log1p(s / lam))

    def convolution_cdf(self, k: int, t):
        """CDF of the sum of ``k`` independent waiting times."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        if k == 0:
            return np.ones_like(t)
        return special.gammainc(k * self.shape, self.rate * t)

    def jump_count_pmf(self, t, n_max: int):
        """P(exactly n jumps in (0, t] | jump at 0), n = 0..n_max; last axis is n."""
        t = np.asarray(t, dtype=float)
        cdfs = np.stack([self.convolution_cdf(k, t) for k in range(n_max + 2)], axis=-1)
        return cdfs[..., :-1] - cdfs[..., 1:]


@dataclass(frozen=True)
class Exponential(WaitingTimeModel):
    rate: float

    def __post_init__(self):
        _check_rate(self.rate)

    @property
    def shape_fraction(self):
        return (1, 1)

    @property
    def nu(self) -> int:
        return 1


@dataclass(frozen=True)
class Erlang(WaitingTimeModel):
    nu: int
    rate: float

    def __post_init__(self):
        _check_rate(self.rate)
        if int(self.nu) != self.nu or self.nu < 1:
            raise DomainError(f"Erlang shape must be a positive integer, got {self.nu}")

    @property
    def shape_fraction(self):
        return (int(self.nu), 1)


@dataclass(frozen=True)
class GammaRational(WaitingTimeModel):
    """Gamma law with shape ``n / q`` given in lowest terms."""

    n: int
    q: int
    rate: float

    def __post_init__(self):
        _check_rate(self.rate)
        if self.n < 1 or self.q < 1 or int(self.n) != self.n or int(self.q) != self.q:
            raise DomainError("shape numerator and denominator must be positive integers")
        if gcd(int(self.n), int(self.q)) != 1:
            raise DomainError(f"shape {self.n}/{self.q} is not in lowest terms")

    @property
    def shape_fraction(self):
        return (int(self.n), int(self.q))

    @property
    def nu(self) -> float:
        return self.n / self.q


def _gamma_difference_pdf(k, j, g, x):
    # density of R - L, R ~ Gamma(k, g), L ~ Gamma(j, g); x == 0 on the right
    if k == 0:
        return _gamma_difference_pdf(j, 0, g, -x) if j else np.zeros_like(x)
    ax = np.abs(x)
    if j == 0:
        right = g**k * ax ** (k - 1) * np.exp(-g * ax) / factorial(k - 1)
        if k == 1:
            return np.where(x >= 0, right, 0.0)
        return np.where(x > 0, right, 0.0)

    def side(a, b, y):
        # x >= 0 branch of R - L with shapes (a, b), evaluated at y = |x|
        tot = np.zeros_like(y)
        for i in range(a):
            tot += comb(a - 1, i) * y ** (a - 1 - i) * factorial(i + b - 1) / (2.0 * g) ** (i + b)
        return g ** (a + b) * np.exp(-g * y) / (factorial(a - 1) * factorial(b - 1)) * tot

    return np.where(x >= 0, side(k, j, ax), side(j, k, ax))


def _check_rate(rate):
    if not (np.isfinite(rate) and rate > 0):
        raise DomainError(f"rate must be positive and finite, got {rate}")


@dataclass(frozen=True)
class JumpModel:
    """Asymmetric bi-exponential jump law.

    ``gamma`` is the inverse length scale and ``kappa`` in [-1/2, 1/2] the
    bias: right jumps have probability 1/2 + kappa.
    """

    gamma: float
    kappa: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not -0.5 <= self.kappa <= 0.5:
            raise DomainError(f"kappa must lie in [-1/2, 1/2], got {self.kappa}")

    @property
    def p_right(self) -> float:
        return 0.5 + self.kappa

    def pdf(self, x):
        # x == 0 takes the right branch
        x = np.asarray(x, dtype=float)
        g, k = self.gamma, self.kappa
        right = g * (0.5 + k) * np.exp(-g * np.abs(x))
        left = g * (0.5 - k) * np.exp(-g * np.abs(x))
        return np.where(x >= 0, right, left)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        g, k = self.gamma, self.kappa
        e = np.exp(-g * np.abs(x))
        return np.where(x >= 0, 1.0 - (0.5 + k) * e, (0.5 - k) * e)

    def characteristic(self, omega):
        """h_tilde(omega) = integral of h(x) exp(i omega x) dx."""
        w = np.asarray(omega, dtype=float)
        g, k = self.gamma, self.kappa
        return (g * g + 2j * k * g * w) / (g * g + w * w)

    def convolution_power(self, n: int, x):
        """Density of the sum of ``n`` independent jumps.

        A sum with ``k`` right and ``j = n - k`` left jumps is a difference of
        Gamma(k, gamma) and Gamma(j, gamma) variables, whose density is a
        finite sum of ``x**i exp(-gamma |x|)`` terms.
        """
        x = np.asarray(x, dtype=float)
        p, q = 0.5 + self.kappa, 0.5 - self.kappa
        out = np.zeros_like(x)
        for k in range(n + 1):
            w = comb(n, k) * p**k * q ** (n - k)
            if w:
                out += w * _gamma_difference_pdf(k, n - k, self.gamma, x)
        return out


BiExponential = JumpModel


def OneSidedExponential(gamma: float) -> JumpModel:
    """Jumps only to the right: h(x) = gamma exp(-gamma x) 1_{x >= 0}."""
    return JumpModel(gamma, 0.5)


@dataclass(frozen=True)
class CtrwProcess:
    """Uncoupled CTRW: waiting times and jumps drawn independently."""

    waiting: WaitingTimeModel
    jump: JumpModel


def waiting_density(model: WaitingTimeModel, t):
    return model.pdf(t)


def waiting_laplace(model: WaitingTimeModel, s):
    return model.laplace(s)


def jump_density(model: JumpModel, x):
    return model.pdf(x)


def jump_characteristic(model: JumpModel, omega):
    return model.characteristic(omega)


MODEL_KEYS = (
    "waiting.kind",
    "waiting.lambda",
    "waiting.nu_num",
    "waiting.nu_den",
    "jump.gamma",
    "jump.kappa",
)


def parse_config(text: str) -> dict[str, str]:
    """Parse a ``key = value`` block; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        cfg[key] = value
    return cfg


def _number(cfg, key, cast, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    try:
        return cast(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot parse {cfg[key]!r}") from None


def models_from_config(cfg: dict) -> CtrwProcess:
    """Build the process described by the ``waiting.*`` and ``jump.*`` keys."""
    kind = str(cfg.get("waiting.kind", "exponential")).strip().lower()
    lam = _number(cfg, "waiting.lambda", float, 1.0)
    try:
        if kind == "exponential":
            waiting = Exponential(lam)
        elif kind == "erlang":
            waiting = Erlang(_number(cfg, "waiting.nu_num", int, 1), lam)
        elif kind in ("gamma", "gamma_rational"):
            n = _number(cfg, "waiting.nu_num", int, 1)
            q = _number(cfg, "waiting.nu_den", int, 1)
            waiting = GammaRational(n, q, lam)
        else:
            raise ConfigError("waiting.kind", f"unknown kind {kind!r}")
    except DomainError as exc:
        raise ConfigError("waiting", str(exc)) from None
    try:
        jump = JumpModel(_number(cfg, "jump.gamma", float, 1.0), _number(cfg, "jump.kappa", float, 0.0))
    except DomainError as exc:
        raise ConfigError("jump", str(exc)) from None
    return CtrwProcess(waiting, jump)
