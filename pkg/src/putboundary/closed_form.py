"""Explicit parameter functions and exercise boundaries.

Four model families admit an exercise boundary that can be written down
directly: a time-dependent interest rate, a time-dependent dividend yield, a
time-dependent volatility (boundary through a scalar algebraic equation), and
a constant-parameter model with a time-dependent strike. The constant-parameter
("standard") family has no closed form and is handled by
:mod:`putboundary.volterra`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import ContractError, DomainError, ModelValidityError
from .numerics import TimeGrid, integrate, norm_cdf, norm_pdf

# Smallest admissible value of the dividend-model boundary factor.
DIVIDEND_FACTOR_FLOOR = 1e-6


class Family(str, enum.Enum):
    STANDARD = "standard"
    RATE = "rate"
    DIVIDEND = "dividend"
    VOL = "vol"
    STRIKE = "strike"


def _positive(name, value):
    if value is None or not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class ModelSpec:
    """Model family plus its constant parameters.

    The parameter made time-dependent by the family is left as ``None``:
    ``r`` for ``RATE``, ``delta`` for ``DIVIDEND`` and ``sigma`` for ``VOL``.
    For ``STRIKE``, ``K`` is the terminal strike ``K(T)`` and ``m`` is the
    extra drift of the boundary exponent.
    """

    family: Family
    K: float
    T: float
    r: float | None = None
    delta: float | None = None
    sigma: float | None = None
    m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        _positive("K", self.K)
        _positive("T", self.T)
        fam = self.family
        if fam in (Family.STANDARD, Family.RATE, Family.DIVIDEND, Family.STRIKE):
            _positive("sigma", self.sigma)
        elif self.sigma is not None:
            raise DomainError("the vol family sets sigma(t) itself; leave sigma unset")
        if fam in (Family.STANDARD, Family.DIVIDEND, Family.VOL, Family.STRIKE):
            _positive("r", self.r)
        elif self.r is not None:
            raise DomainError("the rate family sets r(t) itself; leave r unset")
        if fam in (Family.STANDARD, Family.RATE):
            if self.delta is None or not np.isfinite(self.delta) or self.delta < 0:
                raise DomainError(f"delta must be finite and >= 0, got {self.delta}")
        elif fam is Family.DIVIDEND:
            if self.delta is not None:
                raise DomainError("the dividend family sets delta(t) itself; leave delta unset")
        elif self.delta not in (None, 0, 0.0):
            raise DomainError(f"the {fam.value} family has no dividend yield")
        if not np.isfinite(self.m):
            raise DomainError("m must be finite")
        if fam is not Family.STRIKE and self.m != 0:
            raise DomainError("m only applies to the strike family")
        if fam is Family.DIVIDEND and _dividend_factor(self, 0.0) <= DIVIDEND_FACTOR_FLOOR:
            raise ModelValidityError(
                "dividend-model boundary factor is not positive on [0, T); "
                "shorten T or lower sigma relative to r")

    @classmethod
    def standard(cls, K, T, r, delta, sigma):
        return cls(Family.STANDARD, K=K, T=T, r=r, delta=delta, sigma=sigma)

    @classmethod
    def rate(cls, K, T, sigma, delta=0.0):
        return cls(Family.RATE, K=K, T=T, delta=delta, sigma=sigma)

    @classmethod
    def dividend(cls, K, T, r, sigma):
        return cls(Family.DIVIDEND, K=K, T=T, r=r, sigma=sigma)

    @classmethod
    def vol(cls, K, T, r):
        return cls(Family.VOL, K=K, T=T, r=r)

    @classmethod
    def strike(cls, KT, T, r, sigma, m=0.0):
        return cls(Family.STRIKE, K=KT, T=T, r=r, sigma=sigma, m=m)

    @property
    def terminal_boundary(self) -> float:
        """``b(T-)``: ``K * min(1, r/delta)`` for the standard family, the strike otherwise."""
        if self.family is Family.STANDARD and self.delta > self.r:
            return self.K * self.r / self.delta
        return float(self.K)


def _require(spec, family):
    if spec.family is not family:
        raise ContractError(f"expected a {family.value} model, got {spec.family.value}")


def _time(spec, t, closed=True):
    """Validate times; ``closed`` admits ``t == T``."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("t must be finite and non-negative")
    if closed and np.any(arr > spec.T):
        raise DomainError(f"t must not exceed T={spec.T}")
    if not closed and np.any(arr >= spec.T):
        raise DomainError(f"t must be below T={spec.T}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# --- time-dependent interest rate ------------------------------------------

def _rate_consts(spec):
    a = 2.0 * spec.delta + spec.sigma ** 2
    return a, 2.0 * spec.sigma / np.sqrt(a)


def _rate_factor(spec, t):
    """``exp(int_t^T gamma) = 1 + c (N(sqrt(a (T-t))) - 1/2)``."""
    a, c = _rate_consts(spec)
    tau = np.maximum(spec.T - np.asarray(t, dtype=float), 0.0)
    return 1.0 + c * (special.ndtr(np.sqrt(a * tau)) - 0.5)


def rate_function(spec: ModelSpec, t):
    """Interest rate ``r(t)`` on ``[0, T)`` that makes the boundary explicit.

    Diverges like ``sigma * n(0) / sqrt(T - t)`` at maturity while its
    integral stays finite.
    """
    _require(spec, Family.RATE)
    t = _time(spec, t, closed=False)
    a, _ = _rate_consts(spec)
    tau = spec.T - t
    z = np.sqrt(a * tau)
    gamma = norm_pdf(z) / _rate_factor(spec, t) * spec.sigma / np.sqrt(tau)
    return _out(gamma + spec.delta + 0.5 * spec.sigma ** 2)


def boundary_rate(spec: ModelSpec, t):
    _require(spec, Family.RATE)
    t = _time(spec, t)
    return _out(spec.K / _rate_factor(spec, t))


# --- time-dependent dividend yield -----------------------------------------

def _dividend_consts(spec):
    a = 2.0 * spec.r + spec.sigma ** 2
    return a, 2.0 * spec.sigma / np.sqrt(a)


def _dividend_factor(spec, t):
    """``exp(-int_t^T gamma) = 1 - c (N(sqrt(a (T-t))) - 1/2)``."""
    a, c = _dividend_consts(spec)
    tau = np.maximum(spec.T - np.asarray(t, dtype=float), 0.0)
    return 1.0 - c * (special.ndtr(np.sqrt(a * tau)) - 0.5)


def _checked_dividend_factor(spec, t):
    g = _dividend_factor(spec, t)
    if np.any(g <= DIVIDEND_FACTOR_FLOOR):
        raise ModelValidityError("dividend-model boundary factor is not positive")
    return g


def dividend_function(spec: ModelSpec, t):
    """Dividend yield ``delta(t)`` on ``[0, T)``; tends to minus infinity at maturity."""
    _require(spec, Family.DIVIDEND)
    t = _time(spec, t, closed=False)
    a, _ = _dividend_consts(spec)
    tau = spec.T - t
    z = np.sqrt(a * tau)
    gamma = norm_pdf(z) / _checked_dividend_factor(spec, t) * spec.sigma / np.sqrt(tau)
    return _out(spec.r - gamma + 0.5 * spec.sigma ** 2)


def boundary_dividend(spec: ModelSpec, t):
    _require(spec, Family.DIVIDEND)
    t = _time(spec, t)
    return _out(spec.K * _checked_dividend_factor(spec, t))


# --- time-dependent volatility ---------------------------------------------

def _phi(r, tau):
    """Root of ``x**2/2 + log N(x) = r*tau - log 2`` for each ``tau >= 0``.

    The left side is convex and increasing on ``x >= 0`` and the root lies
    below ``sqrt(2 r tau)``, so Newton started there decreases monotonically.
    """
    tau = np.asarray(tau, dtype=float)
    rhs = r * tau - np.log(2.0)
    x = np.sqrt(2.0 * r * tau)
    for _ in range(100):
        h = 0.5 * x * x + special.log_ndtr(x) - rhs
        slope = x + np.exp(-0.5 * x * x - special.log_ndtr(x)) / np.sqrt(2.0 * np.pi)
        step = h / slope
        x = np.maximum(x - step, 0.0)
        if np.all(np.abs(step) <= 1e-15 * np.maximum(x, 1.0)):
            break
    return x


def phi(spec: ModelSpec, t):
    """Solution ``x >= 0`` of ``exp(x**2/2) N(x) = exp(r (T-t)) / 2``.

    ``phi(t)**2`` is the remaining integrated variance ``int_t^T sigma(s)**2 ds``.
    """
    _require(spec, Family.VOL)
    t = _time(spec, t)
    return _out(_phi(spec.r, spec.T - t))


def vol_function(spec: ModelSpec, t):
    """Volatility ``sigma(t) = sqrt(-2 phi phi')``; zero at maturity.

    Implicit differentiation of the defining equation gives
    ``sigma**2 = 2 r phi N(phi) / (phi N(phi) + n(phi))``.
    """
    _require(spec, Family.VOL)
    t = _time(spec, t)
    return _out(np.sqrt(_variance_rate(spec, t)))


def _variance_rate(spec, t):
    p = _phi(spec.r, spec.T - np.asarray(t, dtype=float))
    pn = p * special.ndtr(p)
    return 2.0 * spec.r * pn / (pn + norm_pdf(p))


def boundary_vol(spec: ModelSpec, t):
    _require(spec, Family.VOL)
    t = _time(spec, t)
    return _out(spec.K / (2.0 * special.ndtr(_phi(spec.r, spec.T - t))))


# --- time-dependent strike ------------------------------------------------

def strike_function(spec: ModelSpec, t):
    """Strike ``K(t) = 2 K(T) exp(-(r - sigma**2/2)(T-t)) N(sigma sqrt(T-t))`` for ``m = 0``.

    For ``m != 0`` the strike solves a linear Volterra equation; use
    :func:`putboundary.volterra.solve_strike_linear`.
    """
    _require(spec, Family.STRIKE)
    if spec.m != 0:
        raise ContractError("closed-form strike exists only for m = 0; use volterra.solve_strike_linear")
    t = _time(spec, t)
    tau = spec.T - t
    gamma = spec.r - 0.5 * spec.sigma ** 2
    k = 2.0 * spec.K * np.exp(-gamma * tau) * special.ndtr(spec.sigma * np.sqrt(tau))
    return _out(np.where(tau == 0, spec.K, k))


def boundary_strike(spec: ModelSpec, t):
    """``b(t) = K(T) exp(-(m + r - sigma**2/2)(T - t))``."""
    _require(spec, Family.STRIKE)
    t = _time(spec, t)
    gamma = spec.m + spec.r - 0.5 * spec.sigma ** 2
    return _out(spec.K * np.exp(-gamma * (spec.T - t)))


# --- term structures and boundary curves -----------------------------------

@dataclass(frozen=True)
class TermStructure:
    """A deterministic parameter function on ``[0, T]``.

    ``integral(a, b)`` uses the exact antiderivative when one is known and
    falls back to :func:`putboundary.numerics.integrate` otherwise. Curves
    produced by a solver keep their ``(nodes, values)`` in ``samples``.
    """

    name: str
    T: float
    func: Callable
    antiderivative: Callable | None = None
    open_at_T: bool = False
    samples: tuple | None = None

    def value(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.T) or (self.open_at_T and np.any(arr >= self.T)):
            raise DomainError(f"{self.name}: t outside its domain")
        return _out(np.asarray(self.func(arr), dtype=float))

    __call__ = value

    def integral(self, a, b):
        a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if np.any(a_arr > b_arr):
            raise DomainError("integral requires a <= b")
        if np.any(a_arr < 0) or np.any(b_arr > self.T):
            raise DomainError(f"{self.name}: integration range outside [0, T]")
        if self.antiderivative is not None:
            return _out(self.antiderivative(b_arr) - self.antiderivative(a_arr))
        f = np.vectorize(lambda lo, hi: integrate(self.func, lo, hi, singular=self.open_at_T))
        return _out(f(a_arr, b_arr))

    @classmethod
    def constant(cls, name, T, c):
        c = float(c)
        return cls(name, T, lambda t: np.full(np.shape(t), c), lambda t: c * t)


@dataclass(frozen=True)
class BoundaryCurve:
    """Exercise boundary sampled on a time grid.

    Values between nodes are interpolated linearly in ``log b``. A curve built
    from a closed form keeps the exact function in ``exact`` and evaluates it
    directly. ``values[-1]`` is the terminal value ``b(T-)``.
    """

    grid: TimeGrid
    values: np.ndarray
    exact: Callable | None = None
    diagnostics: tuple = ()

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.nodes.shape:
            raise ContractError("one boundary value per grid node is required")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ModelValidityError("boundary values must be positive and finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def T(self) -> float:
        return self.grid.T

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < self.grid.nodes[0]) or np.any(arr > self.T):
            raise ContractError("boundary evaluated outside its grid")
        if self.exact is not None:
            return _out(np.asarray(self.exact(arr), dtype=float))
        return _out(np.exp(np.interp(arr, self.grid.nodes, np.log(self.values))))

    def scaled(self, factor: float) -> "BoundaryCurve":
        """The boundary multiplied by a positive constant."""
        exact = None if self.exact is None else (lambda t, f=self.exact: factor * f(t))
        return BoundaryCurve(self.grid, factor * self.values, exact)


_BOUNDARIES = {
    Family.RATE: boundary_rate,
    Family.DIVIDEND: boundary_dividend,
    Family.VOL: boundary_vol,
    Family.STRIKE: boundary_strike,
}


def closed_form_boundary(spec: ModelSpec, grid: TimeGrid | None = None) -> BoundaryCurve:
    """Explicit boundary of a time-dependent family as a :class:`BoundaryCurve`."""
    if spec.family not in _BOUNDARIES:
        raise ContractError("the standard family has no closed-form boundary")
    grid = grid or TimeGrid.geometric(spec.T)
    fn = _BOUNDARIES[spec.family]
    return BoundaryCurve(grid, fn(spec, grid.nodes), exact=lambda t: fn(spec, t))


def parameter_function(spec: ModelSpec) -> TermStructure:
    """The family's time-dependent parameter: r(t), delta(t), sigma(t) or K(t) (m = 0)."""
    T = spec.T
    if spec.family is Family.RATE:
        return TermStructure("r", T, lambda t: rate_function(spec, t), _rate_antiderivative(spec), True)
    if spec.family is Family.DIVIDEND:
        return TermStructure("delta", T, lambda t: dividend_function(spec, t),
                             _dividend_antiderivative(spec), True)
    if spec.family is Family.VOL:
        return TermStructure("sigma", T, lambda t: vol_function(spec, t))
    if spec.family is Family.STRIKE:
        return TermStructure("K", T, lambda t: strike_function(spec, t))
    raise ContractError("the standard family has no time-dependent parameter")


def _rate_antiderivative(spec):
    drift = spec.delta + 0.5 * spec.sigma ** 2
    return lambda t: drift * t - np.log(_rate_factor(spec, t))


def _dividend_antiderivative(spec):
    drift = spec.r + 0.5 * spec.sigma ** 2
    return lambda t: drift * t - np.log(_dividend_factor(spec, t))


@dataclass(frozen=True)
class Dynamics:
    """Integrated rate, dividend and variance plus the strike path of a model.

    These are all the pricing and integral-equation code needs: for times
    ``t <= u`` it uses ``R = int r``, ``D = int delta``, ``V = int sigma**2``
    over ``[t, u]`` and the strike ``K(u)``.
    """

    spec: ModelSpec
    rate: TermStructure
    dividend: TermStructure
    variance: TermStructure
    strike: TermStructure

    def R(self, t, u):
        return self.rate.integral(t, u)

    def D(self, t, u):
        return self.dividend.integral(t, u)

    def V(self, t, u):
        return self.variance.integral(t, u)

    def K(self, u):
        return self.strike.value(u)

    @property
    def K_T(self) -> float:
        return float(self.strike.value(self.spec.T))


def model_dynamics(spec: ModelSpec, strike: TermStructure | None = None) -> Dynamics:
    """Assemble :class:`Dynamics` for any family.

    ``strike`` supplies ``K(t)`` for the strike family with ``m != 0`` (the
    output of :func:`putboundary.volterra.solve_strike_linear`).
    """
    T = spec.T
    fam = spec.family
    const = TermStructure.constant
    if fam is Family.RATE:
        rate = parameter_function(spec)
    else:
        rate = const("r", T, spec.r)
    if fam is Family.DIVIDEND:
        dividend = parameter_function(spec)
    else:
        dividend = const("delta", T, spec.delta or 0.0)
    if fam is Family.VOL:
        variance = TermStructure("sigma^2", T, lambda t: _variance_rate(spec, t),
                                 lambda t: -_phi(spec.r, T - t) ** 2)
    else:
        variance = const("sigma^2", T, spec.sigma ** 2)
    if fam is Family.STRIKE:
        if strike is None:
            if spec.m != 0:
                raise ContractError("strike family with m != 0 needs the solved K(t)")
            strike = parameter_function(spec)
    else:
        strike = const("K", T, spec.K)
    return Dynamics(spec, rate, dividend, variance, strike)
