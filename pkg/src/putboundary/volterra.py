"""Integral-equation solvers for the exercise boundary.

The boundary ``b`` satisfies value matching ``K(t) - b(t) = V(t, b(t))``
where ``V`` is the European value plus the early-exercise premium, and the
premium only involves ``b(u)`` for ``u > t``. :func:`solve_standard_boundary`
and :func:`solve_td_boundary` march backward from maturity and solve one
scalar equation per grid node. :func:`residual` evaluates the same equation
for a given curve, which is how the closed-form boundaries are validated.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _eep
from .closed_form import (BoundaryCurve, Dynamics, Family, ModelSpec, TermStructure,
                          model_dynamics)
from .errors import (BracketError, ContractError, DomainError, ModelValidityError,
                     SolverError)
from .numerics import TimeGrid, find_root_increasing

QUADRATURE_RULES = ("trapezoid",)


@dataclass(frozen=True)
class SolverConfig:
    """Discretisation settings for the backward-induction solvers.

    ``fixed_point_tol`` is relative to the strike; ``max_iterations`` bounds
    the root-finder iterations at each node.
    """

    grid: TimeGrid | None = None
    fixed_point_tol: float = 1e-10
    max_iterations: int = 200
    rule: str = "trapezoid"

    def __post_init__(self):
        if not self.fixed_point_tol > 0:
            raise DomainError("fixed_point_tol must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")
        if self.rule not in QUADRATURE_RULES:
            raise DomainError(f"unknown quadrature rule {self.rule!r}")

    def grid_for(self, T: float) -> TimeGrid:
        if self.grid is None:
            return TimeGrid.geometric(T)
        if not np.isclose(self.grid.T, T, rtol=0, atol=1e-12 * T):
            raise ContractError(f"solver grid ends at {self.grid.T}, model maturity is {T}")
        return self.grid


@dataclass(frozen=True)
class ResidualReport:
    times: np.ndarray
    residuals: np.ndarray
    max_residual: float = field(init=False)

    def __post_init__(self):
        res = np.abs(np.asarray(self.residuals, dtype=float))
        object.__setattr__(self, "residuals", res)
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "max_residual", float(res.max()) if res.size else 0.0)


def _backward_induction(dyn: Dynamics, grid: TimeGrid, terminal: float, cfg: SolverConfig,
                        suffix=None):
    nodes = grid.nodes
    n = nodes.size
    b = np.empty(n)
    b[-1] = terminal
    start = n - 2
    if suffix is not None:
        suffix = np.asarray(suffix, dtype=float)
        b[n - suffix.size:] = suffix
        start = n - suffix.size - 1
    tol = cfg.fixed_point_tol * dyn.spec.K
    for i in range(start, -1, -1):
        u = nodes[i:]
        meas = _eep.NodeMeasures(dyn, u)
        bu = b[i:].copy()
        t = nodes[i]
        strike = float(dyn.K(t))
        euro_R, euro_D, euro_V = meas.R[-1], meas.D[-1], meas.V[-1]
        KT = dyn.K_T
        sv = np.sqrt(euro_V)

        def gap(x):
            # V(t, x) - (K(t) - x) with the boundary passing through x at t
            bu[0] = x
            e1 = (np.log(KT / x) - (euro_R - euro_D - 0.5 * euro_V)) / sv
            ve = KT * np.exp(-euro_R) * special.ndtr(e1) - x * np.exp(-euro_D) * special.ndtr(e1 - sv)
            return ve + _eep.premium(meas, x, bu) - (strike - x)

        try:
            b[i] = _solve_node(gap, b[i + 1], strike, tol, cfg.max_iterations)
        except (BracketError, RuntimeError) as exc:
            raise SolverError(f"boundary equation did not converge at node {i} (t={t:.6g}): {exc}",
                              node=i) from exc
    return b


def _solve_node(gap, guess, strike, tol, maxiter):
    hi = min(guess, strike)
    while gap(hi) < 0:
        if hi >= strike:
            raise BracketError("value-matching gap negative at the strike")
        hi = min(1.05 * hi, strike)
    lo = 0.9 * hi
    while gap(lo) > 0:
        lo *= 0.5
        if lo < 1e-10 * strike:
            raise BracketError("no exercise region found below the previous boundary")
    return find_root_increasing(gap, lo, hi, tol=tol, maxiter=maxiter)


def _diagnose(values, spec):
    notes = []
    dec = np.diff(values) < -1e-9 * spec.K
    if np.any(dec):
        notes.append(f"boundary decreases at {int(dec.sum())} node(s); grid may be too coarse")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=3)
    return tuple(notes)


def solve_standard_boundary(spec: ModelSpec, cfg: SolverConfig | None = None, *,
                            suffix=None) -> BoundaryCurve:
    """Exercise boundary of the constant-parameter model.

    Starts from ``b(T-) = K min(1, r/delta)`` and solves value matching at
    each earlier node, using the already computed later nodes in the premium.

    Parameters
    ----------
    spec : ModelSpec
        A ``STANDARD`` family model.
    cfg : SolverConfig, optional
        Grid and tolerances; defaults to 512 nodes refined toward maturity.
    suffix : array, optional
        Known boundary values for the last ``len(suffix)`` nodes; only the
        earlier nodes are computed.
    """
    if spec.family is not Family.STANDARD:
        raise ContractError("solve_standard_boundary needs a standard-family model")
    cfg = cfg or SolverConfig()
    grid = cfg.grid_for(spec.T)
    values = _backward_induction(model_dynamics(spec), grid, spec.terminal_boundary, cfg, suffix)
    return BoundaryCurve(grid, values, diagnostics=_diagnose(values, spec))


def solve_td_boundary(spec: ModelSpec, cfg: SolverConfig | None = None,
                      dynamics: Dynamics | None = None) -> BoundaryCurve:
    """Numerical boundary for the rate, dividend or volatility family.

    ``dynamics`` may carry user-supplied term structures; by default the
    family's explicit parameter functions are used, in which case the result
    reproduces the closed-form boundary up to discretisation error.
    """
    if spec.family not in (Family.RATE, Family.DIVIDEND, Family.VOL):
        raise ContractError("solve_td_boundary handles the rate, dividend and vol families")
    cfg = cfg or SolverConfig()
    grid = cfg.grid_for(spec.T)
    dyn = dynamics or model_dynamics(spec)
    values = _backward_induction(dyn, grid, float(spec.K), cfg)
    return BoundaryCurve(grid, values, diagnostics=_diagnose(values, spec))


def _dynamics_for(spec, dynamics):
    if dynamics is not None:
        return dynamics
    if spec.family is Family.STRIKE and spec.m != 0:
        return model_dynamics(spec, strike=solve_strike_linear(spec))
    return model_dynamics(spec)


def residual(boundary: BoundaryCurve, spec: ModelSpec, t: float, *,
             dynamics: Dynamics | None = None, nodes: int = 2049) -> float:
    """Signed value-matching residual ``(K(t) - b(t)) - V(t, b(t))`` of a boundary.

    The premium integrals use ``nodes`` points clustered at both ends of
    ``[t, T]``; a curve with an exact evaluator is sampled exactly.
    """
    if not (0 <= t < spec.T):
        raise DomainError("residual needs 0 <= t < T")
    dyn = _dynamics_for(spec, dynamics)
    return _residual(boundary, dyn, t, nodes)


def _residual(boundary, dyn, t, nodes):
    u = _eep.mapped_nodes(t, dyn.spec.T, nodes)
    bu = np.asarray(boundary(u), dtype=float)
    x = bu[0]
    meas = _eep.NodeMeasures(dyn, u)
    value = _eep.european(dyn, t, x) + _eep.premium(meas, x, bu)
    return float(dyn.K(t) - x - value)


def residual_report(boundary: BoundaryCurve, spec: ModelSpec, times, *,
                    dynamics: Dynamics | None = None, nodes: int = 2049) -> ResidualReport:
    dyn = _dynamics_for(spec, dynamics)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(times >= spec.T):
        raise DomainError("residual needs 0 <= t < T")
    res = [_residual(boundary, dyn, float(t), nodes) for t in times]
    return ResidualReport(times, res)


def strike_kernel_coefficient(spec: ModelSpec) -> float:
    """Coefficient of the weakly singular integral term in the strike equation.

    Integrating the premium by parts with ``b(t) = K(T) exp(-(m + r - sigma^2/2)(T-t))``
    produces ``d/du N(m sqrt(u - t) / sigma)``, whose normal density carries
    the ``1/sqrt(2 pi)`` factor: the coefficient is ``m / (sigma sqrt(2 pi))``.
    """
    return spec.m / (spec.sigma * np.sqrt(2.0 * np.pi))


def solve_strike_linear(spec: ModelSpec, cfg: SolverConfig | None = None) -> TermStructure:
    """Strike path ``K(t)`` supporting the boundary ``K(T) exp(-(m + r - sigma^2/2)(T-t))``.

    Solves the linear Volterra equation::

        K(t) = 2 K(T) exp(-g (T-t)) N(-(m/sigma - sigma) sqrt(T-t))
               + c int_t^T exp(-a (u-t)) K(u) (u-t)^(-1/2) du

    with ``g = m + r - sigma^2/2``, ``a = r + m^2/(2 sigma^2)`` and
    ``c`` from :func:`strike_kernel_coefficient`, by backward substitution.
    ``K`` is taken piecewise linear between nodes and the weight
    ``exp(-a v) v^(-1/2)`` is integrated exactly on each panel.
    """
    if spec.family is not Family.STRIKE:
        raise ContractError("solve_strike_linear needs a strike-family model")
    cfg = cfg or SolverConfig()
    grid = cfg.grid_for(spec.T)
    nodes = grid.nodes
    n = nodes.size
    sig, r, m, T = spec.sigma, spec.r, spec.m, spec.T
    g = m + r - 0.5 * sig ** 2
    a = r + m * m / (2.0 * sig ** 2)
    c = strike_kernel_coefficient(spec)
    tau = T - nodes
    forcing = 2.0 * spec.K * np.exp(-g * tau) * special.ndtr(-(m / sig - sig) * np.sqrt(tau))
    K = np.empty(n)
    K[-1] = spec.K
    sqa = np.sqrt(a)
    for i in range(n - 2, -1, -1):
        v = nodes[i:] - nodes[i]
        v1, v2 = v[:-1], v[1:]
        h = v2 - v1
        p0 = np.sqrt(np.pi) / sqa * (special.erf(sqa * np.sqrt(v2)) - special.erf(sqa * np.sqrt(v1)))
        p1 = (np.sqrt(v1) * np.exp(-a * v1) - np.sqrt(v2) * np.exp(-a * v2)) / a + p0 / (2.0 * a)
        beta = (p1 - v1 * p0) / h
        alpha = p0 - beta
        rest = beta[0] * K[i + 1] + np.dot(alpha[1:], K[i + 1:-1]) + np.dot(beta[1:], K[i + 2:])
        denom = 1.0 - c * alpha[0]
        if denom <= 0:
            raise SolverError("strike equation is singular on this grid; refine near maturity", node=i)
        K[i] = (forcing[i] + c * rest) / denom
    if np.any(K <= 0):
        warnings.warn("solved strike path is not positive everywhere", RuntimeWarning, stacklevel=2)
    values = K.copy()
    values.setflags(write=False)
    return TermStructure("K", T, lambda t: np.interp(t, nodes, values),
                         samples=(grid.nodes, values))
