"""Shared evaluation of the European value and the early-exercise premium.

Every family is written in one form. With ``R``, ``D``, ``V`` the integrated
rate, dividend yield and variance over ``[t, u]``::

    V(t, x) = Ve(t, x) + int_t^T N(d1(u)) dM1(u) - x int_t^T N(d2(u)) dM2(u)

    M1(u) = -exp(-R) K(u),   M2(u) = -exp(-D)
    d1 = (log(b(u)/x) - (R - D - V/2)) / sqrt(V),   d2 = d1 - sqrt(V)

``dM1 = exp(-R)(r K - K') du`` covers the constant, rate and strike
families without differentiating ``K``. The Stieltjes integrals are
evaluated by the trapezoid rule on the supplied nodes, so measures whose
density blows up at maturity (the explicit interest rate) are integrated
exactly panel by panel.
"""
from __future__ import annotations

import numpy as np
from scipy import special


def european(dyn, t, x):
    """European put value with strike ``K(T)``."""
    T = dyn.spec.T
    R, D, V = dyn.R(t, T), dyn.D(t, T), dyn.V(t, T)
    KT = dyn.K_T
    sv = np.sqrt(V)
    with np.errstate(divide="ignore", invalid="ignore"):
        e1 = (np.log(KT / x) - (R - D - 0.5 * V)) / sv
    e2 = e1 - sv
    return KT * np.exp(-R) * special.ndtr(e1) - x * np.exp(-D) * special.ndtr(e2)


class NodeMeasures:
    """Integrated parameters and premium measures on nodes ``u[0] = t < ... < u[-1] = T``."""

    def __init__(self, dyn, u):
        self.u = u
        t = u[0]
        self.R = np.asarray(dyn.R(t, u), dtype=float)
        self.D = np.asarray(dyn.D(t, u), dtype=float)
        self.V = np.asarray(dyn.V(t, u), dtype=float)
        self.sqrtV = np.sqrt(np.maximum(self.V, 1e-300))
        self.sqrtV[0] = 1.0  # placeholder, index 0 is replaced by its limit
        self.drift = self.R - self.D - 0.5 * self.V
        self.dM1 = np.diff(-np.exp(-self.R) * np.asarray(dyn.K(u), dtype=float))
        self.dM2 = np.diff(-np.exp(-self.D))
        self.has_dividend = bool(np.any(self.dM2 != 0))


def premium(meas: NodeMeasures, x, bu):
    """Early-exercise premium at spot ``x`` given boundary values ``bu`` on the nodes.

    At ``u = t`` the integrands take their one-sided limits: ``1`` if
    ``x < b(t)``, ``0`` if ``x > b(t)`` and ``1/2`` on the boundary.
    """
    log_ratio = np.log(bu / x)
    d1 = (log_ratio - meas.drift) / meas.sqrtV
    f1 = special.ndtr(d1)
    f1[0] = 0.5 * (1.0 + np.sign(log_ratio[0]))
    total = np.dot(0.5 * (f1[1:] + f1[:-1]), meas.dM1)
    if meas.has_dividend:
        f2 = special.ndtr(d1 - meas.sqrtV)
        f2[0] = f1[0]
        total -= x * np.dot(0.5 * (f2[1:] + f2[:-1]), meas.dM2)
    return float(total)


def mapped_nodes(t, T, n):
    """Nodes on ``[t, T]`` clustered at both ends: ``u = t + (T - t) sin(pi s / 2)**2``.

    The map turns ``sqrt(u - t)`` and ``sqrt(T - u)`` behaviour into smooth
    functions of ``s``.
    """
    s = np.linspace(0.0, 1.0, n)
    u = t + (T - t) * np.sin(0.5 * np.pi * s) ** 2
    u[0], u[-1] = t, T
    # sin^2 rounding can repeat nodes next to T; drop repeats
    keep = np.concatenate([[True], np.diff(u) > 0])
    return u[keep]
