"""Independent checks: binomial lattices and Monte Carlo valuation of a stopping rule.

None of these use the integral equations, so they validate the boundaries
and prices produced by :mod:`putboundary.volterra` and
:mod:`putboundary.pricing` from the outside.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .closed_form import BoundaryCurve, Dynamics, Family, ModelSpec, _phi
from .errors import ContractError, DomainError
from .numerics import TimeGrid
from .volterra import _dynamics_for

SCHEMES = ("crr", "time-varying")


@dataclass(frozen=True)
class LatticeConfig:
    steps: int = 20000
    scheme: str = "crr"

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError("a lattice needs at least 2 steps")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown lattice scheme {self.scheme!r}")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    Paths are simulated in chunks of ``chunk`` paths; chunk ``i`` draws from
    ``SeedSequence(seed).spawn(n_chunks)[i]``, so results depend only on
    ``seed``, ``paths`` and ``chunk``.
    """

    paths: int = 100_000
    steps_per_year: int = 500
    seed: int = 42
    antithetic: bool = True
    chunk: int = 50_000

    def __post_init__(self):
        if self.paths < 100:
            raise DomainError("at least 100 paths are required")
        if self.steps_per_year < 1:
            raise DomainError("steps_per_year must be positive")
        if self.antithetic and self.paths % 2:
            raise DomainError("antithetic sampling needs an even number of paths")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def _step_times(dyn: Dynamics, t: float, steps: int) -> np.ndarray:
    """Lattice times on ``[t, T]`` with equal integrated variance per step."""
    spec = dyn.spec
    if spec.family is not Family.VOL:
        s = np.linspace(t, spec.T, steps + 1)
    else:
        # invert phi: phi(s) = y  <=>  T - s = (y^2/2 + log(2 N(y))) / r
        y = float(_phi(spec.r, spec.T - t)) * np.sqrt(1.0 - np.arange(steps + 1) / steps)
        s = spec.T - (0.5 * y * y + np.log(2.0 * special.ndtr(y))) / spec.r
        s = np.clip(s, t, spec.T)
    s[0], s[-1] = t, spec.T
    return s


def _lattice(dyn: Dynamics, t: float, x: float, steps: int, want_boundary: bool):
    """Backward induction on a recombining tree with time-varying drift and discount."""
    s = _step_times(dyn, t, steps)
    var = float(dyn.V(t, dyn.spec.T)) / steps
    up = np.exp(np.sqrt(var))
    down = 1.0 / up
    R = np.asarray(dyn.R(s[:-1], s[1:]))
    growth = np.exp(R - np.asarray(dyn.D(s[:-1], s[1:])))
    prob = (growth - down) / (up - down)
    if np.any(prob <= 0) or np.any(prob >= 1):
        raise DomainError("risk-neutral probability outside (0, 1); increase the number of steps")
    disc = np.exp(-R)
    strikes = np.asarray(dyn.K(s), dtype=float)
    log_up = np.log(up)
    spot = x * np.exp(log_up * (steps - 2.0 * np.arange(steps + 1)))
    value = np.maximum(strikes[-1] - spot, 0.0)
    bnd = np.full(steps + 1, np.nan) if want_boundary else None
    for k in range(steps - 1, -1, -1):
        spot = x * np.exp(log_up * (k - 2.0 * np.arange(k + 1)))
        cont = disc[k] * (prob[k] * value[:-1] + (1.0 - prob[k]) * value[1:])
        exercise = strikes[k] - spot
        value = np.maximum(cont, exercise)
        if want_boundary:
            stop = (exercise >= cont) & (exercise > 0)
            if stop.any():
                bnd[k] = spot[stop].max()
    return float(value[0]), s, bnd


def crr_price(spec: ModelSpec, cfg: LatticeConfig | None = None, t: float = 0.0,
              x: float | None = None) -> float:
    """American put on a Cox-Ross-Rubinstein tree (constant parameters)."""
    if spec.family is not Family.STANDARD:
        raise ContractError("crr_price needs a standard-family model; use lattice_price")
    return lattice_price(spec, cfg or LatticeConfig(), t, x)


def lattice_price(spec: ModelSpec, cfg: LatticeConfig | None = None, t: float = 0.0,
                  x: float | None = None, *, dynamics: Dynamics | None = None) -> float:
    """American put on a recombining tree for any family.

    Per-step drift and discount use the integrated rate and dividend over
    the step. The volatility family places steps at equal integrated
    variance so the tree still recombines.
    """
    cfg = cfg or LatticeConfig(scheme="time-varying")
    x = spec.K if x is None else x
    if not (0 <= t < spec.T) or not x > 0:
        raise DomainError("need 0 <= t < T and x > 0")
    price, _, _ = _lattice(_dynamics_for(spec, dynamics), t, float(x), cfg.steps, False)
    return price


def crr_boundary(spec: ModelSpec, cfg: LatticeConfig | None = None) -> BoundaryCurve:
    """Boundary read off a CRR tree, made non-decreasing in time.

    Consecutive slices alternate node parity, so the per-slice estimate
    wobbles by one node spacing. The constant-parameter boundary is
    non-decreasing, and taking the running maximum removes the wobble.
    """
    if spec.family is not Family.STANDARD:
        raise ContractError("crr_boundary needs a standard-family model; use lattice_boundary")
    raw = lattice_boundary(spec, cfg or LatticeConfig())
    return BoundaryCurve(raw.grid, np.maximum.accumulate(raw.values))


def lattice_boundary(spec: ModelSpec, cfg: LatticeConfig | None = None, *,
                     dynamics: Dynamics | None = None) -> BoundaryCurve:
    """Staircase boundary estimate from a tree rooted at the strike.

    Each slice contributes its highest exercising node. The first slices,
    whose nodes do not reach down to the boundary, take the first identified
    value. The value at maturity repeats the last decision
    slice, which estimates ``b(T-)``.
    """
    cfg = cfg or LatticeConfig(scheme="time-varying")
    _, s, bnd = _lattice(_dynamics_for(spec, dynamics), 0.0, float(spec.K), cfg.steps, True)
    found = np.flatnonzero(np.isfinite(bnd[:-1]))
    if found.size == 0:
        raise ContractError("lattice found no exercise region; increase the number of steps")
    bnd[:found[0]] = bnd[found[0]]
    bnd[-1] = bnd[-2]
    # forward-fill isolated gaps
    for k in range(1, bnd.size):
        if not np.isfinite(bnd[k]):
            bnd[k] = bnd[k - 1]
    return BoundaryCurve(TimeGrid(s), bnd)


def mc_policy_value(spec: ModelSpec, boundary: BoundaryCurve | None, cfg: McConfig | None = None,
                    t: float = 0.0, x: float | None = None, *,
                    dynamics: Dynamics | None = None) -> tuple[float, float]:
    """Monte Carlo value of the rule "exercise at the first monitoring time with X <= b".

    Paths use exact log-normal increments built from the integrated rate,
    dividend and variance, so the only biases are discrete monitoring and
    sampling noise. ``boundary=None`` never exercises early, which gives the
    European price.

    Returns
    -------
    estimate, stderr : float
    """
    cfg = cfg or McConfig()
    x = spec.K if x is None else float(x)
    if not (0 <= t < spec.T) or not x > 0:
        raise DomainError("need 0 <= t < T and x > 0")
    if boundary is not None and (boundary.grid.nodes[0] > t or
                                 not np.isclose(boundary.T, spec.T, rtol=0, atol=1e-12 * spec.T)):
        raise ContractError("boundary does not cover [t, T)")
    dyn = _dynamics_for(spec, dynamics)
    steps = max(1, int(np.ceil(cfg.steps_per_year * (spec.T - t) - 1e-9)))
    s = np.linspace(t, spec.T, steps + 1)
    R_step = np.asarray(dyn.R(s[:-1], s[1:]), dtype=float)
    drift = R_step - np.asarray(dyn.D(s[:-1], s[1:])) - 0.5 * np.asarray(dyn.V(s[:-1], s[1:]))
    vol = np.sqrt(np.asarray(dyn.V(s[:-1], s[1:]), dtype=float))
    discount = np.exp(-np.concatenate([[0.0], np.cumsum(R_step)]))
    strikes = np.asarray(dyn.K(s), dtype=float)
    if boundary is None:
        log_b = np.full(steps, -np.inf)
    else:
        log_b = np.log(np.asarray(boundary(s[:-1]), dtype=float))
    log_x = np.log(x)

    n_chunks = -(-cfg.paths // cfg.chunk)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
    samples = []
    remaining = cfg.paths
    for seq in seeds:
        size = min(cfg.chunk, remaining)
        remaining -= size
        samples.append(_simulate_chunk(np.random.default_rng(seq), size, cfg.antithetic, log_x,
                                       drift, vol, log_b, discount, strikes))
    payoff = np.concatenate(samples)
    n = payoff.size
    return float(payoff.mean()), float(payoff.std(ddof=1) / np.sqrt(n))


def _simulate_chunk(rng, size, antithetic, log_x, drift, vol, log_b, discount, strikes):
    """Discounted payoffs for one chunk (antithetic pairs averaged)."""
    steps = drift.size
    half = size // 2 if antithetic else size
    sign = np.concatenate([np.ones(half), -np.ones(half)]) if antithetic else np.ones(half)
    pair = np.tile(np.arange(half), 2) if antithetic else np.arange(half)
    logs = np.full(sign.size, log_x)
    idx = np.arange(sign.size)
    payoff = np.zeros(sign.size)
    z = None
    for k in range(steps):
        stop = logs <= log_b[k]
        if stop.any():
            payoff[idx[stop]] = discount[k] * np.maximum(strikes[k] - np.exp(logs[stop]), 0.0)
            keep = ~stop
            logs, idx = logs[keep], idx[keep]
            if logs.size == 0:
                break
        # one normal per antithetic pair; both members reuse it with opposite sign
        z = rng.standard_normal(half)
        logs = logs + drift[k] + vol[k] * sign[idx] * z[pair[idx]]
    else:
        payoff[idx] = discount[-1] * np.maximum(strikes[-1] - np.exp(logs), 0.0)
    if antithetic:
        return 0.5 * (payoff[:half] + payoff[half:])
    return payoff
