"""European and American put prices for every model family.

The American price is the European price plus the early-exercise premium,
an integral over the remaining life of the option that needs the exercise
boundary on ``[t, T]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _eep
from .closed_form import BoundaryCurve, Dynamics, ModelSpec
from .errors import ContractError, DomainError
from .volterra import _dynamics_for

# Quadrature nodes on [t, T] for the premium integrals.
PREMIUM_NODES = 2049


@dataclass(frozen=True)
class PriceDecomposition:
    """American value split into its European part and the premium."""

    t: float
    x: float
    european: float
    premium: float
    american: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "american", self.european + self.premium)


def _check_point(spec, t, x):
    if not (np.isfinite(t) and 0 <= t < spec.T):
        raise DomainError(f"t must lie in [0, {spec.T})")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("spot must be positive and finite")
    return x


def european_put(spec: ModelSpec, t: float, x, *, dynamics: Dynamics | None = None):
    """European put with strike ``K(T)`` under the model's deterministic parameters."""
    x = _check_point(spec, t, x)
    val = _eep.european(_dynamics_for(spec, dynamics), t, x)
    return float(val) if np.ndim(val) == 0 else val


def american_put_eep(spec: ModelSpec, boundary: BoundaryCurve, t: float, x: float, *,
                     dynamics: Dynamics | None = None,
                     nodes: int = PREMIUM_NODES) -> PriceDecomposition:
    """American put at ``(t, x)`` from the early-exercise premium representation."""
    return american_put_ladder(spec, boundary, t, [x], dynamics=dynamics, nodes=nodes)[0]


def american_put_ladder(spec: ModelSpec, boundary: BoundaryCurve, t: float, spots, *,
                        dynamics: Dynamics | None = None,
                        nodes: int = PREMIUM_NODES) -> list[PriceDecomposition]:
    """Price decompositions for several spots at one time, sharing the quadrature setup."""
    spots = np.atleast_1d(_check_point(spec, t, spots))
    if boundary.grid.nodes[0] > t or not np.isclose(boundary.T, spec.T, rtol=0, atol=1e-12 * spec.T):
        raise ContractError("boundary does not cover [t, T)")
    dyn = _dynamics_for(spec, dynamics)
    u = _eep.mapped_nodes(t, spec.T, nodes)
    bu = np.asarray(boundary(u), dtype=float)
    meas = _eep.NodeMeasures(dyn, u)
    euro = np.atleast_1d(_eep.european(dyn, t, spots))
    return [PriceDecomposition(float(t), float(x), float(e), _eep.premium(meas, x, bu))
            for x, e in zip(spots, euro)]


def spot_ladder(spec: ModelSpec, boundary: BoundaryCurve, t: float, n: int = 100) -> np.ndarray:
    """``n`` geometrically spaced spots from ``b(t)/2`` to ``4 K``."""
    return np.geomspace(0.5 * float(boundary(t)), 4.0 * spec.K, n)
