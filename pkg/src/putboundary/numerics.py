"""Special functions, root finding and quadrature used throughout the package."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import BracketError, DomainError, EvaluationError

SQRT_2PI = np.sqrt(2.0 * np.pi)

# Per-panel Gauss-Legendre rule used after the square-root substitution.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(3)


def _as_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _scalarize(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def norm_cdf(x):
    """Standard normal distribution function.

    Accepts scalars or arrays. Absolute error is below 1e-15 on [-8, 8];
    the tails saturate to 0 and 1 without overflow.
    """
    return _scalarize(special.ndtr(_as_finite(x)))


def norm_pdf(x):
    """Standard normal density ``exp(-x**2/2) / sqrt(2*pi)``."""
    arr = _as_finite(x)
    return _scalarize(np.exp(-0.5 * arr * arr) / SQRT_2PI)


def find_root_increasing(f: Callable[[float], float], lo: float, hi: float,
                         tol: float = 1e-12, fprime: Callable[[float], float] | None = None,
                         maxiter: int = 500) -> float:
    """Root of a continuous increasing function on ``[lo, hi]``.

    Brent's method on the bracket, stopped once the bracket is narrower than
    ``tol``; if ``fprime`` is given a single Newton step polishes the result
    when it stays inside the bracket and reduces ``|f|``.

    Raises
    ------
    DomainError
        If ``tol <= 0`` or ``lo > hi``.
    BracketError
        If ``f(lo) <= 0 <= f(hi)`` does not hold.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if lo > hi:
        raise DomainError("lo must not exceed hi")
    flo, fhi = f(lo), f(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)):
        raise EvaluationError("f is not finite at the bracket ends")
    if flo > 0 or fhi < 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    x = optimize.brentq(f, lo, hi, xtol=0.5 * tol, rtol=4 * np.finfo(float).eps, maxiter=maxiter)
    if fprime is not None:
        fx = f(x)
        d = fprime(x)
        if d > 0:
            y = x - fx / d
            if lo <= y <= hi and abs(f(y)) < abs(fx):
                x = y
    return float(x)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time nodes from 0 to maturity.

    Use :meth:`geometric` for the default grid, which refines toward maturity
    where boundaries and some parameter functions have unbounded slope.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a time grid needs at least two nodes")
        if not np.all(np.isfinite(nodes)):
            raise DomainError("grid nodes must be finite")
        if nodes[0] != 0.0:
            raise DomainError("first grid node must be 0")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @classmethod
    def uniform(cls, T: float, n: int = 512) -> "TimeGrid":
        _check_maturity(T, n)
        nodes = np.linspace(0.0, T, n)
        nodes[-1] = T
        return cls(nodes)

    @classmethod
    def geometric(cls, T: float, n: int = 512, last_step: float = 1e-4) -> "TimeGrid":
        """Grid whose steps shrink geometrically so the final one is ``last_step * T``."""
        _check_maturity(T, n)
        m = n - 1
        if m == 1 or last_step * m >= 1.0:
            return cls.uniform(T, n)
        target = np.log(last_step)

        def excess(q):
            # log of (last step / T) for ratio q
            return np.log1p(-q) + (m - 1) * np.log(q) - np.log1p(-q ** m) - target

        q = optimize.brentq(excess, 1e-12, 1.0 - 1e-12, xtol=1e-15)
        steps = T * (1.0 - q) / (1.0 - q ** m) * q ** np.arange(m)
        nodes = np.concatenate([[0.0], np.cumsum(steps)])
        nodes[-1] = T
        return cls(nodes)

    def restrict(self, a: float, b: float) -> np.ndarray:
        """Nodes strictly inside ``(a, b)`` with ``a`` and ``b`` prepended/appended."""
        inner = self.nodes[(self.nodes > a) & (self.nodes < b)]
        return np.concatenate([[a], inner, [b]])


def _check_maturity(T, n):
    if not (np.isfinite(T) and T > 0):
        raise DomainError("maturity must be positive and finite")
    if n < 2:
        raise DomainError("a time grid needs at least two nodes")


def _evaluate(f, s):
    vals = np.broadcast_to(np.asarray(f(s), dtype=float), s.shape)
    if np.any(np.isnan(vals)):
        raise EvaluationError("integrand returned NaN")
    return vals


def integrate(f: Callable, a: float, b: float, grid: TimeGrid | np.ndarray | None = None,
              singular: bool = False) -> float:
    """Composite quadrature of ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    a, b : float
        Integration limits, ``a <= b``.
    grid : TimeGrid or array, optional
        Nodes to use (restricted to ``[a, b]``). Defaults to a 512-node grid
        on ``[a, b]`` refined toward ``b``.
    singular : bool
        Declare an integrable ``(b - s)**-0.5`` singularity at ``b``. Panels
        are then mapped with ``s = b - v**2``, which removes the singularity,
        and each mapped panel is integrated by 3-point Gauss-Legendre.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if a > b:
        raise DomainError("require a <= b")
    if a == b:
        return 0.0
    if grid is None:
        s = a + TimeGrid.geometric(b - a).nodes
        s[-1] = b
    else:
        nodes = grid.nodes if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
        inner = nodes[(nodes > a) & (nodes < b)]
        s = np.concatenate([[a], inner, [b]])
    if not singular:
        y = _evaluate(f, s)
        return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(s)))
    # s = b - v^2 maps every panel to v-space, where 2 v f(b - v^2) is smooth
    v = np.sqrt(b - s)[::-1]
    lo, hi = v[:-1, None], v[1:, None]
    half = 0.5 * (hi - lo)
    w = lo + half * (_GL_X + 1.0)
    g = 2.0 * w * _evaluate(f, b - w * w)
    return float(np.sum(half * (g @ _GL_W[:, None])))
