"""Optimal exercise boundaries and prices of American puts.

Five model families are covered: constant parameters, and explicit
time-dependent interest rate, dividend yield, volatility or strike, each of
which admits a closed-form boundary. The integral-equation solvers,
premium pricing and independent lattice and Monte Carlo oracles share one
representation of the model through :class:`Dynamics`.
"""
from .closed_form import (BoundaryCurve, Dynamics, Family, ModelSpec, TermStructure,
                          boundary_dividend, boundary_rate, boundary_strike, boundary_vol,
                          closed_form_boundary, dividend_function, model_dynamics,
                          parameter_function, phi, rate_function, strike_function, vol_function)
from .errors import (BracketError, ContractError, DomainError, EvaluationError,
                     ModelValidityError, PutBoundaryError, SolverError)
from .numerics import TimeGrid, find_root_increasing, integrate, norm_cdf, norm_pdf
from .oracle import (LatticeConfig, McConfig, crr_boundary, crr_price, lattice_boundary,
                     lattice_price, mc_policy_value)
from .pricing import (PriceDecomposition, american_put_eep, american_put_ladder, european_put,
                      spot_ladder)
from .validation import CheckResult, ValidationReport, run_suite
from .volterra import (ResidualReport, SolverConfig, residual, residual_report,
                       solve_standard_boundary, solve_strike_linear, solve_td_boundary,
                       strike_kernel_coefficient)

__all__ = [
    "BoundaryCurve", "BracketError", "CheckResult", "ContractError", "DomainError", "Dynamics",
    "EvaluationError", "Family", "LatticeConfig", "McConfig", "ModelSpec", "ModelValidityError",
    "PriceDecomposition", "PutBoundaryError", "ResidualReport", "SolverConfig", "SolverError",
    "TermStructure", "TimeGrid", "ValidationReport", "american_put_eep", "american_put_ladder",
    "boundary_dividend", "boundary_rate", "boundary_strike", "boundary_vol",
    "closed_form_boundary", "crr_boundary", "crr_price", "dividend_function", "european_put",
    "find_root_increasing", "integrate", "lattice_boundary", "lattice_price", "mc_policy_value",
    "model_dynamics", "norm_cdf", "norm_pdf", "parameter_function", "phi", "rate_function",
    "residual", "residual_report", "run_suite", "solve_standard_boundary", "solve_strike_linear",
    "solve_td_boundary", "spot_ladder", "strike_function", "strike_kernel_coefficient",
    "vol_function",
]
