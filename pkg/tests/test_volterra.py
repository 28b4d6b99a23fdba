import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import putboundary.volterra as vt
from putboundary import (ContractError, DomainError, ModelSpec, SolverConfig, TimeGrid,
                         boundary_strike, closed_form_boundary, model_dynamics, residual,
                         residual_report, solve_standard_boundary, solve_strike_linear,
                         solve_td_boundary, strike_function, strike_kernel_coefficient)


class TestResidual:
    @pytest.mark.parametrize("family", ["rate_spec", "dividend_spec", "vol_spec", "strike_spec"])
    def test_closed_forms_solve_the_equation(self, family, request):
        spec = request.getfixturevalue(family)
        rep = residual_report(closed_form_boundary(spec), spec, np.linspace(0.0, 9.99, 9))
        assert rep.max_residual < 1e-6

    def test_perturbed_boundary_has_large_residual(self, rate_spec):
        bad = closed_form_boundary(rate_spec).scaled(1.05)
        assert abs(residual(bad, rate_spec, 2.0)) > 1e-2

    def test_residual_sign_convention(self, rate_spec):
        # raising the boundary makes K - b smaller than the continuation value
        assert residual(closed_form_boundary(rate_spec).scaled(1.05), rate_spec, 2.0) < 0

    def test_domain(self, rate_spec):
        with pytest.raises(DomainError):
            residual(closed_form_boundary(rate_spec), rate_spec, 10.0)

    def test_report_fields(self, rate_spec):
        rep = residual_report(closed_form_boundary(rate_spec), rate_spec, [0.0, 1.0])
        assert rep.residuals.shape == (2,) and np.all(rep.residuals >= 0)
        assert rep.max_residual == rep.residuals.max()


class TestStandardSolver:
    def test_terminal_value(self):
        spec = ModelSpec.standard(100.0, 1.0, 0.05, 0.1, 0.2)
        assert solve_standard_boundary(spec).terminal == 50.0

    def test_reference_boundary(self, standard_spec):
        b = solve_standard_boundary(standard_spec)
        # b(0) agrees with a 20000-step lattice to a few basis points
        assert b.values[0] == pytest.approx(80.875, rel=2e-3)
        assert np.all(np.diff(b.values) >= 0)

    def test_grid_refinement_converges(self, standard_spec):
        coarse = solve_standard_boundary(standard_spec, SolverConfig(TimeGrid.geometric(1.0, 128)))
        mid = solve_standard_boundary(standard_spec, SolverConfig(TimeGrid.geometric(1.0, 256)))
        fine = solve_standard_boundary(standard_spec, SolverConfig(TimeGrid.geometric(1.0, 512)))
        e1 = abs(coarse.values[0] - fine.values[0])
        e2 = abs(mid.values[0] - fine.values[0])
        assert e2 < e1
        assert e2 < 5e-3

    def test_suffix_reproduces_bits(self, standard_spec):
        full = solve_standard_boundary(standard_spec)
        again = solve_standard_boundary(standard_spec, suffix=full.values[-100:])
        np.testing.assert_array_equal(full.values, again.values)

    @pytest.mark.parametrize("r,delta,sigma", [(0.05, 0.0, 0.2), (0.03, 0.06, 0.3),
                                               (0.08, 0.02, 0.15), (0.02, 0.01, 0.45)])
    def test_monotone_and_below_terminal(self, r, delta, sigma):
        spec = ModelSpec.standard(100.0, 2.0, r, delta, sigma)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            b = solve_standard_boundary(spec, SolverConfig(TimeGrid.geometric(2.0, 200)))
        assert np.all(np.diff(b.values) >= -1e-9)
        assert b.values.max() <= spec.terminal_boundary

    def test_short_maturity(self):
        spec = ModelSpec.standard(100.0, 1e-6, 0.05, 0.0, 0.2)
        b = solve_standard_boundary(spec, SolverConfig(TimeGrid.uniform(1e-6, 20)))
        assert 99.0 < b.values[0] <= 100.0

    def test_wrong_family(self, rate_spec):
        with pytest.raises(ContractError):
            solve_standard_boundary(rate_spec)

    def test_grid_maturity_mismatch(self, standard_spec):
        with pytest.raises(ContractError):
            solve_standard_boundary(standard_spec, SolverConfig(TimeGrid.uniform(2.0, 10)))

    @pytest.mark.parametrize("kw", [dict(fixed_point_tol=0.0), dict(max_iterations=0),
                                    dict(rule="simpson")])
    def test_config_validation(self, kw):
        with pytest.raises(DomainError):
            SolverConfig(**kw)


class TestTimeDependentSolver:
    @pytest.mark.parametrize("family,tol", [("rate_spec", 1e-8), ("dividend_spec", 1e-3),
                                            ("vol_spec", 1e-8)])
    def test_reproduces_closed_form(self, family, tol, request):
        spec = request.getfixturevalue(family)
        solved = solve_td_boundary(spec, SolverConfig(TimeGrid.geometric(10.0, 256)))
        exact = closed_form_boundary(spec)(solved.grid.nodes)
        assert np.max(np.abs(solved.values / exact - 1.0)) < tol

    def test_user_dynamics(self, rate_spec):
        # passing the default dynamics explicitly changes nothing
        cfg = SolverConfig(TimeGrid.geometric(10.0, 64))
        a = solve_td_boundary(rate_spec, cfg)
        b = solve_td_boundary(rate_spec, cfg, dynamics=model_dynamics(rate_spec))
        np.testing.assert_array_equal(a.values, b.values)

    def test_rejects_other_families(self, standard_spec):
        with pytest.raises(ContractError):
            solve_td_boundary(standard_spec)


class TestStrikeLinear:
    def test_m_zero_matches_closed_form(self, strike_spec):
        K = solve_strike_linear(strike_spec)
        nodes, values = K.samples
        exact = strike_function(strike_spec, nodes)
        assert np.max(np.abs(values - exact)) < 1e-5

    def test_kernel_coefficient(self):
        spec = ModelSpec.strike(1.0, 10.0, 0.05, 0.2, m=0.1)
        assert strike_kernel_coefficient(spec) == pytest.approx(0.1 / (0.2 * np.sqrt(2 * np.pi)))

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=10, deadline=None)
    def test_linear_in_terminal_strike(self, KT):
        base = ModelSpec.strike(1.0, 5.0, 0.05, 0.2, m=0.03)
        scaled = ModelSpec.strike(KT, 5.0, 0.05, 0.2, m=0.03)
        cfg = SolverConfig(TimeGrid.geometric(5.0, 64))
        np.testing.assert_allclose(solve_strike_linear(scaled, cfg).samples[1],
                                   KT * solve_strike_linear(base, cfg).samples[1], rtol=1e-12)

    @pytest.mark.parametrize("m", [-0.05, -0.02, 0.02, 0.05])
    def test_solved_strike_makes_boundary_exact(self, m):
        spec = ModelSpec.strike(1.0, 10.0, 0.05, 0.2, m=m)
        rep = residual_report(closed_form_boundary(spec), spec, np.linspace(0.0, 9.9, 8))
        assert rep.max_residual < 1e-5

    def test_uncorrected_coefficient_fails(self, monkeypatch):
        # without the normal-density factor 1/sqrt(2 pi) value matching breaks
        spec = ModelSpec.strike(1.0, 10.0, 0.05, 0.2, m=0.05)
        monkeypatch.setattr(vt, "strike_kernel_coefficient", lambda s: s.m / s.sigma)
        dyn = model_dynamics(spec, strike=solve_strike_linear(spec))
        rep = residual_report(closed_form_boundary(spec), spec, [0.0, 5.0], dynamics=dyn)
        assert rep.max_residual > 1e-2

    def test_boundary_formula(self):
        spec = ModelSpec.strike(2.0, 4.0, 0.05, 0.2, m=0.03)
        assert boundary_strike(spec, 1.0) == pytest.approx(2.0 * np.exp(-(0.03 + 0.05 - 0.02) * 3.0))

    def test_wrong_family(self, rate_spec):
        with pytest.raises(ContractError):
            solve_strike_linear(rate_spec)
