"""Validation suites shared by the command line and the test suite.

Each suite returns a list of :class:`CheckResult`; a check passes when its
measured value is at most its tolerance. :class:`ValidationReport` collects
them and renders plain text or JSON.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .closed_form import Family, ModelSpec, closed_form_boundary
from .errors import DomainError
from .oracle import LatticeConfig, McConfig, lattice_boundary, lattice_price, mc_policy_value
from .pricing import american_put_eep
from .volterra import residual_report, solve_standard_boundary, solve_td_boundary

SUITES = ("residuals", "lattice", "mc", "limits", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    detail: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "passed", bool(self.value <= self.tolerance))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: {self.value:.6g} <= {self.tolerance:.6g}{extra}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [c.line() for c in self.checks]
        n_fail = sum(not c.passed for c in self.checks)
        lines.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "checks": [asdict(c) for c in self.checks]},
                          indent=2, sort_keys=True) + "\n"


def default_spec(family) -> ModelSpec:
    """Reference parameter set of each family."""
    family = Family(family)
    if family is Family.STANDARD:
        return ModelSpec.standard(K=100.0, T=1.0, r=0.05, delta=0.0, sigma=0.2)
    if family is Family.RATE:
        return ModelSpec.rate(K=1.0, T=10.0, sigma=0.3, delta=0.0)
    if family is Family.DIVIDEND:
        return ModelSpec.dividend(K=1.0, T=10.0, r=0.05, sigma=0.3)
    if family is Family.VOL:
        return ModelSpec.vol(K=1.0, T=10.0, r=0.05)
    return ModelSpec.strike(KT=1.0, T=10.0, r=0.05, sigma=0.2, m=0.0)


def boundary_for(spec: ModelSpec):
    """Closed-form boundary when one exists, the numerical solution otherwise."""
    if spec.family is Family.STANDARD:
        return solve_standard_boundary(spec)
    return closed_form_boundary(spec)


def residual_checks(spec: ModelSpec, n_times: int = 64, tol: float = 1e-4) -> list[CheckResult]:
    """Value-matching residuals of the model's boundary at ``n_times`` times."""
    bnd = boundary_for(spec)
    times = np.linspace(0.0, 0.999 * spec.T, n_times)
    rep = residual_report(bnd, spec, times)
    checks = [CheckResult(f"{spec.family.value}: max residual over {n_times} times",
                          rep.max_residual / spec.K, tol, "relative to K")]
    if spec.family in (Family.RATE, Family.DIVIDEND, Family.VOL):
        solved = solve_td_boundary(spec)
        gap = np.max(np.abs(solved.values / bnd(solved.grid.nodes) - 1.0))
        checks.append(CheckResult(f"{spec.family.value}: numerical vs closed-form boundary",
                                  gap, 1e-3, "max relative gap"))
    return checks


def lattice_checks(spec: ModelSpec, steps: int | None = None, n_times: int = 16) -> list[CheckResult]:
    """Boundary and at-the-money price against a binomial lattice."""
    fam = spec.family.value
    bnd = boundary_for(spec)
    if spec.family is Family.STANDARD:
        cfg = LatticeConfig(steps or 20000, "crr")
    else:
        cfg = LatticeConfig(steps or 5000, "time-varying")
    lat = lattice_price(spec, cfg, 0.0, spec.K)
    eep = american_put_eep(spec, bnd, 0.0, spec.K).american
    checks = [CheckResult(f"{fam}: EEP vs lattice price at x=K", abs(eep / lat - 1.0), 1e-3,
                          f"eep={eep:.8g}, lattice={lat:.8g}")]
    if spec.family is Family.STANDARD:
        lb = lattice_boundary(spec, cfg)
        times = np.linspace(0.0, spec.T, n_times + 2)[1:-1]
        gap = np.max(np.abs(lb(times) / bnd(times) - 1.0))
        checks.append(CheckResult(f"{fam}: boundary vs lattice at {n_times} times", gap, 5e-3,
                                  "max relative gap"))
    return checks


def mc_checks(spec: ModelSpec, seed: int = 42, paths: int = 200_000,
              perturbations=(0.9, 1.1)) -> list[CheckResult]:
    """Monte Carlo value of the boundary policy against EEP and perturbed policies.

    Values are scored in standard errors: the first check is ``|z|`` of MC
    versus EEP, the others measure how far a perturbed policy beats the
    boundary policy (negative when it does worse).
    """
    fam = spec.family.value
    bnd = boundary_for(spec)
    cfg = McConfig(paths=paths, seed=seed)
    x = spec.K
    eep = american_put_eep(spec, bnd, 0.0, x).american
    est, se = mc_policy_value(spec, bnd, cfg, 0.0, x)
    checks = [CheckResult(f"{fam}: |MC - EEP| in standard errors", abs(est - eep) / se, 3.0,
                          f"mc={est:.6g}, se={se:.2g}, eep={eep:.6g}")]
    for f in perturbations:
        pest, pse = mc_policy_value(spec, bnd.scaled(f), cfg, 0.0, x)
        checks.append(CheckResult(f"{fam}: policy {f:g} b minus policy b in standard errors",
                                  (pest - est) / np.hypot(se, pse), 3.0,
                                  f"perturbed={pest:.6g}"))
    return checks


def limit_checks(spec: ModelSpec) -> list[CheckResult]:
    """Boundary just before maturity against its terminal value."""
    fam = spec.family.value
    name = f"{fam}: b(T-1e-10) vs terminal value"
    if spec.family is Family.STANDARD:
        bnd = solve_standard_boundary(spec)
        target = spec.terminal_boundary
        value = bnd(spec.T - 1e-10)
    elif spec.family in (Family.RATE, Family.DIVIDEND):
        # b approaches K like K (1 - 2 sigma sqrt((T - t) / (2 pi))), which is
        # about 2.4e-6 K at T - t = 1e-10 for sigma = 0.3; compare with that form
        eps = 1e-10
        target = spec.K * (1.0 - 2.0 * spec.sigma * np.sqrt(eps / (2.0 * np.pi)))
        value = closed_form_boundary(spec)(spec.T - eps)
        name = f"{fam}: b(T-1e-10) vs K with its sqrt(T-t) term"
    else:
        target = spec.K
        value = closed_form_boundary(spec)(spec.T - 1e-10)
    return [CheckResult(name, abs(value - target) / spec.K, 1e-6,
                        f"b={value:.12g}, target={target:.12g}")]


def run_suite(suite: str, specs, seed: int = 42, mc_paths: int = 200_000) -> ValidationReport:
    """Run one suite (or ``"all"``) over a list of model specifications."""
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    chosen = SUITES[:-1] if suite == "all" else (suite,)
    checks = []
    for spec in specs:
        for name in chosen:
            if name == "residuals":
                checks += residual_checks(spec)
            elif name == "lattice":
                checks += lattice_checks(spec)
            elif name == "mc":
                checks += mc_checks(spec, seed=seed, paths=mc_paths)
            else:
                checks += limit_checks(spec)
    return ValidationReport(tuple(checks))
