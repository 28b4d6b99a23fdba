"""Shared fixtures and high-precision reference helpers."""
from __future__ import annotations

import mpmath as mp
import pytest

from putboundary import ModelSpec

mp.mp.dps = 40

# (criterion, passed, detail) rows recorded by the acceptance tests
ACCEPTANCE_ROWS: list[tuple[str, bool, str]] = []


def mp_ncdf(x) -> float:
    return float(mp.ncdf(mp.mpf(x)))


def mp_npdf(x) -> float:
    return float(mp.npdf(mp.mpf(x)))


def mp_bs_put(x, K, T, r, delta, sigma) -> float:
    """Black-Scholes European put in 40-digit arithmetic."""
    x, K, T, r, q, s = (mp.mpf(v) for v in (x, K, T, r, delta, sigma))
    d1 = (mp.log(x / K) + (r - q + s * s / 2) * T) / (s * mp.sqrt(T))
    d2 = d1 - s * mp.sqrt(T)
    return float(K * mp.exp(-r * T) * mp.ncdf(-d2) - x * mp.exp(-q * T) * mp.ncdf(-d1))


@pytest.fixture
def standard_spec():
    return ModelSpec.standard(K=100.0, T=1.0, r=0.05, delta=0.0, sigma=0.2)


@pytest.fixture
def rate_spec():
    return ModelSpec.rate(K=1.0, T=10.0, sigma=0.3, delta=0.0)


@pytest.fixture
def dividend_spec():
    return ModelSpec.dividend(K=1.0, T=10.0, r=0.05, sigma=0.3)


@pytest.fixture
def vol_spec():
    return ModelSpec.vol(K=1.0, T=10.0, r=0.05)


@pytest.fixture
def strike_spec():
    return ModelSpec.strike(KT=1.0, T=10.0, r=0.05, sigma=0.2, m=0.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_ROWS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_ROWS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
