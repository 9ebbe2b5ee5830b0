import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy.special import hyp2f1

from uav_irs_noma.logic.errors import DomainError, QuadratureError
from uav_irs_noma.logic.network_model import ElevationModel
from uav_irs_noma.logic.special_math import QuadratureSpec, expect_over_theta, integrate, psi


def direct_psi(x, y):
    value, _ = sp_integrate.quad(lambda v: y / (y + v ** (1.0 / x)), 1.0, np.inf, epsabs=1e-13, limit=200)
    return value


def test_psi_half_exponent_closed_form():
    # integral of 1/(1+v^2) over [1, inf)
    assert psi(0.5, 1.0) == pytest.approx(math.pi / 4, abs=1e-9)


@pytest.mark.parametrize("y", np.geomspace(1e-3, 1e3, 50))
def test_psi_half_exponent_on_log_grid(y):
    root = math.sqrt(y)
    assert abs(psi(0.5, y) - root * math.atan(root)) < 1e-9


def test_psi_matches_hypergeometric_form():
    x, y = 2.0 / 3.0, 10.0
    expected = x * y / (1.0 - x) * hyp2f1(1.0, 1.0 - x, 2.0 - x, -y)
    assert psi(x, y) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("x,y", [(0.75, 0.3), (2.0 / 3.0, 0.01), (0.5, 40.0), (0.4, 2.5)])
def test_psi_matches_direct_integral(x, y):
    assert psi(x, y) == pytest.approx(direct_psi(x, y), rel=1e-7)


def test_psi_limits():
    assert psi(0.5, 0.0) == 0.0
    assert math.isinf(psi(0.5, math.inf))


def test_psi_small_argument_is_linear():
    x, y = 2.0 / 3.0, 1e-6
    assert psi(x, y) == pytest.approx(y * x / (1.0 - x), rel=1e-4)


def test_psi_increasing_in_y():
    values = [psi(2.0 / 3.0, y) for y in (0.1, 0.5, 1.0, 4.0, 20.0)]
    assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("x,y", [(0.0, 1.0), (1.0, 1.0), (1.5, 1.0), (0.5, -1.0), (0.5, math.nan)])
def test_psi_domain_errors(x, y):
    with pytest.raises(DomainError):
        psi(x, y)


def test_integrate_raises_when_budget_exhausted():
    spec = QuadratureSpec(abs_tol=1e-14, max_subdivisions=1)
    with pytest.raises(QuadratureError):
        integrate(lambda z: np.sin(50.0 * z) ** 2 / np.sqrt(z), 0.0, 1.0, spec)


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


def test_expect_over_theta_deterministic_and_uniform():
    assert expect_over_theta(math.cos, ElevationModel.deterministic(0.3)) == pytest.approx(math.cos(0.3))
    uniform = ElevationModel.uniform(0.1, 0.5)
    expected = (math.sin(0.5) - math.sin(0.1)) / 0.4
    assert expect_over_theta(math.cos, uniform) == pytest.approx(expected, rel=1e-10)


def test_zero_width_uniform_is_deterministic():
    model = ElevationModel.uniform(0.4, 0.4)
    assert model.is_deterministic
    assert expect_over_theta(math.sin, model) == pytest.approx(math.sin(0.4))
