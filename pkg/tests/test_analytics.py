from __future__ import annotations

import numpy as np
import pytest

from clusterbench import analytics
from clusterbench.analytics import (
    cluster_overlap,
    eps_max,
    eps_max_asymptote,
    f_cp_n3,
    f_zz_n3,
    fit_asymptote_prefactor,
    min_f_zz,
    perturbative_f2,
    scaled_eps_max,
    taylor_coefficients,
)

# reference values evaluated independently in 30-digit arithmetic
EPS_MAX = {3: 0.608173447969392729829, 5: 0.450558728445493113861, 7: 0.373607111671731106155, 9: 0.326054387130824964294}


@pytest.mark.parametrize("n,expected", sorted(EPS_MAX.items()))
def test_eps_max_frozen(n, expected):
    assert eps_max(n) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("n", [3, 5, 7, 9, 21])
def test_eps_max_is_two_thirds_crossing(n):
    assert min_f_zz(n, eps_max(n)) == pytest.approx(2 / 3, abs=1e-14)


def test_eps_max_decreasing():
    values = [eps_max(n) for n in range(3, 61, 2)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_scaled_eps_max_tends_to_one():
    ratios = [scaled_eps_max(n) for n in (11, 101, 1001, 10001)]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1, abs=1e-3)


def test_asymptote_uses_n_minus_one():
    assert eps_max(2001) == pytest.approx(eps_max_asymptote(2001), rel=1e-3)


def test_asymptote_prefactor_near_two_over_pi():
    fit = fit_asymptote_prefactor(range(101, 402, 20))
    assert fit["prefactor"] == pytest.approx(2 / np.pi, rel=1e-2)
    assert fit["prefactor"] < 1


def test_min_f_zz_frozen():
    assert min_f_zz(5, 0.1) == pytest.approx(0.975827691222222607, abs=1e-14)
    assert min_f_zz(3, 0.1) == pytest.approx((1 + 0.975528258147576786) / 2, abs=1e-14)


@pytest.mark.parametrize("eps", [0.0, 0.5, 1.0])
def test_min_f_zz_limits(eps):
    assert min_f_zz(3, eps) == pytest.approx((1 + np.cos(np.pi * eps / 2) ** 2) / 2)
    assert min_f_zz(9, 1.0) == pytest.approx(0.5)


def test_closed_forms_frozen():
    assert f_cp_n3(0.7, 1.3, 0.35) == pytest.approx(0.820878789727784029, abs=1e-14)
    assert f_zz_n3(0.7, 1.3, 0.35) == pytest.approx(0.916094674956208233, abs=1e-14)


def test_closed_forms_ideal():
    t, p = np.meshgrid(np.linspace(0, np.pi, 7), np.linspace(0, 2 * np.pi, 7))
    assert np.allclose(f_cp_n3(t, p, 0.0), 1)
    assert np.allclose(f_zz_n3(t, p, 0.0), 1)


def test_perturbative_frozen():
    assert perturbative_f2("zz", 0.7, 1.3) == pytest.approx(-0.758331462119267778, abs=1e-14)
    assert perturbative_f2("cp", 0.7, 1.3) == pytest.approx(-1.77729228776742712, abs=1e-14)


@pytest.mark.parametrize("kind,fn", [("cp", f_cp_n3), ("zz", f_zz_n3)])
@pytest.mark.parametrize("theta0,phi0", [(0.3, 0.2), (1.1, 2.5), (2.8, 4.4)])
def test_perturbative_matches_series(kind, fn, theta0, phi0):
    c = taylor_coefficients(lambda e: fn(theta0, phi0, e))
    assert abs(c[1]) < 1e-9
    assert c[2].real == pytest.approx(perturbative_f2(kind, theta0, phi0), abs=1e-8)


def test_perturbative_xy_unavailable():
    with pytest.raises(ValueError):
        perturbative_f2("xy", 0.1, 0.2)


def test_taylor_coefficients_exp():
    c = taylor_coefficients(np.exp, radius=0.1, order=5)
    assert np.allclose(c, [1, 1, 1 / 2, 1 / 6, 1 / 24, 1 / 120], atol=1e-9)


def test_taylor_coefficients_array_valued():
    c = taylor_coefficients(lambda z: np.array([[1 + z, z**2], [z**3, 0 * z]]), order=3)
    assert c.shape == (4, 2, 2)
    assert c[2][0, 1] == pytest.approx(1, abs=1e-9)
    assert c[3][1, 0] == pytest.approx(1, abs=1e-6)


def test_cluster_overlap():
    assert cluster_overlap(3, 0.0) == 1
    assert cluster_overlap(5, 1.0) == pytest.approx(0.5**2)


@pytest.mark.parametrize("fn", [min_f_zz, cluster_overlap])
@pytest.mark.parametrize("n", [2, 4, 1, 3.5])
def test_odd_n_required(fn, n):
    with pytest.raises(ValueError):
        fn(n, 0.1)


def test_two_thirds_constant():
    assert analytics.TWO_THIRDS == 2 / 3


def test_scaling_between_101_and_401():
    # eps_max ~ n^(-1/2), so n eps_max^2 is flat; the n^2 eps_max^2 reading grows fourfold
    assert scaled_eps_max(401) / scaled_eps_max(101) == pytest.approx(1, abs=0.05)
    assert (401 * eps_max(401)) ** 2 / (101 * eps_max(101)) ** 2 > 3
