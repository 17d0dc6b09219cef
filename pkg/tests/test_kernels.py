import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlkdv.kernels import (
    CATALOG_NAMES,
    KernelKind,
    custom_kernel,
    eval_alpha,
    eval_alpha_prime,
    make_kernel,
    verify_conditions,
)

# |mu|(R) = int |alpha'''|, computed with mpmath quadrature on the
# symbolically differentiated closed forms (30 digits), independent of the
# package's trapezoid estimate. The Gaussian value also has the closed form
# 2 * (phi(0) + 4 phi(sqrt 3)).
MU_ORACLE = {
    "rosenau-kdv": 1.014370990033544,
    "rosenau-bbm-kdv": 0.7664245180764482,
    "gaussian": 1.5100130177924674,
}


@pytest.fixture(params=CATALOG_NAMES)
def kernel(request):
    return make_kernel(request.param)


def test_gaussian_values():
    k = make_kernel("gaussian")
    assert eval_alpha(k, 0.0) == pytest.approx(0.3989422804, abs=1e-10)
    assert eval_alpha_prime(k, 0.0) == 0.0
    assert eval_alpha_prime(k, 1.0) == pytest.approx(-0.2419707245, abs=1e-9)
    assert eval_alpha(k, 40.0) == 0.0
    xs = np.linspace(1.0, 30.0, 200)
    assert np.all(np.diff(k.alpha(xs)) <= 0)


def test_rosenau_kdv_values():
    k = make_kernel(KernelKind.ROSENAU_KDV)
    assert eval_alpha(k, 0.0) == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-15)
    assert eval_alpha_prime(k, 1.0) == pytest.approx(-0.160157817717, abs=1e-11)
    assert eval_alpha_prime(k, -1.0) == pytest.approx(0.160157817717, abs=1e-11)


def test_other_catalog_values():
    assert eval_alpha(make_kernel("rosenau-bbm-kdv"), 0.0) == pytest.approx(0.2886751346, abs=1e-10)
    assert eval_alpha(make_kernel("exponential"), 0.0) == 0.5
    assert eval_alpha_prime(make_kernel("rosenau-bbm-kdv"), 1.0) == pytest.approx(
        -0.116426135802, abs=1e-11)


def test_alpha_prime_zero_at_origin(kernel):
    assert eval_alpha_prime(kernel, 0.0) == 0.0


def test_unit_mass(kernel):
    x = np.linspace(-80, 80, 160001)
    assert np.trapezoid(kernel.alpha(x), x) == pytest.approx(1.0, abs=1e-6)


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=50))
@settings(max_examples=50, deadline=None)
def test_parity(xs):
    x = np.array(xs)
    for name in CATALOG_NAMES:
        k = make_kernel(name)
        assert np.max(np.abs(k.alpha(x) - k.alpha(-x))) <= 1e-14
        assert np.max(np.abs(k.alpha_prime(x) + k.alpha_prime(-x))) <= 1e-14


def test_derivative_oracle(kernel):
    rng = np.random.default_rng(7)
    x = rng.uniform(0.1, 10.0, 500) * rng.choice([-1, 1], 500)
    d = 1e-6
    fd = (kernel.alpha(x + d) - kernel.alpha(x - d)) / (2 * d)
    assert np.max(np.abs(kernel.alpha_prime(x) - fd)) <= 1e-6


def test_third_derivative_matches_fd():
    rng = np.random.default_rng(3)
    x = rng.uniform(0.2, 8.0, 100) * rng.choice([-1, 1], 100)
    d = 1e-4
    for name in MU_ORACLE:
        k = make_kernel(name)
        fd = (k.alpha_prime(x + d) - 2 * k.alpha_prime(x) + k.alpha_prime(x - d)) / d ** 2
        assert np.max(np.abs(k.alpha_third(x) - fd)) < 1e-6


@pytest.mark.parametrize("name,a", [("rosenau-kdv", 1 / math.sqrt(2)),
                                     ("rosenau-bbm-kdv", math.sqrt(3) / 2)])
def test_exponential_decay_bound(name, a):
    k = make_kernel(name)
    assert k.decay_rate == pytest.approx(a)
    x = np.concatenate([np.linspace(1, 60, 5000), -np.linspace(1, 60, 5000)])
    assert np.all(np.abs(k.alpha_prime(x)) <= np.exp(-a * np.abs(x)))
    assert np.all(np.abs(k.alpha_third(x)) <= np.exp(-a * np.abs(x)))


def test_c2_metadata():
    assert make_kernel("exponential").satisfies_c2 is False
    for name in MU_ORACLE:
        assert make_kernel(name).satisfies_c2


@pytest.mark.parametrize("name", sorted(MU_ORACLE))
def test_verify_conditions_mu(name):
    rep = verify_conditions(make_kernel(name), quad_step=1e-3, quad_halfwidth=60.0)
    assert rep.converged
    assert rep.mu_total_variation == pytest.approx(MU_ORACLE[name], rel=1e-5)
    # the Rosenau kernels oscillate, so only the Gaussian has int |alpha| = 1
    assert rep.alpha_l1 >= 1.0 - 1e-6
    if name == "gaussian":
        assert rep.alpha_l1 == pytest.approx(1.0, abs=1e-6)
    assert math.isfinite(rep.w21_norm)


def test_verify_conditions_gaussian_alpha_prime_l1():
    rep = verify_conditions(make_kernel("gaussian"))
    # alpha' changes sign once, so int |alpha'| = 2 alpha(0)
    assert rep.alpha_prime_l1 == pytest.approx(2 / math.sqrt(2 * math.pi), abs=1e-6)


def test_verify_conditions_exponential_flags_c2():
    rep = verify_conditions(make_kernel("exponential"))
    assert rep.satisfies_c2 is False
    assert rep.mu_total_variation is None


def test_verify_conditions_reports_nonconvergence():
    # a step far too coarse for the Gaussian's curvature moves the estimate
    rep = verify_conditions(make_kernel("gaussian"), quad_step=1.5, quad_halfwidth=30.0)
    assert not rep.converged


def test_custom_kernel_fd_estimate_of_mu():
    # alpha = sech^2(x/2)/4 has unit mass; mu via FD of alpha' (no alpha''' given)
    alpha = lambda x: 0.25 / np.cosh(0.5 * np.asarray(x)) ** 2
    alpha_p = lambda x: -0.25 * np.tanh(0.5 * np.asarray(x)) / np.cosh(0.5 * np.asarray(x)) ** 2
    k = custom_kernel(alpha, alpha_p, decay_rate=1.0, name="sech2")
    x = np.linspace(-7, 7, 101)
    fd = (alpha(x + 1e-6) - alpha(x - 1e-6)) / 2e-6
    assert np.max(np.abs(alpha_p(x) - fd)) < 1e-8
    rep = verify_conditions(k, quad_step=1e-3, quad_halfwidth=60.0)
    assert rep.converged and rep.mu_total_variation > 0


def test_bad_kind():
    with pytest.raises(ValueError):
        make_kernel("laplace")
    with pytest.raises(ValueError):
        make_kernel(KernelKind.CUSTOM)
