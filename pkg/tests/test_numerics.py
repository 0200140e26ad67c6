"""Special functions, quadrature, and optimizer contracts."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from coarsebell.numerics import (
    OptimizerConfig,
    erf_complex,
    erfi_complex,
    exp_erf,
    faddeeva,
    gauss_hermite,
    minimize,
)

SQRT_PI = math.sqrt(math.pi)
DATA = Path(__file__).parent / "data"


def load_reference():
    table = json.loads((DATA / "faddeeva_reference.json").read_text())
    z = np.array([complex(e["re"], e["im"]) for e in table])
    w = np.array([complex(e["w_re"], e["w_im"]) for e in table])
    return z, w


class TestFaddeeva:
    def test_origin(self):
        assert faddeeva(0j) == pytest.approx(1.0 + 0.0j, abs=1e-15)

    def test_unit_imaginary(self):
        # w(iy) = exp(y^2) erfc(y); multiprecision value frozen in the table
        assert faddeeva(1j) == pytest.approx(0.4275835761558070 + 0j, rel=1e-13)

    def test_against_frozen_multiprecision_table(self):
        z, w_exact = load_reference()
        w = faddeeva(z)
        rel = np.abs(w - w_exact) / np.abs(w_exact)
        assert rel.max() < 1e-12

    def test_reflection_identity(self):
        rng = np.random.default_rng(11)
        z = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-3, 3, 200)
        lhs = faddeeva(-z)
        rhs = 2.0 * np.exp(-z * z) - faddeeva(z)
        assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-10

    def test_scalar_and_array_shapes(self):
        assert np.isscalar(faddeeva(1 + 1j)) or faddeeva(1 + 1j).ndim == 0
        assert faddeeva(np.ones((3, 2), dtype=complex)).shape == (3, 2)


class TestErfFamily:
    def test_erf_zero(self):
        assert erf_complex(0j) == pytest.approx(0.0, abs=1e-15)

    def test_erf_real_axis(self):
        assert erf_complex(2.0 + 0j) == pytest.approx(0.9953222650189527, rel=1e-12)

    def test_erf_matches_scipy_on_real_axis(self):
        from scipy.special import erf

        x = np.linspace(-6, 6, 101)
        ours = erf_complex(x.astype(complex)).real
        assert np.max(np.abs(ours - erf(x))) < 1e-13

    def test_erf_erfc_complement_real(self):
        from scipy.special import erfc

        x = np.linspace(-5, 5, 41)
        ours = erf_complex(x.astype(complex)).real
        assert np.max(np.abs(ours + erfc(x) - 1.0)) < 1e-13

    def test_erfi_real_is_real_and_odd(self):
        x = np.linspace(0.1, 3.5, 20)
        plus = erfi_complex(x.astype(complex))
        minus = erfi_complex(-x.astype(complex))
        assert np.max(np.abs(plus.imag)) < 1e-13 * np.max(np.abs(plus.real))
        assert np.max(np.abs(plus + minus)) < 1e-12 * np.max(np.abs(plus))

    def test_erf_complex_against_wofz_identity(self):
        # independent route: scipy.special.wofz
        from scipy.special import wofz

        rng = np.random.default_rng(5)
        z = rng.uniform(-4, 4, 300) + 1j * rng.uniform(-4, 4, 300)
        ours = erf_complex(z)
        flip = z.real < 0
        zz = np.where(flip, -z, z)
        ref = 1.0 - np.exp(-zz * zz) * wofz(1j * zz)
        ref = np.where(flip, -ref, ref)
        assert np.max(np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))) < 1e-12


class TestExpErf:
    def test_matches_naive_product_when_safe(self):
        rng = np.random.default_rng(3)
        z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
        e = rng.uniform(-5, 2, 100) + 1j * rng.uniform(-3, 3, 100)
        naive = np.exp(e) * erf_complex(z)
        stable = exp_erf(e, z)
        assert np.max(np.abs(stable - naive) / np.maximum(1e-30, np.abs(naive))) < 1e-11

    def test_survives_overflowing_factors(self):
        # erf(40i) alone overflows float64; exp(-1700) alone underflows.
        z = 40j + 0.3
        log_scale = -1640.0 + 0j
        val = exp_erf(log_scale, z)
        assert np.isfinite(val.real) and np.isfinite(val.imag)
        # magnitude estimate: |erf(x+iy)| ~ e^{y^2-x^2}/(sqrt(pi) |z|)
        assert abs(val) == pytest.approx(
            math.exp(-1640 + 40 * 40 - 0.09) / (SQRT_PI * 40), rel=1e-2
        )


class TestGaussHermite:
    def test_order_one_closed_form(self):
        rule = gauss_hermite(1)
        assert rule.nodes[0] == pytest.approx(0.0, abs=1e-15)
        assert rule.weights[0] == pytest.approx(SQRT_PI, rel=1e-15)

    def test_order_two_closed_form(self):
        rule = gauss_hermite(2)
        assert rule.nodes == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)], rel=1e-14)
        assert rule.weights == pytest.approx([SQRT_PI / 2, SQRT_PI / 2], rel=1e-14)

    def test_quartic_moment_exact_at_order_three(self):
        rule = gauss_hermite(3)
        val = rule.integrate(lambda x: x**4)
        assert val == pytest.approx(3 * SQRT_PI / 4, rel=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 5, 20, 64, 128, 200])
    def test_weights_sum_and_symmetry(self, order):
        rule = gauss_hermite(order)
        assert rule.weights.sum() == pytest.approx(SQRT_PI, rel=1e-12)
        assert rule.nodes == pytest.approx(-rule.nodes[::-1], abs=1e-12)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            gauss_hermite(0)
        with pytest.raises(ValueError):
            gauss_hermite(201)

    def test_polynomial_exactness(self):
        # degree 2n-1 exactness: moments of x^(2k) are (2k-1)!! sqrt(pi)/2^k
        rule = gauss_hermite(6)
        for k in range(0, 6):
            exact = SQRT_PI * math.prod(range(1, 2 * k, 2)) / 2**k
            assert rule.integrate(lambda x, k=k: x ** (2 * k)) == pytest.approx(
                exact, rel=1e-12
            )


class TestMinimize:
    def test_quadratic(self):
        cfg = OptimizerConfig(bounds=((-5.0, 5.0),), restarts=4, seed=1)
        res = minimize(lambda v: (v[0] - 1.0) ** 2, cfg)
        assert res.x[0] == pytest.approx(1.0, abs=1e-6)
        assert res.converged

    def test_rosenbrock(self):
        def rosen(v):
            return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2

        cfg = OptimizerConfig(
            bounds=((-2.0, 2.0), (-2.0, 2.0)), restarts=8, seed=7, max_iters=2000
        )
        res = minimize(rosen, cfg)
        assert res.x == pytest.approx([1.0, 1.0], abs=1e-4)

    def test_deterministic_for_fixed_seed(self):
        def f(v):
            return math.sin(3 * v[0]) + 0.1 * v[0] ** 2 + math.cos(2 * v[1])

        cfg = OptimizerConfig(bounds=((-4.0, 4.0), (-4.0, 4.0)), restarts=6, seed=42)
        a = minimize(f, cfg)
        b = minimize(f, cfg)
        assert a.fun == b.fun
        assert np.array_equal(a.x, b.x)

    def test_monotone_in_restarts(self):
        def f(v):
            return math.sin(5 * v[0]) * math.cos(3 * v[0]) + 0.05 * v[0] ** 2

        prev = math.inf
        for k in range(1, 8):
            cfg = OptimizerConfig(bounds=((-6.0, 6.0),), restarts=k, seed=9)
            res = minimize(f, cfg)
            assert res.fun <= prev + 1e-15
            prev = res.fun

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(bounds=(), restarts=1)
        with pytest.raises(ValueError):
            OptimizerConfig(bounds=((0.0, 1.0),), tolerance=0.0)
        with pytest.raises(ValueError):
            OptimizerConfig(bounds=((1.0, 0.0),))
        with pytest.raises(ValueError):
            OptimizerConfig(bounds=((0.0, 1.0),), restarts=0)
