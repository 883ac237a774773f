import numpy as np
import pytest

from torusbreak.approx import (
    AliasingResolutionError,
    ApproxError,
    ApproxParams,
    adaptive_degree,
    calibrate_A,
    fejer,
    jackson_certificate,
    jackson_error,
    vallee_poussin,
    vallee_poussin_tensor,
)
from torusbreak.grid import (
    GridFunction,
    TrigPoly,
    axis_nodes,
    c0_norm,
    from_spectrum,
    mesh,
    to_spectrum,
)

from oracles import fejer_kernel_mass, fejer_kernel_quadrature
from test_grid import random_band_limited


class TestFejer:
    def test_constant_preserved(self):
        f = GridFunction(2, 16, np.full((16, 16), 2.5))
        for m in (1, 3, 8):
            out = fejer(f, 0, m)
            assert np.max(np.abs(out.values - 2.5)) < 1e-13

    def test_single_mode_weight(self):
        # exp(i 5 x) with m = 10 is scaled by 1 - 5/10 = 0.5
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(5 * x))
        out = fejer(f, 0, 10)
        assert np.max(np.abs(out.values - 0.5 * np.cos(5 * axis_nodes(64)))) < 1e-12

    def test_mode_at_degree_killed(self):
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(5 * x))
        out = fejer(f, 0, 5)
        assert c0_norm(out) < 1e-12

    def test_output_degree(self):
        f = random_band_limited(1, 64, 20, seed=1)
        p = to_spectrum(fejer(f, 0, 4))
        freqs = p.frequencies()
        tail = np.abs(p.coeffs)[np.abs(freqs) >= 4]
        assert np.max(tail) < 1e-13

    def test_kernel_mass_is_one(self):
        for m in (1, 2, 5, 11):
            assert abs(fejer_kernel_mass(m) - 1.0) < 1e-8

    def test_sup_norm_contraction(self):
        for seed in range(10):
            f = random_band_limited(1, 64, 7, seed=seed)
            assert c0_norm(fejer(f, 0, 4)) <= c0_norm(f) + 1e-12

    def test_positivity_transfer(self):
        for seed in range(10):
            g = random_band_limited(1, 128, 7, seed=seed)
            f = GridFunction(1, 128, g.values**2)  # nonnegative, degree 14
            out = fejer(f, 0, 6)
            assert np.min(out.values) > -1e-10

    def test_quadrature_oracle_equivalence_1d(self):
        f = random_band_limited(1, 32, 6, seed=13)
        p = to_spectrum(f)
        fn = lambda pts: p.evaluate(pts)
        x = axis_nodes(32).reshape(-1, 1)
        for m in (2, 5):
            expected = fejer_kernel_quadrature(fn, x, np.array([1.0]), m)
            got = fejer(f, 0, m).values
            assert np.max(np.abs(got - expected)) < 1e-8

    def test_quadrature_oracle_equivalence_2d(self):
        f = random_band_limited(2, 16, 3, seed=17)
        p = to_spectrum(f)
        fn = lambda pts: p.evaluate(pts)
        nodes = mesh(2, 16)
        pts = np.stack([g.ravel() for g in nodes], axis=1)
        rng = np.random.default_rng(0)
        sample = pts[rng.choice(len(pts), size=12, replace=False)]
        for axis in (0, 1):
            unit = np.eye(2)[axis]
            expected = fejer_kernel_quadrature(fn, sample, unit, 3, nodes=4000)
            got_grid = fejer(f, axis, 3)
            got = to_spectrum(got_grid).evaluate(sample)
            assert np.max(np.abs(got - expected)) < 1e-8

    def test_rejects_bad_degree(self):
        f = GridFunction.zeros(1, 16)
        with pytest.raises(ApproxError):
            fejer(f, 0, 0)


class TestValleePoussin:
    def test_reproduces_low_degree(self):
        m = 4
        f = random_band_limited(1, 64, m, seed=23)
        out = vallee_poussin(f, 0, m)
        assert np.max(np.abs(out.values - f.values)) < 1e-12

    def test_kills_mode_at_twice_degree(self):
        m = 4
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(2 * m * x))
        assert c0_norm(vallee_poussin(f, 0, m)) < 1e-12

    def test_weight_ramp(self):
        # weight at |xi| in [m, 2m] is 2 - |xi|/m
        m = 4
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(6 * x))
        out = vallee_poussin(f, 0, m)
        expected = (2 - 6 / m) * np.cos(6 * axis_nodes(64))
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_norm_bound_three(self):
        for seed in range(100):
            f = random_band_limited(1, 128, 10, seed=seed)
            assert c0_norm(vallee_poussin(f, 0, 3)) <= 3 * c0_norm(f) + 1e-12

    def test_linearity(self):
        f = random_band_limited(1, 64, 9, seed=3)
        g = random_band_limited(1, 64, 9, seed=4)
        a, b = 1.7, -0.4
        lhs = vallee_poussin(a * f + b * g, 0, 3)
        rhs = a * vallee_poussin(f, 0, 3) + b * vallee_poussin(g, 0, 3)
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-12


class TestTensor:
    def test_reproduces_product_cosines(self):
        f = GridFunction.from_callable(2, 32, lambda x, y: np.cos(x) * np.cos(y))
        p = vallee_poussin_tensor(f, ApproxParams(degrees=(4, 4), orders=(2, 2)))
        back = from_spectrum(p, 32)
        assert np.max(np.abs(back.values - f.values)) < 1e-12

    def test_constant(self):
        f = GridFunction(2, 16, np.full((16, 16), -1.25))
        p = vallee_poussin_tensor(f, ApproxParams(degrees=(2, 3), orders=(1, 1)))
        assert abs(p.mean() + 1.25) < 1e-13
        back = from_spectrum(p, 16)
        assert np.max(np.abs(back.values + 1.25)) < 1e-12

    def test_axis_order_irrelevant(self):
        f = random_band_limited(2, 64, 10, seed=8)
        p12 = vallee_poussin_tensor(f, ApproxParams(degrees=(3, 5), orders=(2, 2)))
        # swap axes of input, apply swapped degrees, swap back
        f_t = GridFunction(2, 64, f.values.T)
        p21 = vallee_poussin_tensor(f_t, ApproxParams(degrees=(5, 3), orders=(2, 2)))
        assert np.max(np.abs(p12.coeffs - p21.coeffs.T)) < 1e-12

    def test_per_axis_output_degree(self):
        f = random_band_limited(2, 64, 14, seed=9)
        p = vallee_poussin_tensor(f, ApproxParams(degrees=(3, 6), orders=(2, 2)))
        freqs = p.frequencies()
        mask0 = np.abs(freqs) > 2 * 3 - 1
        assert np.max(np.abs(p.coeffs[mask0, :])) < 1e-13

    def test_zero_frequency_preserved_exactly(self):
        f = random_band_limited(2, 32, 6, seed=10)
        shifted = f + (-f.mean()) * GridFunction(2, 32, np.ones((32, 32)))
        p = vallee_poussin_tensor(shifted, ApproxParams(degrees=(2, 2), orders=(1, 1)))
        assert abs(p.mean()) < 1e-15

    def test_resolution_guard(self):
        f = GridFunction.zeros(2, 16)
        with pytest.raises(AliasingResolutionError):
            vallee_poussin_tensor(f, ApproxParams(degrees=(8, 8), orders=(1, 1)))


class TestJackson:
    def test_exact_on_low_degree(self):
        f = random_band_limited(2, 32, 3, seed=30)
        params = ApproxParams(degrees=(4, 4), orders=(2, 2))
        assert jackson_error(f, params) < 1e-12

    def test_pure_tail_mode_error(self):
        # sin(8x) with m=4: the smoother kills frequency 8 entirely, so the
        # error is the full mode; coefficient arithmetic gives the same value.
        f = GridFunction.from_callable(1, 64, lambda x: np.sin(8 * x))
        params = ApproxParams(degrees=(4,), orders=(3,))
        error = jackson_error(f, params)
        assert abs(error - c0_norm(f)) < 1e-10

    @pytest.mark.parametrize("r", [1, 2, 4, 6])
    def test_error_decays_at_rate_r(self, r):
        bump = GridFunction.from_callable(
            1, 256, lambda x: np.exp(np.cos(x)) * np.sin(2 * x)
        )
        ms = [4, 8, 16, 32]
        errors = [
            jackson_error(bump, ApproxParams(degrees=(m,), orders=(r,))) for m in ms
        ]
        # decay at least as fast as m^{-r}: error(2m) <= error(m) / 2^r (with slack)
        for e1, e2 in zip(errors, errors[1:]):
            if e1 < 1e-13:
                continue
            assert e2 <= e1 / 2**r * 1.5

    def test_calibration_floor_on_exact_family(self):
        family = [random_band_limited(1, 64, 3, seed=s) for s in range(3)]
        a = calibrate_A(family, k=2, degrees=[4, 8])
        assert a == pytest.approx(1e-6)

    def test_calibration_single_mode_arithmetic(self):
        f = GridFunction.from_callable(1, 64, lambda x: np.sin(8 * x))
        a = calibrate_A([f], k=2, degrees=[2, 4])
        worst = 0.0
        for m in (2, 4):
            err = jackson_error(f, ApproxParams(degrees=(m,), orders=(2,)))
            worst = max(worst, err * (2 * m - 1) ** 2 / 64.0)
        assert a == pytest.approx(1.1 * worst)

    def test_certificate_passes_after_calibration(self):
        family = [
            GridFunction.from_callable(1, 256, lambda x: np.exp(np.cos(x))),
            GridFunction.from_callable(1, 256, lambda x: np.sin(3 * x) ** 3),
        ]
        a = calibrate_A(family, k=2, degrees=[4, 8, 16])
        for f in family:
            cert = jackson_certificate(
                f, ApproxParams(degrees=(8,), orders=(2,), a_const=a)
            )
            assert cert.passed
            assert cert.degree_n == 15 and cert.order_k == 2

    def test_certificate_json_record(self):
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(x))
        cert = jackson_certificate(
            f, ApproxParams(degrees=(4,), orders=(2,), a_const=1.0)
        )
        record = cert.to_json_record()
        assert '"N": 7' in record and '"k": 2' in record and '"pass": true' in record

    def test_requires_calibration(self):
        f = GridFunction.from_callable(1, 64, lambda x: np.cos(x))
        with pytest.raises(ApproxError):
            jackson_certificate(f, ApproxParams(degrees=(4,), orders=(2,)))

    def test_empty_family_rejected(self):
        with pytest.raises(ApproxError):
            calibrate_A([], k=2, degrees=[4])


class TestAdaptiveDegree:
    def test_meets_tolerance(self):
        f = GridFunction.from_callable(1, 512, lambda x: np.exp(np.cos(x)) ** 2)
        a = calibrate_A([f], k=3, degrees=[4, 8, 16])
        poly, cert = adaptive_degree(f, k=3, sigma=1e-4, a_const=a)
        assert cert.error <= 1e-4 and cert.bound <= 1e-4
        assert poly.degree == cert.degree_n

    def test_minimality(self):
        f = GridFunction.from_callable(1, 512, lambda x: np.exp(np.cos(x)) ** 2)
        a = calibrate_A([f], k=3, degrees=[4, 8, 16])
        poly, cert = adaptive_degree(f, k=3, sigma=1e-4, a_const=a)
        m = (cert.degree_n + 1) // 2
        if m > 2:
            params = ApproxParams(degrees=(m - 1,), orders=(3,))
            smaller_err = jackson_error(f, params)
            smaller_bound = a * (2 * (m - 1) - 1) ** (-3) * _cr(f, 3)
            assert smaller_err > 1e-4 or smaller_bound > 1e-4

    def test_unreachable_raises(self):
        rng = np.random.default_rng(2)
        f = GridFunction(1, 16, rng.normal(size=16))
        with pytest.raises(AliasingResolutionError):
            adaptive_degree(f, k=2, sigma=1e-14, a_const=1.0)


def _cr(f, r):
    from torusbreak.grid import cr_norm

    return cr_norm(f, r)
