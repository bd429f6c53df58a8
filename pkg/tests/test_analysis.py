import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ioncats import fock
from ioncats.analysis import (
    WIGNER_BOUND,
    compression_exponent,
    fidelity,
    mode_distribution,
    number_distribution,
    parity_expectation,
    quadrature_variance,
    reduced_density_matrix,
    reduced_internal_overlap,
    squeezing_axes,
    truncation_tail,
    wigner_grid,
    wigner_value,
)
from ioncats.dynamics import JointSpace
from ioncats.errors import DimensionError
from ioncats.spin import jx_product_eigenstate

D = 48
unit = st.floats(-1, 1, allow_nan=False)


def cat(alpha, sign, d=D):
    return fock.normalize(fock.coherent_state(d, alpha) + sign * fock.coherent_state(d, -alpha))


class TestFidelity:
    def test_self(self):
        psi = fock.coherent_state(D, 0.4 - 0.2j)
        assert fidelity(psi, psi) == pytest.approx(1, abs=1e-15)

    def test_orthogonal(self):
        assert fidelity(fock.basis_state(4, 0), fock.basis_state(4, 1)) == 0

    @given(unit, unit, unit, unit)
    @settings(max_examples=40, deadline=None)
    def test_coherent_overlap(self, ar, ai, br, bi):
        a, b = complex(ar, ai), complex(br, bi)
        a, b = (a / max(1, abs(a)), b / max(1, abs(b)))
        got = fidelity(fock.coherent_state(D, a), fock.coherent_state(D, b))
        assert got == pytest.approx(np.exp(-abs(a - b) ** 2), abs=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            fidelity(np.ones(3), np.ones(4))


class TestParity:
    def test_vacuum_and_one(self):
        assert parity_expectation(fock.vacuum(5)) == 1
        assert parity_expectation(fock.basis_state(5, 1)) == -1

    @pytest.mark.parametrize("alpha", [0.2, 0.5j, 1.0 + 0.3j])
    def test_cats(self, alpha):
        assert parity_expectation(cat(alpha, 1)) == pytest.approx(1, abs=1e-10)
        assert parity_expectation(cat(alpha, -1)) == pytest.approx(-1, abs=1e-10)


class TestQuadratures:
    @pytest.mark.parametrize("theta", np.linspace(0, np.pi, 7))
    def test_vacuum(self, theta):
        assert quadrature_variance(fock.vacuum(D), theta) == pytest.approx(0.25, abs=1e-14)

    @pytest.mark.parametrize("theta", np.linspace(0, np.pi, 5))
    def test_coherent(self, theta):
        assert quadrature_variance(fock.coherent_state(D, 0.7 - 0.4j), theta) == pytest.approx(0.25, abs=1e-10)

    def test_minimum_uncertainty(self):
        thetas = np.linspace(0, np.pi, 2001)
        v = np.array([quadrature_variance(fock.squeezed_vacuum_state(64, 0.1), t) for t in thetas])
        axes = squeezing_axes(fock.squeezed_vacuum_state(64, 0.1))
        assert axes.var_min * axes.var_max == pytest.approx(1 / 16, abs=1e-8)
        assert v.min() == pytest.approx(axes.var_min, abs=1e-6)
        assert v.max() == pytest.approx(axes.var_max, abs=1e-6)
        assert quadrature_variance(fock.squeezed_vacuum_state(64, 0.1), axes.theta_min) == pytest.approx(
            axes.var_min, abs=1e-14
        )

    @given(st.floats(0, 2 * np.pi), st.floats(0.02, 0.25))
    @settings(max_examples=30, deadline=None)
    def test_opposite_squeezing_axes_orthogonal(self, phi, r):
        xi = r * np.exp(1j * phi)
        plus = squeezing_axes(fock.squeezed_vacuum_state(64, xi)).theta_min
        minus = squeezing_axes(fock.squeezed_vacuum_state(64, -xi)).theta_min
        assert (plus - minus) % np.pi == pytest.approx(np.pi / 2, abs=1e-6)

    @given(st.floats(0, np.pi))
    @settings(max_examples=20, deadline=None)
    def test_periodic_and_smooth(self, theta):
        psi = fock.normalize(fock.squeezed_vacuum_state(D, 0.2j) + 0.3 * fock.coherent_state(D, 0.5))
        v = quadrature_variance(psi, theta)
        assert quadrature_variance(psi, theta + np.pi) == pytest.approx(v, abs=1e-12)
        assert abs(quadrature_variance(psi, theta + 1e-4) - v) <= 2e-4

    def test_compression_exponent_consistent(self):
        # the squeeze parameter-to-compression map is a single exponential
        values = [compression_exponent(fock.squeezed_vacuum_state(64, r), r) for r in (0.05, 0.1, 0.2, 0.25)]
        assert max(values) - min(values) < 1e-8
        assert values[0] > 1

    def test_compression_needs_positive(self):
        with pytest.raises(ValueError):
            compression_exponent(fock.vacuum(4), 0)


class TestDistributions:
    def test_fock_delta(self):
        assert np.array_equal(number_distribution(fock.basis_state(6, 2)), [0, 0, 1, 0, 0, 0])

    def test_poisson(self):
        n = np.arange(40)
        poisson = np.exp(-1) / np.array([float(np.prod(np.arange(1, k + 1))) for k in n])
        assert np.max(np.abs(number_distribution(fock.coherent_state(40, 1.0)) - poisson)) < 1e-10

    def test_squeezed_odd_zero(self):
        assert np.all(number_distribution(fock.squeezed_vacuum_state(64, 0.2))[1::2] == 0)

    def test_tail_examples(self):
        assert truncation_tail(fock.vacuum(64)) == 0
        assert truncation_tail(fock.coherent_state(64, 0.5), 0.25) < 1e-12

    @given(st.floats(0.01, 1), st.floats(0.01, 1))
    @settings(max_examples=30, deadline=None)
    def test_tail_monotone(self, f1, f2):
        psi = fock.coherent_state(24, 2.0)
        lo, hi = sorted((f1, f2))
        assert truncation_tail(psi, lo) <= truncation_tail(psi, hi)

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            truncation_tail(fock.vacuum(4), 0)

    def test_mode_marginals(self):
        js = JointSpace.build(2, (6, 5))
        joint = np.kron(np.kron([0, 1, 0, 0], fock.basis_state(6, 2)), fock.basis_state(5, 4))
        assert np.array_equal(mode_distribution(joint, js, "cm"), fock.basis_state(6, 2))
        assert np.array_equal(mode_distribution(joint, js, "stretch"), fock.basis_state(5, 4))


class TestReducedOverlap:
    js = JointSpace.build(1, (D,))

    def test_product_state(self):
        s = jx_product_eigenstate(self.js.register, "+")[0]
        joint = np.kron(s, fock.coherent_state(D, 0.3))
        assert reduced_internal_overlap(joint, self.js, s) == pytest.approx(1, abs=1e-14)

    def test_mixed_branches(self):
        plus = jx_product_eigenstate(self.js.register, "+")[0]
        minus = jx_product_eigenstate(self.js.register, "-")[0]
        joint = (np.kron(plus, fock.basis_state(D, 0)) + np.kron(minus, fock.basis_state(D, 1))) / np.sqrt(2)
        assert reduced_internal_overlap(joint, self.js, plus) == pytest.approx(0.5, abs=1e-14)

    def test_orthogonal_target(self):
        joint = np.kron([1, 0], fock.vacuum(D))
        assert reduced_internal_overlap(joint, self.js, np.array([0, 1])) == 0

    def test_density_trace(self):
        joint = np.kron([0.6, 0.8j], fock.coherent_state(D, 0.2))
        rho = reduced_density_matrix(joint, self.js, "cm")
        assert np.trace(rho).real == pytest.approx(1, abs=1e-14)


class TestWigner:
    def test_vacuum_origin(self):
        assert wigner_value(fock.vacuum(D), 0j) == pytest.approx(0.63662, abs=1e-5)
        assert wigner_value(fock.vacuum(D), 0j) == pytest.approx(2 / np.pi, abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.2j, 0.8, 1.2 - 0.5j])
    def test_cats_at_origin(self, alpha):
        assert wigner_value(cat(alpha, 1), 0j) == pytest.approx(2 / np.pi, abs=1e-10)
        assert wigner_value(cat(alpha, -1), 0j) == pytest.approx(-2 / np.pi, abs=1e-10)

    def test_vacuum_integral(self):
        xs = np.linspace(-4, 4, 161)
        grid = wigner_grid(fock.vacuum(96), xs, xs)  # corners displace by |alpha|^2 = 32
        assert grid.integral() == pytest.approx(1, abs=1e-3)
        assert not grid.flagged.any()

    def test_coherent_gaussian(self):
        beta = 0.6 - 0.3j
        xs = np.linspace(-1.5, 1.5, 13)
        grid = wigner_grid(fock.coherent_state(D, beta), xs, xs - 0.2)
        x, p = np.meshgrid(xs, xs - 0.2)
        expected = 2 / np.pi * np.exp(-2 * np.abs(x + 1j * p - beta) ** 2)
        assert np.max(np.abs(grid.values - expected)) < 1e-10

    @given(unit, unit, unit)
    @settings(max_examples=20, deadline=None)
    def test_matches_displaced_parity(self, ar, ai, x):
        psi = cat(complex(ar, ai), 1, d=40)
        alpha = complex(x, ai / 2)
        displaced = fock.displacement_op(40, 1, -alpha) @ psi
        assert wigner_value(psi, alpha) == pytest.approx(2 / np.pi * parity_expectation(displaced), abs=1e-9)

    def test_density_matrix_input(self):
        xs = np.linspace(-1, 1, 5)
        rho = np.diag([0.5, 0.5] + [0] * 14).astype(complex)
        mixed = wigner_grid(rho, xs, xs).values
        pure = (wigner_grid(fock.vacuum(16), xs, xs).values + wigner_grid(fock.basis_state(16, 1), xs, xs).values) / 2
        assert np.allclose(mixed, pure, atol=1e-12)

    def test_truncated_corners_flagged(self):
        xs = np.linspace(-4, 4, 9)
        grid = wigner_grid(fock.vacuum(D), xs, xs)
        assert grid.flagged[0, 0] and grid.flagged[-1, -1]
        assert not grid.flagged[4, 4]

    def test_flags_and_bounds(self):
        xs = np.linspace(-6, 6, 7)
        grid = wigner_grid(fock.coherent_state(16, 0.5), xs, xs)
        assert grid.flagged[3, 3] == False  # noqa: E712
        assert grid.flagged[0, 0]
        assert np.all(np.abs(grid.values) <= WIGNER_BOUND)
