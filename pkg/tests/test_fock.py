import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ioncats import fock
from ioncats.errors import DimensionError, ExpmConvergenceError, TruncationError, TruncationWarning

finite = st.floats(-1, 1, allow_nan=False)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def taylor_expm(a, terms=60):
    out = np.eye(len(a), dtype=complex)
    term = np.eye(len(a), dtype=complex)
    for j in range(1, terms + 1):
        term = term @ a / j
        out += term
    return out


def analytic_squeezed(d, xi):
    # exp(xi a_dag^2 - xi* a^2)|0> = S(zeta)|0> with zeta = -2 xi, r = 2|xi|
    r = 2 * abs(xi)
    phase = xi / abs(xi) if xi else 1
    amps = np.zeros(d, dtype=complex)
    for n in range(d // 2):
        amps[2 * n] = (phase * math.tanh(r)) ** n * math.sqrt(math.factorial(2 * n)) / (2**n * math.factorial(n))
    return amps / math.sqrt(math.cosh(r))


class TestLadder:
    def test_annihilation_entries(self):
        a = fock.annihilation_op(3)
        expected = np.zeros((3, 3))
        expected[0, 1] = 1
        expected[1, 2] = math.sqrt(2)
        assert np.array_equal(a, expected)

    def test_vacuum_annihilated(self):
        assert np.all(fock.annihilation_op(8) @ fock.vacuum(8) == 0)

    def test_number_diagonal(self):
        d = 12
        a = fock.annihilation_op(d)
        n_op = fock.creation_op(d) @ a
        for n in range(d):
            e = fock.basis_state(d, n)
            assert np.vdot(e, n_op @ e).real == pytest.approx(n, abs=1e-12)
        assert np.allclose(n_op, fock.number_op(d))

    def test_commutator_identity_below_top(self):
        d = 20
        a = fock.annihilation_op(d)
        c = fock.commutator(a, fock.creation_op(d))
        assert np.allclose(c[:-1, :-1], np.eye(d - 1), atol=1e-12)
        assert c[-1, -1] == pytest.approx(-(d - 1))  # truncation artefact

    def test_fockspace_accepted(self):
        assert np.array_equal(fock.annihilation_op(fock.FockSpace(5)), fock.annihilation_op(5))

    @pytest.mark.parametrize("bad", [0, -3, 2.5])
    def test_bad_cutoff(self, bad):
        with pytest.raises(ValueError):
            fock.FockSpace(bad)

    def test_basis_state_range(self):
        with pytest.raises(ValueError):
            fock.basis_state(4, 4)


class TestTensor:
    def test_identities(self):
        assert np.array_equal(fock.tensor_product(np.eye(2), np.eye(3)), np.eye(6))

    def test_dimensions(self):
        assert fock.tensor_product(np.ones((2, 2)), np.ones((3, 3))).shape == (6, 6)

    def test_mixed_product_elementwise(self):
        rng = np.random.default_rng(3)
        a, b = random_complex(rng, 2, 2), random_complex(rng, 3, 3)
        u, v = random_complex(rng, 2), random_complex(rng, 3)
        lhs = fock.tensor_product(a, b) @ fock.tensor_product(u, v)
        au, bv = a @ u, b @ v
        rhs = np.array([au[i] * bv[j] for i in range(2) for j in range(3)])
        assert np.allclose(lhs, rhs, atol=1e-12)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = random_complex(rng, 2, 2), random_complex(rng, 3, 3), random_complex(rng, 2, 2)
        left = fock.tensor_product(fock.tensor_product(a, b), c)
        right = fock.tensor_product(a, fock.tensor_product(b, c))
        assert np.allclose(left, right, atol=1e-12)
        assert np.allclose(fock.tensor_product(a, b, c), left, atol=1e-12)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_mixed_product(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c, d = (random_complex(rng, n, n) for n in (2, 3, 2, 3))
        lhs = fock.tensor_product(a, b) @ fock.tensor_product(c, d)
        assert np.allclose(lhs, fock.tensor_product(a @ c, b @ d), atol=1e-10)

    def test_rejects_mixed_kinds(self):
        with pytest.raises(DimensionError):
            fock.tensor_product(np.eye(2), np.ones(3))


class TestMatrixExponential:
    def test_zero(self):
        assert np.array_equal(fock.matrix_exponential(np.zeros((4, 4))), np.eye(4))

    def test_diagonal(self):
        out = fock.matrix_exponential(np.diag([1j * np.pi, 0]))
        assert np.allclose(out, np.diag([-1, 1]), atol=1e-12)

    def test_anti_hermitian_vs_taylor(self):
        rng = np.random.default_rng(11)
        h = random_complex(rng, 4, 4)
        a = (h - h.conj().T) / 2 / np.linalg.norm(h, 1)  # small norm so 60 terms are exact
        assert np.max(np.abs(fock.matrix_exponential(a) - taylor_expm(a))) < 1e-12

    def test_vs_scipy_large_norm(self):
        rng = np.random.default_rng(5)
        h = random_complex(rng, 30, 30)
        a = 0.3j * (h + h.conj().T)
        ours = fock.matrix_exponential(a)
        assert np.max(np.abs(ours - scipy.linalg.expm(a))) < 1e-10

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=30, deadline=None)
    def test_adjoint_commutes(self, seed):
        rng = np.random.default_rng(seed)
        a = random_complex(rng, 5, 5)
        lhs = fock.matrix_exponential(a).conj().T
        rhs = fock.matrix_exponential(a.conj().T)
        assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-11)

    def test_unitary_output(self):
        h = fock.annihilation_op(30) + fock.creation_op(30)
        u = fock.matrix_exponential(-2.5j * h)
        assert np.allclose(u.conj().T @ u, np.eye(30), atol=1e-11)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            fock.matrix_exponential(np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            fock.matrix_exponential(np.array([[np.nan]]))

    def test_rounding_floor(self):
        with pytest.raises(ExpmConvergenceError):
            fock.matrix_exponential(np.array([[1e6j]]), tol=1e-12)


class TestDisplacement:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_zero_chi(self, k):
        assert np.allclose(fock.displacement_op(16, k, 0), np.eye(16), atol=1e-15)

    def test_coherent_column(self):
        col = fock.displacement_op(32, 1, 0.5)[:, 0]
        n = np.arange(32)
        expected = np.exp(-0.125) * 0.5**n / np.sqrt([float(math.factorial(int(i))) for i in n])
        assert np.allclose(col, expected, atol=1e-12)

    def test_second_order_column_is_squeezed_vacuum(self):
        col = fock.displacement_op(64, 2, 0.1)[:, 0]
        assert np.allclose(col, fock.squeezed_vacuum_state(64, 0.1), atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2])
    @pytest.mark.parametrize("chi", [0.5, 0.3j, -0.2 + 0.4j])
    def test_inverse_on_low_block(self, k, chi):
        d = 64
        prod = fock.displacement_op(d, k, chi) @ fock.displacement_op(d, k, -chi)
        h = d // 2 + 1
        assert np.max(np.abs(prod[:h, :h] - np.eye(h))) < 1e-9

    @given(finite, finite)
    @settings(max_examples=30, deadline=None)
    def test_agrees_with_coherent_state(self, re, im):
        alpha = 0.8 * complex(re, im)
        col = fock.displacement_op(40, 1, alpha)[:, 0]
        assert np.max(np.abs(col - fock.coherent_state(40, alpha))) < 1e-10

    def test_bad_order(self):
        with pytest.raises(ValueError):
            fock.displacement_generator(8, 0, 0.1)


class TestCoherentState:
    def test_zero_is_vacuum(self):
        assert np.array_equal(fock.coherent_state(10, 0), fock.vacuum(10))

    def test_vacuum_probability(self):
        assert abs(fock.coherent_state(32, 1.0)[0]) ** 2 == pytest.approx(0.3678794, abs=1e-7)
        assert abs(fock.coherent_state(32, 1.0)[0]) ** 2 == pytest.approx(math.exp(-1), abs=1e-12)

    @given(finite, finite)
    @settings(max_examples=40, deadline=None)
    def test_mean_field(self, re, im):
        alpha = complex(re, im)
        if abs(alpha) > 1:
            alpha /= abs(alpha)
        psi = fock.coherent_state(32, alpha)
        assert abs(np.vdot(psi, fock.annihilation_op(32) @ psi) - alpha) < 1e-10
        assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)

    def test_truncation_warning(self):
        with pytest.warns(TruncationWarning):
            fock.coherent_state(8, 3.0)


class TestSqueezedVacuum:
    def test_zero_is_vacuum(self):
        assert np.allclose(fock.squeezed_vacuum_state(16, 0), fock.vacuum(16), atol=1e-15)

    @pytest.mark.parametrize("xi", [0.1, 0.25j, -0.2 + 0.1j, 0.4])
    def test_odd_amplitudes_exactly_zero(self, xi):
        psi = fock.squeezed_vacuum_state(64, xi)
        assert np.all(psi[1::2] == 0)

    def test_vs_expm_oracle(self):
        gen = fock.displacement_generator(64, 2, 0.1)
        oracle = scipy.linalg.expm(gen)[:, 0]
        assert np.max(np.abs(fock.squeezed_vacuum_state(64, 0.1) - oracle)) < 1e-12

    @pytest.mark.parametrize("xi", [0.1, 0.2j, -0.15 + 0.1j])
    def test_vs_bogoliubov_formula(self, xi):
        assert np.max(np.abs(fock.squeezed_vacuum_state(64, xi) - analytic_squeezed(64, xi))) < 1e-12

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            fock.squeezed_vacuum_state(8, 1.0)
