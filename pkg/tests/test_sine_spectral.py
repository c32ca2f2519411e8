import os
import subprocess
import sys
import time

import numpy as np
import pytest

from logse_lab.grid import GridFunction, GridSpec, discrete_laplacian, norm
from logse_lab.sine_spectral import (
    FFT_THRESHOLD,
    SineBasis,
    SolverError,
    dense_laplacian,
    dst_forward,
    dst_inverse,
    eigenvalues,
    shifted_residual,
    sine_matrix,
    solve_interior,
    solve_shifted_laplacian,
)

from conftest import random_gridfunction


class TestEigenvalues:
    def test_two_cells(self):
        np.testing.assert_allclose(eigenvalues(2, 0.5), [-2 / 0.25], rtol=1e-15)

    def test_three_cells_matches_dense(self):
        h = 0.7
        A = np.array([[-2.0, 1.0], [1.0, -2.0]]) / h**2
        np.testing.assert_allclose(np.sort(eigenvalues(3, h)), np.sort(np.linalg.eigvalsh(A)), rtol=1e-14)
        np.testing.assert_allclose(eigenvalues(3, h), [-1 / h**2, -3 / h**2], rtol=1e-14)

    def test_eigenpairs(self):
        J, h = 9, 0.37
        A = dense_laplacian(GridSpec(((0, J * h),), (J,)))
        basis = SineBasis(J, h)
        for k in range(1, J):
            v = basis.vector(k)
            assert np.linalg.norm(A @ v - basis.eigenvalues[k - 1] * v) <= 1e-12 * 4 / h**2

    def test_negative_and_decreasing(self):
        lam = eigenvalues(40, 0.1)
        assert np.all(lam < 0) and np.all(np.diff(lam) < 0)

    def test_unsquared_sine_is_not_an_eigenvalue(self):
        # -4 sin(k pi h / 2) / h^2 fails the dense eigencheck on a generic grid
        J, h = 9, 0.37
        A = dense_laplacian(GridSpec(((0, J * h),), (J,)))
        true = np.sort(np.linalg.eigvalsh(A))
        wrong = np.sort(-4 * np.sin(np.arange(1, J) * np.pi * h / 2) / h**2)
        assert np.max(np.abs(wrong - true)) > 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            eigenvalues(1, 0.1)
        with pytest.raises(ValueError):
            eigenvalues(4, 0.0)
        with pytest.raises(ValueError):
            SineBasis(4, 1.0).vector(4)


class TestTransform:
    def test_eigenvector_to_delta(self):
        J = 16
        for m in (1, 7, 15):
            c = dst_forward(SineBasis(J, 1.0).vector(m))
            expect = np.zeros(J - 1)
            expect[m - 1] = J / 2
            np.testing.assert_allclose(c, expect, atol=1e-12)

    def test_delta_to_eigenvector(self):
        J = 12
        c = np.zeros(J - 1)
        c[4] = 1.0
        np.testing.assert_allclose(dst_inverse(c), (2 / J) * SineBasis(J, 1.0).vector(5), atol=1e-15)

    def test_zero(self):
        assert np.all(dst_forward(np.zeros(15)) == 0)

    @pytest.mark.parametrize("method", ["fft", "direct", "auto"])
    def test_roundtrip_and_oracle(self, rng, method):
        J = 16
        x = rng.standard_normal(J - 1) + 1j * rng.standard_normal(J - 1)
        assert np.max(np.abs(dst_inverse(dst_forward(x, method=method), method=method) - x)) <= 1e-13
        direct = sine_matrix(J) @ x
        assert np.max(np.abs(dst_forward(x, method=method) - direct)) <= 1e-13 * J

    def test_large_roundtrip_fft(self, rng):
        x = rng.standard_normal((3, 1023)) + 1j * rng.standard_normal((3, 1023))
        assert np.max(np.abs(dst_inverse(dst_forward(x)) - x)) <= 1e-13

    def test_linearity(self, rng):
        c1, c2 = rng.standard_normal((2, 40))
        a, b = 2.5 - 1j, -0.3j
        lhs = dst_inverse(a * c1 + b * c2)
        rhs = a * dst_inverse(c1) + b * dst_inverse(c2)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13

    def test_parseval_constant(self, rng):
        J = 33
        x = rng.standard_normal(J - 1)
        assert np.sum(dst_forward(x) ** 2) == pytest.approx(J / 2 * np.sum(x**2), rel=1e-13)

    def test_real_in_real_out(self, rng):
        assert not np.iscomplexobj(dst_forward(rng.standard_normal(100)))

    def test_along_axis(self, rng):
        x = rng.standard_normal((5, 7, 9))
        out = dst_forward(x, axis=1)
        np.testing.assert_allclose(out, np.einsum("kj,ajb->akb", sine_matrix(8), x), atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dst_forward(np.ones(5), J=7)
        with pytest.raises(ValueError):
            dst_inverse(np.ones(5), J=5)
        with pytest.raises(ValueError):
            dst_forward(np.ones(4), method="chebyshev")


class TestSolve:
    def test_zero_rhs(self):
        spec = GridSpec.uniform(2, 0, 1, 8)
        w = solve_shifted_laplacian(10j, GridFunction.zeros(spec))
        assert np.all(w.values == 0)

    def test_scalar_case(self):
        spec = GridSpec.uniform(1, 0, 1, 2)
        b = GridFunction.from_interior(spec, np.array([1 + 2j]))
        sigma = 3j
        w = solve_shifted_laplacian(sigma, b)
        assert w.values[1] == pytest.approx((1 + 2j) / (sigma - 2 / 0.25), rel=1e-15)

    def test_matches_dense_2d(self, rng):
        spec = GridSpec(((-1.0, 1.0), (0.0, 3.0)), (9, 9))
        b = random_gridfunction(rng, spec)
        sigma = 100j
        w = solve_shifted_laplacian(sigma, b)
        A = dense_laplacian(spec) + sigma * np.eye(spec.n_interior)
        ref = np.linalg.solve(A, b.interior.ravel())
        assert np.linalg.norm(w.interior.ravel() - ref) <= 1e-10 * np.linalg.norm(ref)

    @pytest.mark.parametrize("dim", [1, 2])
    def test_residual_contract(self, rng, dim):
        for _ in range(100):
            J = int(rng.integers(2, 70 if dim == 1 else 24))
            spec = GridSpec.uniform(dim, -3, 2, J)
            b = random_gridfunction(rng, spec, scale=10 ** rng.uniform(-3, 3))
            sigma = complex(rng.uniform(-500, 500), rng.uniform(1, 1e4))
            w = solve_shifted_laplacian(sigma, b)
            assert shifted_residual(sigma, w, b) <= 1e-10

    def test_singular_reports_mode(self):
        spec = GridSpec.uniform(1, 0, 1, 4)
        sigma = -eigenvalues(4, 0.25)[1]
        with pytest.raises(SolverError, match=r"\(2,\)"):
            solve_interior(sigma, np.ones(3), spec)

    def test_fft_and_direct_agree(self, rng):
        spec = GridSpec(((0, 1), (0, 1)), (70, 20))
        b = rng.standard_normal(spec.interior_shape) + 0j
        a = solve_interior(5j, b, spec, method="fft")
        c = solve_interior(5j, b, spec, method="direct")
        assert np.max(np.abs(a - c)) <= 1e-12 * np.max(np.abs(c))

    def test_three_dimensions(self, rng):
        spec = GridSpec(((0, 1), (0, 2), (-1, 1)), (5, 6, 7))
        b = random_gridfunction(rng, spec)
        w = solve_shifted_laplacian(2j, b)
        r = (2j * w + discrete_laplacian(w)) - b
        assert norm(r) <= 1e-10 * max(1.0, norm(b))


def _time_solve(J, reps):
    spec = GridSpec.uniform(1, 0, 1, J)
    b = np.ones(spec.interior_shape, complex)[None].repeat(64, 0)
    solve_interior(1j, b[0], spec)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(reps):
            for row in b:
                solve_interior(1j, row, spec, method="fft")
        best = min(best, time.perf_counter() - t0)
    return best


def test_fft_path_scales_nlogn():
    J = 2**15
    assert J >= FFT_THRESHOLD
    t1 = _time_solve(J, 2)
    t2 = _time_solve(2 * J, 2)
    assert t2 / t1 < 2.5


def test_thread_count_does_not_change_bits(tmp_path):
    script = (
        "import numpy as np, sys\n"
        "from logse_lab.grid import GridSpec\n"
        "from logse_lab.sine_spectral import solve_interior\n"
        "rng = np.random.default_rng(3)\n"
        "spec = GridSpec.uniform(2, 0, 1, 128)\n"
        "b = rng.standard_normal(spec.interior_shape) + 1j * rng.standard_normal(spec.interior_shape)\n"
        "np.save(sys.argv[1], solve_interior(7j, b, spec))\n"
    )
    outs = []
    for threads in ("1", "4"):
        path = tmp_path / f"w{threads}.npy"
        env = dict(os.environ, LOGSE_THREADS=threads)
        subprocess.run([sys.executable, "-c", script, str(path)], check=True, env=env)
        outs.append(np.load(path))
    assert np.array_equal(outs[0], outs[1])
