"""Helmholtz solver tests: residual contracts, eigenpairs, backend agreement,
manufactured-solution convergence order."""

import numpy as np
import pytest

from chemotax2d import Field, GridSpec, HelmholtzProblem, SolverFailure, integrate, laplacian, solve


def residual_norm(problem: HelmholtzProblem, phi: Field, rhs: Field) -> float:
    op = problem.shift * phi.values - problem.diffusion_scale * laplacian(phi).values
    return float(np.linalg.norm(op - rhs.values))


@pytest.fixture(params=["cg", "dct"])
def backend(request):
    return request.param


class TestSolveBasics:
    def test_constant_rhs(self, backend):
        g = GridSpec(16, 12, 1.0, 2.0)
        prob = HelmholtzProblem(1.0, 1.0, g, backend=backend)
        out = solve(prob, Field.constant(g, 4.5))
        assert np.allclose(out.values, 4.5, rtol=1e-12, atol=1e-12)

    def test_zero_rhs(self, backend):
        g = GridSpec(8, 8, 1.0, 1.0)
        prob = HelmholtzProblem(2.0, 0.5, g, backend=backend)
        out = solve(prob, Field.constant(g, 0.0))
        assert np.allclose(out.values, 0.0, atol=1e-15)

    def test_eigen_rhs(self, backend):
        g = GridSpec(48, 48, 1.0, 1.0)
        k = 3
        x, _ = g.cell_centers()
        mode = np.cos(k * np.pi * x / g.lx)
        lam = (2.0 / g.hx**2) * (1.0 - np.cos(k * np.pi * g.hx / g.lx))
        rhs = Field.from_2d(g, (1.0 + lam) * mode)
        prob = HelmholtzProblem(1.0, 1.0, g, backend=backend)
        out = solve(prob, rhs)
        assert np.max(np.abs(out.as_2d() - mode)) <= 1e-8

    def test_random_rhs_residual(self, backend):
        rng = np.random.default_rng(31)
        g = GridSpec(32, 24, 1.0, 1.5)
        prob = HelmholtzProblem(1.0, 1.0, g, tol=1e-10, max_iter=5000, backend=backend)
        for _ in range(5):
            rhs = Field(rng.standard_normal(g.ncells), g)
            out = solve(prob, rhs)
            assert residual_norm(prob, out, rhs) <= prob.tol * np.linalg.norm(rhs.values)

    def test_repeat_solve_bit_identical(self, backend):
        rng = np.random.default_rng(37)
        g = GridSpec(24, 24, 1.0, 1.0)
        rhs = Field(rng.standard_normal(g.ncells), g)
        prob = HelmholtzProblem(1.0, 0.3, g, backend=backend)
        a = solve(prob, rhs)
        b = solve(prob, rhs)
        assert np.array_equal(a.values, b.values)

    def test_mean_value_identity(self, backend):
        rng = np.random.default_rng(41)
        g = GridSpec(20, 20, 1.0, 1.0)
        shift = 2.5
        prob = HelmholtzProblem(shift, 1.0, g, backend=backend)
        rhs = Field(rng.uniform(0, 3, g.ncells), g)
        out = solve(prob, rhs)
        assert shift * integrate(out) == pytest.approx(
            integrate(rhs), rel=10 * prob.tol
        )

    def test_linearity(self, backend):
        rng = np.random.default_rng(43)
        g = GridSpec(16, 16, 1.0, 1.0)
        prob = HelmholtzProblem(1.0, 1.0, g, backend=backend)
        r1 = Field(rng.standard_normal(g.ncells), g)
        r2 = Field(rng.standard_normal(g.ncells), g)
        a, b = 1.75, -0.4
        lhs = solve(prob, Field(a * r1.values + b * r2.values, g)).values
        rhs = a * solve(prob, r1).values + b * solve(prob, r2).values
        scale = max(np.abs(rhs).max(), 1e-30)
        assert np.max(np.abs(lhs - rhs)) <= 10 * prob.tol * scale

    def test_grid_mismatch_rejected(self):
        prob = HelmholtzProblem(1.0, 1.0, GridSpec(8, 8, 1.0, 1.0))
        with pytest.raises(ValueError, match="grid"):
            solve(prob, Field.constant(GridSpec(9, 8, 1.0, 1.0), 1.0))

    def test_nonpositive_shift_rejected(self):
        with pytest.raises(ValueError, match="shift"):
            HelmholtzProblem(0.0, 1.0, GridSpec(8, 8, 1.0, 1.0))


class TestConjugateGradient:
    def test_nonconvergence_reported(self):
        rng = np.random.default_rng(47)
        g = GridSpec(32, 32, 1.0, 1.0)
        prob = HelmholtzProblem(1.0, 1.0, g, tol=1e-12, max_iter=3, backend="cg")
        rhs = Field(rng.standard_normal(g.ncells), g)
        with pytest.raises(SolverFailure) as err:
            solve(prob, rhs)
        assert err.value.residual > 0.0
        assert err.value.iterations == 3

    def test_default_iteration_cap(self):
        g = GridSpec(64, 32, 1.0, 1.0)
        prob = HelmholtzProblem(1.0, 1.0, g)
        assert prob.iter_cap == 10 * (64 + 32)

    def test_maximum_principle_logged_not_enforced(self, caplog):
        rng = np.random.default_rng(53)
        g = GridSpec(16, 16, 1.0, 1.0)
        prob = HelmholtzProblem(1.0, 1.0, g, backend="cg", tol=1e-10, max_iter=4000)
        rhs = Field(rng.uniform(0.5, 1.5, g.ncells), g)
        with caplog.at_level("WARNING"):
            out = solve(prob, rhs)
        assert not any("maximum-principle" in r.message for r in caplog.records)
        assert out.values.min() >= -10 * prob.tol * rhs.values.max()


class TestBackendAgreement:
    def test_cg_vs_dct_random(self):
        rng = np.random.default_rng(59)
        for g in (GridSpec(32, 32, 1.0, 1.0), GridSpec(24, 40, 2.0, 1.0)):
            for shift, scale in ((1.0, 1.0), (1.0, 1e-3), (2.0, 0.25)):
                rhs = Field(rng.standard_normal(g.ncells), g)
                a = solve(
                    HelmholtzProblem(shift, scale, g, tol=1e-12, max_iter=20000, backend="cg"),
                    rhs,
                )
                b = solve(HelmholtzProblem(shift, scale, g, backend="dct"), rhs)
                scale_ref = np.abs(b.values).max()
                assert np.max(np.abs(a.values - b.values)) <= 1e-9 * scale_ref


class TestManufacturedConvergence:
    def test_second_order(self):
        lam = np.pi**2 + np.pi**2  # continuum eigenvalue of the target mode
        errs = {}
        for n in (32, 64, 128):
            g = GridSpec(n, n, 1.0, 1.0)
            x, y = g.cell_centers()
            exact = np.cos(np.pi * x / g.lx) * np.cos(np.pi * y / g.ly)
            rhs = Field.from_2d(g, (1.0 + lam) * exact)
            prob = HelmholtzProblem(1.0, 1.0, g, tol=1e-11, max_iter=20000, backend="cg")
            out = solve(prob, rhs)
            errs[n] = np.max(np.abs(out.as_2d() - exact))
        for coarse, fine in ((32, 64), (64, 128)):
            order = np.log2(errs[coarse] / errs[fine])
            assert 1.8 <= order <= 2.2, f"observed order {order:.3f}"
