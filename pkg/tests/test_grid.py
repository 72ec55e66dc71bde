import numpy as np
import pytest

from fk_thermo import (GridFunction, HarmonicSpec, derivative,
                       function_from_csv, integrate, make_grid)

from conftest import random_harmonic


class TestMakeGrid:
    def test_small_grid_nodes(self):
        grid = make_grid(8)
        assert grid.h == 0.125
        assert np.array_equal(grid.nodes, np.arange(8) / 8)

    def test_large_grid(self):
        grid = make_grid(512)
        assert grid.h == 1 / 512
        assert grid.nodes.shape == (512,)
        assert grid.nodes[0] == 0.0
        assert np.all(np.diff(grid.nodes) > 0)

    @pytest.mark.parametrize("n", [3, 2, 0, -4, 7, 513])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            make_grid(n)

    def test_nodes_read_only(self):
        grid = make_grid(8)
        with pytest.raises(ValueError):
            grid.nodes[0] = 1.0


class TestGridFunction:
    def test_rejects_nan(self):
        grid = make_grid(8)
        with pytest.raises(ValueError):
            GridFunction(grid, np.array([np.nan] * 8))

    def test_rejects_wrong_length(self):
        grid = make_grid(8)
        with pytest.raises(ValueError):
            GridFunction(grid, np.zeros(7))

    def test_interp_hits_nodes_and_midpoints(self):
        grid = make_grid(8)
        f = GridFunction(grid, np.arange(8.0))
        assert f.interp(0.25) == 2.0
        # midpoint between node 7 (value 7) and the wrap back to node 0.
        assert f.interp(1.0 - grid.h / 2) == pytest.approx(3.5)
        assert f.interp(-0.125) == 7.0  # periodic wrap of x = 0.875


class TestSample:
    def test_constant(self):
        grid = make_grid(8)
        f = HarmonicSpec(constant=2.0).sample(grid)
        assert np.array_equal(f.values, np.full(8, 2.0))

    def test_first_harmonic(self):
        grid = make_grid(8)
        f = HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid)
        assert np.allclose(f.values, np.cos(2 * np.pi * grid.nodes), atol=1e-15)

    def test_sampling_is_linear_in_the_spec(self):
        grid = make_grid(64)
        a = HarmonicSpec(constant=0.5, harmonics=[(1, 1.0, -0.5), (3, 0.0, 2.0)])
        b = HarmonicSpec(constant=-1.0, harmonics=[(2, 0.25, 0.0)])
        merged = HarmonicSpec(
            constant=-0.5,
            harmonics=[(1, 1.0, -0.5), (3, 0.0, 2.0), (2, 0.25, 0.0)],
        )
        lhs = a.sample(grid).values + b.sample(grid).values
        assert np.allclose(lhs, merged.sample(grid).values, atol=1e-14)

    def test_alias_rejected(self):
        grid = make_grid(8)
        with pytest.raises(ValueError, match="alias"):
            HarmonicSpec(harmonics=[(4, 1.0, 0.0)]).sample(grid)

    def test_duplicate_wavenumber_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            HarmonicSpec(harmonics=[(1, 1.0, 0.0), (1, 0.0, 1.0)])


class TestDerivative:
    def test_constant_derivative_is_zero(self):
        grid = make_grid(32)
        f = HarmonicSpec(constant=3.0).sample(grid)
        assert np.max(np.abs(derivative(f, 1).values)) < 1e-14

    def test_first_derivative_closed_form(self):
        grid = make_grid(64)
        f = HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid)
        expected = -2 * np.pi * np.sin(2 * np.pi * grid.nodes)
        assert np.max(np.abs(derivative(f, 1).values - expected)) < 1e-12

    def test_second_derivative_closed_form(self):
        grid = make_grid(64)
        f = HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid)
        expected = -4 * np.pi**2 * np.cos(2 * np.pi * grid.nodes)
        assert np.max(np.abs(derivative(f, 2).values - expected)) < 1e-11

    def test_rejects_other_orders(self):
        grid = make_grid(8)
        f = HarmonicSpec(constant=1.0).sample(grid)
        with pytest.raises(ValueError):
            derivative(f, 3)

    def test_linearity(self):
        grid = make_grid(128)
        rng = np.random.default_rng(11)
        for _ in range(5):
            f = random_harmonic(grid, rng)
            g = random_harmonic(grid, rng)
            alpha, beta = rng.uniform(-2, 2, 2)
            lhs = derivative(f * alpha + g * beta, 1).values
            rhs = alpha * derivative(f, 1).values + beta * derivative(g, 1).values
            assert np.max(np.abs(lhs - rhs)) < 1e-10

class TestIntegrate:
    def test_unit_constant(self):
        grid = make_grid(16)
        assert integrate(HarmonicSpec(constant=1.0).sample(grid)) == pytest.approx(1.0, abs=1e-15)

    def test_cosine_integrates_to_zero(self):
        grid = make_grid(16)
        f = HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid)
        assert abs(integrate(f)) < 1e-15

    def test_cosine_squared(self):
        grid = make_grid(16)
        f = HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid)
        assert integrate(f * f) == pytest.approx(0.5, abs=1e-14)

    def test_integration_by_parts(self):
        grid = make_grid(256)
        rng = np.random.default_rng(5)
        for _ in range(5):
            f = random_harmonic(grid, rng)
            g = random_harmonic(grid, rng)
            lhs = integrate(derivative(f, 1) * g)
            rhs = -integrate(f * derivative(g, 1))
            assert abs(lhs - rhs) < 1e-10

    def test_derivative_integrates_to_zero(self):
        grid = make_grid(256)
        rng = np.random.default_rng(6)
        for _ in range(5):
            f = random_harmonic(grid, rng)
            assert abs(integrate(derivative(f, 1))) < 1e-12

    def test_refinement_consistency(self):
        rng = np.random.default_rng(7)
        spec = HarmonicSpec(
            constant=0.3,
            harmonics=[(k, rng.uniform(-1, 1), rng.uniform(-1, 1)) for k in (1, 2, 5)],
        )
        for n in (64, 128, 256):
            coarse, fine = make_grid(n), make_grid(2 * n)
            fc, ff = spec.sample(coarse), spec.sample(fine)
            assert abs(integrate(fc) - integrate(ff)) < 1e-10
            dc, df = derivative(fc, 1), derivative(ff, 1)
            assert np.max(np.abs(dc.values - df.values[::2])) < 1e-10


class TestCsv:
    def test_roundtrip(self, tmp_path):
        grid = make_grid(64)
        f = HarmonicSpec(harmonics=[(2, 0.7, -0.1)]).sample(grid)
        path = tmp_path / "f.csv"
        lines = ["x,value"] + [
            f"{x:.15g},{v:.15g}" for x, v in zip(grid.nodes, f.values)
        ]
        path.write_text("\n".join(lines) + "\n")
        loaded = function_from_csv(path, grid)
        assert np.max(np.abs(loaded.values - f.values)) < 1e-14

    def test_node_mismatch_rejected(self, tmp_path):
        grid = make_grid(8)
        path = tmp_path / "f.csv"
        rows = "\n".join(f"{(i + 0.5) / 8},{1.0}" for i in range(8))
        path.write_text("x,value\n" + rows + "\n")
        with pytest.raises(ValueError, match="nodes"):
            function_from_csv(path, grid)

    def test_wrong_length_rejected(self, tmp_path):
        grid = make_grid(8)
        path = tmp_path / "f.csv"
        path.write_text("x,value\n0.0,1.0\n")
        with pytest.raises(ValueError, match="rows"):
            function_from_csv(path, grid)
