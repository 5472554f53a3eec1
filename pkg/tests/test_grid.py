import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dendrosim.grid import (
    GridSpec,
    divergence,
    grad_inner,
    grad_norm_sq,
    gradient,
    inner,
    integrate,
    laplacian,
    norm_sq,
)

from conftest import random_field


class TestGridSpec:
    def test_spacings(self):
        g = GridSpec(8, 4, 0.0, 2.0, -1.0, 1.0)
        assert g.hx == pytest.approx(0.25)
        assert g.hy == pytest.approx(0.5)
        assert g.xs()[0] == pytest.approx(.125)
        assert g.area == pytest.approx(4.0)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            GridSpec(3, 8)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            GridSpec(8, 8, x0=1.0, x1=-1.0)

    def test_conformability(self, grid8):
        with pytest.raises(ValueError):
            inner(grid8, np.zeros((4, 4)), np.zeros((4, 4)))


class TestGradient:
    def test_constant_field(self, grid8):
        gx, gy = gradient(grid8, grid8.full(3.7))
        assert np.all(gx == 0.0)
        assert np.all(gy == 0.0)

    def test_linear_field_stencil(self):
        # hand-evaluated 3-point stencil with even ghosts on 6x6: slope 1 at
        # interior cells, half-slope at the wall cells
        g = GridSpec(6, 6)
        x, _ = g.mesh()
        gx, gy = gradient(g, x)
        assert gx[1:-1, :] == pytest.approx(1.0, abs=1e-13)
        assert gx[0, :] == pytest.approx(0.5, abs=1e-13)
        assert gx[-1, :] == pytest.approx(0.5, abs=1e-13)
        assert gy == pytest.approx(0.0, abs=1e-13)

    def test_second_order_interior(self):
        # halving h quarters the interior error on a smooth Neumann-compatible field
        errs = []
        for n in (128, 256):
            g = GridSpec(n, n)
            x, y = g.mesh()
            f = np.cos(np.pi * x) * np.cos(np.pi * y)
            gx, _ = gradient(g, f)
            exact = -np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)
            errs.append(np.max(np.abs((gx - exact)[1:-1, 1:-1])))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


class TestDivergence:
    def test_constant_vector_interior(self, grid8):
        # interior cells see zero; wall cells feel the clamped normal flux
        vx, vy = grid8.full(1.5), grid8.full(-2.5)
        d = divergence(grid8, vx, vy)
        assert d[1:-1, 1:-1] == pytest.approx(0.0, abs=1e-14)

    def test_adjoint_of_gradient(self, grid8):
        # summation by parts: <div v, f> = -<v, grad f>
        f = random_field(grid8, 1)
        vx = random_field(grid8, 2)
        vy = random_field(grid8, 3)
        gx, gy = gradient(grid8, f)
        lhs = inner(grid8, divergence(grid8, vx, vy), f)
        rhs = -(inner(grid8, vx, gx) + inner(grid8, vy, gy))
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(rhs)))


class TestLaplacian:
    def test_constant_field(self, grid8):
        assert laplacian(grid8, grid8.full(2.0)) == pytest.approx(0.0, abs=0.0)

    @pytest.mark.parametrize("k,l", [(1, 0), (0, 2), (3, 5), (7, 7)])
    def test_cosine_eigenmode(self, k, l):
        g = GridSpec(8, 8)
        x, y = g.mesh()
        f = np.cos(k * np.pi * (x - g.x0) / (g.x1 - g.x0)) * \
            np.cos(l * np.pi * (y - g.y0) / (g.y1 - g.y0))
        lam = -(2.0 / g.hx**2) * (1 - np.cos(k * np.pi / g.nx)) \
              - (2.0 / g.hy**2) * (1 - np.cos(l * np.pi / g.ny))
        assert laplacian(g, f) == pytest.approx(lam * f, abs=1e-11 * max(1.0, abs(lam)))

    def test_dense_row_sums_vanish(self):
        # Neumann operator annihilates constants: every row of the assembled
        # matrix sums to zero
        g = GridSpec(4, 4)
        rows = []
        for idx in range(16):
            e = np.zeros(16)
            e[idx] = 1.0
            rows.append(laplacian(g, e.reshape(4, 4)).ravel())
        dense = np.array(rows).T
        assert np.abs(dense.sum(axis=1)).max() < 1e-12 / g.hx**2
        assert np.abs(dense - dense.T).max() == 0.0


class TestOperatorConsistency:
    def test_div_grad_second_order_consistent_with_laplacian(self):
        # the collocated composition is the wide-stencil operator: it differs
        # from the compact laplacian pointwise but converges to it at O(h^2)
        # on smooth fields (the compact stencil backs all implicit solves)
        errs = []
        for n in (32, 64):
            g = GridSpec(n, n)
            x, y = g.mesh()
            f = np.cos(np.pi * x) * np.cos(2 * np.pi * y)
            wide = divergence(g, *gradient(g, f))
            compact = laplacian(g, f)
            errs.append(np.max(np.abs((wide - compact)[2:-2, 2:-2])))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


class TestInnerProducts:
    def test_unit_inner_is_area(self):
        g = GridSpec(64, 64)
        assert inner(g, g.full(1.0), g.full(1.0)) == pytest.approx(4.0, abs=1e-12)

    def test_cosine_squared_integral(self):
        g = GridSpec(128, 128)
        x, _ = g.mesh()
        f = np.cos(np.pi * x)
        assert inner(g, f, f) == pytest.approx(2.0, abs=1e-6)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_positive_definite(self, seed):
        g = GridSpec(8, 8)
        f = random_field(g, seed)
        assert norm_sq(g, f) >= 0.0
        assert norm_sq(g, g.zeros()) == 0.0

    def test_integrate_matches_inner_with_one(self, grid8):
        f = random_field(grid8, 11)
        assert integrate(grid8, f) == pytest.approx(inner(grid8, f, grid8.full(1.0)))


class TestDirichletForm:
    def test_pairs_with_laplacian(self, grid8):
        # <Lap f, g> == -grad_inner(f, g) to roundoff: the summation-by-parts
        # identity behind the discrete energy laws
        f = random_field(grid8, 4)
        g_ = random_field(grid8, 5)
        lhs = inner(grid8, laplacian(grid8, f), g_)
        rhs = -grad_inner(grid8, f, g_)
        assert lhs == pytest.approx(rhs, abs=1e-11 * max(1.0, abs(rhs)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_nonnegative(self, seed):
        g = GridSpec(6, 10)
        assert grad_norm_sq(g, random_field(g, seed)) >= 0.0

    def test_kills_constants(self, grid8):
        assert grad_norm_sq(grid8, grid8.full(5.0)) == 0.0


class TestLinearity:
    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(0, 2**31 - 1),
        st.floats(-10, 10, allow_nan=False),
        st.floats(-10, 10, allow_nan=False),
    )
    def test_operators_linear(self, seed, alpha, beta):
        g = GridSpec(8, 6)
        f1 = random_field(g, seed)
        f2 = random_field(g, seed + 1)
        combo = alpha * f1 + beta * f2
        scale = max(1.0, abs(alpha), abs(beta))
        for op in (laplacian,):
            lhs = op(g, combo)
            rhs = alpha * op(g, f1) + beta * op(g, f2)
            assert lhs == pytest.approx(rhs, abs=1e-9 * scale)
        gx, gy = gradient(g, combo)
        gx1, gy1 = gradient(g, f1)
        gx2, gy2 = gradient(g, f2)
        assert gx == pytest.approx(alpha * gx1 + beta * gx2, abs=1e-10 * scale)
        assert gy == pytest.approx(alpha * gy1 + beta * gy2, abs=1e-10 * scale)
