import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from qcontrol.errors import GeometryOverflow, GridMismatch
from qcontrol.geometry import (
    CutoffPhi,
    build_cutoff,
    build_multiplier,
    control_insert,
    control_region_bump,
    smooth_step,
)
from qcontrol.spectral import Field, hs_inner, make_grid, sobolev_norm


class TestSmoothStep:
    def test_endpoints_and_midpoint(self):
        assert np.allclose(smooth_step([-1.0, 0.0, 0.5, 1.0, 2.0]), [0, 0, 0.5, 1, 1])

    @given(st.floats(0.001, 0.999))
    def test_symmetry(self, s):
        assert np.isclose(smooth_step(s) + smooth_step(1 - s), 1.0)

    def test_monotone(self):
        v = smooth_step(np.linspace(-0.5, 1.5, 401))
        assert np.all(np.diff(v) >= 0)


class TestCutoff:
    def test_plateaus(self):
        g = make_grid(2, 64, 8.0)
        phi = build_cutoff(g, 2.0)
        r = g.radius
        assert np.all(phi.values[r <= 2.0] == 0)
        assert np.all(phi.values[r >= 3.0] == 1)
        assert np.all((phi.values >= 0) & (phi.values <= 1))

    def test_half_value_mid_transition(self):
        g = make_grid(1, 64, 8.0)
        phi = build_cutoff(g, 2.0)
        x = g.coordinates
        assert np.isclose(phi.values[np.argmin(np.abs(x - 2.5))], 0.5)

    @pytest.mark.parametrize("radius", [0.5, 5.0])
    def test_rejects_bad_radius(self, radius):
        with pytest.raises(GeometryOverflow):
            build_cutoff(make_grid(1, 32, 8.0), radius)

    def test_dilation(self):
        g = make_grid(1, 128, 8.0)
        phi = build_cutoff(g, 1.5)
        big = phi.dilated(2.0)
        assert big.radius == 3.0 and big.width == 2.0
        x = g.coordinates
        assert np.all(big.values[np.abs(x) <= 3.0] == 0)
        assert np.all(big.values[np.abs(x) >= 5.0] == 1)

    def test_dilation_overflow(self):
        phi = build_cutoff(make_grid(1, 32, 8.0), 3.5)
        with pytest.raises(GeometryOverflow):
            phi.dilated(2.0)

    def test_full_cutoff(self):
        g = make_grid(1, 16, 8.0)
        phi = CutoffPhi.full(g)
        assert np.all(phi.values == 1) and phi.dilated() is phi


class TestMultiplier:
    def test_equals_position_near_origin(self):
        g = make_grid(2, 64, 8.0)
        q = build_multiplier(g, 2.0)
        inside = g.radius <= 4.0
        for j, x in enumerate(g.mesh()):
            assert np.allclose(q.components[j].values[inside], x[inside])

    def test_vanishes_outside(self):
        g = make_grid(1, 64, 8.0)
        q = build_multiplier(g, 2.0)
        assert np.all(q.components[0].values[np.abs(g.coordinates) >= 5.0] == 0)

    @pytest.mark.parametrize("d, n, tol", [(1, 256, 1e-4), (2, 128, 1e-3), (3, 32, 0.2)])
    def test_divergence_equals_dimension_at_origin(self, d, n, tol):
        g = make_grid(d, n, 8.0)
        div = build_multiplier(g, 2.0).divergence()
        origin = (g.n // 2,) * d
        assert abs(div.values[origin] - d) < tol

    def test_divergence_converges_under_refinement(self):
        errs = []
        for n in (64, 128, 256):
            g = make_grid(1, n, 8.0)
            errs.append(abs(build_multiplier(g, 2.0).divergence().values[n // 2] - 1))
        assert errs[0] > 10 * errs[1] > 100 * errs[2]

    def test_overflow(self):
        with pytest.raises(GeometryOverflow):
            build_multiplier(make_grid(1, 32, 5.0), 2.0)


class TestControlInsert:
    def test_dead_zone(self, rng):
        # A f only sees f where phi is nonzero
        g = make_grid(1, 64, 8.0)
        phi = build_cutoff(g, 2.0)
        f = random_field(g, rng)
        inner = Field(g, np.where(g.radius <= 2.0, f.values, 0))
        assert np.max(np.abs(control_insert(phi, inner).values)) < 1e-14

    def test_duality_against_h1(self, rng):
        # <A f, g>_{H1} = <phi f, g>_{L2}
        g = make_grid(1, 32, 8.0)
        phi = build_cutoff(g, 2.0)
        f, h = random_field(g, rng), random_field(g, rng)
        lhs = hs_inner(control_insert(phi, f), h, 1)
        rhs = hs_inner(phi.field * f, h, 0)
        assert np.isclose(lhs, rhs, rtol=1e-12)

    def test_dense_oracle(self, rng):
        g = make_grid(1, 16, 8.0)
        phi = build_cutoff(g, 2.0)
        n = g.n
        dft = np.fft.fft(np.eye(n), axis=0)
        k2 = (np.pi * np.fft.fftfreq(n, 1 / n) / g.half_side) ** 2
        matrix = np.linalg.inv(dft) @ np.diag(1 / (1 + k2)) @ dft @ np.diag(phi.values)
        f = random_field(g, rng)
        assert np.allclose(control_insert(phi, f).values, matrix @ f.values, atol=1e-13)

    def test_linear(self, rng):
        g = make_grid(2, 16, 8.0)
        phi = build_cutoff(g, 2.0)
        f, h = random_field(g, rng), random_field(g, rng)
        lhs = control_insert(phi, f * 2.0 + h)
        rhs = control_insert(phi, f) * 2.0 + control_insert(phi, h)
        assert np.allclose(lhs.values, rhs.values, atol=1e-13)

    def test_grid_mismatch(self):
        phi = build_cutoff(make_grid(1, 32, 8.0), 2.0)
        with pytest.raises(GridMismatch):
            control_insert(phi, Field.zeros(make_grid(1, 16, 8.0)))


class TestBump:
    def test_norm_and_placement(self):
        g = make_grid(1, 64, 8.0)
        bump = control_region_bump(g, 2.0, 0.3)
        assert np.isclose(sobolev_norm(bump, 1), 0.3)
        phi = build_cutoff(g, 2.0)
        leak = np.abs(bump.values) * (1 - phi.values)
        assert leak.max() < 1e-6 * np.abs(bump.values).max()

    def test_zero_norm(self):
        assert control_region_bump(make_grid(1, 32, 8.0), 2.0, 0.0).is_zero()
