import numpy as np
import pytest

from qcontrol.diagnostics import (
    DIAGNOSTICS,
    LABELS,
    conservation_check,
    duhamel_ratio,
    embedding_sample,
    embedding_sweep,
    gaussian,
    h1_observability_sweep,
    inhomogeneous_strichartz_sample,
    inputs_digest,
    multiplier_identity_residual,
    multiplier_terms,
    random_field,
    random_source,
    run_diagnostic,
    smoothing_check,
    smoothing_grid,
    strichartz_ratio,
    strichartz_sample,
    substream_seed,
    weak_observability_check,
)
from qcontrol.geometry import build_cutoff, control_region_bump
from qcontrol.hum import HumProblem
from qcontrol.propagators import TimeGrid, Trajectory, free_flow_trajectory
from qcontrol.spectral import Field, make_grid, plane_wave


@pytest.fixture(scope="module")
def base():
    g = make_grid(1, 64, 8.0)
    return HumProblem(g, build_cutoff(g, 2.0), 2.0, 64, Field.zeros(g))


class TestConservation:
    def test_random_data(self, base):
        rep = conservation_check(random_field(base.grid, 3), base.times)
        assert rep.passed and rep.residual_or_ratio < 1e-13

    def test_zero_data(self, base):
        rep = conservation_check(Field.zeros(base.grid), base.times)
        assert rep.passed and rep.residual_or_ratio == 0.0


class TestMultiplier:
    def test_two_mode_data_converge_second_order(self, base):
        w = plane_wave(base.grid, [1]) + plane_wave(base.grid, [3]) * 0.5
        rep = multiplier_identity_residual(w, base)
        res = [t["relative_residual"] for t in rep.refinement_trend]
        assert all(a >= 3.5 * b for a, b in zip(res, res[1:]))
        assert rep.passed

    def test_zero_data(self, base):
        rep = multiplier_identity_residual(Field.zeros(base.grid), base)
        assert rep.passed and rep.residual_or_ratio == 0.0

    def test_terms_are_real_and_balanced(self, base):
        w = random_field(base.grid, 11)
        terms = multiplier_terms(w, 2.0, TimeGrid(0.0, 2.0, 256))
        assert terms.relative < 1e-4 and terms.scale > 0

    def test_two_dimensional_data(self):
        g = make_grid(2, 32, 8.0)
        p = HumProblem(g, build_cutoff(g, 2.0), 1.0, 32, Field.zeros(g))
        rep = multiplier_identity_residual(random_field(g, 4), p, levels=2)
        assert rep.details["orders"][0] > 1.9


class TestSmoothing:
    @pytest.mark.parametrize("alpha", [(1,), (2,)])
    def test_identity_in_one_dimension(self, alpha):
        rep = smoothing_check(gaussian(smoothing_grid(1), 1.0), alpha, 2.0)
        assert rep.passed and rep.residual_or_ratio < 1e-8

    def test_mixed_index_in_two_dimensions(self):
        rep = smoothing_check(gaussian(smoothing_grid(2), 1.0), (1, 1), 1.0)
        assert rep.passed

    def test_rejects_high_order(self):
        with pytest.raises(ValueError):
            smoothing_check(gaussian(smoothing_grid(1)), (3,), 1.0)


class TestStrichartz:
    def test_single_mode_closed_form(self):
        g = make_grid(1, 32, 4.0)
        tg = TimeGrid(0.0, 2.0, 32)
        q, r = 10.0, 30.0 / 13.0
        expected = 2.0 ** (1 / q) * 8.0 ** (1 / r - 0.5)
        assert np.isclose(strichartz_ratio(plane_wave(g, [2]), tg, q, r), expected, rtol=1e-12)

    def test_zero_data_is_nan(self, base):
        assert np.isnan(strichartz_ratio(Field.zeros(base.grid), base.times, 10, 30 / 13))

    def test_sample_is_stable(self, base):
        rep = strichartz_sample(base, n_samples=4, seed=2)
        assert rep.passed and len(rep.refinement_trend) == 2

    def test_inhomogeneous_sample(self, base):
        rep = inhomogeneous_strichartz_sample(base, n_samples=2, seed=2)
        assert rep.passed and rep.residual_or_ratio > 0

    def test_zero_source(self, base):
        assert np.isnan(duhamel_ratio(Trajectory.zeros(base.grid, base.times)))

    def test_random_source_is_seeded(self, base):
        a = random_source(base.grid, base.times, 5, 2.0).frames
        assert np.array_equal(a, random_source(base.grid, base.times, 5, 2.0).frames)


class TestEmbedding:
    def test_constant_is_skipped(self):
        g = make_grid(1, 16, 4.0)
        traj = Trajectory.constant(Field(g, np.ones(16)), TimeGrid(0, 1, 4))
        assert embedding_sample(traj).verdict == "skipped"

    def test_single_mode_closed_form(self):
        g = make_grid(1, 32, 4.0)
        traj = free_flow_trajectory(plane_wave(g, [3]), TimeGrid(0.0, 1.0, 16))
        k = 3 * np.pi / 4
        expected = 8.0 ** (0.1 - 13 / 30) / k
        assert np.isclose(embedding_sample(traj).residual_or_ratio, expected, rtol=1e-12)

    def test_sweep(self, base):
        assert embedding_sweep(base, n_samples=4, seed=1).passed


class TestObservabilitySweeps:
    def test_weak_observability_single_datum(self, base):
        v0 = control_region_bump(base.grid, 2.0, 1.0)
        rep = weak_observability_check(v0, base)
        assert rep.passed and 0 < rep.residual_or_ratio < np.inf

    def test_weak_observability_sweep(self, base):
        assert weak_observability_check(None, base, n_samples=4, seed=3).passed

    def test_h1_sweep(self, base):
        rep = h1_observability_sweep(base, n_samples=4, seed=3)
        assert rep.passed and rep.details["violations"] == 0


class TestBattery:
    def test_labels_cover_battery(self):
        assert set(LABELS) == set(DIAGNOSTICS)

    def test_substreams_differ_by_name(self):
        seeds = {substream_seed(42, name) for name in DIAGNOSTICS}
        assert len(seeds) == len(DIAGNOSTICS)
        assert substream_seed(42, "strichartz") == substream_seed(42, "strichartz")

    def test_reports_are_deterministic(self, base):
        a = run_diagnostic("strichartz", base, seed=7, samples=3).to_dict()
        b = run_diagnostic("strichartz", base, seed=7, samples=3).to_dict()
        assert a == b

    def test_digest_depends_on_inputs(self):
        assert inputs_digest(n=1) != inputs_digest(n=2)
        assert inputs_digest(a=1, b=2) == inputs_digest(b=2, a=1)

    def test_unknown_name(self, base):
        with pytest.raises(ValueError):
            run_diagnostic("nope", base)
