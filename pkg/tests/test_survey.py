"""Survey planner and simulator tests."""

import dataclasses
import math

import numpy as np
import pytest

from reefsurvey.errors import ScenarioConfigError
from reefsurvey.geom import AABB2, mesh_surface_area
from reefsurvey.rugosity import RugosityConfig, rugosity_grid
from reefsurvey.survey import (
    CameraGeometry,
    FishHotspot,
    GaussianBump,
    NoiseModel,
    Pillar,
    ReefScenario,
    fish_density,
    footprint_dims,
    load_scenario,
    plan_csv,
    plan_lawnmower,
    run_end_to_end,
    scenario_to_dict,
    simulate_frame_detections,
    simulate_survey,
    synth_reef,
    truth_csv,
)

REGION = AABB2(0, 0, 12, 12)
SURVEY_CAM = CameraGeometry()  # field defaults: 2 m altitude, 120x58 deg, 6 fps


def flat_scenario(seed=1, **kwargs):
    defaults = dict(seed=seed, region=REGION, base_depth=2.0)
    defaults.update(kwargs)
    return ReefScenario(**defaults)


class TestFootprint:
    def test_survey_camera_footprint(self):
        w, l = footprint_dims(SURVEY_CAM)
        assert w == pytest.approx(6.928, abs=1e-3)
        assert l == pytest.approx(2.217, abs=1e-3)

    def test_square_fov(self):
        w, l = footprint_dims(CameraGeometry(altitude=1.0, hfov_deg=90.0, vfov_deg=90.0))
        assert w == pytest.approx(2.0)
        assert l == pytest.approx(2.0)

    def test_zero_altitude_rejected(self):
        with pytest.raises(ValueError):
            CameraGeometry(altitude=0.0)

    def test_monotone_in_altitude_and_fov(self):
        base = footprint_dims(SURVEY_CAM)
        higher = footprint_dims(dataclasses.replace(SURVEY_CAM, altitude=3.0))
        wider = footprint_dims(dataclasses.replace(SURVEY_CAM, hfov_deg=140.0))
        assert higher[0] > base[0] and higher[1] > base[1]
        assert wider[0] > base[0]


class TestPlanLawnmower:
    def test_survey_site_three_tracks(self):
        plan = plan_lawnmower(REGION, SURVEY_CAM, overlap=0.2)
        assert plan.track_spacing == pytest.approx(5.5426, abs=1e-3)
        assert plan.track_count == 3
        assert len(plan.waypoints) == 6

    def test_narrow_region_single_center_track(self):
        plan = plan_lawnmower(AABB2(0, 0, 3, 10), SURVEY_CAM, overlap=0.2)
        assert plan.track_count == 1
        assert all(w[0] == 1.5 for w in plan.waypoints)

    def test_more_overlap_never_fewer_tracks(self):
        n0 = plan_lawnmower(REGION, SURVEY_CAM, overlap=0.0).track_count
        n5 = plan_lawnmower(REGION, SURVEY_CAM, overlap=0.5).track_count
        assert n5 >= n0

    def test_waypoints_inside_region(self):
        for overlap in (0.0, 0.2, 0.5, 0.8):
            plan = plan_lawnmower(REGION, SURVEY_CAM, overlap=overlap)
            for x, y, z in plan.waypoints:
                assert REGION.contains(x, y)
                assert z == -SURVEY_CAM.altitude

    def test_transects_alternate_direction(self):
        plan = plan_lawnmower(REGION, SURVEY_CAM, overlap=0.2)
        wp = plan.waypoints
        assert wp[0][1] < wp[1][1]  # first transect goes up
        assert wp[2][1] > wp[3][1]  # second comes back down

    def test_travel_axis_x(self):
        plan = plan_lawnmower(AABB2(0, 0, 12, 8), SURVEY_CAM, overlap=0.2, travel_axis="x")
        ys = {w[1] for w in plan.waypoints}
        assert len(ys) == plan.track_count

    def test_coverage_of_cell_centers(self):
        # Every cell center of a footprint-length grid must lie within half a
        # footprint width of some transect line.
        width, length = footprint_dims(SURVEY_CAM)
        for overlap in (0.0, 0.2, 0.4):
            plan = plan_lawnmower(REGION, SURVEY_CAM, overlap=overlap)
            track_x = sorted({w[0] for w in plan.waypoints})
            centers = np.arange(REGION.x_min + length / 2, REGION.x_max, length)
            covered = sum(
                1 for cx in centers if min(abs(cx - tx) for tx in track_x) <= width / 2
            )
            assert covered / len(centers) >= 0.99

    def test_invalid_overlap_rejected(self):
        with pytest.raises(ValueError):
            plan_lawnmower(REGION, SURVEY_CAM, overlap=1.0)

    def test_plan_csv_format(self):
        text = plan_csv(plan_lawnmower(REGION, SURVEY_CAM))
        lines = text.splitlines()
        assert lines[0] == "idx,x,y,z"
        assert lines[1].startswith("0,")

    def test_frame_positions_follow_path(self):
        plan = plan_lawnmower(REGION, SURVEY_CAM, overlap=0.2)
        positions = plan.frame_positions(SURVEY_CAM.fps)
        step = plan.speed / SURVEY_CAM.fps
        assert len(positions) == int(plan.path_length() / step) + 1
        assert tuple(positions[0]) == plan.waypoints[0]
        deltas = np.linalg.norm(np.diff(positions, axis=0), axis=1)
        assert np.all(deltas <= step + 1e-9)


class TestSynthReef:
    def test_flat_reef_closes_loop_with_rugosity(self):
        mesh = synth_reef(flat_scenario(), vertex_spacing=0.25)
        inner = AABB2(0.5, 0.5, 11.5, 11.5)
        grid = rugosity_grid(mesh, RugosityConfig(cell_size=0.5, region=inner))
        assert grid.valid.all()
        assert np.all(np.abs(grid.values - 1.0) < 1e-9)

    def test_single_bump_rugosity_peaks_on_slope_annulus(self):
        # Gaussian slope is maximal at r = sigma from the bump center.
        bump = GaussianBump(cx=6.0, cy=6.0, sigma=1.5, height=1.2)
        scn = flat_scenario(bumps=(bump,))
        grid = rugosity_grid(synth_reef(scn, 0.1), RugosityConfig(cell_size=0.5, region=REGION))
        i, j = np.unravel_index(np.where(grid.valid, grid.values, 0).argmax(), grid.values.shape)
        cx, cy = grid.cell_center(i, j)
        r = math.hypot(cx - bump.cx, cy - bump.cy)
        assert abs(r - bump.sigma) <= 1.5 * grid.cell_size

    def test_area_at_least_planar_equality_iff_flat(self):
        flat = synth_reef(flat_scenario(), 0.25)
        assert mesh_surface_area(flat) == pytest.approx(144.0, rel=1e-12)
        bumpy = synth_reef(flat_scenario(bumps=(GaussianBump(4, 4, 1.0, 0.8),)), 0.25)
        assert mesh_surface_area(bumpy) > 144.0

    def test_interior_watertight(self):
        scn = flat_scenario(bumps=(GaussianBump(3, 3, 1.0, 0.5),), pillar=Pillar(8, 8, 1.0, 1.0))
        mesh = synth_reef(scn, 0.5)
        edges: dict[tuple[int, int], int] = {}
        for a, b, c in mesh.faces:
            for u, v in ((a, b), (b, c), (c, a)):
                key = (min(u, v), max(u, v))
                edges[key] = edges.get(key, 0) + 1
        assert set(edges.values()) <= {1, 2}
        for (u, v), count in edges.items():
            if count == 1:
                for vid in (u, v):
                    x, y = mesh.vertices[vid][0], mesh.vertices[vid][1]
                    on_edge = (
                        math.isclose(x, REGION.x_min)
                        or math.isclose(x, REGION.x_max)
                        or math.isclose(y, REGION.y_min)
                        or math.isclose(y, REGION.y_max)
                    )
                    assert on_edge

    def test_pillar_plateau_height(self):
        scn = flat_scenario(pillar=Pillar(cx=6.0, cy=6.0, radius=1.0, height=1.5))
        from reefsurvey.survey import reef_height

        assert reef_height(scn, 6.0, 6.0) == pytest.approx(-2.0 + 1.5, abs=1e-3)
        assert reef_height(scn, 11.0, 11.0) == pytest.approx(-2.0, abs=1e-6)

    def test_analytic_slope_matches_finite_differences(self, rng):
        # local_rugosity relies on the hand-derived heightfield gradient;
        # check it against central differences at random points.
        from reefsurvey.survey import local_rugosity, reef_height

        scn = flat_scenario(
            bumps=(
                GaussianBump(3.0, 4.0, 1.1, 0.9),
                GaussianBump(8.0, 8.5, 1.7, 1.3),
            ),
            pillar=Pillar(cx=6.0, cy=2.5, radius=1.0, height=1.4),
        )
        h = 1e-6
        for _ in range(200):
            x = float(rng.uniform(0.5, 11.5))
            y = float(rng.uniform(0.5, 11.5))
            dzdx = (reef_height(scn, x + h, y) - reef_height(scn, x - h, y)) / (2 * h)
            dzdy = (reef_height(scn, x, y + h) - reef_height(scn, x, y - h)) / (2 * h)
            want = math.sqrt(1.0 + dzdx**2 + dzdy**2)
            assert local_rugosity(scn, x, y) == pytest.approx(want, rel=1e-5)


class TestFishDensity:
    def test_base_only(self):
        scn = flat_scenario(fish_base_density=0.3)
        assert fish_density(scn, 4.0, 9.0) == pytest.approx(0.3)

    def test_hotspot_center(self):
        scn = flat_scenario(fish_base_density=0.05, fish_hotspots=(FishHotspot(6, 7, 1.0, 3.0),))
        assert fish_density(scn, 6.0, 7.0) == pytest.approx(3.05)

    def test_integral_against_monte_carlo(self):
        scn = flat_scenario(fish_base_density=0.05, fish_hotspots=(FishHotspot(6, 6, 1.0, 3.0),))
        analytic = 0.05 * 144.0 + 2.0 * math.pi * 1.0**2 * 3.0
        mc = np.random.default_rng(99)
        xs = mc.uniform(0, 12, size=1_000_000)
        ys = mc.uniform(0, 12, size=1_000_000)
        estimate = float(np.mean(fish_density(scn, xs, ys))) * 144.0
        assert estimate == pytest.approx(analytic, rel=0.01)

    def test_rugosity_coupling_raises_density_on_slopes(self):
        scn = flat_scenario(bumps=(GaussianBump(6, 6, 1.0, 1.0),), fish_base_density=0.05, rugosity_coupling=2.0)
        on_slope = fish_density(scn, 7.0, 6.0)
        off_reef = fish_density(scn, 1.0, 1.0)
        assert on_slope > off_reef


class TestSimulate:
    def test_zero_density_zero_fp_all_empty(self):
        scn = flat_scenario()
        plan = plan_lawnmower(REGION, SURVEY_CAM)
        _, dets = simulate_survey(plan, SURVEY_CAM, scn)
        assert all(len(v) == 0 for v in dets.values())

    def test_miss_probability_one_all_empty(self):
        scn = flat_scenario(fish_base_density=2.0, noise=NoiseModel(miss_probability=1.0))
        plan = plan_lawnmower(REGION, SURVEY_CAM)
        _, dets = simulate_survey(plan, SURVEY_CAM, scn)
        assert all(len(v) == 0 for v in dets.values())

    def test_every_frame_has_a_record(self):
        scn = flat_scenario(fish_base_density=0.1, noise=NoiseModel(false_positive_rate=0.1))
        plan = plan_lawnmower(REGION, SURVEY_CAM)
        traj, dets = simulate_survey(plan, SURVEY_CAM, scn)
        assert {fp.frame_id for fp in traj} == set(dets)
        assert traj[0].timestamp == 0.0
        assert traj[-1].timestamp == pytest.approx((len(traj) - 1) / SURVEY_CAM.fps)

    def test_observed_mean_matches_thinned_rate(self):
        # E[observed] = density*area*(1 - miss) + fp_rate; check over 10^4
        # frames at a fixed position, within 3 standard errors.
        scn = flat_scenario(
            fish_base_density=0.2,
            noise=NoiseModel(false_positive_rate=0.3, miss_probability=0.25),
        )
        fw, fl = footprint_dims(SURVEY_CAM)
        lam = 0.2 * fw * fl
        want = lam * 0.75 + 0.3
        n = 10_000
        counts = [
            len(simulate_frame_detections(scn, SURVEY_CAM, fid, 6.0, 6.0)) for fid in range(n)
        ]
        se = math.sqrt(want / n)
        assert abs(np.mean(counts) - want) <= 3 * se

    def test_bit_reproducible_and_seed_sensitive(self):
        scn = flat_scenario(
            seed=42, fish_base_density=0.5, noise=NoiseModel(false_positive_rate=0.2, miss_probability=0.2)
        )
        plan = plan_lawnmower(REGION, SURVEY_CAM)
        traj_a, dets_a = simulate_survey(plan, SURVEY_CAM, scn)
        traj_b, dets_b = simulate_survey(plan, SURVEY_CAM, scn)
        assert traj_a == traj_b
        assert dets_a == dets_b
        _, dets_c = simulate_survey(plan, SURVEY_CAM, dataclasses.replace(scn, seed=43))
        assert dets_c != dets_a

    def test_thread_counts_agree(self):
        scn = flat_scenario(seed=9, fish_base_density=0.5, noise=NoiseModel(false_positive_rate=0.2))
        plan = plan_lawnmower(REGION, SURVEY_CAM)
        base = simulate_survey(plan, SURVEY_CAM, scn, threads=1)
        for threads in (2, 8):
            assert simulate_survey(plan, SURVEY_CAM, scn, threads=threads) == base


class TestEndToEnd:
    def test_single_hotspot_recovered(self):
        for seed in (1, 2):
            scn = flat_scenario(
                seed=seed,
                fish_base_density=0.05,
                fish_hotspots=(FishHotspot(6.0, 7.0, 1.0, 3.0),),
                noise=NoiseModel(false_positive_rate=0.2, miss_probability=0.2),
            )
            report = run_end_to_end(scn, SURVEY_CAM, overlap=0.2)
            assert report.peaks
            assert report.top_peak_offset is not None
            assert report.top_peak_offset <= 1.0

    def test_rugosity_driven_fish_field_correlates(self):
        scn = rugosity_coupled_scenario(seed=5)
        report = run_end_to_end(scn, SURVEY_CAM, overlap=0.2)
        assert report.correlation.spearman is not None
        assert report.correlation.spearman > 0.5

    def test_flat_uniform_field_has_no_hotspot(self):
        scn = flat_scenario(
            seed=11, fish_base_density=0.5, noise=NoiseModel(false_positive_rate=0.2, miss_probability=0.2)
        )
        report = run_end_to_end(scn, SURVEY_CAM, overlap=0.2)
        vals = report.abundance.values[report.abundance.valid]
        assert float(vals.max()) <= 3.0 * float(np.median(vals))


def rugosity_coupled_scenario(seed: int) -> ReefScenario:
    bumps = tuple(
        GaussianBump(cx, cy, sigma, height)
        for cx, cy, sigma, height in [
            (2.5, 2.0, 1.4, 0.9),
            (6.0, 3.0, 1.2, 1.1),
            (9.5, 2.5, 1.6, 0.8),
            (3.0, 6.5, 1.3, 1.2),
            (7.0, 7.5, 1.5, 0.9),
            (10.0, 6.0, 1.2, 1.0),
            (2.5, 10.0, 1.5, 1.1),
            (6.5, 10.5, 1.3, 0.8),
            (10.0, 10.0, 1.4, 1.2),
        ]
    )
    return ReefScenario(
        seed=seed,
        region=REGION,
        base_depth=2.0,
        bumps=bumps,
        pillar=Pillar(cx=8.0, cy=4.5, radius=0.8, height=1.2),
        fish_base_density=0.05,
        rugosity_coupling=2.5,
        noise=NoiseModel(false_positive_rate=0.2, miss_probability=0.2),
    )


class TestScenarioConfig:
    def valid_dict(self):
        return {
            "seed": 7,
            "region": [0, 0, 12, 12],
            "base_depth": 2.0,
            "bumps": [{"cx": 3, "cy": 3, "sigma": 1.0, "height": 0.5}],
            "pillar": {"cx": 8, "cy": 8, "radius": 1.0, "height": 1.5},
            "fish": {
                "base_density": 0.05,
                "hotspots": [{"cx": 6, "cy": 7, "sigma": 1.0, "peak_density": 3.0}],
                "rugosity_coupling": 0.0,
            },
            "noise": {"false_positive_rate": 0.2, "miss_probability": 0.2},
        }

    def test_load_valid(self, tmp_path):
        path = tmp_path / "scn.json"
        import json

        path.write_text(json.dumps(self.valid_dict()))
        scn = load_scenario(path)
        assert scn.seed == 7
        assert scn.pillar.radius == 1.0
        assert scn.fish_hotspots[0].peak_density == 3.0

    def test_roundtrip_through_dict(self):
        scn = load_scenario(self.valid_dict())
        assert load_scenario(scenario_to_dict(scn)) == scn

    def test_missing_key_names_path(self):
        bad = self.valid_dict()
        del bad["fish"]["hotspots"][0]["sigma"]
        with pytest.raises(ScenarioConfigError, match=r"fish\.hotspots\[0\]\.sigma"):
            load_scenario(bad)

    def test_unknown_key_names_path(self):
        bad = self.valid_dict()
        bad["noise"]["fp_rate"] = 0.1
        with pytest.raises(ScenarioConfigError, match=r"noise\.fp_rate"):
            load_scenario(bad)

    def test_bad_type_names_path(self):
        bad = self.valid_dict()
        bad["seed"] = "seven"
        with pytest.raises(ScenarioConfigError, match="seed"):
            load_scenario(bad)

    def test_domain_violation_reported(self):
        bad = self.valid_dict()
        bad["noise"]["miss_probability"] = 1.5
        with pytest.raises(ScenarioConfigError, match="miss_probability"):
            load_scenario(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioConfigError, match="does not exist"):
            load_scenario(tmp_path / "nope.json")

    def test_truth_csv_lists_planted_structure(self):
        scn = load_scenario(self.valid_dict())
        text = truth_csv(scn)
        lines = text.splitlines()
        assert lines[0] == "kind,cx,cy,scale,magnitude"
        kinds = [line.split(",")[0] for line in lines[1:]]
        assert kinds == ["hotspot", "bump", "pillar"]
