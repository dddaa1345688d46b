import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sessionscope.errors import EmptyDataError
from sessionscope.heatmap import (
    DEFAULT_CELL_SIZE,
    DensityGrid,
    GridSpec,
    accumulate_density,
    colorize,
    density_color,
    derive_spec,
    export_heatmap,
    load_sidecar,
    sidecar_payload,
)
from sessionscope.model import Category
from sessionscope.replay import FilterSet, load_sessions
from util import oracle_bin, simple_session


def session_at(positions, session_id="pts"):
    points = [(0.1 * i, (x, 0.0, z)) for i, (x, z) in enumerate(positions)]
    return simple_session(points, session_id=session_id, hz=10.0)


def loaded_at(positions):
    return load_sessions([session_at(positions)])


class TestGridSpec:
    def test_cell_indexing_basic(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=4, rows=4)
        assert spec.cell_of(0.05, 0.05) == (0, 0)
        assert spec.cell_of(0.15, 0.05) == (1, 0)
        assert spec.cell_of(0.05, 0.35) == (0, 3)

    def test_cells_are_half_open(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=4, rows=4)
        # A point on a cell's max edge belongs to the next cell.
        assert spec.cell_of(0.1, 0.0) == (1, 0)
        assert spec.cell_of(0.0, 0.2) == (0, 2)

    def test_far_border_closed(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=4, rows=4)
        assert spec.cell_of(0.4, 0.4) == (3, 3)

    def test_outside_returns_none(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=4, rows=4)
        assert spec.cell_of(-0.01, 0.0) is None
        assert spec.cell_of(0.0, 0.41) is None

    def test_cell_center_round_trips(self):
        spec = GridSpec(origin=(-1.0, 2.0), cell_size=0.5, cols=6, rows=3)
        for col, row in [(0, 0), (5, 2), (3, 1)]:
            x, z = spec.cell_center(col, row)
            assert spec.cell_of(x, z) == (col, row)

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(origin=(0.0, 0.0), cell_size=0.0, cols=4, rows=4)
        with pytest.raises(ValueError):
            GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=0, rows=4)


class TestAccumulate:
    def test_direct_binning_example(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=3, rows=3)
        loaded = loaded_at([(0.05, 0.05)] * 3 + [(0.15, 0.05)])
        grid = accumulate_density(loaded, spec=spec)
        assert grid.counts[0][0] == 3
        assert grid.counts[0][1] == 1
        assert grid.total == 4

    def test_all_samples_in_one_point(self):
        loaded = loaded_at([(1.0, 1.0)] * 7)
        grid = accumulate_density(loaded)
        assert grid.max_count == 7
        assert grid.total == 7
        flat = [c for row in grid.counts for c in row]
        assert sorted(flat)[-2:] == [0, 7]

    def test_counts_match_binning_oracle(self, synth):
        log = synth(scenario="arena", seed=13, duration=8.0)
        loaded = load_sessions([log])
        grid = accumulate_density(loaded)
        positions = [
            (s.pose.position[0], s.pose.position[2]) for s in log.samples["player-1"]
        ]
        expect = oracle_bin(positions, grid.spec)
        for row in range(grid.spec.rows):
            for col in range(grid.spec.cols):
                assert grid.counts[row][col] == expect.get((col, row), 0)
        assert grid.total == len(positions)

    def test_empty_input_rejected(self, synth):
        log = synth(scenario="arena", seed=1, duration=2.0)
        loaded = load_sessions([log])
        with pytest.raises(EmptyDataError):
            accumulate_density(loaded, filters=FilterSet(sessions=(False,)))

    def test_default_feeds_players_only(self, synth):
        log = synth(scenario="arena", seed=13, duration=3.0)
        grid = accumulate_density(load_sessions([log]))
        assert grid.total == len(log.samples["player-1"])

    def test_categories_configurable(self, synth):
        log = synth(scenario="arena", seed=13, duration=3.0)
        grid = accumulate_density(
            load_sessions([log]), categories=(Category.PLAYER, Category.CAMERA)
        )
        assert grid.total == len(log.samples["player-1"]) + len(log.samples["cam-1"])

    def test_derived_spec_covers_all_samples_padded(self):
        loaded = loaded_at([(0.0, 0.0), (1.0, 2.0)])
        grid = accumulate_density(loaded)
        spec = grid.spec
        assert spec.origin == (-DEFAULT_CELL_SIZE, -DEFAULT_CELL_SIZE)
        assert grid.total == 2
        # One padding cell on each side of the bounding box.
        assert spec.cell_of(0.0, 0.0) == (1, 1)
        assert spec.cell_of(1.0, 2.0)[0] < spec.cols - 1

    def test_explicit_spec_drops_outliers(self):
        spec = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=2, rows=2)
        loaded = loaded_at([(0.05, 0.05), (5.0, 5.0)])
        grid = accumulate_density(loaded, spec=spec)
        assert grid.total == 1

    def test_translation_covariance(self):
        positions = [(0.13, 0.91), (0.74, 0.22), (0.74, 0.22), (0.31, 0.55)]
        dx, dz = 3.7, -1.9
        spec_a = GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=12, rows=12)
        spec_b = GridSpec(origin=(dx, dz), cell_size=0.1, cols=12, rows=12)
        grid_a = accumulate_density(loaded_at(positions), spec=spec_a)
        grid_b = accumulate_density(
            loaded_at([(x + dx, z + dz) for x, z in positions]), spec=spec_b
        )
        assert grid_a.counts == grid_b.counts

    def test_multi_session_additivity(self, synth):
        a = synth(scenario="arena", seed=21, duration=3.0)
        b = synth(scenario="patrol", seed=22, duration=3.0)
        spec = GridSpec(origin=(-12.0, -12.0), cell_size=0.25, cols=96, rows=96)
        both = accumulate_density(load_sessions([a, b]), spec=spec)
        only_a = accumulate_density(load_sessions([a]), spec=spec)
        only_b = accumulate_density(load_sessions([b]), spec=spec)
        for row in range(spec.rows):
            for col in range(spec.cols):
                assert both.counts[row][col] == (
                    only_a.counts[row][col] + only_b.counts[row][col]
                )

    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
                st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
            ),
            min_size=1,
            max_size=60,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_mass_conservation_with_derived_spec(self, positions):
        grid = accumulate_density(loaded_at(positions))
        assert grid.total == len(positions)
        assert grid.max_count == max(c for row in grid.counts for c in row)


class TestColors:
    def test_max_count_is_pure_red(self):
        assert density_color(10, 10) == (255, 0, 0, 255)

    def test_half_max_is_pure_green(self):
        assert density_color(5, 10) == (0, 255, 0, 255)

    def test_zero_count_is_transparent(self):
        assert density_color(0, 10) == (0, 0, 0, 0)

    def test_low_count_is_near_blue(self):
        r, g, b, a = density_color(1, 1_000_000)
        assert a == 255
        assert b == 255 and r == 0

    def test_hue_monotone_in_count(self):
        # Denser cells must be warmer (smaller hue).
        def hue(c, m):
            r, g, b, _ = density_color(c, m)
            import colorsys

            return colorsys.rgb_to_hsv(r / 255, g / 255, b / 255)[0] * 360.0

        hues = [hue(c, 100) for c in range(1, 101)]
        assert all(a > b for a, b in zip(hues, hues[1:]))

    def test_colorize_dimensions_and_transparency(self):
        grid = DensityGrid(
            spec=GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=3, rows=2),
            counts=((0, 2, 1), (0, 0, 2)),
        )
        img = colorize(grid)
        assert img.size == (3, 2)
        assert img.getpixel((0, 0))[3] == 0
        assert img.getpixel((1, 0)) == (255, 0, 0, 255)

    def test_all_zero_grid_is_fully_transparent(self):
        grid = DensityGrid(
            spec=GridSpec(origin=(0.0, 0.0), cell_size=0.1, cols=2, rows=2),
            counts=((0, 0), (0, 0)),
        )
        img = colorize(grid)
        assert all(img.getpixel((x, y))[3] == 0 for x in range(2) for y in range(2))


class TestExport:
    def grid(self) -> DensityGrid:
        return DensityGrid(
            spec=GridSpec(origin=(-0.5, 1.5), cell_size=0.25, cols=2, rows=2),
            counts=((1, 0), (3, 2)),
        )

    def test_png_has_one_pixel_per_cell(self, tmp_path):
        grid = self.grid()
        paths = export_heatmap(grid, colorize(grid), tmp_path / "h.png")
        from PIL import Image

        with Image.open(paths[0]) as img:
            assert img.size == (2, 2)

    def test_sidecar_round_trips(self, tmp_path):
        grid = self.grid()
        paths = export_heatmap(grid, colorize(grid), tmp_path / "h.png")
        assert load_sidecar(paths[1]) == grid

    def test_sidecar_schema(self):
        payload = sidecar_payload(self.grid())
        assert payload == {
            "origin": [-0.5, 1.5],
            "cell_size": 0.25,
            "cols": 2,
            "rows": 2,
            "counts": [1, 0, 3, 2],
        }
        json.dumps(payload)

    def test_export_is_deterministic(self, tmp_path):
        grid = self.grid()
        a = export_heatmap(grid, colorize(grid), tmp_path / "a.png")
        b = export_heatmap(grid, colorize(grid), tmp_path / "b.png")
        assert (a[0].read_bytes(), a[1].read_bytes()) == (
            b[0].read_bytes(),
            b[1].read_bytes(),
        )

    def test_derive_spec_matches_examples(self):
        spec = derive_spec([(0.0, 0.0), (0.95, 0.45)], cell_size=0.1)
        assert spec.origin == (-0.1, -0.1)
        assert spec.cols >= 11
        assert spec.cell_of(0.0, 0.0) is not None
        assert spec.cell_of(0.95, 0.45) is not None
