"""Tests for ValueGrid bundles on disk."""

import numpy as np
import pytest

from gamelab.core.artifacts import ArtifactWriter, read_csv
from gamelab.exceptions import ArtifactError
from gamelab.model.spec import GameSpec
from gamelab.vi.bundle import bundle_names, read_bundle, write_bundle
from gamelab.vi.grid import GridParams, PenaltySchedule
from gamelab.vi.solver import solve_vi

from tests.conftest import BASE_DOC


@pytest.fixture(scope="module")
def small_grid():
    schedule = PenaltySchedule(eps_obstacle=(1e-3,), eps_gradient=(1e-3,))
    return solve_vi(
        GameSpec.from_dict(BASE_DOC), 0.2, GridParams(n_time=10, n_space=20), schedule
    )


class TestBundle:
    def test_written_files(self, tmp_path, small_grid):
        writer = ArtifactWriter(tmp_path, "abc123", 4)
        names = write_bundle(writer, small_grid, "value_grid_g0.2")
        assert names == list(bundle_names("value_grid_g0.2"))
        assert writer.written == names
        meta, header, rows = read_csv(tmp_path / names[2])
        assert meta == {"config_hash": "abc123", "seed": "4"}
        assert header == ["t", "x_1", "u", "g", "grad_1", "residual", "region"]
        assert len(rows) == 11 * 21

    def test_reload_preserves_grid(self, tmp_path, small_grid):
        write_bundle(ArtifactWriter(tmp_path, "abc123", 4), small_grid)
        loaded = read_bundle(tmp_path)
        assert loaded.same_geometry(small_grid)
        np.testing.assert_array_equal(loaded.u, small_grid.u)
        np.testing.assert_array_equal(loaded.regions, small_grid.regions)
        assert loaded.gamma == 0.2
        assert loaded.schedule == small_grid.schedule

    def test_missing_header(self, tmp_path):
        with pytest.raises(ArtifactError, match="missing bundle header"):
            read_bundle(tmp_path, "nothing")

    def test_truncated_values(self, tmp_path, small_grid):
        writer = ArtifactWriter(tmp_path, "abc123", 4)
        write_bundle(writer, small_grid)
        values = tmp_path / bundle_names("value_grid")[2]
        lines = values.read_text().splitlines()
        values.write_text("\n".join(lines[:-5]) + "\n")
        with pytest.raises(ArtifactError, match="value rows"):
            read_bundle(tmp_path)
