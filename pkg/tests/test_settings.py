"""
Tests for settings loading, deep merge logic, config files and output helpers.

Uses real TOML/JSON files on disk (no mocking).
"""

import json

import numpy as np
import pytest
import toml


class TestDeepMerge:
    """Test the _deep_merge function directly."""

    def test_override_replaces_flat_key(self):
        from utils.helpers import _deep_merge

        base = {"a": 1, "b": 2}
        override = {"b": 99}
        result = _deep_merge(base, override)
        assert result == {"a": 1, "b": 99}

    def test_override_adds_new_key(self):
        from utils.helpers import _deep_merge

        result = _deep_merge({"a": 1}, {"b": 2})
        assert result == {"a": 1, "b": 2}

    def test_nested_dicts_are_merged(self):
        from utils.helpers import _deep_merge

        base = {"section": {"a": 1, "b": 2}}
        override = {"section": {"b": 99, "c": 3}}
        result = _deep_merge(base, override)
        assert result == {"section": {"a": 1, "b": 99, "c": 3}}

    def test_base_is_not_mutated(self):
        from utils.helpers import _deep_merge

        base = {"a": {"x": 1}}
        _deep_merge(base, {"a": {"x": 2}})
        assert base["a"]["x"] == 1

    def test_preserves_type_of_values(self):
        from utils.helpers import _deep_merge

        base = {"section": {"int_val": 1, "str_val": "hello", "float_val": 1.5}}
        result = _deep_merge(base, {"section": {"int_val": 2}})
        assert isinstance(result["section"]["int_val"], int)
        assert isinstance(result["section"]["str_val"], str)
        assert isinstance(result["section"]["float_val"], float)


class TestLoadSettings:
    """Test load_settings with real TOML files."""

    def test_bundled_file_matches_defaults(self):
        from utils.helpers import DEFAULT_SETTINGS, load_settings

        settings = load_settings()
        for section, values in DEFAULT_SETTINGS.items():
            for key, value in values.items():
                assert settings[section][key] == value

    def test_override_file_merges_over_defaults(self, tmp_settings):
        from utils.helpers import reset_settings_cache, setting

        reset_settings_cache(tmp_settings)
        assert setting("spectral", "nodes") == 32
        assert setting("second_order", "tol") == 4.0
        # untouched keys keep their defaults
        assert setting("spectral", "tol_eig") == 1e-12
        assert setting("kernel", "tol_psd") == 1e-10

    def test_missing_file_uses_defaults(self, tmp_path):
        from utils.helpers import reset_settings_cache, setting

        reset_settings_cache(tmp_path / "nonexistent.toml")
        assert setting("spectral", "nodes") == 64
        assert setting("experiment", "replicates") == 30

    def test_corrupt_file_uses_defaults(self, tmp_path):
        from utils.helpers import reset_settings_cache, setting

        bad = tmp_path / "settings.toml"
        bad.write_text("[spectral\nnodes = = 3\n")
        reset_settings_cache(bad)
        assert setting("spectral", "nodes") == 64

    def test_cached_until_reset(self, tmp_path):
        from utils.helpers import load_settings, reset_settings_cache

        path = tmp_path / "settings.toml"
        path.write_text(toml.dumps({"spectral": {"nodes": 16}}))
        reset_settings_cache(path)
        first = load_settings()
        path.write_text(toml.dumps({"spectral": {"nodes": 24}}))
        assert load_settings() is first
        assert first["spectral"]["nodes"] == 16
        reset_settings_cache(path)
        assert load_settings()["spectral"]["nodes"] == 24

    def test_unknown_key_raises(self):
        from utils.helpers import setting

        with pytest.raises(KeyError):
            setting("spectral", "no_such_key")


class TestLoadConfig:
    """Structured run configs (JSON or TOML)."""

    def test_json_object(self, tmp_kernel_config):
        from utils.helpers import load_config

        config = load_config(tmp_kernel_config)
        assert config["kernel"]["factors"][1]["variance"] == 3.0

    def test_toml_by_suffix(self, tmp_path):
        from utils.helpers import load_config

        path = tmp_path / "run.toml"
        path.write_text(toml.dumps({"p": 3, "designs": ["lhd"]}))
        assert load_config(path) == {"p": 3, "designs": ["lhd"]}

    def test_missing_file(self, tmp_path):
        from utils.errors import UsageError
        from utils.helpers import load_config

        with pytest.raises(UsageError, match="not found"):
            load_config(tmp_path / "absent.json")

    def test_malformed_json_names_line_and_column(self, tmp_path):
        from utils.errors import UsageError
        from utils.helpers import load_config

        path = tmp_path / "bad.json"
        path.write_text('{\n  "p": 2,\n  "n_runs": ]\n}\n')
        with pytest.raises(UsageError, match=r"line 3, column 13"):
            load_config(path)

    def test_malformed_toml(self, tmp_path):
        from utils.errors import UsageError
        from utils.helpers import load_config

        path = tmp_path / "bad.toml"
        path.write_text("p = = 2\n")
        with pytest.raises(UsageError, match="Malformed TOML"):
            load_config(path)

    def test_top_level_must_be_object(self, tmp_path):
        from utils.errors import UsageError
        from utils.helpers import load_config

        path = tmp_path / "list.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(UsageError, match="JSON object"):
            load_config(path)


class TestOutputHelpers:
    """CSV/JSON writers: repr floats, atomic replace."""

    def test_csv_uses_repr_floats(self, tmp_path):
        from utils.helpers import write_csv

        path = write_csv(tmp_path / "out.csv", ["a", "b", "c"], [[0.1, 2, "x"], [1 / 3, np.float64(1e-20), "y"]])
        lines = path.read_text().splitlines()
        assert lines == ["a,b,c", "0.1,2,x", f"{1 / 3!r},1e-20,y"]
        assert float(lines[2].split(",")[0]) == 1 / 3

    def test_csv_nan(self, tmp_path):
        from utils.helpers import write_csv

        path = write_csv(tmp_path / "out.csv", ["v"], [[float("nan")]])
        assert path.read_text() == "v\nnan\n"

    def test_json_sorted_and_newline_terminated(self, tmp_path):
        from utils.helpers import write_json

        path = write_json(tmp_path / "out.json", {"b": 1, "a": [0.1, 0.2]})
        text = path.read_text()
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0.1, 0.2], "b": 1}

    def test_atomic_write_replaces_and_cleans_up(self, tmp_path):
        from utils.helpers import atomic_write_text

        target = tmp_path / "nested" / "file.txt"
        atomic_write_text(target, "first")
        atomic_write_text(target, "second")
        assert target.read_text() == "second"
        assert [p.name for p in target.parent.iterdir()] == ["file.txt"]


class TestStreams:
    """Seeded streams and ordered parallel map."""

    def test_same_ids_same_draws(self):
        from utils.streams import stream

        a = stream(3, "truth", 7).standard_normal(5)
        b = stream(3, "truth", 7).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_ids_separate_streams(self):
        from utils.streams import stream

        base = stream(3, "truth", 7).standard_normal(5)
        for other in (stream(4, "truth", 7), stream(3, "test", 7), stream(3, "truth", 8)):
            assert not np.array_equal(base, other.standard_normal(5))

    def test_label_equals_its_integer_id(self):
        from utils.streams import stream

        np.testing.assert_array_equal(stream(1, "kl").uniform(size=3), stream(1, 21).uniform(size=3))

    def test_unknown_label(self):
        from utils.streams import stream

        with pytest.raises(KeyError, match="bogus"):
            stream(0, "bogus")

    @pytest.mark.parametrize("jobs", [1, 2, 4])
    def test_parallel_map_keeps_order(self, jobs):
        from utils.streams import parallel_map

        assert parallel_map(lambda i: i * i, range(20), jobs) == [i * i for i in range(20)]

    def test_resolve_jobs_default_from_settings(self, tmp_path):
        from utils.helpers import reset_settings_cache
        from utils.streams import resolve_jobs

        assert resolve_jobs(None) == 1
        path = tmp_path / "settings.toml"
        path.write_text(toml.dumps({"parallel": {"n_jobs": 3}}))
        reset_settings_cache(path)
        assert resolve_jobs(None) == 3
        assert resolve_jobs(2) == 2
