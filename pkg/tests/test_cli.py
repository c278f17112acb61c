# Copyright 2026 The MetaImpact Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Test the command-line surface."""

import json
import os

from metaimpact import cli
from metaimpact import tape as tape_lib
import pandas as pd
import pytest

_SCENARIO = (
    '{"seed": 2, "n_traders": 5, "n_days": 2, "daily_volume": 200.0,'
    ' "y_tilde": 0.001}'
)
_QUIET_SCENARIO = (
    '{"seed": 4, "n_traders": 1, "n_days": 30, "daily_volume": 20.0,'
    ' "background_trade_size": 1.0, "noise_sigma": 0.0, "pi_inf": 1.0,'
    ' "y_tilde": 0.01, "child_count_mix": [0.0, 1.0, 0.0, 0.0]}'
)
_HEADER = "timestamp,trade_id,aggressor_id,side,price,volume\n"


def _manifest(output_dir):
  with open(os.path.join(output_dir, "manifest.json"), encoding="utf-8") as f:
    return json.load(f)


def _synth(output_dir, *flags):
  code = cli.main(
      ["synth", "--scenario", _SCENARIO, "--output_dir", str(output_dir)]
      + list(flags)
  )
  assert code == cli.EXIT_OK
  return output_dir


def test_synth_is_deterministic(tmp_path):
  """Test that a scenario gives the same bytes twice."""
  first = _synth(tmp_path / "a")
  second = _synth(tmp_path / "b")

  for name in ("tape.bin", "ground_truth.csv", "planted_metaorders.csv"):
    assert (first / name).read_bytes() == (second / name).read_bytes()
  manifest = _manifest(first)
  assert manifest["schema_version"] == cli.MANIFEST_SCHEMA_VERSION
  assert manifest["command"] == "synth"
  assert manifest["results"]["synth"]["scenario"]["seed"] == 2
  assert manifest["results"]["synth"]["n_trades"] == len(
      tape_lib.parse_tape(first / "tape.bin")
  )


def test_ingest_then_segment(tmp_path):
  """Test ingesting a CSV tape and segmenting its binary twin."""
  synth_dir = _synth(tmp_path / "synth", "--synth_format", "csv")
  ingest_dir = tmp_path / "ingest"
  segment_dir = tmp_path / "segment"

  code = cli.main(
      ["ingest", str(synth_dir / "tape.csv"), "--output_dir", str(ingest_dir)]
  )
  assert code == cli.EXIT_OK
  tape = tape_lib.parse_tape(ingest_dir / "tape.bin")
  assert tape.equals(tape_lib.parse_tape(synth_dir / "tape.csv"))
  assert _manifest(ingest_dir)["results"]["ingest"]["n_days"] == 2

  assert (
      cli.main(
          [
              "segment",
              str(ingest_dir / "tape.bin"),
              "--output_dir",
              str(segment_dir),
              "--workers",
              "2",
          ]
      )
      == cli.EXIT_OK
  )
  results = _manifest(segment_dir)["results"]["segment"]
  table = pd.read_csv(segment_dir / "metaorders.csv")
  assert len(table) == results["n_metaorders"]
  for name in (
      "size_distributions.csv",
      "execution_profile.csv",
      "active_series.csv",
      "concurrent_activity.csv",
  ):
    assert (segment_dir / name).exists()


def test_duplicate_trade_id_is_a_data_error(tmp_path, capsys):
  """Test that a malformed tape exits with the data error code."""
  path = tmp_path / "tape.csv"
  path.write_text(_HEADER + "1,7,1,B,100,1\n2,7,2,S,100,1\n")

  code = cli.main(["ingest", str(path), "--output_dir", str(tmp_path / "out")])

  assert code == cli.EXIT_DATA
  error = capsys.readouterr().err
  assert "stage ingest failed" in error
  assert "Line 3: duplicate trade_id 7 (first seen on line 2)" in error
  assert not (tmp_path / "out" / "manifest.json").exists()


def test_missing_input_is_a_data_error(tmp_path, capsys):
  """Test that an unreadable tape exits with the data error code."""
  code = cli.main(
      ["segment", str(tmp_path / "absent.csv"), "--output_dir", str(tmp_path)]
  )
  assert code == cli.EXIT_DATA
  assert "stage ingest failed" in capsys.readouterr().err


def test_tape_without_metaorders(tmp_path, capsys):
  """Test that segmenting an empty tape is a data error."""
  path = tmp_path / "tape.csv"
  path.write_text(_HEADER)

  assert cli.main(["ingest", str(path), "--output_dir", str(tmp_path)]) == 0
  code = cli.main(["segment", str(path), "--output_dir", str(tmp_path)])
  assert code == cli.EXIT_DATA
  assert "stage segment failed: no metaorders" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["segment"],
        ["segment", "tape.csv", "--t_inact", "-1"],
        ["segment", "tape.csv", "--n_points", "1"],
        ["impact", "tape.csv", "--min_children", "0"],
        ["synth", "--seed", "one"],
    ],
)
def test_usage_errors(argv, tmp_path):
  """Test that invalid command lines exit with the usage code."""
  assert cli.main(argv + ["--output_dir", str(tmp_path)]) == cli.EXIT_USAGE


def test_output_dir_from_environment(tmp_path, monkeypatch):
  """Test the output directory fallback."""
  monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
  assert cli.main(["synth", "--scenario", _SCENARIO]) == cli.EXIT_OK
  assert (tmp_path / "env" / "manifest.json").exists()


def test_oracle_command(tmp_path):
  """Test that the pipeline matches the naive oracle on a synthetic tape."""
  assert (
      cli.main(
          ["oracle", "--scenario", _SCENARIO, "--output_dir", str(tmp_path)]
      )
      == cli.EXIT_OK
  )
  results = _manifest(tmp_path)["results"]["oracle"]

  assert results["segmentation"]["precision"] == 1.0
  assert results["segmentation"]["recall"] == 1.0
  for name, difference in results["max_abs_differences"].items():
    assert difference <= 1e-12, name


def test_pipeline_recovers_planted_law(tmp_path):
  """Test the headline parameters of a noise-free single-trader tape."""
  synth_dir = tmp_path / "synth"
  run_dir = tmp_path / "run"
  assert (
      cli.main([
          "synth",
          "--scenario",
          _QUIET_SCENARIO,
          "--output_dir",
          str(synth_dir),
      ])
      == cli.EXIT_OK
  )

  code = cli.main([
      "pipeline",
      str(synth_dir / "tape.bin"),
      "--output_dir",
      str(run_dir),
      "--n_min",
      "10",
      "--bins_per_decade",
      "4",
  ])

  assert code == cli.EXIT_OK
  manifest = _manifest(run_dir)
  assert manifest["config"]["min_children"] == 2
  parameters = manifest["results"]["parameters"]
  assert parameters["delta"] == pytest.approx(0.5, abs=0.02)
  assert parameters["y_tilde"] == pytest.approx(0.01, rel=0.05)
  planted = pd.read_csv(synth_dir / "planted_metaorders.csv")
  summaries = pd.read_csv(run_dir / "impact_summaries.csv")
  assert manifest["results"]["impact"]["n_metaorders"] == len(planted)
  assert summaries["n_children"].min() >= 2


def test_pipeline_on_default_scenario(tmp_path):
  """Test that the default synthetic tape runs through every stage."""
  synth_dir = tmp_path / "synth"
  run_dir = tmp_path / "run"
  assert cli.main(["synth", "--output_dir", str(synth_dir)]) == cli.EXIT_OK

  code = cli.main([
      "pipeline",
      str(synth_dir / "tape.bin"),
      "--output_dir",
      str(run_dir),
      "--n_points",
      "11",
  ])

  assert code == cli.EXIT_OK
  results = _manifest(run_dir)["results"]
  assert results["parameters"]["delta"] == pytest.approx(0.5, abs=0.15)
  assert results["parameters"]["y0"] is not None
  assert results["impact"]["n_metaorders"] < results["segment"]["n_metaorders"]
  assert "surface" in results


def test_surface_without_populated_cells(tmp_path):
  """Test that an unfittable surface is skipped instead of failing."""
  synth_dir = _synth(tmp_path / "synth")
  run_dir = tmp_path / "run"

  code = cli.main(
      ["surface", str(synth_dir / "tape.bin"), "--output_dir", str(run_dir)]
  )

  assert code == cli.EXIT_OK
  results = _manifest(run_dir)["results"]
  assert "surface_fit" not in results["surface"]
  assert cli.fitted_parameters(results)["delta_prime"] is None
  assert (run_dir / "impact_surface.csv").exists()


def test_min_children_selects_the_population(tmp_path):
  """Test that single-trade metaorders only enter with min_children 1."""
  synth_dir = _synth(tmp_path / "synth")
  counts = {}
  for min_children in (1, 2):
    run_dir = tmp_path / f"min_children_{min_children}"
    code = cli.main([
        "acf",
        str(synth_dir / "tape.bin"),
        "--output_dir",
        str(run_dir),
        "--min_children",
        str(min_children),
    ])
    assert code == cli.EXIT_OK
    manifest = _manifest(run_dir)
    assert manifest["config"]["min_children"] == min_children
    counts[min_children] = manifest["results"]["acf"]["sign_acf"]["n"]

  planted = pd.read_csv(synth_dir / "planted_metaorders.csv")
  assert counts[2] == (planted["n_children"] >= 2).sum()
  assert counts[1] > counts[2]


def test_fitted_parameters():
  """Test the headline parameters of partial results."""
  parameters = cli.fitted_parameters(
      {"impact": {"peak_fit": {"exponent": 0.5, "prefactor": 1e-3}}}
  )
  assert parameters["delta"] == 0.5
  assert parameters["y_tilde"] == 1e-3
  assert parameters["gamma"] is None


def test_json_ready():
  """Test that non-finite values become null."""
  assert cli.json_ready({"a": float("nan"), "b": [1, float("inf")]}) == {
      "a": None,
      "b": [1, None],
  }
