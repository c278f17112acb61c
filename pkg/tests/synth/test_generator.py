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

"""Test the synthetic tape generator."""

import importlib

import numpy as np
import pandas as pd
from metaimpact import impact
from metaimpact import segment
from metaimpact import synth
from metaimpact import utils
from metaimpact.tape import aggregates
import pytest

_SMALL = synth.SyntheticScenario(
    seed=11, n_traders=5, n_days=2, daily_volume=200.0, y_tilde=0.001
)


def _noise_free(**changes):
  return synth.SyntheticScenario(
      seed=3,
      n_traders=1,
      n_days=2,
      daily_volume=0.0,
      noise_sigma=0.0,
      spread=0.0,
      y_tilde=0.01,
      pi_inf=1.0,
      child_count_mix=(0.0, 0.0, 0.0, 1.0),
      min_duration=300.0,
      max_duration=600.0,
  ).replace(**changes)


def _planted_summaries(tape, scenario):
  metaorders = segment.segment(
      tape, segment.SegmentationConfig(t_inact=scenario.t_inact)
  )
  planted = metaorders.take(
      metaorders.trader_id < synth.BACKGROUND_TRADER_BASE
  )
  return impact.impact_summaries(
      tape, planted, impact.impact_paths(tape, planted)
  )


def test_child_volumes():
  """Test the equal integer split of a metaorder."""
  np.testing.assert_array_equal(synth.child_volumes(10, 3), [4, 3, 3])
  np.testing.assert_array_equal(synth.child_volumes(6, 3), [2, 2, 2])
  np.testing.assert_array_equal(synth.child_volumes(7, 1), [7])


def test_child_fractions():
  """Test the schedules and the jitter of child times."""
  rng = np.random.default_rng(0)
  np.testing.assert_allclose(
      synth.child_fractions(5, "linear", 0.0, rng), [0, 0.25, 0.5, 0.75, 1]
  )
  np.testing.assert_allclose(
      synth.child_fractions(3, "front_loaded", 0.0, rng), [0, 0.25, 1]
  )
  np.testing.assert_array_equal(
      synth.child_fractions(1, "linear", 0.5, rng), [0]
  )

  jittered = synth.child_fractions(8, "linear", 0.9, rng)
  assert jittered[0] == 0.0 and jittered[-1] == 1.0
  assert np.all(np.diff(jittered) > 0)

  with pytest.raises(NotImplementedError, match="Schedule random is not"):
    synth.child_fractions(3, "random", 0.0, rng)


def test_fractional_gaussian_noise():
  """Test the variance and lag-one correlation of long-memory noise."""
  noise = synth.fractional_gaussian_noise(
      4096, 0.8, np.random.default_rng(0)
  )
  centred = noise - noise.mean()

  assert noise.shape == (4096,)
  assert centred.var() == pytest.approx(1.0, abs=0.2)
  lag_one = np.dot(centred[:-1], centred[1:]) / np.dot(centred, centred)
  assert lag_one == pytest.approx(0.5 * (2**1.6 - 2), abs=0.1)
  empty = synth.fractional_gaussian_noise(0, 0.8, np.random.default_rng(0))
  assert empty.shape == (0,)


def test_metaorder_signs():
  """Test both sign modes."""
  rng = np.random.default_rng(1)
  for mode in synth.SIGN_MODES:
    signs = synth.metaorder_signs(
        synth.SyntheticScenario(sign_mode=mode), 500, rng
    )
    assert signs.shape == (500,)
    assert set(np.unique(signs).tolist()) == {-1, 1}


def test_plant_metaorders_keeps_traders_apart():
  """Test the minimum gap between metaorders of one trader."""
  scenario = _SMALL
  streams = synth.random_streams(scenario.seed)
  planted = synth.plant_metaorders(scenario, streams)
  min_gap = utils.seconds_to_ns(scenario.min_gap_seconds)

  assert np.all(np.diff(planted["t_start"]) >= 0)
  assert np.all(planted["duration_ns"][planted["n_children"] == 1] == 0)
  assert np.all(planted["q_units"] >= planted["n_children"])
  assert np.all(
      planted["t_start"] + planted["duration_ns"] < scenario.end_time
  )
  for trader in np.unique(planted["trader_id"]):
    mine = planted["trader_id"] == trader
    ends = planted["t_start"][mine] + planted["duration_ns"][mine]
    assert np.all(planted["t_start"][mine][1:] - ends[:-1] >= min_gap)


def test_generate_is_deterministic():
  """Test that a seed fixes the tape and that another seed changes it."""
  tape, truth = synth.generate(_SMALL)
  again, truth_again = synth.generate(_SMALL)
  other, _ = synth.generate(_SMALL.replace(seed=12))

  for name in (
      "timestamp", "aggressor_id", "side", "price_units", "volume_units"
  ):
    np.testing.assert_array_equal(getattr(tape, name), getattr(again, name))
  np.testing.assert_array_equal(truth.trade_labels, truth_again.trade_labels)
  pd.testing.assert_frame_equal(truth.metaorders, truth_again.metaorders)
  assert len(other) != len(tape) or not np.array_equal(
      other.timestamp, tape.timestamp
  )


def test_ground_truth_matches_tape():
  """Test that the planted table describes the labelled trades."""
  tape, truth = synth.generate(_SMALL)
  table = truth.metaorders
  labelled = truth.trade_labels >= 0
  labels = truth.trade_labels[labelled]

  np.testing.assert_array_equal(table["id"], np.arange(len(table)))
  np.testing.assert_array_equal(
      np.bincount(labels, minlength=len(table)), table["n_children"]
  )
  np.testing.assert_allclose(
      np.bincount(
          labels, weights=tape.volume_units[labelled], minlength=len(table)
      )
      / tape.metadata.volume_scale,
      table["Q"],
  )
  np.testing.assert_array_equal(
      tape.aggressor_id[labelled], table["trader_id"].to_numpy()[labels]
  )
  np.testing.assert_array_equal(
      tape.side[labelled], table["sign"].to_numpy()[labels]
  )
  assert np.all(tape.aggressor_id[~labelled] >= synth.BACKGROUND_TRADER_BASE)
  assert np.all(tape.passive_id >= synth.LIQUIDITY_PROVIDER_BASE)
  assert np.all(tape.best_bid < tape.best_ask)
  first_fill = np.array(
      [np.flatnonzero(truth.trade_labels == i)[0] for i in table["id"]]
  )
  assert np.all(np.diff(tape.timestamp[first_fill]) >= 0)
  assert list(truth.days["date"]) == ["2013-01-01", "2013-01-02"]


def test_write_labels(tmp_path):
  """Test the (trade_id, metaorder_id) export."""
  tape, truth = synth.generate(_SMALL)
  path = tmp_path / "labels.csv"
  truth.write_labels(tape, path)

  frame = pd.read_csv(path)
  assert list(frame.columns) == ["trade_id", "metaorder_id"]
  np.testing.assert_array_equal(frame["trade_id"], tape.trade_id)
  np.testing.assert_array_equal(frame["metaorder_id"], truth.trade_labels)


def test_planted_metaorders_are_recovered():
  """Test that segmentation recovers every planted metaorder."""
  tape, truth = synth.generate(_SMALL)
  metaorders = segment.segment(
      tape, segment.SegmentationConfig(t_inact=_SMALL.t_inact)
  )
  agreement = synth.segmentation_agreement(
      metaorders.trade_labels, truth.trade_labels
  )

  assert agreement.n_planted == len(truth.metaorders)
  assert agreement.precision == 1.0
  assert agreement.recall == 1.0


def test_noise_free_peak_impact_is_square_root():
  """Test the planted square-root peak without noise or other metaorders."""
  tape, truth = synth.generate(_noise_free())
  summaries = _planted_summaries(tape, _noise_free())

  assert len(summaries) == len(truth.metaorders) > 5
  np.testing.assert_allclose(
      summaries.peak, 0.01 * np.sqrt(truth.metaorders["Q"]), atol=1e-6
  )
  finite = np.isfinite(summaries.perm)
  assert finite.sum() >= len(summaries) - 1
  np.testing.assert_allclose(
      summaries.perm[finite], summaries.peak[finite], atol=1e-9
  )


def test_transient_impact_decays():
  """Test that impact relaxes after execution when nothing is permanent."""
  scenario = _noise_free(
      pi_inf=0.0, daily_volume=5000.0, background_in_flow=False
  )
  tape, _ = synth.generate(scenario)
  summaries = _planted_summaries(tape, scenario)
  finite = np.isfinite(summaries.perm)

  assert finite.sum() > 5
  assert np.all(
      np.abs(summaries.perm[finite]) <= 1e-3 * summaries.peak[finite] + 1e-6
  )


def test_planted_daily_y_ratio():
  """Test that the solved prefactors reproduce the planted daily ratios."""
  scenario = synth.SyntheticScenario(seed=5, n_traders=5, n_days=2)
  tape, truth = synth.generate(scenario)
  days = truth.days

  np.testing.assert_allclose(
      days["y_tilde"],
      days["sigma_D"] * days["y_ratio"] / days["V_D"] ** scenario.delta,
      rtol=1e-6,
  )
  np.testing.assert_allclose(
      days["V_D"],
      [a.volume for a in aggregates.daily_aggregates(tape)],
  )


def test_y_ratio_needs_noise():
  """Test that a daily ratio cannot be planted on a noise-free tape."""
  with pytest.raises(ValueError, match="without price noise"):
    synth.generate(
        synth.SyntheticScenario(
            n_traders=5, n_days=1, noise_sigma=0.0, spread=0.0
        )
    )


def test_solve_y_tilde():
  """Test the quadratic for the daily prefactor."""
  noise_sq, cross, impact_sq, ratio, volume = 1e-4, 1e-5, 0.01, 0.9, 1000.0
  y = synth.solve_y_tilde(noise_sq, cross, impact_sq, ratio, volume, 0.5)

  sigma = np.sqrt(noise_sq + 2 * y * cross + y**2 * impact_sq)
  assert y == pytest.approx(sigma * ratio / volume**0.5, rel=1e-12)
  with pytest.raises(ValueError, match="Impact variance dominates"):
    synth.solve_y_tilde(noise_sq, cross, 1e4, ratio, 1.0, 0.5)


def test_noise_free_fills_follow_square_root():
  """Test that every later fill prints the square root of the volume so far."""
  scenario = _noise_free()
  tape, truth = synth.generate(scenario)

  for metaorder in truth.metaorders.itertuples():
    fills = np.flatnonzero(truth.trade_labels == metaorder.id)
    impact_at_fill = metaorder.sign * (
        tape.log_price[fills] - tape.log_price[fills[0]]
    )
    executed = np.cumsum(tape.volume[fills])
    assert impact_at_fill[0] == 0.0
    np.testing.assert_allclose(
        impact_at_fill[1:], 0.01 * np.sqrt(executed[1:]), atol=1e-6
    )


def test_noise_free_paths_follow_square_root():
  """Test sampled paths against the planted law at the sampled fills."""
  scenario = _noise_free()
  tape, truth = synth.generate(scenario)
  metaorders = segment.segment(
      tape, segment.SegmentationConfig(t_inact=scenario.t_inact)
  )
  paths = impact.impact_paths(tape, metaorders, n_points=11)

  for index in range(len(metaorders)):
    fills = metaorders.children(index)
    executed = np.cumsum(tape.volume[fills])
    sampled = np.searchsorted(
        executed, paths.fractions * executed[-1] - 1e-12
    )
    expected = np.where(
        sampled > 0, 0.01 * np.sqrt(executed[sampled]), 0.0
    )
    np.testing.assert_allclose(paths.impact[index], expected, atol=1e-6)


def test_generator_module_is_importable():
  """Test that the package exports leave the generator module reachable."""
  module = importlib.import_module("metaimpact.synth.generator")

  assert synth.generate is module.generate
  assert synth.GroundTruth is module.GroundTruth
  assert importlib.import_module("metaimpact.synth.oracle").brute_force_stats
