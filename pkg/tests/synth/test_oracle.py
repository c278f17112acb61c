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

"""Test the naive oracle and its agreement with the pipeline."""

import numpy as np
from metaimpact import estimators
from metaimpact import impact
from metaimpact import segment
from metaimpact import synth
from metaimpact.synth import oracle
import pytest

_SCENARIO = synth.SyntheticScenario(
    seed=1, n_traders=8, n_days=2, daily_volume=100.0, y_tilde=0.001
)


@pytest.fixture(name="generated", scope="module")
def fixture_generated():
  return synth.generate(_SCENARIO)


def test_segmentation_agreement():
  """Test exact-match precision and recall on hand-made labels."""
  agreement = synth.segmentation_agreement(
      np.array([3, 3, 4, 5, 7]), np.array([0, 0, 1, 1, -1])
  )
  assert (agreement.n_planted, agreement.n_recovered) == (2, 3)
  assert agreement.n_matched == 1
  assert agreement.precision == pytest.approx(1 / 3)
  assert agreement.recall == 0.5
  assert agreement.as_dict()["recall"] == 0.5

  merged = synth.segmentation_agreement(np.array([2, 2]), np.array([0, 1]))
  assert merged.n_matched == 0
  unassigned = synth.segmentation_agreement(np.array([-1]), np.array([0]))
  assert (unassigned.precision, unassigned.recall) == (1.0, 0.0)

  with pytest.raises(ValueError, match="Expected labels of shape"):
    synth.segmentation_agreement(np.zeros(2), np.zeros(3))


def test_naive_helpers():
  """Test the scanning helpers on small inputs."""
  counts = oracle.naive_active_counts(
      np.array([0, 5, 10]), np.array([10, 5, 20]), np.array([0, 5, 10, 15, 25])
  )
  np.testing.assert_array_equal(counts, [1, 2, 2, 1, 0])

  values = np.random.default_rng(0).standard_normal(200)
  np.testing.assert_allclose(
      oracle.naive_autocorrelation(values, 5),
      estimators.autocorrelation(values, 5),
      atol=1e-12,
  )


def test_brute_force_refuses_large_tapes(generated, monkeypatch):
  """Test the size guard of the oracle."""
  tape, truth = generated
  monkeypatch.setattr(oracle, "MAX_ORACLE_TRADES", 10)
  with pytest.raises(ValueError, match="refuses tapes above 10 trades"):
    synth.brute_force_stats(tape, truth)


def test_pipeline_matches_oracle(generated):
  """Test the fast statistics against the naive ones on planted metaorders."""
  tape, truth = generated
  reference = synth.brute_force_stats(tape, truth, max_lag=10)
  metaorders = segment.segment(
      tape, segment.SegmentationConfig(t_inact=_SCENARIO.t_inact)
  )
  planted = metaorders.take(
      metaorders.trader_id < synth.BACKGROUND_TRADER_BASE
  )
  summaries = impact.impact_summaries(
      tape, planted, impact.impact_paths(tape, planted)
  )
  active = segment.active_metaorder_series(planted, 600.0)

  assert len(planted) == len(reference.ids) > 20
  np.testing.assert_array_equal(planted.sign, truth.metaorders["sign"])
  np.testing.assert_array_equal(
      impact.market_imbalance_units(tape, planted.t_start, planted.t_end),
      reference.imbalance_units,
  )
  np.testing.assert_array_equal(active.times, reference.active_times)
  np.testing.assert_array_equal(active.n_buy, reference.n_buy)
  np.testing.assert_array_equal(active.n_sell, reference.n_sell)
  np.testing.assert_allclose(
      estimators.autocorrelation(planted.sign, 10),
      reference.sign_acf,
      atol=1e-12,
  )
  for name in ("peak", "exec", "perm"):
    np.testing.assert_allclose(
        getattr(summaries, name), getattr(reference, name), atol=1e-12
    )
