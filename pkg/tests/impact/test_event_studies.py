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

"""Test event studies in normalized time."""

import importlib
import math
import re

import numpy as np
from metaimpact import impact
from metaimpact import segment
from metaimpact import tape as tape_lib
import pytest

_SECOND = 10**9


def _tape():
  rows = [
      (0, 9, 1, 100.0, 1.0),
      (50, 4, -1, 99.5, 0.5),
      (100, 1, 1, 100.5, 1.0),
      (150, 2, -1, 100.8, 0.5),
      (200, 1, 1, 101.0, 1.0),
      (300, 3, 1, 101.5, 2.0),
  ]
  return tape_lib.Tape.from_trades([
      tape_lib.Trade(
          timestamp=seconds * _SECOND,
          trade_id=position + 1,
          aggressor_id=trader,
          side=side,
          price=price,
          volume=volume,
      )
      for position, (seconds, trader, side, price, volume) in enumerate(rows)
  ])


def _study(**kwargs):
  tape = _tape()
  metaorders = segment.segment(tape)
  kwargs = {
      "pre_mult": 1.0,
      "post_mult": 1.0,
      "n_points": 3,
      "n_min": 1,
      **kwargs,
  }
  return impact.event_study(tape, metaorders, **kwargs)


def test_event_grid():
  """Test the normalized time grid around the execution."""
  np.testing.assert_allclose(
      impact.event_grid(3, 1.0, 1.0), [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]
  )
  np.testing.assert_allclose(impact.event_grid(5, 0.0, 0.5)[[0, -1]], [0, 1.5])

  with pytest.raises(
      ValueError, match=re.escape("n_points should be at least 2. Got 1.")
  ):
    impact.event_grid(1, 1.0, 1.0)
  with pytest.raises(ValueError, match="should be non-negative"):
    impact.event_grid(3, -1.0, 1.0)


def test_event_study_price_curves():
  """Test the sign-adjusted price and VWAP paths of a single metaorder."""
  curves = _study()

  assert list(curves) == ["all"]
  curve = curves["all"]
  # Only metaorder 2 has T > 0 and a window inside the tape.
  assert curve.n == 1
  expected = np.log(
      np.array([100.0, 99.5, 100.5, 100.8, 101.0, 101.0, 101.5]) / 100.5
  )
  np.testing.assert_allclose(curve.curves["price"], expected, atol=1e-12)
  np.testing.assert_allclose(curve.curves["vwap"], expected, atol=1e-12)
  assert curve.peak == pytest.approx(math.log(101.0 / 100.5))
  assert curve.permanent == pytest.approx(math.log(101.5 / 100.5))


def test_event_study_flow_curves():
  """Test total, own and residual flows in units of |Q|."""
  curve = _study()["all"]

  np.testing.assert_allclose(
      curve.curves["total_flow"], [0.25, 0.0, 0.0, 0.25, 0.75, 0.75, 1.75]
  )
  np.testing.assert_allclose(
      curve.curves["own_flow"], [0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]
  )
  np.testing.assert_allclose(
      curve.curves["residual_flow"], [0.25, 0.0, 0.0, -0.25, -0.25, -0.25, 0.75]
  )


def test_event_study_without_quotes():
  """Test that quote curves are undefined on a tape without quotes."""
  curve = _study()["all"]

  assert np.all(np.isnan(curve.curves["bid"]))
  assert np.all(np.isnan(curve.curves["ask"]))


def test_event_study_omits_small_buckets():
  """Test that buckets under n_min are not reported."""
  assert not _study(n_min=2)
  frame = impact.event_study_frame({})
  assert list(frame.columns) == [
      "bucket",
      "grid_t",
      "curve_name",
      "value",
      "n",
  ]


def test_event_study_window_must_fit_tape():
  """Test that windows reaching past the tape end are not eligible."""
  assert not _study(post_mult=2.0)


def test_event_study_bucket_validation():
  """Test that bucket masks cover the metaorders."""
  with pytest.raises(ValueError, match="Expected bucket all mask of shape"):
    _study(buckets={"all": np.ones(2, dtype=bool)})


def test_event_study_frame():
  """Test the long-format export."""
  frame = impact.event_study_frame(_study())

  assert len(frame) == 7 * len(impact.CURVE_NAMES)
  assert set(frame["curve_name"]) == set(impact.CURVE_NAMES)
  assert frame["bucket"].unique().tolist() == ["all"]


def test_volume_and_speed_buckets():
  """Test buckets on log-spaced |Q| and execution speed bins."""
  metaorders = segment.segment(_tape())

  volume = impact.volume_buckets(metaorders)
  assert list(volume) == ["Q=[0.1,1)", "Q=[1,10)"]
  np.testing.assert_array_equal(
      volume["Q=[0.1,1)"], [False, True, False, True, False]
  )
  speed = impact.speed_buckets(metaorders)
  assert list(speed) == ["mu=[0.01,0.1)"]
  np.testing.assert_array_equal(
      speed["mu=[0.01,0.1)"], [False, False, True, False, False]
  )


def test_standard_buckets():
  """Test the trend and isolation buckets."""
  tape = _tape()
  metaorders = segment.segment(tape)
  labels = impact.select_isolated(tape, metaorders, horizon_mult=1.0)
  buckets = impact.standard_buckets(tape, metaorders, labels)

  assert list(buckets) == [
      "all",
      "trending",
      "mean_reverting",
      "isolated",
      "informed",
  ]
  # The price fell from 100 to 99.5 before the buy metaorder started.
  np.testing.assert_array_equal(
      buckets["mean_reverting"], [False, False, True, False, False]
  )
  assert not np.any(buckets["trending"])


def test_event_study_module_is_importable():
  """Test that the package exports leave the event study module reachable."""
  module = importlib.import_module("metaimpact.impact.event_studies")

  assert impact.event_study is module.event_study
  assert impact.EventStudyCurve is module.EventStudyCurve
