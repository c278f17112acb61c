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

"""Test the execution impact surface and its fits."""

import numpy as np
from metaimpact import impact
from metaimpact import segment
from metaimpact import tape as tape_lib
from metaimpact.utils import binning
import pytest

_SECOND = 10**9


def _tape():
  rows = [
      (0, 1, 1, 1.0),
      (10, 1, 1, 1.0),
      (50, 2, -1, 0.5),
      (60, 3, 1, 1.0),
      (70, 3, 1, 1.0),
      (200, 4, -1, 10.0),
  ]
  return tape_lib.Tape.from_trades([
      tape_lib.Trade(
          timestamp=seconds * _SECOND,
          trade_id=position + 1,
          aggressor_id=trader,
          side=side,
          price=100.0 + position,
          volume=volume,
      )
      for position, (seconds, trader, side, volume) in enumerate(rows)
  ])


def _exact_surface(second_axis="mu_v"):
  """Surface whose cells follow 0.1 * Q**0.5 / X**0.25 on the bin centers."""
  q_edges = 10.0 ** np.arange(4)
  second_edges = 10.0 ** np.arange(-3, 0)
  q_centers = binning.geometric_centers(q_edges)
  second_centers = binning.geometric_centers(second_edges)
  mean_exec = 0.1 * q_centers[:, None] ** 0.5 / second_centers[None, :] ** 0.25
  return impact.ImpactSurface(
      second_axis=second_axis,
      q_edges=q_edges,
      second_edges=second_edges,
      count=np.full((3, 2), 10),
      mean_exec=mean_exec,
      mean_imbalance=(mean_exec / 0.2) ** 2,
      n_min=5,
  )


def test_impact_surface_cells():
  """Test cell counts and means on (|Q|, mu_V)."""
  tape = _tape()
  metaorders = segment.segment(tape)
  summaries = impact.impact_summaries(tape, metaorders)
  surface = impact.impact_surface(
      summaries,
      metaorders,
      tape,
      q_bins=binning.LogBinning(bins_per_decade=1, n_min=2),
      second_bins=binning.LogBinning(bins_per_decade=1, n_min=1),
  )

  # |Q| is 2, 0.5, 2 and 10 BTC; every participation rate is 1.
  np.testing.assert_array_equal(surface.count, [[1], [2], [1]])
  np.testing.assert_array_equal(surface.mask, [[True], [False], [True]])
  assert surface.mean_exec[1, 0] == pytest.approx(
      summaries.exec[[0, 2]].mean()
  )
  assert surface.mean_imbalance[1, 0] == pytest.approx(2.0)
  assert np.isnan(surface.mean_exec[0, 0])

  frame = surface.to_frame()
  assert list(frame.columns) == [
      "q_bin",
      "muv_bin",
      "mean_exec",
      "mean_imbalance",
      "n",
  ]
  assert frame["n"].tolist() == [2]


def test_impact_surface_masks_with_larger_n_min():
  """Test that the stricter of both binnings masks the cells."""
  tape = _tape()
  metaorders = segment.segment(tape)
  summaries = impact.impact_summaries(tape, metaorders)
  surface = impact.impact_surface(
      summaries,
      metaorders,
      tape,
      q_bins=binning.LogBinning(bins_per_decade=1, n_min=1),
      second_bins=binning.LogBinning(bins_per_decade=1, n_min=2),
  )

  assert surface.n_min == 2
  np.testing.assert_array_equal(surface.mask, [[True], [False], [True]])
  assert np.isnan(surface.mean_exec[2, 0])


def test_impact_surface_duration_axis():
  """Test that instantaneous metaorders drop out of the duration surface."""
  tape = _tape()
  metaorders = segment.segment(tape)
  summaries = impact.impact_summaries(tape, metaorders)
  surface = impact.impact_surface(
      summaries,
      metaorders,
      tape,
      q_bins=binning.LogBinning(bins_per_decade=1, n_min=1),
      second_bins=binning.LogBinning(bins_per_decade=1, n_min=1),
      second_axis="duration",
  )

  assert surface.count.sum() == 2
  assert "duration_bin" in surface.to_frame().columns


def test_impact_surface_validation():
  """Test unsupported axes and mismatched populations."""
  tape = _tape()
  metaorders = segment.segment(tape)
  summaries = impact.impact_summaries(tape, metaorders)

  with pytest.raises(NotImplementedError, match="Surface axis T"):
    impact.impact_surface(summaries, metaorders, tape, second_axis="T")
  with pytest.raises(ValueError, match="Expected summaries for 2 metaorders"):
    impact.impact_surface(summaries, metaorders.take([0, 1]), tape)
  with pytest.raises(ValueError, match="Expected count of shape"):
    impact.ImpactSurface(
        second_axis="mu_v",
        q_edges=np.array([1.0, 10.0]),
        second_edges=np.array([1.0, 10.0]),
        count=np.zeros((2, 1)),
        mean_exec=np.zeros((1, 1)),
        mean_imbalance=np.zeros((1, 1)),
        n_min=1,
    )


def test_fit_surface():
  """Test the recovery of both exponents from exact cells."""
  exponents = impact.fit_surface(_exact_surface())

  assert exponents.delta == pytest.approx(0.5, abs=1e-9)
  assert exponents.delta_prime == pytest.approx(0.25, abs=1e-9)
  assert exponents.as_dict()["delta"] == pytest.approx(0.5, abs=1e-9)


def test_imbalance_collapse():
  """Test the collapse of cells on a square root of the imbalance."""
  collapse = impact.imbalance_collapse(_exact_surface())

  assert collapse.fit.exponent == pytest.approx(0.5, abs=1e-9)
  assert collapse.fit.prefactor == pytest.approx(0.2, rel=1e-9)
  assert collapse.max_abs_deviation == pytest.approx(0.0, abs=1e-9)
  assert collapse.relative_deviation.shape == (3, 2)
