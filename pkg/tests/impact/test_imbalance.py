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

"""Test the signed market imbalance over time windows."""

import numpy as np
from metaimpact import impact
from metaimpact import tape as tape_lib

_SECOND = 10**9


def _tape():
  rows = [(0, 1, 1.0), (10, 1, 1.0), (20, 1, 2.0), (100, -1, 1.0)]
  return tape_lib.Tape.from_trades([
      tape_lib.Trade(
          timestamp=seconds * _SECOND,
          trade_id=position + 1,
          aggressor_id=position,
          side=side,
          price=100.0,
          volume=volume,
      )
      for position, (seconds, side, volume) in enumerate(rows)
  ])


def test_market_imbalance_inclusive_windows():
  """Test that both window ends are included."""
  tape = _tape()
  start = np.array([0, 0, 21, 20]) * _SECOND
  end = np.array([20, 100, 99, 20]) * _SECOND

  np.testing.assert_allclose(
      impact.market_imbalance(tape, start, end), [4.0, 3.0, 0.0, 2.0]
  )
  np.testing.assert_array_equal(
      impact.market_imbalance_units(tape, start, end),
      np.array([4, 3, 0, 2]) * tape.metadata.volume_scale,
  )


def test_market_imbalance_outside_tape():
  """Test that windows without trades have no imbalance."""
  tape = _tape()

  np.testing.assert_allclose(
      impact.market_imbalance(
          tape, np.array([200 * _SECOND]), np.array([300 * _SECOND])
      ),
      [0.0],
  )
