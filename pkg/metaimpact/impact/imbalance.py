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

"""Signed market imbalance over time windows."""

import numpy as np

from metaimpact.tape import tape as tape_lib


def market_imbalance_units(
    tape: tape_lib.Tape, start: np.ndarray, end: np.ndarray
) -> np.ndarray:
  """Exact signed volume sum(v_i * eps_i) over the inclusive windows [start, end].

  Args:
    tape: The trade tape.
    start: Window start timestamp(s).
    end: Window end timestamp(s).

  Returns:
    Signed volume in volume units, 0 for empty windows.
  """
  lo, hi = tape.window_bounds(start, end)
  return tape.cum_signed_units[hi] - tape.cum_signed_units[lo]


def market_imbalance(
    tape: tape_lib.Tape, start: np.ndarray, end: np.ndarray
) -> np.ndarray:
  """Signed volume in BTC over the inclusive windows [start, end]."""
  units = market_imbalance_units(tape, start, end)
  return units / tape.metadata.volume_scale
