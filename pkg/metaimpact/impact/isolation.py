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

"""Selection of isolated metaorders by their share of the market imbalance."""

import dataclasses
from typing import Any, Mapping

import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.impact import imbalance
from metaimpact.segment import metaorder
from metaimpact.tape import tape as tape_lib

ISOLATED = 1
INFORMED = 0
EXCLUDED = -1

LABEL_NAMES = {ISOLATED: "isolated", INFORMED: "informed", EXCLUDED: "excluded"}


@dataclasses.dataclass(frozen=True, eq=False)
class IsolationLabels:
  """Isolated / informed partition of a metaorder population.

  Attributes:
    ids: Array of metaorder ids.
    labels: Array of ISOLATED, INFORMED or EXCLUDED. Metaorders with T = 0 or
      whose window extends past the tape end are excluded.
    ratio: Array of s * Q / (s * V_signed) over the window, NaN when the
      window imbalance is not co-directional or the metaorder is excluded.
    window_imbalance: Array of signed market imbalances V_signed over the
      windows, in BTC.
    threshold: Minimum ratio of an isolated metaorder.
    horizon_mult: Window length in units of T.
  """

  ids: np.ndarray
  labels: np.ndarray
  ratio: np.ndarray
  window_imbalance: np.ndarray
  threshold: float
  horizon_mult: float

  def __post_init__(self):
    utils.make_read_only(
        self.ids, self.labels, self.ratio, self.window_imbalance
    )

  @property
  def isolated(self) -> np.ndarray:
    return self.labels == ISOLATED

  @property
  def informed(self) -> np.ndarray:
    return self.labels == INFORMED

  @property
  def isolated_fraction(self) -> float:
    """Share of isolated metaorders among the labelled ones."""
    labelled = np.count_nonzero(self.labels != EXCLUDED)
    return np.count_nonzero(self.isolated) / labelled if labelled else np.nan

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({
        "id": self.ids,
        "label": [LABEL_NAMES[label] for label in self.labels],
        "ratio": self.ratio,
        "window_imbalance": self.window_imbalance,
    })

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "threshold": self.threshold,
        "horizon_mult": self.horizon_mult,
        "n_isolated": int(np.count_nonzero(self.isolated)),
        "n_informed": int(np.count_nonzero(self.informed)),
        "n_excluded": int(np.count_nonzero(self.labels == EXCLUDED)),
        "isolated_fraction": self.isolated_fraction,
    }


def select_isolated(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    threshold: float = 0.75,
    horizon_mult: float = 10.0,
) -> IsolationLabels:
  """Labels metaorders carrying most of the imbalance of their window as isolated.

  The window is [t_start, t_start + horizon_mult * T]. A metaorder is isolated
  iff the window imbalance is co-directional and s * Q / (s * V_signed) is at
  least threshold. Ratios above 1, from anti-trending residual flow, still
  count as isolated.

  Args:
    tape: The tape the metaorders were segmented from.
    metaorders: Metaorder population.
    threshold: Minimum share of the window imbalance.
    horizon_mult: Window length in units of the metaorder duration.

  Returns:
    The isolation labels.
  """
  if threshold < 0:
    raise ValueError(f"threshold should be non-negative. Got {threshold}.")
  if not horizon_mult > 0:
    raise ValueError(f"horizon_mult should be positive. Got {horizon_mult}.")

  window_end = metaorders.t_start + np.round(
      horizon_mult * metaorders.duration_ns
  ).astype(np.int64)
  window_units = imbalance.market_imbalance_units(
      tape, metaorders.t_start, window_end
  )
  aligned_units = metaorders.sign * window_units
  excluded = ~metaorders.has_duration | (window_end > tape.end_time)
  co_directional = ~excluded & (aligned_units > 0)

  ratio = np.full(len(metaorders), np.nan)
  ratio[co_directional] = (
      metaorders.q_units[co_directional] / aligned_units[co_directional]
  )
  labels = np.full(len(metaorders), INFORMED, dtype=np.int8)
  labels[co_directional & (ratio >= threshold)] = ISOLATED
  labels[excluded] = EXCLUDED
  return IsolationLabels(
      ids=metaorders.ids.copy(),
      labels=labels,
      ratio=ratio,
      window_imbalance=window_units / metaorders.volume_scale,
      threshold=threshold,
      horizon_mult=horizon_mult,
  )
