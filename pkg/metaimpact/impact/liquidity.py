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

"""Daily square-root prefactors and Y-ratios."""

import dataclasses
import datetime
from typing import List, Sequence
import warnings

import numpy as np
import pandas as pd

from metaimpact.impact import paths as paths_lib
from metaimpact.tape import aggregates as aggregates_lib
from metaimpact.utils import binning


@dataclasses.dataclass(frozen=True, eq=False)
class DailyLiquidity:
  """Per-day liquidity measures.

  Attributes:
    day: Days since the Unix epoch (UTC).
    y_tilde: |Q|-weighted mean of I / sqrt(|Q|) over the metaorders ending on
      the day.
    sigma: Daily volatility sigma_D.
    volume: Daily traded volume V_D in BTC.
    y_ratio: y_tilde / (sigma / sqrt(volume)), NaN when sigma is 0.
    n: Number of eligible metaorders of the day.
  """

  day: int
  y_tilde: float
  sigma: float
  volume: float
  y_ratio: float
  n: int

  def __post_init__(self):
    if self.n < 1:
      raise ValueError(
          f"A liquidity day should have an eligible metaorder. Got n={self.n}."
      )

  @property
  def date(self) -> datetime.date:
    return aggregates_lib.day_date(self.day)


def daily_liquidity_series(
    summaries: paths_lib.ImpactSummaries,
    daily_aggregates: Sequence[aggregates_lib.DailyAggregate],
) -> List[DailyLiquidity]:
  """Computes the daily Y-tilde and Y-ratio series.

  Metaorders are eligible when T > 0 and their peak impact is finite. They are
  assigned to the UTC day of their last fill.

  Args:
    summaries: Impact summaries.
    daily_aggregates: Daily aggregates of the same tape.

  Returns:
    One DailyLiquidity per day holding an eligible metaorder, in day order.

  Raises:
    ValueError: If an eligible metaorder falls on a day without aggregates.
  """
  eligible = summaries.has_duration & np.isfinite(summaries.peak)
  if not np.any(eligible):
    return []
  by_day = {aggregate.day: aggregate for aggregate in daily_aggregates}
  days, labels = np.unique(summaries.day[eligible], return_inverse=True)
  missing = [int(day) for day in days if int(day) not in by_day]
  if missing:
    raise ValueError(f"No daily aggregate for day(s) {missing}.")

  weights = summaries.q[eligible]
  counts, y_tilde, _ = binning.binned_means(
      summaries.y_tilde[eligible], labels, days.shape[0], weights=weights
  )

  series = []
  for day, y, n in zip(days, y_tilde, counts):
    aggregate = by_day[int(day)]
    if aggregate.sigma > 0:
      y_ratio = y / (aggregate.sigma / np.sqrt(aggregate.volume))
    else:
      warnings.warn(
          f"Day {aggregate.date} has zero volatility; its Y-ratio is undefined."
      )
      y_ratio = np.nan
    series.append(
        DailyLiquidity(
            day=int(day),
            y_tilde=float(y),
            sigma=aggregate.sigma,
            volume=aggregate.volume,
            y_ratio=float(y_ratio),
            n=int(n),
        )
    )
  return series


def liquidity_frame(series: Sequence[DailyLiquidity]) -> pd.DataFrame:
  return pd.DataFrame({
      "date": [str(liquidity.date) for liquidity in series],
      "y_tilde": [liquidity.y_tilde for liquidity in series],
      "sigma_D": [liquidity.sigma for liquidity in series],
      "V_D": [liquidity.volume for liquidity in series],
      "y_ratio": [liquidity.y_ratio for liquidity in series],
      "n": [liquidity.n for liquidity in series],
  })


def y_ratios(series: Sequence[DailyLiquidity]) -> np.ndarray:
  """Defined Y-ratios of a series."""
  ratios = np.array([liquidity.y_ratio for liquidity in series], dtype=float)
  return ratios[np.isfinite(ratios)]
