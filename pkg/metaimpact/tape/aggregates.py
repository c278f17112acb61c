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

"""Daily aggregates of a tape: traded volume and realized volatility."""

import dataclasses
import datetime
from typing import Callable, List, Sequence

import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.tape import tape as tape_lib

_EPOCH = datetime.date(1970, 1, 1)

# Maps (timestamp, log_price, day) of a tape to per-day volatilities.
VolatilityEstimator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclasses.dataclass(frozen=True, eq=False)
class DailyAggregate:
  """Per-day summary of a tape.

  Attributes:
    day: Days since the Unix epoch (UTC).
    volume_units: Exact traded volume V_D in volume units.
    volume: Traded volume V_D in BTC.
    sigma: Daily realized volatility sigma_D of log prices.
    n_trades: Number of trades in the day.
    estimator: Name of the volatility estimator used for sigma.
  """

  day: int
  volume_units: int
  volume: float
  sigma: float
  n_trades: int
  estimator: str

  def __post_init__(self):
    if self.volume_units < 0:
      raise ValueError(
          f"volume_units should be non-negative. Got {self.volume_units}."
      )
    if not self.sigma >= 0:
      raise ValueError(f"sigma should be non-negative. Got {self.sigma}.")

  @property
  def date(self) -> datetime.date:
    return day_date(self.day)


def day_date(day: int) -> datetime.date:
  """Calendar date of a day index."""
  return _EPOCH + datetime.timedelta(days=int(day))


def trade_days(timestamp: np.ndarray) -> np.ndarray:
  """UTC calendar day index (days since epoch) of each timestamp."""
  return np.floor_divide(np.asarray(timestamp, dtype=np.int64), utils.NS_PER_DAY)


def last_in_bins(timestamp: np.ndarray, bin_seconds: int) -> np.ndarray:
  """Positions of the last trade of each non-empty intraday bin."""
  bins = np.floor_divide(timestamp, bin_seconds * utils.NS_PER_SECOND)
  return np.flatnonzero(np.diff(bins, append=bins[-1] + 1) != 0)


def close_to_close_volatility(
    timestamp: np.ndarray,
    log_price: np.ndarray,
    day: np.ndarray,
    bin_seconds: int = 300,
) -> np.ndarray:
  """Realized volatility from last-trade prices of fixed intraday bins.

  Returns between consecutive non-empty bins of the same day are squared and
  summed per day.

  Args:
    timestamp: Sorted trade timestamps.
    log_price: Log trade prices.
    day: Day index of each trade, non-decreasing.
    bin_seconds: Bin width, a divisor of one day.

  Returns:
    Array with the volatility of each distinct day, in order of appearance.
  """
  variance = daily_return_products(
      timestamp, log_price, log_price, day, bin_seconds
  )
  return np.sqrt(variance)


def daily_return_products(
    timestamp: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    day: np.ndarray,
    bin_seconds: int = 300,
) -> np.ndarray:
  """Per-day sums of products of the intraday bin returns of two series.

  Args:
    timestamp: Sorted trade timestamps.
    x: First series, one value per trade.
    y: Second series, one value per trade.
    day: Day index of each trade, non-decreasing.
    bin_seconds: Bin width, a divisor of one day.

  Returns:
    Array with the sum of dx * dy over the returns of each distinct day.
  """
  last = last_in_bins(timestamp, bin_seconds)
  bin_day = day[last]
  same_day = bin_day[1:] == bin_day[:-1]
  products = np.where(
      same_day, np.diff(x[last]) * np.diff(y[last]), 0.0
  )
  days = np.unique(day)
  return_labels = np.searchsorted(days, bin_day[1:])
  return np.bincount(return_labels, weights=products, minlength=len(days))


def build_volatility_estimator(
    name: str = "close_to_close", bin_seconds: int = 300
) -> VolatilityEstimator:
  """Build a supported daily volatility estimator."""
  if utils.SECONDS_PER_DAY % bin_seconds:
    raise ValueError(
        f"bin_seconds should divide one day ({utils.SECONDS_PER_DAY} s). Got"
        f" {bin_seconds}."
    )
  if name == "close_to_close":

    def estimator(timestamp, log_price, day):
      return close_to_close_volatility(timestamp, log_price, day, bin_seconds)

    return estimator
  else:
    raise NotImplementedError(f"Volatility estimator {name} is not supported.")


def daily_aggregates(
    tape: tape_lib.Tape,
    estimator: str = "close_to_close",
    bin_seconds: int = 300,
) -> List[DailyAggregate]:
  """Computes the daily traded volume and realized volatility of a tape.

  Args:
    tape: A non-empty tape.
    estimator: Name of the volatility estimator.
    bin_seconds: Bin width of the estimator, in seconds.

  Returns:
    One aggregate per UTC day holding at least one trade, in day order.

  Raises:
    ValueError: If the tape is empty.
  """
  if not len(tape):
    raise ValueError("daily_aggregates requires a non-empty tape")
  volatility = build_volatility_estimator(estimator, bin_seconds)

  day = trade_days(tape.timestamp)
  starts = np.flatnonzero(np.diff(day, prepend=day[0] - 1) != 0)
  volume_units = np.add.reduceat(tape.volume_units, starts)
  n_trades = np.diff(np.append(starts, len(tape)))
  sigma = volatility(tape.timestamp, tape.log_price, day)
  label = f"{estimator}/{bin_seconds}s"

  scale = tape.metadata.volume_scale
  return [
      DailyAggregate(
          day=int(day[start]),
          volume_units=int(units),
          volume=int(units) / scale,
          sigma=float(s),
          n_trades=int(n),
          estimator=label,
      )
      for start, units, s, n in zip(starts, volume_units, sigma, n_trades)
  ]


def aggregates_frame(aggregates: Sequence[DailyAggregate]) -> pd.DataFrame:
  """Returns daily aggregates as a table."""
  return pd.DataFrame({
      "date": [agg.date.isoformat() for agg in aggregates],
      "V_D": [agg.volume for agg in aggregates],
      "sigma_D": [agg.sigma for agg in aggregates],
      "n_trades": [agg.n_trades for agg in aggregates],
      "estimator": [agg.estimator for agg in aggregates],
  })
