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

"""Descriptive statistics of a metaorder population."""

import dataclasses
from typing import Dict, Mapping, Optional

import numba as nb
import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.segment import metaorder
from metaimpact.tape import tape as tape_lib
from metaimpact.utils import binning

CHILD_COUNT_BUCKETS = ("1", "2-4", "5-9", ">=10")
_CHILD_COUNT_EDGES = np.array([2, 5, 10])


def child_count_table(metaorders: metaorder.MetaOrders) -> Dict[str, float]:
  """Fractions of metaorders with 1, 2-4, 5-9 and at least 10 child trades.

  Args:
    metaorders: A non-empty metaorder population.

  Returns:
    Mapping from bucket label to fraction, summing to 1.

  Raises:
    ValueError: If there are no metaorders.
  """
  if not len(metaorders):
    raise ValueError("child_count_table requires at least one metaorder")
  buckets = np.searchsorted(_CHILD_COUNT_EDGES, metaorders.n_children, "right")
  counts = np.bincount(buckets, minlength=len(CHILD_COUNT_BUCKETS))
  return dict(zip(CHILD_COUNT_BUCKETS, (counts / counts.sum()).tolist()))


@dataclasses.dataclass(frozen=True, eq=False)
class ActiveSeries:
  """Number and execution speed of simultaneously active metaorders.

  Attributes:
    times: Array of grid timestamps.
    n_buy: Number of active buy metaorders at each grid time.
    n_sell: Number of active sell metaorders at each grid time.
    vol_buy: Summed execution speed mu (BTC/s) of active buy metaorders with
      T > 0.
    vol_sell: Summed execution speed mu (BTC/s) of active sell metaorders
      with T > 0.
  """

  times: np.ndarray
  n_buy: np.ndarray
  n_sell: np.ndarray
  vol_buy: np.ndarray
  vol_sell: np.ndarray

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame(dataclasses.asdict(self))


def _active_counts(
    t_start: np.ndarray,
    t_end: np.ndarray,
    weights: np.ndarray,
    times: np.ndarray,
):
  """Counts and weight sums of intervals [t_start, t_end] containing each time."""
  by_start = np.argsort(t_start, kind="stable")
  by_end = np.argsort(t_end, kind="stable")
  started = np.searchsorted(t_start[by_start], times, side="right")
  ended = np.searchsorted(t_end[by_end], times, side="left")
  cum_start = np.concatenate([[0.0], np.cumsum(weights[by_start])])
  cum_end = np.concatenate([[0.0], np.cumsum(weights[by_end])])
  return started - ended, cum_start[started] - cum_end[ended]


def active_metaorder_series(
    metaorders: metaorder.MetaOrders,
    resolution: float,
    start: Optional[int] = None,
    end: Optional[int] = None,
) -> ActiveSeries:
  """Counts metaorders with t_start <= t <= t_end on a regular time grid.

  Args:
    metaorders: Metaorder population.
    resolution: Grid step in seconds.
    start: First grid time, defaults to the earliest t_start.
    end: Last grid time bound, defaults to the latest t_end.

  Returns:
    The active series.
  """
  step = utils.seconds_to_ns(resolution)
  if step <= 0:
    raise ValueError(f"resolution should be positive. Got {resolution}.")
  if not len(metaorders):
    empty = np.zeros(0, dtype=np.int64)
    return ActiveSeries(empty, empty, empty, empty * 1.0, empty * 1.0)
  start = int(metaorders.t_start.min()) if start is None else start
  end = int(metaorders.t_end.max()) if end is None else end
  times = np.arange(start, end + 1, step, dtype=np.int64)

  rates = np.where(metaorders.has_duration, metaorders.mu, 0.0)
  series = {}
  for name, sign in (("buy", tape_lib.BUY), ("sell", tape_lib.SELL)):
    side = metaorders.sign == sign
    counts, volumes = _active_counts(
        metaorders.t_start[side], metaorders.t_end[side], rates[side], times
    )
    series[f"n_{name}"] = counts
    series[f"vol_{name}"] = volumes
  return ActiveSeries(times=times, **series)


@dataclasses.dataclass(frozen=True, eq=False)
class ExecutionProfile:
  """Average executed-volume fraction against normalized elapsed time.

  Attributes:
    grid: Array of normalized times in [0, 1].
    mean: Array of mean executed fractions.
    max_deviation: Largest absolute deviation of the mean from the diagonal.
    n: Number of metaorders averaged.
  """

  grid: np.ndarray
  mean: np.ndarray
  max_deviation: float
  n: int

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({"tau": self.grid, "executed_fraction": self.mean})


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True)
def _execution_profile_numba(
    child_offsets: np.ndarray,
    child_index: np.ndarray,
    timestamp: np.ndarray,
    volume_units: np.ndarray,
    selected: np.ndarray,
    grid: np.ndarray,
    totals: np.ndarray,
):
  """Sums per-metaorder executed fractions interpolated on grid into totals.

  The fraction after child j is (cum_j - v_0) / (|Q| - v_0), at elapsed time
  (t_j - t_0) / T. Fills sharing a timestamp keep the last fraction.
  """
  for k in selected:
    lo, hi = child_offsets[k], child_offsets[k + 1]
    t0 = timestamp[child_index[lo]]
    duration = timestamp[child_index[hi - 1]] - t0
    first = volume_units[child_index[lo]]
    total = 0
    for j in range(lo, hi):
      total += volume_units[child_index[j]]

    taus = np.empty(hi - lo)
    fractions = np.empty(hi - lo)
    count = 0
    cum = 0
    for j in range(lo, hi):
      cum += volume_units[child_index[j]]
      tau = (timestamp[child_index[j]] - t0) / duration
      fraction = (cum - first) / (total - first)
      if count > 0 and tau == taus[count - 1]:
        fractions[count - 1] = fraction
      else:
        taus[count] = tau
        fractions[count] = fraction
        count += 1
    totals += np.interp(grid, taus[:count], fractions[:count])


def execution_profile(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    n_points: int = 41,
    mask: Optional[np.ndarray] = None,
) -> ExecutionProfile:
  """Average executed-volume fraction of metaorders on a normalized time grid.

  Only metaorders with T > 0 and at least two child trades contribute.

  Args:
    tape: The tape the metaorders were segmented from.
    metaorders: Metaorder population.
    n_points: Number of grid points on [0, 1].
    mask: Optional mask restricting the population.

  Returns:
    The mean profile and its largest deviation from the diagonal.

  Raises:
    ValueError: If no metaorder is eligible.
  """
  eligible = metaorders.has_duration & (metaorders.n_children >= 2)
  if mask is not None:
    eligible &= np.asarray(mask, dtype=bool)
  selected = np.flatnonzero(eligible)
  if selected.shape[0] == 0:
    raise ValueError(
        "execution_profile requires a metaorder with T > 0 and at least 2"
        " child trades"
    )
  grid = np.linspace(0.0, 1.0, n_points)
  totals = np.zeros(n_points)
  _execution_profile_numba(
      metaorders.child_offsets,
      metaorders.child_index,
      tape.timestamp,
      tape.volume_units,
      selected,
      grid,
      totals,
  )
  mean = totals / selected.shape[0]
  return ExecutionProfile(
      grid=grid,
      mean=mean,
      max_deviation=float(np.abs(mean - grid).max()),
      n=int(selected.shape[0]),
  )


def profile_subpopulations(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    volume_split: float = 200.0,
    duration_split: float = 100.0,
    n_points: int = 41,
) -> Dict[str, ExecutionProfile]:
  """Execution profiles of the four populations split by |Q| and T.

  Populations without eligible metaorders are omitted.
  """
  large = metaorders.q >= volume_split
  long = metaorders.duration >= duration_split
  profiles = {}
  for q_label, q_mask in (("small_q", ~large), ("large_q", large)):
    for t_label, t_mask in (("short_t", ~long), ("long_t", long)):
      try:
        profiles[f"{q_label}/{t_label}"] = execution_profile(
            tape, metaorders, n_points, q_mask & t_mask
        )
      except ValueError:
        continue
  return profiles


@dataclasses.dataclass(frozen=True, eq=False)
class LogHistogram:
  """Histogram on log-spaced bins.

  Attributes:
    edges: Array of bin edges.
    counts: Array of counts per bin.
    density: Array of counts divided by total count and bin width.
  """

  edges: np.ndarray
  counts: np.ndarray
  density: np.ndarray

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({
        "lo": self.edges[:-1],
        "hi": self.edges[1:],
        "count": self.counts,
        "density": self.density,
    })


def log_histogram(
    values: np.ndarray, bins: binning.LogBinning
) -> LogHistogram:
  """Histogram of the positive finite values on log-spaced bins."""
  labels, edges = bins.digitize(values)
  valid = labels >= 0
  counts = np.bincount(labels[valid], minlength=max(len(edges) - 1, 0))
  with np.errstate(invalid="ignore", divide="ignore"):
    density = counts / (valid.sum() * np.diff(edges))
  return LogHistogram(edges=edges, counts=counts, density=density)


def size_distributions(
    metaorders: metaorder.MetaOrders,
    bins: binning.LogBinning = binning.LogBinning(bins_per_decade=8, n_min=1),
) -> Mapping[str, LogHistogram]:
  """Log-binned distributions of |Q|, T (T > 0) and participation rate."""
  return {
      "volume": log_histogram(metaorders.q, bins),
      "duration": log_histogram(metaorders.duration, bins),
      "participation": log_histogram(metaorders.mu_v, bins),
  }


@dataclasses.dataclass(frozen=True, eq=False)
class ConcurrentActivity:
  """Other metaorders active during execution, by direction.

  Attributes:
    grid: Array of normalized times in [0, 1].
    same_count: Mean number of other co-directional active metaorders.
    opposite_count: Mean number of active metaorders in the opposite
      direction.
    same_rate: Mean summed execution speed (BTC/s) of other co-directional
      active metaorders.
    opposite_rate: Mean summed execution speed (BTC/s) of opposite active
      metaorders.
    n: Number of metaorders averaged.
  """

  grid: np.ndarray
  same_count: np.ndarray
  opposite_count: np.ndarray
  same_rate: np.ndarray
  opposite_rate: np.ndarray
  n: int

  def to_frame(self) -> pd.DataFrame:
    frame = pd.DataFrame(dataclasses.asdict(self))
    return frame.rename(columns={"grid": "tau"})


def concurrent_activity(
    metaorders: metaorder.MetaOrders,
    n_points: int = 21,
    mask: Optional[np.ndarray] = None,
) -> ConcurrentActivity:
  """Averages the activity of other metaorders during each execution.

  Args:
    metaorders: Metaorder population.
    n_points: Number of grid points on [0, 1].
    mask: Optional mask restricting the metaorders averaged over. All
      metaorders count as potential concurrent activity.

  Returns:
    The concurrent activity profile.

  Raises:
    ValueError: If no metaorder with T > 0 is selected.
  """
  selected = metaorders.has_duration.copy()
  if mask is not None:
    selected &= np.asarray(mask, dtype=bool)
  index = np.flatnonzero(selected)
  if index.shape[0] == 0:
    raise ValueError("concurrent_activity requires a metaorder with T > 0")

  grid = np.linspace(0.0, 1.0, n_points)
  times = metaorders.t_start[index, None] + np.round(
      grid[None, :] * metaorders.duration_ns[index, None]
  ).astype(np.int64)
  rates = np.where(metaorders.has_duration, metaorders.mu, 0.0)
  own_rate = rates[index, None]

  by_side = {}
  for sign in (tape_lib.BUY, tape_lib.SELL):
    side = metaorders.sign == sign
    counts, volumes = _active_counts(
        metaorders.t_start[side],
        metaorders.t_end[side],
        rates[side],
        times.ravel(),
    )
    by_side[sign] = (counts.reshape(times.shape), volumes.reshape(times.shape))

  own_sign = metaorders.sign[index, None]
  buy_counts, buy_rates = by_side[tape_lib.BUY]
  sell_counts, sell_rates = by_side[tape_lib.SELL]
  is_buy = own_sign == tape_lib.BUY
  same_count = np.where(is_buy, buy_counts, sell_counts) - 1
  opposite_count = np.where(is_buy, sell_counts, buy_counts)
  same_rate = np.where(is_buy, buy_rates, sell_rates) - own_rate
  opposite_rate = np.where(is_buy, sell_rates, buy_rates)
  return ConcurrentActivity(
      grid=grid,
      same_count=same_count.mean(axis=0),
      opposite_count=opposite_count.mean(axis=0),
      same_rate=same_rate.mean(axis=0),
      opposite_rate=opposite_rate.mean(axis=0),
      n=int(index.shape[0]),
  )
