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

"""Naive reference computations used to cross-check the pipeline.

Everything here loops over trades and metaorders directly, independently of
the prefix sums, binary searches and kernels of the main code paths.
"""

import dataclasses
import math
from typing import Any, Dict, Mapping

import numpy as np

from metaimpact import utils
from metaimpact.impact import paths as paths_lib
from metaimpact.synth import generator as generator_lib
from metaimpact.tape import tape as tape_lib

MAX_ORACLE_TRADES = 100_000


@dataclasses.dataclass(frozen=True, eq=False)
class BruteForceStats:
  """Reference statistics of a synthetic tape.

  Attributes:
    ids: Array of planted metaorder ids.
    imbalance_units: Array of signed market volume over each planted
      metaorder's [t_start, t_end], in volume units.
    active_times: Array of grid times of the active counts.
    n_buy: Array of active planted buy metaorders at each grid time.
    n_sell: Array of active planted sell metaorders at each grid time.
    sign_acf: Array of the autocorrelation of planted signs, lags 0..max_lag.
    peak: Array of peak impacts from the planted children.
    exec: Array of execution impacts from the planted children.
    perm: Array of permanent impacts, NaN past the tape end.
  """

  ids: np.ndarray
  imbalance_units: np.ndarray
  active_times: np.ndarray
  n_buy: np.ndarray
  n_sell: np.ndarray
  sign_acf: np.ndarray
  peak: np.ndarray
  exec: np.ndarray
  perm: np.ndarray


def naive_imbalance_units(tape: tape_lib.Tape, start: int, end: int) -> int:
  """Signed volume of the trades in [start, end] by a full scan."""
  total = 0
  for timestamp, side, volume in zip(
      tape.timestamp.tolist(), tape.side.tolist(), tape.volume_units.tolist()
  ):
    if start <= timestamp <= end:
      total += side * volume
  return total


def naive_active_counts(
    t_start: np.ndarray, t_end: np.ndarray, times: np.ndarray
) -> np.ndarray:
  """Number of intervals [t_start, t_end] containing each time, pairwise."""
  counts = np.zeros(times.shape[0], dtype=np.int64)
  for k, t in enumerate(times.tolist()):
    for lo, hi in zip(t_start.tolist(), t_end.tolist()):
      if lo <= t <= hi:
        counts[k] += 1
  return counts


def naive_autocorrelation(values: np.ndarray, max_lag: int) -> np.ndarray:
  """Autocorrelation by direct double sums."""
  values = [float(v) for v in values]
  n = len(values)
  mean = sum(values) / n
  centred = [v - mean for v in values]
  variance = sum(c * c for c in centred) / n
  correlations = [1.0]
  for lag in range(1, max_lag + 1):
    covariance = sum(centred[i] * centred[i + lag] for i in range(n - lag))
    correlations.append(covariance / (n - lag) / variance)
  return np.array(correlations)


def naive_impact(
    tape: tape_lib.Tape,
    children: np.ndarray,
    sign: int,
    n_points: int = 41,
    permanent_window=paths_lib.PERMANENT_WINDOW,
):
  """Peak, execution and permanent impact of one metaorder from its children."""
  prices = [float(tape.price[i]) for i in children]
  volumes = [int(tape.volume_units[i]) for i in children]
  q_units = sum(volumes)
  first = math.log(prices[0])

  path = []
  for k in range(n_points):
    cumulative = 0
    for price, volume in zip(prices, volumes):
      cumulative += volume
      if cumulative * (n_points - 1) >= k * q_units:
        path.append(sign * (math.log(price) - first))
        break
  step = 1.0 / (n_points - 1)
  execution = sum(
      0.5 * step * (path[k] + path[k + 1]) for k in range(n_points - 1)
  )

  t_start = int(tape.timestamp[children[0]])
  t_end = int(tape.timestamp[children[-1]])
  duration = t_end - t_start
  window_start = t_end + int(round(permanent_window[0] * duration))
  window_end = t_end + int(round(permanent_window[1] * duration))
  if window_end > tape.end_time:
    perm = float("nan")
  else:
    notional, total, prevailing = 0.0, 0.0, None
    for timestamp, price, volume in zip(
        tape.timestamp.tolist(), tape.price.tolist(), tape.volume.tolist()
    ):
      if timestamp < window_start:
        prevailing = price
      elif timestamp <= window_end:
        notional += price * volume
        total += volume
    vwap = notional / total if total > 0 else prevailing
    perm = sign * (math.log(vwap) - first)
  return path[-1], execution, perm


def brute_force_stats(
    tape: tape_lib.Tape,
    ground_truth: generator_lib.GroundTruth,
    resolution: float = 600.0,
    max_lag: int = 20,
    n_points: int = 41,
) -> BruteForceStats:
  """Reference statistics computed from the planted labels, bypassing the segmenter.

  Args:
    tape: A synthetic tape.
    ground_truth: Its ground truth.
    resolution: Grid step of the active counts, in seconds.
    max_lag: Largest lag of the sign autocorrelation.
    n_points: Number of impact path samples.

  Returns:
    The reference statistics.

  Raises:
    ValueError: If the tape has more than MAX_ORACLE_TRADES trades.
  """
  if len(tape) > MAX_ORACLE_TRADES:
    raise ValueError(
        f"brute_force_stats refuses tapes above {MAX_ORACLE_TRADES} trades."
        f" Got {len(tape)}."
    )
  planted = ground_truth.metaorders
  num = len(planted)
  children = [[] for _ in range(num)]
  for position, label in enumerate(ground_truth.trade_labels.tolist()):
    if label >= 0:
      children[label].append(position)

  signs = planted["sign"].to_numpy()
  t_start = np.array([tape.timestamp[c[0]] for c in children], dtype=np.int64)
  t_end = np.array([tape.timestamp[c[-1]] for c in children], dtype=np.int64)
  imbalance_units = np.array(
      [naive_imbalance_units(tape, lo, hi) for lo, hi in zip(t_start, t_end)],
      dtype=np.int64,
  )

  step = utils.seconds_to_ns(resolution)
  times = (
      np.arange(t_start.min(), t_end.max() + 1, step, dtype=np.int64)
      if num
      else np.zeros(0, dtype=np.int64)
  )
  buy = signs == tape_lib.BUY
  n_buy = naive_active_counts(t_start[buy], t_end[buy], times)
  n_sell = naive_active_counts(t_start[~buy], t_end[~buy], times)

  impacts = np.array(
      [
          naive_impact(tape, np.array(c), int(s), n_points)
          for c, s in zip(children, signs)
      ]
  ).reshape(-1, 3)
  return BruteForceStats(
      ids=planted["id"].to_numpy(),
      imbalance_units=imbalance_units,
      active_times=times,
      n_buy=n_buy,
      n_sell=n_sell,
      sign_acf=(
          naive_autocorrelation(signs, max_lag)
          if num > max_lag
          else np.full(max_lag + 1, np.nan)
      ),
      peak=impacts[:, 0],
      exec=impacts[:, 1],
      perm=impacts[:, 2],
  )


@dataclasses.dataclass(frozen=True)
class SegmentationAgreement:
  """Exact-match agreement of recovered and planted metaorders.

  Attributes:
    n_planted: Number of planted metaorders.
    n_recovered: Number of recovered metaorders among planted traders' trades.
    n_matched: Number of recovered metaorders whose trade set equals a planted
      one.
  """

  n_planted: int
  n_recovered: int
  n_matched: int

  @property
  def precision(self) -> float:
    return self.n_matched / self.n_recovered if self.n_recovered else 1.0

  @property
  def recall(self) -> float:
    return self.n_matched / self.n_planted if self.n_planted else 1.0

  def as_dict(self) -> Mapping[str, Any]:
    return {
        **dataclasses.asdict(self),
        "precision": self.precision,
        "recall": self.recall,
    }


def segmentation_agreement(
    recovered_labels: np.ndarray, planted_labels: np.ndarray
) -> SegmentationAgreement:
  """Compares per-trade metaorder labels on the trades of planted metaorders.

  Background trades (planted label -1) are ignored. A planted metaorder is
  matched when all of its trades carry one recovered label that labels no
  other trade of a planted metaorder.
  """
  recovered_labels = np.asarray(recovered_labels, dtype=np.int64)
  planted_labels = np.asarray(planted_labels, dtype=np.int64)
  if recovered_labels.shape != planted_labels.shape:
    raise ValueError(
        f"Expected labels of shape {planted_labels.shape}. Got"
        f" {recovered_labels.shape}."
    )
  planted_trades = planted_labels >= 0
  pairs = np.unique(
      np.stack(
          [planted_labels[planted_trades], recovered_labels[planted_trades]],
          axis=1,
      ),
      axis=0,
  )
  planted_ids, planted_counts = np.unique(pairs[:, 0], return_counts=True)
  recovered_ids, recovered_counts = np.unique(pairs[:, 1], return_counts=True)
  pairs_per_planted: Dict[int, int] = dict(
      zip(planted_ids.tolist(), planted_counts.tolist())
  )
  pairs_per_recovered: Dict[int, int] = dict(
      zip(recovered_ids.tolist(), recovered_counts.tolist())
  )
  matched = sum(
      1
      for planted, recovered in pairs.tolist()
      if recovered >= 0
      and pairs_per_planted[planted] == 1
      and pairs_per_recovered[recovered] == 1
  )
  return SegmentationAgreement(
      n_planted=int(planted_ids.shape[0]),
      n_recovered=int(np.count_nonzero(recovered_ids >= 0)),
      n_matched=int(matched),
  )
