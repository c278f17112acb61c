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

"""Event studies: price, quote and flow paths averaged in normalized time."""

import dataclasses
import time
import types
from typing import Dict, Mapping, Optional

from absl import logging
import numba as nb
import numpy as np
import pandas as pd

from metaimpact.impact import isolation
from metaimpact.segment import metaorder
from metaimpact.tape import tape as tape_lib
from metaimpact.utils import binning

CURVE_NAMES = (
    "price",
    "bid",
    "ask",
    "vwap",
    "total_flow",
    "residual_flow",
    "own_flow",
)
_PRICE, _BID, _ASK, _VWAP, _TOTAL, _RESIDUAL, _OWN = range(len(CURVE_NAMES))

# Metaorders whose curves are held in memory at once.
_CHUNK_SIZE = 1024


@dataclasses.dataclass(frozen=True, eq=False)
class EventStudyCurve:
  """Mean curves of a bucket of metaorders in normalized time.

  Normalized time u is 0 at the first fill and 1 at the last fill. Prices are
  sign-adjusted log-returns and flows are signed volumes in units of |Q|; all
  curves are 0 at u = 0.

  Attributes:
    key: Bucket key.
    grid: Array of normalized times.
    curves: Mapping from curve name to its mean values on the grid.
    n: Number of metaorders averaged.
  """

  key: str
  grid: np.ndarray
  curves: Mapping[str, np.ndarray]
  n: int

  def __post_init__(self):
    missing = set(CURVE_NAMES) - set(self.curves)
    if missing:
      raise ValueError(f"Missing curve(s) {sorted(missing)}")
    for name, values in self.curves.items():
      if values.shape != self.grid.shape:
        raise ValueError(
            f"Expected curve {name} of shape {self.grid.shape}. Got"
            f" {values.shape}."
        )
    object.__setattr__(self, "curves", types.MappingProxyType(dict(self.curves)))

  @property
  def peak(self) -> float:
    """Mean price impact at the end of execution."""
    return float(np.interp(1.0, self.grid, self.curves["price"]))

  @property
  def permanent(self) -> float:
    """Mean price impact at the end of the post-execution window."""
    return float(self.curves["price"][-1])

  def to_frame(self) -> pd.DataFrame:
    """Long-format table with one row per (grid point, curve)."""
    return pd.DataFrame({
        "bucket": self.key,
        "grid_t": np.tile(self.grid, len(CURVE_NAMES)),
        "curve_name": np.repeat(CURVE_NAMES, self.grid.shape[0]),
        "value": np.concatenate([self.curves[name] for name in CURVE_NAMES]),
        "n": self.n,
    })


def event_grid(n_points: int, pre_mult: float, post_mult: float) -> np.ndarray:
  """Normalized times with step 1 / (n_points - 1) from -pre_mult to 1 + post_mult."""
  if n_points < 2:
    raise ValueError(f"n_points should be at least 2. Got {n_points}.")
  if pre_mult < 0 or post_mult < 0:
    raise ValueError(
        "pre_mult and post_mult should be non-negative. Got"
        f" {pre_mult} and {post_mult}."
    )
  steps = n_points - 1
  n_pre = int(round(pre_mult * steps))
  n_post = int(round(post_mult * steps))
  return np.arange(-n_pre, steps + n_post + 1) / steps


# Quotes may be NaN.
@nb.jit(parallel=False, cache=True, fastmath=False, nopython=True)
def _event_paths_numba(
    t_start: np.ndarray,
    duration_ns: np.ndarray,
    sign: np.ndarray,
    q_units: np.ndarray,
    child_offsets: np.ndarray,
    child_index: np.ndarray,
    timestamp: np.ndarray,
    log_price: np.ndarray,
    log_bid: np.ndarray,
    log_ask: np.ndarray,
    price: np.ndarray,
    volume_units: np.ndarray,
    cum_signed_units: np.ndarray,
    grid: np.ndarray,
    anchor: int,
    out: np.ndarray,
):
  """Fills out, of shape (num_metaorders, num_grid, num_curves), in-place.

  Values at grid point k are read from the trades at or before t_k, except at
  the anchor where flows stop strictly before t_start.
  """
  num_grid = grid.shape[0]
  for m in range(t_start.shape[0]):
    s = sign[m]
    times = np.empty(num_grid, dtype=np.int64)
    for k in range(num_grid):
      times[k] = t_start[m] + np.int64(np.round(grid[k] * duration_ns[m]))
    positions = np.searchsorted(timestamp, times, side="right")
    anchor_position = np.searchsorted(timestamp, t_start[m], side="left")

    lo, hi = child_offsets[m], child_offsets[m + 1]
    child_times = np.empty(hi - lo, dtype=np.int64)
    child_cum = np.zeros(hi - lo + 1, dtype=np.int64)
    for j in range(lo, hi):
      child_times[j - lo] = timestamp[child_index[j]]
      child_cum[j - lo + 1] = child_cum[j - lo] + volume_units[child_index[j]]

    for k in range(num_grid):
      last = positions[k] - 1
      out[m, k, _PRICE] = s * log_price[last]
      if s > 0:
        out[m, k, _BID] = log_bid[last]
        out[m, k, _ASK] = log_ask[last]
      else:
        out[m, k, _BID] = -log_ask[last]
        out[m, k, _ASK] = -log_bid[last]

      cell_lo = positions[k - 1] if k > 0 else positions[k]
      if positions[k] > cell_lo:
        notional = 0.0
        total = 0.0
        for i in range(cell_lo, positions[k]):
          notional += price[i] * volume_units[i]
          total += volume_units[i]
        out[m, k, _VWAP] = s * np.log(notional / total)
      else:
        out[m, k, _VWAP] = s * log_price[last]

      flow_position = anchor_position if k == anchor else positions[k]
      out[m, k, _TOTAL] = (
          s * (cum_signed_units[flow_position] - cum_signed_units[anchor_position])
      ) / q_units[m]
      if k > anchor:
        own = child_cum[np.searchsorted(child_times, times[k], side="right")]
        out[m, k, _OWN] = own / q_units[m]
      else:
        out[m, k, _OWN] = 0.0
      out[m, k, _RESIDUAL] = out[m, k, _TOTAL] - out[m, k, _OWN]

    for curve in (_PRICE, _BID, _ASK, _VWAP):
      base = out[m, anchor, curve]
      for k in range(num_grid):
        out[m, k, curve] -= base


def eligible_for_event_study(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    grid: np.ndarray,
) -> np.ndarray:
  """Metaorders with T > 0 whose whole event window lies inside the tape."""
  duration = metaorders.duration_ns
  window_start = metaorders.t_start + np.round(grid[0] * duration)
  window_end = metaorders.t_start + np.round(grid[-1] * duration)
  return (
      metaorders.has_duration
      & (window_start >= tape.start_time)
      & (window_end <= tape.end_time)
  )


def event_study(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    buckets: Optional[Mapping[str, np.ndarray]] = None,
    pre_mult: float = 1.0,
    post_mult: float = 10.0,
    n_points: int = 41,
    n_min: int = 50,
) -> Dict[str, EventStudyCurve]:
  """Averages aligned price, quote and flow paths per bucket of metaorders.

  Args:
    tape: The tape the metaorders were segmented from.
    metaorders: Metaorder population.
    buckets: Mapping from bucket key to a boolean mask over metaorders. All
      metaorders form a single "all" bucket when omitted.
    pre_mult: Length of the window before execution in units of T.
    post_mult: Length of the window after execution in units of T.
    n_points: Number of grid points over the execution, step 1/(n_points-1).
    n_min: Minimum number of eligible metaorders of a reported bucket.

  Returns:
    Mapping from bucket key to its curves, for buckets with at least n_min
    eligible metaorders, in the order of buckets.
  """
  start_time = time.time()
  grid = event_grid(n_points, pre_mult, post_mult)
  anchor = int(np.flatnonzero(grid == 0.0)[0])
  if buckets is None:
    buckets = {"all": np.ones(len(metaorders), dtype=bool)}
  eligible = eligible_for_event_study(tape, metaorders, grid)
  masks = {}
  for key, mask in buckets.items():
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(metaorders),):
      raise ValueError(
          f"Expected bucket {key} mask of shape ({len(metaorders)},). Got"
          f" {mask.shape}."
      )
    masks[key] = mask & eligible

  shape = (grid.shape[0], len(CURVE_NAMES))
  sums = {key: np.zeros(shape) for key in masks}
  counts = {key: np.zeros(shape, dtype=np.int64) for key in masks}
  used = np.flatnonzero(np.logical_or.reduce(list(masks.values())))

  with np.errstate(invalid="ignore", divide="ignore"):
    log_bid = np.log(tape.best_bid)
    log_ask = np.log(tape.best_ask)
  for chunk_start in range(0, used.shape[0], _CHUNK_SIZE):
    chunk = used[chunk_start : chunk_start + _CHUNK_SIZE]
    subset = metaorders.take(chunk)
    out = np.zeros((chunk.shape[0],) + shape)
    _event_paths_numba(
        subset.t_start,
        subset.duration_ns,
        subset.sign.astype(np.int64),
        subset.q_units,
        subset.child_offsets,
        subset.child_index,
        tape.timestamp,
        tape.log_price,
        log_bid,
        log_ask,
        tape.price,
        tape.volume_units,
        tape.cum_signed_units,
        grid,
        anchor,
        out,
    )
    finite = np.isfinite(out)
    out = np.where(finite, out, 0.0)
    for key, mask in masks.items():
      rows = mask[chunk]
      sums[key] += out[rows].sum(axis=0)
      counts[key] += finite[rows].sum(axis=0)

  results = {}
  for key, mask in masks.items():
    n = int(np.count_nonzero(mask))
    if n < n_min:
      logging.info("Omitting event-study bucket %s with %d metaorders", key, n)
      continue
    with np.errstate(invalid="ignore", divide="ignore"):
      means = np.where(counts[key] > 0, sums[key] / counts[key], np.nan)
    results[key] = EventStudyCurve(
        key=key,
        grid=grid,
        curves={name: means[:, c] for c, name in enumerate(CURVE_NAMES)},
        n=n,
    )
  logging.info(
      "Event study of %d metaorders in %d buckets took %.3f s",
      used.shape[0],
      len(results),
      time.time() - start_time,
  )
  return results


def event_study_frame(curves: Mapping[str, EventStudyCurve]) -> pd.DataFrame:
  frames = [curve.to_frame() for curve in curves.values()]
  if not frames:
    return pd.DataFrame(columns=["bucket", "grid_t", "curve_name", "value", "n"])
  return pd.concat(frames, ignore_index=True)


def _binned_buckets(
    values: np.ndarray, bins: binning.LogBinning, name: str
) -> Dict[str, np.ndarray]:
  labels, edges = bins.digitize(values)
  return {
      f"{name}=[{lo:.4g},{hi:.4g})": labels == b
      for b, (lo, hi) in enumerate(zip(edges[:-1], edges[1:]))
  }


def volume_buckets(
    metaorders: metaorder.MetaOrders,
    bins: binning.LogBinning = binning.LogBinning(bins_per_decade=1),
) -> Dict[str, np.ndarray]:
  """One bucket per log-spaced |Q| bin."""
  return _binned_buckets(metaorders.q, bins, "Q")


def speed_buckets(
    metaorders: metaorder.MetaOrders,
    bins: binning.LogBinning = binning.LogBinning(bins_per_decade=1),
) -> Dict[str, np.ndarray]:
  """One bucket per log-spaced execution-speed bin, T > 0 only."""
  return _binned_buckets(metaorders.mu, bins, "mu")


def trend_buckets(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    pre_mult: float = 1.0,
) -> Dict[str, np.ndarray]:
  """Splits metaorders by the direction of the price move before execution.

  The move runs from the prevailing price at t_start - pre_mult * T to the
  last price strictly before t_start. Trending metaorders trade in the
  direction of a non-zero move, mean-reverting ones against it.
  """
  before = tape.prevailing_index(
      metaorders.t_start - np.round(pre_mult * metaorders.duration_ns).astype(
          np.int64
      )
  )
  last = np.searchsorted(tape.timestamp, metaorders.t_start, side="left") - 1
  defined = metaorders.has_duration & (before >= 0) & (last >= 0)
  move = np.zeros(len(metaorders))
  move[defined] = metaorders.sign[defined] * (
      tape.log_price[last[defined]] - tape.log_price[before[defined]]
  )
  return {
      "trending": defined & (move > 0),
      "mean_reverting": defined & (move < 0),
  }


def isolation_buckets(
    labels: isolation.IsolationLabels,
) -> Dict[str, np.ndarray]:
  """Isolated and informed buckets of an isolation partition."""
  return {"isolated": labels.isolated, "informed": labels.informed}


def standard_buckets(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    labels: isolation.IsolationLabels,
    pre_mult: float = 1.0,
) -> Dict[str, np.ndarray]:
  """The unconditioned, trend and isolation buckets of the pipeline report."""
  buckets = {"all": np.ones(len(metaorders), dtype=bool)}
  buckets.update(trend_buckets(tape, metaorders, pre_mult))
  buckets.update(isolation_buckets(labels))
  return buckets
