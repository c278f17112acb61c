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

"""Reconstruction of metaorders from trader-identified aggressive trades."""

import time
from typing import List, Tuple

from absl import logging
import joblib
import numba as nb
import numpy as np

from metaimpact.segment import metaorder
from metaimpact.tape import tape as tape_lib


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True, nogil=True)
def _split_runs_numba(
    trader: np.ndarray,
    timestamp: np.ndarray,
    side: np.ndarray,
    gap_ns: int,
    reversal_starts_new: bool,
    run_ids: np.ndarray,
) -> int:
  """Labels trades sorted by (trader, time) with their run index, -1 if unassigned.

  run_ids is updated in-place. Returns the number of runs.
  """
  run = -1
  current_sign = 0
  waiting = False
  for i in range(trader.shape[0]):
    if (
        i == 0
        or trader[i] != trader[i - 1]
        or timestamp[i] - timestamp[i - 1] >= gap_ns
    ):
      run += 1
      current_sign = side[i]
      waiting = False
      run_ids[i] = run
    elif waiting:
      run_ids[i] = -1
    elif side[i] != current_sign:
      if reversal_starts_new:
        run += 1
        current_sign = side[i]
        run_ids[i] = run
      else:
        waiting = True
        run_ids[i] = -1
    else:
      run_ids[i] = run
  return run + 1


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True, nogil=True)
def _flag_round_trips_numba(
    trader: np.ndarray,
    sign: np.ndarray,
    t_start: np.ndarray,
    t_end: np.ndarray,
    q_units: np.ndarray,
    gap_ns: int,
    keep: np.ndarray,
):
  """Flags runs that reverse and fully offset the trader's previous kept run.

  keep is updated in-place. Runs are sorted by (trader, time).
  """
  last = -1
  for k in range(trader.shape[0]):
    keep[k] = True
    if last >= 0 and trader[last] == trader[k]:
      if (
          sign[k] != sign[last]
          and t_start[k] - t_end[last] < gap_ns
          and t_end[k] - t_end[last] < gap_ns
          and q_units[k] <= q_units[last]
      ):
        keep[k] = False
        continue
    last = k


def _segment_shard(
    trader: np.ndarray,
    timestamp: np.ndarray,
    side: np.ndarray,
    volume_units: np.ndarray,
    config: metaorder.SegmentationConfig,
) -> Tuple[np.ndarray, np.ndarray]:
  """Segments trades of whole traders sorted by (trader, time).

  Returns:
    run_ids: Run index of each trade, -1 for unassigned trades.
    keep: Mask of emitted runs.
  """
  run_ids = np.empty(trader.shape[0], dtype=np.int64)
  num_runs = _split_runs_numba(
      trader,
      timestamp,
      side,
      config.t_inact_ns,
      config.reversal_starts_new,
      run_ids,
  )
  keep = np.ones(num_runs, dtype=np.bool_)
  if config.drop_mean_reverting and num_runs:
    assigned = run_ids >= 0
    starts = np.flatnonzero(np.diff(run_ids[assigned], prepend=-1) != 0)
    ends = np.append(starts[1:], assigned.sum()) - 1
    positions = np.flatnonzero(assigned)
    _flag_round_trips_numba(
        trader[positions[starts]],
        side[positions[starts]],
        timestamp[positions[starts]],
        timestamp[positions[ends]],
        np.add.reduceat(volume_units[positions], starts),
        config.t_inact_ns,
        keep,
    )
  return run_ids, keep


def _shard_bounds(trader: np.ndarray, workers: int) -> List[Tuple[int, int]]:
  """Splits trades sorted by trader into contiguous shards of whole traders."""
  num = trader.shape[0]
  if workers <= 1 or num == 0:
    return [(0, num)]
  trader_starts = np.flatnonzero(np.diff(trader, prepend=trader[0] - 1) != 0)
  targets = np.linspace(0, num, workers + 1)[1:-1]
  cuts = trader_starts[
      np.clip(np.searchsorted(trader_starts, targets), 0, len(trader_starts) - 1)
  ]
  bounds = np.unique(np.concatenate([[0], cuts, [num]]))
  return list(zip(bounds[:-1], bounds[1:]))


def segment(
    tape: tape_lib.Tape,
    config: metaorder.SegmentationConfig = metaorder.SegmentationConfig(),
    workers: int = 1,
) -> metaorder.MetaOrders:
  """Reconstructs metaorders from the aggressive trades of each trader.

  A trader's metaorder opens at their first aggressive trade, and at every
  aggressive trade following a gap of at least t_inact since their previous
  one. It closes at the last trade before the next such gap, or before the
  trader trades in the opposite direction. Traders are segmented
  independently, so the result does not depend on the number of workers.

  Args:
    tape: The trade tape.
    config: Segmentation parameters.
    workers: Number of threads segmenting disjoint sets of traders.

  Returns:
    Metaorders ordered by (t_start, tape position of the first fill), with the
    trade labels of the tape.
  """
  start_time = time.time()
  num_trades = len(tape)
  if num_trades == 0:
    return metaorder.MetaOrders.empty(tape.metadata.volume_scale)

  order = np.argsort(tape.aggressor_id, kind="stable")
  trader = tape.aggressor_id[order]
  timestamp = tape.timestamp[order]
  side = tape.side[order].astype(np.int64)
  volume_units = tape.volume_units[order]

  bounds = _shard_bounds(trader, workers)
  shards = joblib.Parallel(n_jobs=len(bounds), backend="threading")(
      joblib.delayed(_segment_shard)(
          trader[lo:hi], timestamp[lo:hi], side[lo:hi], volume_units[lo:hi], config
      )
      for lo, hi in bounds
  )

  run_ids = np.empty(num_trades, dtype=np.int64)
  keeps = []
  offset = 0
  for (lo, hi), (shard_runs, shard_keep) in zip(bounds, shards):
    run_ids[lo:hi] = np.where(shard_runs >= 0, shard_runs + offset, -1)
    keeps.append(shard_keep)
    offset += shard_keep.shape[0]
  keep = np.concatenate(keeps)

  # Trades of dropped runs become unassigned.
  assigned = run_ids >= 0
  assigned[assigned] = keep[run_ids[assigned]]
  positions = np.flatnonzero(assigned)
  runs = run_ids[positions]
  starts = np.flatnonzero(np.diff(runs, prepend=-1) != 0)
  ends = np.append(starts[1:], positions.shape[0]) - 1

  first_fill = order[positions[starts]]
  t_start = timestamp[positions[starts]]
  final_order = np.lexsort((first_fill, t_start))
  num_metaorders = final_order.shape[0]

  # Metaorder id of each assigned trade after the global ordering.
  rank = np.empty(num_metaorders, dtype=np.int64)
  rank[final_order] = np.arange(num_metaorders)
  run_label = np.repeat(rank, np.diff(np.append(starts, positions.shape[0])))
  trade_labels = np.full(num_trades, -1, dtype=np.int64)
  trade_labels[order[positions]] = run_label

  child_order = np.lexsort((order[positions], run_label))
  child_index = order[positions][child_order]
  counts = np.bincount(run_label, minlength=num_metaorders)
  child_offsets = np.concatenate([[0], np.cumsum(counts)])

  t_start = t_start[final_order]
  t_end = timestamp[positions[ends]][final_order]
  lo, hi = tape.window_bounds(t_start, t_end)
  metaorders = metaorder.MetaOrders(
      ids=np.arange(num_metaorders),
      trader_id=trader[positions[starts]][final_order],
      sign=side[positions[starts]][final_order],
      q_units=np.add.reduceat(volume_units[positions], starts)[final_order]
      if num_metaorders
      else np.zeros(0, dtype=np.int64),
      t_start=t_start,
      t_end=t_end,
      market_volume_units=tape.cum_volume_units[hi] - tape.cum_volume_units[lo],
      child_offsets=child_offsets,
      child_index=child_index,
      volume_scale=tape.metadata.volume_scale,
      trade_labels=trade_labels,
  )

  num_unassigned = num_trades - positions.shape[0]
  logging.info(
      "Segmenting %d trades into %d metaorders (%d unassigned) took %.3f s",
      num_trades,
      num_metaorders,
      num_unassigned,
      time.time() - start_time,
  )
  return metaorders
