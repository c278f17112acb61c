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

"""Synthetic trader-tagged tapes with planted metaorders and impact law."""

import dataclasses
import os
import time
from typing import Dict, Tuple, Union

from absl import logging
import numba as nb
import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.synth import scenario as scenario_lib
from metaimpact.tape import aggregates
from metaimpact.tape import tape as tape_lib

LIQUIDITY_PROVIDER_BASE = 1_000_000
BACKGROUND_TRADER_BASE = 2_000_000

_STREAMS = (
    "arrivals",
    "sizes",
    "schedules",
    "signs",
    "background",
    "noise",
    "liquidity",
    "counterparties",
)

# Decayed contributions below exp(-_DECAY_CUTOFF) of their start are dropped.
_DECAY_CUTOFF = 40.0

_CHILD_COUNT_RANGES = ((1, 1), (2, 4), (5, 9), (10, None))


@dataclasses.dataclass(frozen=True, eq=False)
class GroundTruth:
  """Planted structure of a synthetic tape.

  Attributes:
    trade_labels: Array with the planted metaorder id of each tape trade, -1
      for background trades.
    metaorders: Table of planted metaorders (id, trader_id, sign, Q, T,
      n_children, schedule), ids ordered by (t_start, first fill).
    days: Table of planted daily parameters (day, date, y_ratio, y_tilde,
      sigma_D, V_D).
    scenario: The generating scenario.
  """

  trade_labels: np.ndarray
  metaorders: pd.DataFrame
  days: pd.DataFrame
  scenario: scenario_lib.SyntheticScenario

  def __post_init__(self):
    utils.make_read_only(self.trade_labels)

  def label_frame(self, tape: tape_lib.Tape) -> pd.DataFrame:
    """The (trade_id, metaorder_id) export."""
    return pd.DataFrame(
        {"trade_id": tape.trade_id, "metaorder_id": self.trade_labels}
    )

  def write_labels(
      self, tape: tape_lib.Tape, path: Union[str, os.PathLike]
  ) -> None:
    self.label_frame(tape).to_csv(path, index=False, lineterminator="\n")


def random_streams(seed: int) -> Dict[str, np.random.Generator]:
  """Independent named random streams derived from a root seed."""
  children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
  return {
      name: np.random.default_rng(child)
      for name, child in zip(_STREAMS, children)
  }


def fractional_gaussian_noise(
    n: int, hurst: float, rng: np.random.Generator
) -> np.ndarray:
  """Samples fractional Gaussian noise by circulant embedding.

  Args:
    n: Number of samples.
    hurst: Hurst exponent in (0, 1).
    rng: Random generator.

  Returns:
    Array of n unit-variance samples with autocovariance
    (|k + 1|**2H - 2 |k|**2H + |k - 1|**2H) / 2.
  """
  if n == 0:
    return np.zeros(0)
  lags = np.arange(n + 1, dtype=np.float64)
  two_h = 2.0 * hurst
  autocovariance = 0.5 * (
      np.abs(lags + 1) ** two_h
      - 2.0 * lags**two_h
      + np.abs(lags - 1) ** two_h
  )
  row = np.concatenate([autocovariance, autocovariance[-2:0:-1]])
  eigenvalues = np.fft.fft(row).real
  if np.any(eigenvalues < -1e-10 * eigenvalues.max()):
    raise ValueError(f"Circulant embedding failed for hurst={hurst}")
  m = row.shape[0]
  normals = rng.standard_normal(m) + 1j * rng.standard_normal(m)
  return np.fft.fft(np.sqrt(np.clip(eigenvalues, 0.0, None) / m) * normals).real[
      :n
  ]


def metaorder_signs(
    scenario: scenario_lib.SyntheticScenario,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
  """Signs of n metaorders in start-time order."""
  if scenario.sign_mode == "independent":
    return np.where(rng.random(n) < 0.5, tape_lib.BUY, tape_lib.SELL)
  elif scenario.sign_mode == "long_memory":
    noise = fractional_gaussian_noise(n, 1.0 - scenario.gamma / 2.0, rng)
    return np.where(noise >= 0, tape_lib.BUY, tape_lib.SELL)
  else:
    raise NotImplementedError(f"Sign mode {scenario.sign_mode} is not supported.")


def _child_count(
    scenario: scenario_lib.SyntheticScenario, rng: np.random.Generator
) -> int:
  bucket = rng.choice(len(_CHILD_COUNT_RANGES), p=scenario.child_count_mix)
  lo, hi = _CHILD_COUNT_RANGES[bucket]
  hi = scenario.max_children if hi is None else hi
  return int(rng.integers(lo, hi + 1))


def plant_metaorders(
    scenario: scenario_lib.SyntheticScenario,
    streams: Dict[str, np.random.Generator],
) -> Dict[str, np.ndarray]:
  """Draws the metaorders of every trader, in start-time order.

  Consecutive metaorders of a trader are separated by min_gap_seconds plus an
  exponential gap. Metaorders that would end after the simulation are dropped.

  Returns:
    Mapping with arrays trader_id, t_start, duration_ns, n_children, q_units
    and sign.
  """
  arrivals, sizes = streams["arrivals"], streams["sizes"]
  volume_scale = 10**8
  min_gap = utils.seconds_to_ns(scenario.min_gap_seconds)
  records = []
  for trader in range(1, scenario.n_traders + 1):
    t = scenario.start_time + utils.seconds_to_ns(
        arrivals.exponential(scenario.mean_extra_gap_seconds)
    )
    while True:
      n_children = _child_count(scenario, sizes)
      if n_children == 1:
        duration = 0
      else:
        seconds = np.clip(
            np.exp(
                sizes.normal(scenario.duration_log_mean, scenario.duration_log_std)
            ),
            scenario.min_duration,
            scenario.max_duration,
        )
        duration = utils.seconds_to_ns(seconds)
      q = np.exp(sizes.normal(scenario.size_log_mean, scenario.size_log_std))
      q_units = max(int(round(q * volume_scale)), n_children)
      if t + duration >= scenario.end_time:
        break
      records.append((trader, t, duration, n_children, q_units))
      t += (
          duration
          + min_gap
          + utils.seconds_to_ns(
              arrivals.exponential(scenario.mean_extra_gap_seconds)
          )
      )

  planted = np.array(records, dtype=np.int64).reshape(-1, 5)
  order = np.lexsort((planted[:, 0], planted[:, 1]))
  planted = planted[order]
  return {
      "trader_id": planted[:, 0],
      "t_start": planted[:, 1],
      "duration_ns": planted[:, 2],
      "n_children": planted[:, 3],
      "q_units": planted[:, 4],
      "sign": metaorder_signs(scenario, planted.shape[0], streams["signs"]),
  }


def child_fractions(
    n_children: int,
    schedule: str,
    jitter: float,
    rng: np.random.Generator,
) -> np.ndarray:
  """Elapsed-time fractions of the child trades of a metaorder, from 0 to 1."""
  if n_children == 1:
    return np.zeros(1)
  grid = np.arange(n_children) / (n_children - 1)
  if schedule == "linear":
    fractions = grid
  elif schedule == "front_loaded":
    fractions = grid**2
  else:
    raise NotImplementedError(f"Schedule {schedule} is not supported.")
  if jitter > 0 and n_children > 2:
    spacing = np.diff(fractions)
    room = np.minimum(spacing[:-1], spacing[1:])
    fractions = fractions.copy()
    fractions[1:-1] += jitter * (rng.random(n_children - 2) - 0.5) * room
  return fractions


def child_volumes(q_units: int, n_children: int) -> np.ndarray:
  """Equal integer split of q_units, the remainder going to the first children."""
  volumes = np.full(n_children, q_units // n_children, dtype=np.int64)
  volumes[: q_units % n_children] += 1
  return volumes


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True)
def _unit_impact_numba(
    timestamp: np.ndarray,
    source_start: np.ndarray,
    source_end: np.ndarray,
    source_q: np.ndarray,
    source_sign: np.ndarray,
    source_rate: np.ndarray,
    source_pi: np.ndarray,
    child_offsets: np.ndarray,
    child_times: np.ndarray,
    child_progress: np.ndarray,
    delta: float,
    cutoff: float,
    unit_impact: np.ndarray,
):
  """Fills the per-trade increments of the unit-prefactor impact level in-place.

  Sources are sorted by start time. While a source executes it adds
  s * Q * x(t) to the aggregate flow, x interpolating its progress between
  child times. After its last fill it adds s * Q * (1 - pi)**(1 / delta)
  decaying at source_rate, plus the permanent level s * pi * Q**delta. The
  impact level is sign(flow) * |flow|**delta plus the permanent levels.
  """
  num_sources = source_start.shape[0]
  active = np.empty(num_sources, dtype=np.int64)
  cursor = np.zeros(num_sources, dtype=np.int64)
  n_active = 0
  decaying = np.empty(num_sources, dtype=np.int64)
  n_decaying = 0
  decay_amount = np.zeros(num_sources)
  next_source = 0
  permanent = 0.0
  previous = 0.0

  for i in range(timestamp.shape[0]):
    t = timestamp[i]
    while next_source < num_sources and source_start[next_source] <= t:
      active[n_active] = next_source
      cursor[next_source] = child_offsets[next_source]
      n_active += 1
      next_source += 1

    flow = 0.0
    k = 0
    while k < n_active:
      m = active[k]
      if t > source_end[m]:
        n_active -= 1
        active[k] = active[n_active]
        decay_amount[m] = (
            source_sign[m] * source_q[m] * (1.0 - source_pi[m]) ** (1.0 / delta)
        )
        permanent += source_sign[m] * source_pi[m] * source_q[m] ** delta
        decaying[n_decaying] = m
        n_decaying += 1
        continue
      last = child_offsets[m + 1] - 1
      p = cursor[m]
      while p < last and child_times[p + 1] <= t:
        p += 1
      cursor[m] = p
      if p < last:
        progress = child_progress[p] + (
            child_progress[p + 1] - child_progress[p]
        ) * (t - child_times[p]) / (child_times[p + 1] - child_times[p])
      else:
        progress = child_progress[p]
      flow += source_sign[m] * source_q[m] * progress
      k += 1

    k = 0
    while k < n_decaying:
      m = decaying[k]
      x = (t - source_end[m]) * source_rate[m]
      if x > cutoff:
        n_decaying -= 1
        decaying[k] = decaying[n_decaying]
      else:
        flow += decay_amount[m] * np.exp(-x)
        k += 1

    level = np.sign(flow) * np.abs(flow) ** delta + permanent
    unit_impact[i] = level - previous
    previous = level


def solve_y_tilde(
    noise_sq: float,
    cross: float,
    impact_sq: float,
    y_ratio: float,
    volume: float,
    delta: float,
) -> float:
  """Solves y_tilde = sigma * y_ratio / volume**delta for the realized sigma.

  The realized variance is noise_sq + 2 y_tilde cross + y_tilde**2 impact_sq.

  Raises:
    ValueError: If no solution exists.
  """
  scale = volume ** (2.0 * delta)
  y_sq = y_ratio**2
  a = scale - y_sq * impact_sq
  if not a > 0:
    raise ValueError(
        "Impact variance dominates the daily volatility; increase noise_sigma"
        " or daily_volume."
    )
  if not noise_sq > 0:
    raise ValueError(
        "Cannot plant a daily Y-ratio without price noise; set y_tilde instead."
    )
  discriminant = np.sqrt((y_sq * cross) ** 2 + a * y_sq * noise_sq)
  root = (y_sq * cross + np.sign(y_ratio) * discriminant) / a
  return float(root)


def generate(
    scenario: scenario_lib.SyntheticScenario,
) -> Tuple[tape_lib.Tape, GroundTruth]:
  """Generates a synthetic tape and its planted ground truth.

  Args:
    scenario: The scenario. Same scenario, same bytes.

  Returns:
    The tape and its ground truth.

  Raises:
    ValueError: If the daily Y-ratios cannot be planted.
  """
  start_time = time.time()
  streams = random_streams(scenario.seed)
  metadata = tape_lib.TapeMetadata()
  planted = plant_metaorders(scenario, streams)
  num_metaorders = planted["t_start"].shape[0]

  # Child trades.
  timestamps, volumes, labels, progress = [], [], [], []
  for m in range(num_metaorders):
    n = int(planted["n_children"][m])
    fractions = child_fractions(
        n, scenario.schedule, scenario.jitter, streams["schedules"]
    )
    times = planted["t_start"][m] + np.round(
        fractions * planted["duration_ns"][m]
    ).astype(np.int64)
    child = child_volumes(int(planted["q_units"][m]), n)
    # The first fill prints at the pre-trade level, later fills after the
    # volume executed so far.
    cum = np.cumsum(child)
    executed = np.concatenate([[0.0], cum[1:] / cum[-1]])
    timestamps.append(times)
    volumes.append(child)
    labels.append(np.full(n, m, dtype=np.int64))
    progress.append(executed)

  # Background trades.
  background = streams["background"]
  n_background = (
      int(
          background.poisson(
              scenario.daily_volume
              / scenario.background_trade_size
              * scenario.n_days
          )
      )
      if scenario.daily_volume > 0
      else 0
  )
  background_times = np.sort(
      background.integers(scenario.start_time, scenario.end_time, n_background)
  )
  background_volumes = np.maximum(
      np.round(
          background.exponential(scenario.background_trade_size, n_background)
          * metadata.volume_scale
      ).astype(np.int64),
      1,
  )
  background_sides = np.where(
      background.random(n_background) < 0.5, tape_lib.BUY, tape_lib.SELL
  )

  timestamp = np.concatenate(timestamps + [background_times]).astype(np.int64)
  volume_units = np.concatenate(volumes + [background_volumes]).astype(np.int64)
  label = np.concatenate(labels + [np.full(n_background, -1, dtype=np.int64)])
  aggressor = np.where(
      label >= 0,
      planted["trader_id"][np.maximum(label, 0)] if num_metaorders else 0,
      BACKGROUND_TRADER_BASE
      + np.cumsum(label < 0)
      - 1,
  )
  side = np.where(
      label >= 0,
      planted["sign"][np.maximum(label, 0)] if num_metaorders else 0,
      np.concatenate(
          [
              np.zeros(timestamp.shape[0] - n_background, dtype=np.int64),
              background_sides,
          ]
      ),
  ).astype(np.int8)

  order = np.lexsort((aggressor, timestamp))
  timestamp, volume_units = timestamp[order], volume_units[order]
  label = label[order]
  aggressor, side = aggressor[order], side[order]
  num_trades = timestamp.shape[0]
  if num_trades == 0:
    raise ValueError("Scenario generates no trades")

  # Impact sources: metaorders, then background trades when they move the price.
  volume = volume_units / metadata.volume_scale
  min_duration = utils.seconds_to_ns(scenario.min_duration)
  source_start = planted["t_start"]
  source_end = planted["t_start"] + planted["duration_ns"]
  source_q = planted["q_units"] / metadata.volume_scale
  source_sign = planted["sign"].astype(np.float64)
  source_rate = 1.0 / (
      scenario.delta * np.maximum(planted["duration_ns"], min_duration)
  )
  source_pi = np.full(num_metaorders, scenario.pi_inf)
  child_counts = planted["n_children"]
  child_times = np.concatenate(timestamps) if timestamps else np.zeros(0, np.int64)
  child_progress = np.concatenate(progress) if progress else np.zeros(0)
  if scenario.background_in_flow and n_background:
    is_background = label < 0
    decay = utils.seconds_to_ns(scenario.background_decay_seconds)
    source_start = np.concatenate([source_start, timestamp[is_background]])
    source_end = np.concatenate([source_end, timestamp[is_background]])
    source_q = np.concatenate([source_q, volume[is_background]])
    source_sign = np.concatenate(
        [source_sign, side[is_background].astype(np.float64)]
    )
    source_rate = np.concatenate(
        [source_rate, np.full(n_background, 1.0 / (scenario.delta * decay))]
    )
    source_pi = np.concatenate([source_pi, np.zeros(n_background)])
    child_counts = np.concatenate(
        [child_counts, np.ones(n_background, dtype=np.int64)]
    )
    child_times = np.concatenate([child_times, timestamp[is_background]])
    child_progress = np.concatenate([child_progress, np.zeros(n_background)])

  child_offsets = np.concatenate([[0], np.cumsum(child_counts)])
  source_order = np.argsort(source_start, kind="stable")
  permuted_counts = child_counts[source_order]
  permuted_offsets = np.concatenate([[0], np.cumsum(permuted_counts)])
  child_permutation = np.repeat(
      child_offsets[source_order] - permuted_offsets[:-1], permuted_counts
  ) + np.arange(permuted_offsets[-1])

  unit_impact = np.zeros(num_trades)
  _unit_impact_numba(
      timestamp,
      source_start[source_order],
      source_end[source_order],
      source_q[source_order],
      source_sign[source_order],
      source_rate[source_order],
      source_pi[source_order],
      permuted_offsets,
      child_times[child_permutation].astype(np.int64),
      child_progress[child_permutation],
      scenario.delta,
      _DECAY_CUTOFF,
      unit_impact,
  )

  # Diffusive noise and bid-ask bounce.
  noise = streams["noise"]
  elapsed_days = np.diff(timestamp, prepend=scenario.start_time) / utils.NS_PER_DAY
  diffusion = np.cumsum(
      scenario.noise_sigma
      * np.sqrt(elapsed_days)
      * noise.standard_normal(num_trades)
  )
  bounce = np.log1p(side * scenario.spread / 2.0)

  # Daily prefactors.
  day = aggregates.trade_days(timestamp)
  days = np.unique(day)
  sim_days = (days - scenario.start_time // utils.NS_PER_DAY).astype(np.int64)
  y_ratio_by_day = scenario.y0 + scenario.sigma_y * streams[
      "liquidity"
  ].standard_normal(scenario.n_days)
  y_ratio = y_ratio_by_day[sim_days]
  day_starts = np.searchsorted(day, days)
  daily_volume = (
      np.add.reduceat(volume_units, day_starts) / metadata.volume_scale
  )
  unit_level = np.cumsum(unit_impact)
  noise_level = diffusion + bounce
  if scenario.y_tilde is not None:
    y_tilde = np.full(days.shape[0], float(scenario.y_tilde))
  else:
    noise_sq = aggregates.daily_return_products(
        timestamp, noise_level, noise_level, day
    )
    cross = aggregates.daily_return_products(
        timestamp, noise_level, unit_level, day
    )
    impact_sq = aggregates.daily_return_products(
        timestamp, unit_level, unit_level, day
    )
    y_tilde = np.array([
        solve_y_tilde(*terms, scenario.delta)
        for terms in zip(noise_sq, cross, impact_sq, y_ratio, daily_volume)
    ])
  day_index = np.searchsorted(days, day)
  impact_level = np.cumsum(y_tilde[day_index] * unit_impact)
  log_mid = np.log(scenario.base_price) + diffusion + impact_level
  log_price = log_mid + bounce
  sigma = np.sqrt(
      aggregates.daily_return_products(timestamp, log_price, log_price, day)
  )

  price_scale = metadata.price_scale
  price_units = np.maximum(
      np.round(np.exp(log_price) * price_scale).astype(np.int64), 1
  )
  if scenario.spread > 0:
    bid_units = np.round(
        np.exp(log_mid) * (1.0 - scenario.spread / 2.0) * price_scale
    ).astype(np.int64)
    ask_units = np.round(
        np.exp(log_mid) * (1.0 + scenario.spread / 2.0) * price_scale
    ).astype(np.int64)
  else:
    bid_units = np.full(num_trades, utils.ABSENT, dtype=np.int64)
    ask_units = np.full(num_trades, utils.ABSENT, dtype=np.int64)
  passive = LIQUIDITY_PROVIDER_BASE + streams["counterparties"].integers(
      0, scenario.n_liquidity_providers, num_trades
  )

  tape = tape_lib.Tape(
      timestamp=timestamp,
      trade_id=np.arange(1, num_trades + 1, dtype=np.int64),
      aggressor_id=aggressor.astype(np.int64),
      passive_id=passive.astype(np.int64),
      side=side,
      price_units=price_units,
      volume_units=volume_units,
      bid_units=bid_units,
      ask_units=ask_units,
      metadata=metadata,
  )

  # Planted ids follow (t_start, first fill) like the segmenter's.
  first_fill = np.full(num_metaorders, num_trades, dtype=np.int64)
  assigned = np.flatnonzero(label >= 0)
  np.minimum.at(first_fill, label[assigned], assigned)
  rank = np.empty(num_metaorders, dtype=np.int64)
  rank[np.lexsort((first_fill, planted["t_start"]))] = np.arange(num_metaorders)
  trade_labels = np.where(label >= 0, rank[np.maximum(label, 0)], -1)
  if not num_metaorders:
    trade_labels = np.full(num_trades, -1, dtype=np.int64)

  by_id = np.argsort(rank)
  metaorders = pd.DataFrame({
      "id": np.arange(num_metaorders),
      "trader_id": planted["trader_id"][by_id],
      "sign": planted["sign"][by_id].astype(np.int64),
      "Q": planted["q_units"][by_id] / metadata.volume_scale,
      "T": planted["duration_ns"][by_id] / utils.NS_PER_SECOND,
      "n_children": planted["n_children"][by_id],
      "schedule": scenario.schedule,
  })
  days_frame = pd.DataFrame({
      "day": days,
      "date": [aggregates.day_date(d).isoformat() for d in days],
      "y_ratio": y_ratio,
      "y_tilde": y_tilde,
      "sigma_D": sigma,
      "V_D": daily_volume,
  })
  logging.info(
      "Generating %d trades and %d metaorders took %.3f s",
      num_trades,
      num_metaorders,
      time.time() - start_time,
  )
  return tape, GroundTruth(
      trade_labels=trade_labels.astype(np.int64),
      metaorders=metaorders,
      days=days_frame,
      scenario=scenario,
  )
