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

"""Impact trajectories and per-metaorder impact summaries."""

import dataclasses
import time
from typing import List, Optional, Tuple

from absl import logging
import numba as nb
import numpy as np
import pandas as pd
from scipy import integrate

from metaimpact import utils
from metaimpact.segment import metaorder
from metaimpact.tape import aggregates
from metaimpact.tape import tape as tape_lib
from metaimpact.utils import cached_property

# The permanent impact is read on [t_end + 9T, t_end + 10T].
PERMANENT_WINDOW = (9.0, 10.0)


@dataclasses.dataclass(frozen=True)
class ImpactSample:
  """One point of an impact trajectory.

  Attributes:
    metaorder_id: Metaorder id.
    r: Executed volume fraction in [0, 1].
    impact: Signed log-return s * log(p(r) / p(0)).
    clock: Seconds elapsed since the first fill.
  """

  metaorder_id: int
  r: float
  impact: float
  clock: float


@dataclasses.dataclass(frozen=True)
class ImpactSummary:
  """Impact measures of one metaorder.

  Attributes:
    metaorder_id: Metaorder id.
    peak: Impact at r = 1, first fill to last fill.
    exec: Execution impact, the integral of the trajectory over r.
    perm: Permanent impact to the market VWAP of the permanent window.
    perm_mech: Mechanical permanent impact, peak - perm.
  """

  metaorder_id: int
  peak: float
  exec: float
  perm: float
  perm_mech: float


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True)
def _impact_paths_numba(
    child_offsets: np.ndarray,
    child_index: np.ndarray,
    volume_units: np.ndarray,
    log_price: np.ndarray,
    timestamp: np.ndarray,
    q_units: np.ndarray,
    sign: np.ndarray,
    impact: np.ndarray,
    clock: np.ndarray,
):
  """Fills impact and clock, of shape (num_metaorders, n_points), in-place.

  Sample k uses the first child whose cumulative volume reaches
  k / (n_points - 1) of |Q|, compared in exact integer arithmetic.
  """
  n_points = impact.shape[1]
  for m in range(q_units.shape[0]):
    lo, hi = child_offsets[m], child_offsets[m + 1]
    cum = np.empty(hi - lo, dtype=np.int64)
    total = 0
    for j in range(lo, hi):
      total += volume_units[child_index[j]]
      cum[j - lo] = total * (n_points - 1)
    first = child_index[lo]
    for k in range(n_points):
      j = np.searchsorted(cum, k * q_units[m])
      fill = child_index[lo + j]
      impact[m, k] = sign[m] * (log_price[fill] - log_price[first])
      clock[m, k] = (timestamp[fill] - timestamp[first]) / 1e9


@dataclasses.dataclass(frozen=True, eq=False)
class ImpactPaths:
  """Impact trajectories of a metaorder population.

  Attributes:
    ids: Array of metaorder ids.
    fractions: Array of shape (n_points,) of executed fractions r.
    impact: Array of shape (num_metaorders, n_points).
    clock: Array of shape (num_metaorders, n_points), seconds since the first
      fill.
  """

  ids: np.ndarray
  fractions: np.ndarray
  impact: np.ndarray
  clock: np.ndarray

  def __post_init__(self):
    expected = (self.ids.shape[0], self.fractions.shape[0])
    for name in ("impact", "clock"):
      if getattr(self, name).shape != expected:
        raise ValueError(
            f"Expected {name} of shape {expected}. Got"
            f" {getattr(self, name).shape}."
        )
    utils.make_read_only(self.ids, self.fractions, self.impact, self.clock)

  def __len__(self) -> int:
    return self.ids.shape[0]

  def samples(self, index: int) -> List[ImpactSample]:
    """Trajectory of the metaorder at a position as records."""
    return [
        ImpactSample(
            metaorder_id=int(self.ids[index]),
            r=float(r),
            impact=float(impact),
            clock=float(clock),
        )
        for r, impact, clock in zip(
            self.fractions, self.impact[index], self.clock[index]
        )
    ]


def impact_paths(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    n_points: int = 41,
) -> ImpactPaths:
  """Samples the impact trajectory of every metaorder at r = 0, 1/(n-1), ..., 1.

  Args:
    tape: The tape the metaorders were segmented from.
    metaorders: Metaorder population.
    n_points: Number of samples per metaorder.

  Returns:
    The impact trajectories.
  """
  if n_points < 2:
    raise ValueError(f"n_points should be at least 2. Got {n_points}.")
  start_time = time.time()
  num = len(metaorders)
  impact = np.zeros((num, n_points))
  clock = np.zeros((num, n_points))
  _impact_paths_numba(
      metaorders.child_offsets,
      metaorders.child_index,
      tape.volume_units,
      tape.log_price,
      tape.timestamp,
      metaorders.q_units,
      metaorders.sign.astype(np.int64),
      impact,
      clock,
  )
  logging.info(
      "Sampling %d impact paths took %.3f s", num, time.time() - start_time
  )
  return ImpactPaths(
      ids=metaorders.ids.copy(),
      fractions=np.linspace(0.0, 1.0, n_points),
      impact=impact,
      clock=clock,
  )


def impact_path(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    index: int,
    n_points: int = 41,
) -> List[ImpactSample]:
  """Impact trajectory of the metaorder at a position, as samples."""
  return impact_paths(tape, metaorders.take([index]), n_points).samples(0)


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True)
def _window_vwap_numba(
    lo: np.ndarray,
    hi: np.ndarray,
    price: np.ndarray,
    volume: np.ndarray,
    vwap: np.ndarray,
):
  """VWAP of the trades in tape positions [lo, hi), prevailing price if empty."""
  for m in range(lo.shape[0]):
    if hi[m] > lo[m]:
      notional = 0.0
      total = 0.0
      for i in range(lo[m], hi[m]):
        notional += price[i] * volume[i]
        total += volume[i]
      vwap[m] = notional / total
    elif lo[m] > 0:
      vwap[m] = price[lo[m] - 1]
    else:
      vwap[m] = np.nan


def window_vwap(
    tape: tape_lib.Tape, start: np.ndarray, end: np.ndarray
) -> np.ndarray:
  """Market VWAP over the inclusive windows [start, end].

  Empty windows take the prevailing price. Windows ending after the tape end
  are NaN.
  """
  start = np.atleast_1d(np.asarray(start, dtype=np.int64))
  end = np.atleast_1d(np.asarray(end, dtype=np.int64))
  lo, hi = tape.window_bounds(start, end)
  vwap = np.empty(start.shape[0])
  _window_vwap_numba(lo, hi, tape.price, tape.volume, vwap)
  return np.where(end > tape.end_time, np.nan, vwap)


@dataclasses.dataclass(frozen=True, eq=False)
class ImpactSummaries:
  """Impact measures and covariates of a metaorder population.

  Attributes:
    ids: Array of metaorder ids.
    sign: Array of metaorder signs.
    q: Array of volumes |Q| in BTC.
    duration: Array of durations T in seconds.
    mu: Array of execution speeds, NaN when T = 0.
    mu_v: Array of participation rates.
    n_children: Array of child trade counts.
    day: Array of UTC days of t_end.
    peak: Array of peak impacts I.
    exec: Array of execution impacts I_exec.
    perm: Array of permanent impacts, NaN when the permanent window extends
      past the tape end.
    perm_mech: Array of mechanical permanent impacts peak - perm.
  """

  ids: np.ndarray
  sign: np.ndarray
  q: np.ndarray
  duration: np.ndarray
  mu: np.ndarray
  mu_v: np.ndarray
  n_children: np.ndarray
  day: np.ndarray
  peak: np.ndarray
  exec: np.ndarray
  perm: np.ndarray
  perm_mech: np.ndarray

  def __post_init__(self):
    utils.make_read_only(
        *(getattr(self, field.name) for field in dataclasses.fields(self))
    )

  def __len__(self) -> int:
    return self.ids.shape[0]

  def __getitem__(self, index: int) -> ImpactSummary:
    return ImpactSummary(
        metaorder_id=int(self.ids[index]),
        peak=float(self.peak[index]),
        exec=float(self.exec[index]),
        perm=float(self.perm[index]),
        perm_mech=float(self.perm_mech[index]),
    )

  @cached_property
  def y_tilde(self) -> np.ndarray:
    """Individual square-root prefactors I / sqrt(|Q|)."""
    return self.peak / np.sqrt(self.q)

  @cached_property
  def has_duration(self) -> np.ndarray:
    return self.duration > 0

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({
        "id": self.ids,
        "sign": self.sign.astype(np.int64),
        "Q": self.q,
        "T": self.duration,
        "mu": self.mu,
        "mu_V": self.mu_v,
        "n_children": self.n_children,
        "peak": self.peak,
        "exec": self.exec,
        "perm": self.perm,
        "perm_mech": self.perm_mech,
    })


def impact_summaries(
    tape: tape_lib.Tape,
    metaorders: metaorder.MetaOrders,
    paths: Optional[ImpactPaths] = None,
    permanent_window: Tuple[float, float] = PERMANENT_WINDOW,
) -> ImpactSummaries:
  """Computes peak, execution and permanent impact of every metaorder.

  Args:
    tape: The tape the metaorders were segmented from.
    metaorders: Metaorder population.
    paths: Precomputed trajectories, sampled with the default 41 points when
      omitted.
    permanent_window: Window [t_end + a T, t_end + b T] of the permanent
      impact, as (a, b).

  Returns:
    The impact summaries.
  """
  if paths is None:
    paths = impact_paths(tape, metaorders)
  if len(paths) != len(metaorders):
    raise ValueError(
        f"Expected paths for {len(metaorders)} metaorders. Got {len(paths)}."
    )

  peak = paths.impact[:, -1].copy()
  execution = integrate.trapezoid(paths.impact, paths.fractions, axis=1)

  duration_ns = metaorders.duration_ns
  after_start = metaorders.t_end + np.round(
      permanent_window[0] * duration_ns
  ).astype(np.int64)
  after_end = metaorders.t_end + np.round(
      permanent_window[1] * duration_ns
  ).astype(np.int64)
  first_fill = metaorders.child_index[metaorders.child_offsets[:-1]]
  vwap = (
      window_vwap(tape, after_start, after_end)
      if len(metaorders)
      else np.zeros(0)
  )
  perm = metaorders.sign * (np.log(vwap) - tape.log_price[first_fill])

  return ImpactSummaries(
      ids=metaorders.ids.copy(),
      sign=metaorders.sign.copy(),
      q=metaorders.q.copy(),
      duration=metaorders.duration.copy(),
      mu=metaorders.mu.copy(),
      mu_v=metaorders.mu_v.copy(),
      n_children=metaorders.n_children.copy(),
      day=aggregates.trade_days(metaorders.t_end),
      peak=peak,
      exec=execution,
      perm=perm,
      perm_mech=peak - perm,
  )
