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

"""A module containing the metaorder data model."""

import dataclasses
from typing import Any, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.utils import cached_property

_ARRAY_FIELDS = (
    "ids",
    "trader_id",
    "sign",
    "q_units",
    "t_start",
    "t_end",
    "market_volume_units",
    "child_offsets",
    "child_index",
)


@dataclasses.dataclass(frozen=True, eq=False)
class SegmentationConfig:
  """Parameters of the metaorder reconstruction.

  Attributes:
    t_inact: Inactivity threshold in seconds. A trader's aggressive trade
      following a gap of at least t_inact opens a new metaorder.
    drop_mean_reverting: Whether metaorders that quickly and fully undo the
      trader's previous metaorder are left unassigned.
    reversal_starts_new: Whether a direction-reversing trade opens a new
      metaorder. Otherwise the trader's trades stay unassigned until the next
      inactivity gap.
  """

  t_inact: float = 3600.0
  drop_mean_reverting: bool = True
  reversal_starts_new: bool = True

  def __post_init__(self):
    if not self.t_inact > 0:
      raise ValueError(f"t_inact should be positive. Got {self.t_inact}.")

  @property
  def t_inact_ns(self) -> int:
    return utils.seconds_to_ns(self.t_inact)

  def as_dict(self) -> Mapping[str, Any]:
    return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class MetaOrder:
  """A single reconstructed metaorder.

  Attributes:
    id: Metaorder id.
    trader_id: Aggressor id shared by all child trades.
    sign: +1 for a buy metaorder, -1 for a sell metaorder.
    q: Unsigned volume |Q| in BTC.
    t_start: Timestamp of the first child fill.
    t_end: Timestamp of the last child fill.
    duration: T = t_end - t_start in seconds.
    mu: Execution speed |Q| / T in BTC/s, NaN when T = 0.
    mu_v: Participation rate |Q| / V_M.
    child_trades: Tape positions of the child trades, in time order.
  """

  id: int
  trader_id: int
  sign: int
  q: float
  t_start: int
  t_end: int
  duration: float
  mu: float
  mu_v: float
  child_trades: Tuple[int, ...]

  @property
  def n_children(self) -> int:
    return len(self.child_trades)


@dataclasses.dataclass(frozen=True, eq=False)
class MetaOrders:
  """Immutable columnar collection of metaorders, ordered by (t_start, first fill).

  Child trades are stored in compressed form: the children of metaorder k are
  child_index[child_offsets[k]:child_offsets[k + 1]].

  Attributes:
    ids: Array of metaorder ids.
    trader_id: Array of trader ids.
    sign: Array of signs in {+1, -1}.
    q_units: Array of exact unsigned volumes |Q| in volume units.
    t_start: Array of first-fill timestamps.
    t_end: Array of last-fill timestamps.
    market_volume_units: Array of market volumes V_M over [t_start, t_end].
    child_offsets: Array of shape (num_metaorders + 1,).
    child_index: Array of tape positions of the child trades.
    volume_scale: Volume units per BTC.
    trade_labels: Optional array with the metaorder id of each tape trade, -1
      for unassigned trades.
  """

  ids: np.ndarray
  trader_id: np.ndarray
  sign: np.ndarray
  q_units: np.ndarray
  t_start: np.ndarray
  t_end: np.ndarray
  market_volume_units: np.ndarray
  child_offsets: np.ndarray
  child_index: np.ndarray
  volume_scale: int = 10**8
  trade_labels: Optional[np.ndarray] = None

  def __post_init__(self):
    for name in _ARRAY_FIELDS:
      object.__setattr__(
          self, name, np.ascontiguousarray(getattr(self, name), dtype=np.int64)
      )
    object.__setattr__(self, "sign", self.sign.astype(np.int8))

    num = self.ids.shape[0]
    for name in _ARRAY_FIELDS:
      if name in ("child_offsets", "child_index"):
        continue
      if getattr(self, name).shape != (num,):
        raise ValueError(
            f"Expected {name} of shape ({num},). Got"
            f" {getattr(self, name).shape}."
        )
    if self.child_offsets.shape != (num + 1,):
      raise ValueError(
          f"Expected child_offsets of shape ({num + 1},). Got"
          f" {self.child_offsets.shape}."
      )
    if self.child_offsets[-1] != self.child_index.shape[0]:
      raise ValueError(
          "child_offsets should end at the number of child trades"
          f" {self.child_index.shape[0]}. Got {self.child_offsets[-1]}."
      )
    if num and np.any(np.diff(self.child_offsets) < 1):
      raise ValueError("Every metaorder should have at least one child trade")
    if np.any(self.t_end < self.t_start):
      raise ValueError("t_end should not precede t_start")

    utils.make_read_only(*(getattr(self, name) for name in _ARRAY_FIELDS))
    if self.trade_labels is not None:
      object.__setattr__(
          self, "trade_labels", np.asarray(self.trade_labels, dtype=np.int64)
      )
      utils.make_read_only(self.trade_labels)

  def __len__(self) -> int:
    return self.ids.shape[0]

  def __getitem__(self, index: int) -> MetaOrder:
    lo, hi = self.child_offsets[index], self.child_offsets[index + 1]
    return MetaOrder(
        id=int(self.ids[index]),
        trader_id=int(self.trader_id[index]),
        sign=int(self.sign[index]),
        q=float(self.q[index]),
        t_start=int(self.t_start[index]),
        t_end=int(self.t_end[index]),
        duration=float(self.duration[index]),
        mu=float(self.mu[index]),
        mu_v=float(self.mu_v[index]),
        child_trades=tuple(int(i) for i in self.child_index[lo:hi]),
    )

  def __repr__(self) -> str:
    return f"MetaOrders(num_metaorders={len(self)})"

  @classmethod
  def empty(cls, volume_scale: int = 10**8) -> "MetaOrders":
    zeros = np.zeros(0, dtype=np.int64)
    return cls(
        ids=zeros,
        trader_id=zeros,
        sign=zeros,
        q_units=zeros,
        t_start=zeros,
        t_end=zeros,
        market_volume_units=zeros,
        child_offsets=np.zeros(1, dtype=np.int64),
        child_index=zeros,
        volume_scale=volume_scale,
    )

  def take(self, index: np.ndarray) -> "MetaOrders":
    """Returns the metaorders at the given positions (or mask), keeping their ids."""
    index = np.arange(len(self))[index]
    counts = np.diff(self.child_offsets)[index]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    children = (
        np.concatenate([self.children(i) for i in index])
        if index.shape[0]
        else np.zeros(0, dtype=np.int64)
    )
    return MetaOrders(
        ids=self.ids[index],
        trader_id=self.trader_id[index],
        sign=self.sign[index],
        q_units=self.q_units[index],
        t_start=self.t_start[index],
        t_end=self.t_end[index],
        market_volume_units=self.market_volume_units[index],
        child_offsets=offsets,
        child_index=children,
        volume_scale=self.volume_scale,
    )

  def children(self, index: int) -> np.ndarray:
    """Tape positions of the child trades of the metaorder at a position."""
    return self.child_index[
        self.child_offsets[index] : self.child_offsets[index + 1]
    ]

  @cached_property
  def n_children(self) -> np.ndarray:
    return np.diff(self.child_offsets)

  @cached_property
  def q(self) -> np.ndarray:
    """Unsigned volumes |Q| in BTC."""
    return self.q_units / self.volume_scale

  @cached_property
  def signed_q(self) -> np.ndarray:
    return self.sign * self.q

  @cached_property
  def duration_ns(self) -> np.ndarray:
    return self.t_end - self.t_start

  @cached_property
  def duration(self) -> np.ndarray:
    """Durations T in seconds."""
    return self.duration_ns / utils.NS_PER_SECOND

  @cached_property
  def mu(self) -> np.ndarray:
    """Execution speeds |Q| / T in BTC/s, NaN when T = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
      return np.where(self.duration_ns > 0, self.q / self.duration, np.nan)

  @cached_property
  def market_volume(self) -> np.ndarray:
    return self.market_volume_units / self.volume_scale

  @cached_property
  def mu_v(self) -> np.ndarray:
    """Participation rates |Q| / V_M."""
    with np.errstate(divide="ignore", invalid="ignore"):
      return self.q_units / self.market_volume_units

  @cached_property
  def has_duration(self) -> np.ndarray:
    """Mask of metaorders with T > 0."""
    return self.duration_ns > 0


def metaorder_table(metaorders: MetaOrders) -> pd.DataFrame:
  """Returns the metaorder export table."""
  return pd.DataFrame({
      "id": metaorders.ids,
      "trader_id": metaorders.trader_id,
      "sign": metaorders.sign.astype(np.int64),
      "Q": metaorders.q,
      "t_start": metaorders.t_start,
      "t_end": metaorders.t_end,
      "T": metaorders.duration,
      "mu": metaorders.mu,
      "mu_V": metaorders.mu_v,
      "n_children": metaorders.n_children,
  })
