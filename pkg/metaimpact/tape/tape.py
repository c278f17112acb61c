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

"""A module containing the trade tape data model."""

import dataclasses
from typing import Any, Iterable, Mapping, Optional, Sequence, Tuple, Union

from absl import logging
import numba as nb
import numpy as np

from metaimpact import utils
from metaimpact.utils import cached_property

BUY = 1
SELL = -1

# Trader ids are stored as u4 in the binary layout, all-ones being reserved.
MAX_TRADER_ID = 2**32 - 2

INT_COLUMNS = (
    "timestamp",
    "trade_id",
    "aggressor_id",
    "passive_id",
    "price_units",
    "volume_units",
    "bid_units",
    "ask_units",
)
COLUMNS = INT_COLUMNS + ("side",)


class TapeFormatError(ValueError):
  """Raised when a tape source is malformed."""


@dataclasses.dataclass(frozen=True, eq=False)
class TapeMetadata:
  """Description of the instrument a tape refers to.

  Attributes:
    instrument: Instrument name.
    tick_size: Price tick in quote currency, used as tolerance when checking
      trade prices against quotes.
    timezone: Time zone label of the source. Calendar days are always UTC.
    price_exponent: Prices are stored as integers in units of
      10**-price_exponent.
    volume_exponent: Volumes are stored as integers in units of
      10**-volume_exponent.
  """

  instrument: str = "BTC/USD"
  tick_size: float = 1e-5
  timezone: str = "UTC"
  price_exponent: int = 5
  volume_exponent: int = 8

  def __post_init__(self):
    for name in ("price_exponent", "volume_exponent"):
      exponent = getattr(self, name)
      if not 0 <= exponent <= 12:
        raise ValueError(f"{name} should be in [0, 12]. Got {exponent}.")
    if not self.tick_size > 0:
      raise ValueError(f"tick_size should be positive. Got {self.tick_size}.")

  @property
  def price_scale(self) -> int:
    return 10**self.price_exponent

  @property
  def volume_scale(self) -> int:
    return 10**self.volume_exponent

  @property
  def tick_units(self) -> int:
    return max(1, int(round(self.tick_size * self.price_scale)))

  def as_dict(self) -> Mapping[str, Any]:
    return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class Trade:
  """A single tape row, with prices and volumes as decimals.

  Attributes:
    timestamp: Nanoseconds since the Unix epoch.
    trade_id: Unique trade identifier.
    aggressor_id: Identifier of the trader whose order triggered the trade.
    side: +1 if the aggressor bought, -1 if the aggressor sold.
    price: Trade price in USD/BTC.
    volume: Trade volume in BTC.
    passive_id: Identifier of the resting counterparty, if known.
    best_bid: Best bid sampled immediately before the trade, if known.
    best_ask: Best ask sampled immediately before the trade, if known.
  """

  timestamp: int
  trade_id: int
  aggressor_id: int
  side: int
  price: float
  volume: float
  passive_id: Optional[int] = None
  best_bid: Optional[float] = None
  best_ask: Optional[float] = None


@dataclasses.dataclass(frozen=True)
class ValidationReport:
  """Data-quality counters collected while building a tape.

  Attributes:
    n_rows: Number of records read.
    n_inversions: Number of record pairs out of (timestamp, trade_id) order in
      the source, repaired by sorting.
    n_crossed_quotes: Trades whose best bid is not below their best ask.
    n_off_quote_prices: Trades printing through the quote they executed
      against by more than one tick.
    n_missing_quotes: Trades lacking either best bid or best ask.
  """

  n_rows: int = 0
  n_inversions: int = 0
  n_crossed_quotes: int = 0
  n_off_quote_prices: int = 0
  n_missing_quotes: int = 0

  @property
  def n_warnings(self) -> int:
    return self.n_inversions + self.n_crossed_quotes + self.n_off_quote_prices

  def as_dict(self) -> Mapping[str, int]:
    return dict(dataclasses.asdict(self), n_warnings=self.n_warnings)


@dataclasses.dataclass(frozen=True, eq=False)
class Tape:
  """Immutable columnar trade tape, ordered by (timestamp, trade_id).

  Prices, volumes and quotes are scaled integers (see TapeMetadata); absent
  passive ids and quotes are encoded as -1.

  Attributes:
    timestamp: Array of int64 nanoseconds since the epoch.
    trade_id: Array of unique int64 trade ids.
    aggressor_id: Array of aggressor trader ids.
    passive_id: Array of passive trader ids, -1 when absent.
    side: Array of aggressor signs in {+1, -1}.
    price_units: Array of positive scaled prices.
    volume_units: Array of positive scaled volumes.
    bid_units: Array of scaled best bids, -1 when absent.
    ask_units: Array of scaled best asks, -1 when absent.
    metadata: Instrument description and decimal exponents.
    report: Validation counters of the source the tape was built from.
  """

  timestamp: np.ndarray
  trade_id: np.ndarray
  aggressor_id: np.ndarray
  passive_id: np.ndarray
  side: np.ndarray
  price_units: np.ndarray
  volume_units: np.ndarray
  bid_units: np.ndarray
  ask_units: np.ndarray
  metadata: TapeMetadata = dataclasses.field(default_factory=TapeMetadata)
  report: Optional[ValidationReport] = None

  def __post_init__(self):
    for name in INT_COLUMNS:
      object.__setattr__(
          self, name, np.ascontiguousarray(getattr(self, name), dtype=np.int64)
      )
    object.__setattr__(
        self, "side", np.ascontiguousarray(self.side, dtype=np.int8)
    )

    num_trades = self.timestamp.shape[0]
    for name in COLUMNS:
      column = getattr(self, name)
      if column.shape != (num_trades,):
        raise ValueError(
            f"Expected {name} of shape ({num_trades},). Got {column.shape}."
        )

    if not np.all(np.abs(self.side) == 1):
      raise ValueError("side should only contain +1 (buy) and -1 (sell)")
    if np.any(self.price_units <= 0):
      raise ValueError("price should be positive")
    if np.any(self.volume_units <= 0):
      raise ValueError("volume should be positive")
    for name in ("bid_units", "ask_units"):
      column = getattr(self, name)
      if np.any((column <= 0) & (column != utils.ABSENT)):
        raise ValueError(f"{name} should be positive or absent (-1)")
    if np.any(self.aggressor_id < 0) or np.any(
        self.aggressor_id > MAX_TRADER_ID
    ):
      raise ValueError(f"aggressor_id should be in [0, {MAX_TRADER_ID}]")
    if np.any(self.passive_id < utils.ABSENT) or np.any(
        self.passive_id > MAX_TRADER_ID
    ):
      raise ValueError(f"passive_id should be in [0, {MAX_TRADER_ID}] or -1")

    delta_t = np.diff(self.timestamp)
    delta_id = np.diff(self.trade_id)
    if np.any((delta_t < 0) | ((delta_t == 0) & (delta_id <= 0))):
      raise ValueError(
          "Tape should be strictly ordered by (timestamp, trade_id)"
      )
    if np.unique(self.trade_id).shape[0] != num_trades:
      raise ValueError("trade_id should be unique within a tape")

    utils.make_read_only(*(getattr(self, name) for name in INT_COLUMNS))
    utils.make_read_only(self.side)

  def __len__(self) -> int:
    return self.timestamp.shape[0]

  def __getitem__(self, index: int) -> Trade:
    """Returns the trade at a tape position as a decimal record."""
    passive = int(self.passive_id[index])
    bid = self.best_bid[index]
    ask = self.best_ask[index]
    return Trade(
        timestamp=int(self.timestamp[index]),
        trade_id=int(self.trade_id[index]),
        aggressor_id=int(self.aggressor_id[index]),
        side=int(self.side[index]),
        price=float(self.price[index]),
        volume=float(self.volume[index]),
        passive_id=None if passive == utils.ABSENT else passive,
        best_bid=None if np.isnan(bid) else float(bid),
        best_ask=None if np.isnan(ask) else float(ask),
    )

  def __repr__(self) -> str:
    return (
        f"Tape(instrument={self.metadata.instrument!r},"
        f" num_trades={len(self)})"
    )

  @classmethod
  def from_columns(
      cls,
      columns: Mapping[str, np.ndarray],
      metadata: Optional[TapeMetadata] = None,
      n_rows: Optional[int] = None,
  ) -> "Tape":
    """Builds a canonical tape from unordered integer columns.

    Records are sorted by (timestamp, trade_id) and the number of repaired
    inversions is recorded together with quote consistency counters.

    Args:
      columns: Mapping from the tape column names to integer arrays.
      metadata: Instrument metadata.
      n_rows: Number of source rows, defaults to the column length.

    Returns:
      The canonical tape.
    """
    metadata = metadata or TapeMetadata()
    timestamp = np.asarray(columns["timestamp"], dtype=np.int64)
    trade_id = np.asarray(columns["trade_id"], dtype=np.int64)
    order, n_inversions = canonical_order(timestamp, trade_id)
    if n_inversions:
      logging.warning(
          "Repaired %d timestamp inversions while ordering the tape",
          n_inversions,
      )

    sorted_columns = {
        name: np.asarray(columns[name])[order]
        for name in COLUMNS
    }
    tape = cls(metadata=metadata, **sorted_columns)
    report = dataclasses.replace(
        quote_report(tape),
        n_rows=timestamp.shape[0] if n_rows is None else n_rows,
        n_inversions=n_inversions,
    )
    object.__setattr__(tape, "report", report)
    return tape

  @classmethod
  def from_trades(
      cls,
      trades: Iterable[Trade],
      metadata: Optional[TapeMetadata] = None,
  ) -> "Tape":
    """Builds a canonical tape from decimal trade records.

    Args:
      trades: Trade records in any order.
      metadata: Instrument metadata, defining the decimal exponents.

    Returns:
      The canonical tape.
    """
    metadata = metadata or TapeMetadata()
    trades = list(trades)

    def _scaled(values: Sequence[Optional[float]], scale: int) -> np.ndarray:
      return np.array(
          [
              utils.ABSENT if value is None else int(round(value * scale))
              for value in values
          ],
          dtype=np.int64,
      )

    columns = {
        "timestamp": [trade.timestamp for trade in trades],
        "trade_id": [trade.trade_id for trade in trades],
        "aggressor_id": [trade.aggressor_id for trade in trades],
        "passive_id": [
            utils.ABSENT if trade.passive_id is None else trade.passive_id
            for trade in trades
        ],
        "side": [trade.side for trade in trades],
        "price_units": _scaled(
            [trade.price for trade in trades], metadata.price_scale
        ),
        "volume_units": _scaled(
            [trade.volume for trade in trades], metadata.volume_scale
        ),
        "bid_units": _scaled(
            [trade.best_bid for trade in trades], metadata.price_scale
        ),
        "ask_units": _scaled(
            [trade.best_ask for trade in trades], metadata.price_scale
        ),
    }
    columns = {
        name: np.asarray(values, dtype=np.int64).reshape(-1)
        for name, values in columns.items()
    }
    return cls.from_columns(columns, metadata)

  def columns(self) -> Mapping[str, np.ndarray]:
    """Returns the integer columns keyed by name."""
    return {name: getattr(self, name) for name in COLUMNS}

  def select(self, index: Union[np.ndarray, slice]) -> "Tape":
    """Returns the sub-tape of the given positions or boolean mask."""
    return Tape(
        metadata=self.metadata,
        **{name: column[index] for name, column in self.columns().items()},
    )

  def equals(self, other: "Tape") -> bool:
    """Element-wise equality of records and decimal exponents."""
    return (
        len(self) == len(other)
        and self.metadata.price_exponent == other.metadata.price_exponent
        and self.metadata.volume_exponent == other.metadata.volume_exponent
        and all(
            np.array_equal(column, other.columns()[name])
            for name, column in self.columns().items()
        )
    )

  @property
  def start_time(self) -> int:
    return int(self.timestamp[0]) if len(self) else 0

  @property
  def end_time(self) -> int:
    return int(self.timestamp[-1]) if len(self) else 0

  @property
  def has_quotes(self) -> bool:
    return bool(np.any(self.bid_units > 0) or np.any(self.ask_units > 0))

  @cached_property
  def price(self) -> np.ndarray:
    """Prices in USD/BTC."""
    price = self.price_units / self.metadata.price_scale
    utils.make_read_only(price)
    return price

  @cached_property
  def log_price(self) -> np.ndarray:
    log_price = np.log(self.price)
    utils.make_read_only(log_price)
    return log_price

  @cached_property
  def volume(self) -> np.ndarray:
    """Volumes in BTC."""
    volume = self.volume_units / self.metadata.volume_scale
    utils.make_read_only(volume)
    return volume

  @cached_property
  def best_bid(self) -> np.ndarray:
    """Best bids in USD/BTC, NaN when absent."""
    return self._quote(self.bid_units)

  @cached_property
  def best_ask(self) -> np.ndarray:
    """Best asks in USD/BTC, NaN when absent."""
    return self._quote(self.ask_units)

  def _quote(self, units: np.ndarray) -> np.ndarray:
    quote = np.where(
        units == utils.ABSENT, np.nan, units / self.metadata.price_scale
    )
    utils.make_read_only(quote)
    return quote

  @cached_property
  def cum_signed_units(self) -> np.ndarray:
    """Prefix sums of signed volume units, of shape (num_trades + 1,)."""
    cum = np.concatenate([[0], np.cumsum(self.side * self.volume_units)])
    utils.make_read_only(cum)
    return cum

  @cached_property
  def cum_volume_units(self) -> np.ndarray:
    """Prefix sums of volume units, of shape (num_trades + 1,)."""
    cum = np.concatenate([[0], np.cumsum(self.volume_units)])
    utils.make_read_only(cum)
    return cum

  def window_bounds(
      self, start: np.ndarray, end: np.ndarray
  ) -> Tuple[np.ndarray, np.ndarray]:
    """Tape positions [lo, hi) of the trades in the inclusive windows [start, end]."""
    lo = np.searchsorted(self.timestamp, start, side="left")
    hi = np.searchsorted(self.timestamp, end, side="right")
    return lo, np.maximum(hi, lo)

  def prevailing_index(self, times: np.ndarray) -> np.ndarray:
    """Position of the last trade at or before each time, -1 before the tape."""
    return np.searchsorted(self.timestamp, times, side="right") - 1


def canonical_order(
    timestamp: np.ndarray, trade_id: np.ndarray
) -> Tuple[np.ndarray, int]:
  """Sorting permutation by (timestamp, trade_id) and the number of inversions it repairs.

  Args:
    timestamp: Array of record timestamps in source order.
    trade_id: Array of record trade ids in source order.

  Returns:
    order: Permutation sorting the records.
    n_inversions: Number of record pairs out of order in the source.
  """
  order = np.lexsort((trade_id, timestamp))
  if order.shape[0] < 2 or np.all(np.diff(order) == 1):
    return order, 0
  ranks = np.empty_like(order)
  ranks[order] = np.arange(order.shape[0])
  return order, int(_count_inversions_numba(ranks.astype(np.int64)))


@nb.jit(parallel=False, cache=True, fastmath=True, nopython=True)
def _count_inversions_numba(ranks: np.ndarray) -> int:
  """Counts pairs i < j with ranks[i] > ranks[j] with a bottom-up merge sort."""
  num = ranks.shape[0]
  src = ranks.copy()
  dst = np.empty_like(src)
  inversions = 0
  width = 1
  while width < num:
    for lo in range(0, num, 2 * width):
      mid = min(lo + width, num)
      hi = min(lo + 2 * width, num)
      i, j, k = lo, mid, lo
      while i < mid and j < hi:
        if src[i] <= src[j]:
          dst[k] = src[i]
          i += 1
        else:
          dst[k] = src[j]
          inversions += mid - i
          j += 1
        k += 1
      while i < mid:
        dst[k] = src[i]
        i += 1
        k += 1
      while j < hi:
        dst[k] = src[j]
        j += 1
        k += 1
    src, dst = dst, src
    width *= 2
  return inversions


def quote_report(tape: Tape) -> ValidationReport:
  """Counts quote inconsistencies of a tape.

  A trade with both quotes is flagged when its book is crossed, or when a buy
  prints below the ask (a sell above the bid) by more than one tick.

  Args:
    tape: The tape to check.

  Returns:
    A report with the quote counters set.
  """
  has_bid = tape.bid_units != utils.ABSENT
  has_ask = tape.ask_units != utils.ABSENT
  both = has_bid & has_ask
  tick = tape.metadata.tick_units

  crossed = both & (tape.bid_units >= tape.ask_units)
  buy_off = (tape.side == BUY) & (tape.price_units < tape.ask_units - tick)
  sell_off = (tape.side == SELL) & (tape.price_units > tape.bid_units + tick)
  off_quote = both & (buy_off | sell_off)

  report = ValidationReport(
      n_rows=len(tape),
      n_crossed_quotes=int(crossed.sum()),
      n_off_quote_prices=int(off_quote.sum()),
      n_missing_quotes=int((~both).sum()),
  )
  if report.n_crossed_quotes or report.n_off_quote_prices:
    logging.warning(
        "Tape %s has %d crossed quotes and %d prices outside the quotes",
        tape.metadata.instrument,
        report.n_crossed_quotes,
        report.n_off_quote_prices,
    )
  return report
