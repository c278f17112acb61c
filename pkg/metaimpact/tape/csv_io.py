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

"""Reading and writing tapes in the CSV exchange format."""

import io
import os
from typing import IO, Mapping, Optional, Union

from absl import logging
import numpy as np
import pandas as pd

from metaimpact import utils
from metaimpact.tape import tape as tape_lib

CSV_COLUMNS = (
    "timestamp",
    "trade_id",
    "aggressor_id",
    "passive_id",
    "side",
    "price",
    "volume",
    "best_bid",
    "best_ask",
)
REQUIRED_COLUMNS = (
    "timestamp",
    "trade_id",
    "aggressor_id",
    "side",
    "price",
    "volume",
)
SIDE_CODES = {"B": tape_lib.BUY, "S": tape_lib.SELL}
_UNIT_COLUMNS = {
    "price": "price_units",
    "volume": "volume_units",
    "best_bid": "bid_units",
    "best_ask": "ask_units",
}

_PATTERNS = {
    "timestamp": r"\d+",
    "trade_id": r"-?\d+",
    "aggressor_id": r"\d+",
    "passive_id": r"(\d+)?",
    "side": r"[BS]",
    "price": r"(\d+(\.\d*)?|\.\d+)",
    "volume": r"(\d+(\.\d*)?|\.\d+)",
    "best_bid": r"(\d+(\.\d*)?|\.\d+)?",
    "best_ask": r"(\d+(\.\d*)?|\.\d+)?",
}

Source = Union[str, os.PathLike, bytes, IO[bytes]]


def _line_number(row: int) -> int:
  # Line 1 holds the header.
  return row + 2


def _first_bad_row(mask: pd.Series) -> int:
  return int(np.flatnonzero(mask.to_numpy())[0])


def _decimal_units(
    values: pd.Series, exponent: int, column: str
) -> np.ndarray:
  """Converts decimal strings to exact scaled integers, empty strings to -1."""
  absent = (values == "").to_numpy()
  parts = values.str.partition(".")
  whole = parts[0].replace("", "0")
  fraction = parts[2]

  excess = fraction.str[exponent:].str.rstrip("0") != ""
  if excess.any():
    row = _first_bad_row(excess)
    raise tape_lib.TapeFormatError(
        f"Line {_line_number(row)}: {column} value {values.iloc[row]!r} has"
        f" more than {exponent} decimal digits"
    )

  units = whole.astype(np.int64).to_numpy() * 10**exponent
  if exponent:
    padded = fraction.str[:exponent].str.ljust(exponent, "0")
    units = units + padded.astype(np.int64).to_numpy()
  return np.where(absent, utils.ABSENT, units)


def parse_csv(
    source: Source,
    schema: Optional[Mapping[str, str]] = None,
    metadata: Optional[tape_lib.TapeMetadata] = None,
) -> tape_lib.Tape:
  """Parses a UTF-8 CSV tape.

  Args:
    source: Path, raw bytes or binary stream of the CSV file.
    schema: Optional mapping from tape column names to the source's header
      names, for files that use other column labels.
    metadata: Instrument metadata, defining the decimal exponents.

  Returns:
    The canonical tape with its validation report.

  Raises:
    TapeFormatError: If a required column is missing, a row is malformed or a
      trade_id is duplicated. The message names the offending file line.
  """
  metadata = metadata or tape_lib.TapeMetadata()
  if isinstance(source, bytes):
    source = io.BytesIO(source)

  frame = pd.read_csv(
      source,
      dtype=str,
      keep_default_na=False,
      na_filter=False,
      encoding="utf-8",
  )
  if schema:
    frame = frame.rename(columns={v: k for k, v in schema.items()})

  missing = [name for name in REQUIRED_COLUMNS if name not in frame.columns]
  if missing:
    raise tape_lib.TapeFormatError(
        f"Missing required column(s) {', '.join(missing)}. Got"
        f" {list(frame.columns)}."
    )
  for name in CSV_COLUMNS:
    if name not in frame.columns:
      frame[name] = ""

  if frame.shape[0] == 0:
    return tape_lib.Tape.from_columns(
        {name: np.zeros(0, dtype=np.int64) for name in tape_lib.COLUMNS},
        metadata,
    )

  frame = frame[list(CSV_COLUMNS)].apply(lambda column: column.str.strip())
  for name, pattern in _PATTERNS.items():
    malformed = ~frame[name].str.fullmatch(pattern)
    if malformed.any():
      row = _first_bad_row(malformed)
      raise tape_lib.TapeFormatError(
          f"Line {_line_number(row)}: malformed {name} value"
          f" {frame[name].iloc[row]!r}"
      )

  duplicated = frame["trade_id"].astype(np.int64).duplicated()
  if duplicated.any():
    row = _first_bad_row(duplicated)
    trade_ids = frame["trade_id"].astype(np.int64)
    trade_id = trade_ids.iloc[row]
    first = _first_bad_row(trade_ids == trade_id)
    raise tape_lib.TapeFormatError(
        f"Line {_line_number(row)}: duplicate trade_id {trade_id} (first seen"
        f" on line {_line_number(first)})"
    )

  columns = {
      "timestamp": frame["timestamp"].astype(np.int64).to_numpy(),
      "trade_id": frame["trade_id"].astype(np.int64).to_numpy(),
      "aggressor_id": frame["aggressor_id"].astype(np.int64).to_numpy(),
      "passive_id": frame["passive_id"]
      .replace("", str(utils.ABSENT))
      .astype(np.int64)
      .to_numpy(),
      "side": frame["side"].map(SIDE_CODES).to_numpy(dtype=np.int8),
  }
  for name, column in _UNIT_COLUMNS.items():
    exponent = (
        metadata.volume_exponent
        if name == "volume"
        else metadata.price_exponent
    )
    columns[column] = _decimal_units(frame[name], exponent, name)

  for name in ("aggressor_id", "passive_id"):
    too_large = columns[name] > tape_lib.MAX_TRADER_ID
    if np.any(too_large):
      row = int(np.flatnonzero(too_large)[0])
      raise tape_lib.TapeFormatError(
          f"Line {_line_number(row)}: {name} exceeds {tape_lib.MAX_TRADER_ID}"
      )
  for name in ("price", "volume"):
    non_positive = columns[_UNIT_COLUMNS[name]] <= 0
    if np.any(non_positive):
      row = int(np.flatnonzero(non_positive)[0])
      raise tape_lib.TapeFormatError(
          f"Line {_line_number(row)}: {name} should be positive"
      )

  tape = tape_lib.Tape.from_columns(columns, metadata, n_rows=frame.shape[0])
  logging.info(
      "Parsed %d CSV rows (%d inversions repaired)",
      tape.report.n_rows,
      tape.report.n_inversions,
  )
  return tape


def format_decimal(units: np.ndarray, exponent: int) -> pd.Series:
  """Formats scaled integers as exact decimal strings, -1 as empty strings."""
  units = np.asarray(units, dtype=np.int64)
  scale = 10**exponent
  text = pd.Series(units // scale).astype(str)
  if exponent:
    fraction = pd.Series(units % scale).astype(str).str.zfill(exponent)
    text = text + "." + fraction
  return text.where(units != utils.ABSENT, "")


def tape_frame(tape: tape_lib.Tape) -> pd.DataFrame:
  """Returns the tape as a frame of CSV exchange-format strings."""
  metadata = tape.metadata
  return pd.DataFrame({
      "timestamp": tape.timestamp,
      "trade_id": tape.trade_id,
      "aggressor_id": tape.aggressor_id,
      "passive_id": pd.Series(tape.passive_id)
      .astype(str)
      .where(tape.passive_id != utils.ABSENT, ""),
      "side": np.where(tape.side == tape_lib.BUY, "B", "S"),
      "price": format_decimal(tape.price_units, metadata.price_exponent),
      "volume": format_decimal(tape.volume_units, metadata.volume_exponent),
      "best_bid": format_decimal(tape.bid_units, metadata.price_exponent),
      "best_ask": format_decimal(tape.ask_units, metadata.price_exponent),
  })


def write_csv(
    tape: tape_lib.Tape, sink: Union[str, os.PathLike, IO[str]]
) -> None:
  """Writes a tape in the CSV exchange format.

  Args:
    tape: The tape to write.
    sink: Path or text stream.
  """
  tape_frame(tape).to_csv(sink, index=False, lineterminator="\n")
