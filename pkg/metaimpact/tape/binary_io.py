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

"""Reading and writing tapes in the fixed-width binary format.

A file starts with an 8-byte header (magic b"IMPT", u16 version, i8 price
exponent, i8 volume exponent) followed by 64-byte little-endian records.
Absent optional fields are stored as all-ones.
"""

import dataclasses
import os
from typing import IO, Optional, Union

from absl import logging
import numpy as np

from metaimpact import utils
from metaimpact.tape import tape as tape_lib

MAGIC = b"IMPT"
VERSION = 1

HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("version", "<u2"),
    ("price_exponent", "i1"),
    ("volume_exponent", "i1"),
])

RECORD_DTYPE = np.dtype({
    "names": [
        "timestamp",
        "trade_id",
        "aggressor_id",
        "passive_id",
        "side",
        "price",
        "volume",
        "best_bid",
        "best_ask",
    ],
    "formats": ["<i8", "<i8", "<u4", "<u4", "i1", "<i8", "<i8", "<i8", "<i8"],
    "offsets": [0, 8, 16, 20, 24, 32, 40, 48, 56],
    "itemsize": 64,
})

_ABSENT_U4 = np.uint32(0xFFFFFFFF)

Source = Union[str, os.PathLike, bytes, IO[bytes]]


def _read_bytes(source: Source) -> bytes:
  if isinstance(source, bytes):
    return source
  if isinstance(source, (str, os.PathLike)):
    with open(source, "rb") as f:
      return f.read()
  return source.read()


def parse_binary(
    source: Source, metadata: Optional[tape_lib.TapeMetadata] = None
) -> tape_lib.Tape:
  """Parses a binary tape.

  Args:
    source: Path, raw bytes or binary stream.
    metadata: Instrument metadata. Its decimal exponents are replaced by the
      ones declared in the file header.

  Returns:
    The canonical tape with its validation report.

  Raises:
    TapeFormatError: On bad magic bytes, version mismatch or truncation.
  """
  data = _read_bytes(source)
  if len(data) < HEADER_DTYPE.itemsize:
    raise tape_lib.TapeFormatError(
        f"Truncated header: expected {HEADER_DTYPE.itemsize} bytes. Got"
        f" {len(data)}."
    )

  header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
  if header["magic"] != MAGIC:
    raise tape_lib.TapeFormatError(
        f"Bad magic bytes: expected {MAGIC!r}. Got {bytes(header['magic'])!r}."
    )
  if int(header["version"]) != VERSION:
    raise tape_lib.TapeFormatError(
        f"Unsupported binary tape version {int(header['version'])}; expected"
        f" {VERSION}."
    )

  body = data[HEADER_DTYPE.itemsize :]
  trailing = len(body) % RECORD_DTYPE.itemsize
  if trailing:
    raise tape_lib.TapeFormatError(
        f"Truncated record {len(body) // RECORD_DTYPE.itemsize}:"
        f" {trailing} trailing bytes"
    )

  metadata = dataclasses.replace(
      metadata or tape_lib.TapeMetadata(),
      price_exponent=int(header["price_exponent"]),
      volume_exponent=int(header["volume_exponent"]),
  )
  if body:
    records = np.frombuffer(body, dtype=RECORD_DTYPE)
  else:
    records = np.zeros(0, dtype=RECORD_DTYPE)
  absent_aggressor = records["aggressor_id"] == _ABSENT_U4
  if np.any(absent_aggressor):
    row = int(np.flatnonzero(absent_aggressor)[0])
    raise tape_lib.TapeFormatError(f"Record {row}: aggressor_id is absent")

  columns = {
      "timestamp": records["timestamp"],
      "trade_id": records["trade_id"],
      "aggressor_id": records["aggressor_id"].astype(np.int64),
      "passive_id": np.where(
          records["passive_id"] == _ABSENT_U4,
          utils.ABSENT,
          records["passive_id"].astype(np.int64),
      ),
      "side": records["side"],
      "price_units": records["price"],
      "volume_units": records["volume"],
      "bid_units": records["best_bid"],
      "ask_units": records["best_ask"],
  }
  try:
    tape = tape_lib.Tape.from_columns(columns, metadata)
  except tape_lib.TapeFormatError:
    raise
  except ValueError as e:
    raise tape_lib.TapeFormatError(f"Invalid binary records: {e}") from e
  logging.info("Parsed %d binary records", len(tape))
  return tape


def encode_binary(tape: tape_lib.Tape) -> bytes:
  """Encodes a tape in the binary format."""
  header = np.zeros(1, dtype=HEADER_DTYPE)
  header["magic"] = MAGIC
  header["version"] = VERSION
  header["price_exponent"] = tape.metadata.price_exponent
  header["volume_exponent"] = tape.metadata.volume_exponent

  records = np.zeros(len(tape), dtype=RECORD_DTYPE)
  records["timestamp"] = tape.timestamp
  records["trade_id"] = tape.trade_id
  records["aggressor_id"] = tape.aggressor_id.astype(np.uint32)
  records["passive_id"] = np.where(
      tape.passive_id == utils.ABSENT, _ABSENT_U4, tape.passive_id
  ).astype(np.uint32)
  records["side"] = tape.side
  records["price"] = tape.price_units
  records["volume"] = tape.volume_units
  records["best_bid"] = tape.bid_units
  records["best_ask"] = tape.ask_units
  return header.tobytes() + records.tobytes()


def write_binary(
    tape: tape_lib.Tape, sink: Union[str, os.PathLike, IO[bytes]]
) -> None:
  """Writes a tape in the binary format to a path or binary stream."""
  data = encode_binary(tape)
  if isinstance(sink, (str, os.PathLike)):
    with open(sink, "wb") as f:
      f.write(data)
  else:
    sink.write(data)
