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

"""Test the CSV exchange format."""

import io
import re

import numpy as np
from metaimpact import tape as tape_lib
import pytest

_HEADER = (
    "timestamp,trade_id,aggressor_id,passive_id,side,price,volume,best_bid,"
    "best_ask\n"
)


def _csv(*rows: str) -> bytes:
  return (_HEADER + "".join(row + "\n" for row in rows)).encode("utf-8")


def test_parse_csv():
  """Test exact decimal parsing and optional fields."""
  tape = tape_lib.parse_csv(
      _csv(
          "2000,11,5,,B,100.5,0.12345678,100.4,100.5",
          "1000,10,6,9,S,100.49,2,,",
      )
  )
  np.testing.assert_array_equal(tape.trade_id, [10, 11])
  np.testing.assert_array_equal(tape.price_units, [10_049_000, 10_050_000])
  np.testing.assert_array_equal(tape.volume_units, [200_000_000, 12_345_678])
  np.testing.assert_array_equal(tape.passive_id, [9, -1])
  np.testing.assert_array_equal(tape.bid_units, [-1, 10_040_000])
  assert tape.report.n_inversions == 1


def test_round_trip():
  """Test that writing and re-parsing a tape preserves every record."""
  tape = tape_lib.parse_csv(
      _csv(
          "1000,1,5,,B,100.5,0.12345678,100.4,100.5",
          "1000,2,6,9,S,100.49,2,,",
          "86400000000001,3,5,6,S,.5,0.00000001,0.4,0.6",
      )
  )
  buffer = io.StringIO()
  tape_lib.write_csv(tape, buffer)
  assert tape_lib.parse_csv(buffer.getvalue().encode("utf-8")).equals(tape)


def test_schema_mapping():
  """Test renamed columns and missing optional columns."""
  data = b"ts,id,trader,side,price,volume\n1,1,4,B,1.5,1\n"
  tape = tape_lib.parse_csv(
      data, schema={"timestamp": "ts", "trade_id": "id", "aggressor_id": "trader"}
  )
  assert len(tape) == 1
  assert np.isnan(tape.best_bid[0])
  assert tape.aggressor_id[0] == 4


def test_empty_csv():
  """Test that a header-only file gives an empty tape."""
  tape = tape_lib.parse_csv(_csv())
  assert len(tape) == 0


def test_malformed_rows():
  """Test that malformed rows are reported with their file line."""
  with pytest.raises(
      tape_lib.TapeFormatError,
      match=re.escape("Line 3: duplicate trade_id 1 (first seen on line 2)"),
  ):
    tape_lib.parse_csv(_csv("1,1,4,,B,1.5,1,,", "2,1,4,,B,1.5,1,,"))

  with pytest.raises(
      tape_lib.TapeFormatError,
      match=re.escape("Line 2: malformed side value 'X'"),
  ):
    tape_lib.parse_csv(_csv("1,1,4,,X,1.5,1,,"))

  with pytest.raises(
      tape_lib.TapeFormatError,
      match=re.escape("Line 3: malformed aggressor_id value 'alice'"),
  ):
    tape_lib.parse_csv(_csv("1,1,4,,B,1.5,1,,", "2,2,alice,,B,1.5,1,,"))

  with pytest.raises(
      tape_lib.TapeFormatError,
      match=re.escape(
          "Line 2: price value '1.123456' has more than 5 decimal digits"
      ),
  ):
    tape_lib.parse_csv(_csv("1,1,4,,B,1.123456,1,,"))

  with pytest.raises(
      tape_lib.TapeFormatError, match=re.escape("Line 2: volume should be positive")
  ):
    tape_lib.parse_csv(_csv("1,1,4,,B,1.5,0,,"))

  with pytest.raises(
      tape_lib.TapeFormatError, match=re.escape("Missing required column(s) volume.")
  ):
    tape_lib.parse_csv(b"timestamp,trade_id,aggressor_id,side,price\n1,1,1,B,1\n")


def test_trailing_zeros():
  """Test that zero digits beyond the exponent are accepted."""
  tape = tape_lib.parse_csv(_csv("1,1,4,,B,1.500000,0.1234567800,,"))
  assert tape.price_units[0] == 150_000
  assert tape.volume_units[0] == 12_345_678
