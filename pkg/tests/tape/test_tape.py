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

"""Test the columnar trade tape."""

import re

import numpy as np
from metaimpact import tape as tape_lib
from metaimpact import utils
import pytest


def _trades():
  return [
      tape_lib.Trade(
          timestamp=2_000,
          trade_id=3,
          aggressor_id=7,
          side=1,
          price=100.0,
          volume=0.5,
          passive_id=9,
          best_bid=99.99,
          best_ask=100.0,
      ),
      tape_lib.Trade(
          timestamp=1_000,
          trade_id=1,
          aggressor_id=7,
          side=-1,
          price=99.99,
          volume=1.0,
          best_bid=99.99,
          best_ask=100.0,
      ),
      tape_lib.Trade(
          timestamp=2_000,
          trade_id=2,
          aggressor_id=8,
          side=1,
          price=100.0,
          volume=2.0,
      ),
  ]


def test_from_trades():
  """Test canonical ordering, inversion counting and decimal scaling."""
  tape = tape_lib.Tape.from_trades(_trades())
  assert len(tape) == 3
  np.testing.assert_array_equal(tape.trade_id, [1, 2, 3])
  np.testing.assert_array_equal(tape.side, [-1, 1, 1])
  np.testing.assert_array_equal(
      tape.price_units, [9_999_000, 10_000_000, 10_000_000]
  )
  np.testing.assert_array_equal(
      tape.volume_units, [100_000_000, 200_000_000, 50_000_000]
  )
  np.testing.assert_array_equal(tape.passive_id, [utils.ABSENT, utils.ABSENT, 9])
  assert tape.report.n_rows == 3
  assert tape.report.n_inversions == 2
  assert tape.report.n_missing_quotes == 1
  assert tape.report.n_warnings == 2
  assert tape.start_time == 1_000
  assert tape.end_time == 2_000
  assert tape.has_quotes


def test_trade_records():
  """Test decimal trade records with absent optional fields."""
  tape = tape_lib.Tape.from_trades(_trades())
  trade = tape[1]
  assert trade.trade_id == 2
  assert trade.passive_id is None
  assert trade.best_bid is None and trade.best_ask is None
  assert tape[2].passive_id == 9
  assert tape[0].best_bid == pytest.approx(99.99)
  assert np.isnan(tape.best_ask[1])


def test_prefix_sums_and_windows():
  """Test prefix sums, window bounds and prevailing trades."""
  tape = tape_lib.Tape.from_trades(_trades())
  np.testing.assert_array_equal(
      tape.cum_signed_units, [0, -100_000_000, 100_000_000, 150_000_000]
  )
  np.testing.assert_array_equal(
      tape.cum_volume_units, [0, 100_000_000, 300_000_000, 350_000_000]
  )
  lo, hi = tape.window_bounds(np.array([1_000, 1_500]), np.array([2_000, 1_900]))
  np.testing.assert_array_equal(lo, [0, 1])
  np.testing.assert_array_equal(hi, [3, 1])
  np.testing.assert_array_equal(
      tape.prevailing_index(np.array([999, 1_000, 2_500])), [-1, 0, 2]
  )


def test_read_only():
  """Test that columns and derived arrays cannot be modified."""
  tape = tape_lib.Tape.from_trades(_trades())
  with pytest.raises(ValueError):
    tape.timestamp[0] = 0
  with pytest.raises(ValueError):
    tape.price[0] = 1.0


def test_quote_report():
  """Test the counting of crossed books and prices through the quote."""
  tape = tape_lib.Tape.from_trades([
      tape_lib.Trade(1, 1, 1, 1, 99.0, 1.0, best_bid=98.0, best_ask=100.0),
      tape_lib.Trade(2, 2, 1, -1, 100.0, 1.0, best_bid=100.5, best_ask=100.0),
      tape_lib.Trade(3, 3, 1, -1, 98.0, 1.0, best_bid=98.0, best_ask=99.0),
  ])
  assert tape.report.n_off_quote_prices == 1
  assert tape.report.n_crossed_quotes == 1
  assert tape.report.n_missing_quotes == 0


def test_invalid_tapes():
  """Test the validation of tape columns."""
  columns = tape_lib.Tape.from_trades(_trades()).columns()

  with pytest.raises(
      ValueError,
      match=re.escape("side should only contain +1 (buy) and -1 (sell)"),
  ):
    tape_lib.Tape.from_columns(dict(columns, side=np.array([1, 0, 1])))

  with pytest.raises(ValueError, match="price should be positive"):
    tape_lib.Tape.from_columns(
        dict(columns, price_units=np.array([1, 0, 1]))
    )

  with pytest.raises(ValueError, match="trade_id should be unique"):
    tape_lib.Tape.from_columns(dict(columns, trade_id=np.array([1, 1, 3])))

  with pytest.raises(ValueError, match="Tape should be strictly ordered"):
    tape_lib.Tape(**dict(columns, timestamp=np.array([3, 2, 1])))

  with pytest.raises(
      ValueError, match=re.escape("Expected volume_units of shape (3,). Got (2,).")
  ):
    tape_lib.Tape(**dict(columns, volume_units=np.array([1, 1])))

  with pytest.raises(
      ValueError, match=re.escape("price_exponent should be in [0, 12]. Got 13.")
  ):
    tape_lib.TapeMetadata(price_exponent=13)


def test_select_and_equals():
  """Test sub-tapes and record equality."""
  tape = tape_lib.Tape.from_trades(_trades())
  sub = tape.select(np.array([True, False, True]))
  np.testing.assert_array_equal(sub.trade_id, [1, 3])
  assert tape.equals(tape_lib.Tape.from_trades(_trades()))
  assert not tape.equals(sub)
