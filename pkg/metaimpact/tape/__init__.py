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

"""A sub-package defining the trade tape, its file formats and daily aggregates."""

import os
from typing import Optional, Union

from metaimpact.tape.aggregates import aggregates_frame
from metaimpact.tape.aggregates import build_volatility_estimator
from metaimpact.tape.aggregates import daily_aggregates
from metaimpact.tape.aggregates import DailyAggregate
from metaimpact.tape.aggregates import day_date
from metaimpact.tape.aggregates import trade_days
from metaimpact.tape.binary_io import encode_binary
from metaimpact.tape.binary_io import MAGIC
from metaimpact.tape.binary_io import parse_binary
from metaimpact.tape.binary_io import write_binary
from metaimpact.tape.csv_io import parse_csv
from metaimpact.tape.csv_io import tape_frame
from metaimpact.tape.csv_io import write_csv
from metaimpact.tape.tape import BUY
from metaimpact.tape.tape import SELL
from metaimpact.tape.tape import Tape
from metaimpact.tape.tape import TapeFormatError
from metaimpact.tape.tape import TapeMetadata
from metaimpact.tape.tape import Trade
from metaimpact.tape.tape import ValidationReport


def parse_tape(
    path: Union[str, os.PathLike],
    file_format: str = "auto",
    metadata: Optional[TapeMetadata] = None,
) -> Tape:
  """Parse a tape file in a supported format, sniffing magic bytes when auto."""
  if file_format == "auto":
    with open(path, "rb") as f:
      file_format = "binary" if f.read(len(MAGIC)) == MAGIC else "csv"
  if file_format == "binary":
    return parse_binary(path, metadata)
  elif file_format == "csv":
    return parse_csv(path, metadata=metadata)
  else:
    raise NotImplementedError(f"Tape format {file_format} is not supported.")
