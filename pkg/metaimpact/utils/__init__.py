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

"""A module containing shared constants and helper functions."""

import functools
from typing import Any, Callable

# Timestamps are integer nanoseconds since the Unix epoch.
NS_PER_SECOND = 1_000_000_000
SECONDS_PER_DAY = 86_400
NS_PER_DAY = SECONDS_PER_DAY * NS_PER_SECOND

# Sentinel for absent optional integer fields (passive id, quotes).
ABSENT = -1


def cached_property(func: Callable[..., Any]) -> property:
  """Customized cached property decorator.

  Args:
    func: Member function to be decorated

  Returns:
    Decorated cached property
  """
  return property(functools.lru_cache(None)(func))


def seconds_to_ns(seconds: float) -> int:
  """Converts a duration in seconds to integer nanoseconds."""
  return int(round(seconds * NS_PER_SECOND))


def make_read_only(*arrays: Any) -> None:
  """Flags numpy arrays as immutable in place."""
  for array in arrays:
    array.flags.writeable = False
