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

"""Configuration of the synthetic tape generator."""

import dataclasses
import datetime
import json
import os
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from metaimpact import utils

SCHEDULES = ("linear", "front_loaded")
SIGN_MODES = ("independent", "long_memory")

# Child-count mix of the study's metaorder population over 1, 2-4, 5-9, >=10.
STUDY_CHILD_COUNT_MIX = (0.61, 0.29, 0.065, 0.035)


@dataclasses.dataclass(frozen=True)
class SyntheticScenario:
  """Parameters of a synthetic trader-tagged tape with a planted impact law.

  Size and duration distributions are lognormal; this is a modeling choice
  and is recorded as such in to_json.

  Attributes:
    seed: Root seed of every random stream.
    n_traders: Number of traders executing metaorders.
    n_days: Number of simulated days.
    start_day: ISO date of the first simulated day (UTC).
    t_inact: Inactivity threshold in seconds the scenario is designed for.
    min_gap_seconds: Minimum gap between consecutive metaorders of a trader.
    mean_extra_gap_seconds: Mean of the exponential gap added to the minimum.
    size_log_mean: Mean of log |Q| with |Q| in BTC.
    size_log_std: Standard deviation of log |Q|.
    duration_log_mean: Mean of log T with T in seconds.
    duration_log_std: Standard deviation of log T.
    min_duration: Minimum duration of a multi-child metaorder, in seconds.
    max_duration: Maximum duration, in seconds.
    child_count_mix: Probabilities of 1, 2-4, 5-9 and >= 10 child trades.
    max_children: Largest number of child trades.
    schedule: Child timing, "linear" or "front_loaded".
    jitter: Relative jitter of interior child times, in [0, 1).
    y0: Mean daily Y-ratio.
    sigma_y: Standard deviation of the daily Y-ratio.
    delta: Impact exponent.
    noise_sigma: Diffusive noise volatility per sqrt(day).
    pi_inf: Fraction of the peak impact retained after execution.
    sign_mode: "independent" or "long_memory" metaorder signs.
    gamma: Decay exponent of the sign autocorrelation in long_memory mode.
    daily_volume: Expected background volume per day, in BTC.
    background_trade_size: Mean background trade volume, in BTC.
    background_in_flow: Whether background trades move the price.
    background_decay_seconds: Relaxation time of background impact.
    spread: Relative bid-ask spread; 0 omits the quotes.
    base_price: Initial price in USD/BTC.
    n_liquidity_providers: Size of the pool of passive counterparties.
    y_tilde: Optional constant prefactor overriding the daily Y-ratio solve.
  """

  seed: int = 0
  n_traders: int = 50
  n_days: int = 10
  start_day: str = "2013-01-01"
  t_inact: float = 3600.0
  min_gap_seconds: float = 7200.0
  mean_extra_gap_seconds: float = 3600.0
  size_log_mean: float = 0.0
  size_log_std: float = 1.5
  duration_log_mean: float = 2.5
  duration_log_std: float = 1.0
  min_duration: float = 1.0
  max_duration: float = 1800.0
  child_count_mix: Tuple[float, float, float, float] = STUDY_CHILD_COUNT_MIX
  max_children: int = 30
  schedule: str = "linear"
  jitter: float = 0.0
  y0: float = 0.9
  sigma_y: float = 0.35
  delta: float = 0.5
  noise_sigma: float = 0.02
  pi_inf: float = 0.5
  sign_mode: str = "independent"
  gamma: float = 0.4
  daily_volume: float = 2000.0
  background_trade_size: float = 0.5
  background_in_flow: bool = False
  background_decay_seconds: float = 60.0
  spread: float = 0.0005
  base_price: float = 100.0
  n_liquidity_providers: int = 20
  y_tilde: Optional[float] = None

  def __post_init__(self):
    object.__setattr__(self, "child_count_mix", tuple(self.child_count_mix))
    problems = []
    for name in (
        "n_traders",
        "n_days",
        "t_inact",
        "mean_extra_gap_seconds",
        "size_log_std",
        "duration_log_std",
        "min_duration",
        "max_duration",
        "delta",
        "background_trade_size",
        "background_decay_seconds",
        "base_price",
        "n_liquidity_providers",
    ):
      if not getattr(self, name) > 0:
        problems.append(f"{name} should be positive. Got {getattr(self, name)}.")
    for name in ("noise_sigma", "sigma_y", "daily_volume", "spread"):
      if not getattr(self, name) >= 0:
        problems.append(
            f"{name} should be non-negative. Got {getattr(self, name)}."
        )
    if self.min_gap_seconds < self.t_inact:
      problems.append(
          "min_gap_seconds should be at least t_inact to keep same-trader"
          f" metaorders apart. Got {self.min_gap_seconds} < {self.t_inact}."
      )
    if self.max_duration >= self.t_inact:
      problems.append(
          f"max_duration should be below t_inact. Got {self.max_duration}."
      )
    if self.min_duration > self.max_duration:
      problems.append(
          f"min_duration should not exceed max_duration. Got {self.min_duration}."
      )
    if (
        len(self.child_count_mix) != 4
        or min(self.child_count_mix) < 0
        or abs(sum(self.child_count_mix) - 1.0) > 1e-9
    ):
      problems.append(
          "child_count_mix should hold 4 non-negative probabilities summing to"
          f" 1. Got {self.child_count_mix}."
      )
    if self.max_children < 10:
      problems.append(
          f"max_children should be at least 10. Got {self.max_children}."
      )
    if self.schedule not in SCHEDULES:
      problems.append(f"schedule should be one of {SCHEDULES}. Got {self.schedule}.")
    if self.sign_mode not in SIGN_MODES:
      problems.append(
          f"sign_mode should be one of {SIGN_MODES}. Got {self.sign_mode}."
      )
    if not 0 <= self.jitter < 1:
      problems.append(f"jitter should be in [0, 1). Got {self.jitter}.")
    if not 0 <= self.pi_inf <= 1:
      problems.append(f"pi_inf should be in [0, 1]. Got {self.pi_inf}.")
    if not 0 < self.gamma < 1:
      problems.append(f"gamma should be in (0, 1). Got {self.gamma}.")
    if not self.spread < 1:
      problems.append(f"spread should be below 1. Got {self.spread}.")
    try:
      datetime.date.fromisoformat(self.start_day)
    except ValueError:
      problems.append(f"start_day should be an ISO date. Got {self.start_day!r}.")
    if problems:
      raise ValueError("Invalid scenario: " + " ".join(problems))

  @property
  def start_time(self) -> int:
    """First simulated nanosecond."""
    day = datetime.date.fromisoformat(self.start_day)
    return (day - datetime.date(1970, 1, 1)).days * utils.NS_PER_DAY

  @property
  def end_time(self) -> int:
    """Nanosecond at which the simulation stops."""
    return self.start_time + self.n_days * utils.NS_PER_DAY

  def replace(self, **changes: Any) -> "SyntheticScenario":
    return dataclasses.replace(self, **changes)

  def as_dict(self) -> Dict[str, Any]:
    record = dataclasses.asdict(self)
    record["child_count_mix"] = list(self.child_count_mix)
    return record

  def to_json(self) -> str:
    record = self.as_dict()
    record["_size_duration_family"] = "lognormal (modeling choice)"
    return json.dumps(record, indent=2, sort_keys=True)

  @classmethod
  def from_dict(cls, record: Mapping[str, Any]) -> "SyntheticScenario":
    """Builds a scenario from a mapping, rejecting unknown fields."""
    known = {field.name for field in dataclasses.fields(cls)}
    fields = {
        name: value for name, value in record.items() if not name.startswith("_")
    }
    unknown = sorted(set(fields) - known)
    if unknown:
      raise ValueError(f"Unknown scenario field(s) {unknown}.")
    return cls(**fields)

  @classmethod
  def from_json(
      cls, source: Union[str, os.PathLike, Mapping[str, Any]]
  ) -> "SyntheticScenario":
    """Builds a scenario from a JSON file path, a JSON string or a mapping."""
    if isinstance(source, Mapping):
      return cls.from_dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
      with open(source, "r", encoding="utf-8") as f:
        text = f.read()
    try:
      record = json.loads(text)
    except json.JSONDecodeError as e:
      raise ValueError(f"Scenario is not valid JSON: {e}") from e
    if not isinstance(record, dict):
      raise ValueError(f"Scenario should be a JSON object. Got {type(record)}.")
    return cls.from_dict(record)
