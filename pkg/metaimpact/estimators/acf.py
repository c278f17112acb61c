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

"""Autocorrelation of metaorder signs and its power-law decay."""

import dataclasses
from typing import Any, Mapping, Tuple

from absl import logging
import numpy as np

from metaimpact.estimators import power_law


@dataclasses.dataclass(frozen=True, eq=False)
class AcfFit:
  """Sample autocorrelation and its fitted decay C(l) ~ amplitude * l**-gamma.

  Attributes:
    lags: Array of lags 0, ..., max_lag.
    values: Array of correlations, values[0] = 1.
    gamma: Decay exponent, NaN if fewer than 3 positive correlations fall in
      the fit range.
    gamma_stderr: Standard error of gamma.
    amplitude: Fitted prefactor of the decay.
    fit_range: Inclusive lag range used for the fit.
    n: Length of the sign sequence.
  """

  lags: np.ndarray
  values: np.ndarray
  gamma: float
  gamma_stderr: float
  amplitude: float
  fit_range: Tuple[int, int]
  n: int

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "sample autocorrelation, power-law fit on positive lags",
        "gamma": self.gamma,
        "gamma_stderr": self.gamma_stderr,
        "amplitude": self.amplitude,
        "fit_range": list(self.fit_range),
        "max_lag": int(self.lags[-1]),
        "n": self.n,
    }


def autocorrelation(values: np.ndarray, max_lag: int) -> np.ndarray:
  """Sample autocorrelation C(l) = mean(y_t y_{t+l}) / mean(y_t**2), y centred.

  Args:
    values: Array of shape (n,) with n > max_lag.
    max_lag: Largest lag.

  Returns:
    Array of shape (max_lag + 1,) of correlations.

  Raises:
    ValueError: If the sequence is too short or constant.
  """
  values = np.asarray(values, dtype=np.float64)
  n = values.shape[0]
  if max_lag < 1 or n <= max_lag:
    raise ValueError(
        f"Autocorrelation requires 1 <= max_lag < n. Got max_lag={max_lag},"
        f" n={n}."
    )
  centred = values - values.mean()
  variance = np.dot(centred, centred) / n
  if variance == 0:
    raise ValueError("Autocorrelation of a constant sequence is undefined")

  correlations = np.empty(max_lag + 1)
  correlations[0] = 1.0
  for lag in range(1, max_lag + 1):
    covariance = np.dot(centred[:-lag], centred[lag:]) / (n - lag)
    correlations[lag] = covariance / variance
  return correlations


def sign_acf(
    signs: np.ndarray,
    max_lag: int = 1000,
    fit_range: Tuple[int, int] = (1, 100),
) -> AcfFit:
  """Autocorrelation of a +/-1 sequence ordered by metaorder start time.

  Args:
    signs: Array of signs.
    max_lag: Largest lag reported.
    fit_range: Inclusive lag range of the power-law fit.

  Returns:
    The autocorrelation and its fitted decay exponent.
  """
  values = autocorrelation(signs, max_lag)
  lags = np.arange(max_lag + 1)
  in_range = (lags >= max(fit_range[0], 1)) & (lags <= fit_range[1])
  try:
    fit = power_law.fit_power_law(lags[in_range], values[in_range])
    gamma, gamma_stderr, amplitude = (
        -fit.exponent,
        fit.exponent_stderr,
        fit.prefactor,
    )
  except ValueError as e:
    logging.warning("Sign autocorrelation decay not fitted: %s", e)
    gamma = gamma_stderr = amplitude = float("nan")
  return AcfFit(
      lags=lags,
      values=values,
      gamma=gamma,
      gamma_stderr=gamma_stderr,
      amplitude=amplitude,
      fit_range=tuple(fit_range),
      n=int(np.asarray(signs).shape[0]),
  )
