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

"""Hill estimator of the tail index of a distribution."""

import dataclasses
from typing import Any, Mapping, Sequence

import numpy as np

MIN_EXCEEDANCES = 10


@dataclasses.dataclass(frozen=True, eq=False)
class TailFit:
  """Hill estimate of a complementary CDF tail index.

  A CCDF decaying as x**-alpha has a density decaying as x**-(1 + alpha).

  Attributes:
    hill_alpha: Tail index of the complementary CDF.
    hill_alpha_stderr: Asymptotic standard error alpha / sqrt(k).
    k: Number of exceedances used.
    threshold: Threshold above which samples are used.
    n_samples: Total number of samples.
  """

  hill_alpha: float
  hill_alpha_stderr: float
  k: int
  threshold: float
  n_samples: int

  def __post_init__(self):
    if not self.hill_alpha > 0:
      raise ValueError(f"hill_alpha should be positive. Got {self.hill_alpha}.")

  @property
  def pdf_exponent(self) -> float:
    return -(1.0 + self.hill_alpha)

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "hill",
        "convention": "complementary CDF index",
        "hill_alpha": self.hill_alpha,
        "hill_alpha_stderr": self.hill_alpha_stderr,
        "pdf_exponent": self.pdf_exponent,
        "k": self.k,
        "threshold": self.threshold,
        "n_samples": self.n_samples,
    }


def hill_tail(samples: np.ndarray, threshold: float) -> TailFit:
  """Hill estimate alpha = k / sum(log(x_i / threshold)) over the k exceedances.

  Args:
    samples: Array of positive samples.
    threshold: Positive threshold.

  Returns:
    The tail fit.

  Raises:
    ValueError: If the threshold is not positive, or fewer than 10 samples
      exceed it.
  """
  if not threshold > 0:
    raise ValueError(f"threshold should be positive. Got {threshold}.")
  samples = np.asarray(samples, dtype=np.float64)
  samples = samples[np.isfinite(samples)]
  exceedances = samples[samples > threshold]
  k = exceedances.shape[0]
  if k < MIN_EXCEEDANCES:
    raise ValueError(
        f"Hill estimator requires at least {MIN_EXCEEDANCES} samples above"
        f" the threshold {threshold}. Got {k}."
    )
  alpha = k / np.sum(np.log(exceedances / threshold))
  return TailFit(
      hill_alpha=float(alpha),
      hill_alpha_stderr=float(alpha / np.sqrt(k)),
      k=int(k),
      threshold=float(threshold),
      n_samples=int(samples.shape[0]),
  )


def hill_curve(samples: np.ndarray, k_values: Sequence[int]) -> np.ndarray:
  """Hill plot: estimates using the k largest samples, with x_(k+1) as threshold.

  Args:
    samples: Array of positive samples.
    k_values: Numbers of order statistics, each in [1, len(samples) - 1].

  Returns:
    Array of tail index estimates, one per k.
  """
  ordered = np.sort(np.asarray(samples, dtype=np.float64))[::-1]
  k_values = np.asarray(k_values, dtype=np.int64)
  if np.any(k_values < 1) or np.any(k_values >= ordered.shape[0]):
    raise ValueError(
        f"k values should be in [1, {ordered.shape[0] - 1}]. Got {k_values}."
    )
  log_ordered = np.log(ordered)
  cum_logs = np.cumsum(log_ordered)
  sums = cum_logs[k_values - 1] - k_values * log_ordered[k_values]
  return k_values / sums
