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

"""Gaussian moment fit with a Kolmogorov-Smirnov goodness-of-fit distance."""

import dataclasses
from typing import Any, Mapping

import numpy as np
from scipy import stats


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianFit:
  """Moments of a sample and its KS distance to the fitted normal.

  Attributes:
    mean: Sample mean.
    std: Unbiased (ddof=1) sample standard deviation.
    ks_distance: Kolmogorov-Smirnov statistic against N(mean, std), NaN when
      std is 0.
    n: Number of samples.
    ddof: Delta degrees of freedom of std.
  """

  mean: float
  std: float
  ks_distance: float
  n: int
  ddof: int = 1

  def __post_init__(self):
    if not self.std >= 0:
      raise ValueError(f"std should be non-negative. Got {self.std}.")

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "sample moments",
        "mean": self.mean,
        "std": self.std,
        "ddof": self.ddof,
        "ks_distance": self.ks_distance,
        "n": self.n,
    }


def fit_gaussian(samples: np.ndarray) -> GaussianFit:
  """Fits a normal distribution by sample moments.

  Args:
    samples: Array of finite samples.

  Returns:
    The Gaussian fit.

  Raises:
    ValueError: If fewer than 2 samples are given.
  """
  samples = np.asarray(samples, dtype=np.float64)
  if samples.shape[0] < 2:
    raise ValueError(
        f"Gaussian fit requires at least 2 samples. Got {samples.shape[0]}."
    )
  mean = float(samples.mean())
  std = float(samples.std(ddof=1))
  if std > 0:
    ks_distance = float(stats.kstest(samples, "norm", args=(mean, std)).statistic)
  else:
    ks_distance = float("nan")
  return GaussianFit(
      mean=mean, std=std, ks_distance=ks_distance, n=int(samples.shape[0])
  )
