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

"""Log-spaced binning and labelled reductions used by the binned statistics."""

import dataclasses
import functools
from typing import Optional, Tuple

import jax
import jax.numpy as jnp
import numpy as np

# Guards edge values such as exact decades against round-off in log10.
_LOG_EPS = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class LogBinning:
  """Log-spaced bins anchored on powers of ten.

  Bin k covers [anchor * 10**(k / bins_per_decade),
  anchor * 10**((k + 1) / bins_per_decade)).

  Attributes:
    bins_per_decade: Number of bins per factor of ten.
    n_min: Minimum number of samples for a bin to be reported.
    anchor: Value that falls exactly on a bin edge.
  """

  bins_per_decade: int = 8
  n_min: int = 50
  anchor: float = 1.0

  def __post_init__(self):
    if self.bins_per_decade < 1:
      raise ValueError(
          "bins_per_decade should be a positive integer. Got"
          f" {self.bins_per_decade}."
      )
    if self.n_min < 1:
      raise ValueError(f"n_min should be at least 1. Got {self.n_min}.")
    if not self.anchor > 0:
      raise ValueError(f"anchor should be positive. Got {self.anchor}.")

  def bin_index(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Absolute bin index of each value and the mask of binnable values."""
    values = np.asarray(values, dtype=np.float64)
    valid = np.isfinite(values) & (values > 0)
    index = np.full(values.shape, -1, dtype=np.int64)
    index[valid] = np.floor(
        self.bins_per_decade * np.log10(values[valid] / self.anchor) + _LOG_EPS
    ).astype(np.int64)
    return index, valid

  def digitize(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Assigns values to the bins spanning their range.

    Args:
      values: Array of values to bin.

    Returns:
      labels: Array with the bin label of each value in 0, ..., num_bins - 1,
        or -1 for values that cannot be binned (non-positive, non-finite).
      edges: Array of shape (num_bins + 1,) with the bin edges.
    """
    index, valid = self.bin_index(values)
    if not np.any(valid):
      return np.full(index.shape, -1, dtype=np.int64), np.zeros(0)

    first, last = index[valid].min(), index[valid].max()
    labels = np.where(valid, index - first, -1)
    edges = self.anchor * 10.0 ** (
        np.arange(first, last + 2) / self.bins_per_decade
    )
    return labels, edges


def geometric_centers(edges: np.ndarray) -> np.ndarray:
  """Geometric mid-points of consecutive bin edges."""
  edges = np.asarray(edges, dtype=np.float64)
  return np.sqrt(edges[:-1] * edges[1:])


@functools.partial(jax.jit, static_argnames="num_labels")
def segment_sums(
    data: jnp.ndarray,
    labels: jnp.ndarray,
    num_labels: int,
) -> jnp.ndarray:
  """Given a sequence of elements and their labels, returns the sum of each label.

  Args:
    data: Array of shape (a_len, ...) where a_len is an arbitrary integer.
    labels: Label array of shape (a_len,). Labels outside
      0, ..., num_labels - 1 (e.g. -1) are dropped.
    num_labels: Number of different labels.

  Returns:
    Array of shape (num_labels, ...) with the per-label sums.
  """
  labels = jnp.where(labels < 0, num_labels, labels)
  sums = jnp.zeros((num_labels,) + data.shape[1:], dtype=data.dtype)
  return sums.at[labels].add(data, mode="drop")


def binned_means(
    values: np.ndarray,
    labels: np.ndarray,
    num_labels: int,
    weights: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
  """Per-label counts, means and standard errors of the means.

  Args:
    values: Array of shape (a_len,) of finite values.
    labels: Label array of shape (a_len,), -1 for dropped entries.
    num_labels: Number of different labels.
    weights: Optional non-negative weights. The standard error then uses the
      weighted variance and the plain count.

  Returns:
    counts: Number of values per label.
    means: Mean per label, NaN for empty labels.
    stderrs: Standard error of the mean per label, NaN below two samples.
  """
  values = np.asarray(values, dtype=np.float64)
  labels = np.asarray(labels, dtype=np.int64)
  if num_labels == 0:
    empty = np.zeros(0)
    return empty.astype(np.int64), empty, empty
  if weights is None:
    weights = np.ones_like(values)
  weights = np.asarray(weights, dtype=np.float64)

  counts = np.asarray(
      segment_sums(jnp.ones_like(values), labels, num_labels)
  ).astype(np.int64)
  weight_sums = np.asarray(segment_sums(weights, labels, num_labels))
  weighted_sums = np.asarray(segment_sums(weights * values, labels, num_labels))

  with np.errstate(invalid="ignore", divide="ignore"):
    means = np.where(weight_sums > 0, weighted_sums / weight_sums, np.nan)
    residuals = values - means[np.clip(labels, 0, num_labels - 1)]
    squares = np.asarray(
        segment_sums(weights * residuals**2, labels, num_labels)
    )
    variances = np.where(
        counts > 1, squares / weight_sums * counts / (counts - 1), np.nan
    )
    stderrs = np.sqrt(variances / counts)
  return counts, means, stderrs
