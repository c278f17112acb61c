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

"""Peak impact curves, the trajectory identity check and speed prefactors."""

import dataclasses
from typing import Any, Mapping, Optional

import numpy as np
import pandas as pd

from metaimpact.estimators import power_law
from metaimpact.impact import paths as paths_lib
from metaimpact.utils import binning


@dataclasses.dataclass(frozen=True, eq=False)
class PeakImpactCurve:
  """Mean impact per log-spaced volume bin.

  Only bins holding at least n_min samples are reported.

  Attributes:
    centers: Array of geometric bin centers in BTC.
    x_mean: Array of mean volumes of the samples in each bin.
    mean: Array of mean impacts.
    stderr: Array of standard errors of the means.
    n: Array of sample counts.
    lo: Array of lower bin edges.
    hi: Array of upper bin edges.
    include_in_trajectory: Whether trajectory samples contributed at r * |Q|.
  """

  centers: np.ndarray
  x_mean: np.ndarray
  mean: np.ndarray
  stderr: np.ndarray
  n: np.ndarray
  lo: np.ndarray
  hi: np.ndarray
  include_in_trajectory: bool = False

  def __call__(self, volume: np.ndarray) -> np.ndarray:
    """Interpolates the curve at volumes, log-log between centers, NaN outside.

    Raises:
      ValueError: If no bin has a positive mean impact.
    """
    volume = np.asarray(volume, dtype=np.float64)
    positive = self.mean > 0
    if not np.any(positive):
      raise ValueError(
          "Cannot interpolate a peak impact curve without a positive bin mean"
      )
    log_centers = np.log(self.centers[positive])
    log_mean = np.log(self.mean[positive])
    inside = (volume >= self.centers[positive].min()) & (
        volume <= self.centers[positive].max()
    )
    with np.errstate(divide="ignore", invalid="ignore"):
      values = np.exp(np.interp(np.log(volume), log_centers, log_mean))
    return np.where(inside, values, np.nan)

  def fit(self) -> power_law.PowerLawFit:
    """Power-law fit of the bin means against bin centers, weighted by counts."""
    return power_law.fit_power_law(self.centers, self.mean, weights=self.n)

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({
        "bin_center": self.centers,
        "bin_lo": self.lo,
        "bin_hi": self.hi,
        "q_mean": self.x_mean,
        "mean": self.mean,
        "stderr": self.stderr,
        "n": self.n,
    })


def binned_curve(
    x: np.ndarray,
    y: np.ndarray,
    bins: binning.LogBinning,
    include_in_trajectory: bool = False,
) -> PeakImpactCurve:
  """Means of y per log-spaced bin of x, dropping bins under bins.n_min.

  Raises:
    ValueError: If no bin reaches bins.n_min samples.
  """
  valid = np.isfinite(y)
  labels, edges = bins.digitize(np.where(valid, x, np.nan))
  num_bins = max(edges.shape[0] - 1, 0)
  counts, means, stderrs = _binned_means(y, labels, num_bins)
  _, x_means, _ = _binned_means(x, labels, num_bins)
  reported = counts >= bins.n_min
  if not np.any(reported):
    raise ValueError(
        f"No bin reaches n_min={bins.n_min} samples. Got at most"
        f" {counts.max() if counts.size else 0}."
    )
  return PeakImpactCurve(
      centers=binning.geometric_centers(edges)[reported],
      x_mean=x_means[reported],
      mean=means[reported],
      stderr=stderrs[reported],
      n=counts[reported],
      lo=edges[:-1][reported],
      hi=edges[1:][reported],
      include_in_trajectory=include_in_trajectory,
  )


def _binned_means(values, labels, num_bins):
  values = np.where(labels >= 0, values, 0.0)
  return binning.binned_means(values, labels, num_bins)


def peak_impact_curve(
    summaries: paths_lib.ImpactSummaries,
    bins: binning.LogBinning = binning.LogBinning(bins_per_decade=8, n_min=50),
    include_in_trajectory: bool = False,
    paths: Optional[paths_lib.ImpactPaths] = None,
    min_children: int = 1,
    mask: Optional[np.ndarray] = None,
) -> PeakImpactCurve:
  """Mean peak impact per log-spaced |Q| bin.

  With include_in_trajectory, every interior trajectory sample (r, impact) of
  a metaorder with T > 0 also contributes at volume r * |Q|, as the peak
  impact the metaorder would have had if it had stopped there.

  Args:
    summaries: Impact summaries.
    bins: Volume binning, with the minimum count per reported bin.
    include_in_trajectory: Whether trajectory samples contribute.
    paths: Trajectories, required with include_in_trajectory.
    min_children: Minimum number of child trades of contributing metaorders.
    mask: Optional mask restricting the population.

  Returns:
    The peak impact curve.

  Raises:
    ValueError: If every bin is under-populated, or paths are missing.
  """
  selected = summaries.n_children >= min_children
  if mask is not None:
    selected &= np.asarray(mask, dtype=bool)
  volumes = [summaries.q[selected]]
  impacts = [summaries.peak[selected]]

  if include_in_trajectory:
    if paths is None:
      raise ValueError("include_in_trajectory requires impact paths")
    if not np.array_equal(paths.ids, summaries.ids):
      raise ValueError("paths and summaries should cover the same metaorders")
    with_path = selected & summaries.has_duration
    interior = slice(1, -1)
    fractions = paths.fractions[interior]
    volumes.append(
        (summaries.q[with_path, None] * fractions[None, :]).ravel()
    )
    impacts.append(paths.impact[with_path][:, interior].ravel())

  return binned_curve(
      np.concatenate(volumes),
      np.concatenate(impacts),
      bins,
      include_in_trajectory=include_in_trajectory,
  )


@dataclasses.dataclass(frozen=True, eq=False)
class TrajectoryComparison:
  """Mean trajectory against the peak impact curve evaluated at r * |Q|.

  Attributes:
    fractions: Array of executed fractions r.
    path_mean: Array of mean trajectory impacts at each r.
    curve_mean: Array of mean curve values at r * |Q|.
    ratio: Array of path_mean / curve_mean.
    n: Array of metaorders compared at each r.
  """

  fractions: np.ndarray
  path_mean: np.ndarray
  curve_mean: np.ndarray
  ratio: np.ndarray
  n: np.ndarray

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame(dataclasses.asdict(self))

  def max_relative_error(self, min_fraction: float = 0.1) -> float:
    compared = (self.fractions >= min_fraction) & np.isfinite(self.ratio)
    if not np.any(compared):
      return float("nan")
    return float(np.abs(self.ratio[compared] - 1.0).max())


def trajectory_comparison(
    paths: paths_lib.ImpactPaths,
    summaries: paths_lib.ImpactSummaries,
    curve: PeakImpactCurve,
    mask: Optional[np.ndarray] = None,
) -> TrajectoryComparison:
  """Compares trajectory samples with the peak impact curve at r * |Q|.

  Args:
    paths: Impact trajectories.
    summaries: Impact summaries of the same metaorders.
    curve: Peak impact curve.
    mask: Optional mask restricting the metaorders compared. Metaorders with
      T = 0 never are.

  Returns:
    Per-fraction means of both sides and their ratio.
  """
  selected = summaries.has_duration.copy()
  if mask is not None:
    selected &= np.asarray(mask, dtype=bool)
  volumes = summaries.q[selected, None] * paths.fractions[None, :]
  predicted = curve(volumes)
  observed = np.where(np.isfinite(predicted), paths.impact[selected], np.nan)
  n = np.isfinite(predicted).sum(axis=0)
  with np.errstate(invalid="ignore", divide="ignore"):
    path_mean = np.nansum(observed, axis=0) / n
    curve_mean = np.nansum(predicted, axis=0) / n
    ratio = path_mean / curve_mean
  return TrajectoryComparison(
      fractions=paths.fractions.copy(),
      path_mean=path_mean,
      curve_mean=curve_mean,
      ratio=ratio,
      n=n,
  )


@dataclasses.dataclass(frozen=True, eq=False)
class SpeedPrefactors:
  """Prefactors f(mu) of I(t, mu) = f(mu) * t**delta per execution-speed bin.

  Attributes:
    centers: Array of geometric centers of the mu bins.
    prefactor: Array of mean I / t**delta over interior trajectory samples.
    stderr: Array of standard errors.
    n: Array of metaorders per bin.
    delta: Exponent of the elapsed time.
  """

  centers: np.ndarray
  prefactor: np.ndarray
  stderr: np.ndarray
  n: np.ndarray
  delta: float

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({
        "mu_center": self.centers,
        "prefactor": self.prefactor,
        "stderr": self.stderr,
        "n": self.n,
    })

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "mean of I / t**delta per mu bin",
        "delta": self.delta,
        "bins": len(self.centers),
    }


def speed_prefactors(
    paths: paths_lib.ImpactPaths,
    summaries: paths_lib.ImpactSummaries,
    bins: binning.LogBinning = binning.LogBinning(bins_per_decade=4, n_min=50),
    delta: float = 0.5,
) -> SpeedPrefactors:
  """Per execution-speed bin prefactor of the impact against elapsed time.

  Each metaorder with T > 0 contributes the mean of impact / clock**delta over
  its samples with positive clock.

  Raises:
    ValueError: If no mu bin reaches bins.n_min metaorders.
  """
  clock = paths.clock
  with np.errstate(invalid="ignore", divide="ignore"):
    ratios = np.where(clock > 0, paths.impact / clock**delta, np.nan)
    per_metaorder = np.nanmean(
        np.where(np.isfinite(ratios), ratios, np.nan), axis=1
    )
  mu = np.where(summaries.has_duration, summaries.mu, np.nan)
  mu = np.where(np.isfinite(per_metaorder), mu, np.nan)
  curve = binned_curve(mu, np.nan_to_num(per_metaorder), bins)
  return SpeedPrefactors(
      centers=curve.centers,
      prefactor=curve.mean,
      stderr=curve.stderr,
      n=curve.n,
      delta=delta,
  )
