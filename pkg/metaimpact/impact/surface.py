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

"""The execution impact surface over volume and participation or duration."""

import dataclasses
from typing import Any, Mapping, Optional

import numpy as np
import pandas as pd

from metaimpact.estimators import power_law
from metaimpact.impact import imbalance
from metaimpact.impact import paths as paths_lib
from metaimpact.segment import metaorder
from metaimpact.tape import tape as tape_lib
from metaimpact.utils import binning

SECOND_AXES = ("mu_v", "duration")


@dataclasses.dataclass(frozen=True, eq=False)
class ImpactSurface:
  """Per-cell means over log-spaced |Q| bins and bins of a second covariate.

  Attributes:
    second_axis: Name of the second covariate, "mu_v" or "duration".
    q_edges: Array of shape (num_q + 1,) of |Q| bin edges.
    second_edges: Array of shape (num_second + 1,) of second-axis bin edges.
    count: Array of shape (num_q, num_second) of metaorders per cell.
    mean_exec: Array of mean execution impacts, NaN in masked cells.
    mean_imbalance: Array of mean sign-adjusted market imbalances s * V_signed
      in BTC over the execution windows, NaN in masked cells.
    n_min: Minimum count of an unmasked cell.
  """

  second_axis: str
  q_edges: np.ndarray
  second_edges: np.ndarray
  count: np.ndarray
  mean_exec: np.ndarray
  mean_imbalance: np.ndarray
  n_min: int

  def __post_init__(self):
    if self.second_axis not in SECOND_AXES:
      raise NotImplementedError(
          f"Surface axis {self.second_axis} is not supported."
      )
    expected = (
        max(self.q_edges.shape[0] - 1, 0),
        max(self.second_edges.shape[0] - 1, 0),
    )
    for name in ("count", "mean_exec", "mean_imbalance"):
      if getattr(self, name).shape != expected:
        raise ValueError(
            f"Expected {name} of shape {expected}. Got"
            f" {getattr(self, name).shape}."
        )

  @property
  def mask(self) -> np.ndarray:
    """Cells holding fewer than n_min metaorders."""
    return self.count < self.n_min

  @property
  def q_centers(self) -> np.ndarray:
    return binning.geometric_centers(self.q_edges)

  @property
  def second_centers(self) -> np.ndarray:
    return binning.geometric_centers(self.second_edges)

  def to_frame(self) -> pd.DataFrame:
    """Long-format table of the unmasked cells."""
    q_index, second_index = np.nonzero(~self.mask)
    second_name = "muv_bin" if self.second_axis == "mu_v" else "duration_bin"
    return pd.DataFrame({
        "q_bin": self.q_centers[q_index],
        second_name: self.second_centers[second_index],
        "mean_exec": self.mean_exec[q_index, second_index],
        "mean_imbalance": self.mean_imbalance[q_index, second_index],
        "n": self.count[q_index, second_index],
    })


def impact_surface(
    summaries: paths_lib.ImpactSummaries,
    metaorders: metaorder.MetaOrders,
    tape: tape_lib.Tape,
    q_bins: binning.LogBinning = binning.LogBinning(bins_per_decade=8, n_min=50),
    second_bins: binning.LogBinning = binning.LogBinning(
        bins_per_decade=4, n_min=50
    ),
    second_axis: str = "mu_v",
    mask: Optional[np.ndarray] = None,
) -> ImpactSurface:
  """Bins execution impact and global imbalance on (|Q|, mu_V) or (|Q|, T).

  Args:
    summaries: Impact summaries of the metaorders.
    metaorders: The metaorders the summaries were computed for.
    tape: The tape the metaorders were segmented from.
    q_bins: Binning of |Q|.
    second_bins: Binning of the second covariate. Cells holding fewer than
      the larger n_min of both binnings are masked.
    second_axis: "mu_v" or "duration".
    mask: Optional mask restricting the population.

  Returns:
    The impact surface.
  """
  if second_axis == "mu_v":
    second = summaries.mu_v
  elif second_axis == "duration":
    second = summaries.duration
  else:
    raise NotImplementedError(f"Surface axis {second_axis} is not supported.")
  if len(summaries) != len(metaorders):
    raise ValueError(
        f"Expected summaries for {len(metaorders)} metaorders. Got"
        f" {len(summaries)}."
    )

  selected = np.isfinite(summaries.exec)
  if mask is not None:
    selected &= np.asarray(mask, dtype=bool)
  q_labels, q_edges = q_bins.digitize(np.where(selected, summaries.q, np.nan))
  second_labels, second_edges = second_bins.digitize(
      np.where(selected, second, np.nan)
  )
  num_q = max(q_edges.shape[0] - 1, 0)
  num_second = max(second_edges.shape[0] - 1, 0)
  binned = (q_labels >= 0) & (second_labels >= 0)
  labels = np.where(binned, q_labels * num_second + second_labels, -1)

  signed_imbalance = metaorders.sign * imbalance.market_imbalance(
      tape, metaorders.t_start, metaorders.t_end
  )
  num_cells = num_q * num_second
  count, mean_exec, _ = binning.binned_means(
      np.where(binned, summaries.exec, 0.0), labels, num_cells
  )
  _, mean_imbalance, _ = binning.binned_means(
      np.where(binned, signed_imbalance, 0.0), labels, num_cells
  )
  shape = (num_q, num_second)
  n_min = max(q_bins.n_min, second_bins.n_min)
  masked = count.reshape(shape) < n_min
  return ImpactSurface(
      second_axis=second_axis,
      q_edges=q_edges,
      second_edges=second_edges,
      count=count.reshape(shape),
      mean_exec=np.where(masked, np.nan, mean_exec.reshape(shape)),
      mean_imbalance=np.where(masked, np.nan, mean_imbalance.reshape(shape)),
      n_min=n_min,
  )


@dataclasses.dataclass(frozen=True, eq=False)
class SurfaceExponents:
  """Exponents of I_exec ~ Q**delta / X**delta_prime over the surface cells."""

  delta: float
  delta_prime: float
  fit: power_law.SurfaceFit

  def as_dict(self) -> Mapping[str, Any]:
    return {
        **self.fit.as_dict(),
        "delta": self.delta,
        "delta_prime": self.delta_prime,
    }


def fit_surface(surface: ImpactSurface) -> SurfaceExponents:
  """Fits the unmasked cells with positive mean impact, weighted by counts."""
  q_index, second_index = np.nonzero(~surface.mask)
  fit = power_law.fit_power_law_2d(
      surface.q_centers[q_index],
      surface.second_centers[second_index],
      surface.mean_exec[q_index, second_index],
      weights=surface.count[q_index, second_index],
  )
  return SurfaceExponents(
      delta=fit.exponents[0], delta_prime=-fit.exponents[1], fit=fit
  )


@dataclasses.dataclass(frozen=True, eq=False)
class ImbalanceCollapse:
  """Power law of mean execution impact against mean global imbalance.

  Attributes:
    fit: Fit of mean_exec on mean_imbalance over the unmasked cells.
    relative_deviation: Array of the same shape as the surface with
      mean_exec / fit(mean_imbalance) - 1, NaN outside the fitted cells.
    max_abs_deviation: Largest absolute relative deviation.
  """

  fit: power_law.PowerLawFit
  relative_deviation: np.ndarray
  max_abs_deviation: float

  def as_dict(self) -> Mapping[str, Any]:
    return {
        **self.fit.as_dict(),
        "max_abs_deviation": self.max_abs_deviation,
    }


def imbalance_collapse(surface: ImpactSurface) -> ImbalanceCollapse:
  """Checks the collapse of the surface on a power law of the global imbalance.

  Raises:
    ValueError: If fewer than 3 cells have positive mean impact and imbalance.
  """
  fitted = (
      ~surface.mask
      & (np.nan_to_num(surface.mean_exec) > 0)
      & (np.nan_to_num(surface.mean_imbalance) > 0)
  )
  fit = power_law.fit_power_law(
      surface.mean_imbalance[fitted],
      surface.mean_exec[fitted],
      weights=surface.count[fitted],
  )
  deviation = np.full(surface.count.shape, np.nan)
  deviation[fitted] = (
      surface.mean_exec[fitted] / fit(surface.mean_imbalance[fitted]) - 1.0
  )
  return ImbalanceCollapse(
      fit=fit,
      relative_deviation=deviation,
      max_abs_deviation=float(np.abs(deviation[fitted]).max()),
  )
