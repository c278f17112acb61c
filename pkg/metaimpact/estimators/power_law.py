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

"""Weighted least-squares power-law fits in log-log space."""

import dataclasses
from typing import Any, Mapping, Optional, Tuple

import jax
import jax.numpy as jnp
import numpy as np


@jax.jit
def weighted_least_squares(
    design: jnp.ndarray, target: jnp.ndarray, weights: jnp.ndarray
) -> Tuple[jnp.ndarray, jnp.ndarray, jnp.ndarray]:
  """Solves a weighted linear regression.

  Args:
    design: Array of shape (num_points, num_coefs), including the intercept
      column.
    target: Array of shape (num_points,).
    weights: Array of shape (num_points,) of positive weights.

  Returns:
    coefs: Array of shape (num_coefs,) of fitted coefficients.
    covariance: Array of shape (num_coefs, num_coefs), the coefficient
      covariance scaled by the weighted residual variance.
    r_squared: Weighted coefficient of determination, 1 for a constant target.
  """
  num_points, num_coefs = design.shape
  gram = design.T @ (weights[:, None] * design)
  coefs = jnp.linalg.solve(gram, design.T @ (weights * target))
  residuals = target - design @ coefs
  residual_ss = jnp.sum(weights * residuals**2)
  sigma2 = residual_ss / (num_points - num_coefs)
  covariance = sigma2 * jnp.linalg.inv(gram)

  mean = jnp.sum(weights * target) / jnp.sum(weights)
  total_ss = jnp.sum(weights * (target - mean) ** 2)
  r_squared = jnp.where(total_ss > 0, 1.0 - residual_ss / total_ss, 1.0)
  return coefs, covariance, r_squared


def _valid_points(*arrays: np.ndarray) -> np.ndarray:
  valid = np.ones(arrays[0].shape, dtype=bool)
  for array in arrays:
    valid &= np.isfinite(array) & (array > 0)
  return valid


@dataclasses.dataclass(frozen=True, eq=False)
class PowerLawFit:
  """A fit of y = prefactor * x**exponent.

  Attributes:
    exponent: Fitted exponent (delta for impact curves).
    prefactor: Fitted prefactor exp(intercept).
    exponent_stderr: Standard error of the exponent.
    prefactor_stderr: Standard error of the prefactor (delta method).
    r_squared: Weighted R^2 in log-log space.
    x_range: (min, max) of the x values used.
    n_points: Number of points used.
  """

  exponent: float
  prefactor: float
  exponent_stderr: float
  prefactor_stderr: float
  r_squared: float
  x_range: Tuple[float, float]
  n_points: int

  def __post_init__(self):
    if not self.prefactor > 0:
      raise ValueError(f"prefactor should be positive. Got {self.prefactor}.")

  def __call__(self, x: np.ndarray) -> np.ndarray:
    return self.prefactor * np.asarray(x, dtype=np.float64) ** self.exponent

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "weighted least squares of log y on log x",
        "exponent": self.exponent,
        "prefactor": self.prefactor,
        "exponent_stderr": self.exponent_stderr,
        "prefactor_stderr": self.prefactor_stderr,
        "r_squared": self.r_squared,
        "x_range": list(self.x_range),
        "n_points": self.n_points,
    }


def fit_power_law(
    x: np.ndarray,
    y: np.ndarray,
    weights: Optional[np.ndarray] = None,
    x_range: Optional[Tuple[float, float]] = None,
) -> PowerLawFit:
  """Fits y = prefactor * x**exponent by weighted least squares in log-log space.

  Points with non-positive or non-finite x, y or weight, and points outside
  x_range, are ignored.

  Args:
    x: Array of abscissae.
    y: Array of ordinates.
    weights: Optional array of weights, e.g. bin counts.
    x_range: Optional inclusive (min, max) range of x to fit.

  Returns:
    The fitted power law.

  Raises:
    ValueError: If fewer than 3 points remain or log x has zero variance.
  """
  x = np.asarray(x, dtype=np.float64)
  y = np.asarray(y, dtype=np.float64)
  weights = (
      np.ones_like(x) if weights is None else np.asarray(weights, np.float64)
  )
  valid = _valid_points(x, y, weights)
  if x_range is not None:
    valid &= (x >= x_range[0]) & (x <= x_range[1])
  if valid.sum() < 3:
    raise ValueError(
        f"Power-law fit requires at least 3 valid points. Got {valid.sum()}."
    )

  log_x = np.log(x[valid])
  if np.ptp(log_x) == 0:
    raise ValueError("Power-law fit requires non-zero variance in log x")

  design = np.stack([np.ones_like(log_x), log_x], axis=1)
  coefs, covariance, r_squared = weighted_least_squares(
      design, np.log(y[valid]), weights[valid]
  )
  coefs = np.asarray(coefs)
  stderrs = np.sqrt(np.clip(np.diag(np.asarray(covariance)), 0.0, None))
  prefactor = float(np.exp(coefs[0]))
  return PowerLawFit(
      exponent=float(coefs[1]),
      prefactor=prefactor,
      exponent_stderr=float(stderrs[1]),
      prefactor_stderr=prefactor * float(stderrs[0]),
      r_squared=float(r_squared),
      x_range=(float(x[valid].min()), float(x[valid].max())),
      n_points=int(valid.sum()),
  )


@dataclasses.dataclass(frozen=True, eq=False)
class SurfaceFit:
  """A fit of y = prefactor * x1**exponents[0] * x2**exponents[1].

  Attributes:
    exponents: Fitted exponents of x1 and x2.
    prefactor: Fitted prefactor.
    exponent_stderrs: Standard errors of the exponents.
    r_squared: Weighted R^2 in log space.
    n_points: Number of points used.
  """

  exponents: Tuple[float, float]
  prefactor: float
  exponent_stderrs: Tuple[float, float]
  r_squared: float
  n_points: int

  def as_dict(self) -> Mapping[str, Any]:
    return {
        "estimator": "weighted least squares of log y on (log x1, log x2)",
        "exponents": list(self.exponents),
        "prefactor": self.prefactor,
        "exponent_stderrs": list(self.exponent_stderrs),
        "r_squared": self.r_squared,
        "n_points": self.n_points,
    }


def fit_power_law_2d(
    x1: np.ndarray,
    x2: np.ndarray,
    y: np.ndarray,
    weights: Optional[np.ndarray] = None,
) -> SurfaceFit:
  """Fits a bivariate power law by weighted least squares in log space.

  Args:
    x1: Array of first regressor values.
    x2: Array of second regressor values.
    y: Array of positive targets.
    weights: Optional array of weights.

  Returns:
    The fitted surface.

  Raises:
    ValueError: If fewer than 4 valid points remain or the log regressors are
      collinear.
  """
  x1 = np.asarray(x1, dtype=np.float64)
  x2 = np.asarray(x2, dtype=np.float64)
  y = np.asarray(y, dtype=np.float64)
  weights = (
      np.ones_like(y) if weights is None else np.asarray(weights, np.float64)
  )
  valid = _valid_points(x1, x2, y, weights)
  if valid.sum() < 4:
    raise ValueError(
        f"Surface fit requires at least 4 valid points. Got {valid.sum()}."
    )

  design = np.stack(
      [np.ones(valid.sum()), np.log(x1[valid]), np.log(x2[valid])], axis=1
  )
  if np.linalg.matrix_rank(design) < 3:
    raise ValueError("Surface fit requires non-collinear log regressors")
  coefs, covariance, r_squared = weighted_least_squares(
      design, np.log(y[valid]), weights[valid]
  )
  coefs = np.asarray(coefs)
  stderrs = np.sqrt(np.clip(np.diag(np.asarray(covariance)), 0.0, None))
  return SurfaceFit(
      exponents=(float(coefs[1]), float(coefs[2])),
      prefactor=float(np.exp(coefs[0])),
      exponent_stderrs=(float(stderrs[1]), float(stderrs[2])),
      r_squared=float(r_squared),
      n_points=int(valid.sum()),
  )
