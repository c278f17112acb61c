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

"""Test the Hill tail estimator."""

import re

import numpy as np
from metaimpact import estimators
import pytest


def test_hill_tail_pareto():
  """Test the recovery of a Pareto tail index."""
  rng = np.random.default_rng(0)
  samples = rng.pareto(1.5, size=100_000) + 1.0
  fit = estimators.hill_tail(samples, threshold=1.0)
  assert fit.hill_alpha == pytest.approx(1.5, abs=0.05)
  assert fit.k == 100_000
  assert fit.hill_alpha_stderr == pytest.approx(fit.hill_alpha / np.sqrt(fit.k))
  assert fit.pdf_exponent == pytest.approx(-(1.0 + fit.hill_alpha))
  assert fit.as_dict()["convention"] == "complementary CDF index"


def test_hill_curve():
  """Test that the Hill plot matches the estimator at order statistics."""
  rng = np.random.default_rng(1)
  samples = rng.pareto(2.0, size=500) + 1.0
  ordered = np.sort(samples)[::-1]
  curve = estimators.hill_curve(samples, [10, 50, 200])
  for k, value in zip([10, 50, 200], curve):
    fit = estimators.hill_tail(samples, threshold=ordered[k])
    assert fit.k == k
    assert value == pytest.approx(fit.hill_alpha)


def test_hill_errors():
  """Test the rejection of thin tails and bad thresholds."""
  with pytest.raises(
      ValueError,
      match=re.escape(
          "Hill estimator requires at least 10 samples above the threshold"
          " 5.0. Got 4."
      ),
  ):
    estimators.hill_tail(np.arange(10.0), threshold=5.0)
  with pytest.raises(ValueError, match="threshold should be positive"):
    estimators.hill_tail(np.arange(10.0), threshold=0.0)
  with pytest.raises(ValueError, match=re.escape("k values should be in [1, 9]")):
    estimators.hill_curve(np.arange(1.0, 11.0), [10])
