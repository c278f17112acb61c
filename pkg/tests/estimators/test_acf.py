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

"""Test the sign autocorrelation."""

import re

import numpy as np
from metaimpact import estimators
import pytest


def test_autocorrelation():
  """Test the autocorrelation of an alternating sequence."""
  values = estimators.autocorrelation(np.array([1, -1, 1, -1]), 2)
  np.testing.assert_allclose(values, [1.0, -1.0, 1.0])


def test_autocorrelation_errors():
  """Test the rejection of short and constant sequences."""
  with pytest.raises(
      ValueError,
      match=re.escape(
          "Autocorrelation requires 1 <= max_lag < n. Got max_lag=3, n=3."
      ),
  ):
    estimators.autocorrelation(np.ones(3), 3)
  with pytest.raises(
      ValueError, match="Autocorrelation of a constant sequence is undefined"
  ):
    estimators.autocorrelation(np.ones(5), 2)


def test_sign_acf():
  """Test the decay fit of a persistent sign sequence."""
  rng = np.random.default_rng(0)
  signs = np.repeat(rng.choice([-1, 1], size=100), 50)
  fit = estimators.sign_acf(signs, max_lag=20, fit_range=(1, 10))
  assert fit.values[0] == 1.0
  assert fit.lags.shape == (21,)
  assert np.all(fit.values[1:11] > 0)
  assert np.isfinite(fit.gamma) and fit.gamma > 0
  assert fit.n == 5000
  assert fit.as_dict()["fit_range"] == [1, 10]


def test_sign_acf_without_fit():
  """Test that an unfittable decay is reported as NaN."""
  fit = estimators.sign_acf(np.array([1, -1] * 10), max_lag=4, fit_range=(1, 4))
  assert np.isnan(fit.gamma)
  np.testing.assert_allclose(fit.values[1], -1.0)
