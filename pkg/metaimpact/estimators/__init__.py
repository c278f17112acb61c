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

"""A sub-package containing the statistical estimators."""

from metaimpact.estimators.acf import AcfFit
from metaimpact.estimators.acf import autocorrelation
from metaimpact.estimators.acf import sign_acf
from metaimpact.estimators.gaussian import fit_gaussian
from metaimpact.estimators.gaussian import GaussianFit
from metaimpact.estimators.power_law import fit_power_law
from metaimpact.estimators.power_law import fit_power_law_2d
from metaimpact.estimators.power_law import PowerLawFit
from metaimpact.estimators.power_law import SurfaceFit
from metaimpact.estimators.tail import hill_curve
from metaimpact.estimators.tail import hill_tail
from metaimpact.estimators.tail import TailFit
