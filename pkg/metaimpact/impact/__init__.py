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

"""A sub-package measuring the market impact of metaorders."""

from metaimpact.impact.curves import binned_curve
from metaimpact.impact.curves import peak_impact_curve
from metaimpact.impact.curves import PeakImpactCurve
from metaimpact.impact.curves import speed_prefactors
from metaimpact.impact.curves import SpeedPrefactors
from metaimpact.impact.curves import trajectory_comparison
from metaimpact.impact.curves import TrajectoryComparison
from metaimpact.impact.event_studies import CURVE_NAMES
from metaimpact.impact.event_studies import event_grid
from metaimpact.impact.event_studies import event_study
from metaimpact.impact.event_studies import event_study_frame
from metaimpact.impact.event_studies import EventStudyCurve
from metaimpact.impact.event_studies import isolation_buckets
from metaimpact.impact.event_studies import speed_buckets
from metaimpact.impact.event_studies import standard_buckets
from metaimpact.impact.event_studies import trend_buckets
from metaimpact.impact.event_studies import volume_buckets
from metaimpact.impact.imbalance import market_imbalance
from metaimpact.impact.imbalance import market_imbalance_units
from metaimpact.impact.isolation import IsolationLabels
from metaimpact.impact.isolation import select_isolated
from metaimpact.impact.liquidity import daily_liquidity_series
from metaimpact.impact.liquidity import DailyLiquidity
from metaimpact.impact.liquidity import liquidity_frame
from metaimpact.impact.liquidity import y_ratios
from metaimpact.impact.paths import impact_path
from metaimpact.impact.paths import impact_paths
from metaimpact.impact.paths import impact_summaries
from metaimpact.impact.paths import ImpactPaths
from metaimpact.impact.paths import ImpactSample
from metaimpact.impact.paths import ImpactSummaries
from metaimpact.impact.paths import ImpactSummary
from metaimpact.impact.paths import window_vwap
from metaimpact.impact.surface import fit_surface
from metaimpact.impact.surface import imbalance_collapse
from metaimpact.impact.surface import ImbalanceCollapse
from metaimpact.impact.surface import impact_surface
from metaimpact.impact.surface import ImpactSurface
from metaimpact.impact.surface import SurfaceExponents
