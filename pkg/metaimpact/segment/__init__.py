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

"""A sub-package reconstructing metaorders and describing their population."""

from metaimpact.segment.metaorder import MetaOrder
from metaimpact.segment.metaorder import metaorder_table
from metaimpact.segment.metaorder import MetaOrders
from metaimpact.segment.metaorder import SegmentationConfig
from metaimpact.segment.segmenter import segment
from metaimpact.segment.stats import active_metaorder_series
from metaimpact.segment.stats import ActiveSeries
from metaimpact.segment.stats import child_count_table
from metaimpact.segment.stats import CHILD_COUNT_BUCKETS
from metaimpact.segment.stats import concurrent_activity
from metaimpact.segment.stats import ConcurrentActivity
from metaimpact.segment.stats import execution_profile
from metaimpact.segment.stats import ExecutionProfile
from metaimpact.segment.stats import log_histogram
from metaimpact.segment.stats import LogHistogram
from metaimpact.segment.stats import profile_subpopulations
from metaimpact.segment.stats import size_distributions
