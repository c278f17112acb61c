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

"""A sub-package generating synthetic tapes with planted metaorders."""

from metaimpact.synth.generator import BACKGROUND_TRADER_BASE
from metaimpact.synth.generator import child_fractions
from metaimpact.synth.generator import child_volumes
from metaimpact.synth.generator import fractional_gaussian_noise
from metaimpact.synth.generator import generate
from metaimpact.synth.generator import GroundTruth
from metaimpact.synth.generator import LIQUIDITY_PROVIDER_BASE
from metaimpact.synth.generator import metaorder_signs
from metaimpact.synth.generator import plant_metaorders
from metaimpact.synth.generator import random_streams
from metaimpact.synth.generator import solve_y_tilde
from metaimpact.synth.oracle import brute_force_stats
from metaimpact.synth.oracle import BruteForceStats
from metaimpact.synth.oracle import MAX_ORACLE_TRADES
from metaimpact.synth.oracle import segmentation_agreement
from metaimpact.synth.oracle import SegmentationAgreement
from metaimpact.synth.scenario import SCHEDULES
from metaimpact.synth.scenario import SIGN_MODES
from metaimpact.synth.scenario import STUDY_CHILD_COUNT_MIX
from metaimpact.synth.scenario import SyntheticScenario
