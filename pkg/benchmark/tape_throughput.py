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

"""Script to benchmark ingestion, segmentation and impact summaries."""
import os
import resource
import time

import joblib

from metaimpact import impact
from metaimpact import segment
from metaimpact import synth
from metaimpact import tape as tape_lib

# About 10M trades: 1M background trades per day over 10 days.
scenario = synth.SyntheticScenario(
    seed=0,
    n_traders=2000,
    n_days=10,
    daily_volume=500_000.0,
    background_trade_size=0.5,
    y_tilde=1e-4,
)
tape_fname = f'tape_seed_{scenario.seed}_days_{scenario.n_days}.bin'
if not os.path.exists(tape_fname):
  start = time.time()
  tape, _ = synth.generate(scenario)
  tape_lib.write_binary(tape, tape_fname)
  print(f'Generated {len(tape)} trades in {time.time() - start:.1f} s')

for workers in [1, 4]:
  results_fname = f'throughput_workers_{workers}.joblib'
  if os.path.exists(results_fname):
    results = joblib.load(results_fname)
  else:
    timings = {}
    start = time.time()
    tape = tape_lib.parse_binary(tape_fname)
    timings['ingest'] = time.time() - start

    start = time.time()
    metaorders = segment.segment(
        tape, segment.SegmentationConfig(t_inact=3600.0), workers
    )
    timings['segment'] = time.time() - start

    start = time.time()
    summaries = impact.impact_summaries(
        tape, metaorders, impact.impact_paths(tape, metaorders)
    )
    timings['impact'] = time.time() - start

    results = {
        'n_trades': len(tape),
        'n_metaorders': len(summaries),
        'timings': timings,
        'total': sum(timings.values()),
        # Kilobytes on Linux.
        'max_rss_gb': resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1e6,
    }
    joblib.dump(results, results_fname)

  print(f'Workers {workers}', results)
