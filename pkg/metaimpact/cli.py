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

"""Command-line surface of the measurement pipeline.

Every sub-command writes plot-ready CSV files and a `manifest.json` into the
output directory. Outputs are deterministic functions of the inputs and the
run configuration, whatever the worker count.

Example:
  metaimpact synth --scenario scenario.json --output_dir out/synth
  metaimpact pipeline out/synth/tape.bin --output_dir out/run
"""

import argparse
import contextlib
import dataclasses
import json
import math
import os
import sys
import time
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from absl import logging
import numpy as np
import pandas as pd
import tqdm

import metaimpact
from metaimpact import estimators
from metaimpact import impact
from metaimpact import segment
from metaimpact import synth
from metaimpact import tape as tape_lib
from metaimpact.utils import binning
from metaimpact.utils import cached_property

MANIFEST_SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "METAIMPACT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "metaimpact_output"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
  """Raised on invalid command-line usage."""


class StageError(RuntimeError):
  """Raised when a pipeline stage fails.

  Attributes:
    stage: Name of the failed stage.
    exit_code: Process exit code, EXIT_DATA for invalid data.
  """

  def __init__(self, stage: str, cause: str, exit_code: int = EXIT_DATA):
    super().__init__(f"stage {stage} failed: {cause}")
    self.stage = stage
    self.exit_code = exit_code


@dataclasses.dataclass(frozen=True, eq=False)
class RunConfig:
  """Configuration of a command-line run.

  Attributes:
    inputs: Paths of the tape files, concatenated into one tape.
    file_format: Tape format, "csv", "binary" or "auto" (sniffed).
    segmentation: Metaorder reconstruction parameters.
    bins_per_decade: Volume bins per decade of the impact curves.
    n_min: Minimum sample count of a reported bin or bucket.
    min_children: Minimum child count of a metaorder entering the impact,
      surface and sign statistics.
    isolation_threshold: Minimum share of the signed market imbalance of an
      isolated metaorder.
    horizon_mult: Isolation window length in units of T.
    output_dir: Directory receiving the outputs.
    workers: Number of segmentation workers.
    n_points: Number of samples of an impact path.
    max_lag: Largest lag of the sign autocorrelation.
    tail_quantile: Quantile of |Q| above which the Hill estimator is applied.
    active_resolution: Grid step of the active metaorder series, in seconds.
  """

  inputs: Tuple[str, ...] = ()
  file_format: str = "auto"
  segmentation: segment.SegmentationConfig = dataclasses.field(
      default_factory=segment.SegmentationConfig
  )
  bins_per_decade: int = 8
  n_min: int = 50
  min_children: int = 2
  isolation_threshold: float = 0.75
  horizon_mult: float = 10.0
  output_dir: str = DEFAULT_OUTPUT_DIR
  workers: int = 1
  n_points: int = 41
  max_lag: int = 1000
  tail_quantile: float = 0.9
  active_resolution: float = 600.0

  def __post_init__(self):
    object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
    if self.file_format not in ("auto", "csv", "binary"):
      raise ValueError(
          f"file_format should be auto, csv or binary. Got {self.file_format}."
      )
    for name in (
        "bins_per_decade",
        "n_min",
        "min_children",
        "isolation_threshold",
        "horizon_mult",
        "workers",
        "max_lag",
        "active_resolution",
    ):
      if not getattr(self, name) > 0:
        raise ValueError(f"{name} should be positive. Got {getattr(self, name)}.")
    if self.n_points < 2:
      raise ValueError(f"n_points should be at least 2. Got {self.n_points}.")
    if not 0 < self.tail_quantile < 1:
      raise ValueError(
          f"tail_quantile should be in (0, 1). Got {self.tail_quantile}."
      )

  @property
  def bins(self) -> binning.LogBinning:
    return binning.LogBinning(
        bins_per_decade=self.bins_per_decade, n_min=self.n_min
    )

  def ensure_output_dir(self) -> None:
    """Creates the output directory.

    Raises:
      ValueError: If the directory cannot be created or written to.
    """
    try:
      os.makedirs(self.output_dir, exist_ok=True)
    except OSError as e:
      raise ValueError(
          f"Cannot create output directory {self.output_dir}: {e}"
      ) from e
    if not os.access(self.output_dir, os.W_OK):
      raise ValueError(f"Output directory {self.output_dir} is not writable")

  def as_dict(self) -> Mapping[str, Any]:
    record = {
        field.name: getattr(self, field.name)
        for field in dataclasses.fields(self)
        if field.name not in ("segmentation", "output_dir")
    }
    record["inputs"] = list(self.inputs)
    record["segmentation"] = self.segmentation.as_dict()
    return record


def json_ready(value: Any) -> Any:
  """Converts a nested record to JSON types, mapping NaN and inf to null."""
  if isinstance(value, Mapping):
    return {str(k): json_ready(v) for k, v in value.items()}
  if isinstance(value, (list, tuple, np.ndarray)):
    return [json_ready(v) for v in value]
  if isinstance(value, (bool, np.bool_)):
    return bool(value)
  if isinstance(value, (int, np.integer)):
    return int(value)
  if isinstance(value, (float, np.floating)):
    return float(value) if math.isfinite(value) else None
  return value


def write_json(record: Mapping[str, Any], path: str) -> None:
  with open(path, "w", encoding="utf-8") as f:
    json.dump(json_ready(record), f, indent=2, sort_keys=True, allow_nan=False)
    f.write("\n")


def write_frame(frame: pd.DataFrame, path: str) -> None:
  frame.to_csv(path, index=False, lineterminator="\n")


@contextlib.contextmanager
def stage(name: str) -> Iterator[None]:
  """Times a stage and turns its failures into StageError.

  Invalid or unreadable data maps to EXIT_DATA, anything else to EXIT_INTERNAL.
  """
  start_time = time.time()
  try:
    yield
  except StageError:
    raise
  except (ValueError, OSError) as e:
    raise StageError(name, str(e), EXIT_DATA) from e
  except Exception as e:  # pylint: disable=broad-except
    raise StageError(name, f"{type(e).__name__}: {e}", EXIT_INTERNAL) from e
  logging.info("Stage %s took %.3f s", name, time.time() - start_time)


def _concatenate(tapes: Sequence[tape_lib.Tape]) -> tape_lib.Tape:
  if len(tapes) == 1:
    return tapes[0]
  metadata = tapes[0].metadata
  for other in tapes[1:]:
    if (
        other.metadata.price_exponent != metadata.price_exponent
        or other.metadata.volume_exponent != metadata.volume_exponent
    ):
      raise ValueError("Input tapes should share their decimal exponents")
  columns = {
      name: np.concatenate([t.columns()[name] for t in tapes])
      for name in tapes[0].columns()
  }
  return tape_lib.Tape.from_columns(columns, metadata)


class Run:
  """Lazily computed pipeline products of one configuration.

  Each product is computed once, inside its stage, the first time a command
  asks for it. Commands record their results in `results` for the manifest.
  """

  def __init__(self, config: RunConfig):
    self.config = config
    self.results: Dict[str, Any] = {}

  def path(self, name: str) -> str:
    return os.path.join(self.config.output_dir, name)

  @cached_property
  def tape(self) -> tape_lib.Tape:
    with stage("ingest"):
      if not self.config.inputs:
        raise ValueError("No input tape given")
      return _concatenate([
          tape_lib.parse_tape(path, self.config.file_format)
          for path in self.config.inputs
      ])

  @cached_property
  def daily(self) -> List[tape_lib.DailyAggregate]:
    with stage("aggregates"):
      return tape_lib.daily_aggregates(self.tape)

  @cached_property
  def metaorders(self) -> segment.MetaOrders:
    tape = self.tape
    with stage("segment"):
      metaorders = segment.segment(
          tape, self.config.segmentation, self.config.workers
      )
      if not len(metaorders):
        raise ValueError("no metaorders")
      return metaorders

  @cached_property
  def eligible_index(self) -> np.ndarray:
    """Indices of the metaorders with at least `min_children` child trades."""
    metaorders = self.metaorders
    with stage("eligible"):
      index = np.flatnonzero(
          metaorders.n_children >= self.config.min_children
      )
      if not index.size:
        raise ValueError(
            f"no metaorders with at least {self.config.min_children} child"
            " trades"
        )
      logging.info(
          "%d of %d metaorders have at least %d child trades",
          index.size,
          len(metaorders),
          self.config.min_children,
      )
      return index

  @cached_property
  def eligible(self) -> segment.MetaOrders:
    return self.metaorders.take(self.eligible_index)

  @cached_property
  def paths(self) -> impact.ImpactPaths:
    eligible = self.eligible
    with stage("impact"):
      return impact.impact_paths(self.tape, eligible, self.config.n_points)

  @cached_property
  def summaries(self) -> impact.ImpactSummaries:
    paths = self.paths
    with stage("impact"):
      return impact.impact_summaries(self.tape, self.eligible, paths)

  @cached_property
  def isolation(self) -> impact.IsolationLabels:
    metaorders = self.metaorders
    with stage("isolate"):
      return impact.select_isolated(
          self.tape,
          metaorders,
          self.config.isolation_threshold,
          self.config.horizon_mult,
      )


def cmd_ingest(run: Run) -> None:
  """Writes the binary twin of the input tape and its validation report."""
  tape = run.tape
  with stage("ingest"):
    tape_lib.write_binary(tape, run.path("tape.bin"))
  record = {
      "n_trades": len(tape),
      "report": tape.report.as_dict() if tape.report else {},
      "metadata": tape.metadata.as_dict(),
  }
  if len(tape):
    daily = run.daily
    write_frame(tape_lib.aggregates_frame(daily), run.path("daily.csv"))
    record["n_days"] = len(daily)
  run.results["ingest"] = record


def cmd_segment(run: Run) -> None:
  """Writes the metaorder table and the population statistics."""
  metaorders = run.metaorders
  tape = run.tape
  with stage("segment_stats"):
    write_frame(segment.metaorder_table(metaorders), run.path("metaorders.csv"))
    child_counts = segment.child_count_table(metaorders)

    histograms = segment.size_distributions(metaorders)
    write_frame(
        pd.concat(
            [h.to_frame().assign(quantity=name) for name, h in histograms.items()],
            ignore_index=True,
        ),
        run.path("size_distributions.csv"),
    )

    profiles = {"all": segment.execution_profile(tape, metaorders)}
    profiles.update(segment.profile_subpopulations(tape, metaorders))
    write_frame(
        pd.concat(
            [
                p.to_frame().assign(population=name, n=p.n)
                for name, p in profiles.items()
            ],
            ignore_index=True,
        ),
        run.path("execution_profile.csv"),
    )

    active = segment.active_metaorder_series(
        metaorders, run.config.active_resolution
    )
    write_frame(active.to_frame(), run.path("active_series.csv"))

    record = {
        "n_metaorders": len(metaorders),
        "child_counts": child_counts,
        "execution_profile_max_deviation": {
            name: p.max_deviation for name, p in profiles.items()
        },
    }
    if np.any(metaorders.has_duration):
      activity = segment.concurrent_activity(metaorders)
      write_frame(activity.to_frame(), run.path("concurrent_activity.csv"))
  run.results["segment"] = record


def cmd_impact(run: Run) -> None:
  """Writes impact summaries, peak impact curves and the trajectory check."""
  summaries = run.summaries
  paths = run.paths
  bins = run.config.bins
  with stage("impact_curves"):
    write_frame(summaries.to_frame(), run.path("impact_summaries.csv"))
    curve = impact.peak_impact_curve(
        summaries, bins, min_children=run.config.min_children
    )
    write_frame(curve.to_frame(), run.path("peak_impact_curve.csv"))
    fit = curve.fit()

    trajectory_curve = impact.peak_impact_curve(
        summaries,
        bins,
        include_in_trajectory=True,
        paths=paths,
        min_children=run.config.min_children,
    )
    write_frame(
        trajectory_curve.to_frame(),
        run.path("peak_impact_curve_trajectory.csv"),
    )
    record = {
        "n_metaorders": len(summaries),
        "peak_fit": fit.as_dict(),
        "peak_fit_trajectory": trajectory_curve.fit().as_dict(),
    }
    try:
      comparison = impact.trajectory_comparison(paths, summaries, curve)
    except ValueError as e:
      logging.warning("Skipping the trajectory comparison: %s", e)
    else:
      write_frame(comparison.to_frame(), run.path("trajectory_comparison.csv"))
      record["trajectory_max_relative_error"] = comparison.max_relative_error()
    try:
      prefactors = impact.speed_prefactors(
          paths,
          summaries,
          binning.LogBinning(bins_per_decade=4, n_min=run.config.n_min),
          delta=fit.exponent,
      )
    except ValueError as e:
      logging.warning("Skipping speed prefactors: %s", e)
    else:
      write_frame(prefactors.to_frame(), run.path("speed_prefactors.csv"))
      record["speed_prefactors"] = prefactors.as_dict()
  run.results["impact"] = record


def cmd_yratio(run: Run) -> None:
  """Writes the daily liquidity series and its Gaussian fit."""
  summaries = run.summaries
  daily = run.daily
  with stage("yratio"):
    series = impact.daily_liquidity_series(summaries, daily)
    write_frame(impact.liquidity_frame(series), run.path("daily_liquidity.csv"))
    run.results["yratio"] = {
        "n_days": len(series),
        "gaussian_fit": estimators.fit_gaussian(impact.y_ratios(series)).as_dict(),
    }


def cmd_surface(run: Run) -> None:
  """Writes the impact surfaces and their exponent fits."""
  summaries = run.summaries
  metaorders = run.eligible
  isolated_mask = run.isolation.isolated[run.eligible_index]
  q_bins = run.config.bins
  second_bins = binning.LogBinning(bins_per_decade=4, n_min=run.config.n_min)
  with stage("surface"):
    surface = impact.impact_surface(
        summaries, metaorders, run.tape, q_bins, second_bins, "mu_v"
    )
    write_frame(surface.to_frame(), run.path("impact_surface.csv"))
    record = {}
    try:
      record["surface_fit"] = impact.fit_surface(surface).as_dict()
    except ValueError as e:
      logging.warning("Skipping the impact surface fit: %s", e)
    try:
      collapse = impact.imbalance_collapse(surface)
    except ValueError as e:
      logging.warning("Skipping the imbalance collapse: %s", e)
    else:
      record["imbalance_collapse"] = collapse.as_dict()
    try:
      isolated = impact.impact_surface(
          summaries,
          metaorders,
          run.tape,
          q_bins,
          second_bins,
          "duration",
          mask=isolated_mask,
      )
      isolated_fit = impact.fit_surface(isolated)
    except ValueError as e:
      logging.warning("Skipping the isolated-metaorder surface: %s", e)
    else:
      write_frame(isolated.to_frame(), run.path("impact_surface_isolated.csv"))
      record["isolated_surface_fit"] = isolated_fit.as_dict()
  run.results["surface"] = record


def cmd_isolate(run: Run) -> None:
  """Writes the isolated/informed labels."""
  labels = run.isolation
  with stage("isolate"):
    write_frame(labels.to_frame(), run.path("isolation.csv"))
  run.results["isolate"] = labels.as_dict()


def cmd_eventstudy(run: Run) -> None:
  """Writes the event-study curves of the standard and volume buckets."""
  metaorders = run.metaorders
  labels = run.isolation
  with stage("eventstudy"):
    buckets = impact.standard_buckets(run.tape, metaorders, labels)
    buckets.update(impact.volume_buckets(metaorders))
    curves = impact.event_study(
        run.tape,
        metaorders,
        buckets,
        n_points=run.config.n_points,
        n_min=run.config.n_min,
    )
    write_frame(impact.event_study_frame(curves), run.path("event_study.csv"))
    run.results["eventstudy"] = {
        key: {"n": curve.n, "peak": curve.peak, "permanent": curve.permanent}
        for key, curve in curves.items()
    }


def cmd_acf(run: Run) -> None:
  """Writes the metaorder sign autocorrelation and the size tail fit."""
  metaorders = run.eligible
  with stage("acf"):
    max_lag = min(run.config.max_lag, len(metaorders) - 1)
    if max_lag < 1:
      raise ValueError("The sign autocorrelation requires 2 metaorders")
    acf = estimators.sign_acf(
        metaorders.sign,
        max_lag=max_lag,
        fit_range=(1, max(2, min(100, max_lag))),
    )
    write_frame(
        pd.DataFrame({"lag": acf.lags, "acf": acf.values}),
        run.path("sign_acf.csv"),
    )
    record = {"sign_acf": acf.as_dict()}
    threshold = float(np.quantile(metaorders.q, run.config.tail_quantile))
    try:
      record["size_tail"] = estimators.hill_tail(metaorders.q, threshold).as_dict()
    except ValueError as e:
      logging.warning("Skipping the size tail fit: %s", e)
  run.results["acf"] = record


_PIPELINE = (
    ("ingest", cmd_ingest),
    ("segment", cmd_segment),
    ("impact", cmd_impact),
    ("yratio", cmd_yratio),
    ("isolate", cmd_isolate),
    ("surface", cmd_surface),
    ("eventstudy", cmd_eventstudy),
    ("acf", cmd_acf),
)


def fitted_parameters(results: Mapping[str, Any]) -> Dict[str, Any]:
  """Headline parameters of a pipeline run, null when not estimated."""

  def lookup(*keys: str) -> Any:
    value = results
    for key in keys:
      if not isinstance(value, Mapping) or key not in value:
        return None
      value = value[key]
    return value

  return {
      "delta": lookup("impact", "peak_fit", "exponent"),
      "y_tilde": lookup("impact", "peak_fit", "prefactor"),
      "y0": lookup("yratio", "gaussian_fit", "mean"),
      "sigma_y": lookup("yratio", "gaussian_fit", "std"),
      "delta_prime": lookup("surface", "surface_fit", "delta_prime"),
      "gamma": lookup("acf", "sign_acf", "gamma"),
      "hill_alpha": lookup("acf", "size_tail", "hill_alpha"),
  }


def cmd_pipeline(run: Run) -> None:
  """Runs every measurement stage in order."""
  progress = tqdm.tqdm(_PIPELINE, desc="pipeline", disable=None)
  for name, command in progress:
    progress.set_postfix_str(name)
    command(run)
  run.results["parameters"] = fitted_parameters(run.results)


def load_scenario(
    source: Optional[str], seed: Optional[int]
) -> synth.SyntheticScenario:
  scenario = (
      synth.SyntheticScenario.from_json(source)
      if source
      else synth.SyntheticScenario()
  )
  if seed is not None:
    scenario = scenario.replace(seed=seed)
  return scenario


def cmd_synth(run: Run, args: argparse.Namespace) -> None:
  """Writes a synthetic tape with its ground truth."""
  with stage("synth"):
    scenario = load_scenario(args.scenario, args.seed)
    tape, truth = synth.generate(scenario)
    if args.synth_format == "csv":
      tape_lib.write_csv(tape, run.path("tape.csv"))
    else:
      tape_lib.write_binary(tape, run.path("tape.bin"))
    truth.write_labels(tape, run.path("ground_truth.csv"))
    write_frame(truth.metaorders, run.path("planted_metaorders.csv"))
    write_frame(truth.days, run.path("planted_days.csv"))
    with open(run.path("scenario.json"), "w", encoding="utf-8") as f:
      f.write(scenario.to_json() + "\n")
  run.results["synth"] = {
      "scenario": scenario.as_dict(),
      "n_trades": len(tape),
      "n_metaorders": len(truth.metaorders),
  }


def _max_abs_difference(a: np.ndarray, b: np.ndarray) -> float:
  a = np.asarray(a, dtype=np.float64)
  b = np.asarray(b, dtype=np.float64)
  if a.shape != b.shape:
    return float("inf")
  both_nan = np.isnan(a) & np.isnan(b)
  difference = np.where(both_nan, 0.0, np.abs(a - b))
  return float(np.nan_to_num(difference, nan=np.inf).max(initial=0.0))


def cmd_oracle(run: Run, args: argparse.Namespace) -> None:
  """Checks the pipeline against the naive oracle on a synthetic tape."""
  with stage("oracle"):
    scenario = load_scenario(args.scenario, args.seed)
    tape, truth = synth.generate(scenario)
    metaorders = segment.segment(
        tape,
        segment.SegmentationConfig(t_inact=scenario.t_inact),
        run.config.workers,
    )
    agreement = synth.segmentation_agreement(
        metaorders.trade_labels, truth.trade_labels
    )
    reference = synth.brute_force_stats(
        tape,
        truth,
        resolution=run.config.active_resolution,
        max_lag=min(20, max(len(truth.metaorders) - 1, 1)),
        n_points=run.config.n_points,
    )

    planted = metaorders.take(
        np.flatnonzero(metaorders.trader_id < synth.BACKGROUND_TRADER_BASE)
    )
    summaries = impact.impact_summaries(
        tape, planted, impact.impact_paths(tape, planted, run.config.n_points)
    )
    active = segment.active_metaorder_series(
        planted, run.config.active_resolution
    )
    imbalance = impact.market_imbalance_units(tape, planted.t_start, planted.t_end)
    acf = estimators.autocorrelation(
        planted.sign, reference.sign_acf.shape[0] - 1
    )
    differences = {
        "imbalance_units": _max_abs_difference(imbalance, reference.imbalance_units),
        "n_buy": _max_abs_difference(active.n_buy, reference.n_buy),
        "n_sell": _max_abs_difference(active.n_sell, reference.n_sell),
        "sign_acf": _max_abs_difference(acf, reference.sign_acf),
        "peak": _max_abs_difference(summaries.peak, reference.peak),
        "exec": _max_abs_difference(summaries.exec, reference.exec),
        "perm": _max_abs_difference(summaries.perm, reference.perm),
    }
  run.results["oracle"] = {
      "n_trades": len(tape),
      "segmentation": agreement.as_dict(),
      "max_abs_differences": differences,
  }


class _ArgumentParser(argparse.ArgumentParser):

  def error(self, message: str):
    raise UsageError(f"{self.prog}: error: {message}")


_TAPE_COMMANDS: Mapping[str, Callable[[Run], None]] = {
    "ingest": cmd_ingest,
    "segment": cmd_segment,
    "impact": cmd_impact,
    "yratio": cmd_yratio,
    "surface": cmd_surface,
    "eventstudy": cmd_eventstudy,
    "isolate": cmd_isolate,
    "acf": cmd_acf,
    "pipeline": cmd_pipeline,
}
_SCENARIO_COMMANDS = {
    "synth": cmd_synth,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
  """Builds the parser of every sub-command."""
  common = _ArgumentParser(add_help=False)
  common.add_argument(
      "--output_dir",
      default=os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR),
      help=f"Output directory, defaults to ${OUTPUT_DIR_ENV}.",
  )
  common.add_argument("--workers", type=int, default=1)
  common.add_argument("--n_points", type=int, default=41)
  common.add_argument("--active_resolution", type=float, default=600.0)
  common.add_argument(
      "--verbosity",
      default="info",
      choices=("debug", "info", "warning", "error"),
  )

  tape_options = _ArgumentParser(add_help=False)
  tape_options.add_argument("inputs", nargs="+", help="Tape files.")
  tape_options.add_argument(
      "--format", dest="file_format", default="auto",
      choices=("auto", "csv", "binary"),
  )
  tape_options.add_argument("--t_inact", type=float, default=3600.0)
  tape_options.add_argument(
      "--keep_mean_reverting", action="store_true",
      help="Keep metaorders that undo the trader's previous one.",
  )
  tape_options.add_argument(
      "--no_reversal_split", action="store_true",
      help="Leave direction-reversing trades unassigned until the next gap.",
  )
  tape_options.add_argument("--bins_per_decade", type=int, default=8)
  tape_options.add_argument("--n_min", type=int, default=50)
  tape_options.add_argument(
      "--min_children", type=int, default=2,
      help="Minimum child trades of a metaorder in the impact statistics.",
  )
  tape_options.add_argument("--isolation_threshold", type=float, default=0.75)
  tape_options.add_argument("--horizon_mult", type=float, default=10.0)
  tape_options.add_argument("--max_lag", type=int, default=1000)
  tape_options.add_argument("--tail_quantile", type=float, default=0.9)

  scenario_options = _ArgumentParser(add_help=False)
  scenario_options.add_argument(
      "--scenario", default=None, help="Scenario JSON file or string."
  )
  scenario_options.add_argument("--seed", type=int, default=None)

  parser = _ArgumentParser(
      prog="metaimpact", description="Metaorder impact measurement pipeline."
  )
  parser.add_argument(
      "--version", action="version", version=metaimpact.__version__
  )
  commands = parser.add_subparsers(dest="command", required=True)
  for name, command in _TAPE_COMMANDS.items():
    commands.add_parser(
        name, parents=[common, tape_options], help=command.__doc__
    )
  synth_parser = commands.add_parser(
      "synth", parents=[common, scenario_options], help=cmd_synth.__doc__
  )
  synth_parser.add_argument(
      "--synth_format", default="binary", choices=("binary", "csv")
  )
  commands.add_parser(
      "oracle", parents=[common, scenario_options], help=cmd_oracle.__doc__
  )
  return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
  """Builds the run configuration of parsed arguments."""
  options = vars(args)
  tape_fields = {}
  if "inputs" in options:
    tape_fields = dict(
        inputs=args.inputs,
        file_format=args.file_format,
        segmentation=segment.SegmentationConfig(
            t_inact=args.t_inact,
            drop_mean_reverting=not args.keep_mean_reverting,
            reversal_starts_new=not args.no_reversal_split,
        ),
        bins_per_decade=args.bins_per_decade,
        n_min=args.n_min,
        min_children=args.min_children,
        isolation_threshold=args.isolation_threshold,
        horizon_mult=args.horizon_mult,
        max_lag=args.max_lag,
        tail_quantile=args.tail_quantile,
    )
  return RunConfig(
      output_dir=args.output_dir,
      workers=args.workers,
      n_points=args.n_points,
      active_resolution=args.active_resolution,
      **tape_fields,
  )


def main(argv: Optional[Sequence[str]] = None) -> int:
  """Runs a sub-command and returns the process exit code."""
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
    config = config_from_args(args)
    config.ensure_output_dir()
  except (UsageError, ValueError) as e:
    sys.stderr.write(f"{e}\n")
    return EXIT_USAGE
  logging.set_verbosity(args.verbosity)

  run = Run(config)
  try:
    if args.command in _SCENARIO_COMMANDS:
      _SCENARIO_COMMANDS[args.command](run, args)
    else:
      _TAPE_COMMANDS[args.command](run)
  except StageError as e:
    logging.error("%s", e)
    sys.stderr.write(f"{e}\n")
    return e.exit_code

  write_json(
      {
          "schema_version": MANIFEST_SCHEMA_VERSION,
          "version": metaimpact.__version__,
          "command": args.command,
          "config": config.as_dict(),
          "results": run.results,
      },
      run.path("manifest.json"),
  )
  return EXIT_OK


def run_main() -> None:
  sys.exit(main())


if __name__ == "__main__":
  run_main()
